use crate::error::{Error, Result};
use crate::geometry::{Cylinder, GridSpec, Point, ScalarField};

use super::cylinder_nodes;

/// `u_r(t, x) = r⁻² u(t⁰ + r²t, x⁰ + rx)` sampled on `Q₁(0)`.
///
/// The output grid has spatial step `h/r` and time step `dt/r²` when these
/// divide the unit window (at least 5 nodes per axis and 3 slices), so node
/// aligned bases map nodes onto nodes.
pub fn blowup(u: &ScalarField, base: &Point, r: f64) -> Result<ScalarField> {
    let g = u.grid();
    if base.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            found: base.dim(),
        });
    }
    if !(r >= 2.0 * g.h() * (1.0 - 1e-9)) {
        return Err(Error::Domain(format!(
            "blow-up radius {r} is below twice the grid step {}",
            g.h()
        )));
    }
    if !g.covers(base.t - r * r, base.t + r * r, &base.x, r) {
        return Err(Error::Window(format!(
            "Q_{r}({:?}) leaves the field's domain",
            base
        )));
    }
    let half_nodes = ((r / g.h()).round() as usize).max(2);
    let half_slices = ((r * r / g.dt()).round() as usize).max(1);
    let n = g.dim();
    let target = GridSpec::new(
        vec![-1.0; n],
        vec![1.0; n],
        1.0 / half_nodes as f64,
        (-1.0, 1.0),
        1.0 / half_slices as f64,
    )?;
    let scale = 1.0 / (r * r);
    let mut values = Vec::with_capacity(target.len());
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    for k in 0..target.slices() {
        let t = base.t + r * r * target.time(k);
        for s in 0..target.space_len() {
            target.space_coords_into(s, &mut x);
            for a in 0..n {
                y[a] = base.x[a] + r * x[a];
            }
            let v = u.interpolate(t, &y).ok_or_else(|| {
                Error::Window(format!("blow-up point t={t}, x={y:?} is outside the field"))
            })?;
            values.push(scale * v);
        }
    }
    ScalarField::new(target, values)
}

/// `sup |∂ₜu|` over `Q_r(base)` for each radius, which equals
/// `sup_{Q₁} |∂ₜu_r|`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub base: Point,
    pub radii: Vec<f64>,
    pub suprema: Vec<f64>,
    pub tol: f64,
    pub pass: bool,
}

/// Passes iff the suprema are nonincreasing up to `tol` and the last one is
/// at most half the first.
pub fn blowup_time_derivative_decay(u: &ScalarField, base: &Point, radii: &[f64], tol: f64) -> Result<DecayReport> {
    if radii.is_empty() || radii.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::Malformed("radii must be nonempty and decreasing".into()));
    }
    let g = u.grid();
    let mut suprema = Vec::with_capacity(radii.len());
    for &r in radii {
        if !g.covers(base.t - r * r, base.t + r * r, &base.x, r) {
            return Err(Error::Window(format!("Q_{r}({base:?}) leaves the field's domain")));
        }
        let cyl = Cylinder::full(base.clone(), r)?;
        let sup = cylinder_nodes(g, &cyl)
            .into_iter()
            .map(|(k, s)| u.time_derivative_unchecked(k, s).value.abs())
            .fold(0.0, f64::max);
        suprema.push(sup);
    }
    let monotone = suprema.windows(2).all(|w| w[1] <= w[0] + tol);
    let decayed = suprema[suprema.len() - 1] <= 0.5 * suprema[0] + tol;
    Ok(DecayReport {
        base: base.clone(),
        radii: radii.to_vec(),
        suprema,
        tol,
        pass: monotone && decayed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{HProfile, Profile, WStarProfile};

    fn grid() -> GridSpec {
        GridSpec::cube(2, 1.0, 65, (-1.0, 1.0), 129).unwrap()
    }

    #[test]
    fn h_is_invariant() {
        let h = HProfile::along_e1(1.0, 2.0, 2).unwrap();
        let u = h.sample(&grid()).unwrap();
        for r in [0.5, 0.25] {
            let ur = blowup(&u, &Point::new(0.0, [0.0, 0.25]), r).unwrap();
            let exact = h.sample(ur.grid()).unwrap();
            assert!(ur.max_abs_diff(&exact).unwrap() < 1e-12);
        }
        let w = WStarProfile::along_en(1.0, 1.0, 2).unwrap();
        let u = w.sample(&grid()).unwrap();
        let ur = blowup(&u, &Point::origin(2), 0.5).unwrap();
        assert!(ur.max_abs_diff(&w.sample(ur.grid()).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn cubic_perturbation_scales_linearly() {
        let h = HProfile::along_e1(1.0, 1.0, 2).unwrap();
        let u = ScalarField::from_fn(grid(), |t, x| h.value(t, x).unwrap() + 0.01 * x[0].powi(3)).unwrap();
        for r in [0.5, 0.25, 0.125] {
            let ur = blowup(&u, &Point::origin(2), r).unwrap();
            let d = ur.max_abs_diff(&h.sample(ur.grid()).unwrap()).unwrap();
            assert!((d - 0.01 * r).abs() < 1e-12, "r={r}: {d}");
        }
    }

    #[test]
    fn group_action() {
        let h = HProfile::along_e1(1.0, 1.0, 2).unwrap();
        let u = h.sample(&grid()).unwrap();
        let o = Point::origin(2);
        let twice = blowup(&blowup(&u, &o, 0.5).unwrap(), &o, 0.5).unwrap();
        let once = blowup(&u, &o, 0.25).unwrap();
        assert_eq!(twice.grid(), once.grid());
        assert!(twice.max_abs_diff(&once).unwrap() < 1e-10);
    }

    #[test]
    fn window_and_radius_errors() {
        let u = ScalarField::zeros(grid());
        assert!(matches!(blowup(&u, &Point::new(0.0, [0.9, 0.0]), 0.5), Err(Error::Window(_))));
        assert!(matches!(blowup(&u, &Point::origin(2), 0.01), Err(Error::Domain(_))));
    }

    #[test]
    fn decay_of_time_independent_field() {
        let w = WStarProfile::along_en(1.0, 1.0, 2).unwrap();
        let u = w.sample(&grid()).unwrap();
        let rep = blowup_time_derivative_decay(&u, &Point::origin(2), &[0.5, 0.25, 0.125], 1e-12).unwrap();
        assert!(rep.suprema.iter().all(|&s| s == 0.0));
        assert!(rep.pass);
        // a time-dependent bump away from the base decays once radii exclude it
        let bump = ScalarField::from_fn(grid(), |t, x| {
            let d2 = (x[0] - 0.6).powi(2) + x[1].powi(2);
            w.value(t, x).unwrap() + t * t * (-(d2 / 0.01)).exp()
        })
        .unwrap();
        let rep = blowup_time_derivative_decay(&bump, &Point::origin(2), &[0.9, 0.5, 0.25, 0.09], 1e-9).unwrap();
        assert!(rep.pass, "{:?}", rep.suprema);
        assert!(rep.suprema[3] < 1e-6);
    }
}

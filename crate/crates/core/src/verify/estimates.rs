use crate::error::{Error, Result};
use crate::freeboundary::Phase;
use crate::geometry::{Cylinder, Point, ScalarField};
use crate::solver::CoefficientPair;

use super::{cylinder_nodes, EstimateReport, Relation};

fn check_window(u: &ScalarField, base: &Point, r: f64) -> Result<()> {
    let g = u.grid();
    if base.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            found: base.dim(),
        });
    }
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    if !g.covers(base.t - r * r, base.t + r * r, &base.x, r) {
        return Err(Error::Window(format!("Q_{r}({base:?}) leaves the field's domain")));
    }
    Ok(())
}

/// Nondegeneracy at a free-boundary point: for the positive phase
/// `sup_{Q_r⁻} u ≥ (1/8n) inf_{Q_r} λ₊ r²`, for the negative phase
/// `inf_{Q_r⁻} u ≤ −(1/8n) inf_{Q_r} λ₋ r²`, compared with slack `1 − h/r`.
pub fn check_nondegeneracy(
    u: &ScalarField,
    coeffs: &CoefficientPair,
    base: &Point,
    r: f64,
    phase: Phase,
) -> Result<EstimateReport> {
    check_window(u, base, 2.0 * r)?;
    let g = u.grid();
    let n = g.dim();
    // base must sit within about a cell of the claimed phase boundary
    let near = Cylinder::full(base.clone(), 2.0 * g.h())?;
    let sign = if phase == Phase::Positive { 1.0 } else { -1.0 };
    let k0 = g.time_range(base.t - 0.5 * g.dt(), base.t + 0.5 * g.dt());
    let local: Vec<f64> = cylinder_nodes(g, &near)
        .into_iter()
        .filter(|(k, _)| k0.contains(k))
        .map(|(k, s)| sign * u.value(k, s))
        .collect();
    if !(local.iter().any(|&v| v > 0.0) && local.iter().any(|&v| v <= 0.0)) {
        return Err(Error::Hypothesis(format!(
            "{base:?} is not within a grid cell of the {} phase boundary",
            if phase == Phase::Positive { "positive" } else { "negative" }
        )));
    }
    let back = Cylinder::negative(base.clone(), r)?;
    let full = Cylinder::full(base.clone(), r)?;
    let lambda = cylinder_nodes(g, &full)
        .into_iter()
        .map(|(k, s)| {
            let x = g.space_coords(s);
            match phase {
                Phase::Positive => coeffs.plus.eval(g.time(k), &x),
                Phase::Negative => coeffs.minus.eval(g.time(k), &x),
            }
        })
        .fold(f64::INFINITY, f64::min);
    let bound = lambda * r * r / (8.0 * n as f64);
    let slack = 1.0 - g.h() / r;
    let values = cylinder_nodes(g, &back).into_iter().map(|(k, s)| u.value(k, s));
    Ok(match phase {
        Phase::Positive => EstimateReport::new(
            "nondegeneracy_positive",
            base.clone(),
            r,
            Relation::AtLeast,
            values.fold(f64::NEG_INFINITY, f64::max),
            bound,
            slack,
            0.0,
        ),
        Phase::Negative => EstimateReport::new(
            "nondegeneracy_negative",
            base.clone(),
            r,
            Relation::AtMost,
            values.fold(f64::INFINITY, f64::min),
            -bound,
            slack,
            0.0,
        ),
    })
}

/// `sup_{Q_r⁻} |∂ₜu|` against `r² + (r^{−n−2} ∫_{Q_{2r}⁻} |∂ₜu|²)^{1/2}`.
/// The constant is not known a priori: the report carries the ratio as the
/// extra `ratio` and passes iff it is at most `constant`.
pub fn sup_mean_time_derivative(u: &ScalarField, base: &Point, r: f64, constant: f64) -> Result<EstimateReport> {
    check_window(u, base, 2.0 * r)?;
    let g = u.grid();
    let n = g.dim();
    let inner = Cylinder::negative(base.clone(), r)?;
    let outer = Cylinder::negative(base.clone(), 2.0 * r)?;
    let inner_nodes = cylinder_nodes(g, &inner);
    let outer_nodes = cylinder_nodes(g, &outer);
    let slices = {
        let mut ks: Vec<usize> = outer_nodes.iter().map(|p| p.0).collect();
        ks.dedup();
        ks.len()
    };
    if inner_nodes.is_empty() || slices < 3 {
        return Err(Error::Window(format!(
            "Q_{}⁻({base:?}) holds {slices} time slices, need at least 3",
            2.0 * r
        )));
    }
    let lhs = inner_nodes
        .iter()
        .map(|&(k, s)| u.time_derivative_unchecked(k, s).value.abs())
        .fold(0.0, f64::max);
    let cell = g.h().powi(n as i32) * g.dt();
    let integral: f64 = outer_nodes
        .iter()
        .map(|&(k, s)| u.time_derivative_unchecked(k, s).value.powi(2) * cell)
        .sum();
    let rhs = r * r + (integral / r.powi(n as i32 + 2)).sqrt();
    let ratio = lhs / rhs;
    Ok(
        EstimateReport::new("mean_time_derivative", base.clone(), r, Relation::AtMost, lhs, rhs, constant, 0.0)
            .with_extra("ratio", ratio)
            .with_extra("integral", integral),
    )
}

/// Largest `c ≤ 1` such that `u ≥ −deadband` on the full cylinder
/// `Q_{c r}(base)`, given that it holds on `Q_r⁻(base)`. Passes iff `c ≥ c0`.
pub fn check_sign_persistence(u: &ScalarField, base: &Point, r: f64, deadband: f64, c0: f64) -> Result<EstimateReport> {
    check_window(u, base, r)?;
    let g = u.grid();
    let back = Cylinder::negative(base.clone(), r)?;
    if let Some((k, s)) = cylinder_nodes(g, &back)
        .into_iter()
        .find(|&(k, s)| u.value(k, s) < -deadband)
    {
        return Err(Error::Hypothesis(format!(
            "u = {} < 0 in the backward cylinder at t={}, x={:?}",
            u.value(k, s),
            g.time(k),
            g.space_coords(s)
        )));
    }
    let full = Cylinder::full(base.clone(), r)?;
    let mut c: f64 = 1.0;
    for (k, s) in cylinder_nodes(g, &full) {
        if u.value(k, s) < -deadband {
            let x = g.space_coords(s);
            let dx = x
                .iter()
                .zip(&base.x)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let dt = (g.time(k) - base.t).abs().sqrt();
            c = c.min(dx.max(dt) / r);
        }
    }
    Ok(EstimateReport::new(
        "sign_persistence",
        base.clone(),
        r,
        Relation::AtLeast,
        c,
        c0,
        1.0,
        0.0,
    ))
}

/// Nodewise difference of two solutions of a forward pair; passes iff at
/// most `10 · solver_tol`.
pub fn check_forward_uniqueness(u1: &ScalarField, u2: &ScalarField, solver_tol: f64) -> Result<EstimateReport> {
    if u1.grid() != u2.grid() {
        return Err(Error::DataMismatch("forward pair lives on different grids".into()));
    }
    let g = u1.grid();
    let diff = u1.max_abs_diff(u2)?;
    Ok(EstimateReport::new(
        "forward_uniqueness",
        Point::new(g.t_start(), g.lower().to_vec()),
        0.0,
        Relation::AtMost,
        diff,
        10.0 * solver_tol,
        1.0,
        0.0,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{HProfile, PolynomialCaloricProfile, Profile, WStarProfile};
    use crate::geometry::GridSpec;

    fn grid() -> GridSpec {
        GridSpec::cube(2, 1.0, 33, (-1.0, 1.0), 65).unwrap()
    }

    #[test]
    fn nondegeneracy_of_h() {
        let u = HProfile::along_e1(1.0, 1.0, 2).unwrap().sample(&grid()).unwrap();
        let c = CoefficientPair::constant(1.0, 1.0).unwrap();
        let p = check_nondegeneracy(&u, &c, &Point::origin(2), 0.5, Phase::Positive).unwrap();
        assert_eq!(p.lhs, 0.125);
        assert_eq!(p.rhs, 0.015625);
        assert!(p.pass);
        let m = check_nondegeneracy(&u, &c, &Point::origin(2), 0.5, Phase::Negative).unwrap();
        assert_eq!(m.lhs, -0.125);
        assert_eq!(m.rhs, -0.015625);
        assert!(m.pass);
        assert!(matches!(
            check_nondegeneracy(&u, &c, &Point::new(0.0, [0.3, 0.0]), 0.25, Phase::Positive),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn mean_time_derivative_examples() {
        let w = WStarProfile::along_en(1.0, 1.0, 2).unwrap().sample(&grid()).unwrap();
        let rep = sup_mean_time_derivative(&w, &Point::origin(2), 0.25, 10.0).unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert_eq!(rep.extra("ratio"), Some(0.0));
        let z = PolynomialCaloricProfile::new(1.0, vec![0.0, 0.0], 1.0).unwrap();
        let u = z.sample(&grid()).unwrap();
        let rep = sup_mean_time_derivative(&u, &Point::origin(2), 0.25, 10.0).unwrap();
        assert!((rep.lhs - 1.0).abs() < 1e-9);
        // closed form: ∫ = a0² |Q_{2r}⁻| = π (2r)² (2r)²
        let exact = std::f64::consts::PI * 0.0625;
        let integral = rep.extra("integral").unwrap();
        assert!((integral - exact).abs() < 0.2 * exact, "{integral} vs {exact}");
        assert!(rep.extra("ratio").unwrap().is_finite() && rep.pass);
    }

    #[test]
    fn sign_persistence_examples() {
        let g = GridSpec::new(vec![0.0, -1.0], vec![1.0, 1.0], 1.0 / 16.0, (-1.0, 1.0), 1.0 / 32.0).unwrap();
        let w = WStarProfile::along_en(1.0, 1.0, 2).unwrap();
        let u = ScalarField::from_fn(g.clone(), |t, x| w.value(t, &[x[1], x[0]]).unwrap()).unwrap();
        let rep = check_sign_persistence(&u, &Point::new(0.0, [0.5, 0.0]), 0.5, 1e-12, 0.5).unwrap();
        assert_eq!(rep.lhs, 1.0);
        let eta = 0.01;
        let dip = ScalarField::from_fn(g, |t, x| 0.5 * (x[0] - 0.5).max(0.0).powi(2) - eta * t.max(0.0)).unwrap();
        let rep = check_sign_persistence(&dip, &Point::new(0.0, [0.5, 0.0]), 0.5, 1e-12, 0.1).unwrap();
        assert!(rep.lhs < 1.0);
        assert!((rep.lhs - (1.0f64 / 32.0).sqrt() / 0.5).abs() < 1e-12);
        let neg = ScalarField::from_fn(dip.grid().clone(), |_, _| -1.0).unwrap();
        assert!(matches!(
            check_sign_persistence(&neg, &Point::new(0.0, [0.5, 0.0]), 0.5, 1e-12, 0.1),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn forward_uniqueness_examples() {
        let u = HProfile::along_e1(1.0, 1.0, 2).unwrap().sample(&grid()).unwrap();
        let rep = check_forward_uniqueness(&u, &u, 1e-10).unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert!(rep.pass);
        let v = ScalarField::from_fn(grid(), |_, x| u.interpolate(0.0, x).unwrap() + 1e-3).unwrap();
        let rep = check_forward_uniqueness(&u, &v, 1e-10).unwrap();
        assert!(!rep.pass && (rep.lhs - 1e-3).abs() < 1e-12);
    }
}

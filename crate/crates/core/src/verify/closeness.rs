use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::exact::{unit, HProfile};
use crate::geometry::{Cylinder, GridSpec, Point, ScalarField};
use crate::solver::CoefficientPair;

use super::{cylinder_nodes, EstimateReport, Gate, Relation};

/// Unit directions of the search grid: 64 azimuths in 2-d, 16 polar × 32
/// azimuthal angles in 3-d, `±1` in 1-d and `±e_i` otherwise.
pub fn search_directions(n: usize) -> Vec<Vec<f64>> {
    match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..64)
            .map(|j| {
                let a = 2.0 * PI * j as f64 / 64.0;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            let mut out = Vec::with_capacity(16 * 32);
            for i in 0..16 {
                let th = PI * (i as f64 + 0.5) / 16.0;
                for j in 0..32 {
                    let ph = 2.0 * PI * j as f64 / 32.0;
                    out.push(vec![th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]);
                }
            }
            out
        }
        _ => (0..2 * n)
            .map(|i| {
                let mut v = vec![0.0; n];
                v[i / 2] = if i % 2 == 0 { 1.0 } else { -1.0 };
                v
            })
            .collect(),
    }
}

/// The three scaled suprema `r⁻² sup|u − h̃|`, `r⁻¹ sup|∇u − ∇h̃|`,
/// `sup|∂ₜu|` over `Q_r(base)` and their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct Closeness {
    pub value_term: f64,
    pub gradient_term: f64,
    pub time_term: f64,
    pub total: f64,
    pub direction: Vec<f64>,
    /// Number of directions tried (1 when the direction was given).
    pub searched: usize,
}

/// Same one-sided/central rule as [`ScalarField::partial`], applied to a
/// function of space nodes.
fn stencil_partial(g: &GridSpec, s: usize, axis: usize, f: impl Fn(usize) -> f64) -> f64 {
    let n = g.shape()[axis];
    let stride = g.stride(axis);
    let i = (s / stride) % n;
    let h = g.h();
    if i == 0 {
        (f(s + stride) - f(s)) / h
    } else if i + 1 == n {
        (f(s) - f(s - stride)) / h
    } else {
        (f(s + stride) - f(s - stride)) / (2.0 * h)
    }
}

/// Distance from `u` to `h̃(x) = h(x − x⁰)`, the one-dimensional profile with
/// coefficients frozen at `base`. Derivatives of `u − h̃` use the grid's
/// difference stencils, so a sampled profile is at distance 0. Without a
/// direction the search grid is scanned for the smallest total.
pub fn closeness_to_h(
    u: &ScalarField,
    coeffs: &CoefficientPair,
    base: &Point,
    r: f64,
    direction: Option<&[f64]>,
) -> Result<Closeness> {
    closeness_to_shifted_h(u, coeffs, base, &vec![0.0; base.dim()], r, direction)
}

/// [`closeness_to_h`] against `h̃(x − x⁰ − shift)`: the cylinder stays at
/// `base` while the profile is centred at a sub-grid point near it.
pub fn closeness_to_shifted_h(
    u: &ScalarField,
    coeffs: &CoefficientPair,
    base: &Point,
    shift: &[f64],
    r: f64,
    direction: Option<&[f64]>,
) -> Result<Closeness> {
    let g = u.grid();
    if base.dim() != g.dim() || shift.len() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            found: if base.dim() != g.dim() { base.dim() } else { shift.len() },
        });
    }
    if g.shape().iter().any(|&n| n < 3) {
        return Err(Error::GridTooSmall("closeness needs 3 nodes per axis".into()));
    }
    if !g.covers(base.t - r * r, base.t + r * r, &base.x, r) {
        return Err(Error::Window(format!("Q_{r}({base:?}) leaves the field's domain")));
    }
    let cyl = Cylinder::full(base.clone(), r)?;
    let nodes = cylinder_nodes(g, &cyl);
    if nodes.is_empty() {
        return Err(Error::Window(format!("Q_{r}({base:?}) contains no grid nodes")));
    }
    let lp = coeffs.plus.eval(base.t, &base.x);
    let lm = coeffs.minus.eval(base.t, &base.x);
    let time_term = nodes
        .iter()
        .map(|&(k, s)| u.time_derivative_unchecked(k, s).value.abs())
        .fold(0.0, f64::max);
    let mut spaces: Vec<usize> = nodes.iter().map(|p| p.1).collect();
    spaces.sort_unstable();
    spaces.dedup();

    let n = g.dim();
    let evaluate = |dir: &[f64]| -> Result<(f64, f64)> {
        let h = HProfile::new(lp, lm, dir.to_vec())?;
        let coords = |s: usize| -> Vec<f64> {
            let mut x = g.space_coords(s);
            for (a, v) in x.iter_mut().enumerate() {
                *v -= base.x[a] + shift[a];
            }
            x
        };
        let hv = |s: usize| h.eval_s(dir.iter().zip(coords(s)).map(|(d, x)| d * x).sum());
        // per space node: h̃ value and discrete gradient
        let table: std::collections::HashMap<usize, (f64, Vec<f64>)> = spaces
            .iter()
            .map(|&s| {
                let grad = (0..n).map(|a| stencil_partial(g, s, a, hv)).collect();
                (s, (hv(s), grad))
            })
            .collect();
        let mut vmax: f64 = 0.0;
        let mut gmax: f64 = 0.0;
        for &(k, s) in &nodes {
            let (hs, hg) = &table[&s];
            vmax = vmax.max((u.value(k, s) - hs).abs());
            let d2: f64 = (0..n)
                .map(|a| (u.partial_unchecked(k, s, a).value - hg[a]).powi(2))
                .sum();
            gmax = gmax.max(d2.sqrt());
        }
        Ok((vmax / (r * r), gmax / r))
    };

    let candidates: Vec<Vec<f64>> = match direction {
        Some(d) => vec![unit(d.to_vec())?],
        None => search_directions(n),
    };
    let mut best: Option<Closeness> = None;
    for dir in &candidates {
        let (v, gr) = evaluate(dir)?;
        let total = v + gr + time_term;
        if best.as_ref().is_none_or(|b| total < b.total) {
            best = Some(Closeness {
                value_term: v,
                gradient_term: gr,
                time_term,
                total,
                direction: dir.clone(),
                searched: candidates.len(),
            });
        }
    }
    Ok(best.expect("at least one direction"))
}

/// [`closeness_to_h`] over the search grid, refined in 2-d by a scan of
/// 0.1° steps around the best coarse azimuth.
pub fn best_closeness_to_h(u: &ScalarField, coeffs: &CoefficientPair, base: &Point, r: f64) -> Result<Closeness> {
    best_closeness_to_shifted_h(u, coeffs, base, &vec![0.0; base.dim()], r)
}

/// [`best_closeness_to_h`] for [`closeness_to_shifted_h`].
pub fn best_closeness_to_shifted_h(
    u: &ScalarField,
    coeffs: &CoefficientPair,
    base: &Point,
    shift: &[f64],
    r: f64,
) -> Result<Closeness> {
    let coarse = closeness_to_shifted_h(u, coeffs, base, shift, r, None)?;
    if u.grid().dim() != 2 {
        return Ok(coarse);
    }
    let a0 = coarse.direction[1].atan2(coarse.direction[0]);
    let step = (0.1f64).to_radians();
    let half = (PI / 64.0 / step).ceil() as i64;
    let mut best = coarse.clone();
    for j in -half..=half {
        let a = a0 + j as f64 * step;
        let c = closeness_to_shifted_h(u, coeffs, base, shift, r, Some(&[a.cos(), a.sin()]))?;
        if c.total < best.total {
            best = c;
        }
    }
    best.searched = coarse.searched + (2 * half + 1) as usize;
    Ok(best)
}

/// Sub-grid location of a free-boundary point: the shift of the profile
/// centre along the normal of its best fit, within one cell of `base`, that
/// minimizes the closeness total at radius `r`. Returns the shift and
/// [`best_closeness_to_shifted_h`] with it.
pub fn refine_profile_shift(
    u: &ScalarField,
    coeffs: &CoefficientPair,
    base: &Point,
    r: f64,
) -> Result<(Vec<f64>, Closeness)> {
    const STEPS: i64 = 128;
    let first = best_closeness_to_h(u, coeffs, base, r)?;
    let h = u.grid().h();
    let shift = |i: i64| {
        let off = h * i as f64 / STEPS as f64;
        first.direction.iter().map(|d| off * d).collect::<Vec<_>>()
    };
    let mut best = (first.total, 0);
    for i in -STEPS..=STEPS {
        if i == 0 {
            continue;
        }
        let c = closeness_to_shifted_h(u, coeffs, base, &shift(i), r, Some(&first.direction))?;
        if c.total < best.0 {
            best = (c.total, i);
        }
    }
    if best.1 == 0 {
        return Ok((shift(0), first));
    }
    let s = shift(best.1);
    let c = best_closeness_to_shifted_h(u, coeffs, base, &s, r)?;
    Ok((s, c))
}

/// Parameters of the directional monotonicity checks.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityOptions {
    /// The inequality tolerance is `tol_factor · h`.
    pub tol_factor: f64,
    /// Scale `r̃` entering the tempo-spatial gate.
    pub r_tilde: f64,
    /// Scale `σ̃` entering the tempo-spatial gate.
    pub sigma_tilde: f64,
    /// Centre of the gate's profile relative to the origin; empty means 0.
    pub profile_shift: Vec<f64>,
}

impl Default for MonotonicityOptions {
    fn default() -> Self {
        Self {
            tol_factor: 1.0,
            r_tilde: 1.0,
            sigma_tilde: 1.0,
            profile_shift: Vec::new(),
        }
    }
}

fn unit_checked(v: &[f64], what: &str) -> Result<Vec<f64>> {
    let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::Malformed(format!("{what} must be a unit vector, |{what}| = {norm}")));
    }
    Ok(v.to_vec())
}

#[allow(clippy::too_many_arguments)]
fn monotonicity_check(
    name: &str,
    u: &ScalarField,
    coeffs: &CoefficientPair,
    frame: &[f64],
    alpha: f64,
    e: &[f64],
    epsilon: f64,
    delta: f64,
    coeff_bound: f64,
    opts: &MonotonicityOptions,
) -> Result<EstimateReport> {
    let g = u.grid();
    let n = g.dim();
    if frame.len() != n || e.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if frame.len() != n { frame.len() } else { e.len() },
        });
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::Domain(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    if !(-1.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha must lie in [-1, 1], got {alpha}")));
    }
    let frame = unit_checked(frame, "frame")?;
    let e = unit_checked(e, "e")?;
    let cone: f64 = e.iter().zip(&frame).map(|(a, b)| a * b).sum();
    if cone < epsilon - 1e-12 {
        return Err(Error::Hypothesis(format!(
            "direction has component {cone} along the frame, below epsilon {epsilon}"
        )));
    }
    let origin = Point::origin(n);
    let shift = if opts.profile_shift.is_empty() {
        vec![0.0; n]
    } else {
        opts.profile_shift.clone()
    };
    let close = closeness_to_shifted_h(u, coeffs, &origin, &shift, 1.0, Some(&frame))?;
    let gate = Gate {
        value: close.total.max(coeff_bound),
        threshold: delta,
        satisfied: close.total <= delta && coeff_bound <= delta,
    };
    let cyl = Cylinder::full(origin.clone(), 0.5)?;
    let mut lhs = f64::INFINITY;
    for (k, s) in cylinder_nodes(g, &cyl) {
        let de: f64 = (0..n).map(|a| e[a] * u.partial_unchecked(k, s, a).value).sum();
        let dt = if alpha != 0.0 {
            alpha * u.time_derivative_unchecked(k, s).value
        } else {
            0.0
        };
        lhs = lhs.min((dt + de) / epsilon - u.value(k, s).abs());
    }
    let tol = opts.tol_factor * g.h();
    Ok(EstimateReport::new(name, origin, 0.5, Relation::AtLeast, lhs, 0.0, 1.0, tol)
        .with_gate(gate)
        .with_extra("closeness", close.total)
        .with_extra("coeff_gradient", coeff_bound)
        .with_extra("delta", delta)
        .with_extra("epsilon", epsilon))
}

/// `min_{Q_{1/2}} ε⁻¹∂ₑu − |u| ≥ −C·h` for a field normalised to `Q₁(0)`
/// (e.g. a blow-up). The gate compares the distance to the profile along
/// `frame` and the coefficient gradient bound with `δ = λ_min ε/(48n)`.
pub fn check_directional_monotonicity(
    u: &ScalarField,
    coeffs: &CoefficientPair,
    frame: &[f64],
    e: &[f64],
    epsilon: f64,
    opts: &MonotonicityOptions,
) -> Result<EstimateReport> {
    let n = u.grid().dim() as f64;
    let delta = coeffs.lambda_min() * epsilon / (48.0 * n);
    monotonicity_check(
        "directional_monotonicity",
        u,
        coeffs,
        frame,
        0.0,
        e,
        epsilon,
        delta,
        coeffs.spatial_gradient_bound(),
        opts,
    )
}

/// `min_{Q_{1/2}} ε⁻¹(α∂ₜu + ∂ₑu) − |u| ≥ −C·h`, gated with
/// `δ = λ_min ε r̃² σ̃²/(48n)` and the space-time coefficient bound.
pub fn check_tempo_spatial_monotonicity(
    u: &ScalarField,
    coeffs: &CoefficientPair,
    frame: &[f64],
    alpha: f64,
    e: &[f64],
    epsilon: f64,
    opts: &MonotonicityOptions,
) -> Result<EstimateReport> {
    let n = u.grid().dim() as f64;
    let delta = coeffs.lambda_min() * epsilon * opts.r_tilde.powi(2) * opts.sigma_tilde.powi(2) / (48.0 * n);
    monotonicity_check(
        "tempo_spatial_monotonicity",
        u,
        coeffs,
        frame,
        alpha,
        e,
        epsilon,
        delta,
        coeffs.space_time_gradient_bound(),
        opts,
    )
    .map(|r| r.with_extra("alpha", alpha))
}

/// Largest decrease `u(p) − u(p + h·e)` over nodes `p` of `Q_{radius}(0)`
/// with `p + h·e` inside, for every search direction with `e·frame ≥ ε`.
/// A nonpositive result means `u` is nondecreasing along those directions.
pub fn monotone_along_rays(u: &ScalarField, frame: &[f64], epsilon: f64, radius: f64) -> Result<f64> {
    let g = u.grid();
    let n = g.dim();
    let frame = unit(frame.to_vec())?;
    let cyl = Cylinder::full(Point::origin(n), radius)?;
    let nodes = cylinder_nodes(g, &cyl);
    let mut worst = f64::NEG_INFINITY;
    for e in search_directions(n) {
        if e.iter().zip(&frame).map(|(a, b)| a * b).sum::<f64>() < epsilon {
            continue;
        }
        for &(k, s) in &nodes {
            let t = g.time(k);
            let mut q = g.space_coords(s);
            for a in 0..n {
                q[a] += g.h() * e[a];
            }
            if !cyl.contains_closed_tx(t, &q) {
                continue;
            }
            if let Some(v) = u.interpolate(t, &q) {
                worst = worst.max(u.value(k, s) - v);
            }
        }
    }
    Ok(worst)
}

//! Backward-heat-kernel weighted energies and the two-phase monotonicity
//! functional `Φ(r, w) = r⁻⁴ I(r, w⁺) I(r, w⁻)`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exact::{Profile, ProfileSpec};
use crate::geometry::{Point, ScalarField};
use crate::quadrature::gauss_legendre;

/// `(4π(−t))^{−n/2} exp(|x|²/(4t))` for `t < 0`.
pub fn heat_kernel_weight(t: f64, x: &[f64]) -> Result<f64> {
    if !(t < 0.0) {
        return Err(Error::Domain(format!("heat kernel needs t < 0, got {t}")));
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    Ok((4.0 * PI * -t).powf(-(x.len() as f64) / 2.0) * (r2 / (4.0 * t)).exp())
}

/// Which part of a signed function enters the energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Positive,
    Negative,
    Whole,
}

impl Part {
    fn selects(self, v: f64) -> bool {
        match self {
            Part::Positive => v > 0.0,
            Part::Negative => v < 0.0,
            Part::Whole => true,
        }
    }
}

type Density = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;

/// A squared-gradient density `|∇v|²` that can be evaluated anywhere in its
/// domain.
#[derive(Clone)]
pub struct EnergySource {
    dim: usize,
    kind: SourceKind,
}

#[derive(Clone)]
enum SourceKind {
    Analytic(Density),
    Sampled(ScalarField),
}

impl std::fmt::Debug for EnergySource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.kind {
            SourceKind::Analytic(_) => "analytic",
            SourceKind::Sampled(_) => "sampled",
        };
        f.debug_struct("EnergySource")
            .field("dim", &self.dim)
            .field("kind", &kind)
            .finish()
    }
}

impl EnergySource {
    /// Density given directly as a function of `(t, x)`.
    pub fn from_density(dim: usize, density: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            dim,
            kind: SourceKind::Analytic(Arc::new(density)),
        }
    }

    /// `|∇v|² χ{part}` of a catalogue profile, from its analytic gradient.
    pub fn from_profile(dim: usize, profile: ProfileSpec, part: Part) -> Self {
        Self::from_density(dim, move |t, x| match profile.value(t, x) {
            Ok(v) if part.selects(v) => profile
                .gradient(t, x)
                .map(|g| g.iter().map(|c| c * c).sum())
                .unwrap_or(f64::NAN),
            Ok(_) => 0.0,
            Err(_) => f64::NAN,
        })
    }

    /// Nodewise density of the chosen part of a sampled field, interpolated
    /// multilinearly in between. Nodes within about one cell of the interface
    /// are weighted by the fraction of the cell on the selected side, so an
    /// interface through a node gets the factor ½.
    pub fn from_field(w: &ScalarField, part: Part) -> Result<Self> {
        let g = w.grid();
        if g.shape().iter().any(|&n| n < 3) {
            return Err(Error::GridTooSmall("energy density needs 3 nodes per axis".into()));
        }
        let h = g.h();
        let sign = if part == Part::Negative { -1.0 } else { 1.0 };
        let mut dens = Vec::with_capacity(g.len());
        for k in 0..g.slices() {
            for s in 0..g.space_len() {
                let grad2: f64 = (0..g.dim())
                    .map(|a| w.partial_unchecked(k, s, a).value.powi(2))
                    .sum();
                let d = if part == Part::Whole {
                    grad2
                } else {
                    let v = sign * w.value(k, s);
                    let slope = grad2.sqrt();
                    let frac = if slope > 0.0 {
                        (v / (slope * h) + 0.5).clamp(0.0, 1.0)
                    } else if v > 0.0 {
                        1.0
                    } else {
                        0.0
                    };
                    grad2 * frac
                };
                dens.push(d);
            }
        }
        Ok(Self {
            dim: g.dim(),
            kind: SourceKind::Sampled(ScalarField::new(g.clone(), dens)?),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, t: f64, x: &[f64]) -> Option<f64> {
        match &self.kind {
            SourceKind::Analytic(f) => Some(f(t, x)),
            SourceKind::Sampled(field) => field.interpolate(t, x),
        }
    }

    fn check_coverage(&self, center: &Point, r: f64, truncation: f64) -> Result<()> {
        if let SourceKind::Sampled(field) = &self.kind {
            let g = field.grid();
            let radius = truncation * r;
            if !g.covers(center.t - r * r, center.t, &center.x, radius) {
                return Err(Error::Coverage(format!(
                    "field on t ∈ [{}, {}], x ∈ {:?}..{:?} does not cover t ∈ [{}, {}], |x − {:?}|∞ ≤ {}",
                    g.t_start(),
                    g.t_end(),
                    g.lower(),
                    g.upper(),
                    center.t - r * r,
                    center.t,
                    center.x,
                    radius
                )));
            }
        }
        Ok(())
    }
}

/// Quadrature parameters of [`weighted_energy`].
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyOptions {
    /// Spatial truncation radius in units of `√(−t)`.
    pub truncation: f64,
    /// Step of the midpoint rule in the similarity variable `x/√(−t)`.
    pub similarity_step: f64,
    /// Number of dyadic time intervals `(−r²/2^j, −r²/2^{j+1})`.
    pub dyadic_levels: usize,
    /// Gauss–Legendre points per dyadic interval.
    pub gauss_points: usize,
}

impl Default for EnergyOptions {
    fn default() -> Self {
        Self {
            truncation: 10.0,
            similarity_step: 0.25,
            dyadic_levels: 40,
            gauss_points: 4,
        }
    }
}

/// `I(r, v) = ∫_{−r²}^0 ∫ |∇v|²(center + (t, x)) G(t, x) dx dt`, truncated to
/// `|x| ≤ truncation·√(−t)`.
pub fn weighted_energy(source: &EnergySource, center: &Point, r: f64, opts: &EnergyOptions) -> Result<f64> {
    if center.dim() != source.dim() {
        return Err(Error::DimensionMismatch {
            expected: source.dim(),
            found: center.dim(),
        });
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    if !(opts.truncation > 0.0 && opts.similarity_step > 0.0 && opts.gauss_points > 0) {
        return Err(Error::Malformed("invalid energy quadrature options".into()));
    }
    source.check_coverage(center, r, opts.truncation)?;

    let n = source.dim();
    let nodes = similarity_nodes(n, opts.truncation, opts.similarity_step);
    let rule = gauss_legendre(opts.gauss_points);
    let mut x = vec![0.0; n];
    let mut total = 0.0;
    for j in 0..opts.dyadic_levels {
        let a = -r * r / 2f64.powi(j as i32);
        let b = a / 2.0;
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for &(xi, wi) in &rule {
            let tau = mid + half * xi;
            let scale = (-tau).sqrt();
            let mut inner = 0.0;
            for (y, wy) in &nodes {
                for a in 0..n {
                    x[a] = center.x[a] + scale * y[a];
                }
                let d = source.eval(center.t + tau, &x).ok_or_else(|| {
                    Error::Coverage(format!("no field value at t={}, x={x:?}", center.t + tau))
                })?;
                if !d.is_finite() {
                    return Err(Error::Domain(format!(
                        "energy density undefined at t={}, x={x:?}",
                        center.t + tau
                    )));
                }
                inner += wy * d;
            }
            total += wi * half * inner;
        }
    }
    Ok(total)
}

/// Midpoint nodes of the similarity variable in the truncation ball, with
/// weights `Δy^n (4π)^{−n/2} e^{−|y|²/4}`.
fn similarity_nodes(n: usize, rho: f64, dy: f64) -> Vec<(Vec<f64>, f64)> {
    let m = (rho / dy).ceil() as i64;
    let coords: Vec<f64> = (-m..m).map(|i| (i as f64 + 0.5) * dy).collect();
    let norm = dy.powi(n as i32) * (4.0 * PI).powf(-(n as f64) / 2.0);
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let y: Vec<f64> = idx.iter().map(|&i| coords[i]).collect();
        let r2: f64 = y.iter().map(|v| v * v).sum();
        if r2 <= rho * rho {
            out.push((y, norm * (-r2 / 4.0).exp()));
        }
        let mut a = 0;
        loop {
            if a == n {
                return out;
            }
            idx[a] += 1;
            if idx[a] < coords.len() {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

/// `Φ` sampled along increasing radii.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityTrace {
    pub radii: Vec<f64>,
    pub i_plus: Vec<f64>,
    pub i_minus: Vec<f64>,
    pub phi: Vec<f64>,
}

impl MonotonicityTrace {
    pub fn from_energies(radii: Vec<f64>, i_plus: Vec<f64>, i_minus: Vec<f64>) -> Result<Self> {
        if radii.len() != i_plus.len() || radii.len() != i_minus.len() {
            return Err(Error::Malformed("trace columns differ in length".into()));
        }
        if radii.windows(2).any(|w| !(w[0] < w[1])) || radii.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::Malformed("radii must be positive and increasing".into()));
        }
        if i_plus.iter().chain(&i_minus).any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Malformed("energies must be finite and nonnegative".into()));
        }
        let phi = radii
            .iter()
            .zip(i_plus.iter().zip(&i_minus))
            .map(|(r, (p, m))| p * m / r.powi(4))
            .collect();
        Ok(Self {
            radii,
            i_plus,
            i_minus,
            phi,
        })
    }

    /// `r,I_plus,I_minus,phi` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,I_plus,I_minus,phi\n");
        for k in 0..self.radii.len() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                self.radii[k], self.i_plus[k], self.i_minus[k], self.phi[k]
            );
        }
        out
    }
}

/// `Φ(r, w)` at `center` for every radius. Radii are evaluated in parallel.
pub fn phi(
    plus: &EnergySource,
    minus: &EnergySource,
    center: &Point,
    radii: &[f64],
    opts: &EnergyOptions,
) -> Result<MonotonicityTrace> {
    let results: Vec<Result<(f64, f64)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = radii
            .iter()
            .map(|&r| {
                scope.spawn(move || {
                    Ok((
                        weighted_energy(plus, center, r, opts)?,
                        weighted_energy(minus, center, r, opts)?,
                    ))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("energy thread panicked"))
            .collect()
    });
    let mut ip = Vec::with_capacity(radii.len());
    let mut im = Vec::with_capacity(radii.len());
    for r in results {
        let (p, m) = r?;
        ip.push(p);
        im.push(m);
    }
    MonotonicityTrace::from_energies(radii.to_vec(), ip, im)
}

/// [`phi`] for a sampled field `w`, splitting it into `w⁺` and `w⁻`.
pub fn phi_of_field(w: &ScalarField, center: &Point, radii: &[f64], opts: &EnergyOptions) -> Result<MonotonicityTrace> {
    let plus = EnergySource::from_field(w, Part::Positive)?;
    let minus = EnergySource::from_field(w, Part::Negative)?;
    phi(&plus, &minus, center, radii, opts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneReport {
    /// Indices `k` with `Φ[k+1] < Φ[k] − tol`.
    pub violations: Vec<usize>,
    /// Indices `k` with `|Φ[k+1] − Φ[k]| ≤ tol`.
    pub constant_pairs: Vec<usize>,
    pub tol: f64,
}

impl MonotoneReport {
    pub fn is_monotone(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn check_monotone(trace: &MonotonicityTrace, tol: f64) -> MonotoneReport {
    let mut violations = Vec::new();
    let mut constant_pairs = Vec::new();
    for (k, w) in trace.phi.windows(2).enumerate() {
        if w[1] < w[0] - tol {
            violations.push(k);
        }
        if (w[1] - w[0]).abs() <= tol {
            constant_pairs.push(k);
        }
    }
    MonotoneReport {
        violations,
        constant_pairs,
        tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GridSpec;
    use approx::assert_relative_eq;

    fn unit_density(part: Part) -> EnergySource {
        EnergySource::from_density(2, move |_, x| if part.selects(x[0]) { 1.0 } else { 0.0 })
    }

    #[test]
    fn kernel_examples() {
        assert_relative_eq!(heat_kernel_weight(-1.0 / (4.0 * PI), &[0.0]).unwrap(), 1.0, epsilon = 1e-15);
        assert!(heat_kernel_weight(-0.3, &[0.0, 0.0]).unwrap() > heat_kernel_weight(-0.3, &[0.1, 0.0]).unwrap());
        assert!(matches!(heat_kernel_weight(0.0, &[0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn kernel_mass_in_truncation_ball() {
        // n = 1, |y| ≤ 8: mass erf(4), tail erfc(4) ≈ 1.5417e-8 exceeds 1e-8
        let mass: f64 = similarity_nodes(1, 8.0, 0.05).iter().map(|p| p.1).sum();
        assert!((1.0 - mass - 1.541_725_790_028_002e-8).abs() < 1e-10);
        for n in [1, 2] {
            let mass: f64 = similarity_nodes(n, 10.0, 0.25).iter().map(|p| p.1).sum();
            assert!((mass - 1.0).abs() < 1e-8, "n={n}");
        }
    }

    #[test]
    fn half_space_and_full_energies() {
        let o = Point::origin(2);
        let opts = EnergyOptions::default();
        assert_relative_eq!(weighted_energy(&unit_density(Part::Positive), &o, 1.0, &opts).unwrap(), 0.5, epsilon = 1e-10);
        assert_relative_eq!(weighted_energy(&unit_density(Part::Whole), &o, 1.0, &opts).unwrap(), 1.0, epsilon = 1e-10);
        let zero = EnergySource::from_density(2, |_, _| 0.0);
        assert_eq!(weighted_energy(&zero, &o, 1.0, &opts).unwrap(), 0.0);
    }

    #[test]
    fn linear_field_phi_is_constant() {
        let o = Point::origin(2);
        let opts = EnergyOptions::default();
        let trace = phi(&unit_density(Part::Positive), &unit_density(Part::Negative), &o, &[0.25, 0.5, 1.0], &opts).unwrap();
        for v in &trace.phi {
            assert_relative_eq!(*v, 0.25, epsilon = 1e-10);
        }
        let report = check_monotone(&trace, 1e-9);
        assert!(report.is_monotone());
        assert_eq!(report.constant_pairs, vec![0, 1]);
    }

    #[test]
    fn sampled_linear_field_matches_closed_form() {
        let g = GridSpec::cube(2, 5.5, 45, (-1.0, 0.0), 9).unwrap();
        let w = ScalarField::from_fn(g, |_, x| x[0]).unwrap();
        let opts = EnergyOptions::default();
        let trace = phi_of_field(&w, &Point::origin(2), &[0.25, 0.5], &opts).unwrap();
        for (r, p) in trace.radii.iter().zip(&trace.i_plus) {
            assert_relative_eq!(*p, r * r / 2.0, epsilon = 1e-9);
        }
        for v in &trace.phi {
            assert_relative_eq!(*v, 0.25, epsilon = 1e-9);
        }
    }

    #[test]
    fn nonnegative_field_has_zero_phi() {
        let g = GridSpec::cube(1, 6.0, 49, (-1.0, 0.0), 5).unwrap();
        let w = ScalarField::from_fn(g, |_, x| x[0] * x[0]).unwrap();
        let trace = phi_of_field(&w, &Point::origin(1), &[0.25, 0.5], &EnergyOptions::default()).unwrap();
        assert!(trace.phi.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn coverage_error_names_region() {
        let g = GridSpec::cube(2, 1.0, 9, (-1.0, 0.0), 5).unwrap();
        let w = ScalarField::from_fn(g, |_, x| x[0]).unwrap();
        let src = EnergySource::from_field(&w, Part::Positive).unwrap();
        match weighted_energy(&src, &Point::origin(2), 0.5, &EnergyOptions::default()) {
            Err(Error::Coverage(msg)) => assert!(msg.contains("does not cover")),
            other => panic!("expected coverage error, got {other:?}"),
        }
    }

    #[test]
    fn truncation_insensitivity() {
        let h = crate::exact::HProfile::along_e1(1.0, 2.0, 2).unwrap();
        let src = EnergySource::from_profile(2, ProfileSpec::H(h), Part::Positive);
        let o = Point::new(0.0, [0.1, 0.0]);
        let base = weighted_energy(&src, &o, 0.5, &EnergyOptions::default()).unwrap();
        let wide = EnergyOptions {
            truncation: 12.0,
            ..EnergyOptions::default()
        };
        let other = weighted_energy(&src, &o, 0.5, &wide).unwrap();
        assert!((base - other).abs() <= 1e-8 * base);
    }

    #[test]
    fn monotone_report_examples() {
        let t = MonotonicityTrace::from_energies(vec![1.0, 2.0, 3.0], vec![1.0, 16.0, 81.0], vec![1.0, 1.0, 1.0]).unwrap();
        assert!(check_monotone(&t, 1e-12).is_monotone());
        let mut dip = t.clone();
        dip.phi = vec![1.0, 1.0 - 1e-2, 1.1];
        let r = check_monotone(&dip, 1e-3);
        assert_eq!(r.violations, vec![0]);
        let inc = MonotonicityTrace {
            phi: vec![1.0, 2.0, 3.0],
            ..t
        };
        assert!(check_monotone(&inc, 1e-3).constant_pairs.is_empty());
    }

    #[test]
    fn trace_identity_and_csv() {
        let t = MonotonicityTrace::from_energies(vec![0.5, 1.0], vec![0.2, 0.4], vec![0.1, 0.3]).unwrap();
        assert_eq!(t.phi[0], 0.2 * 0.1 / 0.5f64.powi(4));
        assert!(t.to_csv().starts_with("r,I_plus,I_minus,phi\n0.5,"));
        assert!(MonotonicityTrace::from_energies(vec![1.0, 0.5], vec![0.0; 2], vec![0.0; 2]).is_err());
    }
}

//! Closed-form solutions: the one-dimensional two-phase profile, the
//! global profile, polynomial caloric solutions and the backward
//! self-similar ODE families.

use crate::error::{Error, Result};
use crate::geometry::{GridSpec, ScalarField};
use crate::quadrature;

/// Relative tolerance of the `∫_0^ξ e^{s²/4} ds` quadrature.
pub const SELF_SIMILAR_QUAD_TOL: f64 = 1e-10;

/// A function of `(t, x)` with an analytic spatial gradient.
pub trait Profile {
    fn value(&self, t: f64, x: &[f64]) -> Result<f64>;

    fn gradient(&self, t: f64, x: &[f64]) -> Result<Vec<f64>>;

    fn sample(&self, grid: &GridSpec) -> Result<ScalarField> {
        let mut err = None;
        let field = ScalarField::from_fn(grid.clone(), |t, x| match self.value(t, x) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        });
        match err {
            Some(e) => Err(e),
            None => field,
        }
    }
}

pub(crate) fn unit(v: Vec<f64>) -> Result<Vec<f64>> {
    let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::Malformed("direction must be a nonzero finite vector".into()));
    }
    Ok(v.into_iter().map(|c| c / norm).collect())
}

fn dot(d: &[f64], x: &[f64]) -> Result<f64> {
    if d.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: d.len(),
            found: x.len(),
        });
    }
    Ok(d.iter().zip(x).map(|(a, b)| a * b).sum())
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Malformed(format!("{name} must be positive, got {v}")))
    }
}

/// `λ₊/2 max(s,0)² − λ₋/2 min(s,0)²` with `s = x·direction`.
#[derive(Debug, Clone, PartialEq)]
pub struct HProfile {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    direction: Vec<f64>,
}

impl HProfile {
    pub fn new(lambda_plus: f64, lambda_minus: f64, direction: Vec<f64>) -> Result<Self> {
        Ok(Self {
            lambda_plus: positive("lambda_plus", lambda_plus)?,
            lambda_minus: positive("lambda_minus", lambda_minus)?,
            direction: unit(direction)?,
        })
    }

    /// Profile along the first axis in `n` dimensions.
    pub fn along_e1(lambda_plus: f64, lambda_minus: f64, n: usize) -> Result<Self> {
        let mut d = vec![0.0; n];
        d[0] = 1.0;
        Self::new(lambda_plus, lambda_minus, d)
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn eval_s(&self, s: f64) -> f64 {
        0.5 * self.lambda_plus * s.max(0.0).powi(2) - 0.5 * self.lambda_minus * s.min(0.0).powi(2)
    }

    /// Derivative of the profile in `s`.
    pub fn slope_s(&self, s: f64) -> f64 {
        self.lambda_plus * s.max(0.0) - self.lambda_minus * s.min(0.0)
    }
}

impl Profile for HProfile {
    fn value(&self, _t: f64, x: &[f64]) -> Result<f64> {
        Ok(self.eval_s(dot(&self.direction, x)?))
    }

    fn gradient(&self, _t: f64, x: &[f64]) -> Result<Vec<f64>> {
        let slope = self.slope_s(dot(&self.direction, x)?);
        Ok(self.direction.iter().map(|d| slope * d).collect())
    }
}

/// The global two-phase profile `λ₊ max(s,0)²/2 − λ₋ max(−s,0)²/2`; by
/// default `s = x_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct WStarProfile {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    direction: Vec<f64>,
}

impl WStarProfile {
    pub fn new(lambda_plus: f64, lambda_minus: f64, direction: Vec<f64>) -> Result<Self> {
        Ok(Self {
            lambda_plus: positive("lambda_plus", lambda_plus)?,
            lambda_minus: positive("lambda_minus", lambda_minus)?,
            direction: unit(direction)?,
        })
    }

    pub fn along_en(lambda_plus: f64, lambda_minus: f64, n: usize) -> Result<Self> {
        let mut d = vec![0.0; n];
        d[n - 1] = 1.0;
        Self::new(lambda_plus, lambda_minus, d)
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }
}

impl Profile for WStarProfile {
    fn value(&self, _t: f64, x: &[f64]) -> Result<f64> {
        let s = dot(&self.direction, x)?;
        Ok(self.lambda_plus * s.max(0.0).powi(2) / 2.0
            - self.lambda_minus * (-s).max(0.0).powi(2) / 2.0)
    }

    fn gradient(&self, _t: f64, x: &[f64]) -> Result<Vec<f64>> {
        let s = dot(&self.direction, x)?;
        let slope = self.lambda_plus * s.max(0.0) + self.lambda_minus * (-s).max(0.0);
        Ok(self.direction.iter().map(|d| slope * d).collect())
    }
}

/// `z(t,x) = −a₀ t + Σ aᵢ xᵢ²` with `2 Σ aᵢ + a₀ = λ₊`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialCaloricProfile {
    pub a0: f64,
    pub a: Vec<f64>,
    pub lambda_plus: f64,
}

impl PolynomialCaloricProfile {
    pub fn new(a0: f64, a: Vec<f64>, lambda_plus: f64) -> Result<Self> {
        positive("lambda_plus", lambda_plus)?;
        if a.is_empty() {
            return Err(Error::Malformed("coefficient vector must be nonempty".into()));
        }
        if a0 < 0.0 || a.iter().any(|&c| c < 0.0) {
            return Err(Error::Malformed("caloric coefficients must be nonnegative".into()));
        }
        let lhs = 2.0 * a.iter().sum::<f64>() + a0;
        if (lhs - lambda_plus).abs() > 1e-12 * lambda_plus.max(1.0) {
            return Err(Error::Malformed(format!(
                "compatibility 2*sum(a) + a0 = lambda_plus violated: {lhs} vs {lambda_plus}"
            )));
        }
        Ok(Self { a0, a, lambda_plus })
    }
}

impl Profile for PolynomialCaloricProfile {
    fn value(&self, t: f64, x: &[f64]) -> Result<f64> {
        dot(&self.a, x)?;
        Ok(-self.a0 * t + self.a.iter().zip(x).map(|(a, v)| a * v * v).sum::<f64>())
    }

    fn gradient(&self, _t: f64, x: &[f64]) -> Result<Vec<f64>> {
        dot(&self.a, x)?;
        Ok(self.a.iter().zip(x).map(|(a, v)| 2.0 * a * v).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Positive,
    Negative,
}

/// Backward self-similar solution `w(t,x) = −t f(x_n/√(−t))`, with `f` built
/// from the two-parameter ODE families of each phase.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfSimilarProfile {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

/// `∫_0^ξ e^{s²/4} ds`.
pub fn erfi_like_integral(xi: f64) -> f64 {
    quadrature::integrate(|s| (s * s / 4.0).exp(), 0.0, xi, SELF_SIMILAR_QUAD_TOL)
}

/// The non-polynomial homogeneous solution
/// `g(ξ) = −2ξ e^{ξ²/4} + (ξ² − 2) ∫_0^ξ e^{s²/4} ds`.
pub fn g_homogeneous(xi: f64) -> f64 {
    -2.0 * xi * (xi * xi / 4.0).exp() + (xi * xi - 2.0) * erfi_like_integral(xi)
}

fn g_prime(xi: f64) -> f64 {
    -4.0 * (xi * xi / 4.0).exp() + 2.0 * xi * erfi_like_integral(xi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Growth {
    Polynomial,
    Superpolynomial,
}

impl SelfSimilarProfile {
    pub fn new(lambda_plus: f64, lambda_minus: f64, c: [f64; 4]) -> Result<Self> {
        Ok(Self {
            lambda_plus: positive("lambda_plus", lambda_plus)?,
            lambda_minus: positive("lambda_minus", lambda_minus)?,
            c1: c[0],
            c2: c[1],
            c3: c[2],
            c4: c[3],
        })
    }

    /// The branch formula, evaluated regardless of its sign.
    pub fn branch_value(&self, branch: Branch, xi: f64) -> f64 {
        let q = xi * xi - 2.0;
        match branch {
            Branch::Positive => {
                let g = if self.c2 != 0.0 { self.c2 * g_homogeneous(xi) } else { 0.0 };
                self.lambda_plus + self.c1 * q + g
            }
            Branch::Negative => {
                let g = if self.c4 != 0.0 { self.c4 * g_homogeneous(xi) } else { 0.0 };
                -self.lambda_minus + self.c3 * q + g
            }
        }
    }

    pub fn branch_slope(&self, branch: Branch, xi: f64) -> f64 {
        match branch {
            Branch::Positive => {
                let g = if self.c2 != 0.0 { self.c2 * g_prime(xi) } else { 0.0 };
                2.0 * self.c1 * xi + g
            }
            Branch::Negative => {
                let g = if self.c4 != 0.0 { self.c4 * g_prime(xi) } else { 0.0 };
                2.0 * self.c3 * xi + g
            }
        }
    }

    /// Which branch `f` follows at `ξ`: the positive formula where it is
    /// positive, else the negative formula where it is negative, else the
    /// zero phase.
    pub fn branch_at(&self, xi: f64) -> Option<Branch> {
        if self.branch_value(Branch::Positive, xi) > 0.0 {
            Some(Branch::Positive)
        } else if self.branch_value(Branch::Negative, xi) < 0.0 {
            Some(Branch::Negative)
        } else {
            None
        }
    }

    pub fn f(&self, xi: f64) -> f64 {
        self.branch_at(xi).map_or(0.0, |b| self.branch_value(b, xi))
    }

    pub fn f_prime(&self, xi: f64) -> f64 {
        self.branch_at(xi).map_or(0.0, |b| self.branch_slope(b, xi))
    }

    fn xi(t: f64, x: &[f64]) -> Result<f64> {
        if !(t < 0.0) {
            return Err(Error::Domain(format!("self-similar profile needs t < 0, got {t}")));
        }
        let xn = *x
            .last()
            .ok_or_else(|| Error::Malformed("empty spatial point".into()))?;
        Ok(xn / (-t).sqrt())
    }

    /// `f'' − (ξ/2) f' + f − λ₊` (or `+ λ₋` on the negative branch) by
    /// central differences, for the branch formula given.
    pub fn branch_ode_residual(&self, branch: Branch, xi: f64, step: f64) -> f64 {
        let fm = self.branch_value(branch, xi - step);
        let f0 = self.branch_value(branch, xi);
        let fp = self.branch_value(branch, xi + step);
        let f2 = (fp - 2.0 * f0 + fm) / (step * step);
        let f1 = (fp - fm) / (2.0 * step);
        let source = match branch {
            Branch::Positive => self.lambda_plus,
            Branch::Negative => -self.lambda_minus,
        };
        f2 - 0.5 * xi * f1 + f0 - source
    }

    /// ODE residual of the piecewise profile at `ξ`; the three-point
    /// stencil must stay inside one phase.
    pub fn ode_residual(&self, xi: f64, step: f64) -> Result<f64> {
        if !(step > 0.0) {
            return Err(Error::Malformed("step must be positive".into()));
        }
        let b = self.branch_at(xi);
        let consistent = b.is_some() && [xi - step, xi + step].iter().all(|&s| self.branch_at(s) == b);
        match (b, consistent) {
            (Some(branch), true) => Ok(self.branch_ode_residual(branch, xi, step)),
            _ => Err(Error::Domain(format!(
                "stencil around xi = {xi} straddles a sign change"
            ))),
        }
    }

    pub fn classify_growth(&self) -> Growth {
        if self.c2 == 0.0 && self.c4 == 0.0 {
            Growth::Polynomial
        } else {
            Growth::Superpolynomial
        }
    }
}

impl Profile for SelfSimilarProfile {
    fn value(&self, t: f64, x: &[f64]) -> Result<f64> {
        let xi = Self::xi(t, x)?;
        Ok(-t * self.f(xi))
    }

    fn gradient(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        let xi = Self::xi(t, x)?;
        let mut g = vec![0.0; x.len()];
        *g.last_mut().unwrap() = (-t).sqrt() * self.f_prime(xi);
        Ok(g)
    }
}

/// Serializable descriptor of any catalogue profile.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileSpec {
    H(HProfile),
    WStar(WStarProfile),
    Polynomial(PolynomialCaloricProfile),
    SelfSimilar(SelfSimilarProfile),
}

impl ProfileSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ProfileSpec::H(_) => "h",
            ProfileSpec::WStar(_) => "wstar",
            ProfileSpec::Polynomial(_) => "poly-caloric",
            ProfileSpec::SelfSimilar(_) => "self-similar",
        }
    }

    fn join(v: &[f64]) -> String {
        v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
    }

    /// Named scalar fields, in a fixed order.
    pub fn params(&self) -> Vec<(String, String)> {
        let kv = |k: &str, v: String| (k.to_string(), v);
        match self {
            ProfileSpec::H(p) => vec![
                kv("lambda_plus", p.lambda_plus.to_string()),
                kv("lambda_minus", p.lambda_minus.to_string()),
                kv("direction", Self::join(&p.direction)),
            ],
            ProfileSpec::WStar(p) => vec![
                kv("lambda_plus", p.lambda_plus.to_string()),
                kv("lambda_minus", p.lambda_minus.to_string()),
                kv("direction", Self::join(&p.direction)),
            ],
            ProfileSpec::Polynomial(p) => vec![
                kv("a0", p.a0.to_string()),
                kv("a", Self::join(&p.a)),
                kv("lambda_plus", p.lambda_plus.to_string()),
            ],
            ProfileSpec::SelfSimilar(p) => vec![
                kv("lambda_plus", p.lambda_plus.to_string()),
                kv("lambda_minus", p.lambda_minus.to_string()),
                kv("c1", p.c1.to_string()),
                kv("c2", p.c2.to_string()),
                kv("c3", p.c3.to_string()),
                kv("c4", p.c4.to_string()),
            ],
        }
    }

    pub fn from_params(kind: &str, params: &[(String, String)]) -> Result<Self> {
        let get = |k: &str| -> Result<&str> {
            params
                .iter()
                .find(|(key, _)| key == k)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| Error::Malformed(format!("profile `{kind}` is missing `{k}`")))
        };
        let num = |k: &str| -> Result<f64> {
            get(k)?
                .trim()
                .parse()
                .map_err(|_| Error::Malformed(format!("`{k}` is not a number")))
        };
        let vec = |k: &str| -> Result<Vec<f64>> {
            get(k)?
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Malformed(format!("`{k}` is not a number list")))
        };
        let allowed: &[&str] = match kind {
            "h" | "wstar" => &["lambda_plus", "lambda_minus", "direction"],
            "poly-caloric" => &["a0", "a", "lambda_plus"],
            "self-similar" => &["lambda_plus", "lambda_minus", "c1", "c2", "c3", "c4"],
            other => return Err(Error::Malformed(format!("unknown profile kind `{other}`"))),
        };
        if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(Error::Malformed(format!("unrecognized profile key `{k}`")));
        }
        Ok(match kind {
            "h" => ProfileSpec::H(HProfile::new(num("lambda_plus")?, num("lambda_minus")?, vec("direction")?)?),
            "wstar" => ProfileSpec::WStar(WStarProfile::new(
                num("lambda_plus")?,
                num("lambda_minus")?,
                vec("direction")?,
            )?),
            "poly-caloric" => ProfileSpec::Polynomial(PolynomialCaloricProfile::new(
                num("a0")?,
                vec("a")?,
                num("lambda_plus")?,
            )?),
            _ => ProfileSpec::SelfSimilar(SelfSimilarProfile::new(
                num("lambda_plus")?,
                num("lambda_minus")?,
                [num("c1")?, num("c2")?, num("c3")?, num("c4")?],
            )?),
        })
    }

    fn inner(&self) -> &dyn Profile {
        match self {
            ProfileSpec::H(p) => p,
            ProfileSpec::WStar(p) => p,
            ProfileSpec::Polynomial(p) => p,
            ProfileSpec::SelfSimilar(p) => p,
        }
    }
}

impl Profile for ProfileSpec {
    fn value(&self, t: f64, x: &[f64]) -> Result<f64> {
        self.inner().value(t, x)
    }

    fn gradient(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        self.inner().gradient(t, x)
    }
}

/// Outcome of scanning the polynomial branches for a common zero at which
/// both phases could be glued with matching value and slope.
#[derive(Debug, Clone, PartialEq)]
pub struct RootStructureReport {
    /// `(C1, C3)` pairs examined.
    pub pairs_scanned: usize,
    /// Zeros of the positive branch found inside the search interval.
    pub roots_found: usize,
    /// Consistent gluing points with `f'(a) != 0`, as `(C1, C3, a)`.
    pub nonzero_slope_matches: Vec<(f64, f64, f64)>,
    /// Consistent gluing points with `f'(a) = 0`, as `(C1, C3, a)`.
    pub zero_slope_matches: Vec<(f64, f64, f64)>,
    /// Smallest value-plus-slope mismatch among zeros with nonzero slope.
    pub min_mismatch: f64,
}

/// Scans `C1, C3` over `coeff_box` (both ranges) with `resolution` values
/// each, locating zeros `a` of `λ₊ + C1(a² − 2)` inside `search_interval`
/// and testing whether `−λ₋ + C3(a² − 2)` can meet it there in value and
/// slope.
pub fn root_structure(
    lambda_plus: f64,
    lambda_minus: f64,
    coeff_box: (f64, f64),
    search_interval: (f64, f64),
    resolution: usize,
) -> Result<RootStructureReport> {
    positive("lambda_plus", lambda_plus)?;
    positive("lambda_minus", lambda_minus)?;
    let (lo, hi) = search_interval;
    if !(hi > lo) || !(coeff_box.1 > coeff_box.0) || resolution < 2 {
        return Err(Error::Malformed("degenerate search interval or coefficient box".into()));
    }
    let tol = 1e-9;
    let step = (coeff_box.1 - coeff_box.0) / (resolution - 1) as f64;
    let coeffs: Vec<f64> = (0..resolution).map(|i| coeff_box.0 + i as f64 * step).collect();
    let mut report = RootStructureReport {
        pairs_scanned: 0,
        roots_found: 0,
        nonzero_slope_matches: Vec::new(),
        zero_slope_matches: Vec::new(),
        min_mismatch: f64::INFINITY,
    };
    for &c1 in &coeffs {
        let roots: Vec<f64> = if c1 == 0.0 {
            Vec::new()
        } else {
            let a2 = 2.0 - lambda_plus / c1;
            if a2 > tol {
                vec![-a2.sqrt(), a2.sqrt()]
            } else if a2 > -tol {
                vec![0.0]
            } else {
                Vec::new()
            }
        };
        let roots: Vec<f64> = roots.into_iter().filter(|a| *a >= lo && *a <= hi).collect();
        for &c3 in &coeffs {
            report.pairs_scanned += 1;
            for &a in &roots {
                report.roots_found += 1;
                let fp_slope = 2.0 * c1 * a;
                let fn_val = -lambda_minus + c3 * (a * a - 2.0);
                let fn_slope = 2.0 * c3 * a;
                let mismatch = fn_val.abs() + (fp_slope - fn_slope).abs();
                if fp_slope.abs() > tol {
                    report.min_mismatch = report.min_mismatch.min(mismatch);
                    if mismatch <= tol {
                        report.nonzero_slope_matches.push((c1, c3, a));
                    }
                } else if mismatch <= tol {
                    report.zero_slope_matches.push((c1, c3, a));
                }
            }
        }
    }
    Ok(report)
}

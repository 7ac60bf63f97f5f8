use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exact::{Profile, ProfileSpec};
use crate::geometry::{GridSpec, Point};

/// A positive, Lipschitz coefficient `λ(t, x)`.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientField {
    Constant(f64),
    /// `base + amplitude · sin(time_frequency·t + frequencies·x + phase)`.
    Wave {
        base: f64,
        amplitude: f64,
        time_frequency: f64,
        frequencies: Vec<f64>,
        phase: f64,
    },
}

impl CoefficientField {
    pub fn eval(&self, t: f64, x: &[f64]) -> f64 {
        match self {
            CoefficientField::Constant(c) => *c,
            CoefficientField::Wave {
                base,
                amplitude,
                time_frequency,
                frequencies,
                phase,
            } => {
                let arg: f64 = time_frequency * t
                    + frequencies.iter().zip(x).map(|(k, v)| k * v).sum::<f64>()
                    + phase;
                base + amplitude * arg.sin()
            }
        }
    }

    /// Guaranteed lower bound of the field.
    pub fn lower_bound(&self) -> f64 {
        match self {
            CoefficientField::Constant(c) => *c,
            CoefficientField::Wave { base, amplitude, .. } => base - amplitude.abs(),
        }
    }

    pub fn spatial_gradient_bound(&self) -> f64 {
        match self {
            CoefficientField::Constant(_) => 0.0,
            CoefficientField::Wave {
                amplitude,
                frequencies,
                ..
            } => amplitude.abs() * frequencies.iter().map(|k| k * k).sum::<f64>().sqrt(),
        }
    }

    pub fn time_derivative_bound(&self) -> f64 {
        match self {
            CoefficientField::Constant(_) => 0.0,
            CoefficientField::Wave {
                amplitude,
                time_frequency,
                ..
            } => amplitude.abs() * time_frequency.abs(),
        }
    }

    /// Lipschitz bound in the Euclidean `(t, x)` metric.
    pub fn lip_bound(&self) -> f64 {
        self.spatial_gradient_bound().hypot(self.time_derivative_bound())
    }

    /// The coefficient seen by the rescaled solution
    /// `u_r(t,x) = r⁻² u(t0 + r² t, x0 + r x)`.
    pub fn rescaled(&self, base: &Point, r: f64) -> Self {
        match self {
            CoefficientField::Constant(c) => CoefficientField::Constant(*c),
            CoefficientField::Wave {
                base: b,
                amplitude,
                time_frequency,
                frequencies,
                phase,
            } => CoefficientField::Wave {
                base: *b,
                amplitude: *amplitude,
                time_frequency: time_frequency * r * r,
                frequencies: frequencies.iter().map(|k| k * r).collect(),
                phase: phase
                    + time_frequency * base.t
                    + frequencies.iter().zip(&base.x).map(|(k, v)| k * v).sum::<f64>(),
            },
        }
    }
}

/// The pair `λ₊, λ₋` with recorded bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientPair {
    pub plus: CoefficientField,
    pub minus: CoefficientField,
}

impl CoefficientPair {
    pub fn new(plus: CoefficientField, minus: CoefficientField) -> Result<Self> {
        let pair = Self { plus, minus };
        if !(pair.lambda_min() > 0.0) {
            return Err(Error::Malformed(format!(
                "coefficients must be bounded below by a positive constant, got {}",
                pair.lambda_min()
            )));
        }
        Ok(pair)
    }

    pub fn constant(plus: f64, minus: f64) -> Result<Self> {
        Self::new(CoefficientField::Constant(plus), CoefficientField::Constant(minus))
    }

    pub fn lambda_min(&self) -> f64 {
        self.plus.lower_bound().min(self.minus.lower_bound())
    }

    pub fn lip_bound(&self) -> f64 {
        self.plus.lip_bound().max(self.minus.lip_bound())
    }

    pub fn spatial_gradient_bound(&self) -> f64 {
        self.plus
            .spatial_gradient_bound()
            .max(self.minus.spatial_gradient_bound())
    }

    /// Bound on `|∇λ±|` and `|∂ₜλ±|` together.
    pub fn space_time_gradient_bound(&self) -> f64 {
        self.spatial_gradient_bound().max(
            self.plus
                .time_derivative_bound()
                .max(self.minus.time_derivative_bound()),
        )
    }

    pub fn rescaled(&self, base: &Point, r: f64) -> Self {
        Self {
            plus: self.plus.rescaled(base, r),
            minus: self.minus.rescaled(base, r),
        }
    }

    /// Checks the recorded bounds against samples on `grid`.
    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        let lmin = self.lambda_min();
        let lip = self.lip_bound();
        let tol = 1e-9;
        for field in [&self.plus, &self.minus] {
            for k in 0..grid.slices() {
                let t = grid.time(k);
                for s in 0..grid.space_len() {
                    let x = grid.space_coords(s);
                    let v = field.eval(t, &x);
                    if !(v >= lmin * (1.0 - tol)) {
                        return Err(Error::Malformed(format!(
                            "coefficient {v} below recorded minimum {lmin} at t={t}, x={x:?}"
                        )));
                    }
                    let check = |t2: f64, x2: &[f64]| -> Result<()> {
                        let d = (t2 - t).hypot(
                            x2.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
                        );
                        let q = (field.eval(t2, x2) - v).abs() / d;
                        if q > lip * (1.0 + tol) + 1e-15 {
                            return Err(Error::Malformed(format!(
                                "coefficient Lipschitz quotient {q} exceeds recorded bound {lip}"
                            )));
                        }
                        Ok(())
                    };
                    if k + 1 < grid.slices() {
                        check(grid.time(k + 1), &x)?;
                    }
                    for a in 0..grid.dim() {
                        let mut y = x.clone();
                        y[a] += grid.h();
                        check(t, &y)?;
                    }
                }
            }
        }
        Ok(())
    }
}

type DataFn = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;

/// Dirichlet data evaluated on the parabolic boundary of the box.
#[derive(Clone)]
pub struct BoundaryData {
    dim: usize,
    f: DataFn,
}

impl fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryData").field("dim", &self.dim).finish_non_exhaustive()
    }
}

impl BoundaryData {
    pub fn new(dim: usize, f: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self { dim, f: Arc::new(f) }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(dim, |_, _| 0.0)
    }

    /// Traces of a catalogue profile. Points where the profile is undefined
    /// evaluate to NaN and are rejected by the solver.
    pub fn from_profile(dim: usize, profile: ProfileSpec) -> Self {
        Self::new(dim, move |t, x| profile.value(t, x).unwrap_or(f64::NAN))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> f64 {
        (self.f)(t, x)
    }

    /// Largest jump between adjacent boundary samples of one slice; used to
    /// check continuity along faces (`≤ C·h`).
    pub fn max_face_jump(&self, grid: &GridSpec, k: usize) -> f64 {
        let t = grid.time(k);
        let mut worst: f64 = 0.0;
        for s in 0..grid.space_len() {
            if !grid.is_spatial_boundary(s) {
                continue;
            }
            let idx = grid.unravel(s);
            let v = self.eval(t, &grid.space_coords(s));
            for a in 0..grid.dim() {
                if idx[a] + 1 < grid.shape()[a] {
                    let mut j = idx.clone();
                    j[a] += 1;
                    let s2 = grid.ravel(&j);
                    if grid.is_spatial_boundary(s2) {
                        worst = worst.max((self.eval(t, &grid.space_coords(s2)) - v).abs());
                    }
                }
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wave() -> CoefficientField {
        CoefficientField::Wave {
            base: 1.0,
            amplitude: 0.05,
            time_frequency: 0.7,
            frequencies: vec![1.3, -0.4],
            phase: 0.2,
        }
    }

    #[test]
    fn bounds_hold_on_samples() {
        let pair = CoefficientPair::new(wave(), CoefficientField::Constant(2.0)).unwrap();
        assert!((pair.lambda_min() - 0.95).abs() < 1e-15);
        let g = GridSpec::cube(2, 1.0, 17, (-1.0, 1.0), 9).unwrap();
        pair.validate(&g).unwrap();
    }

    #[test]
    fn rejects_nonpositive_minimum() {
        assert!(CoefficientPair::constant(0.0, 1.0).is_err());
    }

    #[test]
    fn rescaling_matches_composition() {
        let w = wave();
        let base = Point::new(0.3, [0.2, -0.5]);
        let r = 0.25;
        let scaled = w.rescaled(&base, r);
        for (t, x) in [(0.1, [0.5, 0.5]), (-0.9, [-1.0, 0.3])] {
            let direct = w.eval(base.t + r * r * t, &[base.x[0] + r * x[0], base.x[1] + r * x[1]]);
            assert!((scaled.eval(t, &x) - direct).abs() < 1e-14);
        }
        assert!((scaled.spatial_gradient_bound() - r * w.spatial_gradient_bound()).abs() < 1e-15);
    }
}

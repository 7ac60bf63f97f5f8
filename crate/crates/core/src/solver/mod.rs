//! Implicit solution operator for
//! `Δu − ∂ₜu = λ₊ χ{u>0} − λ₋ χ{u<0}` on a box.
//!
//! Each backward-Euler step is a monotone nonsmooth system
//! `(I/dt − Δ_h) U + μ = U_prev/dt`, `μ ∈ ∂φ(U)` with
//! `φ(U) = λ₊ U⁺ + λ₋ U⁻`. It is solved by an active-set iteration over the
//! three phases `{U>0}`, `{U<0}`, `{U=0}`: phase nodes carry the fixed
//! right-hand side `∓λ`, zero-phase nodes are pinned to 0 and their
//! multiplier is read back from the equation to decide whether they leave
//! the zero set.

mod coeffs;
mod linear;

pub use self::coeffs::{BoundaryData, CoefficientField, CoefficientPair};

use crate::error::{Error, Result};
use crate::geometry::{GridSpec, ScalarField};

#[derive(Debug, Clone, PartialEq)]
pub struct SolveControls {
    /// Active-set iterations allowed per time step.
    pub max_iterations: usize,
    /// Relative residual target of each linear solve.
    pub linear_tolerance: f64,
    pub max_linear_iterations: usize,
    /// `|U| ≤ deadband` counts as the zero phase.
    pub deadband: f64,
    /// Start each step's iteration from the previous slice (otherwise from 0).
    pub warm_start: bool,
}

impl Default for SolveControls {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            linear_tolerance: 1e-10,
            max_linear_iterations: 20_000,
            deadband: 1e-12,
            warm_start: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveReport {
    /// Active-set iterations used at each time step (the initial slice has none).
    pub iterations: Vec<usize>,
    /// Phase changes in the last iteration of the last step.
    pub final_active_set_changes: usize,
    /// Nodes frozen to the zero phase by the anti-cycling guard.
    pub frozen_nodes: usize,
    pub linear_iterations: usize,
    /// Max |residual| off the interface band, recomputed after the solve.
    pub max_residual: f64,
}

impl SolveReport {
    pub fn max_iterations(&self) -> usize {
        self.iterations.iter().copied().max().unwrap_or(0)
    }

    /// Flat `key=value` lines.
    pub fn to_key_value(&self) -> String {
        let total: usize = self.iterations.iter().sum();
        format!(
            "steps={}\nmax_iterations_per_step={}\ntotal_iterations={}\nfinal_active_set_changes={}\nfrozen_nodes={}\nlinear_iterations={}\nmax_residual={}\n",
            self.iterations.len(),
            self.max_iterations(),
            total,
            self.final_active_set_changes,
            self.frozen_nodes,
            self.linear_iterations,
            self.max_residual
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Pos,
    Neg,
    Zero,
}

fn classify(v: f64, deadband: f64) -> Phase {
    if v > deadband {
        Phase::Pos
    } else if v < -deadband {
        Phase::Neg
    } else {
        Phase::Zero
    }
}

/// Solves forward in time from the data's initial slice.
pub fn solve(
    grid: &GridSpec,
    coeffs: &CoefficientPair,
    data: &BoundaryData,
    controls: &SolveControls,
) -> Result<(ScalarField, SolveReport)> {
    if data.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            found: data.dim(),
        });
    }
    if grid.shape().iter().any(|&n| n < 3) {
        return Err(Error::GridTooSmall("solver needs 3 nodes per axis".into()));
    }
    if !(controls.deadband >= 0.0 && controls.linear_tolerance > 0.0) {
        return Err(Error::Malformed("invalid solver controls".into()));
    }
    let m = grid.space_len();
    let mut x = vec![0.0; grid.dim()];
    let initial: Vec<f64> = (0..m)
        .map(|s| {
            grid.space_coords_into(s, &mut x);
            data.eval(grid.time(0), &x)
        })
        .collect();
    check_finite(&initial, 0)?;
    let mut field = ScalarField::zeros(grid.clone());
    field.slice_mut(0).copy_from_slice(&initial);

    let stepper = Stepper::new(grid);
    let mut report = SolveReport::default();
    for k in 1..grid.slices() {
        let t = grid.time(k);
        let prev = field.slice(k - 1).to_vec();
        let mut cur = vec![0.0; m];
        for s in 0..m {
            if stepper.is_boundary[s] {
                grid.space_coords_into(s, &mut x);
                cur[s] = data.eval(t, &x);
            } else if controls.warm_start {
                cur[s] = prev[s];
            }
        }
        check_finite(&cur, k)?;
        let lp: Vec<f64> = (0..m)
            .map(|s| {
                grid.space_coords_into(s, &mut x);
                coeffs.plus.eval(t, &x)
            })
            .collect();
        let lm: Vec<f64> = (0..m)
            .map(|s| {
                grid.space_coords_into(s, &mut x);
                coeffs.minus.eval(t, &x)
            })
            .collect();
        let outcome = stepper.step(&prev, &mut cur, &lp, &lm, controls);
        field.slice_mut(k).copy_from_slice(&cur);
        report.iterations.push(outcome.iterations);
        report.frozen_nodes += outcome.frozen;
        report.linear_iterations += outcome.linear_iterations;
        report.final_active_set_changes = outcome.last_changes;
        if !outcome.converged {
            report.max_residual = residual(&field, coeffs)?.max_abs_off_band();
            return Err(Error::NoConvergence {
                step: k,
                last_iterate: Box::new(field),
                report: Box::new(report),
            });
        }
    }
    report.max_residual = residual(&field, coeffs)?.max_abs_off_band();
    Ok((field, report))
}

fn check_finite(values: &[f64], k: usize) -> Result<()> {
    if let Some(s) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::DataMismatch(format!(
            "boundary data is not finite at slice {k}, node {s}"
        )));
    }
    Ok(())
}

/// Active-set iterations between relaxation restarts.
const RESTART_EVERY: usize = 8;

struct StepOutcome {
    iterations: usize,
    converged: bool,
    frozen: usize,
    linear_iterations: usize,
    last_changes: usize,
}

struct Stepper {
    grid: GridSpec,
    is_boundary: Vec<bool>,
    strides: Vec<usize>,
    inv_h2: f64,
    inv_dt: f64,
    diag: f64,
}

impl Stepper {
    fn new(grid: &GridSpec) -> Self {
        let inv_h2 = 1.0 / (grid.h() * grid.h());
        let inv_dt = 1.0 / grid.dt();
        Self {
            grid: grid.clone(),
            is_boundary: (0..grid.space_len()).map(|s| grid.is_spatial_boundary(s)).collect(),
            strides: (0..grid.dim()).map(|a| grid.stride(a)).collect(),
            inv_h2,
            inv_dt,
            diag: inv_dt + 2.0 * grid.dim() as f64 * inv_h2,
        }
    }

    fn neighbour_sum(&self, u: &[f64], s: usize) -> f64 {
        self.strides.iter().map(|&st| u[s + st] + u[s - st]).sum()
    }

    /// Nodewise exact minimisation sweeps (nonlinear SOR). Returns the last
    /// sweep's largest update.
    fn relax(&self, prev: &[f64], cur: &mut [f64], lp: &[f64], lm: &[f64], sweeps: usize) -> f64 {
        let m = self.grid.space_len();
        let n_max = self.grid.shape().iter().copied().max().unwrap_or(3) as f64;
        let rho = (2.0 * self.strides.len() as f64 * self.inv_h2 * (std::f64::consts::PI / n_max).cos())
            / self.diag;
        let omega = 2.0 / (1.0 + (1.0 - rho * rho).max(0.0).sqrt());
        let mut last = 0.0;
        for _ in 0..sweeps {
            last = 0.0f64;
            for s in 0..m {
                if self.is_boundary[s] {
                    continue;
                }
                let z = prev[s] * self.inv_dt + self.neighbour_sum(cur, s) * self.inv_h2;
                let target = if z > lp[s] {
                    (z - lp[s]) / self.diag
                } else if z < -lm[s] {
                    (z + lm[s]) / self.diag
                } else {
                    0.0
                };
                let mut v = cur[s] + omega * (target - cur[s]);
                // over-relaxation must not cross zero past the exact update
                if v.signum() != target.signum() {
                    v = target;
                }
                last = last.max((v - cur[s]).abs());
                cur[s] = v;
            }
        }
        last
    }

    fn step(
        &self,
        prev: &[f64],
        cur: &mut [f64],
        lp: &[f64],
        lm: &[f64],
        controls: &SolveControls,
    ) -> StepOutcome {
        let m = self.grid.space_len();
        let db = controls.deadband;
        let c = 1.0 / self.diag;
        let mut phase: Vec<Phase> = (0..m)
            .map(|s| {
                let v = if controls.warm_start { prev[s] } else { 0.0 };
                classify(v, db)
            })
            .collect();
        let mut frozen = vec![false; m];
        let mut history: Vec<[Phase; 2]> = phase.iter().map(|&p| [p, p]).collect();
        let mut linear_iterations = 0;
        let mut last_changes = 0;
        let mut workspace = linear::Workspace::new(m);

        for it in 1..=controls.max_iterations {
            // unknowns: interior nodes off the zero phase
            let unknown: Vec<usize> = (0..m)
                .filter(|&s| !self.is_boundary[s] && phase[s] != Phase::Zero)
                .collect();
            let mut is_unknown = vec![false; m];
            for &s in &unknown {
                is_unknown[s] = true;
            }
            for s in 0..m {
                if !self.is_boundary[s] && phase[s] == Phase::Zero {
                    cur[s] = 0.0;
                }
            }
            let mut rhs = vec![0.0; m];
            let mut sol = vec![0.0; m];
            for &s in &unknown {
                let mu = if phase[s] == Phase::Pos { lp[s] } else { -lm[s] };
                let known: f64 = self
                    .strides
                    .iter()
                    .flat_map(|&st| [s + st, s - st])
                    .filter(|&j| !is_unknown[j])
                    .map(|j| cur[j])
                    .sum();
                rhs[s] = prev[s] * self.inv_dt - mu + known * self.inv_h2;
                sol[s] = cur[s];
            }
            let op = linear::StencilOperator {
                unknown: &unknown,
                is_unknown: &is_unknown,
                strides: &self.strides,
                diag: self.diag,
                off: self.inv_h2,
            };
            let lin = linear::conjugate_gradient(
                &op,
                &rhs,
                &mut sol,
                controls.linear_tolerance,
                controls.max_linear_iterations,
                &mut workspace,
            );
            linear_iterations += lin.iterations;
            for &s in &unknown {
                cur[s] = sol[s];
            }

            let mut changes = 0;
            let mut newly_frozen = 0;
            let mut next = phase.clone();
            for s in 0..m {
                if self.is_boundary[s] || frozen[s] {
                    continue;
                }
                let span = c * (lp[s] + lm[s]);
                let u = cur[s];
                let np = match phase[s] {
                    Phase::Pos => {
                        if u > db {
                            Phase::Pos
                        } else if u < -span - db {
                            Phase::Neg
                        } else {
                            Phase::Zero
                        }
                    }
                    Phase::Neg => {
                        if u < -db {
                            Phase::Neg
                        } else if u > span + db {
                            Phase::Pos
                        } else {
                            Phase::Zero
                        }
                    }
                    Phase::Zero => {
                        let mu = self.neighbour_sum(cur, s) * self.inv_h2 + prev[s] * self.inv_dt;
                        if c * (mu - lp[s]) > db {
                            Phase::Pos
                        } else if c * (mu + lm[s]) < -db {
                            Phase::Neg
                        } else {
                            Phase::Zero
                        }
                    }
                };
                if np != phase[s] {
                    // A -> B -> A -> B: freeze
                    let [older, old] = history[s];
                    if 4 * it > 3 * controls.max_iterations && np == old && phase[s] == older {
                        frozen[s] = true;
                        newly_frozen += 1;
                        next[s] = Phase::Zero;
                        if phase[s] != Phase::Zero {
                            changes += 1;
                        }
                        continue;
                    }
                    changes += 1;
                }
                next[s] = np;
            }
            for (h, &p) in history.iter_mut().zip(&phase) {
                *h = [h[1], p];
            }
            phase = next;
            last_changes = changes;
            if changes > 0 && it % RESTART_EVERY == 0 && 4 * it <= 3 * controls.max_iterations {
                // cycling: move closer with relaxation sweeps, then restart the sets
                let sweeps = 4 * self.grid.shape().iter().copied().max().unwrap_or(3);
                self.relax(prev, cur, lp, lm, sweeps);
                for s in 0..m {
                    if !self.is_boundary[s] {
                        phase[s] = classify(cur[s], db);
                        history[s] = [phase[s], phase[s]];
                    }
                }
                continue;
            }
            if changes == 0 && lin.converged && newly_frozen == 0 {
                for s in 0..m {
                    if !self.is_boundary[s] && phase[s] == Phase::Zero {
                        cur[s] = 0.0;
                    }
                }
                return StepOutcome {
                    iterations: it,
                    converged: true,
                    frozen: frozen.iter().filter(|&&f| f).count(),
                    linear_iterations,
                    last_changes,
                };
            }
        }
        StepOutcome {
            iterations: controls.max_iterations,
            converged: false,
            frozen: frozen.iter().filter(|&&f| f).count(),
            linear_iterations,
            last_changes,
        }
    }
}

/// Nodewise `Δ_h u − ∂ₜu − λ₊χ{u>0} + λ₋χ{u<0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualField {
    grid: GridSpec,
    values: Vec<f64>,
    applicable: Vec<bool>,
    band: Vec<bool>,
}

impl ResidualField {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// `None` on boundary nodes and on the initial slice.
    pub fn get(&self, k: usize, s: usize) -> Option<f64> {
        let i = k * self.grid.space_len() + s;
        self.applicable[i].then_some(self.values[i])
    }

    /// Whether the node's stencil touches a change of phase.
    pub fn in_band(&self, k: usize, s: usize) -> bool {
        self.band[k * self.grid.space_len() + s]
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.applicable)
            .filter(|(_, &a)| a)
            .map(|(v, _)| v.abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_off_band(&self) -> f64 {
        self.values
            .iter()
            .zip(self.applicable.iter().zip(&self.band))
            .filter(|(_, (&a, &b))| a && !b)
            .map(|(v, _)| v.abs())
            .fold(0.0, f64::max)
    }

    /// Max |residual| over applicable nodes farther than `dist` from the
    /// plane `x·direction = offset`.
    pub fn max_abs_away_from_plane(&self, direction: &[f64], offset: f64, dist: f64) -> f64 {
        let m = self.grid.space_len();
        let mut worst: f64 = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            if !self.applicable[i] {
                continue;
            }
            let x = self.grid.space_coords(i % m);
            let s: f64 = x.iter().zip(direction).map(|(a, b)| a * b).sum::<f64>() - offset;
            if s.abs() > dist {
                worst = worst.max(v.abs());
            }
        }
        worst
    }
}

/// Residual of the equation at interior nodes of slices `k ≥ 1`, using the
/// same deadband as the default solver controls.
pub fn residual(u: &ScalarField, coeffs: &CoefficientPair) -> Result<ResidualField> {
    residual_with_deadband(u, coeffs, SolveControls::default().deadband)
}

pub fn residual_with_deadband(
    u: &ScalarField,
    coeffs: &CoefficientPair,
    deadband: f64,
) -> Result<ResidualField> {
    let grid = u.grid();
    if grid.shape().iter().any(|&n| n < 3) || grid.slices() < 2 {
        return Err(Error::GridTooSmall(
            "residual needs 3 nodes per axis and 2 time slices".into(),
        ));
    }
    let m = grid.space_len();
    let mut values = vec![0.0; grid.len()];
    let mut applicable = vec![false; grid.len()];
    let mut band = vec![false; grid.len()];
    let strides: Vec<usize> = (0..grid.dim()).map(|a| grid.stride(a)).collect();
    let boundary: Vec<bool> = (0..m).map(|s| grid.is_spatial_boundary(s)).collect();
    let mut x = vec![0.0; grid.dim()];
    for k in 1..grid.slices() {
        let t = grid.time(k);
        for s in 0..m {
            if boundary[s] {
                continue;
            }
            let i = k * m + s;
            let v = u.value(k, s);
            let p = classify(v, deadband);
            let mut touches = classify(u.value(k - 1, s), deadband) != p;
            for &st in &strides {
                touches |= classify(u.value(k, s + st), deadband) != p;
                touches |= classify(u.value(k, s - st), deadband) != p;
            }
            grid.space_coords_into(s, &mut x);
            let source = match p {
                Phase::Pos => coeffs.plus.eval(t, &x),
                Phase::Neg => -coeffs.minus.eval(t, &x),
                Phase::Zero => 0.0,
            };
            let lap = u.laplacian_unchecked(k, s).value;
            let ut = u.time_derivative_unchecked(k, s).value;
            values[i] = lap - ut - source;
            applicable[i] = true;
            band[i] = touches;
        }
    }
    Ok(ResidualField {
        grid: grid.clone(),
        values,
        applicable,
        band,
    })
}

/// Solves two problems whose data coincide on the shared parabolic boundary
/// of `grid` (they may differ elsewhere, e.g. in their history before the
/// grid's initial time).
pub fn solve_forward_pair(
    first: &BoundaryData,
    second: &BoundaryData,
    coeffs: &CoefficientPair,
    grid: &GridSpec,
    controls: &SolveControls,
) -> Result<(ScalarField, ScalarField)> {
    for d in [first, second] {
        if d.dim() != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                found: d.dim(),
            });
        }
    }
    let mut x = vec![0.0; grid.dim()];
    for k in 0..grid.slices() {
        let t = grid.time(k);
        for s in 0..grid.space_len() {
            if k > 0 && !grid.is_spatial_boundary(s) {
                continue;
            }
            grid.space_coords_into(s, &mut x);
            let (a, b) = (first.eval(t, &x), second.eval(t, &x));
            if a != b && (a - b).abs() > 1e-14 * a.abs().max(b.abs()).max(1.0) {
                return Err(Error::DataMismatch(format!(
                    "data differ on the shared boundary at t={t}, x={x:?}: {a} vs {b}"
                )));
            }
        }
    }
    let (r1, r2) = std::thread::scope(|scope| {
        let h1 = scope.spawn(|| solve(grid, coeffs, first, controls));
        let h2 = scope.spawn(|| solve(grid, coeffs, second, controls));
        (h1.join().expect("solver thread panicked"), h2.join().expect("solver thread panicked"))
    });
    Ok((r1?.0, r2?.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{HProfile, PolynomialCaloricProfile, Profile, ProfileSpec};

    fn grid(nodes: usize, slices: usize) -> GridSpec {
        GridSpec::cube(2, 1.0, nodes, (-1.0, 1.0), slices).unwrap()
    }

    #[test]
    fn zero_data_gives_zero() {
        let g = grid(17, 9);
        let coeffs = CoefficientPair::constant(1.0, 2.0).unwrap();
        let (u, rep) = solve(&g, &coeffs, &BoundaryData::zero(2), &SolveControls::default()).unwrap();
        assert!(u.values().iter().all(|&v| v == 0.0));
        assert_eq!(rep.max_residual, 0.0);
    }

    #[test]
    fn reproduces_h_profile() {
        let h = HProfile::along_e1(1.0, 1.0, 2).unwrap();
        let coeffs = CoefficientPair::constant(1.0, 1.0).unwrap();
        for nodes in [33, 65] {
            let g = grid(nodes, 17);
            let data = BoundaryData::from_profile(2, ProfileSpec::H(h.clone()));
            let (u, rep) = solve(&g, &coeffs, &data, &SolveControls::default()).unwrap();
            let exact = h.sample(&g).unwrap();
            assert!(u.max_abs_diff(&exact).unwrap() < 1e-9);
            assert!(rep.max_residual < 1e-6);
        }
    }

    #[test]
    fn reproduces_caloric_polynomial() {
        let z = PolynomialCaloricProfile::new(1.0, vec![0.0, 0.0], 1.0).unwrap();
        let g = GridSpec::cube(2, 1.0, 17, (-1.0, 0.0), 17).unwrap();
        let coeffs = CoefficientPair::constant(1.0, 1.0).unwrap();
        let data = BoundaryData::from_profile(2, ProfileSpec::Polynomial(z.clone()));
        let (u, _) = solve(&g, &coeffs, &data, &SolveControls::default()).unwrap();
        assert!(u.max_abs_diff(&z.sample(&g).unwrap()).unwrap() < 1e-9);
    }

    #[test]
    fn residual_of_constant_field() {
        let g = grid(9, 3);
        let u = ScalarField::from_fn(g, |_, _| 1.0).unwrap();
        let r = residual(&u, &CoefficientPair::constant(1.0, 1.0).unwrap()).unwrap();
        assert_eq!(r.get(0, 40), None);
        assert_eq!(r.get(1, 0), None);
        assert_eq!(r.get(1, 40), Some(-1.0));
        assert_eq!(r.max_abs(), 1.0);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let g = grid(9, 3);
        let coeffs = CoefficientPair::constant(1.0, 1.0).unwrap();
        assert!(matches!(
            solve(&g, &coeffs, &BoundaryData::zero(3), &SolveControls::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn non_convergence_carries_last_iterate() {
        let g = grid(17, 5);
        let coeffs = CoefficientPair::constant(1.0, 1.0).unwrap();
        let data = BoundaryData::new(2, |_, x| x[0] * x[0] - 0.3);
        let controls = SolveControls {
            max_iterations: 1,
            warm_start: false,
            ..SolveControls::default()
        };
        match solve(&g, &coeffs, &data, &controls) {
            Err(Error::NoConvergence { step, last_iterate, report }) => {
                assert_eq!(step, 1);
                assert_eq!(last_iterate.grid(), &g);
                assert_eq!(report.iterations, vec![1]);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn cold_and_warm_starts_agree() {
        let g = grid(33, 17);
        let coeffs = CoefficientPair::new(
            CoefficientField::Wave {
                base: 1.0,
                amplitude: 0.1,
                time_frequency: 1.0,
                frequencies: vec![2.0, 1.0],
                phase: 0.0,
            },
            CoefficientField::Constant(1.5),
        )
        .unwrap();
        let data = BoundaryData::new(2, |t, x| 0.5 * x[0] * x[0].abs() + 0.1 * x[1] - 0.05 * t);
        let (warm, _) = solve(&g, &coeffs, &data, &SolveControls::default()).unwrap();
        let (cold, _) = solve(
            &g,
            &coeffs,
            &data,
            &SolveControls {
                warm_start: false,
                ..SolveControls::default()
            },
        )
        .unwrap();
        assert!(warm.max_abs_diff(&cold).unwrap() < 1e-9);
    }

    #[test]
    fn agrees_with_relaxation_reference() {
        let g = grid(17, 9);
        let coeffs = CoefficientPair::constant(1.3, 0.8).unwrap();
        let data = BoundaryData::new(2, |t, x| x[0] * x[0].abs() - 0.2 * x[1] + 0.1 * t);
        let (u, _) = solve(&g, &coeffs, &data, &SolveControls::default()).unwrap();
        let st = Stepper::new(&g);
        let m = g.space_len();
        let lp = vec![1.3; m];
        let lm = vec![0.8; m];
        let mut prev = u.slice(0).to_vec();
        for k in 1..g.slices() {
            let mut cur = prev.clone();
            for s in 0..m {
                if st.is_boundary[s] {
                    cur[s] = data.eval(g.time(k), &g.space_coords(s));
                }
            }
            while st.relax(&prev, &mut cur, &lp, &lm, 100) > 1e-15 {}
            let diff = cur.iter().zip(u.slice(k)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(diff < 1e-8, "slice {k}: {diff}");
            prev = cur;
        }
    }

    #[test]
    fn forward_pair_rejects_mismatched_data() {
        let g = grid(9, 3);
        let coeffs = CoefficientPair::constant(1.0, 1.0).unwrap();
        let a = BoundaryData::zero(2);
        let b = BoundaryData::new(2, |_, _| 1e-3);
        assert!(matches!(
            solve_forward_pair(&a, &b, &coeffs, &g, &SolveControls::default()),
            Err(Error::DataMismatch(_))
        ));
        let (u1, u2) = solve_forward_pair(&a, &a, &coeffs, &g, &SolveControls::default()).unwrap();
        assert_eq!(u1, u2);
    }

    #[test]
    fn report_key_values() {
        let rep = SolveReport {
            iterations: vec![2, 3],
            ..SolveReport::default()
        };
        let text = rep.to_key_value();
        assert!(text.contains("steps=2\n"));
        assert!(text.contains("max_iterations_per_step=3\n"));
    }
}

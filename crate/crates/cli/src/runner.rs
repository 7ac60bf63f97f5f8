//! Solving a scenario and evaluating its checks.

use std::fmt::Write as _;
use std::path::Path;

use twophase_core::exact::Profile;
use twophase_core::freeboundary::{
    detect_branch_points, extract_free_boundary, fit_graph, lipschitz_norms, normal_continuity, reflect_odd,
    temporal_quotient_near, FreeBoundaryGraph, Phase,
};
use twophase_core::geometry::{pardist, write_field_csv};
use twophase_core::monotonicity::{check_monotone, phi_of_field, EnergyOptions};
use twophase_core::scenarios::{self, Check, Overrides, Scenario, Transform};
use twophase_core::solver::{residual_with_deadband, solve, solve_forward_pair};
use twophase_core::verify::{
    best_closeness_to_shifted_h, blowup, refine_profile_shift, blowup_time_derivative_decay, check_directional_monotonicity,
    check_forward_uniqueness, check_nondegeneracy, check_tempo_spatial_monotonicity, search_directions,
    EstimateReport, MonotonicityOptions,
};
use twophase_core::{Cylinder, Error, GridSpec, Point, ScalarField, SolveControls, SolveReport};

use crate::config::{self, RunConfig, Target};
use crate::CliError;

/// Radius of the window, centred at the origin at `t = 0`, searched for
/// branch points.
const BRANCH_WINDOW: f64 = 0.25;
/// Cells per side of the neighbourhood used for normal fitting.
const NORMAL_RADIUS_CELLS: f64 = 3.0;
/// A quotient counts as not decaying if the refined value keeps this share.
/// Neighbourhood, in cells, in which `∂ₑu` must take both signs around the
/// centre of the monotonicity trace.
const SIGN_CHANGE_REACH: f64 = 2.0;
const NONDECAY_SHARE: f64 = 0.8;

/// A named output file.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub check: String,
    pub pass: bool,
    pub detail: String,
    /// Named scalar results, reported in the summary.
    pub values: Vec<(String, f64)>,
}

impl CheckResult {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|(k, _)| k == name).map(|e| e.1)
    }
}

/// Solved field(s) of a scenario.
#[derive(Debug, Clone)]
pub struct Solved {
    /// The solve on the scenario grid.
    pub raw: ScalarField,
    /// The field the checks see (after the scenario's transform).
    pub field: ScalarField,
    pub report: SolveReport,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub scenario: Scenario,
    pub solved: Solved,
    pub checks: Vec<CheckResult>,
    pub artifacts: Vec<Artifact>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.check == name)
    }

    pub fn summary(&self) -> String {
        let mut out = format!("scenario {}\n", self.scenario.name);
        let g = &self.scenario.grid;
        let _ = writeln!(
            out,
            "grid {:?} x {} slices, h = {}, dt = {}",
            g.shape(),
            g.slices(),
            g.h(),
            g.dt()
        );
        for line in self.solved.report.to_key_value().lines() {
            let _ = writeln!(out, "solver {line}");
        }
        for c in &self.checks {
            let _ = writeln!(out, "check {}: {} {}", c.check, if c.pass { "PASS" } else { "FAIL" }, c.detail);
            for (k, v) in &c.values {
                let _ = writeln!(out, "  {k} = {v}");
            }
        }
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.pass).map(|c| c.check.as_str()).collect();
        if failed.is_empty() {
            out.push_str("result PASS\n");
        } else {
            let _ = writeln!(out, "result FAIL ({})", failed.join(", "));
        }
        out
    }
}

/// Resolves the target of `cfg` into a scenario with overrides applied.
pub fn prepare(cfg: &RunConfig) -> Result<(Scenario, RunConfig), CliError> {
    let mut cfg = cfg.clone();
    let mut descriptor = None;
    if let Target::File(path) = cfg.target.clone() {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let sections = config::parse(&text)?;
        let (run, rest): (Vec<_>, Vec<_>) = sections.into_iter().partition(|s| s.name == "run");
        if let Some(run) = run.first() {
            cfg.merge_run_section(run)?;
        }
        if !rest.is_empty() {
            descriptor = Some(Scenario::from_sections(&rest)?);
        } else if matches!(cfg.target, Target::File(_)) {
            return Err(CliError::Config(format!(
                "{} names no scenario: add `scenario = <name>` under [run] or a full descriptor",
                path.display()
            )));
        }
    }
    let overrides = Overrides {
        nodes: cfg.grid,
        dt: cfg.dt,
        seed: cfg.seed,
    };
    let mut scenario = match descriptor {
        Some(mut s) => {
            if cfg.seed.is_some() {
                return Err(CliError::Config("a seed override needs a catalogue scenario".into()));
            }
            s.grid = regrid(&s.grid, &overrides)?;
            s
        }
        None => match &cfg.target {
            Target::Scenario(name) => scenarios::build(name, &overrides)?,
            Target::File(_) => unreachable!("file targets resolve to a descriptor or a name"),
        },
    };
    if let Some(names) = &cfg.checks {
        scenario.select_checks(names)?;
    }
    Ok((scenario, cfg))
}

fn regrid(g: &GridSpec, o: &Overrides) -> Result<GridSpec, CliError> {
    let longest = g.lower().iter().zip(g.upper()).map(|(a, b)| b - a).fold(0.0, f64::max);
    let h = match o.nodes {
        Some(n) if n < 3 => return Err(CliError::Usage(format!("--grid needs at least 3 nodes, got {n}"))),
        Some(n) => longest / (n - 1) as f64,
        None => g.h(),
    };
    Ok(GridSpec::new(
        g.lower().to_vec(),
        g.upper().to_vec(),
        h,
        (g.t_start(), g.t_end()),
        o.dt.unwrap_or(g.dt()),
    )?)
}

/// Solves the scenario and applies its transform.
pub fn solve_scenario(s: &Scenario, controls: &SolveControls) -> Result<Solved, CliError> {
    let data = s.boundary_data()?;
    let (raw, report) = solve(&s.grid, &s.coefficients, &data, controls)?;
    let field = match s.transform {
        Transform::None => raw.clone(),
        Transform::ReflectOdd => reflect_odd(&raw, controls.deadband.max(1e-10))?,
    };
    Ok(Solved { raw, field, report })
}

/// The detected branch point closest (parabolically) to the origin at
/// `t = 0`.
pub fn find_branch_point(u: &ScalarField, sigma: f64, deadband: f64) -> Result<Point, CliError> {
    let n = u.grid().dim();
    let window = Cylinder::full(Point::origin(n), BRANCH_WINDOW)?;
    let report = detect_branch_points(u, sigma, &window, deadband)?;
    let origin = Point::origin(n);
    report
        .points
        .iter()
        .map(|b| (pardist(&b.point, &origin).unwrap_or(f64::INFINITY), &b.point))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, p)| p.clone())
        .ok_or_else(|| {
            CliError::Check(format!(
                "no branch point with sigma = {sigma} within {BRANCH_WINDOW} of the origin"
            ))
        })
}

/// Zero of `u` nearest to `near`, on the slice of `near`, around which `w`
/// takes both signs within `reach` cells. Only points `x` with
/// `admissible(x)` are considered.
pub fn find_sign_change_center(
    u: &ScalarField,
    w: &ScalarField,
    near: &Point,
    deadband: f64,
    reach: f64,
    admissible: impl Fn(&[f64]) -> bool,
) -> Result<Point, CliError> {
    let g = u.grid();
    let k = g
        .time_range(near.t - 0.5 * g.dt(), near.t + 0.5 * g.dt())
        .next()
        .ok_or_else(|| CliError::Check(format!("t = {} is outside the field", near.t)))?;
    let wmax = w.slice(k).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let thr = 1e-6 * wmax;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for s in 0..g.space_len() {
        if u.value(k, s).abs() > deadband || g.is_spatial_boundary(s) {
            continue;
        }
        let x = g.space_coords(s);
        if !admissible(&x) {
            continue;
        }
        let d = x.iter().zip(&near.x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        if best.as_ref().is_some_and(|b| d >= b.0) {
            continue;
        }
        let around = g.space_nodes_in_box(&x, reach * g.h());
        if around.iter().any(|&q| w.value(k, q) > thr) && around.iter().any(|&q| w.value(k, q) < -thr) {
            best = Some((d, x));
        }
    }
    best.map(|(_, x)| Point::new(g.time(k), x))
        .ok_or_else(|| CliError::Check("the directional derivative does not change sign on the free boundary".into()))
}

/// Last time at which `∂{u>0}` still touches `{x₁ = 0}` along `x' = 0`; the
/// contact point is `(t_c, 0)`.
pub fn find_contact_point(v: &ScalarField) -> Result<Point, CliError> {
    let g = v.grid();
    let h = g.h();
    let cloud = extract_free_boundary(v, Phase::Positive);
    let mut detach = vec![false; g.slices()];
    for p in &cloud.points {
        if p.x[1..].iter().all(|c| c.abs() <= 0.5 * h) && p.x[0] > 0.5 * h {
            let k = ((p.t - g.t_start()) / g.dt()).round() as usize;
            detach[k.min(g.slices() - 1)] = true;
        }
    }
    // first slice after which every later slice has detached
    let first = (0..g.slices()).rev().take_while(|&k| detach[k]).last();
    match first {
        Some(k) if k > 0 => Ok(Point::new(g.time(k - 1), vec![0.0; g.dim()])),
        _ => Err(CliError::Check("the positive phase never leaves the wall x1 = 0".into())),
    }
}

/// Everything a check may need, computed on demand.
struct Context<'a> {
    scenario: &'a Scenario,
    solved: &'a Solved,
    controls: &'a SolveControls,
    tol: Option<f64>,
    artifacts: Vec<Artifact>,
}

impl Context<'_> {
    fn u(&self) -> &ScalarField {
        &self.solved.field
    }

    fn add(&mut self, name: &str, contents: String) {
        self.artifacts.push(Artifact {
            name: name.to_string(),
            contents,
        });
    }

    fn estimates_csv(&mut self, name: &str, reports: &[EstimateReport]) {
        let mut out = EstimateReport::csv_header(self.u().grid().dim());
        out.push('\n');
        for r in reports {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        self.add(name, out);
    }

    fn run(&mut self, check: &Check) -> Result<CheckResult, CliError> {
        match check {
            Check::ExactError { tol } => self.exact_error(self.tol.unwrap_or(*tol)),
            Check::Residual { tol } => self.residual(self.tol.unwrap_or(*tol)),
            Check::Nondegeneracy { radii } => self.nondegeneracy(radii),
            Check::Monotonicity { direction, radii, tol } => {
                self.monotonicity(direction, radii, self.tol.unwrap_or(*tol))
            }
            Check::Directional {
                r,
                epsilon,
                directions,
                alphas,
                tol_factor,
            } => self.directional(*r, *epsilon, *directions, alphas, *tol_factor),
            Check::Closeness { radii, sigma } => self.closeness(radii, *sigma),
            Check::Graph { direction, radius, bins } => self.graph(direction, *radius, bins),
            Check::Oddness => self.oddness(),
            Check::TemporalQuotient { radius } => self.temporal_quotient(*radius),
            Check::ForwardUniqueness { tol } => self.forward(self.tol.unwrap_or(*tol)),
        }
    }

    fn exact_error(&mut self, tol: f64) -> Result<CheckResult, CliError> {
        let exact = self
            .scenario
            .boundary
            .exact()
            .ok_or_else(|| CliError::Config("exact-error needs closed-form boundary data".into()))?;
        let u = self.u();
        let reference = exact.sample(u.grid())?;
        let err = u.max_abs_diff(&reference)?;
        Ok(CheckResult {
            check: "exact-error".into(),
            pass: err <= tol,
            detail: format!("max |u - exact| = {err:e} (tol {tol:e})"),
            values: vec![("max_error".into(), err)],
        })
    }

    fn residual(&mut self, tol: f64) -> Result<CheckResult, CliError> {
        let res = residual_with_deadband(self.u(), &self.scenario.coefficients, self.controls.deadband)?;
        let off = res.max_abs_off_band();
        Ok(CheckResult {
            check: "residual".into(),
            pass: off <= tol,
            detail: format!("max residual off the interface band = {off:e} (tol {tol:e})"),
            values: vec![("max_residual_off_band".into(), off), ("max_residual".into(), res.max_abs())],
        })
    }

    fn nondegeneracy(&mut self, radii: &[f64]) -> Result<CheckResult, CliError> {
        let u = self.u().clone();
        let mut reports = Vec::new();
        let mut skipped = 0usize;
        for phase in [Phase::Positive, Phase::Negative] {
            let cloud = extract_free_boundary(&u, phase);
            for p in &cloud.points {
                for &r in radii {
                    match check_nondegeneracy(&u, &self.scenario.coefficients, p, r, phase) {
                        Ok(rep) => reports.push(rep),
                        Err(Error::Window(_)) | Err(Error::Hypothesis(_)) => skipped += 1,
                        Err(e) => return Err(e.into()),
                    }
                }
            }
        }
        let failed = reports.iter().filter(|r| !r.pass).count();
        let worst = reports.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
        self.estimates_csv("nondegeneracy.csv", &reports);
        Ok(CheckResult {
            check: "nondegeneracy".into(),
            pass: !reports.is_empty() && failed == 0,
            detail: format!(
                "{} evaluations at free-boundary points, {failed} failed, {skipped} skipped (window)",
                reports.len()
            ),
            values: vec![
                ("evaluated".into(), reports.len() as f64),
                ("failed".into(), failed as f64),
                ("worst_margin".into(), worst),
            ],
        })
    }

    fn branch_point(&self, sigma: f64) -> Result<Point, CliError> {
        find_branch_point(self.u(), sigma, self.controls.deadband)
    }

    /// Detected branch point and the sub-grid shift of its profile at
    /// scale `r`.
    fn refined_branch_point(&self, sigma: f64, r: f64) -> Result<(Point, Vec<f64>), CliError> {
        let p = self.branch_point(sigma)?;
        let (shift, _) = refine_profile_shift(self.u(), &self.scenario.coefficients, &p, r)?;
        Ok((p, shift))
    }

    fn monotonicity(&mut self, direction: &[f64], radii: &[f64], tol: f64) -> Result<CheckResult, CliError> {
        let u = self.u();
        let g = u.grid().clone();
        if direction.len() != g.dim() {
            return Err(CliError::Config("monotonicity direction has the wrong dimension".into()));
        }
        let branch = self.branch_point(0.1)?;
        let mut w = Vec::with_capacity(g.len());
        for k in 0..g.slices() {
            for s in 0..g.space_len() {
                let mut d = 0.0;
                for (a, e) in direction.iter().enumerate() {
                    d += e * u.partial(k, s, a)?.value;
                }
                w.push(d);
            }
        }
        let w = ScalarField::new(g.clone(), w)?;
        let opts = EnergyOptions::default();
        let rmax = radii.iter().copied().fold(0.0, f64::max);
        let covered = |x: &[f64]| g.covers(branch.t - rmax * rmax, branch.t, x, opts.truncation * rmax);
        let center = find_sign_change_center(u, &w, &branch, self.controls.deadband, SIGN_CHANGE_REACH, covered)?;
        let trace = phi_of_field(&w, &center, radii, &opts)?;
        let max = trace.phi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let rep = check_monotone(&trace, tol * max);
        self.add("monotonicity_trace.csv", trace.to_csv());
        Ok(CheckResult {
            check: "monotonicity".into(),
            pass: rep.is_monotone() && max > 0.0,
            detail: format!(
                "phi at t={} x={:?}: {:?}, {} decrease(s) beyond {tol}*max",
                center.t,
                center.x,
                trace.phi,
                rep.violations.len()
            ),
            values: vec![("max_phi".into(), max), ("violations".into(), rep.violations.len() as f64)],
        })
    }

    fn directional(
        &mut self,
        r: f64,
        epsilon: f64,
        count: usize,
        alphas: &[f64],
        tol_factor: f64,
    ) -> Result<CheckResult, CliError> {
        let (base, shift) = self.refined_branch_point(0.1, r)?;
        let ur = blowup(self.u(), &base, r)?;
        let coeffs = self.scenario.coefficients.rescaled(&base, r);
        let n = ur.grid().dim();
        let scaled: Vec<f64> = shift.iter().map(|v| v / r).collect();
        let frame = best_closeness_to_shifted_h(&ur, &coeffs, &Point::origin(n), &scaled, 1.0)?.direction;
        let cone = cone_sample(&frame, epsilon, count);
        let opts = MonotonicityOptions {
            tol_factor,
            profile_shift: scaled,
            ..MonotonicityOptions::default()
        };
        let mut reports = Vec::new();
        for e in &cone {
            reports.push(check_directional_monotonicity(&ur, &coeffs, &frame, e, epsilon, &opts)?);
        }
        for &alpha in alphas {
            for e in &cone {
                reports.push(check_tempo_spatial_monotonicity(&ur, &coeffs, &frame, alpha, e, epsilon, &opts)?);
            }
        }
        let gate = reports.iter().all(|r| r.hypothesis_satisfied());
        let failed = reports.iter().filter(|r| !r.pass).count();
        let worst = reports.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
        let closeness = reports[0].extra("closeness").unwrap_or(f64::NAN);
        let delta = reports[0].extra("delta").unwrap_or(f64::NAN);
        self.estimates_csv("directional.csv", &reports);
        Ok(CheckResult {
            check: "directional".into(),
            pass: gate && failed == 0,
            detail: format!(
                "blow-up at t={} x={:?} (profile shift {:?}), r={r}: {} directions, {failed} failed; gate {} (closeness {closeness:e} vs delta {delta:e})",
                base.t,
                base.x,
                shift,
                cone.len(),
                if gate { "satisfied" } else { "NOT satisfied" },
            ),
            values: vec![
                ("evaluated".into(), reports.len() as f64),
                ("failed".into(), failed as f64),
                ("worst_margin".into(), worst),
                ("closeness".into(), closeness),
                ("delta".into(), delta),
            ],
        })
    }

    fn closeness(&mut self, radii: &[f64], sigma: f64) -> Result<CheckResult, CliError> {
        let largest = radii.iter().copied().fold(0.0, f64::max);
        let (base, shift) = self.refined_branch_point(sigma, largest)?;
        let u = self.u().clone();
        let mut csv = String::from("r,value_term,gradient_term,time_term,total\n");
        let mut totals = Vec::new();
        for &r in radii {
            let c = best_closeness_to_shifted_h(&u, &self.scenario.coefficients, &base, &shift, r)?;
            let _ = writeln!(
                csv,
                "{r},{},{},{},{}",
                c.value_term, c.gradient_term, c.time_term, c.total
            );
            totals.push(c.total);
        }
        self.add("closeness.csv", csv);
        let decay = blowup_time_derivative_decay(&u, &base, radii, 0.0)?;
        let mut dcsv = String::from("r,sup_abs_time_derivative\n");
        for (r, s) in decay.radii.iter().zip(&decay.suprema) {
            let _ = writeln!(dcsv, "{r},{s}");
        }
        self.add("time_derivative_decay.csv", dcsv);
        let decreasing = totals.windows(2).all(|w| w[1] < w[0]);
        Ok(CheckResult {
            check: "closeness".into(),
            pass: decreasing && decay.pass,
            detail: format!(
                "at t={} x={:?} (profile shift {:?}): totals {totals:?} {}; sup|u_t| {:?} {}",
                base.t,
                base.x,
                shift,
                if decreasing { "decreasing" } else { "NOT decreasing" },
                decay.suprema,
                if decay.pass { "halves" } else { "does NOT halve" },
            ),
            values: vec![
                ("closeness_first".into(), totals[0]),
                ("closeness_last".into(), *totals.last().unwrap_or(&f64::NAN)),
                ("sup_ut_first".into(), decay.suprema[0]),
                ("sup_ut_last".into(), *decay.suprema.last().unwrap_or(&f64::NAN)),
            ],
        })
    }

    /// Base point for graph windows: the contact point of a reflected
    /// field, otherwise the detected branch point.
    fn graph_center(&self) -> Result<Point, CliError> {
        match self.scenario.transform {
            Transform::ReflectOdd => find_contact_point(self.u()),
            Transform::None => self.branch_point(0.1),
        }
    }

    fn graph(&mut self, direction: &[f64], radius: f64, bins: &[f64]) -> Result<CheckResult, CliError> {
        let center = self.graph_center()?;
        let mut graph = fit_window_graph(self.u(), direction, &center, radius)?;
        let skipped = graph.fit_normals(NORMAL_RADIUS_CELLS);
        let (spatial, temporal) = lipschitz_norms(&graph)?;
        let table = normal_continuity(&graph, bins)?;
        self.add("graph.csv", graph.to_csv());
        self.add("normal_modulus.csv", table.to_csv());
        Ok(CheckResult {
            check: "graph".into(),
            pass: spatial <= 1.0,
            detail: format!(
                "window Q_{radius} at t={} x={:?}: {} samples, spatial Lipschitz {spatial}, temporal quotient {temporal}, {skipped} normals skipped",
                center.t,
                center.x,
                graph.samples.len()
            ),
            values: vec![
                ("spatial_lipschitz".into(), spatial),
                ("temporal_quotient".into(), temporal),
                ("samples".into(), graph.samples.len() as f64),
            ],
        })
    }

    fn oddness(&mut self) -> Result<CheckResult, CliError> {
        let v = self.u();
        let g = v.grid();
        let n1 = g.shape()[0];
        let mut worst: f64 = 0.0;
        for k in 0..g.slices() {
            for s in 0..g.space_len() {
                let mut idx = g.unravel(s);
                idx[0] = n1 - 1 - idx[0];
                let m = g.ravel(&idx);
                worst = worst.max((v.value(k, s) + v.value(k, m)).abs());
            }
        }
        Ok(CheckResult {
            check: "oddness".into(),
            pass: worst == 0.0,
            detail: format!("max |v(t,x) + v(t,-x1,x')| = {worst:e}"),
            values: vec![("max_odd_defect".into(), worst)],
        })
    }

    fn temporal_quotient(&mut self, radius: f64) -> Result<CheckResult, CliError> {
        let direction = unit_axis(self.u().grid().dim());
        let fine = quotient_near_contact(self.u(), &direction, radius)?;
        // one refinement: the same scenario at half the resolution
        let mut coarse_scenario = self.scenario.clone();
        let g = &self.scenario.grid;
        coarse_scenario.grid = GridSpec::new(
            g.lower().to_vec(),
            g.upper().to_vec(),
            2.0 * g.h(),
            (g.t_start(), g.t_end()),
            4.0 * g.dt(),
        )?;
        let coarse_solved = solve_scenario(&coarse_scenario, self.controls)?;
        let coarse = quotient_near_contact(&coarse_solved.field, &direction, radius)?;
        let nondecay = fine.1 >= NONDECAY_SHARE * coarse.1;
        self.add(
            "temporal_quotient.csv",
            format!(
                "h,dt,contact_t,quotient\n{},{},{},{}\n{},{},{},{}\n",
                coarse_scenario.grid.h(),
                coarse_scenario.grid.dt(),
                coarse.0.t,
                coarse.1,
                g.h(),
                g.dt(),
                fine.0.t,
                fine.1
            ),
        );
        Ok(CheckResult {
            check: "temporal-quotient".into(),
            pass: nondecay,
            detail: format!(
                "temporal_quotient_nondecay = {nondecay}: quotient {} at h = {} vs {} at h = {}",
                fine.1,
                g.h(),
                coarse.1,
                coarse_scenario.grid.h()
            ),
            values: vec![
                ("quotient_fine".into(), fine.1),
                ("quotient_coarse".into(), coarse.1),
                ("contact_t".into(), fine.0.t),
            ],
        })
    }

    fn forward(&mut self, tol: f64) -> Result<CheckResult, CliError> {
        let partner = self
            .scenario
            .partner_data()?
            .ok_or_else(|| CliError::Config("forward-uniqueness needs [partner] data".into()))?;
        let first = self.scenario.boundary_data()?;
        let (u1, u2) = solve_forward_pair(&first, &partner, &self.scenario.coefficients, &self.scenario.grid, self.controls)?;
        let rep = check_forward_uniqueness(&u1, &u2, tol)?;
        self.estimates_csv("forward_uniqueness.csv", std::slice::from_ref(&rep));
        Ok(CheckResult {
            check: "forward-uniqueness".into(),
            pass: rep.pass,
            detail: format!("max |u1 - u2| = {:e} (bound {:e})", rep.lhs, rep.rhs),
            values: vec![("max_difference".into(), rep.lhs)],
        })
    }
}

fn unit_axis(n: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[0] = 1.0;
    e
}

fn fit_window_graph(u: &ScalarField, direction: &[f64], center: &Point, radius: f64) -> Result<FreeBoundaryGraph, CliError> {
    let window = Cylinder::full(center.clone(), radius)?;
    let cloud = extract_free_boundary(u, Phase::Positive);
    Ok(fit_graph(&cloud, direction, &window)?)
}

fn quotient_near_contact(v: &ScalarField, direction: &[f64], radius: f64) -> Result<(Point, f64), CliError> {
    let contact = find_contact_point(v)?;
    let graph = fit_window_graph(v, direction, &contact, radius)?;
    let q = temporal_quotient_near(&graph, &contact, radius);
    Ok((contact, q))
}

/// `count` unit vectors `e` with `e·frame ≥ ε`, evenly spread in angle for
/// `n = 2`; the admissible search directions otherwise.
pub fn cone_sample(frame: &[f64], epsilon: f64, count: usize) -> Vec<Vec<f64>> {
    if frame.len() != 2 {
        return search_directions(frame.len())
            .into_iter()
            .filter(|e| e.iter().zip(frame).map(|(a, b)| a * b).sum::<f64>() >= epsilon)
            .collect();
    }
    let max = epsilon.clamp(-1.0, 1.0).acos();
    let a0 = frame[1].atan2(frame[0]);
    (0..count)
        .map(|j| {
            let a = if count == 1 {
                a0
            } else {
                a0 - max + 2.0 * max * j as f64 / (count - 1) as f64
            };
            vec![a.cos(), a.sin()]
        })
        .filter(|e| e[0] * frame[0] + e[1] * frame[1] >= epsilon - 1e-12)
        .collect()
}

/// Solves `scenario` and evaluates its checks.
pub fn execute(scenario: &Scenario, tol: Option<f64>) -> Result<RunOutcome, CliError> {
    let controls = SolveControls::default();
    let solved = solve_scenario(scenario, &controls)?;
    let mut ctx = Context {
        scenario,
        solved: &solved,
        controls: &controls,
        tol,
        artifacts: Vec::new(),
    };
    let mut checks = Vec::with_capacity(scenario.checks.len());
    for check in &scenario.checks {
        let result = match ctx.run(check) {
            Ok(r) => r,
            Err(CliError::Check(msg)) => CheckResult {
                check: check.name().into(),
                pass: false,
                detail: msg,
                values: Vec::new(),
            },
            Err(CliError::Core(e @ (Error::Window(_) | Error::Hypothesis(_) | Error::NotAGraph { .. }))) => {
                CheckResult {
                    check: check.name().into(),
                    pass: false,
                    detail: e.to_string(),
                    values: Vec::new(),
                }
            }
            Err(e) => return Err(e),
        };
        checks.push(result);
    }
    let mut artifacts = ctx.artifacts;
    artifacts.insert(
        0,
        Artifact {
            name: "scenario.cfg".into(),
            contents: config::render(&scenario.to_sections()),
        },
    );
    let mut field = Vec::new();
    write_field_csv(&solved.raw, &mut field)?;
    artifacts.push(Artifact {
        name: "field.csv".into(),
        contents: String::from_utf8(field).expect("csv output is utf-8"),
    });
    if scenario.transform == Transform::ReflectOdd {
        let mut reflected = Vec::new();
        write_field_csv(&solved.field, &mut reflected)?;
        artifacts.push(Artifact {
            name: "reflected_field.csv".into(),
            contents: String::from_utf8(reflected).expect("csv output is utf-8"),
        });
    }
    let mut outcome = RunOutcome {
        scenario: scenario.clone(),
        solved,
        checks,
        artifacts,
    };
    let summary = outcome.summary();
    outcome.artifacts.push(Artifact {
        name: "summary.txt".into(),
        contents: summary,
    });
    Ok(outcome)
}

/// Writes every artifact into `dir` atomically (temporary file + rename).
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("cannot create {}: {e}", dir.display())))?;
    for a in artifacts {
        let mut tmp = tempfile::NamedTempFile::new_in(dir)
            .map_err(|e| CliError::Output(format!("cannot write into {}: {e}", dir.display())))?;
        std::io::Write::write_all(&mut tmp, a.contents.as_bytes())?;
        tmp.persist(dir.join(&a.name))
            .map_err(|e| CliError::Output(format!("cannot write {}: {e}", a.name)))?;
    }
    Ok(())
}

/// Resolves, solves, checks and writes the outputs of one run.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let (scenario, cfg) = prepare(cfg)?;
    let outcome = execute(&scenario, cfg.tol)?;
    write_artifacts(&cfg.out, &outcome.artifacts)?;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cone_sample_respects_epsilon() {
        let frame = [0.6, 0.8];
        let cone = cone_sample(&frame, 0.5, 16);
        assert_eq!(cone.len(), 16);
        for e in &cone {
            assert!((e[0] * e[0] + e[1] * e[1] - 1.0).abs() < 1e-12);
            assert!(e[0] * frame[0] + e[1] * frame[1] >= 0.5 - 1e-12);
        }
        assert_eq!(cone_sample(&frame, 0.5, 1), vec![vec![0.6, 0.8]]);
    }

    #[test]
    fn regrid_keeps_box() {
        let g = GridSpec::cube(2, 1.0, 65, (-1.0, 1.0), 129).unwrap();
        let o = Overrides {
            nodes: Some(33),
            dt: Some(0.0625),
            seed: None,
        };
        let r = regrid(&g, &o).unwrap();
        assert_eq!(r.shape(), &[33, 33]);
        assert_eq!(r.slices(), 33);
        assert_eq!(r.lower(), g.lower());
    }
}

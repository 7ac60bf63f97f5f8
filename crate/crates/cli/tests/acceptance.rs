//! Acceptance suite: prints one PASS/FAIL line per criterion and exits
//! nonzero if a criterion fails that is not listed in `KNOWN_FAILURES`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use twophase_cli::runner::{execute, RunOutcome};
use twophase_core::exact::{root_structure, Growth, HProfile, ProfileSpec, SelfSimilarProfile};
use twophase_core::freeboundary::Phase;
use twophase_core::monotonicity::{check_monotone, phi_of_field, EnergyOptions};
use twophase_core::scenarios::{build, BoundarySpec, Overrides, Scenario};
use twophase_core::solver::solve;
use twophase_core::verify::{check_forward_uniqueness, check_nondegeneracy};
use twophase_core::{CoefficientPair, GridSpec, Point, ScalarField, SolveControls};

/// Criteria that fail at desk scale; they are still run and reported.
const KNOWN_FAILURES: &[usize] = &[6];

const EXACT_TOL: f64 = 5e-3;
const REFINEMENT_FACTOR: f64 = 3.0;
const EXACT_BUDGET: Duration = Duration::from_secs(60);
const PHI_CONSTANT: f64 = 0.25;
const PHI_REL_TOL: f64 = 0.05;
const ODE_TOL: f64 = 1e-5;
const ODE_STEP: f64 = 1e-4;
const MODULUS_REL_TOL: f64 = 0.2;
const FORWARD_TOL: f64 = 1e-10;

type Verdict = (bool, String);

fn scenario(name: &str, o: &Overrides, checks: &[&str]) -> Scenario {
    let mut s = build(name, o).unwrap_or_else(|e| panic!("building {name}: {e}"));
    if !checks.is_empty() {
        let names: Vec<String> = checks.iter().map(|c| c.to_string()).collect();
        s.select_checks(&names).unwrap();
    }
    s
}

fn run(s: &Scenario) -> RunOutcome {
    execute(s, None).unwrap_or_else(|e| panic!("running {}: {e}", s.name))
}

fn check_pass(o: &RunOutcome, name: &str) -> bool {
    o.check(name).is_some_and(|c| c.pass)
}

fn detail(o: &RunOutcome, name: &str) -> String {
    o.check(name).map_or_else(|| format!("{name} missing"), |c| c.detail.clone())
}

fn artifact<'a>(o: &'a RunOutcome, name: &str) -> &'a str {
    o.artifacts
        .iter()
        .find(|a| a.name == name)
        .map(|a| a.contents.as_str())
        .unwrap_or_else(|| panic!("artifact {name} missing"))
}

fn exact_reproduction() -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for name in ["h-exact", "wstar-exact", "poly-caloric"] {
        let start = Instant::now();
        let coarse = scenario(name, &Overrides::default(), &["exact-error"]);
        let fine = scenario(
            name,
            &Overrides {
                nodes: Some(2 * coarse.grid.shape()[0] - 1),
                dt: Some(coarse.grid.dt() / 4.0),
                seed: None,
            },
            &["exact-error"],
        );
        let e0 = run(&coarse).check("exact-error").and_then(|c| c.value("max_error")).unwrap();
        let e1 = run(&fine).check("exact-error").and_then(|c| c.value("max_error")).unwrap();
        let elapsed = start.elapsed();
        // exact discrete solutions sit at round-off and show no rate
        let rate_ok = e1 <= e0 / REFINEMENT_FACTOR || e0 <= 1e-8;
        let pass = e0 <= EXACT_TOL && rate_ok && elapsed <= EXACT_BUDGET;
        ok &= pass;
        notes.push(format!("{name} {e0:.1e}->{e1:.1e} in {:.1}s", elapsed.as_secs_f64()));
    }
    (ok, notes.join(", "))
}

fn nondegeneracy(branch: &RunOutcome) -> Verdict {
    let g = GridSpec::cube(2, 1.0, 33, (-1.0, 1.0), 65).unwrap();
    let u = ScalarField::from_fn(g, |_, x| HProfile::along_e1(1.0, 1.0, 2).unwrap().eval_s(x[0])).unwrap();
    let c = CoefficientPair::constant(1.0, 1.0).unwrap();
    let rep = check_nondegeneracy(&u, &c, &Point::origin(2), 0.5, Phase::Positive).unwrap();
    let analytic = rep.lhs == 0.125 && rep.rhs == 0.015625 && rep.pass;
    let solved = check_pass(branch, "nondegeneracy");
    (
        analytic && solved,
        format!("h: lhs {} rhs {}; branch-generic: {}", rep.lhs, rep.rhs, detail(branch, "nondegeneracy")),
    )
}

fn monotonicity_functional() -> Verdict {
    let g = GridSpec::new(vec![-6.0, -6.0], vec![6.0, 6.0], 1.0 / 16.0, (-0.5, 0.0), 1.0 / 64.0).unwrap();
    let w = ScalarField::from_fn(g, |_, x| x[0]).unwrap();
    let radii = [0.125, 1.0 / 6.0, 0.25, 0.5];
    let trace = phi_of_field(&w, &Point::origin(2), &radii, &EnergyOptions::default()).unwrap();
    let constant = trace
        .phi
        .iter()
        .all(|p| (p - PHI_CONSTANT).abs() <= PHI_REL_TOL * PHI_CONSTANT);
    let max = trace.phi.iter().fold(0.0f64, |m, p| m.max(p.abs()));
    let flat = check_monotone(&trace, 1e-3 * max).is_monotone();
    let wide = run(&scenario("branch-generic-wide", &Overrides::default(), &[]));
    let solved = check_pass(&wide, "monotonicity");
    (
        constant && flat && solved,
        format!("phi(x1) = {:?}; branch-generic-wide: {}", trace.phi, detail(&wide, "monotonicity")),
    )
}

fn self_similar_ode() -> Verdict {
    let xis: Vec<f64> = (-30..=30).map(|i| i as f64 * 0.1).collect();
    let mut worst: f64 = 0.0;
    for k in 0..4 {
        let mut c = [0.0; 4];
        c[k] = 1.0;
        let p = SelfSimilarProfile::new(1.0, 1.0, c).unwrap();
        let branch = if k < 2 {
            twophase_core::exact::Branch::Positive
        } else {
            twophase_core::exact::Branch::Negative
        };
        for &xi in &xis {
            let r = p.branch_ode_residual(branch, xi, ODE_STEP).abs();
            worst = worst.max(r);
        }
    }
    let roots = root_structure(1.0, 1.0, (-5.0, 5.0), (-6.0, 6.0), 201).unwrap();
    let growth_ok = [
        ([1.0, 0.0, -1.0, 0.0], Growth::Polynomial),
        ([0.0, 1.0, 0.0, 0.0], Growth::Superpolynomial),
        ([0.0, 0.0, 0.0, 1.0], Growth::Superpolynomial),
        ([0.5, 0.0, 0.5, 0.0], Growth::Polynomial),
    ]
    .iter()
    .all(|(c, g)| SelfSimilarProfile::new(1.0, 1.0, *c).unwrap().classify_growth() == *g);
    (
        worst <= ODE_TOL && roots.nonzero_slope_matches.is_empty() && growth_ok,
        format!(
            "max ODE residual {worst:.1e}, {} roots scanned, {} nonzero-slope matches, growth classes {}",
            roots.roots_found,
            roots.nonzero_slope_matches.len(),
            if growth_ok { "match" } else { "differ" }
        ),
    )
}

fn modulus_table(csv: &str) -> Vec<f64> {
    csv.lines()
        .skip(1)
        .filter_map(|l| l.split(',').nth(1))
        .map(|v| v.parse().unwrap())
        .collect()
}

fn geometry(branch: &RunOutcome) -> Verdict {
    let lipschitz = branch
        .check("graph")
        .and_then(|c| c.value("spatial_lipschitz"))
        .unwrap_or(f64::INFINITY);
    let fine = run(&scenario(
        "branch-generic",
        &Overrides {
            nodes: Some(129),
            ..Overrides::default()
        },
        &["graph"],
    ));
    let a = modulus_table(artifact(branch, "normal_modulus.csv"));
    let b = modulus_table(artifact(&fine, "normal_modulus.csv"));
    let stable = a.len() == b.len()
        && a.iter()
            .zip(&b)
            .all(|(x, y)| (x - y).abs() <= MODULUS_REL_TOL * x.abs().max(y.abs()));
    (
        lipschitz <= 1.0 && check_pass(&fine, "graph") && stable,
        format!("spatial Lipschitz {lipschitz}; modulus {a:?} vs {b:?}"),
    )
}

fn counterexample() -> Verdict {
    let o = run(&scenario("reflected-counterexample", &Overrides::default(), &[]));
    let odd = o.check("oddness").and_then(|c| c.value("max_odd_defect")) == Some(0.0);
    let lipschitz = o
        .check("graph")
        .and_then(|c| c.value("spatial_lipschitz"))
        .unwrap_or(f64::INFINITY);
    let nondecay = check_pass(&o, "temporal-quotient");
    (
        odd && lipschitz <= 1.0 && nondecay,
        format!(
            "oddness {}; spatial Lipschitz {lipschitz}; {}",
            detail(&o, "oddness"),
            detail(&o, "temporal-quotient")
        ),
    )
}

fn forward_uniqueness() -> Verdict {
    let pair = scenario("forward-pair", &Overrides::default(), &[]);
    let o = run(&pair);
    // negative control: independent solves from data that differ on the
    // parabolic boundary
    let controls = SolveControls::default();
    let other = BoundarySpec::Profile(ProfileSpec::H(HProfile::new(1.0, 2.0, vec![1.0, 0.0]).unwrap()));
    let d1 = pair.boundary_data().unwrap();
    let d2 = other.data(&pair.grid, &pair.coefficients).unwrap();
    let (u1, _) = solve(&pair.grid, &pair.coefficients, &d1, &controls).unwrap();
    let (u2, _) = solve(&pair.grid, &pair.coefficients, &d2, &controls).unwrap();
    let control = check_forward_uniqueness(&u1, &u2, FORWARD_TOL).unwrap();
    (
        check_pass(&o, "forward-uniqueness") && !control.pass,
        format!(
            "pair: {}; control: max |u1 - u2| = {:e} (bound {:e})",
            detail(&o, "forward-uniqueness"),
            control.lhs,
            control.rhs
        ),
    )
}

fn determinism(branch: &RunOutcome) -> Verdict {
    let again = run(&branch.scenario);
    let csvs: Vec<&str> = branch
        .artifacts
        .iter()
        .filter(|a| a.name.ends_with(".csv"))
        .map(|a| a.name.as_str())
        .collect();
    let differing: Vec<&str> = csvs
        .iter()
        .copied()
        .filter(|n| artifact(branch, n) != artifact(&again, n))
        .collect();
    (
        differing.is_empty() && !csvs.is_empty(),
        format!("{} CSV artifacts compared, differing: {differing:?}", csvs.len()),
    )
}

type Criterion<'a> = (usize, &'static str, Box<dyn Fn() -> Verdict + 'a>);

fn main() -> ExitCode {
    let branch = run(&scenario("branch-generic", &Overrides::default(), &[]));
    let criteria: Vec<Criterion<'_>> = vec![
        (1, "exact-solution reproduction", Box::new(exact_reproduction)),
        (2, "non-degeneracy", Box::new(|| nondegeneracy(&branch))),
        (3, "monotonicity functional", Box::new(monotonicity_functional)),
        (4, "self-similar ODE", Box::new(self_similar_ode)),
        (
            5,
            "directional monotonicity",
            Box::new(|| (check_pass(&branch, "directional"), detail(&branch, "directional"))),
        ),
        (
            6,
            "closeness and blow-up",
            Box::new(|| (check_pass(&branch, "closeness"), detail(&branch, "closeness"))),
        ),
        (7, "free-boundary geometry", Box::new(|| geometry(&branch))),
        (8, "counter-example", Box::new(counterexample)),
        (9, "forward uniqueness", Box::new(forward_uniqueness)),
        (10, "determinism", Box::new(|| determinism(&branch))),
    ];
    let mut unexpected = 0;
    for (id, name, f) in &criteria {
        let (pass, why) = f();
        let known = KNOWN_FAILURES.contains(id);
        let status = match (pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        if !pass && !known {
            unexpected += 1;
        }
        println!("criterion {id:>2} {name}: {status} | {why}");
    }
    if unexpected > 0 {
        println!("{unexpected} criterion/criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

use proptest::prelude::*;
use twophase_core::exact::{HProfile, Profile, ProfileSpec};
use twophase_core::solver::solve;
use twophase_core::{BoundaryData, CoefficientPair, GridSpec, ScalarField, SolveControls};

fn small_grid() -> GridSpec {
    GridSpec::cube(2, 1.0, 9, (0.0, 0.5), 5).unwrap()
}

fn affine_data(a: f64, b: [f64; 2], c: f64) -> BoundaryData {
    BoundaryData::new(2, move |t, x| a + b[0] * x[0] + b[1] * x[1] + c * t)
}

fn run(grid: &GridSpec, plus: f64, minus: f64, data: &BoundaryData) -> ScalarField {
    let coeffs = CoefficientPair::constant(plus, minus).unwrap();
    solve(grid, &coeffs, data, &SolveControls::default()).unwrap().0
}

#[test]
fn solver_reproduces_h_on_node_aligned_interface() {
    let grid = GridSpec::cube(2, 1.0, 17, (-1.0, 1.0), 17).unwrap();
    let h = HProfile::along_e1(1.0, 2.0, 2).unwrap();
    let exact = h.sample(&grid).unwrap();
    let data = BoundaryData::from_profile(2, ProfileSpec::H(h));
    let u = run(&grid, 1.0, 2.0, &data);
    assert!(u.max_abs_diff(&exact).unwrap() < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn phase_swap_negates_solution(
        plus in 0.5f64..3.0,
        minus in 0.5f64..3.0,
        a in -0.5f64..0.5,
        b0 in -1.0f64..1.0,
        b1 in -1.0f64..1.0,
        c in -1.0f64..1.0,
    ) {
        let grid = small_grid();
        let u = run(&grid, plus, minus, &affine_data(a, [b0, b1], c));
        let v = run(&grid, minus, plus, &affine_data(-a, [-b0, -b1], -c));
        let worst = u.values().iter().zip(v.values()).map(|(p, q)| (p + q).abs()).fold(0.0, f64::max);
        prop_assert!(worst < 1e-7, "worst {worst}");
    }

    #[test]
    fn larger_data_gives_larger_solution(
        plus in 0.5f64..3.0,
        minus in 0.5f64..3.0,
        a in -0.5f64..0.5,
        b0 in -1.0f64..1.0,
        lift in 0.0f64..0.3,
    ) {
        let grid = small_grid();
        let lo = run(&grid, plus, minus, &affine_data(a, [b0, 0.0], 0.0));
        let hi = run(&grid, plus, minus, &affine_data(a + lift, [b0, 0.0], 0.0));
        for (l, h) in lo.values().iter().zip(hi.values()) {
            prop_assert!(h - l > -1e-8, "{h} < {l}");
        }
    }
}

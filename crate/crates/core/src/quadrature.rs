//! One-dimensional quadrature rules.

/// Gauss–Kronrod (7, 15) abscissae on [-1, 1], nonnegative half.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
/// Gauss 7-point weights at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]` to the given
/// relative tolerance. Reversed limits give the negated integral.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let mut stack = vec![(a, b, 0u32)];
    let mut total = 0.0;
    let whole = gk15(&f, a, b).0.abs().max(f64::MIN_POSITIVE);
    while let Some((lo, hi, depth)) = stack.pop() {
        let (val, err) = gk15(&f, lo, hi);
        let share = (hi - lo).abs() / (b - a).abs();
        if err <= rel_tol * whole * share || depth >= 40 {
            total += val;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    total
}

/// Gauss–Legendre nodes and weights on [-1, 1] (Newton on the Legendre
/// recurrence).
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_gaussian_like_integrand() {
        // d/ds (s e^{s^2/4}) = (1 + s^2/2) e^{s^2/4}
        let v = integrate(|s| (1.0 + s * s / 2.0) * (s * s / 4.0).exp(), 0.0, 3.0, 1e-12);
        let exact = 3.0 * (9.0f64 / 4.0).exp();
        assert!((v - exact).abs() < 1e-10 * exact);
        let r = integrate(|s| (1.0 + s * s / 2.0) * (s * s / 4.0).exp(), 3.0, 0.0, 1e-12);
        assert!((r + exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for m in 1..8 {
            let rule = gauss_legendre(m);
            let w: f64 = rule.iter().map(|p| p.1).sum();
            assert!((w - 2.0).abs() < 1e-13);
            let deg = 2 * m - 2;
            let v: f64 = rule.iter().map(|&(x, w)| w * x.powi(deg as i32)).sum();
            assert!((v - 2.0 / (deg as f64 + 1.0)).abs() < 1e-13, "m={m}");
        }
    }
}

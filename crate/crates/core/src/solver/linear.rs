//! Matrix-free conjugate gradients for `diag·I − off·(neighbour sum)`
//! restricted to a set of unknown nodes.

pub(crate) struct StencilOperator<'a> {
    pub unknown: &'a [usize],
    pub is_unknown: &'a [bool],
    pub strides: &'a [usize],
    pub diag: f64,
    pub off: f64,
}

impl StencilOperator<'_> {
    /// `y = A x` on unknown entries. Entries of `x` off the unknown set must be 0.
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for &s in self.unknown {
            let nb: f64 = self
                .strides
                .iter()
                .map(|&st| {
                    let a = if self.is_unknown[s + st] { x[s + st] } else { 0.0 };
                    let b = if self.is_unknown[s - st] { x[s - st] } else { 0.0 };
                    a + b
                })
                .sum();
            y[s] = self.diag * x[s] - self.off * nb;
        }
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.unknown.iter().map(|&s| a[s] * b[s]).sum()
    }
}

pub(crate) struct Workspace {
    r: Vec<f64>,
    p: Vec<f64>,
    q: Vec<f64>,
}

impl Workspace {
    pub fn new(len: usize) -> Self {
        Self {
            r: vec![0.0; len],
            p: vec![0.0; len],
            q: vec![0.0; len],
        }
    }
}

pub(crate) struct CgOutcome {
    pub iterations: usize,
    pub converged: bool,
}

/// Solves `A x = b` on the unknown set, starting from the given `x`.
/// Stops when `‖r‖ ≤ tol·‖b‖`.
pub(crate) fn conjugate_gradient(
    op: &StencilOperator<'_>,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iterations: usize,
    ws: &mut Workspace,
) -> CgOutcome {
    let Workspace { r, p, q } = ws;
    op.apply(x, q);
    for &s in op.unknown {
        r[s] = b[s] - q[s];
        p[s] = r[s];
    }
    let bnorm = op.dot(b, b).sqrt();
    let target = tol * bnorm.max(f64::MIN_POSITIVE);
    let mut rr = op.dot(r, r);
    if rr.sqrt() <= target {
        return CgOutcome {
            iterations: 0,
            converged: true,
        };
    }
    for it in 1..=max_iterations {
        op.apply(p, q);
        let alpha = rr / op.dot(p, q);
        for &s in op.unknown {
            x[s] += alpha * p[s];
            r[s] -= alpha * q[s];
        }
        let rr_new = op.dot(r, r);
        if rr_new.sqrt() <= target {
            return CgOutcome {
                iterations: it,
                converged: true,
            };
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for &s in op.unknown {
            p[s] = r[s] + beta * p[s];
        }
    }
    CgOutcome {
        iterations: max_iterations,
        converged: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_one_dimensional_system() {
        // 1d chain of 7 nodes, boundaries 0 and 6 known (zero)
        let unknown: Vec<usize> = (1..6).collect();
        let mut is_unknown = vec![false; 7];
        for &s in &unknown {
            is_unknown[s] = true;
        }
        let op = StencilOperator {
            unknown: &unknown,
            is_unknown: &is_unknown,
            strides: &[1],
            diag: 3.0,
            off: 1.0,
        };
        let target = [0.0, 1.0, -2.0, 0.5, 4.0, 1.5, 0.0];
        let mut b = vec![0.0; 7];
        op.apply(&target, &mut b);
        let mut x = vec![0.0; 7];
        let out = conjugate_gradient(&op, &b, &mut x, 1e-14, 100, &mut Workspace::new(7));
        assert!(out.converged);
        for s in 1..6 {
            assert!((x[s] - target[s]).abs() < 1e-12);
        }
    }
}

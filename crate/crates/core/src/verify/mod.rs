//! Quantitative estimates evaluated on exact or solved fields, plus
//! parabolic blow-ups.

mod blowup;
mod closeness;
mod estimates;

pub use self::blowup::{blowup, blowup_time_derivative_decay, DecayReport};
pub use self::closeness::{
    best_closeness_to_h, check_directional_monotonicity, check_tempo_spatial_monotonicity, closeness_to_h, closeness_to_shifted_h, best_closeness_to_shifted_h, refine_profile_shift,
    monotone_along_rays, search_directions, Closeness, MonotonicityOptions,
};
pub use self::estimates::{
    check_forward_uniqueness, check_nondegeneracy, check_sign_persistence,
    sup_mean_time_derivative,
};

use std::fmt::Write as _;

use crate::geometry::{Cylinder, GridSpec, Point};

/// Direction of the inequality `lhs ≥ slack·rhs` or `lhs ≤ slack·rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    AtLeast,
    AtMost,
}

/// Outcome of a hypothesis gate.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub value: f64,
    pub threshold: f64,
    pub satisfied: bool,
}

impl Gate {
    pub fn new(value: f64, threshold: f64) -> Self {
        Self {
            value,
            threshold,
            satisfied: value <= threshold,
        }
    }
}

/// One evaluated inequality. `margin` is `lhs − slack·rhs` for
/// [`Relation::AtLeast`] and `slack·rhs − lhs` for [`Relation::AtMost`];
/// the check passes iff `margin ≥ −tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub estimate: String,
    pub base: Point,
    pub r: f64,
    pub relation: Relation,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tol: f64,
    pub margin: f64,
    pub pass: bool,
    /// Hypothesis gate; `None` when the estimate has no gate.
    pub gate: Option<Gate>,
    /// Named diagnostics (fitted ratios, minimising directions, ...).
    pub extras: Vec<(String, f64)>,
}

impl EstimateReport {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        estimate: &str,
        base: Point,
        r: f64,
        relation: Relation,
        lhs: f64,
        rhs: f64,
        slack: f64,
        tol: f64,
    ) -> Self {
        let margin = match relation {
            Relation::AtLeast => lhs - slack * rhs,
            Relation::AtMost => slack * rhs - lhs,
        };
        Self {
            estimate: estimate.to_string(),
            base,
            r,
            relation,
            lhs,
            rhs,
            slack,
            tol,
            margin,
            pass: margin >= -tol,
            gate: None,
            extras: Vec::new(),
        }
    }

    pub fn with_gate(mut self, gate: Gate) -> Self {
        self.gate = Some(gate);
        self
    }

    pub fn with_extra(mut self, name: &str, value: f64) -> Self {
        self.extras.push((name.to_string(), value));
        self
    }

    pub fn extra(&self, name: &str) -> Option<f64> {
        self.extras.iter().find(|(k, _)| k == name).map(|e| e.1)
    }

    /// Whether the hypothesis gate (if any) holds.
    pub fn hypothesis_satisfied(&self) -> bool {
        self.gate.as_ref().is_none_or(|g| g.satisfied)
    }

    /// `estimate,base_t,base_x1..base_xn,r,lhs,rhs,margin,pass`.
    pub fn csv_header(n: usize) -> String {
        let mut out = String::from("estimate,base_t");
        for a in 1..=n {
            let _ = write!(out, ",base_x{a}");
        }
        out.push_str(",r,lhs,rhs,margin,pass");
        out
    }

    pub fn csv_row(&self) -> String {
        let mut out = format!("{},{}", self.estimate, self.base.t);
        for v in &self.base.x {
            let _ = write!(out, ",{v}");
        }
        let _ = write!(
            out,
            ",{},{},{},{},{}",
            self.r, self.lhs, self.rhs, self.margin, self.pass
        );
        out
    }

    /// One human-readable line.
    pub fn summary(&self) -> String {
        let rel = match self.relation {
            Relation::AtLeast => ">=",
            Relation::AtMost => "<=",
        };
        let mut out = format!(
            "{} at t={} x={:?} r={}: {} {} {}*{} margin={} {}",
            self.estimate,
            self.base.t,
            self.base.x,
            self.r,
            self.lhs,
            rel,
            self.slack,
            self.rhs,
            self.margin,
            if self.pass { "PASS" } else { "FAIL" }
        );
        if let Some(g) = &self.gate {
            let _ = write!(
                out,
                " gate={}/{}{}",
                g.value,
                g.threshold,
                if g.satisfied { "" } else { " (hypothesis not satisfied)" }
            );
        }
        for (k, v) in &self.extras {
            let _ = write!(out, " {k}={v}");
        }
        out
    }
}

/// Grid nodes `(k, s)` in the closure of the cylinder.
pub(crate) fn cylinder_nodes(grid: &GridSpec, cyl: &Cylinder) -> Vec<(usize, usize)> {
    let (lo, hi) = cyl.time_span();
    let space = grid.space_nodes_in_box(&cyl.center.x, cyl.radius);
    let mut out = Vec::new();
    let mut x = vec![0.0; grid.dim()];
    for k in grid.time_range(lo - 1e-12, hi + 1e-12) {
        let t = grid.time(k);
        for &s in &space {
            grid.space_coords_into(s, &mut x);
            if cyl.contains_closed_tx(t, &x) {
                out.push((k, s));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margin_conventions() {
        let r = EstimateReport::new("x", Point::origin(1), 1.0, Relation::AtLeast, 0.125, 0.015625, 0.5, 0.0);
        assert_eq!(r.margin, 0.125 - 0.5 * 0.015625);
        assert!(r.pass);
        let r = EstimateReport::new("x", Point::origin(1), 1.0, Relation::AtMost, 2.0, 1.0, 1.0, 0.5);
        assert_eq!(r.margin, -1.0);
        assert!(!r.pass);
        let r = EstimateReport::new("x", Point::origin(1), 1.0, Relation::AtMost, 1.4, 1.0, 1.0, 0.5);
        assert!(r.pass);
    }

    #[test]
    fn csv_layout() {
        let r = EstimateReport::new("nd", Point::new(0.5, [1.0, 2.0]), 0.25, Relation::AtLeast, 1.0, 0.5, 1.0, 0.0);
        assert_eq!(EstimateReport::csv_header(2), "estimate,base_t,base_x1,base_x2,r,lhs,rhs,margin,pass");
        assert_eq!(r.csv_row(), "nd,0.5,1,2,0.25,1,0.5,0.5,true");
        let g = r.clone().with_gate(Gate::new(2.0, 1.0));
        assert!(!g.hypothesis_satisfied());
        assert!(g.summary().contains("hypothesis not satisfied"));
    }

    #[test]
    fn cylinder_nodes_use_closure() {
        let g = GridSpec::cube(1, 1.0, 5, (-1.0, 1.0), 9).unwrap();
        let c = Cylinder::negative(Point::origin(1), 0.5).unwrap();
        let nodes = cylinder_nodes(&g, &c);
        // t ∈ {-0.25, 0}, x ∈ {-0.5, 0, 0.5}
        assert_eq!(nodes.len(), 6);
    }
}

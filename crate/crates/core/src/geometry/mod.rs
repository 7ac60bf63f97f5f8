//! Space-time points, parabolic cylinders and the parabolic distance.
//!
//! Cylinders are continuous objects: membership is decided against the
//! defining inequalities, never by snapping to grid nodes.

mod csv;
mod grid;

pub use self::csv::{read_field_csv, write_field_csv};
pub use self::grid::{Diff, GridSpec, ScalarField};

use crate::error::{Error, Result};

/// Absolute slack used when deciding equality on cylinder boundaries.
const BOUNDARY_TOL: f64 = 1e-12;

/// A point `(t, x)` of space-time.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub t: f64,
    pub x: Vec<f64>,
}

impl Point {
    pub fn new(t: f64, x: impl Into<Vec<f64>>) -> Self {
        Self { t, x: x.into() }
    }

    pub fn origin(n: usize) -> Self {
        Self { t: 0.0, x: vec![0.0; n] }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// `sqrt(|x_a - x_b|^2 + |t_a - t_b|)`.
pub fn pardist(a: &Point, b: &Point) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(pardist_unchecked(a.t, &a.x, b.t, &b.x))
}

#[inline]
pub(crate) fn pardist_unchecked(ta: f64, xa: &[f64], tb: f64, xb: &[f64]) -> f64 {
    let sq: f64 = xa.iter().zip(xb).map(|(p, q)| (p - q) * (p - q)).sum();
    (sq + (ta - tb).abs()).sqrt()
}

/// Infimum of the parabolic distance from `a` to a finite set.
///
/// An empty set yields `f64::INFINITY`, so that a missing phase is
/// representable without an error path.
pub fn pardist_to_set<'a, I>(a: &Point, set: I) -> Result<f64>
where
    I: IntoIterator<Item = &'a Point>,
{
    let mut best = f64::INFINITY;
    for s in set {
        best = best.min(pardist(a, s)?);
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CylinderVariant {
    Full,
    Negative,
    Positive,
}

/// The parabolic cylinder `Q_r(t0, x0)` or one of its halves.
#[derive(Debug, Clone, PartialEq)]
pub struct Cylinder {
    pub center: Point,
    pub radius: f64,
    pub variant: CylinderVariant,
}

impl Cylinder {
    pub fn new(center: Point, radius: f64, variant: CylinderVariant) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Malformed(format!("cylinder radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius, variant })
    }

    pub fn full(center: Point, radius: f64) -> Result<Self> {
        Self::new(center, radius, CylinderVariant::Full)
    }

    pub fn negative(center: Point, radius: f64) -> Result<Self> {
        Self::new(center, radius, CylinderVariant::Negative)
    }

    pub fn positive(center: Point, radius: f64) -> Result<Self> {
        Self::new(center, radius, CylinderVariant::Positive)
    }

    /// Time interval `(lo, hi)` of the variant.
    pub fn time_span(&self) -> (f64, f64) {
        let t0 = self.center.t;
        let r2 = self.radius * self.radius;
        match self.variant {
            CylinderVariant::Full => (t0 - r2, t0 + r2),
            CylinderVariant::Negative => (t0 - r2, t0),
            CylinderVariant::Positive => (t0, t0 + r2),
        }
    }

    fn spatial_dist(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.center.dim(), "cylinder and point dimensions differ");
        x.iter()
            .zip(&self.center.x)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Open-set membership.
    ///
    /// # Panics
    ///
    /// Panics if the point dimension differs from the cylinder's.
    pub fn contains(&self, p: &Point) -> bool {
        self.contains_tx(p.t, &p.x)
    }

    pub fn contains_tx(&self, t: f64, x: &[f64]) -> bool {
        let (lo, hi) = self.time_span();
        t > lo && t < hi && self.spatial_dist(x) < self.radius
    }

    /// Membership in the closure; used when taking suprema of continuous
    /// functions over grid nodes.
    pub fn contains_closed_tx(&self, t: f64, x: &[f64]) -> bool {
        let (lo, hi) = self.time_span();
        t >= lo - BOUNDARY_TOL
            && t <= hi + BOUNDARY_TOL
            && self.spatial_dist(x) <= self.radius + BOUNDARY_TOL
    }

    /// Lateral shell `[t0 - r^2, t0 + r^2) x dB_r` plus bottom disk
    /// `{t0 - r^2} x B_r`; the bottom corner belongs to the boundary.
    /// Defined with respect to the full cylinder regardless of variant.
    pub fn on_parabolic_boundary(&self, p: &Point) -> bool {
        let t0 = self.center.t;
        let r2 = self.radius * self.radius;
        let bottom = t0 - r2;
        let d = self.spatial_dist(&p.x);
        let on_bottom = (p.t - bottom).abs() <= BOUNDARY_TOL && d <= self.radius + BOUNDARY_TOL;
        let on_lateral = p.t >= bottom - BOUNDARY_TOL
            && p.t < t0 + r2
            && (d - self.radius).abs() <= BOUNDARY_TOL;
        on_bottom || on_lateral
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pardist_examples() {
        let o = Point::origin(2);
        assert_eq!(pardist(&o, &o).unwrap(), 0.0);
        assert_eq!(pardist(&Point::new(1.0, [0.0, 0.0]), &o).unwrap(), 1.0);
        assert_eq!(pardist(&Point::new(0.0, [3.0, 4.0]), &o).unwrap(), 5.0);
        assert!(matches!(
            pardist(&Point::origin(1), &o),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn pardist_to_set_examples() {
        let a = Point::origin(2);
        assert_eq!(pardist_to_set(&a, [&a]).unwrap(), 0.0);
        let e1 = Point::new(0.0, [1.0, 0.0]);
        assert_eq!(pardist_to_set(&a, [&e1]).unwrap(), 1.0);
        let empty: Vec<Point> = Vec::new();
        assert_eq!(pardist_to_set(&a, &empty).unwrap(), f64::INFINITY);
    }

    #[test]
    fn cylinder_membership_examples() {
        let q = Cylinder::full(Point::origin(2), 1.0).unwrap();
        let o = Point::origin(2);
        assert!(q.contains(&o));
        assert!(!q.on_parabolic_boundary(&o));
        assert!(q.on_parabolic_boundary(&Point::new(-1.0, [0.0, 0.0])));
        assert!(q.on_parabolic_boundary(&Point::new(0.0, [1.0, 0.0])));
        // bottom corner
        assert!(q.on_parabolic_boundary(&Point::new(-1.0, [1.0, 0.0])));
        // top lid is not data
        assert!(!q.on_parabolic_boundary(&Point::new(1.0, [0.0, 0.0])));
        assert!(Cylinder::full(o, 0.0).is_err());
    }

    fn arb_point() -> impl Strategy<Value = Point> {
        (-3.0..3.0f64, prop::collection::vec(-3.0..3.0f64, 2)).prop_map(|(t, x)| Point::new(t, x))
    }

    proptest! {
        #[test]
        fn pardist_is_a_metric(a in arb_point(), b in arb_point(), c in arb_point()) {
            let ab = pardist(&a, &b).unwrap();
            let ba = pardist(&b, &a).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert_eq!(pardist(&a, &a).unwrap(), 0.0);
            let ac = pardist(&a, &c).unwrap();
            let cb = pardist(&c, &b).unwrap();
            prop_assert!(ab <= ac + cb + 1e-12);
        }

        #[test]
        fn full_cylinder_splits_into_halves(p in arb_point(), r in 0.1..2.0f64) {
            let c = Point::new(0.3, [0.1, -0.2]);
            let full = Cylinder::full(c.clone(), r).unwrap();
            let neg = Cylinder::negative(c.clone(), r).unwrap();
            let pos = Cylinder::positive(c.clone(), r).unwrap();
            for q in [p.clone(), Point::new(c.t, p.x.clone())] {
                let slice = q.t == c.t && full.spatial_dist(&q.x) < r;
                prop_assert_eq!(full.contains(&q), neg.contains(&q) || pos.contains(&q) || slice);
            }
        }
    }
}

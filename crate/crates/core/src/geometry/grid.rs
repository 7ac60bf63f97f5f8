use crate::error::{Error, Result};
use crate::geometry::Point;

/// Relative tolerance for "extent is an integer multiple of the step".
const TILE_TOL: f64 = 1e-9;

/// A uniform tensor-product space-time grid.
///
/// Space nodes are ordered row-major (last axis fastest); time is the
/// slowest index of a [`ScalarField`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    lower: Vec<f64>,
    upper: Vec<f64>,
    h: f64,
    t_start: f64,
    t_end: f64,
    dt: f64,
    shape: Vec<usize>,
    slices: usize,
}

fn tile_count(len: f64, step: f64, what: &str) -> Result<usize> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Malformed(format!("{what} step must be positive, got {step}")));
    }
    if !(len >= 0.0 && len.is_finite()) {
        return Err(Error::Malformed(format!("{what} extent must be a finite non-empty interval")));
    }
    let cells = len / step;
    let rounded = cells.round();
    if (cells - rounded).abs() > TILE_TOL * rounded.max(1.0) {
        return Err(Error::Malformed(format!(
            "{what} extent {len} is not an integer multiple of step {step}"
        )));
    }
    Ok(rounded as usize + 1)
}

impl GridSpec {
    pub fn new(
        lower: Vec<f64>,
        upper: Vec<f64>,
        h: f64,
        (t_start, t_end): (f64, f64),
        dt: f64,
    ) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::Malformed("grid needs at least one spatial axis".into()));
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        let shape = lower
            .iter()
            .zip(&upper)
            .map(|(lo, hi)| tile_count(hi - lo, h, "spatial"))
            .collect::<Result<Vec<_>>>()?;
        let slices = tile_count(t_end - t_start, dt, "time")?;
        Ok(Self {
            lower,
            upper,
            h,
            t_start,
            t_end,
            dt,
            shape,
            slices,
        })
    }

    /// `[-half_width, half_width]^n` with `nodes` nodes per axis and
    /// `slices` time levels on `t_range`.
    pub fn cube(
        n: usize,
        half_width: f64,
        nodes: usize,
        t_range: (f64, f64),
        slices: usize,
    ) -> Result<Self> {
        if nodes < 2 || slices < 2 {
            return Err(Error::GridTooSmall(format!(
                "need at least 2 nodes per axis and 2 slices, got {nodes} and {slices}"
            )));
        }
        let h = 2.0 * half_width / (nodes - 1) as f64;
        let dt = (t_range.1 - t_range.0) / (slices - 1) as f64;
        Self::new(vec![-half_width; n], vec![half_width; n], h, t_range, dt)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn lower(&self) -> &[f64] {
        &self.lower
    }
    pub fn upper(&self) -> &[f64] {
        &self.upper
    }
    pub fn t_start(&self) -> f64 {
        self.t_start
    }
    pub fn t_end(&self) -> f64 {
        self.t_end
    }
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }
    pub fn slices(&self) -> usize {
        self.slices
    }
    pub fn space_len(&self) -> usize {
        self.shape.iter().product()
    }
    pub fn len(&self) -> usize {
        self.space_len() * self.slices
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t_start + k as f64 * self.dt
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.lower[axis] + i as f64 * self.h
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.shape[axis + 1..].iter().product()
    }

    pub fn unravel(&self, mut s: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for axis in (0..self.dim()).rev() {
            idx[axis] = s % self.shape[axis];
            s /= self.shape[axis];
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.shape).fold(0, |acc, (i, n)| acc * n + i)
    }

    pub fn space_coords(&self, s: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        self.space_coords_into(s, &mut x);
        x
    }

    pub fn space_coords_into(&self, mut s: usize, x: &mut [f64]) {
        for axis in (0..self.dim()).rev() {
            let i = s % self.shape[axis];
            s /= self.shape[axis];
            x[axis] = self.coord(axis, i);
        }
    }

    pub fn point(&self, k: usize, s: usize) -> Point {
        Point::new(self.time(k), self.space_coords(s))
    }

    /// Whether a space node lies on a face of the box.
    pub fn is_spatial_boundary(&self, s: usize) -> bool {
        self.unravel(s)
            .iter()
            .zip(&self.shape)
            .any(|(&i, &n)| i == 0 || i + 1 == n)
    }

    /// Whether the box `[t_lo, t_hi] x prod [c_i - radius, c_i + radius]`
    /// fits inside the grid (with a tiny slack).
    pub fn covers(&self, t_lo: f64, t_hi: f64, center: &[f64], radius: f64) -> bool {
        let slack = 1e-12 * (1.0 + self.h);
        let tslack = 1e-12 * (1.0 + self.dt);
        t_lo >= self.t_start - tslack
            && t_hi <= self.t_end + tslack
            && center.iter().enumerate().all(|(a, &c)| {
                c - radius >= self.lower[a] - slack && c + radius <= self.upper[a] + slack
            })
    }

    /// Index range of nodes along `axis` whose coordinate lies in `[lo, hi]`.
    pub fn axis_range(&self, axis: usize, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let eps = 1e-9;
        let a = ((lo - self.lower[axis]) / self.h - eps).ceil().max(0.0) as usize;
        let b = ((hi - self.lower[axis]) / self.h + eps).floor();
        if b < 0.0 {
            return 0..0;
        }
        let b = (b as usize).min(self.shape[axis] - 1);
        if a > b {
            0..0
        } else {
            a..b + 1
        }
    }

    pub fn time_range(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let eps = 1e-9;
        let a = ((lo - self.t_start) / self.dt - eps).ceil().max(0.0) as usize;
        let b = ((hi - self.t_start) / self.dt + eps).floor();
        if b < 0.0 {
            return 0..0;
        }
        let b = (b as usize).min(self.slices - 1);
        if a > b {
            0..0
        } else {
            a..b + 1
        }
    }

    /// All space nodes inside the axis-aligned box around `center`.
    pub fn space_nodes_in_box(&self, center: &[f64], radius: f64) -> Vec<usize> {
        let ranges: Vec<_> = (0..self.dim())
            .map(|a| self.axis_range(a, center[a] - radius, center[a] + radius))
            .collect();
        if ranges.iter().any(|r| r.is_empty()) {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut idx: Vec<usize> = ranges.iter().map(|r| r.start).collect();
        loop {
            out.push(self.ravel(&idx));
            let mut axis = self.dim();
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                idx[axis] += 1;
                if idx[axis] < ranges[axis].end {
                    break;
                }
                idx[axis] = ranges[axis].start;
            }
        }
    }
}

/// A finite-difference value together with whether a one-sided stencil
/// had to be used.
#[derive(Debug, Clone, PartialEq)]
pub struct Diff<T> {
    pub value: T,
    pub one_sided: bool,
}

/// Samples of a function of `(t, x)` on every node of a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Malformed(format!(
                "field has {} values but grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Malformed(format!("non-finite value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let values = vec![0.0; grid.len()];
        Self { grid, values }
    }

    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(f64, &[f64]) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        let mut x = vec![0.0; grid.dim()];
        for k in 0..grid.slices() {
            let t = grid.time(k);
            for s in 0..grid.space_len() {
                grid.space_coords_into(s, &mut x);
                values.push(f(t, &x));
            }
        }
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn index(&self, k: usize, s: usize) -> usize {
        k * self.grid.space_len() + s
    }

    #[inline]
    pub fn value(&self, k: usize, s: usize) -> f64 {
        self.values[self.index(k, s)]
    }

    pub fn slice(&self, k: usize) -> &[f64] {
        let m = self.grid.space_len();
        &self.values[k * m..(k + 1) * m]
    }

    pub(crate) fn slice_mut(&mut self, k: usize) -> &mut [f64] {
        let m = self.grid.space_len();
        &mut self.values[k * m..(k + 1) * m]
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::Malformed("fields live on different grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    fn check_axes(&self, need: usize) -> Result<()> {
        if let Some(n) = self.grid.shape().iter().find(|&&n| n < need) {
            return Err(Error::GridTooSmall(format!(
                "stencil needs {need} nodes per axis, grid has {n}"
            )));
        }
        Ok(())
    }

    /// First derivative along `axis`: central in the interior, first-order
    /// one-sided (flagged) on faces.
    pub fn partial(&self, k: usize, s: usize, axis: usize) -> Result<Diff<f64>> {
        self.check_axes(2)?;
        Ok(self.partial_unchecked(k, s, axis))
    }

    pub(crate) fn partial_unchecked(&self, k: usize, s: usize, axis: usize) -> Diff<f64> {
        let n = self.grid.shape[axis];
        let stride = self.grid.stride(axis);
        let i = (s / stride) % n;
        let h = self.grid.h;
        let base = self.index(k, s);
        if i == 0 {
            Diff {
                value: (self.values[base + stride] - self.values[base]) / h,
                one_sided: true,
            }
        } else if i + 1 == n {
            Diff {
                value: (self.values[base] - self.values[base - stride]) / h,
                one_sided: true,
            }
        } else {
            Diff {
                value: (self.values[base + stride] - self.values[base - stride]) / (2.0 * h),
                one_sided: false,
            }
        }
    }

    pub fn gradient(&self, k: usize, s: usize) -> Result<Diff<Vec<f64>>> {
        self.check_axes(3)?;
        let mut one_sided = false;
        let value = (0..self.grid.dim())
            .map(|a| {
                let d = self.partial_unchecked(k, s, a);
                one_sided |= d.one_sided;
                d.value
            })
            .collect();
        Ok(Diff { value, one_sided })
    }

    /// Backward difference in time; forward (flagged) on the first slice.
    pub fn time_derivative(&self, k: usize, s: usize) -> Result<Diff<f64>> {
        if self.grid.slices < 2 {
            return Err(Error::GridTooSmall("time derivative needs two slices".into()));
        }
        Ok(self.time_derivative_unchecked(k, s))
    }

    pub(crate) fn time_derivative_unchecked(&self, k: usize, s: usize) -> Diff<f64> {
        let dt = self.grid.dt;
        if k == 0 {
            Diff {
                value: (self.value(1, s) - self.value(0, s)) / dt,
                one_sided: true,
            }
        } else {
            Diff {
                value: (self.value(k, s) - self.value(k - 1, s)) / dt,
                one_sided: false,
            }
        }
    }

    /// Sum of per-axis second differences; faces use a shifted stencil.
    pub fn laplacian(&self, k: usize, s: usize) -> Result<Diff<f64>> {
        self.check_axes(3)?;
        Ok(self.laplacian_unchecked(k, s))
    }

    pub(crate) fn laplacian_unchecked(&self, k: usize, s: usize) -> Diff<f64> {
        let h2 = self.grid.h * self.grid.h;
        let base = self.index(k, s);
        let mut one_sided = false;
        let mut sum = 0.0;
        for axis in 0..self.grid.dim() {
            let n = self.grid.shape[axis];
            let stride = self.grid.stride(axis);
            let i = (s / stride) % n;
            let c = if i == 0 {
                one_sided = true;
                base + stride
            } else if i + 1 == n {
                one_sided = true;
                base - stride
            } else {
                base
            };
            sum += (self.values[c + stride] - 2.0 * self.values[c] + self.values[c - stride]) / h2;
        }
        Diff {
            value: sum,
            one_sided,
        }
    }

    /// Multilinear interpolation in `(t, x)`; `None` outside the grid.
    pub fn interpolate(&self, t: f64, x: &[f64]) -> Option<f64> {
        let g = &self.grid;
        let eps = 1e-9;
        let locate = |v: f64, lo: f64, step: f64, n: usize| -> Option<(usize, f64)> {
            let u = (v - lo) / step;
            if u < -eps || u > (n - 1) as f64 + eps {
                return None;
            }
            let u = u.clamp(0.0, (n - 1) as f64);
            let i = (u.floor() as usize).min(n.saturating_sub(2));
            Some((i, u - i as f64))
        };
        let (k, ft) = locate(t, g.t_start, g.dt, g.slices)?;
        let mut cell = Vec::with_capacity(g.dim());
        for a in 0..g.dim() {
            cell.push(locate(x[a], g.lower[a], g.h, g.shape[a])?);
        }
        let n = g.dim();
        let mut acc = 0.0;
        for corner in 0..(1usize << (n + 1)) {
            let mut w = 1.0;
            let dk = corner & 1;
            w *= if dk == 1 { ft } else { 1.0 - ft };
            if w == 0.0 {
                continue;
            }
            let mut s = 0;
            for a in 0..n {
                let bit = (corner >> (a + 1)) & 1;
                let (i, f) = cell[a];
                w *= if bit == 1 { f } else { 1.0 - f };
                s = s * g.shape[a] + (i + bit).min(g.shape[a] - 1);
            }
            if w != 0.0 {
                acc += w * self.value((k + dk).min(g.slices - 1), s);
            }
        }
        Some(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec::cube(2, 1.0, 9, (-1.0, 1.0), 5).unwrap()
    }

    #[test]
    fn tiling_is_validated() {
        assert!(GridSpec::new(vec![0.0], vec![1.0], 0.3, (0.0, 1.0), 0.5).is_err());
        let g = GridSpec::new(vec![0.0], vec![1.0], 0.25, (0.0, 1.0), 0.5).unwrap();
        assert_eq!(g.shape(), &[5]);
        assert_eq!(g.slices(), 3);
    }

    #[test]
    fn ravel_round_trips() {
        let g = grid();
        for s in 0..g.space_len() {
            assert_eq!(g.ravel(&g.unravel(s)), s);
        }
        assert_eq!(g.space_coords(1), vec![-1.0, -0.75]);
    }

    #[test]
    fn linear_field_gradient_is_exact() {
        let u = ScalarField::from_fn(grid(), |_, x| x[0]).unwrap();
        let s = u.grid().ravel(&[4, 4]);
        let d = u.gradient(2, s).unwrap();
        assert!(!d.one_sided);
        assert_eq!(d.value, vec![1.0, 0.0]);
    }

    #[test]
    fn time_derivative_of_t_is_one() {
        let u = ScalarField::from_fn(grid(), |t, _| t).unwrap();
        for k in 0..5 {
            let d = u.time_derivative(k, 13).unwrap();
            assert!((d.value - 1.0).abs() < 1e-14);
            assert_eq!(d.one_sided, k == 0);
        }
    }

    #[test]
    fn laplacian_of_square_norm_is_2n() {
        let u = ScalarField::from_fn(grid(), |_, x| x.iter().map(|v| v * v).sum()).unwrap();
        let s = u.grid().ravel(&[3, 5]);
        assert!((u.laplacian(1, s).unwrap().value - 4.0).abs() < 1e-12);
        let edge = u.laplacian(1, 0).unwrap();
        assert!(edge.one_sided);
    }

    #[test]
    fn stencil_needs_three_nodes() {
        let g = GridSpec::cube(1, 1.0, 2, (0.0, 1.0), 2).unwrap();
        let u = ScalarField::zeros(g);
        assert!(matches!(u.laplacian(0, 0), Err(Error::GridTooSmall(_))));
    }

    #[test]
    fn rejects_non_finite() {
        let g = GridSpec::cube(1, 1.0, 3, (0.0, 1.0), 2).unwrap();
        assert!(ScalarField::new(g, vec![0.0, 1.0, f64::NAN, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn interpolation_is_exact_for_multilinear() {
        let u = ScalarField::from_fn(grid(), |t, x| 1.0 + 2.0 * t + x[0] - 3.0 * x[1] + t * x[0]).unwrap();
        let v = u.interpolate(0.1, &[0.33, -0.41]).unwrap();
        let exact = 1.0 + 0.2 + 0.33 + 1.23 + 0.033;
        assert!((v - exact).abs() < 1e-12);
        assert!(u.interpolate(0.0, &[1.2, 0.0]).is_none());
    }

    #[test]
    fn box_node_listing() {
        let g = grid();
        let nodes = g.space_nodes_in_box(&[0.0, 0.0], 0.25);
        assert_eq!(nodes.len(), 9);
    }
}

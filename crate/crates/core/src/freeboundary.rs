//! Free-boundary extraction, branch-point detection, graph fitting in a
//! given direction, Lipschitz and normal-continuity measurements, and the
//! odd reflection of one-phase solutions.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{pardist_unchecked, Cylinder, GridSpec, Point, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Positive,
    Negative,
}

impl Phase {
    fn sign(self) -> f64 {
        match self {
            Phase::Positive => 1.0,
            Phase::Negative => -1.0,
        }
    }
}

/// Crossing points of a phase boundary, sorted lexicographically in `(t, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub dim: usize,
    /// Spatial step of the grid the cloud was extracted from.
    pub h: f64,
    pub points: Vec<Point>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `t,x1,...,xn` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for a in 1..=self.dim {
            let _ = write!(out, ",x{a}");
        }
        out.push('\n');
        for p in &self.points {
            let _ = write!(out, "{}", p.t);
            for v in &p.x {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    /// Smallest parabolic distance from `(t, x)` to the cloud, considering
    /// only points with `|Δt| ≤ max_dist²`; `INFINITY` if there are none.
    pub fn pardist_within(&self, t: f64, x: &[f64], max_dist: f64) -> f64 {
        let lo = self.points.partition_point(|p| p.t < t - max_dist * max_dist - 1e-12);
        let mut best = f64::INFINITY;
        for p in &self.points[lo..] {
            if p.t > t + max_dist * max_dist + 1e-12 {
                break;
            }
            best = best.min(pardist_unchecked(t, x, p.t, &p.x));
        }
        best
    }
}

fn lex_cmp(a: &Point, b: &Point) -> std::cmp::Ordering {
    a.t.total_cmp(&b.t).then_with(|| {
        a.x.iter()
            .zip(&b.x)
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    })
}

/// Linear-interpolation crossings of `∂{±u > 0}` along spatial grid lines.
/// An empty phase gives an empty cloud.
pub fn extract_free_boundary(u: &ScalarField, phase: Phase) -> PointCloud {
    let g = u.grid();
    let n = g.dim();
    let sign = phase.sign();
    let h = g.h();
    let mut points = Vec::new();
    for k in 0..g.slices() {
        let t = g.time(k);
        let mut slice_points: Vec<Point> = Vec::new();
        for s in 0..g.space_len() {
            let idx = g.unravel(s);
            let a = sign * u.value(k, s);
            for axis in 0..n {
                if idx[axis] + 1 >= g.shape()[axis] {
                    continue;
                }
                let b = sign * u.value(k, s + g.stride(axis));
                if (a > 0.0) == (b > 0.0) {
                    continue;
                }
                let theta = a / (a - b);
                let mut x = g.space_coords(s);
                x[axis] += theta * h;
                slice_points.push(Point::new(t, x));
            }
        }
        slice_points.sort_by(lex_cmp);
        let mut kept: Vec<Point> = Vec::with_capacity(slice_points.len());
        for p in slice_points {
            // kept is sorted by x1; only the tail can be within h/2
            let dup = kept
                .iter()
                .rev()
                .take_while(|q| p.x[0] - q.x[0] <= 0.5 * h)
                .any(|q| p.x.iter().zip(&q.x).all(|(a, b)| (a - b).abs() <= 0.5 * h));
            if !dup {
                kept.push(p);
            }
        }
        points.extend(kept);
    }
    PointCloud { dim: n, h, points }
}

/// Brute-force Hausdorff distance in the parabolic metric.
pub fn hausdorff(a: &PointCloud, b: &PointCloud) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let one_sided = |p: &PointCloud, q: &PointCloud| {
        p.points
            .iter()
            .map(|x| {
                q.points
                    .iter()
                    .map(|y| pardist_unchecked(x.t, &x.x, y.t, &y.x))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    one_sided(a, b).max(one_sided(b, a))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchPoint {
    pub point: Point,
    pub grad_norm: f64,
    pub dist_positive: f64,
    pub dist_negative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchPointReport {
    pub sigma: f64,
    pub points: Vec<BranchPoint>,
}

/// Grid nodes in `window` with `|u| ≤ deadband`, `|∇u| ≤ σ` and parabolic
/// distance at most `σ` to both phase boundaries.
pub fn detect_branch_points(
    u: &ScalarField,
    sigma: f64,
    window: &Cylinder,
    deadband: f64,
) -> Result<BranchPointReport> {
    if !(sigma >= 0.0) {
        return Err(Error::Domain(format!("sigma must be nonnegative, got {sigma}")));
    }
    let g = u.grid();
    if window.center.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            found: window.center.dim(),
        });
    }
    let (lo, hi) = window.time_span();
    if !g.covers(lo, hi, &window.center.x, window.radius) {
        return Err(Error::Window(format!(
            "window around {:?} with radius {} leaves the grid",
            window.center, window.radius
        )));
    }
    let pos = extract_free_boundary(u, Phase::Positive);
    let neg = extract_free_boundary(u, Phase::Negative);
    let mut points = Vec::new();
    for k in g.time_range(lo, hi) {
        let t = g.time(k);
        for s in g.space_nodes_in_box(&window.center.x, window.radius) {
            let x = g.space_coords(s);
            if !window.contains_closed_tx(t, &x) || u.value(k, s).abs() > deadband {
                continue;
            }
            let grad_norm = u.gradient(k, s)?.value.iter().map(|c| c * c).sum::<f64>().sqrt();
            if grad_norm > sigma {
                continue;
            }
            let dp = pos.pardist_within(t, &x, sigma);
            let dn = neg.pardist_within(t, &x, sigma);
            if dp <= sigma && dn <= sigma {
                points.push(BranchPoint {
                    point: Point::new(t, x),
                    grad_norm,
                    dist_positive: dp,
                    dist_negative: dn,
                });
            }
        }
    }
    Ok(BranchPointReport { sigma, points })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphSample {
    pub t: f64,
    /// Coordinates in the orthogonal complement of the graph direction.
    pub x_prime: Vec<f64>,
    pub f: f64,
    cell: Vec<i64>,
}

/// `x·ν = f(t, x′)` fitted to a free-boundary cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeBoundaryGraph {
    pub direction: Vec<f64>,
    /// Orthonormal basis of the complement of `direction`.
    pub basis: Vec<Vec<f64>>,
    pub h: f64,
    pub samples: Vec<GraphSample>,
    /// Spatial unit normals, one per sample, once fitted.
    pub normals: Option<Vec<Option<Vec<f64>>>>,
    /// Occupied cells rejected because their crossings spread more than `2h`.
    pub flagged_cells: usize,
    pub occupied_cells: usize,
}

fn complement_basis(direction: &[f64]) -> Vec<Vec<f64>> {
    let n = direction.len();
    let skip = (0..n)
        .max_by(|&a, &b| direction[a].abs().total_cmp(&direction[b].abs()))
        .unwrap_or(0);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n.saturating_sub(1));
    for a in (0..n).filter(|&a| a != skip) {
        let mut v = vec![0.0; n];
        v[a] = 1.0;
        for b in std::iter::once(direction).chain(basis.iter().map(|b| b.as_slice())) {
            let d: f64 = v.iter().zip(b).map(|(p, q)| p * q).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= d * bi;
            }
        }
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        basis.push(v.into_iter().map(|c| c / norm).collect());
    }
    basis
}

/// `(time, transverse coordinates, height)` of one interface sample.
type CellSample = (f64, Vec<f64>, f64);

/// Bins the cloud points inside `window` by `(t, x′)` cells of width `h`.
pub fn fit_graph(cloud: &PointCloud, direction: &[f64], window: &Cylinder) -> Result<FreeBoundaryGraph> {
    if direction.len() != cloud.dim {
        return Err(Error::DimensionMismatch {
            expected: cloud.dim,
            found: direction.len(),
        });
    }
    let direction = crate::exact::unit(direction.to_vec())?;
    let basis = complement_basis(&direction);
    let h = cloud.h;
    let mut cells: BTreeMap<(i64, Vec<i64>), Vec<CellSample>> = BTreeMap::new();
    for p in &cloud.points {
        if !window.contains_closed_tx(p.t, &p.x) {
            continue;
        }
        let f: f64 = p.x.iter().zip(&direction).map(|(a, b)| a * b).sum();
        let xp: Vec<f64> = basis
            .iter()
            .map(|b| p.x.iter().zip(b).map(|(a, c)| a * c).sum())
            .collect();
        let cell: Vec<i64> = xp.iter().map(|v| (v / h).round() as i64).collect();
        let tkey = (p.t / (h * h * 1e-3)).round() as i64;
        cells.entry((tkey, cell)).or_default().push((p.t, xp, f));
    }
    if cells.is_empty() {
        return Err(Error::Window("no free-boundary points inside the window".into()));
    }
    let mut samples = Vec::new();
    let mut flagged = 0;
    for ((_, cell), pts) in &cells {
        let lo = pts.iter().map(|p| p.2).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(|p| p.2).fold(f64::NEG_INFINITY, f64::max);
        if hi - lo > 2.0 * h {
            flagged += 1;
            continue;
        }
        let m = pts.len() as f64;
        let mut xp = vec![0.0; basis.len()];
        for p in pts {
            for (a, v) in xp.iter_mut().zip(&p.1) {
                *a += v / m;
            }
        }
        samples.push(GraphSample {
            t: pts[0].0,
            x_prime: xp,
            f: pts.iter().map(|p| p.2).sum::<f64>() / m,
            cell: cell.clone(),
        });
    }
    if 10 * flagged > cells.len() {
        return Err(Error::NotAGraph {
            flagged,
            occupied: cells.len(),
        });
    }
    Ok(FreeBoundaryGraph {
        direction,
        basis,
        h,
        samples,
        normals: None,
        flagged_cells: flagged,
        occupied_cells: cells.len(),
    })
}

impl FreeBoundaryGraph {
    /// `t,x2,...,xn,f,nu_1,...,nu_n` rows (complement coordinates are
    /// labelled `x2..xn`); normals are empty where not fitted.
    pub fn to_csv(&self) -> String {
        let n = self.direction.len();
        let mut out = String::from("t");
        for a in 2..=n {
            let _ = write!(out, ",x{a}");
        }
        out.push_str(",f");
        for a in 1..=n {
            let _ = write!(out, ",nu_{a}");
        }
        out.push('\n');
        for (i, s) in self.samples.iter().enumerate() {
            let _ = write!(out, "{}", s.t);
            for v in &s.x_prime {
                let _ = write!(out, ",{v}");
            }
            let _ = write!(out, ",{}", s.f);
            let nu = self.normals.as_ref().and_then(|ns| ns[i].as_ref());
            for a in 0..n {
                match nu {
                    Some(v) => {
                        let _ = write!(out, ",{}", v[a]);
                    }
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }

    /// Fits spatial unit normals by least squares `f ≈ a + b·Δx′ + c·Δt` over
    /// samples within parabolic distance `radius_cells·h`. Returns the number
    /// of samples skipped for lack of neighbours.
    pub fn fit_normals(&mut self, radius_cells: f64) -> usize {
        let radius = radius_cells * self.h;
        let m = self.basis.len();
        let mut normals = Vec::with_capacity(self.samples.len());
        let mut skipped = 0;
        for p in &self.samples {
            let nbrs: Vec<&GraphSample> = self
                .samples
                .iter()
                .filter(|q| (q.t - p.t).abs() <= radius * radius && sample_pardist(p, q) <= radius)
                .collect();
            // unknowns: a, b (m) and c when time neighbours exist
            let use_time = nbrs.iter().any(|q| q.t != p.t);
            let k = m + 1 + usize::from(use_time);
            let mut ata = vec![vec![0.0; k]; k];
            let mut atb = vec![0.0; k];
            for q in &nbrs {
                let mut row = Vec::with_capacity(k);
                row.push(1.0);
                row.extend(q.x_prime.iter().zip(&p.x_prime).map(|(a, b)| (a - b) / self.h));
                if use_time {
                    row.push((q.t - p.t) / (self.h * self.h));
                }
                for i in 0..k {
                    atb[i] += row[i] * q.f;
                    for j in 0..k {
                        ata[i][j] += row[i] * row[j];
                    }
                }
            }
            let fitted = if nbrs.len() >= k {
                solve_dense(ata, atb)
            } else {
                None
            };
            match fitted {
                Some(c) => {
                    let mut nu = self.direction.clone();
                    for (j, b) in self.basis.iter().enumerate() {
                        let slope = c[1 + j] / self.h;
                        for (v, bj) in nu.iter_mut().zip(b) {
                            *v -= slope * bj;
                        }
                    }
                    let norm = nu.iter().map(|v| v * v).sum::<f64>().sqrt();
                    normals.push(Some(nu.into_iter().map(|v| v / norm).collect()));
                }
                None => {
                    skipped += 1;
                    normals.push(None);
                }
            }
        }
        self.normals = Some(normals);
        skipped
    }
}

fn sample_pardist(p: &GraphSample, q: &GraphSample) -> f64 {
    let sq: f64 = p
        .x_prime
        .iter()
        .zip(&q.x_prime)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        + (p.f - q.f).powi(2);
    (sq + (p.t - q.t).abs()).sqrt()
}

/// Gaussian elimination with partial pivoting; `None` if (nearly) singular.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-10 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for j in col..n {
                a[row][j] -= f * a[col][j];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// `(spatial, temporal)` Lipschitz norms: the largest `|Δf|/|Δx′|` over
/// samples on the same slice and `|Δf|/|Δt|` over samples in the same cell.
pub fn lipschitz_norms(graph: &FreeBoundaryGraph) -> Result<(f64, f64)> {
    if graph.samples.len() < 2 {
        return Err(Error::Malformed("Lipschitz norms need at least two samples".into()));
    }
    let mut spatial: f64 = 0.0;
    let mut temporal: f64 = 0.0;
    let tol = 1e-12;
    for (i, p) in graph.samples.iter().enumerate() {
        for q in &graph.samples[i + 1..] {
            if (p.t - q.t).abs() <= tol {
                let dx = p
                    .x_prime
                    .iter()
                    .zip(&q.x_prime)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if dx > tol {
                    spatial = spatial.max((p.f - q.f).abs() / dx);
                }
            } else if p.cell == q.cell {
                temporal = temporal.max((p.f - q.f).abs() / (p.t - q.t).abs());
            }
        }
    }
    Ok((spatial, temporal))
}

/// Largest temporal quotient `|Δf|/|Δt|` over same-cell samples within
/// parabolic distance `radius` of `center` (in graph coordinates `(t, x′)`).
pub fn temporal_quotient_near(graph: &FreeBoundaryGraph, center: &Point, radius: f64) -> f64 {
    let near: Vec<&GraphSample> = graph
        .samples
        .iter()
        .filter(|s| {
            let cp: Vec<f64> = graph
                .basis
                .iter()
                .map(|b| center.x.iter().zip(b).map(|(a, c)| a * c).sum())
                .collect();
            pardist_unchecked(s.t, &s.x_prime, center.t, &cp) <= radius
        })
        .collect();
    let mut worst: f64 = 0.0;
    for (i, p) in near.iter().enumerate() {
        for q in &near[i + 1..] {
            if p.cell == q.cell && (p.t - q.t).abs() > 1e-12 {
                worst = worst.max((p.f - q.f).abs() / (p.t - q.t).abs());
            }
        }
    }
    worst
}

/// Cumulative maximum normal gap per distance bin.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulusTable {
    pub deltas: Vec<f64>,
    pub max_normal_gap: Vec<f64>,
    pub skipped_samples: usize,
}

impl ModulusTable {
    /// `delta,max_normal_gap` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta,max_normal_gap\n");
        for (d, m) in self.deltas.iter().zip(&self.max_normal_gap) {
            let _ = writeln!(out, "{d},{m}");
        }
        out
    }
}

/// For each `δ` in increasing `bins`, the largest `|ν(p) − ν(q)|` over
/// sample pairs within parabolic distance `δ` (in `(t, x′, f)`).
pub fn normal_continuity(graph: &FreeBoundaryGraph, bins: &[f64]) -> Result<ModulusTable> {
    let normals = graph
        .normals
        .as_ref()
        .ok_or_else(|| Error::Malformed("graph has no fitted normals".into()))?;
    if bins.windows(2).any(|w| !(w[0] < w[1])) || bins.is_empty() {
        return Err(Error::Malformed("bins must be nonempty and increasing".into()));
    }
    let dmax = *bins.last().unwrap_or(&0.0);
    let mut gaps = vec![0.0f64; bins.len()];
    let with: Vec<(&GraphSample, &Vec<f64>)> = graph
        .samples
        .iter()
        .zip(normals)
        .filter_map(|(s, n)| n.as_ref().map(|n| (s, n)))
        .collect();
    for (i, (p, np)) in with.iter().enumerate() {
        for (q, nq) in &with[i + 1..] {
            if (p.t - q.t).abs() > dmax * dmax {
                continue;
            }
            let d = sample_pardist(p, q);
            if d > dmax {
                continue;
            }
            let gap = np.iter().zip(nq.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let b = bins.partition_point(|&x| x < d);
            gaps[b] = gaps[b].max(gap);
        }
    }
    for b in 1..gaps.len() {
        gaps[b] = gaps[b].max(gaps[b - 1]);
    }
    Ok(ModulusTable {
        deltas: bins.to_vec(),
        max_normal_gap: gaps,
        skipped_samples: normals.iter().filter(|n| n.is_none()).count(),
    })
}

/// Odd extension in `x₁` of a nonnegative field on `x₁ ∈ [0, R]` with zero
/// trace on `{x₁ = 0}`.
pub fn reflect_odd(u: &ScalarField, deadband: f64) -> Result<ScalarField> {
    let g = u.grid();
    if g.lower()[0].abs() > 1e-12 * (1.0 + g.h()) {
        return Err(Error::Domain("reflection needs the face x1 = 0 as lower bound".into()));
    }
    let mut lower = g.lower().to_vec();
    lower[0] = -g.upper()[0];
    let target = GridSpec::new(lower, g.upper().to_vec(), g.h(), (g.t_start(), g.t_end()), g.dt())?;
    let n1 = g.shape()[0];
    let mut values = Vec::with_capacity(target.len());
    for k in 0..target.slices() {
        for s in 0..target.space_len() {
            let mut idx = target.unravel(s);
            let i = idx[0] as i64 - (n1 as i64 - 1);
            idx[0] = i.unsigned_abs() as usize;
            let src = g.ravel(&idx);
            let v = u.value(k, src);
            if v < -deadband {
                return Err(Error::Domain(format!("field is negative ({v}) at slice {k}")));
            }
            let v = if i == 0 {
                if v.abs() > deadband {
                    return Err(Error::Domain(format!(
                        "nonzero trace {v} on x1 = 0 at t = {}",
                        g.time(k)
                    )));
                }
                0.0
            } else if i < 0 {
                -v
            } else {
                v
            };
            values.push(v);
        }
    }
    ScalarField::new(target, values)
}

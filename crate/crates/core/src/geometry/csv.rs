//! `t,x1,...,xn,value` serialization of [`ScalarField`]s.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::geometry::{GridSpec, ScalarField};

pub fn write_field_csv<W: Write>(field: &ScalarField, mut out: W) -> Result<()> {
    let g = field.grid();
    let mut header = String::from("t");
    for a in 1..=g.dim() {
        header.push_str(&format!(",x{a}"));
    }
    header.push_str(",value");
    writeln!(out, "{header}")?;
    let mut x = vec![0.0; g.dim()];
    for k in 0..g.slices() {
        let t = g.time(k);
        for s in 0..g.space_len() {
            g.space_coords_into(s, &mut x);
            let mut line = format!("{t}");
            for v in &x {
                line.push_str(&format!(",{v}"));
            }
            line.push_str(&format!(",{}", field.value(k, s)));
            writeln!(out, "{line}")?;
        }
    }
    Ok(())
}

fn uniform_axis(mut coords: Vec<f64>, what: &str) -> Result<(f64, f64, f64)> {
    coords.sort_by(|a, b| a.total_cmp(b));
    coords.dedup();
    if coords.len() < 2 {
        return Err(Error::Malformed(format!("{what} axis needs at least two distinct values")));
    }
    let step = (coords[coords.len() - 1] - coords[0]) / (coords.len() - 1) as f64;
    for (i, c) in coords.iter().enumerate() {
        let expect = coords[0] + i as f64 * step;
        if (c - expect).abs() > 1e-9 * step.max(1.0) {
            return Err(Error::Malformed(format!("{what} axis is not uniformly spaced")));
        }
    }
    Ok((coords[0], coords[coords.len() - 1], step))
}

/// Reads a field written by [`write_field_csv`]. The node set must tile a
/// uniform grid with a common spatial step and appear in canonical order.
pub fn read_field_csv<R: BufRead>(input: R) -> Result<ScalarField> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Malformed("empty field file".into()))??;
    let cols: Vec<&str> = header.trim().split(',').collect();
    let n = cols.len().checked_sub(2).filter(|&n| n >= 1).ok_or_else(|| {
        Error::Malformed("header must be t,x1,...,xn,value".into())
    })?;
    let expected: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=n).map(|a| format!("x{a}")))
        .chain(std::iter::once("value".to_string()))
        .collect();
    if cols != expected {
        return Err(Error::Malformed(format!("unexpected header `{header}`")));
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Malformed(format!("line {}: {e}", i + 2)))?;
        if row.len() != n + 2 {
            return Err(Error::Malformed(format!("line {} has {} columns", i + 2, row.len())));
        }
        rows.push(row);
    }
    let (t0, t1, dt) = uniform_axis(rows.iter().map(|r| r[0]).collect(), "time")?;
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    let mut h = None::<f64>;
    for a in 0..n {
        let (lo, hi, step) = uniform_axis(rows.iter().map(|r| r[a + 1]).collect(), "spatial")?;
        if let Some(h0) = h {
            if (h0 - step).abs() > 1e-9 * h0 {
                return Err(Error::Malformed("spatial axes use different steps".into()));
            }
        }
        h = Some(step);
        lower.push(lo);
        upper.push(hi);
    }
    let grid = GridSpec::new(lower, upper, h.unwrap_or(1.0), (t0, t1), dt)?;
    if rows.len() != grid.len() {
        return Err(Error::Malformed(format!(
            "{} rows do not tile a {}-node grid",
            rows.len(),
            grid.len()
        )));
    }
    let mut values = Vec::with_capacity(rows.len());
    let mut x = vec![0.0; n];
    for (i, row) in rows.iter().enumerate() {
        let k = i / grid.space_len();
        let s = i % grid.space_len();
        grid.space_coords_into(s, &mut x);
        let tol = 1e-9 * (1.0 + grid.h());
        let matches = (row[0] - grid.time(k)).abs() <= 1e-9 * (1.0 + grid.dt())
            && x.iter().zip(&row[1..=n]).all(|(a, b)| (a - b).abs() <= tol);
        if !matches {
            return Err(Error::Malformed(format!("row {} is out of canonical order", i + 2)));
        }
        values.push(row[n + 1]);
    }
    ScalarField::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn csv_round_trip(n in 1usize..3, nodes in 3usize..6, slices in 2usize..4, a in -2.0..2.0f64) {
            let g = GridSpec::cube(n, 1.0, nodes, (-0.5, 0.5), slices).unwrap();
            let u = ScalarField::from_fn(g, |t, x| a * t + x.iter().sum::<f64>().sin()).unwrap();
            let mut buf = Vec::new();
            write_field_csv(&u, &mut buf).unwrap();
            let back = read_field_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(back, u);
        }
    }

    #[test]
    fn rejects_holes() {
        let text = "t,x1,value\n0,0,1\n0,1,1\n1,0,1\n";
        assert!(read_field_csv(text.as_bytes()).is_err());
        let text = "t,x1,value\n0,0,1\n0,1,1\n0,3,1\n";
        assert!(read_field_csv(text.as_bytes()).is_err());
        assert!(read_field_csv("t,y,value\n".as_bytes()).is_err());
    }
}

//! Envelope decay fits `max_{K+l} |u| ≈ e^{a − c·d_l^p}` over unit cells.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::numeric::golden_min;

const TRUSTED_HI: f64 = 1e-2;
const TRUSTED_LO: f64 = 1e-10;
const BOUNDARY_LEVEL: f64 = 1e-3;
const MIN_CELLS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub c: f64,
    pub p: f64,
    /// Fitted log-amplitude `a`.
    pub offset: f64,
    /// RMS misfit of `log m_l`.
    pub rms: f64,
    pub trusted_cells: usize,
    /// False with fewer than 8 trusted cells, or when `u` has not dropped
    /// below 1e-3 of its peak by the box boundary.
    pub reliable: bool,
}

/// Fits the cell-maximum envelope of `u` sampled at `points` (each of length
/// `dim`). The distance of cell `l` is the smallest `|x|` over `K + l`.
pub fn decay_fit(points: &[Vec<f64>], u: &[f64]) -> DecayFit {
    let mut cells: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
    for (x, v) in points.iter().zip(u) {
        let l: Vec<i64> = x.iter().map(|c| c.floor() as i64).collect();
        let e = cells.entry(l).or_insert(0.0);
        *e = e.max(v.abs());
    }
    let peak = cells.values().copied().fold(0.0, f64::max);
    let unreliable = DecayFit { c: 0.0, p: 0.0, offset: 0.0, rms: f64::INFINITY, trusted_cells: 0, reliable: false };
    if peak == 0.0 || cells.is_empty() {
        return unreliable;
    }
    // Cells on the outer layer of the sampled region.
    let dim = points.first().map_or(0, Vec::len);
    let lo: Vec<i64> = (0..dim).map(|d| cells.keys().map(|l| l[d]).min().unwrap_or(0)).collect();
    let hi: Vec<i64> = (0..dim).map(|d| cells.keys().map(|l| l[d]).max().unwrap_or(0)).collect();
    let boundary_max = cells
        .iter()
        .filter(|(l, _)| l.iter().enumerate().any(|(d, &v)| v == lo[d] || v == hi[d]))
        .map(|(_, &m)| m)
        .fold(0.0, f64::max);

    let data: Vec<(f64, f64)> = cells
        .iter()
        .filter(|(_, &m)| m <= TRUSTED_HI * peak && m >= TRUSTED_LO * peak)
        .map(|(l, &m)| {
            let d2: f64 = l.iter().map(|&v| {
                let near = if v >= 0 { v as f64 } else if v + 1 <= 0 { (v + 1) as f64 } else { 0.0 };
                near * near
            }).sum();
            (d2.sqrt(), m.ln())
        })
        .collect();
    let n = data.len();
    if n < 3 {
        return DecayFit { trusted_cells: n, ..unreliable };
    }
    // For fixed p the model is linear in (a, c).
    let linear = |p: f64| -> (f64, f64, f64) {
        let m = n as f64;
        let xs: Vec<f64> = data.iter().map(|(d, _)| d.powf(p)).collect();
        let sx: f64 = xs.iter().sum();
        let sy: f64 = data.iter().map(|(_, y)| y).sum();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let sxy: f64 = xs.iter().zip(&data).map(|(x, (_, y))| x * y).sum();
        let det = m * sxx - sx * sx;
        let slope = if det.abs() > 0.0 { (m * sxy - sx * sy) / det } else { 0.0 };
        let a = (sy - slope * sx) / m;
        let sse = xs.iter().zip(&data).map(|(x, (_, y))| (a + slope * x - y).powi(2)).sum();
        (a, -slope, sse)
    };
    let (p, _) = golden_min(|p| linear(p).2, 0.2, 4.0, 1e-8);
    let (offset, c, sse) = linear(p);
    DecayFit {
        c,
        p,
        offset,
        rms: (sse / n as f64).sqrt(),
        trusted_cells: n,
        reliable: n >= MIN_CELLS && boundary_max < BOUNDARY_LEVEL * peak && c > 0.0,
    }
}

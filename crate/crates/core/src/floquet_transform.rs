//! Discrete Floquet transform of cell-indexed samples, its exact inverse on
//! the dual grid, block diagonalization of `H0` and the growth-order probe
//! for complex quasimomenta.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::{fft_nd, golden_min, signed_frequency, unravel};
use crate::potential::FourierPotential;

/// Largest tolerated share of the outermost cell shell in a complex-`k` sum.
pub const TRUNCATION_LIMIT: f64 = 1e-3;

/// Samples of `f` on the cells `l ∈ [−L, L]^dim`, each cell carrying the
/// same `s`-point-per-axis grid `x = a/s`, `a ∈ [0, s)^dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellArray {
    dim: usize,
    l_cells: usize,
    samples: usize,
    /// Cell-major: cell multi-index `l + L` row-major, then samples row-major.
    values: Vec<Complex64>,
}

impl CellArray {
    pub fn new(dim: usize, l_cells: usize, samples: usize, values: Vec<Complex64>) -> Result<Self> {
        if !(1..=3).contains(&dim) || samples == 0 {
            return invalid("cell array needs dim in 1..=3 and at least one sample per axis");
        }
        let expected = (2 * l_cells + 1).pow(dim as u32) * samples.pow(dim as u32);
        if values.len() != expected {
            return invalid(format!("cell array expects {expected} values, got {}", values.len()));
        }
        Ok(Self { dim, l_cells, samples, values })
    }

    /// Fills every sample from `f(l, x)` with `x ∈ [0, 1)^dim` the offset in cell `l`.
    pub fn from_fn(
        dim: usize,
        l_cells: usize,
        samples: usize,
        f: impl Fn(&[i64], &[f64]) -> Complex64,
    ) -> Result<Self> {
        if !(1..=3).contains(&dim) || samples == 0 {
            return invalid("cell array needs dim in 1..=3 and at least one sample per axis");
        }
        let (nc, ns) = (2 * l_cells + 1, samples.pow(dim as u32));
        let mut values = Vec::with_capacity(nc.pow(dim as u32) * ns);
        for c in 0..nc.pow(dim as u32) {
            let l = cell_index(c, l_cells, dim);
            for a in 0..ns {
                values.push(f(&l, &offset(a, samples, dim)));
            }
        }
        Self::new(dim, l_cells, samples, values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn l_cells(&self) -> usize {
        self.l_cells
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn cells_per_axis(&self) -> usize {
        2 * self.l_cells + 1
    }

    pub fn n_cells(&self) -> usize {
        self.cells_per_axis().pow(self.dim as u32)
    }

    pub fn cell_size(&self) -> usize {
        self.samples.pow(self.dim as u32)
    }

    pub fn cell(&self, c: usize) -> &[Complex64] {
        let ns = self.cell_size();
        &self.values[c * ns..(c + 1) * ns]
    }

    pub fn cell_of(&self, c: usize) -> Vec<i64> {
        cell_index(c, self.l_cells, self.dim)
    }

    /// Discrete `L²(K + l)` norm per cell, with quadrature weight `s^{−dim}`.
    pub fn cell_norms(&self) -> Vec<f64> {
        (0..self.n_cells()).map(|c| grid_norm(self.cell(c), self.cell_size())).collect()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.cell_size() as f64
    }

    /// `f(· − l0)`; cells shifted out of range are dropped.
    pub fn shifted(&self, l0: &[i64]) -> Result<Self> {
        if l0.len() != self.dim {
            return Err(Error::DimMismatch { expected: self.dim, found: l0.len() });
        }
        let ns = self.cell_size();
        let mut values = vec![Complex64::new(0.0, 0.0); self.values.len()];
        for c in 0..self.n_cells() {
            let target: Vec<i64> = self.cell_of(c).iter().zip(l0).map(|(l, s)| l + s).collect();
            if let Some(t) = cell_flat(&target, self.l_cells) {
                values[t * ns..(t + 1) * ns].copy_from_slice(self.cell(c));
            }
        }
        Self::new(self.dim, self.l_cells, self.samples, values)
    }
}

fn cell_index(c: usize, l_cells: usize, dim: usize) -> Vec<i64> {
    unravel(c, 2 * l_cells + 1, dim).into_iter().map(|i| i as i64 - l_cells as i64).collect()
}

fn cell_flat(l: &[i64], l_cells: usize) -> Option<usize> {
    let n = 2 * l_cells as i64 + 1;
    let mut flat = 0;
    for &v in l {
        let i = v + l_cells as i64;
        if !(0..n).contains(&i) {
            return None;
        }
        flat = flat * n + i;
    }
    Some(flat as usize)
}

fn offset(a: usize, samples: usize, dim: usize) -> Vec<f64> {
    unravel(a, samples, dim).into_iter().map(|i| i as f64 / samples as f64).collect()
}

/// Scaled so that values near the top of the f64 range still have a norm.
fn grid_norm(v: &[Complex64], cell_size: usize) -> f64 {
    let big = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if big == 0.0 || !big.is_finite() {
        return big;
    }
    big * (v.iter().map(|z| (z / big).norm_sqr()).sum::<f64>() / cell_size as f64).sqrt()
}

/// `f̂(k, x) = Σ_l f(x − l) e^{−ik·(x−l)}` on the cell grid. For complex `k`
/// the weights are used literally, and the sum is refused when the outermost
/// shell of cells carries more than [`TRUNCATION_LIMIT`] of it.
pub fn forward(f: &CellArray, k: &[Complex64]) -> Result<Vec<Complex64>> {
    if k.len() != f.dim {
        return Err(Error::DimMismatch { expected: f.dim, found: k.len() });
    }
    let ns = f.cell_size();
    let xs: Vec<Vec<f64>> = (0..ns).map(|a| offset(a, f.samples, f.dim)).collect();
    let mut total = vec![Complex64::new(0.0, 0.0); ns];
    let mut shell = vec![Complex64::new(0.0, 0.0); ns];
    let complex_k = k.iter().any(|z| z.im != 0.0);
    // The sum runs over y = x + l, i.e. f(x − l') with l' = −l.
    for c in 0..f.n_cells() {
        let l = f.cell_of(c);
        let outer = l.iter().any(|v| v.unsigned_abs() as usize == f.l_cells);
        for (a, v) in f.cell(c).iter().enumerate() {
            if *v == Complex64::new(0.0, 0.0) {
                continue;
            }
            let phase: Complex64 = k.iter().zip(&xs[a]).zip(&l).map(|((kj, x), lj)| kj * (x + *lj as f64)).sum();
            // Tiny values against huge weights: combine in log space.
            let term = if complex_k { (v.ln() - Complex64::i() * phase).exp() } else { v * (-Complex64::i() * phase).exp() };
            total[a] += term;
            if outer {
                shell[a] += term;
            }
        }
    }
    if complex_k {
        let (tn, sn) = (grid_norm(&total, ns), grid_norm(&shell, ns));
        if !tn.is_finite() || sn > TRUNCATION_LIMIT * tn {
            let tau = k.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
            return Err(Error::TruncationDominated { tau });
        }
    }
    Ok(total)
}

/// Forward transform sampled on a quasimomentum grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloquetField {
    pub dim: usize,
    pub l_cells: usize,
    pub samples: usize,
    pub k_grid: Vec<Vec<f64>>,
    /// Per quasimomentum, the periodic cell function.
    pub values: Vec<Vec<Complex64>>,
}

/// Dual grid `k = 2πj/(2L+1)`, `j ∈ [0, 2L+1)^dim`, on which the transform
/// of a `[−L, L]^dim` cell array inverts exactly.
pub fn dual_grid(dim: usize, l_cells: usize) -> Vec<Vec<f64>> {
    let n = 2 * l_cells + 1;
    (0..n.pow(dim as u32))
        .map(|j| unravel(j, n, dim).into_iter().map(|i| 2.0 * PI * i as f64 / n as f64).collect())
        .collect()
}

pub fn transform(f: &CellArray) -> Result<FloquetField> {
    let k_grid = dual_grid(f.dim, f.l_cells);
    let values = k_grid
        .par_iter()
        .map(|k| forward(f, &to_complex(k)))
        .collect::<Result<Vec<_>>>()?;
    Ok(FloquetField { dim: f.dim, l_cells: f.l_cells, samples: f.samples, k_grid, values })
}

fn to_complex(k: &[f64]) -> Vec<Complex64> {
    k.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

/// `f(x + l) = |grid|^{−1} Σ_k f̂(k, x) e^{ik·(x+l)}` over the dual grid.
pub fn inverse(field: &FloquetField) -> Result<CellArray> {
    let expected = dual_grid(field.dim, field.l_cells);
    let matches = field.k_grid.len() == expected.len()
        && field.k_grid.iter().zip(&expected).all(|(a, b)| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12));
    if !matches {
        return invalid("quasimomentum grid is not the dual grid of the cell range");
    }
    let ns = field.samples.pow(field.dim as u32);
    if field.values.iter().any(|v| v.len() != ns) {
        return invalid("Floquet field sample count does not match the cell grid");
    }
    let xs: Vec<Vec<f64>> = (0..ns).map(|a| offset(a, field.samples, field.dim)).collect();
    let nk = field.k_grid.len() as f64;
    let n_cells = (2 * field.l_cells + 1).pow(field.dim as u32);
    let values: Vec<Complex64> = (0..n_cells)
        .into_par_iter()
        .flat_map_iter(|c| {
            let l = cell_index(c, field.l_cells, field.dim);
            let xs = &xs;
            (0..ns).map(move |a| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, v) in field.k_grid.iter().zip(&field.values) {
                    let phase: f64 = k.iter().zip(&xs[a]).zip(&l).map(|((kj, x), lj)| kj * (x + *lj as f64)).sum();
                    acc += v[a] * Complex64::from_polar(1.0, phase);
                }
                acc / nk
            })
        })
        .collect();
    CellArray::new(field.dim, field.l_cells, field.samples, values)
}

fn relative_gap(a: &[Complex64], b: &[Complex64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let scale = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    diff / scale.max(f64::MIN_POSITIVE)
}

/// Relative defect of `(f(· − l0))^(k) = e^{−ik·l0} f̂(k)` at real `k`.
/// Meaningful only when the shift keeps the support inside the cell range.
pub fn shift_covariance_defect(f: &CellArray, l0: &[i64], k: &[f64]) -> Result<f64> {
    let g = f.shifted(l0)?;
    let phase: f64 = k.iter().zip(l0).map(|(k, l)| k * *l as f64).sum();
    let expect: Vec<Complex64> = forward(f, &to_complex(k))?.into_iter().map(|v| v * Complex64::from_polar(1.0, -phase)).collect();
    Ok(relative_gap(&expect, &forward(&g, &to_complex(k))?))
}

/// Relative defect of `f̂(k + 2πm, x) = e^{−2πi m·x} f̂(k, x)`.
pub fn quasi_periodicity_defect(f: &CellArray, k: &[f64], m: &[i64]) -> Result<f64> {
    if m.len() != f.dim || k.len() != f.dim {
        return Err(Error::DimMismatch { expected: f.dim, found: m.len().min(k.len()) });
    }
    let base = forward(f, &to_complex(k))?;
    let moved: Vec<f64> = k.iter().zip(m).map(|(k, m)| k + 2.0 * PI * *m as f64).collect();
    let expect: Vec<Complex64> = base
        .iter()
        .enumerate()
        .map(|(a, v)| {
            let x = offset(a, f.samples, f.dim);
            let phase: f64 = x.iter().zip(m).map(|(x, m)| 2.0 * PI * *m as f64 * x).sum();
            v * Complex64::from_polar(1.0, -phase)
        })
        .collect();
    Ok(relative_gap(&expect, &forward(f, &to_complex(&moved))?))
}

/// Relative defect of `Σ_l ‖f‖²_{K+l} = |grid|^{−1} Σ_k ‖f̂(k)‖²`.
pub fn plancherel_defect(f: &CellArray) -> Result<f64> {
    let field = transform(f)?;
    let ns = f.cell_size() as f64;
    let rhs: f64 = field.values.iter().flatten().map(|v| v.norm_sqr()).sum::<f64>() / ns / field.k_grid.len() as f64;
    let lhs = f.norm_sq();
    Ok((lhs - rhs).abs() / lhs.max(f64::MIN_POSITIVE))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalizationReport {
    /// `max_k ‖(H0 f)^(k) − H0(k) f̂(k)‖ / ‖f̂(k)‖`.
    pub residual: f64,
    pub per_k: Vec<f64>,
    /// False when `f` is not negligible within two cells of the range boundary.
    pub guard_ok: bool,
}

/// Compares the transform of `H0 f` (spectral derivatives on the whole
/// sampled domain) with `H0(k) = (−i∇ + k)² + q` applied to `f̂(k, ·)` on
/// the torus.
pub fn diagonalization_residual(f: &CellArray, q: &FourierPotential, k_grid: &[Vec<f64>]) -> Result<DiagonalizationReport> {
    if q.dim() != f.dim {
        return Err(Error::DimMismatch { expected: f.dim, found: q.dim() });
    }
    let (dim, s, lc) = (f.dim, f.samples, f.l_cells);
    let nc = f.cells_per_axis();
    let norms = f.cell_norms();
    let peak = norms.iter().copied().fold(0.0, f64::max);
    let guard_ok = (0..f.n_cells()).all(|c| {
        let inner = f.cell_of(c).iter().all(|l| l.unsigned_abs() as usize + 2 <= lc);
        inner || norms[c] <= 1e-12 * peak
    });

    // Whole-domain layout: positions y = −L + i/s, n = (2L+1)s per axis.
    let n = nc * s;
    let total = n.pow(dim as u32);
    let big_to_cell = |flat: usize| -> (usize, usize) {
        let idx = unravel(flat, n, dim);
        let (mut c, mut a) = (0, 0);
        for &i in &idx {
            c = c * nc + i / s;
            a = a * s + i % s;
        }
        (c, a)
    };
    let ns = f.cell_size();
    let mut big: Vec<Complex64> = (0..total).map(|flat| {
        let (c, a) = big_to_cell(flat);
        f.values[c * ns + a]
    }).collect();
    fft_nd(&mut big, n, dim, false);
    let period = nc as f64;
    for (flat, v) in big.iter_mut().enumerate() {
        let w: f64 = unravel(flat, n, dim)
            .into_iter()
            .map(|i| {
                let xi = 2.0 * PI * signed_frequency(i, n) as f64 / period;
                xi * xi
            })
            .sum();
        *v *= w / total as f64;
    }
    fft_nd(&mut big, n, dim, true);
    let mut h0f = vec![Complex64::new(0.0, 0.0); f.values.len()];
    for (flat, v) in big.iter().enumerate() {
        let (c, a) = big_to_cell(flat);
        let y: Vec<f64> = unravel(flat, n, dim).into_iter().map(|i| i as f64 / s as f64 - lc as f64).collect();
        h0f[c * ns + a] = v + q.evaluate(&y) * f.values[c * ns + a];
    }
    let h0f = CellArray::new(dim, lc, s, h0f)?;
    let q_cell: Vec<f64> = (0..ns).map(|a| q.evaluate(&offset(a, s, dim))).collect();

    let per_k = k_grid
        .par_iter()
        .map(|k| {
            if k.len() != dim {
                return Err(Error::DimMismatch { expected: dim, found: k.len() });
            }
            let kc = to_complex(k);
            let fh = forward(f, &kc)?;
            let lhs = forward(&h0f, &kc)?;
            let mut p = fh.clone();
            fft_nd(&mut p, s, dim, false);
            for (a, v) in p.iter_mut().enumerate() {
                let w: f64 = unravel(a, s, dim)
                    .into_iter()
                    .zip(k)
                    .map(|(i, kj)| {
                        let t = kj + 2.0 * PI * signed_frequency(i, s) as f64;
                        t * t
                    })
                    .sum();
                *v *= w / ns as f64;
            }
            fft_nd(&mut p, s, dim, true);
            let diff: Vec<Complex64> = (0..ns).map(|a| lhs[a] - (p[a] + q_cell[a] * fh[a])).collect();
            Ok(grid_norm(&diff, ns) / grid_norm(&fh, ns).max(f64::MIN_POSITIVE))
        })
        .collect::<Result<Vec<f64>>>()?;
    let residual = per_k.iter().copied().fold(0.0, f64::max);
    Ok(DiagonalizationReport { residual, per_k, guard_ok })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    /// Fitted order `ŝ` in `log‖f̂(iτe)‖ ≈ a + b·τ^ŝ`.
    pub s_hat: f64,
    pub a: f64,
    pub b: f64,
    pub taus: Vec<f64>,
    pub log_norms: Vec<f64>,
}

/// Fits the growth order of `τ ↦ ‖f̂(iτe, ·)‖` along the unit direction `e`,
/// using the τ within two decades of the largest one.
pub fn growth_order_probe(f: &CellArray, direction: &[f64], taus: &[f64]) -> Result<GrowthFit> {
    if direction.len() != f.dim {
        return Err(Error::DimMismatch { expected: f.dim, found: direction.len() });
    }
    let len = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    if len == 0.0 {
        return invalid("probe direction must be nonzero");
    }
    let tmax = taus.iter().copied().fold(0.0, f64::max);
    let used: Vec<f64> = taus.iter().copied().filter(|&t| t > 0.0 && t >= tmax / 100.0).collect();
    if used.len() < 4 {
        return invalid("growth probe needs at least four positive tau values");
    }
    let ns = f.cell_size();
    let log_norms = used
        .iter()
        .map(|&t| {
            let k: Vec<Complex64> = direction.iter().map(|e| Complex64::new(0.0, t * e / len)).collect();
            let v = forward(f, &k)?;
            Ok(grid_norm(&v, ns).ln())
        })
        .collect::<Result<Vec<f64>>>()?;
    if log_norms.iter().any(|v| !v.is_finite()) {
        return Err(Error::ProbeFailure("transform vanishes or overflows on the probe line".into()));
    }
    let linear_fit = |s: f64| -> (f64, f64, f64) {
        let m = used.len() as f64;
        let xs: Vec<f64> = used.iter().map(|t| t.powf(s)).collect();
        let (sx, sy) = (xs.iter().sum::<f64>(), log_norms.iter().sum::<f64>());
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let sxy: f64 = xs.iter().zip(&log_norms).map(|(x, y)| x * y).sum();
        let det = m * sxx - sx * sx;
        let b = if det.abs() > 0.0 { (m * sxy - sx * sy) / det } else { 0.0 };
        let a = (sy - b * sx) / m;
        let sse = xs.iter().zip(&log_norms).map(|(x, y)| (a + b * x - y).powi(2)).sum();
        (a, b, sse)
    };
    let (s_hat, _) = golden_min(|s| linear_fit(s).2, 0.5, 8.0, 1e-10);
    let (a, b, _) = linear_fit(s_hat);
    Ok(GrowthFit { s_hat, a, b, taus: used, log_norms })
}

/// Legendre-type prediction `sup_t (τt − t^r) = c_r τ^{r/(r−1)}`; returns
/// `(r/(r−1), c_r)`.
pub fn legendre_growth(r: f64) -> (f64, f64) {
    let s = r / (r - 1.0);
    (s, (r - 1.0) * r.powf(-s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(dim: usize, l_cells: usize, samples: usize) -> CellArray {
        CellArray::from_fn(dim, l_cells, samples, |l, x| {
            let r2: f64 = l.iter().zip(x).map(|(l, x)| (*l as f64 + x - 0.3).powi(2)).sum();
            Complex64::from_polar((-r2 / 0.25).exp(), 2.0 * l.iter().zip(x).map(|(l, x)| *l as f64 + x).sum::<f64>())
        })
        .unwrap()
    }

    #[test]
    fn single_cell_norm_independent_of_k() {
        let f = CellArray::from_fn(1, 2, 8, |l, x| if l[0] == 0 { Complex64::new(1.0 + x[0], 0.0) } else { 0.0.into() }).unwrap();
        let base = grid_norm(&forward(&f, &[0.0.into()]).unwrap(), 8);
        for k in [0.3, 1.7, 5.0] {
            let v = forward(&f, &[k.into()]).unwrap();
            assert!((grid_norm(&v, 8) - base).abs() < 1e-14);
            for (a, z) in v.iter().enumerate() {
                let x = a as f64 / 8.0;
                assert!((z - Complex64::from_polar(1.0 + x, -k * x)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn impulse_at_cell_origin_has_unit_modulus() {
        let f = CellArray::from_fn(2, 2, 4, |l, x| {
            let hit = l.iter().all(|&v| v == 0) && x.iter().all(|&v| v == 0.0);
            if hit { 1.0.into() } else { 0.0.into() }
        })
        .unwrap();
        for k in [[0.2, 4.0], [3.0, 1.0]] {
            let v = forward(&f, &to_complex(&k)).unwrap();
            assert!((v[0].norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn round_trip_and_plancherel() {
        let f = gaussian(2, 2, 4);
        let back = inverse(&transform(&f).unwrap()).unwrap();
        let err = f.values().iter().zip(back.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
        assert!(plancherel_defect(&f).unwrap() < 1e-12);
    }

    #[test]
    fn shift_and_quasi_periodicity() {
        let f = gaussian(1, 4, 8);
        assert!(shift_covariance_defect(&f, &[1], &[0.7]).unwrap() < 1e-12);
        assert!(quasi_periodicity_defect(&f, &[0.7], &[2]).unwrap() < 1e-12);
        let g = gaussian(2, 4, 4);
        assert!(shift_covariance_defect(&g, &[-1, 1], &[0.3, 2.0]).unwrap() < 1e-12);
        assert!(quasi_periodicity_defect(&g, &[0.3, 2.0], &[1, -1]).unwrap() < 1e-12);
    }

    #[test]
    fn inverse_rejects_foreign_grid() {
        let f = gaussian(1, 2, 4);
        let mut field = transform(&f).unwrap();
        field.k_grid[1][0] += 0.1;
        assert!(inverse(&field).is_err());
    }

    #[test]
    fn free_diagonalization_is_spectrally_accurate() {
        let f = gaussian(1, 5, 32);
        let grid = dual_grid(1, 5);
        let free = diagonalization_residual(&f, &FourierPotential::free(1).unwrap(), &grid).unwrap();
        assert!(free.guard_ok);
        assert!(free.residual < 1e-8, "{}", free.residual);
        let c = diagonalization_residual(&f, &FourierPotential::constant(1, 2.5).unwrap(), &grid).unwrap();
        assert!((c.residual - free.residual).abs() < 1e-10);
        let m = diagonalization_residual(&f, &FourierPotential::mathieu(1.0), &grid).unwrap();
        assert!(m.residual < 1e-6);
    }

    #[test]
    fn guard_violation_is_flagged() {
        let f = CellArray::from_fn(1, 3, 8, |l, _| if l[0] == 3 { 1.0.into() } else { 0.0.into() }).unwrap();
        let r = diagonalization_residual(&f, &FourierPotential::free(1).unwrap(), &dual_grid(1, 3)).unwrap();
        assert!(!r.guard_ok);
    }

    #[test]
    fn truncation_is_refused() {
        let f = CellArray::from_fn(1, 2, 1, |_, _| 1.0.into()).unwrap();
        assert!(matches!(
            forward(&f, &[Complex64::new(0.0, 3.0)]),
            Err(Error::TruncationDominated { .. })
        ));
    }

    #[test]
    fn legendre_constant_for_gaussian_decay() {
        let (s, c) = legendre_growth(2.0);
        assert_eq!(s, 2.0);
        assert!((c - 0.25).abs() < 1e-15);
    }
}

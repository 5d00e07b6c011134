//! Truncated Bloch Hamiltonian `H0(k) = (i∇ − k)² + q` in the plane-wave
//! basis `e^{2πi m·x}`, `‖m‖∞ ≤ M`, and its determinant.
//!
//! The kinetic symbol uses the bilinear square `(k+2πm)·(k+2πm)` so that
//! every entry, and hence the determinant, is analytic in complex `k`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::potential::FourierPotential;

/// All lattice vectors in the cutoff box, lexicographically ordered.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWaveBasis {
    dim: usize,
    cutoff: usize,
    indices: Vec<Vec<i64>>,
}

impl PlaneWaveBasis {
    pub fn new(dim: usize, cutoff: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return invalid(format!("dimension must be 1, 2 or 3 (got {dim})"));
        }
        if cutoff < 1 {
            return invalid("plane-wave cutoff must be at least 1");
        }
        let side = 2 * cutoff + 1;
        let m = cutoff as i64;
        let indices = (0..side.pow(dim as u32))
            .map(|flat| {
                crate::numeric::unravel(flat, side, dim)
                    .into_iter()
                    .map(|i| i as i64 - m)
                    .collect()
            })
            .collect();
        Ok(Self { dim, cutoff, indices })
    }

    /// Default cutoff per dimension used by the CLI.
    pub fn default_cutoff(dim: usize) -> usize {
        match dim {
            1 => 8,
            2 => 6,
            _ => 3,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn size(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[Vec<i64>] {
        &self.indices
    }
}

/// `H0(k) − λ` as an explicit matrix.
#[derive(Debug, Clone)]
pub struct BlochMatrix {
    pub k: Vec<Complex64>,
    pub lambda: Complex64,
    pub entries: DMatrix<Complex64>,
    /// True iff `k` and `λ` are real, in which case the matrix is Hermitian.
    pub hermitian: bool,
}

/// `log|det|` and the principal phase of a determinant.
/// A singular matrix has `log_abs = −∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub log_abs: f64,
    pub phase: f64,
}

impl LogDet {
    pub fn is_zero(&self) -> bool {
        self.log_abs == f64::NEG_INFINITY
    }

    /// `sign(det)·exp(log|det| / n)`: a real contour function with the
    /// zero set and sign structure of a real determinant.
    pub fn scaled_real(&self, n: usize) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let sign = if self.phase.cos() >= 0.0 { 1.0 } else { -1.0 };
        sign * (self.log_abs / n as f64).exp()
    }

    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.log_abs.exp(), self.phase)
    }
}

impl BlochMatrix {
    /// Determinant through partial-pivoted LU, accumulated as a sum of
    /// pivot logarithms.
    pub fn log_det(&self) -> LogDet {
        log_det_of(self.entries.clone())
    }

    /// Eigenvalues of `H0(k)` (the λ shift removed), ascending.
    pub fn hermitian_spectrum(&self) -> Result<Vec<f64>> {
        if !self.hermitian {
            return invalid("hermitian_spectrum requires real k and real lambda");
        }
        let mut ev: Vec<f64> = self
            .entries
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .map(|v| v + self.lambda.re)
            .collect();
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }

    /// Largest deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        let a = &self.entries;
        let mut worst: f64 = 0.0;
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

pub(crate) fn log_det_of(m: DMatrix<Complex64>) -> LogDet {
    let n = m.nrows();
    let lu = m.lu();
    let mut log_abs = 0.0;
    let mut phase = if lu.p().determinant::<f64>() < 0.0 { std::f64::consts::PI } else { 0.0 };
    let packed = lu.lu_internal();
    for i in 0..n {
        let d = packed[(i, i)];
        let a = d.norm();
        if a == 0.0 || !a.is_finite() {
            return LogDet { log_abs: f64::NEG_INFINITY, phase: 0.0 };
        }
        log_abs += a.ln();
        phase += d.arg();
    }
    LogDet { log_abs, phase: crate::numeric::wrap_phase(phase) }
}

/// `H0(·)` for one potential and basis, with the potential block
/// precomputed so that repeated evaluation at many `(k, λ)` only adds the
/// kinetic diagonal.
#[derive(Debug, Clone)]
pub struct BlochFamily {
    basis: PlaneWaveBasis,
    potential: FourierPotential,
    q_block: DMatrix<Complex64>,
}

impl BlochFamily {
    pub fn new(basis: PlaneWaveBasis, potential: FourierPotential) -> Result<Self> {
        if basis.dim() != potential.dim() {
            return Err(Error::DimMismatch { expected: basis.dim(), found: potential.dim() });
        }
        let n = basis.size();
        let idx = basis.indices();
        let q_block = DMatrix::from_fn(n, n, |i, j| {
            let diff: Vec<i64> = idx[i].iter().zip(&idx[j]).map(|(a, b)| a - b).collect();
            potential.coeff(&diff)
        });
        Ok(Self { basis, potential, q_block })
    }

    pub fn basis(&self) -> &PlaneWaveBasis {
        &self.basis
    }

    pub fn potential(&self) -> &FourierPotential {
        &self.potential
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn size(&self) -> usize {
        self.basis.size()
    }

    /// Kinetic symbol `(k+2πm)·(k+2πm)` (bilinear) for basis vector `i`.
    pub fn kinetic(&self, k: &[Complex64], i: usize) -> Complex64 {
        self.basis.indices()[i]
            .iter()
            .zip(k)
            .map(|(&m, &kj)| {
                let s = kj + 2.0 * PI * m as f64;
                s * s
            })
            .sum()
    }

    pub fn matrix(&self, k: &[Complex64], lambda: Complex64) -> Result<BlochMatrix> {
        if k.len() != self.dim() {
            return Err(Error::DimMismatch { expected: self.dim(), found: k.len() });
        }
        let mut entries = self.q_block.clone();
        for i in 0..self.size() {
            entries[(i, i)] += self.kinetic(k, i) - lambda;
        }
        let hermitian = lambda.im == 0.0 && k.iter().all(|c| c.im == 0.0);
        Ok(BlochMatrix { k: k.to_vec(), lambda, entries, hermitian })
    }

    pub fn matrix_real(&self, k: &[f64], lambda: f64) -> Result<BlochMatrix> {
        let kc: Vec<Complex64> = k.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.matrix(&kc, Complex64::new(lambda, 0.0))
    }

    pub fn log_det(&self, k: &[Complex64], lambda: Complex64) -> Result<LogDet> {
        Ok(self.matrix(k, lambda)?.log_det())
    }

    /// `log det` at real `(k, λ)`; the phase is then 0 or π.
    pub fn log_det_real(&self, k: &[f64], lambda: f64) -> Result<LogDet> {
        Ok(self.matrix_real(k, lambda)?.log_det())
    }

    /// Ascending eigenvalues of `H0(k)` for real `k`.
    pub fn spectrum(&self, k: &[f64]) -> Result<Vec<f64>> {
        self.matrix_real(k, 0.0)?.hermitian_spectrum()
    }

    /// `min_j |λ_j(k) − λ|`: distance of `λ` to the spectrum of `H0(k)`.
    pub fn spectral_distance(&self, k: &[f64], lambda: f64) -> Result<f64> {
        Ok(self
            .spectrum(k)?
            .into_iter()
            .map(|e| (e - lambda).abs())
            .fold(f64::INFINITY, f64::min))
    }

    /// Lowest eigenpair data at real `k`: eigenvalues ascending with the
    /// matching plane-wave coefficient vectors.
    pub fn eigenpairs(&self, k: &[f64]) -> Result<Vec<(f64, Vec<Complex64>)>> {
        let m = self.matrix_real(k, 0.0)?;
        let eig = m.entries.symmetric_eigen();
        let mut pairs: Vec<(f64, Vec<Complex64>)> = (0..self.size())
            .map(|j| (eig.eigenvalues[j], eig.eigenvectors.column(j).iter().copied().collect()))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(pairs)
    }
}

/// One-shot assembly of `H0(k) − λ`.
pub fn assemble(
    basis: &PlaneWaveBasis,
    q: &FourierPotential,
    k: &[Complex64],
    lambda: Complex64,
) -> Result<BlochMatrix> {
    BlochFamily::new(basis.clone(), q.clone())?.matrix(k, lambda)
}

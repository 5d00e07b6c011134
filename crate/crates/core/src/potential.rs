//! Periodic potentials on the unit cell `[0,1]^n` with lattice `Z^n`, stored
//! as finitely supported Fourier coefficients `q(x) = Σ q̂(m) e^{2πi m·x}`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::{fft_nd, signed_frequency, unravel};

/// Relative tolerance used when enforcing `q̂(−m) = conj q̂(m)`.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// A real periodic potential given by its lattice Fourier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierPotential {
    dim: usize,
    coeffs: BTreeMap<Vec<i64>, Complex64>,
}

impl FourierPotential {
    /// Builds a potential from `(m, q̂(m))` entries. Entries with the same
    /// lattice vector are summed; the result is symmetrized so that it
    /// describes a real function. Entries that are not conjugate-symmetric
    /// beyond [`SYMMETRY_TOL`] are rejected as a complex-valued potential.
    pub fn new(dim: usize, entries: impl IntoIterator<Item = (Vec<i64>, Complex64)>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return invalid(format!("dimension must be 1, 2 or 3 (got {dim})"));
        }
        let mut raw: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
        for (m, c) in entries {
            if m.len() != dim {
                return Err(Error::DimMismatch { expected: dim, found: m.len() });
            }
            if !c.re.is_finite() || !c.im.is_finite() {
                return invalid("non-finite Fourier coefficient");
            }
            *raw.entry(m).or_default() += c;
        }
        let scale = raw.values().map(|c| c.norm()).fold(1.0, f64::max);
        let mut coeffs = BTreeMap::new();
        for (m, c) in &raw {
            let neg: Vec<i64> = m.iter().map(|v| -v).collect();
            let mirror = raw.get(&neg).copied().unwrap_or_default();
            if (c - mirror.conj()).norm() > SYMMETRY_TOL * scale {
                return invalid(format!(
                    "coefficients at {m:?} and its mirror are not conjugate; complex-valued potentials are not supported"
                ));
            }
            let sym = 0.5 * (c + mirror.conj());
            if sym.norm() > 0.0 {
                coeffs.insert(m.clone(), sym);
            }
        }
        Ok(Self { dim, coeffs })
    }

    /// The zero potential.
    pub fn free(dim: usize) -> Result<Self> {
        Self::new(dim, std::iter::empty())
    }

    /// Constant potential `q(x) = c`.
    pub fn constant(dim: usize, c: f64) -> Result<Self> {
        Self::new(dim, [(vec![0; dim], Complex64::new(c, 0.0))])
    }

    /// One-dimensional Mathieu potential `q(x) = a·2cos(2πx)`.
    pub fn mathieu(a: f64) -> Self {
        Self::new(
            1,
            [(vec![1], Complex64::new(a, 0.0)), (vec![-1], Complex64::new(a, 0.0))],
        )
        .expect("Mathieu coefficients are symmetric")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coefficient `q̂(m)`, zero outside the support.
    pub fn coeff(&self, m: &[i64]) -> Complex64 {
        self.coeffs.get(m).copied().unwrap_or_default()
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&Vec<i64>, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest `‖m‖∞` carrying a nonzero coefficient.
    pub fn support_radius(&self) -> i64 {
        self.coeffs
            .keys()
            .map(|m| m.iter().map(|v| v.abs()).max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    /// Mean value `q̂(0)`.
    pub fn mean(&self) -> f64 {
        self.coeff(&vec![0; self.dim]).re
    }

    /// `Σ_{m≠0} |q̂(m)|`, a bound on the oscillating part.
    pub fn oscillation_bound(&self) -> f64 {
        self.coeffs
            .iter()
            .filter(|(m, _)| m.iter().any(|&v| v != 0))
            .map(|(_, c)| c.norm())
            .sum()
    }

    /// A value guaranteed to lie below `inf q`, hence below the spectrum.
    pub fn lower_bound(&self) -> f64 {
        self.mean() - self.oscillation_bound()
    }

    /// Returns `q + c`.
    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        let zero = vec![0; self.dim];
        let v = out.coeff(&zero) + c;
        if v.norm() > 0.0 {
            out.coeffs.insert(zero, v);
        } else {
            out.coeffs.remove(&zero);
        }
        out
    }

    /// Evaluates the (complex) trigonometric sum at `x`.
    pub fn evaluate_complex(&self, x: &[f64]) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(m, c)| {
                let phase: f64 = m.iter().zip(x).map(|(&mi, &xi)| mi as f64 * xi).sum();
                c * Complex64::from_polar(1.0, 2.0 * PI * phase)
            })
            .sum()
    }

    /// Evaluates `q(x)`; the imaginary round-off residue is discarded.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.evaluate_complex(x).re
    }

    /// Values on the uniform grid `x = i/n` per axis, row-major, last axis fastest.
    pub fn sample_grid(&self, n: usize) -> Vec<f64> {
        (0..n.pow(self.dim as u32))
            .map(|flat| {
                let x: Vec<f64> = unravel(flat, n, self.dim)
                    .into_iter()
                    .map(|i| i as f64 / n as f64)
                    .collect();
                self.evaluate(&x)
            })
            .collect()
    }

    /// Discrete Fourier coefficients of real samples on the uniform grid
    /// with `n = samples.len()^(1/dim)` points per axis.
    pub fn from_samples(samples: &[f64], dim: usize) -> Result<Self> {
        let cs: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self::from_complex_samples(&cs, dim)
    }

    /// As [`from_samples`](Self::from_samples), rejecting samples whose
    /// imaginary part is not negligible.
    pub fn from_complex_samples(samples: &[Complex64], dim: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return invalid(format!("dimension must be 1, 2 or 3 (got {dim})"));
        }
        if samples.is_empty() {
            return invalid("empty sample grid");
        }
        let n = (samples.len() as f64).powf(1.0 / dim as f64).round() as usize;
        if n.pow(dim as u32) != samples.len() {
            return invalid(format!(
                "{} samples do not form a cubic grid in dimension {dim}",
                samples.len()
            ));
        }
        let scale = samples.iter().map(|c| c.norm()).fold(1.0, f64::max);
        if samples.iter().any(|c| c.im.abs() > 1e-10 * scale) {
            return invalid("samples are not real; complex-valued potentials are not supported");
        }
        if samples.iter().any(|c| !c.re.is_finite()) {
            return invalid("non-finite sample");
        }
        let mut data: Vec<Complex64> = samples.iter().map(|c| Complex64::new(c.re, 0.0)).collect();
        fft_nd(&mut data, n, dim, false);
        let norm = 1.0 / samples.len() as f64;
        let mut entries: Vec<(Vec<i64>, Complex64)> = Vec::new();
        for (flat, v) in data.iter().enumerate() {
            let idx = unravel(flat, n, dim);
            // Nyquist bins are split evenly between +n/2 and −n/2 so the
            // resulting coefficient set stays conjugate-symmetric.
            let mut variants: Vec<Vec<i64>> = vec![Vec::with_capacity(dim)];
            for &j in &idx {
                let f = signed_frequency(j, n);
                let options: Vec<i64> = if n % 2 == 0 && j == n / 2 { vec![f, -f] } else { vec![f] };
                variants = variants
                    .into_iter()
                    .flat_map(|prefix| {
                        options.iter().map(move |&o| {
                            let mut p = prefix.clone();
                            p.push(o);
                            p
                        })
                    })
                    .collect();
            }
            let share = 1.0 / variants.len() as f64;
            for m in variants {
                entries.push((m, v * norm * share));
            }
        }
        let max = entries.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max);
        let cut = 1e-13 * max.max(1.0);
        Self::new(dim, entries.into_iter().filter(|(_, c)| c.norm() > cut))
    }

    pub fn to_file(&self) -> PotentialFile {
        PotentialFile {
            dim: self.dim,
            entries: self.coeffs.iter().map(|(m, c)| (m.clone(), c.re, c.im)).collect(),
        }
    }

    pub fn from_file(file: &PotentialFile) -> Result<Self> {
        Self::new(
            file.dim,
            file.entries.iter().map(|(m, re, im)| (m.clone(), Complex64::new(*re, *im))),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: PotentialFile = serde_json::from_str(&text)?;
        Self::from_file(&file)
    }

    /// Parses a preset: `free`, `const:c`, `mathieu:a`, `mathieu2d:a,b`,
    /// `mathieu3d:a,b,c` or `file:<path>`. `dim` is used by presets that
    /// do not fix their own dimension.
    pub fn parse_preset(spec: &str, dim: usize) -> Result<Self> {
        let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
        let nums = || -> Result<Vec<f64>> {
            args.split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidInput(format!("bad number '{s}' in potential '{spec}'")))
                })
                .collect()
        };
        match name {
            "free" => Self::free(dim),
            "const" => {
                let v = nums()?;
                if v.len() != 1 {
                    return invalid("const preset takes one value");
                }
                Self::constant(dim, v[0])
            }
            "mathieu" => {
                let v = nums()?;
                if v.len() != 1 {
                    return invalid("mathieu preset takes one amplitude");
                }
                Ok(Self::mathieu(v[0]))
            }
            "mathieu2d" | "mathieu3d" => {
                let v = nums()?;
                let want = if name == "mathieu2d" { 2 } else { 3 };
                if v.len() != want {
                    return invalid(format!("{name} preset takes {want} amplitudes"));
                }
                SeparablePotential::new(v.iter().map(|&a| Self::mathieu(a)).collect())?.tensor_sum()
            }
            "file" => Self::load(Path::new(args)),
            _ => invalid(format!("unknown potential preset '{spec}'")),
        }
    }
}

/// On-disk description: `{"dim": 1, "entries": [[[m...], re, im], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialFile {
    pub dim: usize,
    pub entries: Vec<(Vec<i64>, f64, f64)>,
}

/// `q(x) = Σ_i q_i(x_{block i})` with coordinate blocks in order.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparablePotential {
    parts: Vec<FourierPotential>,
}

impl SeparablePotential {
    pub fn new(parts: Vec<FourierPotential>) -> Result<Self> {
        if parts.is_empty() {
            return invalid("separable potential needs at least one part");
        }
        let total: usize = parts.iter().map(|p| p.dim()).sum();
        if total > 3 {
            return Err(Error::DimMismatch { expected: 3, found: total });
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[FourierPotential] {
        &self.parts
    }

    pub fn dim(&self) -> usize {
        self.parts.iter().map(|p| p.dim()).sum()
    }

    /// The full-lattice potential. Coefficients live on the coordinate
    /// block sublattices; the constant terms add up at the origin.
    pub fn tensor_sum(&self) -> Result<FourierPotential> {
        let dim = self.dim();
        let mut entries = Vec::new();
        let mut offset = 0;
        for part in &self.parts {
            for (m, c) in part.coeffs() {
                let mut full = vec![0; dim];
                full[offset..offset + part.dim()].copy_from_slice(m);
                entries.push((full, *c));
            }
            offset += part.dim();
        }
        FourierPotential::new(dim, entries)
    }
}

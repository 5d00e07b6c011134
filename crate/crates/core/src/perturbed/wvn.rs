//! Slowly decaying oscillatory perturbations with an eigenvalue inside a
//! band, built from a real Bloch solution `s` at the target energy:
//! `u = s·f(g)`, `g(x) = ∫₀ˣ s²`, and `v` chosen so that
//! `−u″ + (q + v)u = λu` holds identically.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::band_structure::{in_spectrum, BrillouinGrid, SpectrumVerdict};
use crate::error::{invalid, Error, Result};
use crate::hill::HillPotential;
use crate::plane_wave::{BlochFamily, PlaneWaveBasis};
use crate::potential::FourierPotential;

/// Largest accepted `sup |v|` before the construction is declared failed.
const V_BOUND: f64 = 1e6;

/// Envelope `f(g)`, described through `φ = log f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Envelope {
    /// `f = 1/(1 + β²g²)`: `v = O(1/|x|)`, `u = O(1/x²)`.
    Classical { beta: f64 },
    /// `f = exp(−β((1 + g²)^{γ/2} − 1))`: `v = O(|x|^{γ−1})`,
    /// `u ~ exp(−c|x|^γ)`.
    Stretched { beta: f64, gamma: f64 },
}

impl Envelope {
    /// `(φ, φ′, φ″)` at `g`.
    fn log_derivs(&self, g: f64) -> (f64, f64, f64) {
        match *self {
            Envelope::Classical { beta } => {
                let b2 = beta * beta;
                let d = 1.0 + b2 * g * g;
                (-d.ln(), -2.0 * b2 * g / d, -2.0 * b2 * (1.0 - b2 * g * g) / (d * d))
            }
            Envelope::Stretched { beta, gamma } => {
                let w = 1.0 + g * g;
                let phi = -beta * (w.powf(gamma / 2.0) - 1.0);
                let d1 = -beta * gamma * g * w.powf(gamma / 2.0 - 1.0);
                let d2 = -beta * gamma * w.powf(gamma / 2.0 - 2.0) * (1.0 + (gamma - 1.0) * g * g);
                (phi, d1, d2)
            }
        }
    }

    /// Algebraic decay rate of the resulting `v`.
    pub fn v_decay_rate(&self) -> f64 {
        match *self {
            Envelope::Classical { .. } => 1.0,
            Envelope::Stretched { gamma, .. } => 1.0 - gamma,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Envelope::Classical { beta } => beta > 0.0,
            Envelope::Stretched { beta, gamma } => beta > 0.0 && gamma > 0.0 && gamma < 1.0,
        };
        if ok { Ok(()) } else { invalid(format!("bad envelope parameters {self:?}")) }
    }
}

impl Default for Envelope {
    fn default() -> Self {
        Envelope::Stretched { beta: 3.0, gamma: 2.0 / 3.0 }
    }
}

/// A constructed pair `(u, v)` with `(−Δ + q + v)u = λu` on the line.
#[derive(Debug, Clone)]
pub struct WvnConstruction {
    /// Eigenvalue of the construction: the band value at `k`, within 1e-8 of the target.
    pub lambda: f64,
    pub target: f64,
    pub k: f64,
    pub band: usize,
    pub envelope: Envelope,
    /// Bloch solution `ψ(x) = Σ c_m e^{i(k+2πm)x}`, `s = Re ψ`.
    modes: Vec<(f64, Complex64)>,
    /// `s² = Σ a_j cos(ω_j x) + b_j sin(ω_j x)` plus `mean`.
    sq_terms: Vec<(f64, f64, f64)>,
    sq_mean: f64,
    background: HillPotential,
    pub sup_v: f64,
    /// `‖(−Δ + q + v − λ)u‖/‖u‖` with analytic derivatives on the check grid.
    pub residual: f64,
}

impl WvnConstruction {
    /// `(s, s′, s″)`.
    fn s(&self, x: f64) -> (f64, f64, f64) {
        let (mut s, mut d1, mut d2) = (0.0, 0.0, 0.0);
        for &(w, c) in &self.modes {
            let e = c * Complex64::from_polar(1.0, w * x);
            s += e.re;
            d1 += (e * Complex64::new(0.0, w)).re;
            d2 -= w * w * e.re;
        }
        (s, d1, d2)
    }

    /// `g(x) = ∫₀ˣ s²`.
    pub fn g(&self, x: f64) -> f64 {
        let mut g = self.sq_mean * x;
        for &(w, a, b) in &self.sq_terms {
            g += a * (w * x).sin() / w + b * (1.0 - (w * x).cos()) / w;
        }
        g
    }

    pub fn u(&self, x: f64) -> f64 {
        let (s, _, _) = self.s(x);
        s * self.envelope.log_derivs(self.g(x)).0.exp()
    }

    pub fn v(&self, x: f64) -> f64 {
        let (s, s1, _) = self.s(x);
        let (_, p1, p2) = self.envelope.log_derivs(self.g(x));
        4.0 * s * s1 * p1 + s.powi(4) * (p2 + p1 * p1)
    }

    /// `−u″ + (q + v − λ)u` from analytic derivatives.
    fn equation_defect(&self, x: f64) -> (f64, f64) {
        let (s, s1, s2) = self.s(x);
        let g = self.g(x);
        let (phi, p1, p2) = self.envelope.log_derivs(g);
        let f = phi.exp();
        let (fp, fpp) = (p1 * f, (p2 + p1 * p1) * f);
        let u = s * f;
        let upp = s2 * f + 4.0 * s * s * s1 * fp + s.powi(5) * fpp;
        (-upp + (self.background.eval(x) + self.v(x) - self.lambda) * u, u)
    }
}

/// Builds the construction at a target energy strictly inside a band of the
/// 1D background, checking the defect on `[−check_half_width, check_half_width]`.
pub fn make_wvn(q: &FourierPotential, target: f64, envelope: Envelope, check_half_width: f64) -> Result<WvnConstruction> {
    if q.dim() != 1 {
        return Err(Error::DimMismatch { expected: 1, found: q.dim() });
    }
    envelope.validate()?;
    let family = BlochFamily::new(PlaneWaveBasis::new(1, PlaneWaveBasis::default_cutoff(1))?, q.clone())?;
    let verdict = in_spectrum(&family, target, &BrillouinGrid::new(1, BrillouinGrid::default_resolution(1))?)?;
    let SpectrumVerdict::InsideBandInterior { band, witness, .. } = verdict else {
        return invalid(format!("target {target} is not inside a band interior ({verdict:?})"));
    };
    let k = witness[0];
    let pairs = family.eigenpairs(&witness)?;
    let (lambda, coeffs) = pairs[band - 1].clone();
    // Phase so that ψ(0) is real and positive.
    let psi0: Complex64 = coeffs.iter().sum();
    if psi0.norm() < 1e-8 {
        return Err(Error::ConstructionFailure("Bloch solution vanishes at the origin".into()));
    }
    let rot = psi0.conj() / psi0.norm();
    let idx = family.basis().indices();
    let modes: Vec<(f64, Complex64)> = idx
        .iter()
        .zip(&coeffs)
        .map(|(m, c)| (k + 2.0 * std::f64::consts::PI * m[0] as f64, c * rot))
        .filter(|(_, c)| c.norm() > 0.0)
        .collect();

    // s² = ½ Re ψ² + ½ |ψ|², both finite exponential sums.
    let mut by_freq: Vec<(f64, Complex64)> = Vec::new();
    let mut push = |w: f64, c: Complex64| {
        if let Some(e) = by_freq.iter_mut().find(|(x, _)| (x - w).abs() < 1e-12) {
            e.1 += c;
        } else {
            by_freq.push((w, c));
        }
    };
    for &(w1, c1) in &modes {
        for &(w2, c2) in &modes {
            push(w1 + w2, 0.5 * c1 * c2);
            push(w1 - w2, 0.5 * c1 * c2.conj());
        }
    }
    // Re Σ c e^{iωx} = Σ Re c cos ωx − Im c sin ωx; fold ±ω together.
    let mut sq_mean = 0.0;
    let mut sq_terms: Vec<(f64, f64, f64)> = Vec::new();
    for (w, c) in by_freq {
        if w.abs() < 1e-12 {
            sq_mean += c.re;
            continue;
        }
        let (w, a, b) = if w > 0.0 { (w, c.re, -c.im) } else { (-w, c.re, c.im) };
        if let Some(e) = sq_terms.iter_mut().find(|(x, _, _)| (x - w).abs() < 1e-12) {
            e.1 += a;
            e.2 += b;
        } else {
            sq_terms.push((w, a, b));
        }
    }
    if sq_mean <= 0.0 {
        return Err(Error::ConstructionFailure("Bloch solution has no mean square".into()));
    }

    let mut out = WvnConstruction {
        lambda,
        target,
        k,
        band,
        envelope,
        modes,
        sq_terms,
        sq_mean,
        background: HillPotential::new(q)?,
        sup_v: 0.0,
        residual: f64::INFINITY,
    };
    let n = (2.0 * check_half_width / 0.01).ceil() as usize;
    let (mut num, mut den, mut sup) = (0.0, 0.0, 0.0f64);
    for i in 0..=n {
        let x = -check_half_width + i as f64 * 0.01;
        let (d, u) = out.equation_defect(x);
        num += d * d;
        den += u * u;
        sup = sup.max(out.v(x).abs());
    }
    if !sup.is_finite() || sup > V_BOUND {
        return Err(Error::ConstructionFailure(format!("perturbation is not bounded (sup |v| = {sup:e})")));
    }
    out.sup_v = sup;
    out.residual = (num / den).sqrt();
    Ok(out)
}

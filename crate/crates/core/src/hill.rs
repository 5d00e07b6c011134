//! One-dimensional Hill operator `−u″ + q u = λ u`: monodromy matrix,
//! discriminant, band intervals and Floquet exponents.
//!
//! This is the independent 1D oracle for the plane-wave code. Band edges
//! are located on `det(M(λ) ∓ I)` rather than on `D(λ) ∓ 2`. Both vanish at
//! the same λ, but the determinant form is computed from the small entries
//! of `M ∓ I` directly and keeps gaps of width ~1e-6 resolvable, where
//! `D − 2` has already lost them to cancellation.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::{brent_with_values, golden_min};
use crate::potential::FourierPotential;

/// Default relative tolerance of the monodromy integrator.
pub const DEFAULT_TOL: f64 = 1e-12;

type State = [Complex64; 4];

/// Fundamental matrix over one period. Column 0 starts from `(u, u′) = (1, 0)`,
/// column 1 from `(0, 1)`; rows are `u(1)` and `u′(1)`.
#[derive(Debug, Clone, Copy)]
pub struct Monodromy {
    pub lambda: Complex64,
    pub matrix: [[Complex64; 2]; 2],
    pub tol: f64,
}

impl Monodromy {
    pub fn trace(&self) -> Complex64 {
        self.matrix[0][0] + self.matrix[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.matrix[0][0] * self.matrix[1][1] - self.matrix[0][1] * self.matrix[1][0]
    }

    /// Max-norm of `M − s·I`.
    pub fn shifted_norm(&self, s: f64) -> f64 {
        [
            (self.matrix[0][0] - s).norm(),
            self.matrix[0][1].norm(),
            self.matrix[1][0].norm(),
            (self.matrix[1][1] - s).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// `det(M − s·I)` for `s = ±1`; equals `2 − s·D` when `det M = 1`.
    pub fn shifted_det(&self, s: f64) -> Complex64 {
        (self.matrix[0][0] - s) * (self.matrix[1][1] - s) - self.matrix[0][1] * self.matrix[1][0]
    }
}

/// `q` prepared for fast pointwise evaluation on the real line.
#[derive(Debug, Clone)]
pub struct HillPotential {
    mean: f64,
    // (2πm, q̂(m)) for m > 0; q(x) = mean + Σ 2 Re(q̂(m) e^{2πimx}).
    modes: Vec<(f64, Complex64)>,
    lower_bound: f64,
}

impl HillPotential {
    pub fn new(q: &FourierPotential) -> Result<Self> {
        if q.dim() != 1 {
            return Err(Error::DimMismatch { expected: 1, found: q.dim() });
        }
        let modes = q
            .coeffs()
            .filter(|(m, _)| m[0] > 0)
            .map(|(m, c)| (2.0 * PI * m[0] as f64, *c))
            .collect();
        Ok(Self { mean: q.mean(), modes, lower_bound: q.lower_bound() })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.mean
            + self
                .modes
                .iter()
                .map(|(w, c)| 2.0 * (c.re * (w * x).cos() - c.im * (w * x).sin()))
                .sum::<f64>()
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn rhs(q: &HillPotential, lambda: Complex64, x: f64, y: &State) -> State {
    let w = q.eval(x) - lambda;
    [y[1], w * y[0], y[3], w * y[2]]
}

/// Integrates both fundamental solutions over `[0, 1]` with an adaptive
/// Dormand–Prince pair.
pub fn monodromy_with(q: &HillPotential, lambda: Complex64, tol: f64) -> Result<Monodromy> {
    if !(1e-13..=1e-6).contains(&tol) {
        return invalid(format!("integration tolerance {tol} outside [1e-13, 1e-6]"));
    }
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut y: State = [one, zero, zero, one];
    let mut x = 0.0;
    let scale = (lambda.norm() + q.lower_bound().abs() + 1.0).sqrt();
    let mut h = (0.05 / scale).min(0.1);
    let atol = tol * 1e-3;
    let mut k = [[zero; 4]; 7];
    k[0] = rhs(q, lambda, x, &y);
    let mut steps = 0usize;
    while x < 1.0 {
        if x + h > 1.0 {
            h = 1.0 - x;
        }
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for c in 0..4 {
                        ys[c] += kj[c] * (h * a);
                    }
                }
            }
            k[s] = rhs(q, lambda, x + C[s] * h, &ys);
        }
        let mut y5 = y;
        let mut err: f64 = 0.0;
        for c in 0..4 {
            let mut d5 = zero;
            let mut d4 = zero;
            for s in 0..7 {
                d5 += k[s][c] * B5[s];
                d4 += k[s][c] * B4[s];
            }
            y5[c] += d5 * h;
            let sc = atol + tol * y[c].norm().max(y5[c].norm());
            err = err.max(((d5 - d4) * h).norm() / sc);
        }
        if err <= 1.0 {
            x += h;
            y = y5;
            k[0] = k[6];
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        steps += 1;
        if h < 1e-14 || steps > 2_000_000 {
            return Err(Error::IntegrationFailure { x, lambda: lambda.to_string() });
        }
    }
    Ok(Monodromy { lambda, matrix: [[y[0], y[2]], [y[1], y[3]]], tol })
}

pub fn monodromy(q: &FourierPotential, lambda: Complex64, tol: f64) -> Result<Monodromy> {
    monodromy_with(&HillPotential::new(q)?, lambda, tol)
}

/// Hill discriminant `D(λ) = tr M(λ)`.
pub fn discriminant(q: &FourierPotential, lambda: Complex64) -> Result<Complex64> {
    Ok(monodromy(q, lambda, DEFAULT_TOL)?.trace())
}

/// Principal `k` with `2cos k = w`: `Re k ∈ [0, 2π)`, `Im k ≥ 0`.
pub fn principal_arccos_half(w: Complex64) -> Complex64 {
    let mut k = (w * 0.5).acos();
    if k.im < 0.0 {
        k = -k;
    }
    if k.re < 0.0 {
        k.re += 2.0 * PI;
    }
    if k.re >= 2.0 * PI {
        k.re -= 2.0 * PI;
    }
    if k.re == -0.0 {
        k.re = 0.0;
    }
    k
}

/// Floquet exponent `k` with `2cos k = D(λ)`, principal determination.
pub fn floquet_exponent(q: &FourierPotential, lambda: Complex64) -> Result<Complex64> {
    Ok(principal_arccos_half(discriminant(q, lambda)?))
}

/// A closed interval `[lo, hi]`; `lo` may be `−∞` for the gap below the spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Bands and gaps of a Hill operator up to `lambda_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HillSpectrum {
    pub bands: Vec<Interval>,
    /// Open gaps, the first being `(−∞, a_1)`. A gap still open at
    /// `lambda_max` is truncated there.
    pub gaps: Vec<Interval>,
    pub lambda_max: f64,
}

#[derive(Clone, Copy)]
struct Sample {
    lambda: f64,
    d: f64,
    f_plus: f64,
    f_minus: f64,
    // Round-off floor of f±: integrator error times ‖M ∓ I‖.
    floor_plus: f64,
    floor_minus: f64,
}

impl Sample {
    fn f(&self, sign: f64) -> f64 {
        if sign > 0.0 {
            self.f_plus
        } else {
            self.f_minus
        }
    }

    /// Strictly outside the band, beyond numerical noise.
    fn outside(&self, sign: f64) -> bool {
        let floor = if sign > 0.0 { self.floor_plus } else { self.floor_minus };
        self.f(sign) < -floor
    }
}

/// Spectral bands `|D(λ)| ≤ 2` below `lambda_max` with edges refined to
/// ~1e-12.
pub fn bands_1d(q: &FourierPotential, lambda_max: f64) -> Result<Vec<Interval>> {
    Ok(spectrum_1d(q, lambda_max)?.bands)
}

pub fn spectrum_1d(q: &FourierPotential, lambda_max: f64) -> Result<HillSpectrum> {
    let hp = HillPotential::new(q)?;
    let lo = hp.lower_bound() - 1.0;
    if !(lambda_max > lo) {
        return invalid(format!("lambda_max {lambda_max} lies below the spectrum"));
    }
    let tol = DEFAULT_TOL;
    let eval = |lambda: f64| -> Result<Sample> {
        let m = monodromy_with(&hp, Complex64::new(lambda, 0.0), tol)?;
        let eps = 100.0 * tol;
        Ok(Sample {
            lambda,
            d: m.trace().re,
            f_plus: m.shifted_det(1.0).re,
            f_minus: m.shifted_det(-1.0).re,
            floor_plus: eps * m.shifted_norm(1.0) + eps * eps,
            floor_minus: eps * m.shifted_norm(-1.0) + eps * eps,
        })
    };

    // Scan with step 0.1, refined wherever D moves by more than 0.5.
    let coarse = ((lambda_max - lo) / 0.1).ceil().max(2.0) as usize;
    let mut samples: Vec<Sample> = Vec::with_capacity(coarse + 1);
    let mut prev = eval(lo)?;
    samples.push(prev);
    for i in 1..=coarse {
        let next = eval(lo + (lambda_max - lo) * i as f64 / coarse as f64)?;
        refine_between(&eval, prev, next, &mut samples, 0)?;
        samples.push(next);
        prev = next;
    }

    // Gap seeds: sampled points outside |D| ≤ 2 and refined extrema of D
    // close to ±2 (thin gaps hide between samples).
    let mut seeds: Vec<(usize, Sample, f64)> = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        for sign in [1.0, -1.0] {
            if s.outside(sign) {
                seeds.push((i, *s, sign));
            }
        }
    }
    for i in 1..samples.len() - 1 {
        let (a, b, c) = (samples[i - 1], samples[i], samples[i + 1]);
        for sign in [1.0, -1.0] {
            let is_ext = sign * b.d >= sign * a.d && sign * b.d >= sign * c.d && sign * b.d > 1.0;
            if !is_ext || b.outside(sign) {
                continue;
            }
            let mut fail = None;
            let (arg, val) = golden_min(
                |l| match eval(l) {
                    Ok(s) => s.f(sign),
                    Err(e) => {
                        fail.get_or_insert(e);
                        f64::INFINITY
                    }
                },
                a.lambda,
                c.lambda,
                1e-11 * (1.0 + b.lambda.abs()),
            );
            if let Some(e) = fail {
                return Err(e);
            }
            if val < 0.0 {
                let s = eval(arg)?;
                if s.outside(sign) {
                    let idx = if arg < b.lambda { i - 1 } else { i };
                    seeds.push((idx, s, sign));
                }
            }
        }
    }

    // Each seed grows into a gap: walk to the nearest samples with f ≥ 0
    // and bisect the edges.
    let xtol = 1e-13;
    let mut gaps: Vec<Interval> = Vec::new();
    for (idx, seed, sign) in seeds {
        let left_pos = (0..=idx).rev().find(|&j| samples[j].f(sign) >= 0.0 && samples[j].lambda < seed.lambda);
        let right_pos = (idx..samples.len()).find(|&j| samples[j].f(sign) >= 0.0 && samples[j].lambda > seed.lambda);
        let edge = |outer: Sample| -> Result<f64> {
            let mut fail = None;
            let mut f = |l: f64| match eval(l) {
                Ok(s) => s.f(sign),
                Err(e) => {
                    fail.get_or_insert(e);
                    0.0
                }
            };
            let r = brent_with_values(&mut f, outer.lambda, outer.f(sign), seed.lambda, seed.f(sign), xtol);
            if let Some(e) = fail {
                return Err(e);
            }
            r.ok_or_else(|| Error::ResolutionFailure("band edge not bracketed".into()))
        };
        let gap_lo = match left_pos {
            Some(j) => edge(samples[j])?,
            None => f64::NEG_INFINITY,
        };
        let gap_hi = match right_pos {
            Some(j) => edge(samples[j])?,
            None => lambda_max,
        };
        gaps.push(Interval::new(gap_lo, gap_hi));
    }
    gaps.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut merged: Vec<Interval> = Vec::new();
    for g in gaps {
        match merged.last_mut() {
            Some(last) if g.lo <= last.hi + 1e-12 => last.hi = last.hi.max(g.hi),
            _ => merged.push(g),
        }
    }
    if merged.first().map_or(true, |g| g.lo != f64::NEG_INFINITY) {
        return Err(Error::ResolutionFailure("scan did not start below the spectrum".into()));
    }

    let mut bands = Vec::new();
    for w in merged.windows(2) {
        bands.push(Interval::new(w[0].hi, w[1].lo));
    }
    let last = merged.last().expect("non-empty");
    if last.hi < lambda_max {
        bands.push(Interval::new(last.hi, lambda_max));
    }
    Ok(HillSpectrum { bands, gaps: merged, lambda_max })
}

fn refine_between<E>(eval: &E, a: Sample, b: Sample, out: &mut Vec<Sample>, depth: usize) -> Result<()>
where
    E: Fn(f64) -> Result<Sample>,
{
    if (b.d - a.d).abs() <= 0.5 {
        return Ok(());
    }
    if b.lambda - a.lambda < 1e-6 || depth > 40 {
        return Err(Error::ResolutionFailure(format!(
            "discriminant varies too fast near lambda = {}",
            a.lambda
        )));
    }
    let m = eval(0.5 * (a.lambda + b.lambda))?;
    refine_between(eval, a, m, out, depth + 1)?;
    out.push(m);
    refine_between(eval, m, b, out, depth + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn free_monodromy_at_pi_squared() {
        let q = FourierPotential::free(1).unwrap();
        let m = monodromy(&q, c(PI * PI), 1e-12).unwrap();
        assert!((m.matrix[0][0] + 1.0).norm() < 1e-10);
        assert!((m.matrix[1][1] + 1.0).norm() < 1e-10);
        assert!(m.matrix[0][1].norm() < 1e-10);
        assert!(m.matrix[1][0].norm() < 1e-9);
    }

    #[test]
    fn free_discriminant_values() {
        let q = FourierPotential::free(1).unwrap();
        assert!((discriminant(&q, c(-1.0)).unwrap() - c(2.0 * 1f64.cosh())).norm() < 1e-10);
        assert!((discriminant(&q, c(4.0 * PI * PI)).unwrap() - c(2.0)).norm() < 1e-10);
        assert!((discriminant(&q, c(PI * PI)).unwrap() - c(-2.0)).norm() < 1e-10);
        assert!((discriminant(&q, c(0.0)).unwrap() - c(2.0)).norm() < 1e-12);
    }

    #[test]
    fn tolerance_range_enforced() {
        let q = FourierPotential::free(1).unwrap();
        assert!(monodromy(&q, c(1.0), 1e-3).is_err());
        assert!(monodromy(&q, c(1.0), 1e-15).is_err());
    }

    #[test]
    fn wronskian_is_conserved() {
        let q = FourierPotential::mathieu(1.0);
        let m = monodromy(&q, c(1.0), 1e-12).unwrap();
        assert!((m.det() - 1.0).norm() < 1e-10);
    }

    #[test]
    fn floquet_exponent_free() {
        let q = FourierPotential::free(1).unwrap();
        let k = floquet_exponent(&q, c(1.0)).unwrap();
        assert!((k - c(1.0)).norm() < 1e-9);
        let k = floquet_exponent(&q, c(-1.0)).unwrap();
        assert!((k - Complex64::new(0.0, 1.0)).norm() < 1e-9);
    }

    #[test]
    fn principal_branch_rules() {
        for w in [c(3.0), c(-3.0), c(0.4), Complex64::new(0.3, -0.8), Complex64::new(-1.0, 2.0)] {
            let k = principal_arccos_half(w);
            assert!(k.im >= 0.0 && (0.0..2.0 * PI).contains(&k.re), "{k}");
            assert!((2.0 * k.cos() - w).norm() < 1e-12);
        }
        assert!((principal_arccos_half(c(-3.0)).re - PI).abs() < 1e-12);
        assert!(principal_arccos_half(c(3.0)).re.abs() < 1e-12);
    }

    #[test]
    fn free_spectrum_has_no_gaps() {
        let q = FourierPotential::free(1).unwrap();
        let b = bands_1d(&q, 100.0).unwrap();
        assert_eq!(b.len(), 1);
        assert!(b[0].lo.abs() < 1e-9 && b[0].hi == 100.0);
    }

    #[test]
    fn constant_shifts_spectrum() {
        let q = FourierPotential::constant(1, 2.5).unwrap();
        let b = bands_1d(&q, 100.0).unwrap();
        assert_eq!(b.len(), 1);
        assert!((b[0].lo - 2.5).abs() < 1e-9);
    }

    #[test]
    fn lambda_max_below_spectrum_rejected() {
        assert!(bands_1d(&FourierPotential::mathieu(1.0), -10.0).is_err());
    }
}

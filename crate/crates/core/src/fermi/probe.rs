//! Zeros of `z ↦ det(H0(k0 + z·e_j) − λ)` inside a rectangle of the complex
//! plane: winding-number counts and polished roots.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::wrap_phase;
use crate::plane_wave::{BlochFamily, LogDet};

const SAMPLES_PER_SIDE: usize = 64;
const RETRIES: usize = 5;
const PERTURBATION: f64 = 1e-3;
/// Largest accepted distance of the winding number from an integer.
const INTEGRALITY_TOL: f64 = 1e-6;
const NEWTON_H: f64 = 1e-6;
/// Root residual bound: size of the last Newton step.
pub const ROOT_TOL: f64 = 1e-9;

/// `[re0, re1] × [im0, im1]` in the complex `z` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub re0: f64,
    pub re1: f64,
    pub im0: f64,
    pub im1: f64,
}

impl Rect {
    pub fn new(re0: f64, re1: f64, im0: f64, im1: f64) -> Result<Self> {
        if !(re0 < re1 && im0 < im1) || ![re0, re1, im0, im1].iter().all(|v| v.is_finite()) {
            return invalid(format!("degenerate rectangle [{re0}, {re1}] x [{im0}, {im1}]"));
        }
        Ok(Self { re0, re1, im0, im1 })
    }

    pub fn expanded(&self, d: f64) -> Self {
        Self { re0: self.re0 - d, re1: self.re1 + d, im0: self.im0 - d, im1: self.im1 + d }
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re0 + self.re1), 0.5 * (self.im0 + self.im1))
    }

    pub fn diameter(&self) -> f64 {
        (self.re1 - self.re0).hypot(self.im1 - self.im0)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.re0 <= z.re && z.re <= self.re1 && self.im0 <= z.im && z.im <= self.im1
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re0, self.im0),
            Complex64::new(self.re1, self.im0),
            Complex64::new(self.re1, self.im1),
            Complex64::new(self.re0, self.im1),
        ]
    }

    /// Splits the longer side at fraction `t`.
    fn split(&self, t: f64) -> (Rect, Rect) {
        if self.re1 - self.re0 >= self.im1 - self.im0 {
            let c = self.re0 + t * (self.re1 - self.re0);
            (Rect { re1: c, ..*self }, Rect { re0: c, ..*self })
        } else {
            let c = self.im0 + t * (self.im1 - self.im0);
            (Rect { im1: c, ..*self }, Rect { im0: c, ..*self })
        }
    }
}

/// Complex line `k = k0 + z·e_axis` with `k0` real and `k0[axis] = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexLineProbe {
    pub k0: Vec<f64>,
    pub axis: usize,
    pub rect: Rect,
}

impl ComplexLineProbe {
    pub fn new(k0: Vec<f64>, axis: usize, rect: Rect) -> Result<Self> {
        if axis >= k0.len() {
            return invalid(format!("probe axis {axis} out of range for dimension {}", k0.len()));
        }
        if k0[axis] != 0.0 {
            return invalid("base point must vanish on the probe axis");
        }
        Ok(Self { k0, axis, rect })
    }

    /// Parses `"j,re0,re1,im0,im1"` with base point 0.
    pub fn parse(spec: &str, dim: usize) -> Result<Self> {
        let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
        if parts.len() != 5 {
            return invalid(format!("probe must be j,re0,re1,im0,im1 (got {spec:?})"));
        }
        let axis: usize = parts[0].parse().map_err(|_| Error::InvalidInput(format!("bad probe axis {:?}", parts[0])))?;
        let v = parts[1..]
            .iter()
            .map(|p| p.parse::<f64>().map_err(|_| Error::InvalidInput(format!("bad probe bound {p:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(vec![0.0; dim], axis, Rect::new(v[0], v[1], v[2], v[3])?)
    }

    pub fn point(&self, z: Complex64) -> Vec<Complex64> {
        let mut k: Vec<Complex64> = self.k0.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        k[self.axis] += z;
        k
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroCount {
    pub count: usize,
    /// Raw winding number before rounding.
    pub winding: f64,
    /// Rectangle actually used, after any perturbation.
    pub rect: Rect,
    pub retries: usize,
    pub evaluations: usize,
}

struct Line<'a> {
    family: &'a BlochFamily,
    lambda: Complex64,
    probe: &'a ComplexLineProbe,
    evaluations: usize,
}

impl Line<'_> {
    fn log_det(&mut self, z: Complex64) -> Result<LogDet> {
        self.evaluations += 1;
        self.family.log_det(&self.probe.point(z), self.lambda)
    }

    /// Phase increment along `[za, zb]`, subdividing until successive
    /// samples differ by less than π/2 and agree with the midpoint. `None`
    /// signals a zero on or next to the path.
    fn phase_change(&mut self, za: Complex64, pa: &LogDet, zb: Complex64, pb: &LogDet) -> Result<Option<f64>> {
        if !pa.log_abs.is_finite() || !pb.log_abs.is_finite() {
            return Ok(None);
        }
        let d = wrap_phase(pb.phase - pa.phase);
        let zm = 0.5 * (za + zb);
        let pm = self.log_det(zm)?;
        if !pm.log_abs.is_finite() {
            return Ok(None);
        }
        let d1 = wrap_phase(pm.phase - pa.phase);
        let d2 = wrap_phase(pb.phase - pm.phase);
        if d.abs() < PI / 2.0 && d1.abs() < PI / 2.0 && d2.abs() < PI / 2.0 && (d1 + d2 - d).abs() < 1e-9 {
            return Ok(Some(d1 + d2));
        }
        if (zb - za).norm() < 1e-11 * (1.0 + za.norm()) {
            return Ok(None);
        }
        let Some(left) = self.phase_change(za, pa, zm, &pm)? else { return Ok(None) };
        let Some(right) = self.phase_change(zm, &pm, zb, pb)? else { return Ok(None) };
        Ok(Some(left + right))
    }

    /// Winding number of det around the rectangle, `None` on collision.
    fn winding(&mut self, rect: &Rect) -> Result<Option<f64>> {
        let corners = rect.corners();
        let mut total = 0.0;
        for side in 0..4 {
            let (a, b) = (corners[side], corners[(side + 1) % 4]);
            let mut z_prev = a;
            let mut p_prev = self.log_det(a)?;
            for s in 1..=SAMPLES_PER_SIDE {
                let z = a + (b - a) * (s as f64 / SAMPLES_PER_SIDE as f64);
                let p = self.log_det(z)?;
                match self.phase_change(z_prev, &p_prev, z, &p)? {
                    Some(d) => total += d,
                    None => return Ok(None),
                }
                z_prev = z;
                p_prev = p;
            }
        }
        Ok(Some(total / (2.0 * PI)))
    }

    /// Integral zero count inside `rect`, `None` when the boundary is too
    /// close to a zero.
    fn count(&mut self, rect: &Rect) -> Result<Option<(usize, f64)>> {
        let Some(w) = self.winding(rect)? else { return Ok(None) };
        let r = w.round();
        if (w - r).abs() > INTEGRALITY_TOL || r < 0.0 {
            return Ok(None);
        }
        Ok(Some((r as usize, w)))
    }

    /// Newton on det with a central-difference derivative. Returns the
    /// iterate and the last step length.
    fn newton(&mut self, mut z: Complex64) -> Result<(Complex64, f64)> {
        let h = Complex64::new(NEWTON_H, 0.0);
        let mut last = f64::INFINITY;
        for _ in 0..60 {
            let p0 = self.log_det(z)?;
            if !p0.log_abs.is_finite() {
                return Ok((z, 0.0));
            }
            let ratio = |p: &LogDet| Complex64::new(p.log_abs - p0.log_abs, p.phase - p0.phase).exp();
            let up = ratio(&self.log_det(z + h)?);
            let down = ratio(&self.log_det(z - h)?);
            let denom = up - down;
            if denom.norm() == 0.0 || !denom.is_finite() {
                break;
            }
            let step = 2.0 * h / denom;
            z -= step;
            last = step.norm();
            if last < 1e-14 * (1.0 + z.norm()) {
                break;
            }
        }
        Ok((z, last))
    }
}

/// Number of zeros of the Bloch determinant along the probe line inside the
/// probe rectangle, by the argument principle.
pub fn complex_zero_count(family: &BlochFamily, lambda: f64, probe: &ComplexLineProbe) -> Result<ZeroCount> {
    if probe.k0.len() != family.dim() {
        return Err(Error::DimMismatch { expected: family.dim(), found: probe.k0.len() });
    }
    let mut line = Line { family, lambda: Complex64::new(lambda, 0.0), probe, evaluations: 0 };
    for retry in 0..=RETRIES {
        let rect = probe.rect.expanded(PERTURBATION * retry as f64);
        if let Some((count, winding)) = line.count(&rect)? {
            return Ok(ZeroCount { count, winding, rect, retries: retry, evaluations: line.evaluations });
        }
    }
    Err(Error::ProbeFailure(format!(
        "boundary of {:?} stays on a zero after {RETRIES} perturbations",
        probe.rect
    )))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolishedRoot {
    /// Root in the probe coordinate.
    pub z: Complex64,
    /// Last Newton step, or the enclosing rectangle diameter when unpolished.
    pub residual: f64,
    pub polished: bool,
    /// Rectangle known to contain the root.
    pub enclosure: Rect,
}

const SPLITS: [f64; 4] = [0.5, 0.5731, 0.4387, 0.6373];

/// Roots inside the probe rectangle: recursive subdivision until each piece
/// holds one zero, then Newton. Pieces that resist isolation or Newton are
/// returned unpolished.
pub fn polish_zeros(family: &BlochFamily, lambda: f64, probe: &ComplexLineProbe) -> Result<Vec<PolishedRoot>> {
    let zc = complex_zero_count(family, lambda, probe)?;
    let mut line = Line { family, lambda: Complex64::new(lambda, 0.0), probe, evaluations: 0 };
    let mut roots = Vec::new();
    isolate(&mut line, zc.rect, zc.count, 0, &mut roots)?;
    Ok(roots)
}

fn isolate(line: &mut Line, rect: Rect, count: usize, depth: usize, out: &mut Vec<PolishedRoot>) -> Result<()> {
    if count == 0 {
        return Ok(());
    }
    if count == 1 {
        let (z, step) = line.newton(rect.center())?;
        if step < ROOT_TOL && rect.expanded(1e-9 * (1.0 + rect.diameter())).contains(z) {
            out.push(PolishedRoot { z, residual: step, polished: true, enclosure: rect });
            return Ok(());
        }
    }
    let unpolished = |out: &mut Vec<PolishedRoot>| {
        for _ in 0..count {
            out.push(PolishedRoot { z: rect.center(), residual: rect.diameter(), polished: false, enclosure: rect });
        }
    };
    if depth >= 60 || rect.diameter() < 1e-12 {
        unpolished(out);
        return Ok(());
    }
    for t in SPLITS {
        let (a, b) = rect.split(t);
        let (Some((ca, _)), Some((cb, _))) = (line.count(&a)?, line.count(&b)?) else { continue };
        if ca + cb != count {
            continue;
        }
        isolate(line, a, ca, depth + 1, out)?;
        isolate(line, b, cb, depth + 1, out)?;
        return Ok(());
    }
    unpolished(out);
    Ok(())
}

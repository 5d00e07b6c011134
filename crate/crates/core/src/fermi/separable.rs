//! Cross-check of a traced 2D Fermi curve for `q(x) = q1(x1) + q2(x2)`
//! against the Hill parametrization: `(k1, k2)` lies on the curve iff some
//! `μ` has `D1(μ) = 2cos k1` and `D2(λ − μ) = 2cos k2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::FermiTrace;
use crate::error::{Error, Result};
use crate::hill::{monodromy_with, HillPotential, DEFAULT_TOL};
use crate::numeric::{brent, golden_min};
use crate::potential::FourierPotential;

const TABLE_STEP: f64 = 0.02;
/// A local minimum of `|D1(μ) − 2cos k1|` below this counts as a (tangential) root.
const TANGENT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableCheck {
    pub max_residual: f64,
    /// Per vertex, in the order of [`FermiTrace::vertices`]; `+∞` when no
    /// `μ` branch was found.
    pub residuals: Vec<f64>,
    pub unmatched: usize,
}

struct Disc(HillPotential);

impl Disc {
    fn at(&self, mu: f64) -> f64 {
        monodromy_with(&self.0, Complex64::new(mu, 0.0), DEFAULT_TOL)
            .map(|m| m.trace().re)
            .unwrap_or(f64::NAN)
    }
}

/// Maximum and per-vertex residual `min_μ |D2(λ − μ) − 2cos k2|` over the
/// solutions `μ` of `D1(μ) = 2cos k1`.
pub fn separable_cross_check(
    q1: &FourierPotential,
    q2: &FourierPotential,
    lambda: f64,
    trace: &FermiTrace,
) -> Result<SeparableCheck> {
    if trace.dim != 2 {
        return Err(Error::DimMismatch { expected: 2, found: trace.dim });
    }
    let d1 = Disc(HillPotential::new(q1)?);
    let d2 = Disc(HillPotential::new(q2)?);
    // μ ∈ σ(H1) and λ − μ ∈ σ(H2), both bounded below by min q.
    let lo = q1.lower_bound() - 0.5;
    let hi = lambda - q2.lower_bound() + 0.5;
    let n = (((hi - lo) / TABLE_STEP).ceil() as usize).max(2);
    let mus: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let table: Vec<f64> = mus.iter().map(|&m| d1.at(m)).collect();
    if table.iter().any(|v| !v.is_finite()) {
        return Err(Error::IntegrationFailure { x: 0.0, lambda: "discriminant table".into() });
    }

    let residuals: Vec<f64> = trace
        .vertices()
        .iter()
        .map(|k| {
            let c1 = 2.0 * k[0].cos();
            let c2 = 2.0 * k[1].cos();
            let g: Vec<f64> = table.iter().map(|d| d - c1).collect();
            let mut roots = Vec::new();
            for i in 0..n {
                if g[i] == 0.0 {
                    roots.push(mus[i]);
                } else if g[i].signum() != g[i + 1].signum() {
                    roots.extend(brent(|m| d1.at(m) - c1, mus[i], mus[i + 1], 1e-14));
                } else if i > 0 && g[i].abs() < g[i - 1].abs() && g[i].abs() <= g[i + 1].abs() && g[i - 1].signum() == g[i].signum() {
                    let (m, v) = golden_min(|m| (d1.at(m) - c1).abs(), mus[i - 1], mus[i + 1], 1e-12);
                    if v < TANGENT_TOL {
                        roots.push(m);
                    }
                }
            }
            roots
                .into_iter()
                .map(|mu| (d2.at(lambda - mu) - c2).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let unmatched = residuals.iter().filter(|r| !r.is_finite()).count();
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(SeparableCheck { max_residual, residuals, unmatched })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fermi::FermiSlice;

    #[test]
    fn free_vertex_has_zero_residual() {
        let free = FourierPotential::free(1).unwrap();
        let trace = FermiTrace {
            lambda: 1.0,
            dim: 2,
            points: vec![],
            point_residuals: vec![],
            slices: vec![FermiSlice {
                k3: None,
                vertices: vec![[0.6, 0.8], [0.6, 0.9]],
                residuals: vec![0.0, 0.0],
                segments: vec![],
                component_ids: vec![],
                saddle_cells: 0,
            }],
        };
        let check = separable_cross_check(&free, &free, 1.0, &trace).unwrap();
        assert!(check.residuals[0] < 1e-10, "{:?}", check.residuals);
        // (0.6, 0.9) is off the circle.
        assert!(check.residuals[1] > 1e-2);
    }
}

//! Band functions `λ_j(k)` over the Brillouin zone, band/gap extraction and
//! the in-spectrum predicate.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hill::Interval;
use crate::numeric::{brent, golden_min, unravel};
use crate::plane_wave::BlochFamily;

/// Edge tolerance of [`in_spectrum`].
pub const EDGE_TOL: f64 = 1e-6;
/// Default refinement tolerance of band extrema.
pub const DEFAULT_REFINE_TOL: f64 = 1e-8;

/// Uniform endpoint-inclusive grid over a translate of `[0, 2π]^dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrillouinGrid {
    pub dim: usize,
    pub resolution: usize,
    /// Lower corner of the window; `0` gives the zone `B = [0, 2π]^dim`.
    pub origin: f64,
}

impl BrillouinGrid {
    pub fn new(dim: usize, resolution: usize) -> Result<Self> {
        Self::with_origin(dim, resolution, 0.0)
    }

    /// Same grid over `[origin, origin + 2π]^dim`, another fundamental domain
    /// of the dual lattice.
    pub fn with_origin(dim: usize, resolution: usize, origin: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return invalid(format!("dimension must be 1, 2 or 3 (got {dim})"));
        }
        if resolution < 2 {
            return invalid("Brillouin grid needs at least 2 nodes per axis");
        }
        Ok(Self { dim, resolution, origin })
    }

    pub fn default_resolution(dim: usize) -> usize {
        match dim {
            1 => 201,
            2 => 61,
            _ => 21,
        }
    }

    pub fn step(&self) -> f64 {
        2.0 * PI / (self.resolution - 1) as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.step()
    }

    pub fn len(&self) -> usize {
        self.resolution.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        unravel(flat, self.resolution, self.dim).into_iter().map(|i| self.coord(i)).collect()
    }

    pub fn nodes(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|f| self.node(f)).collect()
    }
}

/// Extremal data of one band function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    /// 1-based band index.
    pub index: usize,
    pub min: f64,
    pub max: f64,
    pub argmin: Vec<f64>,
    pub argmax: Vec<f64>,
}

impl Band {
    pub fn interval(&self) -> Interval {
        Interval::new(self.min, self.max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandStructure {
    pub grid: BrillouinGrid,
    pub n_bands: usize,
    /// Per node, the lowest `n_bands` eigenvalues ascending.
    pub values: Vec<Vec<f64>>,
    /// Filled by [`extract_bands`].
    pub bands: Vec<Band>,
    /// Open gaps between merged band hulls.
    pub gaps: Vec<Interval>,
}

/// Sorted spectra of the truncated `H0(k)` at every grid node.
pub fn band_functions(family: &BlochFamily, grid: &BrillouinGrid, n_bands: usize) -> Result<BandStructure> {
    if grid.dim != family.dim() {
        return Err(Error::DimMismatch { expected: family.dim(), found: grid.dim });
    }
    let n = family.size();
    if n_bands == 0 || n_bands > n / 2 {
        return invalid(format!(
            "n_bands = {n_bands} exceeds half the basis size {n}; raise the cutoff"
        ));
    }
    let values = (0..grid.len())
        .into_par_iter()
        .map(|flat| {
            let mut s = family.spectrum(&grid.node(flat))?;
            s.truncate(n_bands);
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BandStructure { grid: grid.clone(), n_bands, values, bands: Vec::new(), gaps: Vec::new() })
}

fn band_value(family: &BlochFamily, k: &[f64], j: usize) -> f64 {
    family.spectrum(k).map(|s| s[j]).unwrap_or(f64::NAN)
}

/// Coordinate descent with golden-section line searches, seeded at a grid
/// node. `sign = 1` minimizes `λ_j`, `sign = −1` maximizes it.
fn refine_extremum(family: &BlochFamily, j: usize, seed: &[f64], h: f64, sign: f64, tol: f64) -> (Vec<f64>, f64) {
    let mut k = seed.to_vec();
    let mut best = sign * band_value(family, &k, j);
    let ktol = (tol * 1e-2).max(1e-13);
    for _sweep in 0..20 {
        let before = best;
        for axis in 0..k.len() {
            let center = k[axis];
            let mut probe = k.clone();
            let (arg, val) = golden_min(
                |t| {
                    probe[axis] = t;
                    sign * band_value(family, &probe, j)
                },
                center - h,
                center + h,
                ktol,
            );
            if val < best {
                best = val;
                k[axis] = arg;
            }
        }
        if k.len() == 1 || (before - best).abs() <= tol {
            break;
        }
    }
    (k, sign * best)
}

/// Fills `a_j = min λ_j`, `b_j = max λ_j` (refined off-grid to `refine_tol`)
/// and the gaps between merged band hulls.
pub fn extract_bands(family: &BlochFamily, mut bs: BandStructure, refine_tol: f64) -> Result<BandStructure> {
    let h = bs.grid.step();
    let bands = (0..bs.n_bands)
        .into_par_iter()
        .map(|j| {
            let (mut imin, mut imax) = (0, 0);
            for (i, v) in bs.values.iter().enumerate() {
                if v[j] < bs.values[imin][j] {
                    imin = i;
                }
                if v[j] > bs.values[imax][j] {
                    imax = i;
                }
            }
            let (argmin, min) = refine_extremum(family, j, &bs.grid.node(imin), h, 1.0, refine_tol);
            let (argmax, max) = refine_extremum(family, j, &bs.grid.node(imax), h, -1.0, refine_tol);
            Band {
                index: j + 1,
                min: min.min(bs.values[imin][j]),
                max: max.max(bs.values[imax][j]),
                argmin,
                argmax,
            }
        })
        .collect::<Vec<_>>();
    bs.gaps = gaps_between(&bands, gap_threshold(refine_tol));
    bs.bands = bands;
    Ok(bs)
}

/// Smallest separation reported as a gap; narrower ones are attributed to
/// extremization noise.
pub fn gap_threshold(refine_tol: f64) -> f64 {
    (10.0 * refine_tol).max(1e-9)
}

fn gaps_between(bands: &[Band], threshold: f64) -> Vec<Interval> {
    let mut hulls: Vec<Interval> = bands.iter().map(Band::interval).collect();
    hulls.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut gaps = Vec::new();
    let mut reach = match hulls.first() {
        Some(h) => h.hi,
        None => return gaps,
    };
    for h in &hulls[1..] {
        if h.lo - reach > threshold {
            gaps.push(Interval::new(reach, h.lo));
        }
        reach = reach.max(h.hi);
    }
    gaps
}

/// Lipschitz bound for `λ_j` near real `k`: `2(|k| + 2πM + 1) + 2Σ|q̂|`.
pub fn lipschitz_bound(family: &BlochFamily, k_norm: f64) -> f64 {
    let m = family.basis().cutoff() as f64 * (family.dim() as f64).sqrt();
    let qsum: f64 = family.potential().coeffs().map(|(_, c)| c.norm()).sum();
    2.0 * (k_norm + 2.0 * PI * m + 1.0) + 2.0 * qsum
}

/// Pairs of adjacent grid nodes (flat indices) whose band values differ by
/// more than the Lipschitz bound allows. A non-empty result flags
/// under-resolution.
pub fn continuity_violations(family: &BlochFamily, bs: &BandStructure) -> Vec<(usize, usize)> {
    let g = &bs.grid;
    let h = g.step();
    let kmax = (g.origin.abs() + 2.0 * PI) * (g.dim as f64).sqrt();
    let l = lipschitz_bound(family, kmax);
    let mut out = Vec::new();
    for flat in 0..g.len() {
        let idx = unravel(flat, g.resolution, g.dim);
        for axis in 0..g.dim {
            if idx[axis] + 1 == g.resolution {
                continue;
            }
            let nb = flat + g.resolution.pow((g.dim - 1 - axis) as u32);
            let bad = bs.values[flat]
                .iter()
                .zip(&bs.values[nb])
                .any(|(a, b)| (a - b).abs() > l * h);
            if bad {
                out.push((flat, nb));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SpectrumVerdict {
    /// `λ ∈ (a_j, b_j)`; `witness` is a quasimomentum with `λ_j(witness) = λ`.
    InsideBandInterior { band: usize, witness: Vec<f64>, residual: f64 },
    AtEdgeWithinTol { band: usize, edge: f64 },
    /// `distance` to the nearest band.
    InGap { distance: f64 },
}

impl SpectrumVerdict {
    pub fn is_inside(&self) -> bool {
        matches!(self, SpectrumVerdict::InsideBandInterior { .. })
    }

    pub fn is_gap(&self) -> bool {
        matches!(self, SpectrumVerdict::InGap { .. })
    }
}

/// Decides whether real `λ` lies in the spectrum of `H0` and, if it lies in
/// a band interior, produces a quasimomentum on the real Fermi variety.
pub fn in_spectrum(family: &BlochFamily, lambda: f64, grid: &BrillouinGrid) -> Result<SpectrumVerdict> {
    let n_bands = family.size() / 2;
    let bs = band_functions(family, grid, n_bands)?;
    let top_min = bs.values.iter().map(|v| v[n_bands - 1]).fold(f64::INFINITY, f64::min);
    if lambda >= top_min - 1.0 {
        return invalid(format!(
            "lambda = {lambda} is beyond the bands resolved at this cutoff; raise the cutoff"
        ));
    }
    let h = grid.step();
    let tol = DEFAULT_REFINE_TOL;
    let mut bands = Vec::new();
    for j in 0..n_bands {
        let gmin = bs.values.iter().map(|v| v[j]).fold(f64::INFINITY, f64::min);
        if gmin > lambda + 1.0 {
            break;
        }
        let imin = bs.values.iter().position(|v| v[j] == gmin).unwrap_or(0);
        let gmax = bs.values.iter().map(|v| v[j]).fold(f64::NEG_INFINITY, f64::max);
        let imax = bs.values.iter().position(|v| v[j] == gmax).unwrap_or(0);
        let (argmin, min) = refine_extremum(family, j, &grid.node(imin), h, 1.0, tol);
        let (argmax, max) = refine_extremum(family, j, &grid.node(imax), h, -1.0, tol);
        bands.push(Band { index: j + 1, min: min.min(gmin), max: max.max(gmax), argmin, argmax });
    }
    for b in &bands {
        for edge in [b.min, b.max] {
            if (lambda - edge).abs() <= EDGE_TOL {
                return Ok(SpectrumVerdict::AtEdgeWithinTol { band: b.index, edge });
            }
        }
    }
    if let Some(b) = bands.iter().find(|b| b.min < lambda && lambda < b.max) {
        let j = b.index - 1;
        let point = |t: f64| -> Vec<f64> {
            b.argmin.iter().zip(&b.argmax).map(|(lo, hi)| lo + t * (hi - lo)).collect()
        };
        let t = brent(|t| band_value(family, &point(t), j) - lambda, 0.0, 1.0, 1e-15)
            .ok_or_else(|| Error::ResolutionFailure("witness segment does not bracket lambda".into()))?;
        let witness = point(t);
        let residual = (band_value(family, &witness, j) - lambda).abs();
        return Ok(SpectrumVerdict::InsideBandInterior { band: b.index, witness, residual });
    }
    let distance = bands
        .iter()
        .map(|b| if lambda < b.min { b.min - lambda } else { lambda - b.max })
        .fold(f64::INFINITY, f64::min);
    Ok(SpectrumVerdict::InGap { distance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plane_wave::PlaneWaveBasis;
    use crate::potential::FourierPotential;

    fn family(q: FourierPotential, m: usize) -> BlochFamily {
        BlochFamily::new(PlaneWaveBasis::new(q.dim(), m).unwrap(), q).unwrap()
    }

    #[test]
    fn grid_nodes_cover_closed_zone() {
        let g = BrillouinGrid::new(2, 5).unwrap();
        let nodes = g.nodes();
        assert_eq!(nodes.len(), 25);
        assert_eq!(nodes[0], vec![0.0, 0.0]);
        assert!((nodes[24][0] - 2.0 * PI).abs() < 1e-14);
        assert!(nodes.iter().flatten().all(|&k| (0.0..=2.0 * PI + 1e-12).contains(&k)));
    }

    #[test]
    fn free_band_values_at_three_nodes() {
        let f = family(FourierPotential::free(1).unwrap(), 4);
        let grid = BrillouinGrid::new(1, 5).unwrap();
        let bs = band_functions(&f, &grid, 2).unwrap();
        // Nodes 0, π/2, π, 3π/2, 2π.
        assert!(bs.values[0][0].abs() < 1e-12);
        assert!((bs.values[1][0] - PI * PI / 4.0).abs() < 1e-10);
        assert!((bs.values[1][1] - 9.0 * PI * PI / 4.0).abs() < 1e-10);
        assert!((bs.values[2][0] - PI * PI).abs() < 1e-10);
        assert!((bs.values[2][1] - PI * PI).abs() < 1e-10);
    }

    #[test]
    fn constant_potential_shifts_values() {
        let free = family(FourierPotential::free(1).unwrap(), 4);
        let shifted = family(FourierPotential::constant(1, 1.75).unwrap(), 4);
        let grid = BrillouinGrid::new(1, 11).unwrap();
        let a = band_functions(&free, &grid, 3).unwrap();
        let b = band_functions(&shifted, &grid, 3).unwrap();
        for (va, vb) in a.values.iter().zip(&b.values) {
            for (x, y) in va.iter().zip(vb) {
                assert!((y - x - 1.75).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn mathieu_first_band_max_matches_hill_edge() {
        let q = FourierPotential::mathieu(1.0);
        let hill = crate::hill::spectrum_1d(&q, 20.0).unwrap();
        let f = family(q, 8);
        let grid = BrillouinGrid::new(1, 101).unwrap();
        let bs = band_functions(&f, &grid, 4).unwrap();
        // Node 50 is k = π.
        assert!((bs.values[50][0] - hill.gaps[1].lo).abs() < 1e-6);
        assert!(continuity_violations(&f, &bs).is_empty());
        let bs = extract_bands(&f, bs, DEFAULT_REFINE_TOL).unwrap();
        assert!(!bs.gaps.is_empty());
        assert!((bs.gaps[0].lo - hill.gaps[1].lo).abs() < 1e-6);
        assert!((bs.gaps[0].hi - hill.gaps[1].hi).abs() < 1e-6);
        // The extrema land on k ∈ {0, π, 2π}.
        let at_symmetric = |k: f64| [0.0, PI, 2.0 * PI].iter().any(|c| (k - c).abs() < 1e-4);
        assert!(bs.bands.iter().all(|b| at_symmetric(b.argmin[0]) && at_symmetric(b.argmax[0])));
        let mid = hill.gaps[1].midpoint();
        assert!(in_spectrum(&f, mid, &grid).unwrap().is_gap());
    }

    #[test]
    fn too_many_bands_rejected() {
        let f = family(FourierPotential::free(1).unwrap(), 2);
        let grid = BrillouinGrid::new(1, 11).unwrap();
        assert!(band_functions(&f, &grid, 3).is_err());
    }

    #[test]
    fn free_bands_have_no_gaps() {
        let f = family(FourierPotential::free(1).unwrap(), 4);
        let grid = BrillouinGrid::new(1, 41).unwrap();
        let bs = extract_bands(&f, band_functions(&f, &grid, 4).unwrap(), 1e-8).unwrap();
        assert!(bs.gaps.is_empty(), "{:?}", bs.gaps);
        assert!(bs.bands[0].min.abs() < 1e-9);

        let f2 = family(FourierPotential::free(2).unwrap(), 2);
        let grid2 = BrillouinGrid::new(2, 9).unwrap();
        let bs2 = extract_bands(&f2, band_functions(&f2, &grid2, 6).unwrap(), 1e-8).unwrap();
        assert!(bs2.gaps.is_empty(), "{:?}", bs2.gaps);
    }

    #[test]
    fn free_in_spectrum_examples() {
        let f = family(FourierPotential::free(1).unwrap(), 4);
        let grid = BrillouinGrid::new(1, 41).unwrap();
        match in_spectrum(&f, -0.5, &grid).unwrap() {
            SpectrumVerdict::InGap { distance } => assert!((distance - 0.5).abs() < 1e-9),
            v => panic!("{v:?}"),
        }
        match in_spectrum(&f, 3.0, &grid).unwrap() {
            SpectrumVerdict::InsideBandInterior { band, witness, residual } => {
                assert_eq!(band, 1);
                assert!((witness[0] - 3f64.sqrt()).abs() < 1e-9);
                assert!(residual < 1e-8);
            }
            v => panic!("{v:?}"),
        }
    }
}

//! Real Fermi varieties as contour sets of the Bloch determinant on the
//! Brillouin torus, complex line probes by zero counting, component
//! reports modulo `2πZ^n` and the separable cross-check.

mod probe;
mod separable;

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::band_structure::BrillouinGrid;
use crate::error::{invalid, Error, Result};
use crate::numeric::brent_with_values;
use crate::plane_wave::{BlochFamily, LogDet};

pub use probe::{complex_zero_count, polish_zeros, ComplexLineProbe, PolishedRoot, Rect, ZeroCount};
pub use separable::{separable_cross_check, SeparableCheck};

/// Acceptance residual of a polished vertex, measured as `min_j |λ_j(k) − λ|`.
pub const VERTEX_TOL: f64 = 1e-7;
const POLISH_XTOL: f64 = 1e-13;

/// One planar contour: the whole trace in 2D, a fixed-`k3` slice in 3D.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FermiSlice {
    pub k3: Option<f64>,
    pub vertices: Vec<[f64; 2]>,
    /// `min_j |λ_j(v) − λ|` per vertex.
    pub residuals: Vec<f64>,
    /// Vertex index pairs, one per marching-squares segment.
    pub segments: Vec<[usize; 2]>,
    /// Component label per segment after gluing opposite faces.
    pub component_ids: Vec<usize>,
    /// Cells with four sign changes, resolved by the cell-center value.
    pub saddle_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FermiTrace {
    pub lambda: f64,
    pub dim: usize,
    /// Roots in 1D.
    pub points: Vec<f64>,
    pub point_residuals: Vec<f64>,
    pub slices: Vec<FermiSlice>,
}

impl FermiTrace {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && self.slices.iter().all(|s| s.vertices.is_empty())
    }

    pub fn vertex_count(&self) -> usize {
        self.points.len() + self.slices.iter().map(|s| s.vertices.len()).sum::<usize>()
    }

    /// Every vertex as a full quasimomentum, slices concatenated in order.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = self.points.iter().map(|&k| vec![k]).collect();
        for s in &self.slices {
            for v in &s.vertices {
                let mut k = v.to_vec();
                k.extend(s.k3);
                out.push(k);
            }
        }
        out
    }

    pub fn residuals(&self) -> Vec<f64> {
        let mut out = self.point_residuals.clone();
        for s in &self.slices {
            out.extend_from_slice(&s.residuals);
        }
        out
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals().into_iter().fold(0.0, f64::max)
    }
}

fn sign_of(ld: &LogDet) -> f64 {
    if ld.phase.cos() < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Locates the sign change of `det(H0(k) − λ)` on the segment
/// `start + t·e_axis`, `t ∈ [0, h]`. The determinant is rescaled by the
/// larger end modulus so it stays representable and linear near the root.
fn polish_edge(
    family: &BlochFamily,
    lambda: f64,
    start: &[f64],
    axis: usize,
    h: f64,
    l0: &LogDet,
    l1: &LogDet,
) -> Result<(Vec<f64>, f64)> {
    let reference = l0.log_abs.max(l1.log_abs);
    let scaled = |ld: &LogDet| sign_of(ld) * (ld.log_abs - reference).clamp(-700.0, 700.0).exp();
    let mut k = start.to_vec();
    let mut failure = None;
    let mut f = |t: f64| {
        k[axis] = start[axis] + t;
        match family.log_det_real(&k, lambda) {
            Ok(ld) => scaled(&ld),
            Err(e) => {
                failure = Some(e);
                f64::NAN
            }
        }
    };
    let t = brent_with_values(&mut f, 0.0, scaled(l0), h, scaled(l1), POLISH_XTOL);
    if let Some(e) = failure {
        return Err(e);
    }
    let t = t.ok_or_else(|| Error::ResolutionFailure("edge lost its sign change".into()))?;
    let mut v = start.to_vec();
    v[axis] += t;
    let residual = family.spectral_distance(&v, lambda)?;
    Ok((v, residual))
}

/// Real Fermi variety at real `λ` on the grid: roots in 1D, a
/// marching-squares contour in 2D, a stack of `k3` slices in 3D.
pub fn trace_real(family: &BlochFamily, lambda: f64, grid: &BrillouinGrid) -> Result<FermiTrace> {
    if grid.dim != family.dim() {
        return Err(Error::DimMismatch { expected: family.dim(), found: grid.dim });
    }
    if !lambda.is_finite() {
        return invalid("lambda must be finite");
    }
    let mut trace = FermiTrace { lambda, dim: grid.dim, points: vec![], point_residuals: vec![], slices: vec![] };
    match grid.dim {
        1 => {
            let n = grid.resolution;
            let vals = (0..n)
                .into_par_iter()
                .map(|i| family.log_det_real(&[grid.coord(i)], lambda))
                .collect::<Result<Vec<_>>>()?;
            let found = (0..n - 1)
                .into_par_iter()
                .filter(|&i| sign_of(&vals[i]) != sign_of(&vals[i + 1]))
                .map(|i| polish_edge(family, lambda, &[grid.coord(i)], 0, grid.step(), &vals[i], &vals[i + 1]))
                .collect::<Result<Vec<_>>>()?;
            for (k, r) in found {
                trace.points.push(k[0]);
                trace.point_residuals.push(r);
            }
        }
        2 => trace.slices.push(trace_slice(family, lambda, grid, None)?),
        _ => {
            for i3 in 0..grid.resolution {
                trace.slices.push(trace_slice(family, lambda, grid, Some(grid.coord(i3)))?);
            }
        }
    }
    Ok(trace)
}

type EdgeKey = (usize, usize, usize);

fn trace_slice(family: &BlochFamily, lambda: f64, grid: &BrillouinGrid, k3: Option<f64>) -> Result<FermiSlice> {
    let n = grid.resolution;
    let h = grid.step();
    let point = |a: f64, b: f64| -> Vec<f64> {
        let mut k = vec![a, b];
        k.extend(k3);
        k
    };
    let vals = (0..n * n)
        .into_par_iter()
        .map(|f| family.log_det_real(&point(grid.coord(f / n), grid.coord(f % n)), lambda))
        .collect::<Result<Vec<_>>>()?;
    let s: Vec<f64> = vals.iter().map(sign_of).collect();

    // Edge (axis, i, j) starts at node (i, j) and runs along `axis`.
    let mut edges: Vec<EdgeKey> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i + 1 < n && s[i * n + j] != s[(i + 1) * n + j] {
                edges.push((0, i, j));
            }
            if j + 1 < n && s[i * n + j] != s[i * n + j + 1] {
                edges.push((1, i, j));
            }
        }
    }
    let polished = edges
        .par_iter()
        .map(|&(axis, i, j)| {
            let end = if axis == 0 { (i + 1) * n + j } else { i * n + j + 1 };
            polish_edge(family, lambda, &point(grid.coord(i), grid.coord(j)), axis, h, &vals[i * n + j], &vals[end])
        })
        .collect::<Result<Vec<_>>>()?;
    let index: HashMap<EdgeKey, usize> = edges.iter().enumerate().map(|(v, &e)| (e, v)).collect();

    let cells: Vec<(usize, usize, Vec<usize>)> = (0..n - 1)
        .flat_map(|i| (0..n - 1).map(move |j| (i, j)))
        .filter_map(|(i, j)| {
            let around = [(0, i, j), (1, i + 1, j), (0, i, j + 1), (1, i, j)];
            let hit: Vec<usize> = around.iter().filter_map(|e| index.get(e).copied()).collect();
            (!hit.is_empty()).then_some((i, j, hit))
        })
        .collect();
    let saddles: Vec<(usize, usize)> = cells.iter().filter(|c| c.2.len() == 4).map(|c| (c.0, c.1)).collect();
    let centers = saddles
        .par_iter()
        .map(|&(i, j)| {
            let ld = family.log_det_real(&point(grid.coord(i) + h / 2.0, grid.coord(j) + h / 2.0), lambda)?;
            Ok(((i, j), sign_of(&ld)))
        })
        .collect::<Result<HashMap<_, _>>>()?;

    let mut segments = Vec::new();
    for (i, j, hit) in &cells {
        match hit.len() {
            2 => segments.push([hit[0], hit[1]]),
            4 => {
                // hit = [e0 (c0c1), e1 (c1c2), e2 (c3c2), e3 (c0c3)].
                if centers[&(*i, *j)] == s[i * n + j] {
                    segments.push([hit[0], hit[1]]);
                    segments.push([hit[2], hit[3]]);
                } else {
                    segments.push([hit[3], hit[0]]);
                    segments.push([hit[1], hit[2]]);
                }
            }
            _ => {}
        }
    }

    // Torus gluing: node n−1 on either axis is node 0.
    let wrap = |(axis, i, j): EdgeKey| (axis, i % (n - 1), j % (n - 1));
    let mut canon: HashMap<EdgeKey, usize> = HashMap::new();
    let vertex_node: Vec<usize> = edges
        .iter()
        .map(|&e| {
            let next = canon.len();
            *canon.entry(wrap(e)).or_insert(next)
        })
        .collect();
    let mut uf = UnionFind::new(canon.len());
    for seg in &segments {
        uf.union(vertex_node[seg[0]], vertex_node[seg[1]]);
    }
    let mut labels: HashMap<usize, usize> = HashMap::new();
    let component_ids = segments
        .iter()
        .map(|seg| {
            let root = uf.find(vertex_node[seg[0]]);
            let next = labels.len();
            *labels.entry(root).or_insert(next)
        })
        .collect();

    Ok(FermiSlice {
        k3,
        vertices: polished.iter().map(|(k, _)| [k[0], k[1]]).collect(),
        residuals: polished.iter().map(|(_, r)| *r).collect(),
        segments,
        component_ids,
        saddle_cells: saddles.len(),
    })
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentInfo {
    pub slice: usize,
    pub id: usize,
    pub segments: usize,
    /// Total polyline length, the size proxy of the component.
    pub length: f64,
    pub bbox_min: [f64; 2],
    pub bbox_max: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    /// Sum over slices; in 1D the number of points.
    pub n_components: usize,
    pub per_slice: Vec<usize>,
    pub components: Vec<ComponentInfo>,
}

/// Real components of the trace after torus gluing, per slice.
pub fn component_report(t: &FermiTrace) -> ComponentReport {
    if t.dim == 1 {
        return ComponentReport { n_components: t.points.len(), per_slice: vec![t.points.len()], components: vec![] };
    }
    let mut components = Vec::new();
    let mut per_slice = Vec::new();
    for (si, s) in t.slices.iter().enumerate() {
        let count = s.component_ids.iter().map(|c| c + 1).max().unwrap_or(0);
        per_slice.push(count);
        for id in 0..count {
            let mut info = ComponentInfo {
                slice: si,
                id,
                segments: 0,
                length: 0.0,
                bbox_min: [f64::INFINITY; 2],
                bbox_max: [f64::NEG_INFINITY; 2],
            };
            for (seg, _) in s.segments.iter().zip(&s.component_ids).filter(|(_, &c)| c == id) {
                let (a, b) = (s.vertices[seg[0]], s.vertices[seg[1]]);
                info.segments += 1;
                info.length += (a[0] - b[0]).hypot(a[1] - b[1]);
                for v in [a, b] {
                    for d in 0..2 {
                        info.bbox_min[d] = info.bbox_min[d].min(v[d]);
                        info.bbox_max[d] = info.bbox_max[d].max(v[d]);
                    }
                }
            }
            components.push(info);
        }
    }
    ComponentReport { n_components: per_slice.iter().sum(), per_slice, components }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::plane_wave::PlaneWaveBasis;
    use crate::potential::FourierPotential;

    fn family(q: FourierPotential, m: usize) -> BlochFamily {
        BlochFamily::new(PlaneWaveBasis::new(q.dim(), m).unwrap(), q).unwrap()
    }

    fn folded_distance(k: &[f64]) -> f64 {
        // min over m of |k + 2πm|², checked over a small neighbourhood of m.
        let mut best = f64::INFINITY;
        for a in -2..=2 {
            for b in -2..=2 {
                let x = k[0] + 2.0 * PI * a as f64;
                let y = k[1] + 2.0 * PI * b as f64;
                best = best.min(x * x + y * y);
            }
        }
        best
    }

    #[test]
    fn free_2d_unit_circle_is_one_component() {
        let f = family(FourierPotential::free(2).unwrap(), 2);
        let grid = BrillouinGrid::new(2, 41).unwrap();
        for lambda in [1.0, 0.25] {
            let t = trace_real(&f, lambda, &grid).unwrap();
            assert!(!t.is_empty());
            for v in t.vertices() {
                assert!((folded_distance(&v) - lambda).abs() < 1e-8, "{v:?}");
            }
            assert!(t.max_residual() < VERTEX_TOL);
            assert_eq!(component_report(&t).n_components, 1);
        }
    }

    #[test]
    fn mathieu_gap_has_empty_trace() {
        let q = FourierPotential::mathieu(1.0);
        let gap = crate::hill::spectrum_1d(&q, 12.0).unwrap().gaps[1];
        let f = family(q, 8);
        let grid = BrillouinGrid::new(1, 201).unwrap();
        assert!(trace_real(&f, gap.midpoint(), &grid).unwrap().is_empty());
        let t = trace_real(&f, 5.0, &grid).unwrap();
        // Two roots ±k in the zone.
        assert_eq!(t.points.len(), 2);
        assert!((t.points[0] + t.points[1] - 2.0 * PI).abs() < 1e-8);
    }

    #[test]
    fn free_3d_slices() {
        let f = family(FourierPotential::free(3).unwrap(), 1);
        let grid = BrillouinGrid::new(3, 9).unwrap();
        let t = trace_real(&f, 1.0, &grid).unwrap();
        assert_eq!(t.slices.len(), 9);
        for v in t.vertices() {
            let r2: f64 = v.iter().map(|x| {
                let y = if *x > PI { x - 2.0 * PI } else { *x };
                y * y
            }).sum();
            assert!((r2 - 1.0).abs() < 1e-8);
        }
        // Slices with |k3| > 1 are empty.
        assert!(t.slices[2].vertices.is_empty());
    }
}

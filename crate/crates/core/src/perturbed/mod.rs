//! Finite-box experiments with `H = −Δ + q + v`: Dirichlet discretization,
//! eigenpairs in an energy window, classification across a ladder of box
//! sizes, decay fits and slowly decaying constructions with an eigenvalue
//! inside a band.

mod band;
mod decay;
mod wvn;

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::hill::{spectrum_1d, HillPotential};
use crate::potential::FourierPotential;

pub use band::{eigenvalues_in, BandLu, SymBand};
pub use decay::{decay_fit, DecayFit};
pub use wvn::{make_wvn, Envelope, WvnConstruction};

/// Largest number of unknowns accepted by [`discretize`].
pub const MAX_UNKNOWNS: usize = 2_000_000;
/// Largest 2D system handled by the dense solver.
pub const MAX_DENSE: usize = 4096;
pub const MAX_STEP_1D: f64 = 0.02;
pub const DEFAULT_STEP: f64 = 0.01;
/// Residual bound for an eigenvalue classification.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// How fast `|v|` decays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecayDescriptor {
    /// `|v(x)| ≤ C e^{−(|x|/scale)^r}`.
    SuperExponential { c: f64, r: f64, scale: f64 },
    /// `|v(x)| ≤ C (1 + |x|)^{−rate}`.
    Algebraic { c: f64, rate: f64 },
    CompactSupport { radius: f64 },
}

impl DecayDescriptor {
    /// Whether `v` is bounded by `C e^{−|x|^r}` for some `r > 4/3`.
    pub fn fast_decay(&self) -> bool {
        match *self {
            DecayDescriptor::SuperExponential { r, .. } => r > 4.0 / 3.0,
            DecayDescriptor::Algebraic { .. } => false,
            DecayDescriptor::CompactSupport { .. } => true,
        }
    }
}

#[derive(Debug, Clone)]
pub enum ImpurityKind {
    None,
    /// `v(x) = A e^{−(|x|/w)²}`.
    Gaussian { amplitude: f64, width: f64 },
    PowerOscillatory(Arc<WvnConstruction>),
    /// 1D samples `v(x0 + i·step)`, linearly interpolated, zero outside.
    Tabulated { x0: f64, step: f64, values: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct Impurity {
    pub kind: ImpurityKind,
    pub decay: DecayDescriptor,
}

impl Impurity {
    pub fn none() -> Self {
        Self { kind: ImpurityKind::None, decay: DecayDescriptor::CompactSupport { radius: 0.0 } }
    }

    pub fn gaussian(amplitude: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) || !amplitude.is_finite() {
            return invalid("gaussian impurity needs a finite amplitude and positive width");
        }
        Ok(Self {
            kind: ImpurityKind::Gaussian { amplitude, width },
            decay: DecayDescriptor::SuperExponential { c: amplitude.abs(), r: 2.0, scale: width },
        })
    }

    pub fn power_oscillatory(w: WvnConstruction) -> Self {
        let decay = DecayDescriptor::Algebraic { c: w.sup_v, rate: w.envelope.v_decay_rate() };
        Self { kind: ImpurityKind::PowerOscillatory(Arc::new(w)), decay }
    }

    pub fn tabulated(x0: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0) || values.is_empty() {
            return invalid("tabulated impurity needs a positive step and samples");
        }
        let radius = x0.abs().max((x0 + step * (values.len() - 1) as f64).abs());
        Ok(Self { kind: ImpurityKind::Tabulated { x0, step, values }, decay: DecayDescriptor::CompactSupport { radius } })
    }

    /// Parses `none`, `gaussian:A,w`, `wvn:λ` or `wvn:λ,β,γ`. The `wvn`
    /// forms build the construction on `background`, checked on
    /// `[−check_half_width, check_half_width]`.
    pub fn parse(spec: &str, background: &FourierPotential, check_half_width: f64) -> Result<Self> {
        let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
        let nums: Vec<f64> = args
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse::<f64>().map_err(|_| crate::Error::InvalidInput(format!("bad number '{s}' in impurity '{spec}'"))))
            .collect::<Result<_>>()?;
        match (name, nums.as_slice()) {
            ("none", []) => Ok(Self::none()),
            ("gaussian", [a, w]) => Self::gaussian(*a, *w),
            ("wvn", [target]) => Ok(Self::power_oscillatory(make_wvn(background, *target, Envelope::default(), check_half_width)?)),
            ("wvn", [target, beta, gamma]) => {
                let env = Envelope::Stretched { beta: *beta, gamma: *gamma };
                Ok(Self::power_oscillatory(make_wvn(background, *target, env, check_half_width)?))
            }
            _ => invalid(format!("unknown impurity '{spec}' (expected none, gaussian:A,w or wvn:λ[,β,γ])")),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.kind {
            ImpurityKind::None => 0.0,
            ImpurityKind::Gaussian { amplitude, width } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                amplitude * (-r2 / (width * width)).exp()
            }
            ImpurityKind::PowerOscillatory(w) => w.v(x[0]),
            ImpurityKind::Tabulated { x0, step, values } => {
                let t = (x[0] - x0) / step;
                if t < 0.0 || t > (values.len() - 1) as f64 {
                    return 0.0;
                }
                let i = (t.floor() as usize).min(values.len().saturating_sub(2));
                if values.len() == 1 {
                    return values[0];
                }
                let f = t - i as f64;
                values[i] * (1.0 - f) + values[i + 1] * f
            }
        }
    }
}

/// `H = −Δ + q + v` on `[−L, L]^dim` with Dirichlet conditions, grid step `h`.
#[derive(Debug, Clone)]
pub struct BoxProblem {
    pub dim: usize,
    pub half_width: f64,
    pub h: f64,
    pub background: FourierPotential,
    pub impurity: Impurity,
}

impl BoxProblem {
    pub fn new(background: FourierPotential, impurity: Impurity, half_width: f64, h: f64) -> Result<Self> {
        let dim = background.dim();
        if !(1..=2).contains(&dim) {
            return invalid(format!("box problems support dimension 1 or 2 (got {dim})"));
        }
        if !(half_width > 0.0) || !(h > 0.0) {
            return invalid("box half-width and grid step must be positive");
        }
        if dim == 2 && half_width > 20.0 {
            return invalid("2D boxes are limited to half-width 20");
        }
        if dim == 1 && h > MAX_STEP_1D {
            return invalid(format!("grid step {h} exceeds the 1D resolution guard {MAX_STEP_1D}"));
        }
        if matches!(impurity.kind, ImpurityKind::PowerOscillatory(_) | ImpurityKind::Tabulated { .. }) && dim != 1 {
            return invalid("tabulated and constructed impurities are one-dimensional");
        }
        let steps = 2.0 * half_width / h;
        if (steps - steps.round()).abs() > 1e-9 * steps {
            return invalid("2L/h must be an integer");
        }
        Ok(Self { dim, half_width, h, background, impurity })
    }

    pub fn with_half_width(&self, half_width: f64) -> Result<Self> {
        Self::new(self.background.clone(), self.impurity.clone(), half_width, self.h)
    }

    /// Interior grid points per axis.
    pub fn points_per_axis(&self) -> usize {
        (2.0 * self.half_width / self.h).round() as usize - 1
    }

    pub fn unknowns(&self) -> usize {
        self.points_per_axis().pow(self.dim as u32)
    }

    pub fn axis(&self) -> Vec<f64> {
        (1..=self.points_per_axis()).map(|i| -self.half_width + i as f64 * self.h).collect()
    }

    /// Grid points in unknown order (last axis fastest).
    pub fn points(&self) -> Vec<Vec<f64>> {
        let axis = self.axis();
        match self.dim {
            1 => axis.iter().map(|&x| vec![x]).collect(),
            _ => axis.iter().flat_map(|&a| axis.iter().map(move |&b| vec![a, b])).collect(),
        }
    }
}

/// Discretized `H`: pentadiagonal in 1D, dense in 2D.
#[derive(Debug, Clone)]
pub enum Operator {
    Banded(SymBand),
    Dense(DMatrix<f64>),
}

impl Operator {
    pub fn size(&self) -> usize {
        match self {
            Operator::Banded(m) => m.n(),
            Operator::Dense(m) => m.nrows(),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Operator::Banded(m) => m.mul_vec(x),
            Operator::Dense(m) => (m * nalgebra::DVector::from_column_slice(x)).iter().copied().collect(),
        }
    }

    pub fn symmetry_defect(&self) -> f64 {
        match self {
            Operator::Banded(_) => 0.0,
            Operator::Dense(m) => (m - m.transpose()).abs().max(),
        }
    }
}

/// Fourth-order `−d²/dx²` with Dirichlet ends; the ghost value beyond each
/// end is the odd reflection, which keeps the matrix symmetric.
fn laplacian_1d(n: usize, h: f64) -> SymBand {
    let mut m = SymBand::new(n, 2);
    let s = 1.0 / (12.0 * h * h);
    for i in 0..n {
        m.set(i, i, 30.0 * s);
        if i + 1 < n {
            m.set(i, i + 1, -16.0 * s);
        }
        if i + 2 < n {
            m.set(i, i + 2, s);
        }
    }
    m.set(0, 0, 29.0 * s);
    m.set(n - 1, n - 1, 29.0 * s);
    m
}

pub fn discretize(p: &BoxProblem) -> Result<Operator> {
    let n = p.points_per_axis();
    if n < 3 {
        return invalid("box too small for the grid step");
    }
    let total = p.unknowns();
    if total > MAX_UNKNOWNS {
        return invalid(format!("{total} unknowns exceed the limit of {MAX_UNKNOWNS}"));
    }
    let lap = laplacian_1d(n, p.h);
    match p.dim {
        1 => {
            let q = HillPotential::new(&p.background)?;
            let mut m = lap;
            for (i, x) in p.axis().into_iter().enumerate() {
                m.add_diagonal(i, q.eval(x) + p.impurity.eval(&[x]));
            }
            Ok(Operator::Banded(m))
        }
        _ => {
            if total > MAX_DENSE {
                return invalid(format!("2D boxes are limited to {MAX_DENSE} unknowns (got {total})"));
            }
            let points = p.points();
            let mut m = DMatrix::zeros(total, total);
            for i in 0..n {
                for j in 0..n {
                    let r = i * n + j;
                    for d in 0..n {
                        let c = lap.get(j, d);
                        if c != 0.0 {
                            m[(r, i * n + d)] += c;
                        }
                        let c = lap.get(i, d);
                        if c != 0.0 {
                            m[(r, d * n + j)] += c;
                        }
                    }
                    m[(r, r)] += p.background.evaluate(&points[r]) + p.impurity.eval(&points[r]);
                }
            }
            Ok(Operator::Dense(m))
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Eigenpair {
    pub lambda: f64,
    /// `‖Hu − λu‖ / ‖u‖`.
    pub residual: f64,
    pub converged: bool,
    /// Unit-norm samples in grid order.
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowEigs {
    pub half_width: f64,
    pub h: f64,
    pub window: (f64, f64),
    pub pairs: Vec<Eigenpair>,
    /// Set when some pair missed the residual bound after the iteration cap.
    pub partial: bool,
}

fn start_vector(n: usize, seed: usize) -> Vec<f64> {
    (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_75 + seed as f64 * 1.3).sin()).collect()
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

fn residual_of(op: &Operator, u: &[f64], lambda: f64) -> f64 {
    let hu = op.apply(u);
    hu.iter().zip(u).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt()
}

/// Eigenvalues only, in `[lo, hi)`.
pub fn eigenvalues_in_window(p: &BoxProblem, window: (f64, f64)) -> Result<Vec<f64>> {
    check_window(window)?;
    match discretize(p)? {
        Operator::Banded(m) => {
            let (a, b) = m.tridiagonalize();
            Ok(eigenvalues_in(&a, &b, window.0, window.1))
        }
        Operator::Dense(m) => {
            let mut e: Vec<f64> = m.symmetric_eigenvalues().iter().copied().filter(|v| (window.0..window.1).contains(v)).collect();
            e.sort_by(f64::total_cmp);
            Ok(e)
        }
    }
}

fn check_window(window: (f64, f64)) -> Result<()> {
    if !(window.0.is_finite() && window.1.is_finite() && window.0 < window.1) {
        return invalid(format!("window {window:?} must be finite and increasing"));
    }
    Ok(())
}

/// All eigenpairs of the discretized box in the window. In 1D the
/// eigenvalues come from Sturm bisection on the tridiagonal form and the
/// vectors from inverse iteration on the banded operator.
pub fn eigs_in_window(p: &BoxProblem, window: (f64, f64)) -> Result<WindowEigs> {
    check_window(window)?;
    let op = discretize(p)?;
    let pairs = match &op {
        Operator::Banded(m) => {
            let (a, b) = m.tridiagonalize();
            let values = eigenvalues_in(&a, &b, window.0, window.1);
            inverse_iteration(&op, m, &values)
        }
        Operator::Dense(m) => {
            let eig = m.clone().symmetric_eigen();
            let mut pairs: Vec<Eigenpair> = (0..m.nrows())
                .filter(|&j| (window.0..window.1).contains(&eig.eigenvalues[j]))
                .map(|j| {
                    let vector: Vec<f64> = eig.eigenvectors.column(j).iter().copied().collect();
                    let lambda = eig.eigenvalues[j];
                    let residual = residual_of(&op, &vector, lambda);
                    Eigenpair { lambda, residual, converged: residual < RESIDUAL_TOL, vector }
                })
                .collect();
            pairs.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
            pairs
        }
    };
    let partial = pairs.iter().any(|e| !e.converged);
    Ok(WindowEigs { half_width: p.half_width, h: p.h, window, pairs, partial })
}

fn inverse_iteration(op: &Operator, m: &SymBand, values: &[f64]) -> Vec<Eigenpair> {
    let n = m.n();
    // Clusters of numerically coincident eigenvalues share an orthogonalization pool.
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match clusters.last_mut() {
            Some(c) if (v - values[c[c.len() - 1]]).abs() < 1e-7 * (1.0 + v.abs()) => c.push(i),
            _ => clusters.push(vec![i]),
        }
    }
    let mut out: Vec<Eigenpair> = clusters
        .par_iter()
        .flat_map_iter(|cluster| {
            let mut done: Vec<Eigenpair> = Vec::new();
            for (seed, &i) in cluster.iter().enumerate() {
                let sigma = values[i];
                let lu = BandLu::factor(m, sigma);
                let mut x = start_vector(n, i + seed);
                let mut best: Option<Eigenpair> = None;
                for _ in 0..6 {
                    lu.solve(&mut x);
                    for prev in &done {
                        let dot: f64 = prev.vector.iter().zip(&x).map(|(a, b)| a * b).sum();
                        x.iter_mut().zip(&prev.vector).for_each(|(v, p)| *v -= dot * p);
                    }
                    normalize(&mut x);
                    let hx = op.apply(&x);
                    let lambda: f64 = hx.iter().zip(&x).map(|(a, b)| a * b).sum();
                    let residual = hx.iter().zip(&x).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt();
                    if best.as_ref().is_none_or(|b| residual < b.residual) {
                        best = Some(Eigenpair { lambda, residual, converged: residual < RESIDUAL_TOL, vector: x.clone() });
                    }
                    if residual < 1e-3 * RESIDUAL_TOL {
                        break;
                    }
                }
                done.push(best.expect("at least one iteration"));
            }
            done
        })
        .collect();
    out.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Eigenvalue,
    BoxArtifact,
    Undecided,
}

/// Position of a candidate relative to the background spectrum (1D).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectralLocation {
    /// Interior of band `index` (1-based).
    Band { index: usize },
    /// Gap `index`; gap 0 lies below the spectrum.
    Gap { index: usize },
    /// Within 1e-6 of a band edge; not classified as band or gap.
    Edge,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Candidate {
    pub lambda: f64,
    pub residual: f64,
    /// `max |λ(L_i) − λ(L_max)|` over the ladder; `None` when unmatched.
    pub l_stability: Option<f64>,
    /// Matched eigenvalue at every rung, ascending `L`.
    pub track: Vec<Option<f64>>,
    pub decay: DecayFit,
    pub classification: Classification,
    pub location: Option<SpectralLocation>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigReport {
    pub ladder: Vec<f64>,
    pub h: f64,
    pub window: (f64, f64),
    pub candidates: Vec<Candidate>,
    pub partial: bool,
    pub impurity_fast_decay: bool,
}

impl EigReport {
    pub fn eigenvalues(&self) -> impl Iterator<Item = &Candidate> {
        self.candidates.iter().filter(|c| c.classification == Classification::Eigenvalue)
    }
}

/// Result of [`stability_scan`]; `top` holds the eigenpairs at the largest box.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanOutcome {
    pub report: EigReport,
    pub top: WindowEigs,
}

/// Eigenvalue threshold of the classification rule.
pub fn stability_threshold(lambda: f64) -> f64 {
    1e-5 * (1.0 + lambda.abs())
}

/// Solves the window on every rung of the ladder, matches candidates of the
/// largest box to the smaller ones by nearest eigenvalue and classifies them.
pub fn stability_scan(p: &BoxProblem, ladder: &[f64], window: (f64, f64)) -> Result<ScanOutcome> {
    check_window(window)?;
    if ladder.len() < 3 || ladder.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("ladder needs at least three strictly increasing half-widths");
    }
    let l_max = *ladder.last().expect("non-empty ladder");
    // Smaller rungs are solved on a padded window so that matches near the
    // window edges see their neighbours.
    let pad = 0.25 * (window.1 - window.0) + 0.5;
    let padded = (window.0 - pad, window.1 + pad);
    let lower = ladder[..ladder.len() - 1]
        .par_iter()
        .map(|&l| eigenvalues_in_window(&p.with_half_width(l)?, padded))
        .collect::<Result<Vec<_>>>()?;
    let top_problem = p.with_half_width(l_max)?;
    let top = eigs_in_window(&top_problem, window)?;
    let top_context = eigenvalues_in_window(&top_problem, padded)?;
    let points = top_problem.points();

    let locator = if p.dim == 1 {
        Some(spectrum_1d(&p.background, window.1.max(0.0) + 2.0)?)
    } else {
        None
    };
    let locate = |lambda: f64| -> Option<SpectralLocation> {
        let s = locator.as_ref()?;
        for b in &s.bands {
            if (lambda - b.lo).abs() < 1e-6 || (lambda - b.hi).abs() < 1e-6 {
                return Some(SpectralLocation::Edge);
            }
        }
        if let Some(i) = s.bands.iter().position(|b| b.lo < lambda && lambda < b.hi) {
            return Some(SpectralLocation::Band { index: i + 1 });
        }
        s.gaps.iter().position(|g| g.lo < lambda && lambda < g.hi).map(|index| SpectralLocation::Gap { index })
    };

    let candidates = top
        .pairs
        .par_iter()
        .map(|pair| {
            let lambda = pair.lambda;
            let mut track: Vec<Option<f64>> = lower.iter().map(|levels| match_level(levels, lambda)).collect();
            track.push(match_level(&top_context, lambda).map(|_| lambda));
            let l_stability = track
                .iter()
                .map(|t| t.map(|v| (v - lambda).abs()))
                .collect::<Option<Vec<f64>>>()
                .map(|d| d.into_iter().fold(0.0, f64::max));
            let decay = decay_fit(&points, &pair.vector);
            let threshold = stability_threshold(lambda);
            let classification = match l_stability {
                Some(ls) if ls < threshold && decay.reliable && decay.p >= 0.5 && pair.residual < RESIDUAL_TOL => {
                    Classification::Eigenvalue
                }
                Some(ls) => {
                    let path: Vec<f64> = track.iter().map(|t| t.expect("all matched")).collect();
                    let monotone = path.windows(2).all(|w| w[1] <= w[0]) || path.windows(2).all(|w| w[1] >= w[0]);
                    if monotone && ls > 10.0 * threshold {
                        Classification::BoxArtifact
                    } else {
                        Classification::Undecided
                    }
                }
                None => Classification::Undecided,
            };
            Candidate {
                lambda,
                residual: pair.residual,
                l_stability,
                track,
                decay,
                classification,
                location: locate(lambda),
            }
        })
        .collect();
    let report = EigReport {
        ladder: ladder.to_vec(),
        h: p.h,
        window,
        candidates,
        partial: top.partial,
        impurity_fast_decay: p.impurity.decay.fast_decay(),
    };
    Ok(ScanOutcome { report, top })
}

/// Nearest level to `lambda`, accepted when closer than half the local
/// spacing around it.
fn match_level(levels: &[f64], lambda: f64) -> Option<f64> {
    let i = levels.partition_point(|&v| v < lambda);
    let nearest = [i.checked_sub(1), Some(i)]
        .into_iter()
        .flatten()
        .filter(|&j| j < levels.len())
        .min_by(|&a, &b| (levels[a] - lambda).abs().total_cmp(&(levels[b] - lambda).abs()))?;
    let e = levels[nearest];
    let spacing = [nearest.checked_sub(1), Some(nearest + 1)]
        .into_iter()
        .flatten()
        .filter(|&j| j < levels.len())
        .map(|j| (levels[j] - e).abs())
        .fold(f64::INFINITY, f64::min);
    ((e - lambda).abs() <= 0.5 * spacing).then_some(e)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn free_box(l: f64, h: f64) -> BoxProblem {
        BoxProblem::new(FourierPotential::free(1).unwrap(), Impurity::none(), l, h).unwrap()
    }

    #[test]
    fn particle_in_a_box() {
        let p = free_box(5.0, 0.01);
        let e = eigenvalues_in_window(&p, (0.0, 1.0)).unwrap();
        let expect = (PI / 10.0).powi(2);
        assert!((e[0] - expect).abs() < 1e-8, "{} vs {expect}", e[0]);
        for (j, v) in e.iter().enumerate() {
            let exact = ((j + 1) as f64 * PI / 10.0).powi(2);
            assert!((v - exact).abs() < 1e-7);
        }
    }

    #[test]
    fn constant_shift() {
        let free = eigenvalues_in_window(&free_box(3.0, 0.02), (0.0, 20.0)).unwrap();
        let c = BoxProblem::new(FourierPotential::constant(1, 1.5).unwrap(), Impurity::none(), 3.0, 0.02).unwrap();
        let shifted = eigenvalues_in_window(&c, (1.5, 21.5)).unwrap();
        assert_eq!(free.len(), shifted.len());
        for (a, b) in free.iter().zip(&shifted) {
            assert!((b - a - 1.5).abs() < 1e-9);
        }
    }

    #[test]
    fn step_guard_and_memory_guard() {
        let q = FourierPotential::free(1).unwrap();
        assert!(BoxProblem::new(q.clone(), Impurity::none(), 5.0, 0.05).is_err());
        let big = BoxProblem::new(q, Impurity::none(), 20000.0, 0.01).unwrap();
        assert!(discretize(&big).is_err());
    }

    #[test]
    fn eigenpairs_have_small_residuals() {
        let q = FourierPotential::mathieu(1.0);
        let p = BoxProblem::new(q, Impurity::gaussian(-2.0, 1.0).unwrap(), 10.0, 0.01).unwrap();
        let w = eigs_in_window(&p, (-3.0, 12.0)).unwrap();
        assert!(!w.partial);
        assert!(!w.pairs.is_empty());
        for e in &w.pairs {
            assert!(e.residual < 1e-8, "{} {}", e.lambda, e.residual);
        }
        // Orthonormal vectors.
        let dot: f64 = w.pairs[0].vector.iter().zip(&w.pairs[1].vector).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-8);
        // The bound state below the spectrum.
        assert!(w.pairs[0].lambda < -0.9 && w.pairs[0].lambda > -1.1, "{}", w.pairs[0].lambda);
    }

    #[test]
    fn two_dimensional_smoke() {
        let q = FourierPotential::parse_preset("mathieu2d:1,1", 2).unwrap();
        let p = BoxProblem::new(q, Impurity::gaussian(-3.0, 0.7).unwrap(), 3.0, 0.2).unwrap();
        let op = discretize(&p).unwrap();
        assert!(op.symmetry_defect() < 1e-12);
        let w = eigs_in_window(&p, (-6.0, 2.0)).unwrap();
        assert!(w.pairs.iter().all(|e| e.residual < 1e-8));
    }

    #[test]
    fn level_matching() {
        let levels = [1.0, 2.0, 3.0];
        assert_eq!(match_level(&levels, 2.2), Some(2.0));
        assert_eq!(match_level(&levels, 2.6), Some(3.0));
        assert_eq!(match_level(&[1.0, 1.1, 3.0], 2.0), None);
        assert_eq!(match_level(&[5.0], -100.0), Some(5.0));
    }

    #[test]
    fn impurity_parsing() {
        let q = FourierPotential::free(1).unwrap();
        assert!(matches!(Impurity::parse("none", &q, 10.0).unwrap().kind, ImpurityKind::None));
        let g = Impurity::parse("gaussian:-2,1", &q, 10.0).unwrap();
        assert!((g.eval(&[0.0]) + 2.0).abs() < 1e-15);
        assert!(g.decay.fast_decay());
        let w = Impurity::parse("wvn:1", &q, 20.0).unwrap();
        assert!(!w.decay.fast_decay());
        assert!(Impurity::parse("gaussian:1", &q, 10.0).is_err());
        assert!(Impurity::parse("square:1,2", &q, 10.0).is_err());
    }
}

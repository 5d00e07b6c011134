//! Acceptance suite. Runs without the libtest harness so that the
//! PASS/FAIL line of every criterion is always printed.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use floquet_lab::band_structure::{band_functions, extract_bands, BrillouinGrid, DEFAULT_REFINE_TOL};
use floquet_lab::cli::{growth_input, growth_taus};
use floquet_lab::fermi::{
    complex_zero_count, polish_zeros, separable_cross_check, trace_real, ComplexLineProbe, FermiTrace, Rect,
};
use floquet_lab::floquet_transform::{
    diagonalization_residual, dual_grid, growth_order_probe, plancherel_defect, quasi_periodicity_defect,
    shift_covariance_defect, CellArray,
};
use floquet_lab::hill::{floquet_exponent, spectrum_1d, Interval};
use floquet_lab::perturbed::{
    make_wvn, stability_scan, BoxProblem, Classification, Envelope, Impurity, SpectralLocation,
};
use floquet_lab::{BlochFamily, FourierPotential, PlaneWaveBasis, SeparablePotential};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn family(q: FourierPotential, cutoff: usize) -> BlochFamily {
    BlochFamily::new(PlaneWaveBasis::new(q.dim(), cutoff).unwrap(), q).unwrap()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed > limit {
        Err(format!("took {elapsed:.1?}, limit {limit:?}"))
    } else {
        Ok(())
    }
}

/// Sorted free levels `|k + 2πm|²` over the truncated basis.
fn free_levels(k: &[f64], cutoff: i64) -> Vec<f64> {
    let mut out = Vec::new();
    let r = -cutoff..=cutoff;
    match k.len() {
        1 => out.extend(r.map(|m| (k[0] + 2.0 * PI * m as f64).powi(2))),
        _ => {
            for a in r.clone() {
                for b in r.clone() {
                    out.push((k[0] + 2.0 * PI * a as f64).powi(2) + (k[1] + 2.0 * PI * b as f64).powi(2));
                }
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let mut worst = 0.0f64;
    for (dim, cutoff, res, nbands) in [(1, 4, 201, 4), (2, 4, 21, 10)] {
        for c in [0.0, 1.5] {
            let q = FourierPotential::constant(dim, c).unwrap();
            let fam = family(q, cutoff);
            let grid = BrillouinGrid::new(dim, res).unwrap();
            let bs = band_functions(&fam, &grid, nbands).unwrap();
            for (i, row) in bs.values.iter().enumerate() {
                let exact = free_levels(&grid.node(i), cutoff as i64);
                for (j, v) in row.iter().enumerate() {
                    worst = worst.max((v - exact[j] - c).abs());
                }
            }
        }
    }
    within(t.elapsed(), Duration::from_secs(10))?;
    check(worst < 1e-10, format!("max deviation {worst:.2e} in {:.1?}", t.elapsed()))
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let q = FourierPotential::mathieu(1.0);
    let fam = family(q.clone(), 8);
    let grid = BrillouinGrid::new(1, 201).unwrap();
    let bs = extract_bands(&fam, band_functions(&fam, &grid, 4).unwrap(), DEFAULT_REFINE_TOL).unwrap();
    let hill = spectrum_1d(&q, bs.bands[3].max + 5.0).unwrap();
    if hill.bands.len() < 4 {
        return Err(format!("Hill found only {} bands", hill.bands.len()));
    }
    let worst = bs
        .bands
        .iter()
        .zip(&hill.bands)
        .map(|(b, h)| (b.min - h.lo).abs().max((b.max - h.hi).abs()))
        .fold(0.0, f64::max);
    within(t.elapsed(), Duration::from_secs(60))?;
    check(worst < 1e-6, format!("max edge difference {worst:.2e} over 4 bands in {:.1?}", t.elapsed()))
}

/// Samples strictly inside intervals shrunk by `margin`, weighted by length.
fn sample_in(rng: &mut ChaCha8Rng, intervals: &[Interval], margin: f64) -> f64 {
    let usable: Vec<(f64, f64)> = intervals
        .iter()
        .map(|i| (i.lo + margin, i.hi - margin))
        .filter(|(a, b)| b > a)
        .collect();
    let total: f64 = usable.iter().map(|(a, b)| b - a).sum();
    let mut u = rng.gen_range(0.0..total);
    for (a, b) in &usable {
        if u < b - a {
            return a + u;
        }
        u -= b - a;
    }
    usable.last().unwrap().1
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let q1 = FourierPotential::mathieu(1.0);
    let hill = spectrum_1d(&q1, 60.0).unwrap();
    let bands_1d: Vec<Interval> = hill.bands.iter().copied().filter(|b| b.hi < 60.0).collect();
    let mut gaps_1d: Vec<Interval> = hill.gaps.iter().copied().filter(|g| g.hi < 60.0).collect();
    gaps_1d[0] = Interval::new(hill.bands[0].lo - 3.0, hill.bands[0].lo);
    // Mathieu ⊕ Mathieu: the band sums overlap, leaving only the region below the bottom.
    let bottom_2d = 2.0 * hill.bands[0].lo;
    let bands_2d = [Interval::new(bottom_2d, 40.0)];
    let gaps_2d = [Interval::new(bottom_2d - 3.0, bottom_2d)];
    let q2 = SeparablePotential::new(vec![q1.clone(), q1.clone()]).unwrap().tensor_sum().unwrap();

    let fam1 = family(q1, 8);
    let fam2 = family(q2, 3);
    let grid1 = BrillouinGrid::new(1, 201).unwrap();
    let grid2 = BrillouinGrid::new(2, 41).unwrap();
    let mut cases: Vec<(usize, f64, bool)> = Vec::new();
    for _ in 0..10 {
        cases.push((1, sample_in(&mut rng, &bands_1d, 0.1), true));
        cases.push((2, sample_in(&mut rng, &bands_2d, 0.5), true));
    }
    for i in 0..20 {
        if i < 14 {
            cases.push((1, sample_in(&mut rng, &gaps_1d, 0.05), false));
        } else {
            cases.push((2, sample_in(&mut rng, &gaps_2d, 0.05), false));
        }
    }
    let mut wrong = Vec::new();
    for &(dim, lambda, inside) in &cases {
        let trace = if dim == 1 { trace_real(&fam1, lambda, &grid1) } else { trace_real(&fam2, lambda, &grid2) }
            .map_err(|e| format!("trace at {lambda}: {e}"))?;
        if trace.is_empty() == inside {
            wrong.push((dim, lambda));
        }
    }
    check(
        wrong.is_empty(),
        format!("{} samples (20 in-band, 20 in-gap), misclassified {wrong:?}, {:.1?}", cases.len(), t.elapsed()),
    )
}

fn criterion_4() -> Outcome {
    let t = Instant::now();
    let q1 = FourierPotential::mathieu(1.0);
    let q = SeparablePotential::new(vec![q1.clone(), q1.clone()]).unwrap().tensor_sum().unwrap();
    let fam = family(q, 3);
    let lambda = 5.0;
    let trace = trace_real(&fam, lambda, &BrillouinGrid::new(2, 121).unwrap()).map_err(|e| e.to_string())?;
    let sep = separable_cross_check(&q1, &q1, lambda, &trace).map_err(|e| e.to_string())?;
    within(t.elapsed(), Duration::from_secs(300))?;
    check(
        trace.vertex_count() > 0 && sep.max_residual < 1e-5 && sep.unmatched == 0,
        format!(
            "{} vertices at λ = {lambda}, max Hill residual {:.2e}, vertex residual {:.2e}, {:.1?}",
            trace.vertex_count(),
            sep.max_residual,
            trace.max_residual(),
            t.elapsed()
        ),
    )
}

fn criterion_5() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let families = [family(FourierPotential::free(1).unwrap(), 8), family(FourierPotential::mathieu(1.0), 8)];
    let mut mismatches = Vec::new();
    let mut rects = 0;
    let mut total_roots = 0;
    for i in 0..60 {
        let fam = &families[i % 2];
        let lambda = rng.gen_range(-2.0..25.0);
        // Most rectangles straddle the real axis, where the real roots live.
        let re0 = rng.gen_range(-1.0..5.0);
        let (im0, im1) = if i % 5 == 4 {
            let a = rng.gen_range(0.05..1.0);
            (a, a + rng.gen_range(0.3..2.0))
        } else {
            (-rng.gen_range(0.05..1.5), rng.gen_range(0.05..1.5))
        };
        let rect = Rect::new(re0, re0 + rng.gen_range(0.5..4.0), im0, im1).unwrap();
        let probe = ComplexLineProbe::new(vec![0.0], 0, rect).unwrap();
        let count = complex_zero_count(fam, lambda, &probe).map_err(|e| e.to_string())?;
        let roots = polish_zeros(fam, lambda, &probe).map_err(|e| e.to_string())?;
        rects += 1;
        total_roots += roots.len();
        if count.count != roots.len() || roots.iter().any(|r| !r.polished) {
            mismatches.push((lambda, rect, count.count, roots.len()));
        }
    }
    // Gap probes against the Hill Floquet exponent.
    let q = FourierPotential::mathieu(1.0);
    let hill = spectrum_1d(&q, 100.0).unwrap();
    let mut worst = 0.0f64;
    let mut gap_probes = Vec::new();
    for gap in hill.gaps.iter().take(4).skip(1).chain(std::iter::once(&Interval::new(-2.0, hill.bands[0].lo))) {
        let lambda = gap.midpoint();
        let exact = floquet_exponent(&q, Complex64::new(lambda, 0.0)).map_err(|e| e.to_string())?;
        let re = if exact.re > PI + 0.1 { exact.re - 2.0 * PI } else { exact.re };
        let rect = Rect::new(re - 0.5, re + 0.5, 0.5 * exact.im, exact.im + 1.0).unwrap();
        let probe = ComplexLineProbe::new(vec![0.0], 0, rect).unwrap();
        let roots = polish_zeros(&families[1], lambda, &probe).map_err(|e| e.to_string())?;
        if roots.len() != 1 {
            return Err(format!("gap probe at {lambda} found {} roots", roots.len()));
        }
        worst = worst.max((roots[0].z - Complex64::new(re, exact.im)).norm());
        gap_probes.push(format!("{:.4}+{:.2e}i", re, exact.im));
    }
    check(
        mismatches.is_empty() && worst < 1e-6,
        format!(
            "{rects} rectangles, {total_roots} roots, mismatches {mismatches:?}; gap roots {gap_probes:?} vs Floquet exponent {worst:.2e}; {:.1?}",
            t.elapsed()
        ),
    )
}

fn bump(dim: usize, cells: usize, samples: usize) -> CellArray {
    CellArray::from_fn(dim, cells, samples, |l, x| {
        let r2: f64 = l.iter().zip(x).map(|(l, x)| (*l as f64 + x - 0.3).powi(2)).sum();
        let phase: f64 = l.iter().zip(x).map(|(l, x)| *l as f64 + x).sum();
        Complex64::from_polar((-r2 / 0.25).exp(), 2.0 * phase)
    })
    .unwrap()
}

fn criterion_6() -> Outcome {
    let t = Instant::now();
    let mut worst_identity = 0.0f64;
    for (dim, cells, samples) in [(1, 6, 32), (2, 6, 8)] {
        let f = bump(dim, cells, samples);
        let e1: Vec<i64> = (0..dim).map(|d| i64::from(d == 0)).collect();
        let k: Vec<f64> = (0..dim).map(|d| 0.7 + 0.4 * d as f64).collect();
        worst_identity = worst_identity
            .max(plancherel_defect(&f).map_err(|e| e.to_string())?)
            .max(shift_covariance_defect(&f, &e1, &k).map_err(|e| e.to_string())?)
            .max(quasi_periodicity_defect(&f, &k, &e1).map_err(|e| e.to_string())?);
    }
    let mut worst_diag = 0.0f64;
    for (dim, q) in [(1, FourierPotential::mathieu(1.0)), (2, FourierPotential::parse_preset("mathieu2d:1,0.5", 2).unwrap())] {
        let f = bump(dim, 6, 32);
        let r = diagonalization_residual(&f, &q, &dual_grid(dim, 6)).map_err(|e| e.to_string())?;
        if !r.guard_ok {
            return Err("test function not contained in the cell range".into());
        }
        worst_diag = worst_diag.max(r.residual);
    }
    check(
        worst_identity < 1e-12 && worst_diag < 1e-6,
        format!("identities {worst_identity:.2e}, diagonalization {worst_diag:.2e} at 32 samples/cell, {:.1?}", t.elapsed()),
    )
}

fn criterion_7() -> Outcome {
    let t = Instant::now();
    let cells = 40;
    let gauss = growth_input(1, cells, 2.0).unwrap();
    let fit2 = growth_order_probe(&gauss, &[1.0], &growth_taus(cells, 2.0)).map_err(|e| e.to_string())?;
    let single = CellArray::from_fn(1, 4, 1, |l, _| if l[0] == 1 { 1.0.into() } else { 0.0.into() }).unwrap();
    let taus: Vec<f64> = (1..=20).map(f64::from).collect();
    let fit1 = growth_order_probe(&single, &[1.0], &taus).map_err(|e| e.to_string())?;
    check(
        (fit2.s_hat - 2.0).abs() <= 0.2 && (fit1.s_hat - 1.0).abs() <= 0.1,
        format!("r = 2: ŝ = {:.4}; single cell: ŝ = {:.4}; {:.1?}", fit2.s_hat, fit1.s_hat, t.elapsed()),
    )
}

fn criterion_8() -> Outcome {
    let t = Instant::now();
    let q = FourierPotential::mathieu(1.0);
    let ladder = [20.0, 40.0, 80.0];
    let p = BoxProblem::new(q.clone(), Impurity::gaussian(-2.0, 1.0).unwrap(), 80.0, 0.01).unwrap();
    let scan = stability_scan(&p, &ladder, (-2.0, 12.0)).map_err(|e| e.to_string())?;
    let eig: Vec<_> = scan.report.eigenvalues().collect();
    let in_band = eig.iter().filter(|c| matches!(c.location, Some(SpectralLocation::Band { .. }))).count();
    let gap_ok = eig
        .iter()
        .filter(|c| matches!(c.location, Some(SpectralLocation::Gap { .. })) && (c.decay.p - 1.0).abs() <= 0.1)
        .count();
    let part_a = in_band == 0 && gap_ok >= 1;
    let detail_a = format!(
        "(a) {} candidates, {} eigenvalue-classified in bands, {} in gaps with p≈1 ({})",
        scan.report.candidates.len(),
        in_band,
        gap_ok,
        eig.iter().map(|c| format!("λ={:.6} p={:.3}", c.lambda, c.decay.p)).collect::<Vec<_>>().join(", ")
    );

    let w = make_wvn(&q, 4.0, Envelope::default(), 80.0).map_err(|e| e.to_string())?;
    let target = w.lambda;
    let p = BoxProblem::new(q, Impurity::power_oscillatory(w), 80.0, 0.01).unwrap();
    let scan = stability_scan(&p, &ladder, (target - 0.05, target + 0.05)).map_err(|e| e.to_string())?;
    let eig: Vec<_> = scan.report.eigenvalues().collect();
    let part_b = eig.len() == 1
        && (eig[0].lambda - target).abs() <= 1e-3
        && eig[0].residual < 1e-6
        && matches!(eig[0].location, Some(SpectralLocation::Band { .. }));
    let detail_b = format!(
        "(b) λ* = {target:.6}: {} eigenvalue-classified ({})",
        eig.len(),
        eig.iter().map(|c| format!("λ−λ*={:.1e} residual={:.1e}", c.lambda - target, c.residual)).collect::<Vec<_>>().join(", ")
    );
    within(t.elapsed(), Duration::from_secs(600))?;
    let classified = scan.report.candidates.iter().filter(|c| c.classification != Classification::Undecided).count();
    check(part_a && part_b, format!("{detail_a}; {detail_b}; {classified} decided in (b); {:.1?}", t.elapsed()))
}

fn same_trace(a: &FermiTrace, b: &FermiTrace) -> f64 {
    let (va, vb) = (a.vertices(), b.vertices());
    if va.len() != vb.len() {
        return f64::INFINITY;
    }
    va.iter()
        .zip(&vb)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max)
}

fn criterion_9() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    let mut vertices = 0;
    for i in 0..10 {
        let (q, cutoff, grid) = if i % 2 == 0 {
            (FourierPotential::mathieu(rng.gen_range(0.2..2.0)), 8, BrillouinGrid::new(1, 201).unwrap())
        } else {
            let parts = vec![FourierPotential::mathieu(rng.gen_range(0.2..2.0)), FourierPotential::mathieu(rng.gen_range(0.2..2.0))];
            (SeparablePotential::new(parts).unwrap().tensor_sum().unwrap(), 3, BrillouinGrid::new(2, 31).unwrap())
        };
        let lambda = rng.gen_range(0.5..20.0);
        let a = trace_real(&family(q.clone(), cutoff), lambda, &grid).map_err(|e| e.to_string())?;
        let b = trace_real(&family(q.shifted(-lambda), cutoff), 0.0, &grid).map_err(|e| e.to_string())?;
        vertices += a.vertex_count();
        worst = worst.max(same_trace(&a, &b));
    }
    check(worst < 1e-8, format!("10 cases, {vertices} vertices, max difference {worst:.2e}, {:.1?}", t.elapsed()))
}

fn main() {
    // `cargo test -- --list` and filters: the suite has no subtests to list.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [(usize, &str, fn() -> Outcome); 9] = [
        (1, "free-operator exactness", criterion_1),
        (2, "plane-wave vs Hill band edges", criterion_2),
        (3, "spectrum iff real Fermi variety nonempty", criterion_3),
        (4, "separable cross-validation", criterion_4),
        (5, "argument-principle soundness", criterion_5),
        (6, "Floquet transform identities", criterion_6),
        (7, "growth order", criterion_7),
        (8, "embedded-eigenvalue dichotomy", criterion_8),
        (9, "energy shift relation", criterion_9),
    ];
    let mut failed = 0;
    for (n, name, f) in criteria {
        match std::panic::catch_unwind(f) {
            Ok(Ok(detail)) => println!("criterion {n} ({name}): PASS: {detail}"),
            Ok(Err(detail)) => {
                failed += 1;
                println!("criterion {n} ({name}): FAIL: {detail}");
            }
            Err(_) => {
                failed += 1;
                println!("criterion {n} ({name}): FAIL: panicked");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

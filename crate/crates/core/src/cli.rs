//! Command-line front end: argument parsing, run manifests and output files.
//!
//! Every run writes its data files plus `manifest.json` into `--out`. The
//! manifest echoes the resolved configuration, so `replay` regenerates the
//! same files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::band_structure::{band_functions, extract_bands, BrillouinGrid, DEFAULT_REFINE_TOL};
use crate::fermi::{
    complex_zero_count, component_report, polish_zeros, separable_cross_check, trace_real, ComplexLineProbe,
};
use crate::floquet_transform::{
    diagonalization_residual, dual_grid, growth_order_probe, inverse, legendre_growth, plancherel_defect,
    quasi_periodicity_defect, shift_covariance_defect, transform, CellArray,
};
use crate::hill::{discriminant, floquet_exponent, spectrum_1d};
use crate::perturbed::{stability_scan, BoxProblem, Impurity, DEFAULT_STEP};
use crate::{BlochFamily, Error, FourierPotential, PlaneWaveBasis};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
/// Output files could not be written.
pub const EXIT_IO: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Output(_) => EXIT_IO,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

fn config<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Config(msg.into()))
}

#[derive(Debug, Clone, Parser)]
#[command(name = "floquet-lab", version, about = "Spectral experiments for periodic Schrödinger operators")]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "FLOQUET_LAB_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

/// A fully resolved run; this is what the manifest stores.
#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Band functions on a Brillouin grid and the band/gap summary.
    Bands(BandsArgs),
    /// Real Fermi variety at energy λ, with an optional complex line probe.
    Fermi(FermiArgs),
    /// Hill discriminant spectrum of a 1D potential.
    Hill(HillArgs),
    /// Finite-box eigenvalue scan across a ladder of box sizes.
    Scan(ScanArgs),
    /// Consistency checks of the Floquet transform.
    FloquetCheck(FloquetArgs),
    /// Re-run the configuration stored in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct BandsArgs {
    #[arg(long, default_value = "mathieu:1")]
    pub potential: String,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// Nodes per axis.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, default_value_t = 4)]
    pub nbands: usize,
    #[arg(long, default_value_t = DEFAULT_REFINE_TOL)]
    pub refine_tol: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FermiArgs {
    #[arg(long, default_value = "free")]
    pub potential: String,
    /// Defaults to 2 unless the potential fixes it.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(long)]
    pub cutoff: Option<usize>,
    #[arg(long)]
    pub grid: Option<usize>,
    /// Complex line probe `axis,re0,re1,im0,im1` through k = 0.
    #[arg(long, allow_hyphen_values = true)]
    pub probe: Option<String>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct HillArgs {
    #[arg(long, default_value = "mathieu:1")]
    pub potential: String,
    #[arg(long, default_value_t = 30.0)]
    pub lambda_max: f64,
    /// Energies at which to report D(λ) and the Floquet exponent.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lambda: Vec<f64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ScanArgs {
    #[arg(long, default_value = "mathieu:1")]
    pub background: String,
    /// `none`, `gaussian:A,w`, `wvn:λ` or `wvn:λ,β,γ`.
    #[arg(long, default_value = "gaussian:-2,1", allow_hyphen_values = true)]
    pub impurity: String,
    /// Energy window `a,b`.
    #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true, required = true)]
    pub window: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "20,40,80")]
    pub ladder: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_STEP)]
    pub h: f64,
    /// Also write the eigenvectors of the largest box.
    #[arg(long)]
    pub dump_vectors: bool,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FloquetArgs {
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Cells per direction on each side of the origin.
    #[arg(long, default_value_t = 6)]
    pub cells: usize,
    #[arg(long, default_value_t = 32)]
    pub samples: usize,
    /// Potential for the diagonalization check.
    #[arg(long, default_value = "mathieu:1")]
    pub potential: String,
    /// Also fit the growth order of a transform of `e^{−|l|^r}` cell weights.
    #[arg(long)]
    pub growth_r: Option<f64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Output directory; defaults to the one recorded in the manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: Command,
    pub outputs: Vec<String>,
}

/// Files produced by a run, in write order.
struct Outputs {
    dir: PathBuf,
    files: Vec<(String, String)>,
}

impl Outputs {
    fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf(), files: Vec::new() }
    }

    fn text(&mut self, name: &str, body: String) {
        self.files.push((name.to_string(), body));
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let body = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
        self.text(name, body + "\n");
        Ok(())
    }

    fn write(mut self, config: &Command) -> Result<Vec<String>, CliError> {
        let names: Vec<String> = self.files.iter().map(|(n, _)| n.clone()).collect();
        let manifest = Manifest {
            tool: "floquet-lab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: config.clone(),
            outputs: names.clone(),
        };
        self.json("manifest.json", &manifest)?;
        let io = |e: std::io::Error, p: &Path| CliError::Output(format!("{}: {e}", p.display()));
        fs::create_dir_all(&self.dir).map_err(|e| io(e, &self.dir))?;
        for (name, body) in &self.files {
            let path = self.dir.join(name);
            fs::write(&path, body).map_err(|e| io(e, &path))?;
        }
        Ok(names)
    }
}

/// Outcome of a successful run. `numerical_failure` is set when a report
/// carries a failure flag; the files are still written.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub out: PathBuf,
    pub files: Vec<String>,
    pub numerical_failure: Option<String>,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        if self.numerical_failure.is_some() {
            EXIT_NUMERICAL
        } else {
            EXIT_OK
        }
    }
}

/// Dimension fixed by a preset, if any.
fn preset_dim(spec: &str) -> Result<Option<usize>, CliError> {
    let name = spec.split_once(':').map_or(spec, |(n, _)| n);
    Ok(match name {
        "mathieu" => Some(1),
        "mathieu2d" => Some(2),
        "mathieu3d" => Some(3),
        "file" => {
            let path = &spec[5..];
            if !Path::new(path).is_file() {
                return config(format!("potential file '{path}' does not exist"));
            }
            Some(FourierPotential::load(Path::new(path))?.dim())
        }
        _ => None,
    })
}

pub fn resolve_potential(spec: &str, dim: Option<usize>, default_dim: usize) -> Result<FourierPotential, CliError> {
    let fixed = preset_dim(spec)?;
    let dim = match (fixed, dim) {
        (Some(f), Some(d)) if f != d => return config(format!("--dim {d} conflicts with potential '{spec}' (dimension {f})")),
        (Some(f), _) => f,
        (None, Some(d)) => d,
        (None, None) => default_dim,
    };
    if !(1..=3).contains(&dim) {
        return config(format!("--dim must be 1, 2 or 3 (got {dim})"));
    }
    Ok(FourierPotential::parse_preset(spec, dim)?)
}

fn family(q: FourierPotential, cutoff: Option<usize>) -> Result<BlochFamily, CliError> {
    let dim = q.dim();
    let basis = PlaneWaveBasis::new(dim, cutoff.unwrap_or_else(|| PlaneWaveBasis::default_cutoff(dim)))?;
    Ok(BlochFamily::new(basis, q)?)
}

fn grid(dim: usize, nodes: Option<usize>) -> Result<BrillouinGrid, CliError> {
    Ok(BrillouinGrid::new(dim, nodes.unwrap_or_else(|| BrillouinGrid::default_resolution(dim)))?)
}

/// Parses command-line arguments, runs and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("configuration error: thread count must be positive");
            return EXIT_CONFIG;
        }
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(&cli.command) {
        Ok(summary) => {
            if let Some(msg) = &summary.numerical_failure {
                eprintln!("numerical failure: {msg}");
            }
            summary.exit_code()
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

pub fn run(command: &Command) -> Result<RunSummary, CliError> {
    match command {
        Command::Bands(a) => run_bands(a),
        Command::Fermi(a) => run_fermi(a),
        Command::Hill(a) => run_hill(a, command),
        Command::Scan(a) => run_scan(a, command),
        Command::FloquetCheck(a) => run_floquet(a, command),
        Command::Replay(a) => {
            let text = fs::read_to_string(&a.manifest)
                .map_err(|e| CliError::Config(format!("cannot read manifest {}: {e}", a.manifest.display())))?;
            let manifest: Manifest =
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("bad manifest: {e}")))?;
            let mut cmd = manifest.config;
            if let Some(out) = &a.out {
                match &mut cmd {
                    Command::Bands(x) => x.out = out.clone(),
                    Command::Fermi(x) => x.out = out.clone(),
                    Command::Hill(x) => x.out = out.clone(),
                    Command::Scan(x) => x.out = out.clone(),
                    Command::FloquetCheck(x) => x.out = out.clone(),
                    Command::Replay(_) => return config("a manifest cannot record a replay"),
                }
            }
            if matches!(cmd, Command::Replay(_)) {
                return config("a manifest cannot record a replay");
            }
            run(&cmd)
        }
    }
}

fn finish(out: Outputs, command: &Command, failure: Option<String>) -> Result<RunSummary, CliError> {
    let dir = out.dir.clone();
    let files = out.write(command)?;
    Ok(RunSummary { out: dir, files, numerical_failure: failure })
}

fn run_bands(a: &BandsArgs) -> Result<RunSummary, CliError> {
    let q = resolve_potential(&a.potential, a.dim, 1)?;
    let dim = q.dim();
    let fam = family(q, a.cutoff)?;
    let g = grid(dim, a.grid)?;
    if a.nbands == 0 {
        return config("--nbands must be positive");
    }
    let bs = extract_bands(&fam, band_functions(&fam, &g, a.nbands)?, a.refine_tol)?;
    let mut csv = String::new();
    let head: Vec<String> = (1..=dim).map(|d| format!("k{d}")).chain((1..=a.nbands).map(|j| format!("band{j}"))).collect();
    csv.push_str(&head.join(","));
    csv.push('\n');
    for (i, row) in bs.values.iter().enumerate() {
        let cells: Vec<String> = g.node(i).iter().chain(row.iter()).map(|v| v.to_string()).collect();
        csv.push_str(&cells.join(","));
        csv.push('\n');
    }
    #[derive(Serialize)]
    struct Summary<'a> {
        potential: &'a str,
        dim: usize,
        cutoff: usize,
        grid: usize,
        bands: &'a [crate::band_structure::Band],
        gaps: &'a [crate::hill::Interval],
    }
    let resolved = Command::Bands(BandsArgs {
        dim: Some(dim),
        cutoff: Some(fam.basis().cutoff()),
        grid: Some(g.resolution),
        ..a.clone()
    });
    let mut out = Outputs::new(&a.out);
    out.text("bands.csv", csv);
    out.json(
        "summary.json",
        &Summary {
            potential: &a.potential,
            dim,
            cutoff: fam.basis().cutoff(),
            grid: g.resolution,
            bands: &bs.bands,
            gaps: &bs.gaps,
        },
    )?;
    finish(out, &resolved, None)
}

fn parse_mathieu2d(spec: &str) -> Option<(f64, f64)> {
    let args = spec.strip_prefix("mathieu2d:")?;
    let (a, b) = args.split_once(',')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

fn run_fermi(a: &FermiArgs) -> Result<RunSummary, CliError> {
    let q = resolve_potential(&a.potential, a.dim, 2)?;
    let dim = q.dim();
    let probe = a.probe.as_deref().map(|p| ComplexLineProbe::parse(p, dim)).transpose()?;
    let fam = family(q, a.cutoff)?;
    let g = grid(dim, a.grid)?;
    let trace = trace_real(&fam, a.lambda, &g)?;
    let report = component_report(&trace);

    let mut csv = String::new();
    if dim == 1 {
        csv.push_str("k,residual\n");
        for (k, r) in trace.points.iter().zip(&trace.point_residuals) {
            let _ = writeln!(csv, "{k},{r}");
        }
    } else {
        csv.push_str("slice,k3,k1_start,k2_start,k1_end,k2_end,residual_start,residual_end,component\n");
        for (si, s) in trace.slices.iter().enumerate() {
            let k3 = s.k3.map_or(String::new(), |v| v.to_string());
            for (seg, c) in s.segments.iter().zip(&s.component_ids) {
                let (p, r) = (s.vertices[seg[0]], s.vertices[seg[1]]);
                let _ = writeln!(
                    csv,
                    "{si},{k3},{},{},{},{},{},{},{c}",
                    p[0], p[1], r[0], r[1], s.residuals[seg[0]], s.residuals[seg[1]]
                );
            }
        }
    }

    let separable = match parse_mathieu2d(&a.potential) {
        Some((x, y)) => Some(separable_cross_check(&FourierPotential::mathieu(x), &FourierPotential::mathieu(y), a.lambda, &trace)?),
        None => None,
    };
    let mut failure = None;
    let probe_report = match &probe {
        Some(p) => match complex_zero_count(&fam, a.lambda, p).and_then(|c| Ok((c, polish_zeros(&fam, a.lambda, p)?))) {
            Ok((count, roots)) => {
                if roots.len() != count.count || roots.iter().any(|r| !r.polished) {
                    failure = Some("probe roots could not all be isolated and polished".to_string());
                }
                Some(serde_json::json!({ "probe": p, "count": count, "roots": roots }))
            }
            Err(e) if e.is_numerical() => {
                failure = Some(e.to_string());
                Some(serde_json::json!({ "probe": p, "failure": e.to_string() }))
            }
            Err(e) => return Err(e.into()),
        },
        None => None,
    };
    let saddles: usize = trace.slices.iter().map(|s| s.saddle_cells).sum();
    let summary = serde_json::json!({
        "potential": a.potential,
        "dim": dim,
        "lambda": a.lambda,
        "grid": g.resolution,
        "cutoff": fam.basis().cutoff(),
        "empty": trace.is_empty(),
        "vertices": trace.vertex_count(),
        "max_residual": trace.max_residual(),
        "saddle_cells": saddles,
        "components": report,
        "separable_check": separable,
        "probe": probe_report,
    });
    let resolved = Command::Fermi(FermiArgs {
        dim: Some(dim),
        cutoff: Some(fam.basis().cutoff()),
        grid: Some(g.resolution),
        ..a.clone()
    });
    let mut out = Outputs::new(&a.out);
    out.text("trace.csv", csv);
    out.json("fermi.json", &summary)?;
    finish(out, &resolved, failure)
}

fn run_hill(a: &HillArgs, command: &Command) -> Result<RunSummary, CliError> {
    let q = resolve_potential(&a.potential, Some(1), 1)?;
    let spectrum = spectrum_1d(&q, a.lambda_max)?;
    let mut at = Vec::new();
    for &lambda in &a.lambda {
        let d = discriminant(&q, Complex64::new(lambda, 0.0))?;
        let k = floquet_exponent(&q, Complex64::new(lambda, 0.0))?;
        at.push(serde_json::json!({ "lambda": lambda, "discriminant": d.re, "floquet_exponent": k }));
    }
    let mut out = Outputs::new(&a.out);
    out.json("hill.json", &serde_json::json!({ "potential": a.potential, "spectrum": spectrum, "evaluations": at }))?;
    finish(out, command, None)
}

fn run_scan(a: &ScanArgs, command: &Command) -> Result<RunSummary, CliError> {
    if a.window.len() != 2 {
        return config("--window takes two values a,b");
    }
    let background = resolve_potential(&a.background, None, 1)?;
    let l_max = a.ladder.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !l_max.is_finite() {
        return config("--ladder must list box half-widths");
    }
    let impurity = Impurity::parse(&a.impurity, &background, l_max)?;
    let p = BoxProblem::new(background, impurity, l_max, a.h)?;
    let scan = stability_scan(&p, &a.ladder, (a.window[0], a.window[1]))?;
    let mut out = Outputs::new(&a.out);
    out.json("report.json", &scan.report)?;
    if a.dump_vectors {
        let points = p.points();
        let mut csv = String::new();
        let mut head: Vec<String> = (1..=p.dim).map(|d| format!("x{d}")).collect();
        head.extend((0..scan.top.pairs.len()).map(|j| format!("u{j}")));
        csv.push_str(&head.join(","));
        csv.push('\n');
        for (i, x) in points.iter().enumerate() {
            let cells: Vec<String> =
                x.iter().map(|v| v.to_string()).chain(scan.top.pairs.iter().map(|e| e.vector[i].to_string())).collect();
            csv.push_str(&cells.join(","));
            csv.push('\n');
        }
        out.text("vectors.csv", csv);
    }
    let failure = scan.report.partial.then(|| "some eigenpairs missed the residual bound".to_string());
    finish(out, command, failure)
}

/// Gaussian bump times a plane wave, well inside `[−L, L]` cells.
fn test_function(dim: usize, cells: usize, samples: usize) -> Result<CellArray, CliError> {
    Ok(CellArray::from_fn(dim, cells, samples, |l, x| {
        let r2: f64 = l.iter().zip(x).map(|(l, x)| (*l as f64 + x - 0.3).powi(2)).sum();
        let phase: f64 = l.iter().zip(x).map(|(l, x)| *l as f64 + x).sum();
        Complex64::from_polar((-r2 / 0.25).exp(), 2.0 * phase)
    })?)
}

/// Origin impulses with cell weights `e^{−|l|^r}`.
pub fn growth_input(dim: usize, cells: usize, r: f64) -> Result<CellArray, Error> {
    CellArray::from_fn(dim, cells, 1, |l, _| {
        let n = l.iter().map(|v| (*v as f64).powi(2)).sum::<f64>().sqrt();
        Complex64::new((-n.powf(r)).exp(), 0.0)
    })
}

/// Rates `τ` over which the growth fit is taken for weights `e^{−|l|^r}`.
/// The maximizing cell `(τ/r)^{1/(r−1)}` stays within half of `cells` and
/// the peak `log` size below 500.
pub fn growth_taus(cells: usize, r: f64) -> Vec<f64> {
    let (s, c) = legendre_growth(r);
    let t_max = (r * (0.5 * cells as f64).powf(r - 1.0)).min((500.0 / c).powf(1.0 / s));
    (1..=24).map(|i| t_max * i as f64 / 24.0).collect()
}

fn run_floquet(a: &FloquetArgs, command: &Command) -> Result<RunSummary, CliError> {
    if !(1..=3).contains(&a.dim) || a.cells == 0 || a.samples == 0 {
        return config("floquet-check needs dim 1..3 and positive cells/samples");
    }
    let f = test_function(a.dim, a.cells, a.samples)?;
    let q = resolve_potential(&a.potential, Some(a.dim), a.dim)?;
    let e1: Vec<i64> = (0..a.dim).map(|d| i64::from(d == 0)).collect();
    let k: Vec<f64> = (0..a.dim).map(|d| 0.7 + 0.4 * d as f64).collect();
    let back = inverse(&transform(&f)?)?;
    let round_trip = f.values().iter().zip(back.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let diag = diagonalization_residual(&f, &q, &dual_grid(a.dim, a.cells))?;
    let growth = match a.growth_r {
        Some(r) if r > 1.0 => {
            let cells = 40;
            let g = growth_input(a.dim, cells, r)?;
            let dir: Vec<f64> = e1.iter().map(|&v| v as f64).collect();
            let fit = growth_order_probe(&g, &dir, &growth_taus(cells, r))?;
            let (s, c) = legendre_growth(r);
            Some(serde_json::json!({ "r": r, "fit": fit, "expected_order": s, "expected_constant": c }))
        }
        Some(r) => return config(format!("--growth-r must exceed 1 (got {r})")),
        None => None,
    };
    let report = serde_json::json!({
        "dim": a.dim,
        "cells": a.cells,
        "samples": a.samples,
        "plancherel_defect": plancherel_defect(&f)?,
        "round_trip_error": round_trip,
        "shift_covariance_defect": shift_covariance_defect(&f, &e1, &k)?,
        "quasi_periodicity_defect": quasi_periodicity_defect(&f, &k, &e1)?,
        "diagonalization": diag,
        "growth": growth,
    });
    let failure = (!diag.guard_ok).then(|| "test function is not contained in the cell range".to_string());
    let mut out = Outputs::new(&a.out);
    out.json("floquet.json", &report)?;
    finish(out, command, failure)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_fix_dimension() {
        assert_eq!(resolve_potential("mathieu2d:1,1", None, 1).unwrap().dim(), 2);
        assert_eq!(resolve_potential("free", None, 2).unwrap().dim(), 2);
        assert!(matches!(resolve_potential("mathieu:1", Some(2), 1), Err(CliError::Config(_))));
        assert!(matches!(resolve_potential("file:/no/such/file.json", None, 1), Err(CliError::Config(_))));
    }

    #[test]
    fn error_codes() {
        assert_eq!(CliError::from(Error::NonConvergence("x".into())).exit_code(), EXIT_NUMERICAL);
        assert_eq!(CliError::from(Error::InvalidInput("x".into())).exit_code(), EXIT_CONFIG);
        assert_eq!(main_with_args(["floquet-lab", "bands", "--nbands", "x"]), EXIT_CONFIG);
        assert_eq!(main_with_args(["floquet-lab", "scan"]), EXIT_CONFIG);
    }

    #[test]
    fn scan_window_parses_negative_values() {
        let cli = Cli::try_parse_from(["floquet-lab", "scan", "--window", "-2,0.5", "--impurity", "gaussian:-2,1"]).unwrap();
        let Command::Scan(s) = cli.command else { panic!() };
        assert_eq!(s.window, vec![-2.0, 0.5]);
        assert_eq!(s.ladder, vec![20.0, 40.0, 80.0]);
    }
}

//! Command-line front end: argument parsing, configuration, output files
//! and the exit-code contract.
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | selftest failure |
//! | 2 | configuration error |
//! | 3 | numeric failure |
//! | 4 | certification mismatch |

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::exec::{configure_threads, Execution};
use crate::haar::{phase_sequence, SeedSpec};
use crate::lie::{alpha_hash, certify, Verdict, DEFAULT_MAX_ROUNDS};
use crate::linalg::C64;
use crate::lyapunov::{
    distinctness_report, lyapunov_spectrum, point_seed, roots_of_unity, sweep, write_csv,
    LyapunovConfig, CONVENTION_NOTE,
};
use crate::selftest;
use crate::spectral::finite_spectrum;
use crate::zipper::{assemble_finite, make_verblunsky, AlphaFile, VerblunskyData};

pub const OUT_ENV: &str = "ZIPPER_OUT";
pub const EXIT_SELFTEST: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;
/// Distance from the unit circle accepted (and renormalized) for `--z`.
pub const Z_RENORM_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "zipper", version, about = "Random scattering zipper laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lyapunov spectrum at a single spectral parameter.
    Lyapunov(RunArgs),
    /// Lyapunov spectra over a grid of spectral parameters.
    Sweep(RunArgs),
    /// Lie closure certification of the transfer group.
    LieCheck(RunArgs),
    /// Eigenvalues and block IPR of a periodic truncation.
    Spectrum(RunArgs),
    /// Invariant suite at small sizes.
    Selftest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, Args)]
pub struct RunArgs {
    /// Channel count L.
    #[arg(long = "L", default_value_t = 1)]
    pub l: usize,
    /// Scalar a (α = a·𝟙) or a path to a JSON α file.
    #[arg(long, default_value = "0.5")]
    pub alpha: String,
    /// Spectral parameter as `re,im`, `re`, or `i`.
    #[arg(long, conflicts_with = "z_grid")]
    pub z: Option<String>,
    /// Use the N-th roots of unity.
    #[arg(long = "z-grid")]
    pub z_grid: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 16)]
    pub realizations: usize,
    #[arg(long = "reorth-period", default_value_t = 1)]
    pub reorth_period: usize,
    #[arg(long = "n-blocks", default_value_t = 200)]
    pub n_blocks: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = OUT_ENV, default_value = "zipper-out")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Overwrite existing result files.
    #[arg(long)]
    pub force: bool,
    /// Worker threads (default: available cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Where α came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AlphaSource {
    Scalar { value: f64 },
    File { path: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Lyapunov,
    Sweep,
    LieCheck,
    Spectrum,
}

impl CommandKind {
    fn stem(self) -> &'static str {
        match self {
            CommandKind::Lyapunov => "lyapunov",
            CommandKind::Sweep => "sweep",
            CommandKind::LieCheck => "lie-check",
            CommandKind::Spectrum => "spectrum",
        }
    }
}

/// Validated run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(rename = "L")]
    pub l: usize,
    pub alpha_source: AlphaSource,
    pub alpha: AlphaFile,
    pub z_points: Vec<[f64; 2]>,
    pub n_steps: usize,
    pub n_realizations: usize,
    pub reorth_period: usize,
    pub n_blocks: usize,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub format: Format,
    pub force: bool,
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskSeed {
    pub task: String,
    pub seed: SeedSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub timestamp_unix: u64,
    pub config: RunConfig,
    pub conventions: Vec<String>,
    pub seeds: Vec<TaskSeed>,
    pub outputs: Vec<String>,
}

/// Error carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn config(msg: impl Into<String>) -> Self {
        Failure {
            code: EXIT_CONFIG,
            message: msg.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidArgument(_)
            | Error::ContractionViolation { .. }
            | Error::DefectInversion { .. }
            | Error::Degenerate(_)
            | Error::Io(_)
            | Error::Json(_) => EXIT_CONFIG,
            Error::SingularBlock { .. }
            | Error::LorentzDrift { .. }
            | Error::NumericFailure { .. }
            | Error::NonConvergence { .. } => EXIT_NUMERIC,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// `re,im`, `re`, `i` or `-i`; points within `1e-9` of the circle are
/// renormalized, others rejected.
pub fn parse_z(text: &str) -> Result<C64, Failure> {
    let t = text.trim();
    let z = match t {
        "i" | "+i" => C64::new(0.0, 1.0),
        "-i" => C64::new(0.0, -1.0),
        _ => {
            let parts: Vec<&str> = t.split(',').map(str::trim).collect();
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Failure::config(format!("cannot parse z component {s:?}")))
            };
            match parts.as_slice() {
                [re] => C64::new(num(re)?, 0.0),
                [re, im] => C64::new(num(re)?, num(im)?),
                _ => return Err(Failure::config(format!("z must be re,im; got {text:?}"))),
            }
        }
    };
    let r = z.norm();
    if !((r - 1.0).abs() <= Z_RENORM_TOL) {
        return Err(Failure::config(format!("|z| = {r} is not on the unit circle")));
    }
    Ok(z / r)
}

fn load_alpha(l: usize, text: &str) -> Result<(AlphaSource, AlphaFile), Failure> {
    if let Ok(value) = text.trim().parse::<f64>() {
        return Ok((AlphaSource::Scalar { value }, AlphaFile::Scalar { l, scalar: value }));
    }
    let path = PathBuf::from(text);
    let file = AlphaFile::load(&path)
        .map_err(|e| Failure::config(format!("cannot read alpha file {}: {e}", path.display())))?;
    if file.l() != l {
        return Err(Failure::config(format!(
            "alpha file has L = {}, --L is {l}",
            file.l()
        )));
    }
    Ok((AlphaSource::File { path }, file))
}

impl RunConfig {
    pub fn from_args(command: CommandKind, a: &RunArgs) -> Result<Self, Failure> {
        if a.l == 0 {
            return Err(Failure::config("--L must be at least 1"));
        }
        let (alpha_source, alpha) = load_alpha(a.l, &a.alpha)?;
        let z_points: Vec<C64> = match (&a.z, a.z_grid) {
            (Some(t), _) => vec![parse_z(t)?],
            (None, Some(0)) => return Err(Failure::config("--z-grid must be positive")),
            (None, Some(n)) => roots_of_unity(n),
            (None, None) => vec![C64::new(1.0, 0.0)],
        };
        if command == CommandKind::Lyapunov && z_points.len() != 1 {
            return Err(Failure::config("lyapunov takes a single --z; use sweep for grids"));
        }
        let cfg = RunConfig {
            command,
            l: a.l,
            alpha_source,
            alpha,
            z_points: z_points.iter().map(|z| [z.re, z.im]).collect(),
            n_steps: a.steps,
            n_realizations: a.realizations,
            reorth_period: a.reorth_period,
            n_blocks: a.n_blocks,
            master_seed: a.seed,
            output_dir: a.out.clone(),
            format: a.format,
            force: a.force,
            threads: a.threads,
        };
        // contraction and range checks happen before any work
        cfg.verblunsky()?;
        if matches!(command, CommandKind::Lyapunov | CommandKind::Sweep) {
            if cfg.n_steps < crate::lyapunov::MIN_STEPS {
                return Err(Failure::config("--steps must be at least 1000"));
            }
            if cfg.n_realizations < 2 {
                return Err(Failure::config("--realizations must be at least 2"));
            }
            if cfg.reorth_period == 0 {
                return Err(Failure::config("--reorth-period must be at least 1"));
            }
        }
        if command == CommandKind::Spectrum && (cfg.n_blocks < 4 || cfg.n_blocks % 2 != 0) {
            return Err(Failure::config("--n-blocks must be even and at least 4"));
        }
        Ok(cfg)
    }

    pub fn verblunsky(&self) -> Result<VerblunskyData, Failure> {
        Ok(make_verblunsky(self.alpha.to_matrix()?)?)
    }

    pub fn z(&self) -> Vec<C64> {
        self.z_points.iter().map(|p| C64::new(p[0], p[1])).collect()
    }

    fn lyapunov_config(&self) -> LyapunovConfig {
        LyapunovConfig::new(self.n_steps, self.n_realizations)
            .with_reorth_period(self.reorth_period)
            .with_execution(Execution::Parallel)
    }

    fn result_name(&self) -> String {
        let ext = match (self.command, self.format) {
            (CommandKind::LieCheck, _) | (_, Format::Json) => "json",
            (_, Format::Csv) => "csv",
        };
        format!("{}.{ext}", self.command.stem())
    }
}

pub const MANIFEST_NAME: &str = "manifest.json";

fn conventions(cfg: &RunConfig) -> Vec<String> {
    vec![
        CONVENTION_NOTE.to_string(),
        "finite truncation: periodic closure on n_blocks sites, even events in V, odd events in W".into(),
        "seeds: ChaCha8 streams named (master_seed, stream_id); per-task stream ids are derived by hashing task indices".into(),
        format!("alpha hash {}", cfg.alpha.to_matrix().map(|m| alpha_hash(&m)).unwrap_or_default()),
    ]
}

fn prepare_output(cfg: &RunConfig) -> Result<(PathBuf, PathBuf), Failure> {
    fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| Failure::config(format!("cannot create {}: {e}", cfg.output_dir.display())))?;
    let result = cfg.output_dir.join(cfg.result_name());
    let manifest = cfg.output_dir.join(MANIFEST_NAME);
    if !cfg.force {
        for p in [&result, &manifest] {
            if p.exists() {
                return Err(Failure::config(format!(
                    "{} exists; pass --force to overwrite",
                    p.display()
                )));
            }
        }
    }
    Ok((result, manifest))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let mut f = fs::File::create(path).map_err(Error::from)?;
    f.write_all(bytes).map_err(Error::from)?;
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> Result<Vec<u8>, Failure> {
    let mut s = serde_json::to_vec_pretty(v).map_err(Error::from)?;
    s.push(b'\n');
    Ok(s)
}

/// Outcome of a successful dispatch: written files and a stdout summary.
pub struct RunOutput {
    pub result_path: PathBuf,
    pub manifest_path: PathBuf,
    pub summary: String,
    pub code: i32,
}

/// Runs a validated configuration.
pub fn run(cfg: &RunConfig) -> Result<RunOutput, Failure> {
    let threads_note = configure_threads(cfg.threads);
    if let Err(e) = threads_note {
        // the global pool can only be configured once per process
        if cfg.threads.is_some() && !e.contains("already") {
            return Err(Failure::config(e));
        }
    }
    let vd = cfg.verblunsky()?;
    let (result_path, manifest_path) = prepare_output(cfg)?;
    let mut seeds = Vec::new();
    let mut code = 0;
    let (bytes, summary) = match cfg.command {
        CommandKind::Lyapunov => {
            let z = cfg.z()[0];
            let seed = point_seed(cfg.master_seed, 0);
            seeds.push(TaskSeed {
                task: "lyapunov".into(),
                seed,
            });
            let sp = lyapunov_spectrum(&vd, z, &cfg.lyapunov_config(), seed)?;
            let summary = format!(
                "gammas {:?}\nstderrs {:?}\nmax pairing residual {:.3e}",
                sp.gammas,
                sp.stderrs,
                sp.max_pairing_residual()
            );
            let bytes = match cfg.format {
                Format::Csv => {
                    let mut b = Vec::new();
                    write_csv(&mut b, &[&sp]).map_err(Error::from)?;
                    b
                }
                Format::Json => to_json(&serde_json::json!({
                    "spectrum": sp,
                    "pairing": sp.pairing(),
                    "gaps": distinctness_report(&sp),
                }))?,
            };
            (bytes, summary)
        }
        CommandKind::Sweep => {
            let grid = cfg.z();
            for i in 0..grid.len() {
                seeds.push(TaskSeed {
                    task: format!("sweep point {i}"),
                    seed: point_seed(cfg.master_seed, i),
                });
            }
            let res = sweep(&vd, &grid, &cfg.lyapunov_config(), cfg.master_seed)?;
            let ok: Vec<_> = res.points.iter().filter_map(|p| p.spectrum.as_ref()).collect();
            let failed = res.points.len() - ok.len();
            if failed > 0 {
                code = EXIT_NUMERIC;
            }
            let summary = format!("{} points, {} failed", res.points.len(), failed);
            let bytes = match cfg.format {
                Format::Csv => {
                    let mut b = Vec::new();
                    write_csv(&mut b, &ok).map_err(Error::from)?;
                    b
                }
                Format::Json => to_json(&res)?,
            };
            (bytes, summary)
        }
        CommandKind::LieCheck => {
            let mut reports = Vec::new();
            for z in cfg.z() {
                reports.push(certify(&vd, z, DEFAULT_MAX_ROUNDS)?);
            }
            if reports.iter().any(|r| r.verdict == Verdict::Mismatch) {
                code = EXIT_MISMATCH;
            }
            let summary = reports
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "dimension": r.dimension,
                        "expected": r.expected,
                        "expected-full": r.expected_full,
                        "verdict": r.verdict,
                    })
                    .to_string()
                })
                .collect::<Vec<_>>()
                .join("\n");
            let bytes = if reports.len() == 1 {
                to_json(&reports[0])?
            } else {
                to_json(&reports)?
            };
            (bytes, summary)
        }
        CommandKind::Spectrum => {
            let seed = SeedSpec::new(cfg.master_seed);
            seeds.push(TaskSeed {
                task: "phases".into(),
                seed,
            });
            let phases = phase_sequence(cfg.l, cfg.n_blocks, seed)?;
            let fz = assemble_finite(&vd, &phases, cfg.n_blocks)?;
            let rep = finite_spectrum(&fz)?
                .with_provenance(alpha_hash(vd.alpha()), Some(seed));
            let summary = format!(
                "{} eigenvalues, max circle residual {:.3e}, unitarity residual {:.3e}",
                rep.eigenvalues.len(),
                rep.max_circle_residual(),
                rep.unitarity_residual
            );
            let bytes = match cfg.format {
                Format::Csv => {
                    let mut b = Vec::new();
                    rep.write_csv(&mut b).map_err(Error::from)?;
                    b
                }
                Format::Json => to_json(&rep)?,
            };
            (bytes, summary)
        }
    };
    write_file(&result_path, &bytes)?;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        config: cfg.clone(),
        conventions: conventions(cfg),
        seeds,
        outputs: vec![cfg.result_name()],
    };
    write_file(&manifest_path, &to_json(&manifest)?)?;
    Ok(RunOutput {
        result_path,
        manifest_path,
        summary,
        code,
    })
}

/// Parses `args`, runs, prints, and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (kind, args) = match &cli.command {
        Command::Selftest => {
            let report = selftest::run();
            for c in &report.checks {
                println!("{} {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if report.passed() {
                return 0;
            }
            eprintln!("selftest failed: {}", report.failed().join(", "));
            return EXIT_SELFTEST;
        }
        Command::Lyapunov(a) => (CommandKind::Lyapunov, a),
        Command::Sweep(a) => (CommandKind::Sweep, a),
        Command::LieCheck(a) => (CommandKind::LieCheck, a),
        Command::Spectrum(a) => (CommandKind::Spectrum, a),
    };
    let outcome = RunConfig::from_args(kind, args).and_then(|cfg| run(&cfg));
    match outcome {
        Ok(out) => {
            println!("{}", out.summary);
            println!("wrote {} and {}", out.result_path.display(), out.manifest_path.display());
            out.code
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

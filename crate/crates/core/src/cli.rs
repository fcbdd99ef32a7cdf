//! Command-line front end. Exit codes: 0 success, 1 runtime failure, 2
//! configuration or usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::adders::{
    characterize, AdderModel, CharacterizeMode, CHARACTERIZE_CSV_HEADER, EXHAUSTIVE_CAP_BITS,
};
use crate::config::CliConfig;
use crate::cordic::CordicConfig;
use crate::dse::{
    apply_constraints, design_points, emit_report, pareto_filter, run_sweep, DseError,
    QualityConstraints,
};
use crate::linalg::CMatrix;
use crate::ofdm::{run_pipeline, run_seed, RngSpec};
use crate::svd::{svd, SvdError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "music-lite",
    version,
    about = "Approximate-adder MUSIC range estimation testbed"
)]
pub struct Cli {
    /// JSON configuration file.
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,
    /// Base seed; overrides the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, env = "MUSIC_LITE_JOBS")]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Error metrics of one adder against exact addition.
    Characterize(CharacterizeArgs),
    /// One end-to-end pipeline run.
    Simulate(SimulateArgs),
    /// Monte-Carlo sweep over adders and SNRs with a DSE report.
    Sweep(SweepArgs),
    /// Sweep followed by quality-constraint filtering of the DSE report.
    Dse(DseArgs),
    /// Fixed-point SVD on random matrices: reconstruction and unitarity.
    SvdCheck(SvdCheckArgs),
    /// CORDIC rotation error on random inputs against the accuracy bound.
    CordicCheck(CordicCheckArgs),
}

#[derive(Debug, Args)]
pub struct CharacterizeArgs {
    /// Adder spec, e.g. `acla:16:4`.
    #[arg(long)]
    pub adder: String,
    /// Every input pair (small widths only).
    #[arg(long, conflicts_with = "sampled")]
    pub exhaustive: bool,
    /// Number of random input pairs.
    #[arg(long, value_name = "N")]
    pub sampled: Option<u64>,
    /// Write the CSV here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub adder: Option<String>,
    /// Overrides the scene SNR.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "no_noise")]
    pub snr: Option<f64>,
    #[arg(long)]
    pub no_noise: bool,
    /// Write the pseudospectrum as `range_m,p_mu` CSV.
    #[arg(long)]
    pub spectrum: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Report directory.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Runs per (adder, SNR) cell.
    #[arg(long)]
    pub runs: Option<u64>,
    /// Adder specs, replacing the configured list.
    #[arg(long = "adder", value_name = "SPEC")]
    pub adders: Vec<String>,
}

#[derive(Debug, Args)]
pub struct DseArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,
    /// `key=value` bounds: max_error_pct, min_area_saving_pct,
    /// min_power_saving_pct.
    #[arg(long, value_name = "K=V")]
    pub constraints: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SvdCheckArgs {
    #[arg(long)]
    pub adder: Option<String>,
    #[arg(long, default_value_t = 100)]
    pub matrices: usize,
    #[arg(long, default_value_t = 4)]
    pub size: usize,
}

#[derive(Debug, Args)]
pub struct CordicCheckArgs {
    #[arg(long)]
    pub adder: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(e: impl std::fmt::Display) -> Self {
        CliError {
            code: EXIT_CONFIG,
            message: e.to_string(),
        }
    }

    fn runtime(e: impl std::fmt::Display) -> Self {
        CliError {
            code: EXIT_RUNTIME,
            message: e.to_string(),
        }
    }
}

impl From<DseError> for CliError {
    fn from(e: DseError) -> Self {
        match e {
            DseError::Io { .. } | DseError::Pool(_) => CliError::runtime(e),
            _ => CliError::config(e),
        }
    }
}

type CliResult = Result<i32, CliError>;

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_CONFIG
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let mut cfg = match &cli.config {
        Some(p) => CliConfig::load(p).map_err(CliError::config)?,
        None => CliConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.sweep.seed = s;
    }
    match &cli.command {
        Command::Characterize(a) => {
            cmd_characterize(a, cli.seed.unwrap_or(cfg.sweep.seed), out, err)
        }
        Command::Simulate(a) => cmd_simulate(&cfg, a, out),
        Command::Sweep(a) => cmd_sweep(&cfg, a, None, cli.jobs, out),
        Command::Dse(a) => {
            let qc = if a.constraints.is_empty() {
                cfg.sweep.constraints
            } else {
                Some(QualityConstraints::parse_pairs(&a.constraints)?)
            };
            cmd_sweep(&cfg, &a.sweep, qc, cli.jobs, out)
        }
        Command::SvdCheck(a) => cmd_svd_check(&cfg, a, out),
        Command::CordicCheck(a) => cmd_cordic_check(&cfg, a, out),
    }
}

fn io(e: std::io::Error) -> CliError {
    CliError::runtime(e)
}

fn cordic_for(cfg: &CliConfig, spec: &str) -> Result<CordicConfig, CliError> {
    let adder = AdderModel::from_spec(spec)
        .map_err(|e| CliError::config(format!("adder `{spec}`: {e}")))?;
    cfg.cordic.build(adder).map_err(CliError::config)
}

fn cmd_characterize(
    a: &CharacterizeArgs,
    seed: u64,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult {
    let adder = AdderModel::from_spec(&a.adder).map_err(CliError::config)?;
    let mode = match (a.exhaustive, a.sampled) {
        (true, _) => CharacterizeMode::Exhaustive,
        (false, Some(n)) => CharacterizeMode::Sampled { n, seed },
        (false, None) if 2 * adder.width() <= EXHAUSTIVE_CAP_BITS => CharacterizeMode::Exhaustive,
        (false, None) => CharacterizeMode::Sampled {
            n: CharacterizeMode::DEFAULT_SAMPLES,
            seed,
        },
    };
    let m = characterize(&adder, mode).map_err(CliError::config)?;
    let csv = format!("{CHARACTERIZE_CSV_HEADER}\n{}\n", m.csv_row(adder.name()));
    match &a.output {
        Some(p) => std::fs::write(p, &csv)
            .map_err(|e| CliError::runtime(format!("{}: {e}", p.display())))?,
        None => out.write_all(csv.as_bytes()).map_err(io)?,
    }
    writeln!(
        err,
        "{}: ER {:.6} MAE {:.4} WCE {} over {} pairs ({})",
        adder.name(),
        m.error_rate,
        m.mean_absolute_error,
        m.worst_case_error,
        m.sample_count,
        if m.exhaustive {
            "exhaustive"
        } else {
            "sampled"
        }
    )
    .map_err(io)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SimulateReport {
    adder: String,
    seed: u64,
    snr_db: Option<f64>,
    target_range_m: f64,
    estimated_range_m: f64,
    abs_error_pct: f64,
    converged: bool,
    cp_warning: bool,
    shortfall: bool,
    diagnostic: Option<String>,
}

fn cmd_simulate(cfg: &CliConfig, a: &SimulateArgs, out: &mut dyn Write) -> CliResult {
    let spec = a.adder.clone().unwrap_or_else(|| cfg.single_adder());
    let cordic = cordic_for(cfg, &spec)?;
    let mut scene = cfg.scene.clone();
    if a.no_noise {
        scene.snr_db = None;
    } else if let Some(s) = a.snr {
        scene.snr_db = Some(s);
    }
    let seed = run_seed(cfg.sweep.seed, scene.snr_db, 0);
    let spectrum_path = a
        .spectrum
        .clone()
        .or_else(|| cfg.output.spectrum_csv.clone());
    let r = run_pipeline(
        &cfg.ofdm,
        &scene,
        &cfg.music,
        &cordic,
        RngSpec::new(seed, 0),
        spectrum_path.is_some(),
    )
    .map_err(CliError::config)?;
    if let (Some(p), Some(s)) = (&spectrum_path, &r.spectrum) {
        let f = std::fs::File::create(p)
            .map_err(|e| CliError::runtime(format!("{}: {e}", p.display())))?;
        s.write_csv(std::io::BufWriter::new(f))
            .map_err(|e| CliError::runtime(format!("{}: {e}", p.display())))?;
    }
    let report = SimulateReport {
        adder: cordic.adder().name().to_string(),
        seed,
        snr_db: scene.snr_db,
        target_range_m: scene.target_range_m,
        estimated_range_m: r.estimated_range_m,
        abs_error_pct: r.abs_error_pct,
        converged: r.converged,
        cp_warning: r.cp_warning,
        shortfall: r.shortfall,
        diagnostic: r.diagnostic.clone(),
    };
    let text = serde_json::to_string_pretty(&report).map_err(CliError::runtime)?;
    writeln!(out, "{text}").map_err(io)?;
    Ok(if r.converged && r.estimated_range_m.is_finite() {
        EXIT_OK
    } else {
        EXIT_RUNTIME
    })
}

fn cmd_sweep(
    cfg: &CliConfig,
    a: &SweepArgs,
    qc: Option<QualityConstraints>,
    jobs: Option<usize>,
    out: &mut dyn Write,
) -> CliResult {
    let mut plan = cfg.sweep_plan();
    if !a.adders.is_empty() {
        plan.adders = a.adders.clone();
    }
    if let Some(r) = a.runs {
        plan.runs = r;
    }
    plan.validate()?;
    let models = plan.adder_models()?;
    if let Some(qc) = &qc {
        qc.validate()?;
        if !models
            .iter()
            .any(|m| m.family() == crate::adders::AdderFamily::CarryLookaheadExact)
        {
            return Err(DseError::MissingBaseline.into());
        }
    }
    let table = run_sweep(&plan, &cfg.pipeline(), jobs)?;
    let all = pareto_filter(design_points(&table, &models));
    let shown = match &qc {
        Some(qc) => apply_constraints(&all, qc)?,
        None => all.clone(),
    };
    let dir = a.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    let paths = emit_report(&table, &shown, &all, qc.as_ref(), &dir)?;
    for p in &all {
        let mark = if shown.iter().any(|s| s.adder == p.adder) {
            "*"
        } else {
            " "
        };
        writeln!(
            out,
            "{mark} {:<16} error {:>9} %  area {:>8}  power {:>8}  converged {:>5.1} %{}",
            p.adder,
            if p.mean_error_pct.is_nan() {
                "-".to_string()
            } else {
                format!("{:.4}", p.mean_error_pct)
            },
            p.area_proxy,
            p.power_proxy,
            100.0 * p.converged_fraction,
            if p.dominated { "  (dominated)" } else { "" }
        )
        .map_err(io)?;
    }
    for path in [&paths.runs, &paths.aggregates, &paths.dse, &paths.notes] {
        writeln!(out, "wrote {}", path.display()).map_err(io)?;
    }
    if table.runs.iter().all(|r| !r.converged) {
        return Err(CliError::runtime("no run converged"));
    }
    Ok(EXIT_OK)
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn cmd_svd_check(cfg: &CliConfig, a: &SvdCheckArgs, out: &mut dyn Write) -> CliResult {
    if a.size < 1 || a.matrices < 1 {
        return Err(CliError::config("size and matrices must be positive"));
    }
    let spec = a.adder.clone().unwrap_or_else(|| cfg.single_adder());
    let cordic = cordic_for(cfg, &spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.sweep.seed);
    let (mut recon, mut unit, mut steps, mut failed) = (0f64, 0f64, 0usize, 0usize);
    for _ in 0..a.matrices {
        let m = random_matrix(&mut rng, a.size);
        match svd(&cordic, &m) {
            Ok(r) => {
                recon = recon
                    .max(r.reconstruct().max_abs_diff(&m) / m.max_abs().max(f64::MIN_POSITIVE));
                unit = unit
                    .max(r.u.unitarity_residual())
                    .max(r.v.unitarity_residual());
                steps = steps.max(r.steps);
            }
            Err(SvdError::NonConvergence { .. }) => failed += 1,
            Err(e) => return Err(CliError::config(e)),
        }
    }
    writeln!(
        out,
        "adder {}  format {}  {}x{} x {}",
        cordic.adder().name(),
        cordic.format(),
        a.size,
        a.size,
        a.matrices
    )
    .map_err(io)?;
    writeln!(out, "max relative reconstruction error {recon:.3e}").map_err(io)?;
    writeln!(out, "max unitarity residual {unit:.3e}").map_err(io)?;
    writeln!(out, "max steps {steps}  non-converged {failed}").map_err(io)?;
    Ok(if failed == a.matrices {
        EXIT_RUNTIME
    } else {
        EXIT_OK
    })
}

fn cmd_cordic_check(cfg: &CliConfig, a: &CordicCheckArgs, out: &mut dyn Write) -> CliResult {
    let spec = a.adder.clone().unwrap_or_else(|| cfg.single_adder());
    let cordic = cordic_for(cfg, &spec)?;
    let f = cordic.format();
    let limit = cordic.convergence_limit();
    let bound = cordic.accuracy_bound();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.sweep.seed);
    let (mut worst, mut violations) = (0f64, 0usize);
    for _ in 0..a.samples {
        let (x, y, t) = random_rotation(&mut rng, limit);
        let (xq, yq, tq) = (f.quantize(x), f.quantize(y), f.quantize(t));
        let (xr, yr) = cordic.rotate_raw(xq, yq, tq).map_err(CliError::runtime)?;
        let e = rotation_error(f, (xq, yq, tq), (xr, yr));
        worst = worst.max(e);
        if e > bound {
            violations += 1;
        }
    }
    writeln!(
        out,
        "adder {}  format {}  iterations {}",
        cordic.adder().name(),
        f,
        cordic.iterations()
    )
    .map_err(io)?;
    writeln!(
        out,
        "max component error {worst:.3e}  bound {bound:.3e}  violations {violations}/{}",
        a.samples
    )
    .map_err(io)?;
    Ok(if violations > 0 && cordic.adder().is_exact() {
        EXIT_RUNTIME
    } else {
        EXIT_OK
    })
}

/// Uniform point in the unit disc and angle in `[-limit, limit]`.
pub fn random_rotation(rng: &mut impl Rng, limit: f64) -> (f64, f64, f64) {
    let r = rng.random::<f64>().sqrt();
    let phi = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    (
        r * phi.cos(),
        r * phi.sin(),
        rng.random_range(-limit..=limit),
    )
}

/// Largest component deviation of a raw CORDIC result from the exact
/// rotation of the quantized input.
pub fn rotation_error(
    f: crate::fixed::FixedFormat,
    (x, y, t): (i64, i64, i64),
    (xr, yr): (i64, i64),
) -> f64 {
    let (x, y, t) = (f.to_f64(x), f.to_f64(y), f.to_f64(t));
    let (s, c) = t.sin_cos();
    let ex = (f.to_f64(xr) - (x * c - y * s)).abs();
    let ey = (f.to_f64(yr) - (x * s + y * c)).abs();
    ex.max(ey)
}

/// Entry point for the binary.
pub fn main_with_args(args: impl IntoIterator<Item = OsString>) -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(args, &mut stdout.lock(), &mut stderr.lock())
}

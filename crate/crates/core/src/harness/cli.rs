//! Command-line front end.
//!
//! Every subcommand starts from `--config <file>` when given (otherwise
//! from the defaults of its experiment kind), then applies the flags on
//! top. Exit codes: 0 success, 1 a failed check suite or a runtime
//! failure, 2 a usage error (bad flags, unreadable config, out-of-range
//! parameters).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, ExperimentKind};
use super::experiments::{driver_qv_slope, estimate_connectivity, lattice_interfaces, verify_partition, SuiteRow};
use super::table::ResultTable;
use crate::combinatorics::{enumerate_patterns, LinkPattern};
use crate::conformal::{make_parameters, DomainSpec};
use crate::error::{Error, Result};
use crate::ising::sample_critical_ising_with;
use crate::lattice::build_rectangle;
use crate::loewner::io::{read_curve, write_curve, write_driver, Header};
use crate::loewner::{sample_chordal_sle_with_driver, Curve};
use crate::multisle::{run_chain_with, write_trajectory, ChainOptions, MultiCurveState};
use crate::randomcluster::{kappa_of_q, sample_critical_fk_with, Wiring};
use crate::rng::derive_seed;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "msle", version, about = "Multiple SLE and lattice interface experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default)]
pub struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (default `$MSLE_OUTPUT_DIR` or `.`).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct LatticeArgs {
    #[arg(long)]
    pub ell: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Comma-separated perimeter fractions.
    #[arg(long)]
    pub marks: Option<String>,
    #[arg(long)]
    pub sweeps: Option<usize>,
    #[arg(long)]
    pub replicas: Option<usize>,
    /// Heat bath only.
    #[arg(long)]
    pub no_cluster: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Ising,
    Fk,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Chordal SLE samples in H: one curve and one driver file per replica.
    SampleSle {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        time: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        replicas: Option<usize>,
    },
    /// Critical Ising samples with alternating boundary conditions.
    Ising {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        lattice: LatticeArgs,
    },
    /// Critical random-cluster samples with alternating wiring.
    Fk {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long)]
        q: Option<f64>,
    },
    /// Resampling chain from boundary-hugging curves in a rectangle.
    Resample {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        ell: Option<f64>,
        #[arg(long)]
        marks: Option<String>,
        /// Link pattern `N;a-b,...`.
        #[arg(long)]
        pattern: Option<String>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        stride: Option<usize>,
        #[arg(long)]
        burn_in: Option<usize>,
    },
    /// Partition-function inequality suite on random configurations.
    VerifyPartition {
        #[command(flatten)]
        common: Common,
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Quadratic-variation slope of extracted drivers.
    Qv {
        #[command(flatten)]
        common: Common,
        /// Curve files to analyse; fresh SLE samples when absent.
        #[arg(long, num_args = 1..)]
        curves: Vec<PathBuf>,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        time: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        replicas: Option<usize>,
    },
    /// Connectivity probabilities of lattice interfaces.
    Connectivity {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long, value_enum)]
        model: Option<Model>,
        #[arg(long)]
        q: Option<f64>,
    },
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Reports go to stdout, diagnostics to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(report) => {
            println!("{}", report.json);
            if report.pass {
                EXIT_OK
            } else {
                EXIT_FAILED
            }
        }
        Err(e) => {
            eprintln!("msle: {e}");
            exit_code(&e)
        }
    }
}

/// Exit code of an error: usage errors are the caller's to fix.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Bounds { .. } | Error::InvalidArgument(_) | Error::Config(_) | Error::NonPlanar(..) => EXIT_USAGE,
        _ => EXIT_FAILED,
    }
}

/// What a command prints, and whether its checks passed.
pub struct Report {
    pub json: String,
    pub pass: bool,
}

fn report<T: Serialize>(value: &T, pass: bool) -> Result<Report> {
    Ok(Report { json: serde_json::to_string_pretty(value)?, pass })
}

fn base_config(common: &Common, allowed: &[ExperimentKind]) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::new(allowed[0]),
    };
    if !allowed.contains(&cfg.kind) {
        return Err(Error::Config(format!("config kind {} does not fit this subcommand", cfg.kind)));
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.output {
        cfg.output = out.clone();
    }
    Ok(cfg)
}

fn apply_lattice(cfg: &mut ExperimentConfig, l: &LatticeArgs) -> Result<()> {
    if let Some(v) = l.ell {
        cfg.ell = v;
    }
    if let Some(v) = l.delta {
        cfg.delta = v;
    }
    if let Some(v) = &l.marks {
        cfg.set("marks", v)?;
    }
    if let Some(v) = l.sweeps {
        cfg.sweeps = v;
    }
    if let Some(v) = l.replicas {
        cfg.replicas = v;
    }
    if l.no_cluster {
        cfg.cluster_moves = false;
    }
    Ok(())
}

fn set_opt<T: Copy>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

/// Runs one parsed command.
pub fn execute(command: Command) -> Result<Report> {
    match command {
        Command::SampleSle { common, kappa, time, dt, replicas } => {
            let mut cfg = base_config(&common, &[ExperimentKind::SleSample])?;
            set_opt(&mut cfg.kappa, kappa);
            set_opt(&mut cfg.time, time);
            set_opt(&mut cfg.dt, dt);
            set_opt(&mut cfg.replicas, replicas);
            cfg.validate()?;
            sample_sle(&cfg)
        }
        Command::Ising { common, lattice } => {
            let mut cfg = base_config(&common, &[ExperimentKind::IsingConnectivity])?;
            apply_lattice(&mut cfg, &lattice)?;
            cfg.validate()?;
            lattice_samples(&cfg)
        }
        Command::Fk { common, lattice, q } => {
            let mut cfg = base_config(&common, &[ExperimentKind::FkConnectivity])?;
            apply_lattice(&mut cfg, &lattice)?;
            set_opt(&mut cfg.q, q);
            cfg.validate()?;
            lattice_samples(&cfg)
        }
        Command::Resample { common, kappa, ell, marks, pattern, steps, stride, burn_in } => {
            let mut cfg = base_config(&common, &[ExperimentKind::ResampleChain])?;
            set_opt(&mut cfg.kappa, kappa);
            set_opt(&mut cfg.ell, ell);
            if let Some(m) = &marks {
                cfg.set("marks", m)?;
            }
            if pattern.is_some() {
                cfg.pattern = pattern;
            }
            set_opt(&mut cfg.steps, steps);
            set_opt(&mut cfg.stride, stride);
            set_opt(&mut cfg.burn_in, burn_in);
            cfg.validate()?;
            resample(&cfg)
        }
        Command::VerifyPartition { common, n, kappa, trials } => {
            let mut cfg = base_config(&common, &[ExperimentKind::VerifyPartition])?;
            set_opt(&mut cfg.n, n);
            set_opt(&mut cfg.kappa, kappa);
            set_opt(&mut cfg.trials, trials);
            cfg.validate()?;
            partition_suite(&cfg)
        }
        Command::Qv { common, curves, kappa, time, dt, replicas } => {
            let mut cfg = base_config(&common, &[ExperimentKind::DriverQv])?;
            set_opt(&mut cfg.kappa, kappa);
            set_opt(&mut cfg.time, time);
            set_opt(&mut cfg.dt, dt);
            set_opt(&mut cfg.replicas, replicas);
            cfg.validate()?;
            qv(&cfg, &curves)
        }
        Command::Connectivity { common, lattice, model, q } => {
            let mut cfg =
                base_config(&common, &[ExperimentKind::IsingConnectivity, ExperimentKind::FkConnectivity])?;
            match model {
                Some(Model::Ising) => cfg.kind = ExperimentKind::IsingConnectivity,
                Some(Model::Fk) => cfg.kind = ExperimentKind::FkConnectivity,
                None => {}
            }
            apply_lattice(&mut cfg, &lattice)?;
            set_opt(&mut cfg.q, q);
            cfg.validate()?;
            let table = estimate_connectivity(&cfg)?;
            table.write(&cfg.output, "connectivity")?;
            report(&table, true)
        }
    }
}

#[derive(Serialize)]
struct Written {
    experiment: String,
    output: PathBuf,
    files: usize,
}

fn written(cfg: &ExperimentConfig, files: usize) -> Result<Report> {
    report(&Written { experiment: cfg.kind.to_string(), output: cfg.output.clone(), files }, true)
}

fn sample_sle(cfg: &ExperimentConfig) -> Result<Report> {
    let params = make_parameters(cfg.kappa)?;
    std::fs::create_dir_all(&cfg.output)?;
    (0..cfg.replicas).into_par_iter().try_for_each(|r| -> Result<()> {
        let seed = derive_seed(cfg.seed, r as u64);
        let (curve, driver) = sample_chordal_sle_with_driver(&params, cfg.time, cfg.dt, seed)?;
        let header = Header { capacity: cfg.time, kappa: cfg.kappa, seed };
        write_curve(&cfg.output.join(format!("sle_{r:04}_curve.txt")), &curve, &header)?;
        write_driver(&cfg.output.join(format!("sle_{r:04}_driver.txt")), &driver, &header)
    })?;
    written(cfg, 2 * cfg.replicas)
}

/// Spin or bond configurations plus their interfaces as curve files.
fn lattice_samples(cfg: &ExperimentConfig) -> Result<Report> {
    let polygon = build_rectangle(cfg.ell, cfg.delta, &cfg.marks)?;
    std::fs::create_dir_all(&cfg.output)?;
    let (stem, kappa) = match cfg.kind {
        ExperimentKind::IsingConnectivity => ("ising", 3.0),
        _ => ("fk", kappa_of_q(cfg.q)),
    };
    let counts: Vec<usize> = (0..cfg.replicas)
        .into_par_iter()
        .map(|r| -> Result<usize> {
            let seed = derive_seed(cfg.seed, r as u64);
            let (dump, ext) = match cfg.kind {
                ExperimentKind::IsingConnectivity => {
                    (sample_critical_ising_with(&polygon, cfg.sweeps, seed, cfg.cluster_moves)?.to_pbm(), "pbm")
                }
                _ => {
                    let cluster = cfg.cluster_moves && cfg.q == 2.0;
                    let bonds = sample_critical_fk_with(&polygon, cfg.q, cfg.sweeps, seed, Wiring::Alternating, cluster)?;
                    (bonds.to_dump(), "txt")
                }
            };
            std::fs::write(cfg.output.join(format!("{stem}_{r:04}.{ext}")), dump)?;
            // Same seed, so the same configuration is traced.
            let paths = lattice_interfaces(cfg.kind, &polygon, cfg.q, cfg.sweeps, seed, cfg.cluster_moves)?;
            let header = Header { capacity: 0.0, kappa, seed };
            let mut files = 1;
            for (k, p) in paths.iter().flatten().enumerate() {
                let curve = Curve::dedup(p.points.clone())?;
                write_curve(&cfg.output.join(format!("{stem}_{r:04}_interface{k}.txt")), &curve, &header)?;
                files += 1;
            }
            Ok(files)
        })
        .collect::<Result<_>>()?;
    written(cfg, counts.iter().sum())
}

fn resample(cfg: &ExperimentConfig) -> Result<Report> {
    let params = make_parameters(cfg.kappa)?;
    let polygon = build_rectangle(cfg.ell, cfg.delta, &cfg.marks)?;
    let domain = DomainSpec::rectangle(polygon.aspect(), 1.0, polygon.mark_points())?;
    let pattern = match &cfg.pattern {
        Some(p) => p.parse::<LinkPattern>()?,
        None => enumerate_patterns(polygon.n_marks() / 2)?.remove(0),
    };
    // Nested hugging curves must leave strips wide enough for the
    // uniformizing maps, yet stay inside the rectangle.
    let offset = (0.4 * polygon.aspect().min(1.0) / pattern.n_links() as f64).min(0.15);
    let initial = MultiCurveState::hugging(params, pattern, domain, offset, 0.02)?;
    let opts = ChainOptions { burn_in: cfg.burn_in, stride: cfg.stride, ..ChainOptions::new(cfg.steps) };
    let mut states = Vec::new();
    run_chain_with(&initial, &opts, cfg.seed, |s, st| states.push((s, st.clone())))?;
    if states.is_empty() {
        return Err(Error::Config("burn_in leaves no recorded state".into()));
    }
    write_trajectory(&cfg.output, &states, cfg.seed, cfg.stride)?;
    let mut table = ResultTable::new();
    for (step, st) in &states {
        for j in 0..st.n_curves() {
            table.push("resample-chain", format!("step={step};curve={j};stat=signed-area"), st.signed_area(j), 0.0, 1)?;
        }
    }
    table.write(&cfg.output, "resample")?;
    written(cfg, states.len() * initial.n_curves() + 3)
}

#[derive(Serialize)]
struct SuiteReport {
    n: usize,
    kappa: f64,
    trials: usize,
    seed: u64,
    pass: bool,
    rows: Vec<SuiteRow>,
}

fn partition_suite(cfg: &ExperimentConfig) -> Result<Report> {
    let rows = verify_partition(cfg.n, cfg.kappa, cfg.trials, cfg.seed)?;
    let pass = rows.iter().all(|r| r.pass);
    let rep = SuiteReport { n: cfg.n, kappa: cfg.kappa, trials: cfg.trials, seed: cfg.seed, pass, rows };
    std::fs::create_dir_all(&cfg.output)?;
    std::fs::write(cfg.output.join("verify_partition.json"), serde_json::to_string_pretty(&rep)?)?;
    report(&rep, pass)
}

fn read_curves(paths: &[PathBuf]) -> Result<Vec<Curve>> {
    paths
        .iter()
        .map(|p: &PathBuf| {
            read_curve(Path::new(p))
                .map(|(c, _)| c)
                .map_err(|e| Error::Config(format!("cannot use curve file {}: {e}", p.display())))
        })
        .collect()
}

fn qv(cfg: &ExperimentConfig, files: &[PathBuf]) -> Result<Report> {
    let (curves, source) = if files.is_empty() {
        let params = make_parameters(cfg.kappa)?;
        let curves: Vec<Curve> = (0..cfg.replicas)
            .into_par_iter()
            .map(|r| Ok(sample_chordal_sle_with_driver(&params, cfg.time, cfg.dt, derive_seed(cfg.seed, r as u64))?.0))
            .collect::<Result<_>>()?;
        (curves, format!("sle;kappa={};time={};dt={}", cfg.kappa, cfg.time, cfg.dt))
    } else {
        if files.len() < 10 {
            return Err(Error::Config(format!("{} curve files given; need at least 10", files.len())));
        }
        (read_curves(files)?, format!("files={}", files.len()))
    };
    let est = driver_qv_slope(&curves)?;
    let mut table = ResultTable::new();
    table.push("driver-qv", format!("{source};failed={}", est.failed), est.slope, est.std_error, est.used)?;
    table.write(&cfg.output, "qv")?;
    report(&table, true)
}

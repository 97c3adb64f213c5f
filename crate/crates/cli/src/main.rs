//! `diffscat`: scattering transforms, graph distances, frame certificates,
//! bound verification and the synthetic experiments from the command line.
//!
//! Exit codes: 0 success, 1 data error, 2 usage error, 3 bound violation.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use diffscat::experiments::{gaussian_unit_signals, trial_rng, LocalizationPoint, StabilityPoint};
use diffscat::io::{fmt_f64, parse_config, parse_edge_list, parse_signals};
use diffscat::metrics::diffusion_distance_ops;
use diffscat::nalgebra::DMatrix;
use diffscat::verify::{scales_for, BoundRow};
use diffscat::{
    frame_bounds, scatter_many, DiffusionOperator, DistanceMode, DistanceResult, Error,
    ExperimentSpec, FrameReport, Graph, ScatteringConfig, VerifyConfig, WaveletBank,
};

const SEED_ENV: &str = "SCATTER_SEED";

#[derive(Parser, Debug)]
#[command(name = "diffscat", version, about = "Diffusion scattering on graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Scattering coefficients of signals on a graph, one CSV row per signal.
    Scatter {
        /// Edge-list file.
        graph: PathBuf,
        /// Signal file, one row of n numbers per signal.
        #[arg(long, conflicts_with = "random", required_unless_present = "random")]
        signals: Option<PathBuf>,
        /// Use this many random unit-norm Gaussian signals instead.
        #[arg(long)]
        random: Option<usize>,
        /// Coefficient orders m, including the order-zero average.
        #[arg(long, default_value_t = 3)]
        layers: usize,
        /// Number of wavelet scales J, or `auto` for the spectral-gap rule.
        #[arg(long, default_value = "auto")]
        scales: Scales,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Diffusion distance between two graphs of equal size.
    Distance {
        graph_a: PathBuf,
        graph_b: PathBuf,
        #[arg(long, default_value = "exact")]
        mode: DistanceMode,
        /// Diffusion time; 2s must be a positive integer.
        #[arg(long, default_value_t = 0.5)]
        s: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Empirical and analytic frame constants of the wavelet bank.
    Frame {
        graph: PathBuf,
        #[arg(long, default_value = "auto")]
        scales: Scales,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks every stability bound on random small graph pairs.
    BoundsVerify {
        #[arg(long, default_value_t = 50)]
        pairs: usize,
        #[arg(long, default_value_t = 5)]
        n_min: usize,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        #[arg(long, default_value_t = 3)]
        layers: usize,
        /// Random unit signals per pair.
        #[arg(long, default_value_t = 8)]
        signals: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Representation distance versus spectral gap on small-world graphs.
    StabilityCurve(ExperimentArgs),
    /// Source localization accuracy under edge-drop perturbations.
    SourceLoc(ExperimentArgs),
}

#[derive(clap::Args, Debug)]
struct ExperimentArgs {
    /// `key=value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy)]
enum Scales {
    Auto,
    Fixed(usize),
}

impl std::str::FromStr for Scales {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(Scales::Auto);
        }
        match s.parse::<usize>() {
            Ok(j) if j >= 1 => Ok(Scales::Fixed(j)),
            _ => Err(format!("expected 'auto' or a positive integer, got '{s}'")),
        }
    }
}

enum Failure {
    Data(String),
    Usage(String),
    Violation(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Violation(count)) => {
            eprintln!("bound violated in {count} row(s)");
            ExitCode::from(3)
        }
    }
}

fn run(cmd: Command) -> CmdResult {
    match cmd {
        Command::Scatter {
            graph,
            signals,
            random,
            layers,
            scales,
            seed,
            out,
        } => cmd_scatter(
            &graph,
            signals.as_deref(),
            random,
            layers,
            scales,
            seed,
            out.as_deref(),
        ),
        Command::Distance {
            graph_a,
            graph_b,
            mode,
            s,
            out,
        } => cmd_distance(&graph_a, &graph_b, mode, s, out.as_deref()),
        Command::Frame { graph, scales, out } => cmd_frame(&graph, scales, out.as_deref()),
        Command::BoundsVerify {
            pairs,
            n_min,
            n_max,
            layers,
            signals,
            seed,
            out,
        } => {
            let cfg = VerifyConfig {
                pairs,
                n_min,
                n_max,
                seed: resolve_seed(seed, None)?,
                layers,
                signals,
                ..VerifyConfig::default()
            };
            cmd_bounds_verify(&cfg, out.as_deref())
        }
        Command::StabilityCurve(args) => {
            let spec = experiment_spec(ExperimentSpec::stability_default(), &args)?;
            let rows = diffscat::experiments::run_stability_curve(&spec)?;
            let mut text = format!("{}\n", StabilityPoint::CSV_HEADER);
            for r in &rows {
                text.push_str(&r.csv_row());
                text.push('\n');
            }
            emit(args.out.as_deref(), &text)
        }
        Command::SourceLoc(args) => {
            let spec = experiment_spec(ExperimentSpec::localization_default(), &args)?;
            let rows = diffscat::experiments::run_source_localization(&spec)?;
            let mut text = format!("{}\n", LocalizationPoint::CSV_HEADER);
            for r in &rows {
                text.push_str(&r.csv_row());
                text.push('\n');
            }
            emit(args.out.as_deref(), &text)
        }
    }
}

/// Explicit flag, then an explicit config value, then `SCATTER_SEED`, then 0.
fn resolve_seed(flag: Option<u64>, configured: Option<u64>) -> Result<u64, Failure> {
    if let Some(s) = flag.or(configured) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{SEED_ENV}='{v}' is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Data(format!("cannot read {}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<Graph, Failure> {
    parse_edge_list(&read(path)?).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> CmdResult {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Data(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn resolve_scales(op: &DiffusionOperator, scales: Scales) -> Result<usize, Failure> {
    match scales {
        Scales::Fixed(j) => Ok(j),
        Scales::Auto => Ok(scales_for(op.spectral_gap()?)?),
    }
}

fn cmd_scatter(
    graph: &Path,
    signals: Option<&Path>,
    random: Option<usize>,
    layers: usize,
    scales: Scales,
    seed: Option<u64>,
    out: Option<&Path>,
) -> CmdResult {
    let g = load_graph(graph)?;
    let n = g.n();
    let x = match (signals, random) {
        (Some(path), _) => {
            let rows = parse_signals(&read(path)?, n)
                .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
            let mut x = DMatrix::zeros(n, rows.len());
            for (c, s) in rows.iter().enumerate() {
                x.set_column(c, s);
            }
            x
        }
        (None, Some(k)) => {
            gaussian_unit_signals(n, k, &mut trial_rng(resolve_seed(seed, None)?, &[]))
        }
        (None, None) => return Err(Failure::Usage("need --signals or --random".into())),
    };
    if layers == 0 {
        return Err(Failure::Usage("--layers must be at least 1".into()));
    }
    let op = DiffusionOperator::new(&g)?;
    let j = resolve_scales(&op, scales)?;
    let cfg = ScatteringConfig::new(layers, j)?;
    let bank = WaveletBank::new(&op, j)?;
    let coeffs = scatter_many(&op, &bank, &x, cfg)?;
    let mut text = cfg.path_labels().join(",");
    text.push('\n');
    for c in &coeffs {
        let row: Vec<String> = c.flattened().iter().map(|&v| fmt_f64(v)).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    emit(out, &text)
}

fn cmd_distance(a: &Path, b: &Path, mode: DistanceMode, s: f64, out: Option<&Path>) -> CmdResult {
    let g1 = load_graph(a)?;
    let g2 = load_graph(b)?;
    let op1 = DiffusionOperator::new(&g1)?;
    let op2 = DiffusionOperator::new(&g2)?;
    let result = diffusion_distance_ops(&g1, &g2, &op1, &op2, s, mode).map_err(|e| match e {
        Error::TooLargeForExact { .. } => Failure::Data(format!("{e}; use --mode heuristic")),
        other => other.into(),
    })?;
    emit(
        out,
        &format!("{}\n{}\n", DistanceResult::CSV_HEADER, result.csv_row()),
    )
}

fn cmd_frame(graph: &Path, scales: Scales, out: Option<&Path>) -> CmdResult {
    let g = load_graph(graph)?;
    let op = DiffusionOperator::new(&g)?;
    let j = resolve_scales(&op, scales)?;
    let report = frame_bounds(&op, j)?;
    emit(
        out,
        &format!("{}\n{}\n", FrameReport::CSV_HEADER, report.csv_row()),
    )
}

fn cmd_bounds_verify(cfg: &VerifyConfig, out: Option<&Path>) -> CmdResult {
    let reports = diffscat::verify_bounds(cfg).map_err(|e| match e {
        Error::InvalidParameter(msg) => Failure::Usage(msg),
        other => other.into(),
    })?;
    let mut text = format!("{}\n", BoundRow::CSV_HEADER);
    let mut rows = 0;
    let mut violations = 0;
    for report in &reports {
        for row in report.rows() {
            rows += 1;
            if row.violated() {
                violations += 1;
            }
            text.push_str(&row.csv_row());
            text.push('\n');
        }
    }
    emit(out, &text)?;
    eprintln!(
        "{} pairs, {rows} inequalities, {violations} violations",
        reports.len()
    );
    if violations > 0 {
        return Err(Failure::Violation(violations));
    }
    Ok(())
}

fn experiment_spec(base: ExperimentSpec, args: &ExperimentArgs) -> Result<ExperimentSpec, Failure> {
    let mut kv: BTreeMap<String, String> = match &args.config {
        Some(path) => parse_config(&read(path)?)
            .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?,
        None => BTreeMap::new(),
    };
    for item in &args.overrides {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--set expects KEY=VALUE, got '{item}'")))?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    let configured = match kv.remove("seed") {
        Some(v) => Some(
            v.parse::<u64>()
                .map_err(|_| Failure::Usage(format!("seed '{v}' is not an unsigned integer")))?,
        ),
        None => None,
    };
    let mut spec = base
        .with_overrides(&kv)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    spec.seed = resolve_seed(args.seed, configured)?;
    Ok(spec)
}

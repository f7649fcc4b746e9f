//! `cayvol` — deterministic sampling and measurement of distance-bounded
//! rigid-pair configuration spaces.
//!
//! Subcommands map one-to-one onto the pipelines in `cayvol_cli::pipeline`;
//! every flag here overrides the matching settings-file key.  Exit codes:
//! 0 success, 2 configuration problems, 3 refused instances, 4 budget-cap
//! overruns.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cayvol_cli::config::{order_from_name, parse_config, RunConfig};
use cayvol_cli::{pipeline, CliError};

#[derive(Parser)]
#[command(
    name = "cayvol",
    version,
    about = "Sample rigid-assembly configuration regions and measure their volumes",
    propagate_version = true
)]
struct Cli {
    /// Settings file (INI-style); flags override its keys
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output directory for artifacts
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Point set A file (plain `id x y z radius` or .pdb)
    #[arg(long, global = true, value_name = "FILE")]
    point_set_a: Option<PathBuf>,

    /// Point set B file
    #[arg(long, global = true, value_name = "FILE")]
    point_set_b: Option<PathBuf>,

    /// Active pair `A B`; repeat for several pairs
    #[arg(long = "contact", global = true, value_name = "A B", num_args = 2)]
    contacts: Vec<u32>,

    /// Surface decomposition 0–4 (0 simplices, 1 basis, 2 thick, 3 face
    /// centers, 4 hybrid)
    #[arg(long, global = true, value_name = "N")]
    mode: Option<u8>,

    /// Sampling grid: three step lengths then three per-turn counts
    #[arg(long, global = true, value_name = "T T T R R R", num_args = 6, allow_negative_numbers = true)]
    steps: Option<Vec<f64>>,

    /// Reference grid: three step lengths then three per-turn counts
    #[arg(long, global = true, value_name = "T T T R R R", num_args = 6, allow_negative_numbers = true)]
    baseline_steps: Option<Vec<f64>>,

    /// Base-space grid spacing (default: min translation step / 4)
    #[arg(long, global = true, value_name = "LEN")]
    cayley_step: Option<f64>,

    /// Worklist discipline: fifo | lifo | mostProcessed
    #[arg(long, global = true, value_name = "ORDER")]
    order: Option<String>,

    /// Run the heavy loops on one thread
    #[arg(long, global = true)]
    sequential: bool,

    /// Level weighting factor for volumes
    #[arg(long, global = true, value_name = "B")]
    boltzmann: Option<f64>,

    /// Reference-scan point budget
    #[arg(long, global = true, value_name = "N")]
    baseline_cap: Option<u64>,

    /// Trajectory file for `mc-ingest`
    #[arg(long, global = true, value_name = "FILE")]
    trajectory: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one region given its active pairs
    SampleAcr,
    /// Sample all 64 regions under a six-pair bottom region
    SampleBasin,
    /// Enumerate the reference grid exhaustively
    Baseline,
    /// Partition an external trajectory into per-region tallies
    McIngest,
    /// Volumes, shape distributions, coverage, and agreement reports
    Measure,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::SampleAcr => "sample-acr",
            Command::SampleBasin => "sample-basin",
            Command::Baseline => "baseline",
            Command::McIngest => "mc-ingest",
            Command::Measure => "measure",
        }
    }
}

fn split_steps(values: &[f64], what: &str) -> Result<([f64; 3], [i64; 3]), CliError> {
    let t = [values[0], values[1], values[2]];
    let mut r = [0i64; 3];
    for (k, &v) in values[3..].iter().enumerate() {
        if v <= 0.0 || v.fract() != 0.0 {
            return Err(CliError::Config(format!(
                "{what}: rotation step counts must be positive integers, got {v}"
            )));
        }
        r[k] = v as i64;
    }
    if t.iter().any(|&s| s <= 0.0) {
        return Err(CliError::Config(format!("{what}: step lengths must be positive")));
    }
    Ok((t, r))
}

fn apply_overrides(cli: &Cli, cfg: &mut RunConfig) -> Result<(), CliError> {
    if let Some(p) = &cli.out {
        cfg.out_dir = p.clone();
    }
    if let Some(p) = &cli.point_set_a {
        cfg.point_set_a = Some(p.clone());
    }
    if let Some(p) = &cli.point_set_b {
        cfg.point_set_b = Some(p.clone());
    }
    if !cli.contacts.is_empty() {
        cfg.contacts = cli
            .contacts
            .chunks(2)
            .map(|c| (c[0], c[1]))
            .collect();
    }
    if let Some(m) = cli.mode {
        if m > 4 {
            return Err(CliError::Config(format!("--mode wants 0–4, got {m}")));
        }
        cfg.mode = m;
    }
    if let Some(v) = &cli.steps {
        cfg.cartesian_steps = split_steps(v, "--steps")?;
    }
    if let Some(v) = &cli.baseline_steps {
        cfg.baseline_steps = split_steps(v, "--baseline-steps")?;
    }
    if let Some(c) = cli.cayley_step {
        if c <= 0.0 {
            return Err(CliError::Config(format!("--cayley-step wants a positive length, got {c}")));
        }
        cfg.cayley_step = Some(c);
    }
    if let Some(o) = &cli.order {
        cfg.order = order_from_name(o).ok_or_else(|| {
            CliError::Config(format!("--order wants fifo | lifo | mostProcessed, got `{o}`"))
        })?;
    }
    if cli.sequential {
        cfg.sequential = true;
    }
    if let Some(b) = cli.boltzmann {
        if b <= 0.0 {
            return Err(CliError::Config(format!("--boltzmann wants a positive factor, got {b}")));
        }
        cfg.boltzmann = b;
    }
    if let Some(c) = cli.baseline_cap {
        if c == 0 {
            return Err(CliError::Config("--baseline-cap wants a positive budget".into()));
        }
        cfg.baseline_cap = c;
    }
    if let Some(p) = &cli.trajectory {
        cfg.trajectory = Some(p.clone());
    }
    // Flag combinations re-run the cross-field checks the settings parser
    // applies, by round-tripping through its canonical text.
    let revalidated = parse_config(&cfg.serialize())?;
    *cfg = revalidated.config;
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read {}: {e}", path.display()))
            })?;
            let parsed = parse_config(&text)?;
            for w in &parsed.warnings {
                eprintln!("warning: {w}");
            }
            parsed.config
        }
        None => RunConfig::default(),
    };
    apply_overrides(cli, &mut cfg)?;
    pipeline::execute(cli.command.name(), &cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

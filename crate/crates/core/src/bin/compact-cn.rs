use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use compact_cn::experiments::{run_and_write, Experiment, ExperimentConfig};
use compact_cn::Error;

#[derive(Parser)]
#[command(
    name = "compact-cn",
    version,
    about = "Crank-Nicolson compact scheme experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimum real part of spec(W) over a (dz, dv) grid
    EigenTable(Flags),
    /// |W|_2 over its upper bound on a (dz, dv) grid
    NormRatioTable(Flags),
    /// Minimum real part of spec(W) over an (alpha1, alpha2) grid
    EigenGrid(Flags),
    /// cond_2(I + W) against its upper bound on a (dz, dv) grid
    ConditionTable(Flags),
    /// Observed orders against an exponential exact solution
    Convergence(Flags),
    /// One run against an exponential exact solution
    Solve(Flags),
    /// Closed-form N = 3 Gerschgorin margins as dz shrinks at fixed dv/dz^2
    Prop1Margins(Flags),
}

#[derive(Args)]
struct Flags {
    #[arg(long, allow_hyphen_values = true)]
    alpha1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha2: Option<String>,
    /// Use c directly instead of alpha1^2 / alpha2
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["alpha1", "alpha2"])]
    c: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    xl: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    xr: Option<String>,
    #[arg(long, allow_hyphen_values = true, requires = "zr")]
    zl: Option<String>,
    #[arg(long, allow_hyphen_values = true, requires = "zl")]
    zr: Option<String>,
    /// Final time
    #[arg(long = "T", allow_hyphen_values = true)]
    horizon: Option<String>,
    /// Comma-separated space steps; fractions such as 1/8 accepted
    #[arg(long, allow_hyphen_values = true)]
    dz_list: Option<String>,
    /// Comma-separated time steps
    #[arg(long, allow_hyphen_values = true)]
    dv_list: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha1_list: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha2_list: Option<String>,
    /// Whether dz subdivides [xl, xr] (x) or the transformed interval (z)
    #[arg(long, value_parser = ["x", "z"])]
    domain_coords: Option<String>,
    /// Largest matrix order given to the dense eigensolver
    #[arg(long, allow_hyphen_values = true)]
    dense_cap: Option<String>,
    /// Rate k of the exact solution exp(k z + c (k^2 - k) v)
    #[arg(long, allow_hyphen_values = true)]
    rate: Option<String>,
    /// dv / dz^2 for spatial studies and margin sweeps
    #[arg(long, allow_hyphen_values = true)]
    mesh_ratio: Option<String>,
    /// Fixed interval count of temporal studies
    #[arg(long, allow_hyphen_values = true)]
    intervals: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    seed: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    workers: Option<String>,
    /// key = value file applied before the flags
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Flags {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut pairs = Vec::new();
        let mut push = |key: &'static str, value: &Option<String>| {
            if let Some(v) = value {
                pairs.push((key, v.clone()));
            }
        };
        push("alpha1", &self.alpha1);
        push("alpha2", &self.alpha2);
        push("c", &self.c);
        push("xl", &self.xl);
        push("xr", &self.xr);
        push("zl", &self.zl);
        push("zr", &self.zr);
        push("T", &self.horizon);
        push("dz-list", &self.dz_list);
        push("dv-list", &self.dv_list);
        push("alpha1-list", &self.alpha1_list);
        push("alpha2-list", &self.alpha2_list);
        push("domain-coords", &self.domain_coords);
        push("dense-cap", &self.dense_cap);
        push("rate", &self.rate);
        push("mesh-ratio", &self.mesh_ratio);
        push("intervals", &self.intervals);
        push("seed", &self.seed);
        push("workers", &self.workers);
        if let Some(out) = &self.out {
            pairs.push(("out", out.display().to_string()));
        }
        pairs
    }
}

fn config(experiment: Experiment, flags: &Flags) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::new(experiment);
    if let Some(path) = &flags.config {
        cfg.apply_file(path)?;
        cfg.experiment = experiment;
    }
    for (key, value) in flags.pairs() {
        cfg.set(key, &value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    // usage errors share exit code 1 with invalid values; 2 means failed cells
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (experiment, flags) = match &cli.command {
        Command::EigenTable(f) => (Experiment::EigenTable, f),
        Command::NormRatioTable(f) => (Experiment::NormRatioTable, f),
        Command::EigenGrid(f) => (Experiment::EigenGrid, f),
        Command::ConditionTable(f) => (Experiment::ConditionTable, f),
        Command::Convergence(f) => (Experiment::Convergence, f),
        Command::Solve(f) => (Experiment::Solve, f),
        Command::Prop1Margins(f) => (Experiment::Prop1Margins, f),
    };
    let cfg = match config(experiment, flags) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("compact-cn: {e}");
            return ExitCode::from(1);
        }
    };
    match run_and_write(&cfg) {
        Ok((output, files)) => {
            println!("{}", output.summary);
            for f in files {
                println!("wrote {}", f.display());
            }
            if output.failed_cells() > 0 {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("compact-cn: {e}");
            ExitCode::from(1)
        }
    }
}

mod commands;
mod config;
mod csv;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use netbandit::verify::Suite;

use commands::{Failure, McMode, Outcome, Report};
use config::{CommonArgs, ConfigFile, Defaults, Link, RunConfig, SweepArgs};

/// Two-period social bandit on Erdős–Rényi networks: thresholds, surplus,
/// large-network limits, simulation and verification, as CSV.
#[derive(Parser, Debug)]
#[command(name = "netbandit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Equilibrium and planner thresholds over delta, beta or lambda
    Thresholds(Swept),
    /// Equilibrium region, explorer count and mixed strategy over pi
    Regions(Swept),
    /// Limiting fraction of explorers over pi, with the finite-n fraction
    Kappa(Swept),
    /// Social surplus over pi or lambda, with its discontinuities
    Surplus(SurplusCmd),
    /// Branching-process limits over lambda
    Asymptotics(Swept),
    /// Monte Carlo failure weights or component sizes
    GraphMc(GraphMcCmd),
    /// Run verification suites; exits 1 if any check fails
    Verify(VerifyCmd),
}

#[derive(Args, Debug)]
struct Swept {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    sweep: SweepArgs,
}

#[derive(Args, Debug)]
struct SurplusCmd {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    sweep: SweepArgs,
    /// Large-network limit (local regime)
    #[arg(long)]
    limit: bool,
}

#[derive(Args, Debug)]
struct GraphMcCmd {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, value_enum)]
    mode: Option<McMode>,
}

#[derive(Args, Debug)]
struct VerifyCmd {
    #[command(flatten)]
    common: CommonArgs,
    /// Suites to run; repeat or separate with commas (default: all)
    #[arg(long, value_delimiter = ',')]
    suite: Vec<Suite>,
    /// Perturb the band coefficient so the inequality suite must fail
    #[arg(long, hide = true)]
    corrupt_band_coefficient: bool,
}

const THRESHOLDS: Defaults = Defaults {
    n: 2,
    link: Link::P(1.0 / 3.0),
    sweeps: &[("delta", 0.0, 0.95, 96), ("beta", 0.01, 0.99, 99), ("lambda", 0.05, 2.0, 40)],
};

const REGIONS: Defaults = Defaults {
    n: 2,
    link: Link::P(1.0 / 3.0),
    sweeps: &[("pi", 0.45, 0.52, 141)],
};

const KAPPA: Defaults = Defaults {
    n: 1000,
    link: Link::Lambda(3.0),
    sweeps: &[("pi", 0.485, 0.497, 121)],
};

const SURPLUS: Defaults = Defaults {
    n: 2,
    link: Link::P(1.0 / 3.0),
    sweeps: &[("pi", 0.48, 0.495, 151), ("lambda", 0.05, 2.0, 40)],
};

const SURPLUS_LIMIT: Defaults = Defaults {
    n: 1000,
    link: Link::Lambda(3.0),
    sweeps: &[("lambda", 0.05, 10.0, 200), ("pi", 0.48, 0.6, 121)],
};

const ASYMPTOTICS: Defaults = Defaults {
    n: 1000,
    link: Link::Lambda(1.0),
    sweeps: &[("lambda", 0.05, 5.0, 100)],
};

const GRAPH_MC: Defaults = Defaults {
    n: 20,
    link: Link::Lambda(1.5),
    sweeps: &[],
};

const VERIFY: Defaults = Defaults {
    n: 2,
    link: Link::P(1.0 / 3.0),
    sweeps: &[],
};

fn resolve(
    name: &'static str,
    common: &CommonArgs,
    sweep: Option<&SweepArgs>,
    defaults: &Defaults,
    file: &mut ConfigFile,
) -> Result<RunConfig, Failure> {
    Ok(RunConfig::resolve(name, common, sweep, defaults, file)?)
}

fn run(cli: Cli) -> Result<(RunConfig, Report), Failure> {
    let (common, sweep) = match &cli.command {
        Command::Thresholds(a) | Command::Regions(a) | Command::Kappa(a) | Command::Asymptotics(a) => {
            (&a.common, Some(&a.sweep))
        }
        Command::Surplus(a) => (&a.common, Some(&a.sweep)),
        Command::GraphMc(a) => (&a.common, None),
        Command::Verify(a) => (&a.common, None),
    };
    let mut file = ConfigFile::load(common.config.as_ref())?;
    let (cfg, outcome): (RunConfig, Box<dyn FnOnce(&RunConfig) -> Outcome>) = match cli.command {
        Command::Thresholds(_) => {
            let cfg = resolve("thresholds", common, sweep, &THRESHOLDS, &mut file)?;
            (cfg, Box::new(commands::thresholds))
        }
        Command::Regions(_) => {
            let cfg = resolve("regions", common, sweep, &REGIONS, &mut file)?;
            (cfg, Box::new(commands::regions))
        }
        Command::Kappa(_) => {
            let cfg = resolve("kappa", common, sweep, &KAPPA, &mut file)?;
            (cfg, Box::new(commands::kappa_sweep))
        }
        Command::Asymptotics(_) => {
            let cfg = resolve("asymptotics", common, sweep, &ASYMPTOTICS, &mut file)?;
            (cfg, Box::new(commands::asymptotics))
        }
        Command::Surplus(ref a) => {
            let limit = a.limit || file.take::<bool>("limit")?.unwrap_or(false);
            let defaults = if limit { &SURPLUS_LIMIT } else { &SURPLUS };
            let mut cfg = resolve("surplus", common, sweep, defaults, &mut file)?;
            cfg.extra.push(("limit", limit.to_string()));
            (cfg, Box::new(move |c: &RunConfig| commands::surplus(c, limit)))
        }
        Command::GraphMc(ref a) => {
            let from_file = file.take::<String>("mode")?;
            let mode = match (a.mode, from_file.as_deref()) {
                (Some(m), _) => m,
                (None, Some("weights")) | (None, None) => McMode::Weights,
                (None, Some("components")) => McMode::Components,
                (None, Some(other)) => {
                    return Err(Failure::Usage(format!("config key `mode`: unknown mode `{other}`")))
                }
            };
            let mut cfg = resolve("graph-mc", common, None, &GRAPH_MC, &mut file)?;
            cfg.extra.push(("mode", mode.as_str().to_string()));
            (cfg, Box::new(move |c: &RunConfig| commands::graph_mc(c, mode)))
        }
        Command::Verify(ref a) => {
            let mut suites = a.suite.clone();
            if suites.is_empty() {
                if let Some(list) = file.take::<String>("suite")? {
                    for s in list.split(',') {
                        suites.push(s.parse().map_err(|e: String| Failure::Usage(format!("config key `suite`: {e}")))?);
                    }
                }
            }
            if suites.is_empty() {
                suites = Suite::ALL.to_vec();
            }
            let corrupt = a.corrupt_band_coefficient;
            let mut cfg = resolve("verify", common, None, &VERIFY, &mut file)?;
            let names: Vec<&str> = suites.iter().map(|s| s.as_str()).collect();
            cfg.extra.push(("suite", names.join(",")));
            (cfg, Box::new(move |c: &RunConfig| commands::verify(c, &suites, corrupt)))
        }
    };
    file.finish(cfg.command)?;
    let report = outcome(&cfg)?;
    Ok((cfg, report))
}

fn side_path(out: &Path) -> PathBuf {
    out.with_extension("jumps.csv")
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn emit(cfg: &RunConfig, report: &Report) -> Result<(), Failure> {
    let meta = cfg.metadata();
    match &cfg.out {
        Some(out) => {
            write(out, &report.table.render(&meta))?;
            if let Some(side) = &report.side {
                write(&side_path(out), &side.render(&meta))?;
            }
        }
        None => {
            print!("{}", report.table.render(&meta));
            if report.side.as_ref().is_some_and(|s| !s.rows.is_empty()) {
                eprintln!("note: discontinuity table not written; pass --out to save it");
            }
        }
    }
    for note in &report.notes {
        eprintln!("{note}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(cli).and_then(|(cfg, report)| emit(&cfg, &report).map(|_| report.failed));
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("numeric error: {msg}");
            ExitCode::from(3)
        }
    }
}

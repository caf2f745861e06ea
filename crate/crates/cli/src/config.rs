use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::Args;
use netbandit::{ModelParams, NetworkSpec, Regime};

pub const DEFAULT_SEED: u64 = 0xB0BA;
pub const DEFAULT_REPS: usize = 100_000;

#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// Loss of the risky arm in the bad state
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Probability of a high signal in the good state
    #[arg(long)]
    pub beta: Option<f64>,
    /// Weight on the second period
    #[arg(long)]
    pub delta: Option<f64>,
    /// Common prior that the risky arm is good
    #[arg(long)]
    pub pi: Option<f64>,
    /// Number of agents
    #[arg(long)]
    pub n: Option<usize>,
    /// Link probability
    #[arg(long, conflicts_with = "lambda")]
    pub p: Option<f64>,
    /// Mean degree, p = lambda / n
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Observation regime: local (neighbours) or global (component)
    #[arg(long)]
    pub regime: Option<Regime>,
    /// Monte Carlo replicates
    #[arg(long)]
    pub reps: Option<usize>,
    /// Master seed, decimal or 0x-prefixed hex
    #[arg(long, value_parser = parse_seed)]
    pub seed: Option<u64>,
    /// Write CSV here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// key=value file; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct SweepArgs {
    /// Variable to sweep
    #[arg(long)]
    pub sweep: Option<String>,
    #[arg(long)]
    pub start: Option<f64>,
    #[arg(long)]
    pub stop: Option<f64>,
    /// Grid points, endpoints included
    #[arg(long)]
    pub steps: Option<usize>,
}

pub fn parse_seed(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid seed `{s}`: {e}"))
}

/// Entries of a key=value file. Every entry must be consumed.
#[derive(Debug, Default)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    /// Blank lines and `#` comments are skipped; a line may hold several
    /// whitespace-separated pairs.
    pub fn parse(text: &str) -> Result<Self, UsageError> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            for pair in line.split_whitespace() {
                let (key, value) = pair
                    .split_once('=')
                    .ok_or_else(|| usage(format!("config line {}: expected key=value, got `{pair}`", i + 1)))?;
                if entries.insert(key.to_string(), value.to_string()).is_some() {
                    return Err(usage(format!("config line {}: duplicate key `{key}`", i + 1)));
                }
            }
        }
        Ok(ConfigFile { entries })
    }

    pub fn load(path: Option<&PathBuf>) -> Result<Self, UsageError> {
        match path {
            None => Ok(ConfigFile::default()),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
                ConfigFile::parse(&text)
            }
        }
    }

    pub fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, UsageError>
    where
        T::Err: fmt::Display,
    {
        match self.entries.remove(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| usage(format!("config key `{key}`: {e}"))),
        }
    }

    pub fn take_seed(&mut self) -> Result<Option<u64>, UsageError> {
        self.entries.remove("seed").map(|v| parse_seed(&v).map_err(usage)).transpose()
    }

    pub fn finish(self, command: &str) -> Result<(), UsageError> {
        match self.entries.into_keys().next() {
            None => Ok(()),
            Some(key) => Err(usage(format!("unknown config key `{key}` for `{command}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Link {
    P(f64),
    Lambda(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub var: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / last
                }
            })
            .collect()
    }
}

/// Per-command fallbacks.
pub struct Defaults {
    pub n: usize,
    pub link: Link,
    /// Allowed sweep variables with their default ranges; the first is the
    /// default variable.
    pub sweeps: &'static [(&'static str, f64, f64, usize)],
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: &'static str,
    pub params: ModelParams,
    pub n: usize,
    pub link: Link,
    pub regime: Regime,
    pub reps: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub sweep: Option<Sweep>,
    /// Command-specific settings, echoed in the metadata line.
    pub extra: Vec<(&'static str, String)>,
}

impl RunConfig {
    pub fn resolve(
        command: &'static str,
        args: &CommonArgs,
        sweep: Option<&SweepArgs>,
        defaults: &Defaults,
        file: &mut ConfigFile,
    ) -> Result<Self, UsageError> {
        if let Some(c) = file.take::<String>("command")? {
            if c != command {
                return Err(usage(format!("config is for `{c}`, not `{command}`")));
            }
        }
        let mut pick = |flag: Option<f64>, key: &str, default: f64| -> Result<f64, UsageError> {
            let from_file = file.take::<f64>(key)?;
            Ok(flag.or(from_file).unwrap_or(default))
        };
        let params = ModelParams {
            alpha: pick(args.alpha, "alpha", 1.0)?,
            beta: pick(args.beta, "beta", 0.3)?,
            delta: pick(args.delta, "delta", 0.15)?,
            pi: pick(args.pi, "pi", 0.5)?,
        };
        let file_n = file.take::<usize>("n")?;
        let n = args.n.or(file_n).unwrap_or(defaults.n);
        let file_p = file.take::<f64>("p")?;
        let file_lambda = file.take::<f64>("lambda")?;
        let link = match (args.p, args.lambda) {
            (Some(p), _) => Link::P(p),
            (_, Some(l)) => Link::Lambda(l),
            _ => match (file_p, file_lambda) {
                (Some(_), Some(_)) => return Err(usage("config sets both `p` and `lambda`")),
                (Some(p), None) => Link::P(p),
                (None, Some(l)) => Link::Lambda(l),
                (None, None) => defaults.link,
            },
        };
        let file_regime = file.take::<Regime>("regime")?;
        let regime = args.regime.or(file_regime).unwrap_or(Regime::Local);
        let file_reps = file.take::<usize>("reps")?;
        let reps = args.reps.or(file_reps).unwrap_or(DEFAULT_REPS);
        let file_seed = file.take_seed()?;
        let seed = args.seed.or(file_seed).unwrap_or(DEFAULT_SEED);
        let file_out = file.take::<PathBuf>("out")?;
        let out = args.out.clone().or(file_out);
        let sweep = match sweep {
            None => None,
            Some(s) => Some(resolve_sweep(s, defaults, file)?),
        };
        Ok(RunConfig {
            command,
            params,
            n,
            link,
            regime,
            reps,
            seed,
            out,
            sweep,
            extra: Vec::new(),
        })
    }

    /// Network at the configured link, or at mean degree `lambda` when given.
    pub fn net(&self) -> netbandit::Result<NetworkSpec> {
        match self.link {
            Link::P(p) => NetworkSpec::new(self.n, p, self.regime),
            Link::Lambda(l) => NetworkSpec::with_mean_degree(self.n, l, self.regime),
        }
    }

    pub fn lambda(&self) -> f64 {
        match self.link {
            Link::P(p) => p * self.n as f64,
            Link::Lambda(l) => l,
        }
    }

    /// `# key=value …`, readable back through `--config` once the `#` is
    /// dropped.
    pub fn metadata(&self) -> String {
        let p = &self.params;
        let mut s = format!(
            "# command={} alpha={} beta={} delta={} pi={} n={}",
            self.command, p.alpha, p.beta, p.delta, p.pi, self.n
        );
        match self.link {
            Link::P(x) => s.push_str(&format!(" p={x}")),
            Link::Lambda(x) => s.push_str(&format!(" lambda={x}")),
        }
        s.push_str(&format!(" regime={} reps={} seed={:#x}", self.regime, self.reps, self.seed));
        if let Some(sw) = &self.sweep {
            s.push_str(&format!(" sweep={} start={} stop={} steps={}", sw.var, sw.start, sw.stop, sw.steps));
        }
        for (k, v) in &self.extra {
            s.push_str(&format!(" {k}={v}"));
        }
        s
    }
}

fn resolve_sweep(args: &SweepArgs, defaults: &Defaults, file: &mut ConfigFile) -> Result<Sweep, UsageError> {
    let file_var = file.take::<String>("sweep")?;
    let var = args
        .sweep
        .clone()
        .or(file_var)
        .unwrap_or_else(|| defaults.sweeps[0].0.to_string());
    let &(_, start, stop, steps) = defaults
        .sweeps
        .iter()
        .find(|s| s.0 == var)
        .ok_or_else(|| {
            let allowed: Vec<&str> = defaults.sweeps.iter().map(|s| s.0).collect();
            usage(format!("invalid sweep variable `{var}` (expected one of {})", allowed.join(", ")))
        })?;
    let file_start = file.take::<f64>("start")?;
    let file_stop = file.take::<f64>("stop")?;
    let file_steps = file.take::<usize>("steps")?;
    let sweep = Sweep {
        var,
        start: args.start.or(file_start).unwrap_or(start),
        stop: args.stop.or(file_stop).unwrap_or(stop),
        steps: args.steps.or(file_steps).unwrap_or(steps),
    };
    if sweep.steps < 2 {
        return Err(usage(format!("steps must be at least 2, got {}", sweep.steps)));
    }
    if !(sweep.start < sweep.stop) {
        return Err(usage(format!("start {} must be below stop {}", sweep.start, sweep.stop)));
    }
    Ok(sweep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> Defaults {
        Defaults {
            n: 2,
            link: Link::P(0.5),
            sweeps: &[("pi", 0.4, 0.6, 11), ("lambda", 0.1, 2.0, 5)],
        }
    }

    #[test]
    fn flags_beat_file_beat_defaults() {
        let mut file = ConfigFile::parse("alpha=2 beta=0.1\n# note\nlambda=1.5\nseed=0x10").unwrap();
        let args = CommonArgs {
            alpha: Some(0.7),
            ..Default::default()
        };
        let cfg = RunConfig::resolve("regions", &args, None, &defaults(), &mut file).unwrap();
        file.finish("regions").unwrap();
        assert_eq!(cfg.params.alpha, 0.7);
        assert_eq!(cfg.params.beta, 0.1);
        assert_eq!(cfg.params.delta, 0.15);
        assert_eq!(cfg.link, Link::Lambda(1.5));
        assert_eq!(cfg.seed, 16);
    }

    #[test]
    fn unknown_and_duplicate_keys_are_errors() {
        let mut file = ConfigFile::parse("alpha=1 gamma=3").unwrap();
        RunConfig::resolve("regions", &CommonArgs::default(), None, &defaults(), &mut file).unwrap();
        assert!(file.finish("regions").is_err());
        assert!(ConfigFile::parse("alpha=1\nalpha=2").is_err());
        assert!(ConfigFile::parse("alpha").is_err());
    }

    #[test]
    fn metadata_round_trips() {
        let args = CommonArgs {
            pi: Some(0.48836541),
            lambda: Some(3.0),
            n: Some(40),
            ..Default::default()
        };
        let sweep = SweepArgs {
            sweep: Some("lambda".into()),
            steps: Some(7),
            ..Default::default()
        };
        let cfg = RunConfig::resolve("surplus", &args, Some(&sweep), &defaults(), &mut ConfigFile::default()).unwrap();
        let line = cfg.metadata();
        let mut file = ConfigFile::parse(line.trim_start_matches('#')).unwrap();
        let again =
            RunConfig::resolve("surplus", &CommonArgs::default(), Some(&SweepArgs::default()), &defaults(), &mut file)
                .unwrap();
        file.finish("surplus").unwrap();
        assert_eq!(again.metadata(), line);
        assert_eq!(again.params, cfg.params);
        assert_eq!(again.sweep, cfg.sweep);
    }

    #[test]
    fn sweep_validation() {
        let bad_var = SweepArgs {
            sweep: Some("beta".into()),
            ..Default::default()
        };
        let run = |s: &SweepArgs| RunConfig::resolve("x", &CommonArgs::default(), Some(s), &defaults(), &mut ConfigFile::default());
        assert!(run(&bad_var).is_err());
        let one_step = SweepArgs {
            steps: Some(1),
            ..Default::default()
        };
        assert!(run(&one_step).is_err());
        let reversed = SweepArgs {
            start: Some(0.6),
            stop: Some(0.5),
            ..Default::default()
        };
        assert!(run(&reversed).is_err());
        let grid = run(&SweepArgs::default()).unwrap().sweep.unwrap().values();
        assert_eq!(grid.len(), 11);
        assert_eq!(grid[0], 0.4);
        assert_eq!(grid[10], 0.6);
    }
}

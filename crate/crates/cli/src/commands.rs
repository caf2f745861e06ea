use netbandit::asymptotics::{borel_pmf, global_threshold_limit, progeny_failure_weight, psi};
use netbandit::equilibrium::{
    equilibrium_count, kappa, local_threshold_limit, mixed_equilibrium, threshold_ladder, threshold_ladder_mc,
    Region, ThresholdSet,
};
use netbandit::netsim::{component_size_distribution, estimate_failure_weights};
use netbandit::observation::{failure_weights, GLOBAL_EXACT_LIMIT};
use netbandit::surplus::{
    equilibrium_surplus_curve, lambda_threshold, limit_surplus, planner_cutoffs_limit, social_surplus,
};
use netbandit::verify::{run_suites, Suite, VerifyOptions};
use netbandit::{ModelParams, NetworkSpec, Regime};

use crate::config::{Link, RunConfig, UsageError};
use crate::csv::{fmt9, Cell, Table};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numeric(String),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e.0)
    }
}

impl From<netbandit::Error> for Failure {
    fn from(e: netbandit::Error) -> Self {
        if e.is_numeric_domain() {
            Failure::Numeric(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

pub type Outcome = Result<Report, Failure>;

pub struct Report {
    pub table: Table,
    /// Secondary table written next to `--out`.
    pub side: Option<Table>,
    pub failed: bool,
    /// Lines for stderr.
    pub notes: Vec<String>,
}

impl Report {
    fn new(table: Table) -> Self {
        Report {
            table,
            side: None,
            failed: false,
            notes: Vec::new(),
        }
    }
}

fn sweep_values(cfg: &RunConfig) -> Vec<f64> {
    cfg.sweep.as_ref().map(|s| s.values()).unwrap_or_default()
}

fn sweep_var(cfg: &RunConfig) -> &str {
    cfg.sweep.as_ref().map(|s| s.var.as_str()).unwrap_or("")
}

/// Exact ladder where available, Monte Carlo for large global networks.
fn ladder(params: &ModelParams, net: &NetworkSpec, cfg: &RunConfig) -> Result<ThresholdSet, Failure> {
    if net.regime == Regime::Global && net.n > GLOBAL_EXACT_LIMIT {
        Ok(threshold_ladder_mc(params, net, cfg.reps, cfg.seed)?)
    } else {
        Ok(threshold_ladder(params, net)?)
    }
}

fn region_name(r: Region) -> &'static str {
    match r {
        Region::FullExploit => "full-exploit",
        Region::Asymmetric(_) => "asymmetric",
        Region::FullExplore { .. } => "full-explore",
    }
}

pub fn thresholds(cfg: &RunConfig) -> Outcome {
    let mut table = Table::new(&[
        "sweep_value",
        "pi_lower",
        "pi_bar",
        "pi_star_lower",
        "pi_star_upper",
        "pi_bar_local_inf",
        "pi_bar_global_inf",
        "pi_star_lower_inf",
        "pi_star_upper_inf",
    ]);
    for v in sweep_values(cfg) {
        let mut params = cfg.params;
        let mut link = cfg.link;
        match sweep_var(cfg) {
            "delta" => params.delta = v,
            "beta" => params.beta = v,
            _ => link = Link::Lambda(v),
        }
        params.validate()?;
        let run = RunConfig { params, link, ..cfg.clone() };
        let net = run.net()?;
        let set = ladder(&params, &net, &run)?;
        let lambda = net.lambda();
        let (lo_inf, hi_inf) = planner_cutoffs_limit(&params, lambda);
        table.push(vec![
            v.into(),
            set.pi_lower.into(),
            set.pi_bar.into(),
            set.pi_star_lower.into(),
            set.pi_star_upper.into(),
            local_threshold_limit(&params, lambda).into(),
            global_threshold_limit(&params, lambda)?.into(),
            lo_inf.into(),
            hi_inf.into(),
        ]);
    }
    Ok(Report::new(table))
}

pub fn regions(cfg: &RunConfig) -> Outcome {
    let net = cfg.net()?;
    let set = ladder(&cfg.params, &net, cfg)?;
    let exact = set.std_errors.is_none();
    let mut table = Table::new(&["pi", "region", "k", "mu"]);
    for pi in sweep_values(cfg) {
        let params = cfg.params.with_pi(pi);
        params.validate()?;
        let region = set.region_of(pi);
        let mu = match region {
            Region::Asymmetric(_) if exact => Some(mixed_equilibrium(&params, &net)?.mu),
            _ => None,
        };
        table.push(vec![pi.into(), region_name(region).into(), region.explorers().into(), mu.into()]);
    }
    let mut report = Report::new(table);
    if !exact {
        report.notes.push(format!(
            "global regime with n = {} > {GLOBAL_EXACT_LIMIT}: ladder estimated from {} replicates",
            net.n, cfg.reps
        ));
    }
    Ok(report)
}

pub fn kappa_sweep(cfg: &RunConfig) -> Outcome {
    let lambda = cfg.lambda();
    let net = NetworkSpec::with_mean_degree(cfg.n, lambda, Regime::Local)?;
    let mut table = Table::new(&["pi", "kappa", "k_n_over_n"]);
    for pi in sweep_values(cfg) {
        let params = cfg.params.with_pi(pi);
        params.validate()?;
        let k = equilibrium_count(&params, &net)?;
        table.push(vec![pi.into(), kappa(&params, lambda).into(), (k as f64 / cfg.n as f64).into()]);
    }
    Ok(Report::new(table))
}

pub fn surplus(cfg: &RunConfig, limit: bool) -> Outcome {
    match (sweep_var(cfg), limit) {
        ("pi", false) => surplus_in_pi(cfg),
        ("lambda", false) => surplus_in_lambda(cfg),
        (var, true) => surplus_limit(cfg, var),
        (var, _) => Err(Failure::Usage(format!("cannot sweep surplus over `{var}`"))),
    }
}

fn surplus_in_pi(cfg: &RunConfig) -> Outcome {
    let net = cfg.net()?;
    let n = net.n;
    let set = ladder(&cfg.params, &net, cfg)?;
    let values = |pi: f64| -> Result<Vec<f64>, Failure> {
        let params = cfg.params.with_pi(pi);
        params.validate()?;
        (0..=n)
            .map(|k| Ok(social_surplus(&params, &net, k)?.value))
            .collect()
    };
    let mut table = Table::new(&["pi", "k_eq", "u_eq", "u_eq_per_capita", "k_opt", "u_opt"]);
    for pi in sweep_values(cfg) {
        let u = values(pi)?;
        let k_eq = set.region_of(pi).explorers();
        let k_opt = (0..=n).fold(0, |best, k| if u[k] > u[best] + 1e-13 { k } else { best });
        table.push(vec![
            pi.into(),
            k_eq.into(),
            u[k_eq].into(),
            (u[k_eq] / n as f64).into(),
            k_opt.into(),
            u[k_opt].into(),
        ]);
    }
    let sweep = cfg.sweep.as_ref().expect("surplus sweeps");
    let mut side = Table::new(&["pi_threshold", "k_below", "u_below", "u_above"]);
    for (k, &t) in set.ladder.iter().enumerate() {
        if t < sweep.start || t > sweep.stop {
            continue;
        }
        let u = values(t)?;
        side.push(vec![t.into(), k.into(), u[k].into(), u[k + 1].into()]);
    }
    let mut report = Report::new(table);
    report.side = Some(side);
    Ok(report)
}

fn surplus_in_lambda(cfg: &RunConfig) -> Outcome {
    if cfg.regime == Regime::Global {
        return Err(Failure::Usage("surplus over lambda is available for the local regime only".into()));
    }
    let grid = sweep_values(cfg);
    let curve = equilibrium_surplus_curve(&cfg.params, cfg.n, &grid)?;
    let mut table = Table::new(&["lambda", "k_eq", "u_eq_per_capita"]);
    for &(lambda, u) in &curve.points {
        let net = NetworkSpec::with_mean_degree(cfg.n, lambda, Regime::Local)?;
        table.push(vec![lambda.into(), equilibrium_count(&cfg.params, &net)?.into(), u.into()]);
    }
    let mut side = Table::new(&["lambda_star", "k", "drop", "closed_form"]);
    for j in &curve.jumps {
        side.push(vec![j.lambda_star.into(), j.k.into(), j.drop.into(), j.closed_form.into()]);
    }
    let mut report = Report::new(table);
    report.side = Some(side);
    Ok(report)
}

fn surplus_limit(cfg: &RunConfig, var: &str) -> Outcome {
    cfg.params.validate()?;
    let mut table = Table::new(&[if var == "pi" { "pi" } else { "lambda" }, "u_limit_per_capita"]);
    let mut report = Report::new(Table::default());
    for v in sweep_values(cfg) {
        let (params, lambda) = if var == "pi" {
            (cfg.params.with_pi(v), cfg.lambda())
        } else {
            (cfg.params, v)
        };
        params.validate()?;
        table.push(vec![v.into(), limit_surplus(&params, lambda).into()]);
    }
    if var == "lambda" {
        match lambda_threshold(&cfg.params) {
            Some(l) => report.notes.push(format!("limit surplus is constant for lambda >= {}", fmt9(l))),
            None => report.notes.push("no flat region: pi is outside the intermediate band".into()),
        }
    }
    report.table = table;
    Ok(report)
}

pub fn asymptotics(cfg: &RunConfig) -> Outcome {
    cfg.params.validate()?;
    let z = 1.0 - cfg.params.beta;
    let mut table = Table::new(&[
        "lambda",
        "psi",
        "extinction",
        "progeny_weight",
        "pi_bar_global_inf",
        "pi_bar_local_inf",
    ]);
    for lambda in sweep_values(cfg) {
        table.push(vec![
            lambda.into(),
            psi(lambda, z)?.into(),
            psi(lambda, 1.0)?.into(),
            progeny_failure_weight(lambda, cfg.params.beta)?.into(),
            global_threshold_limit(&cfg.params, lambda)?.into(),
            local_threshold_limit(&cfg.params, lambda).into(),
        ]);
    }
    Ok(Report::new(table))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum McMode {
    Weights,
    Components,
}

impl McMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            McMode::Weights => "weights",
            McMode::Components => "components",
        }
    }
}

/// Atoms compared with the Borel law.
const TV_ATOMS: usize = 20;

pub fn graph_mc(cfg: &RunConfig, mode: McMode) -> Outcome {
    cfg.params.validate()?;
    match mode {
        McMode::Weights => {
            let net = cfg.net()?;
            let est = estimate_failure_weights(&net, cfg.params.beta, cfg.reps, cfg.seed)?;
            let exact = if net.regime == Regime::Local || net.n <= GLOBAL_EXACT_LIMIT {
                Some(failure_weights(cfg.params.beta, &net)?)
            } else {
                None
            };
            let mut table = Table::new(&["k", "estimate", "std_error", "exact", "z_score"]);
            for (k, e) in est.iter().enumerate() {
                let x = exact.as_ref().map(|w| w[k]);
                let z = x.map(|x| e.z_score(x));
                table.push(vec![k.into(), e.mean.into(), e.std_error.into(), x.into(), z.into()]);
            }
            Ok(Report::new(table))
        }
        McMode::Components => {
            let lambda = cfg.lambda();
            let d = component_size_distribution(cfg.n, lambda, cfg.reps, cfg.seed)?;
            let mut table = Table::new(&["size", "count", "probability", "borel"]);
            for (size, &count) in d.counts.iter().enumerate() {
                if count == 0 {
                    continue;
                }
                table.push(vec![
                    size.into(),
                    Cell::Int(count),
                    d.probability(size).into(),
                    borel_pmf(lambda, size)?.into(),
                ]);
            }
            let mut report = Report::new(table);
            let tv = d.tv_distance_to_borel(lambda, TV_ATOMS);
            report
                .notes
                .push(format!("tv distance to Borel({}) on atoms 1-{TV_ATOMS}: {}", fmt9(lambda), fmt9(tv)));
            Ok(report)
        }
    }
}

pub fn verify(cfg: &RunConfig, suites: &[Suite], corrupt: bool) -> Outcome {
    let opts = VerifyOptions {
        reps: cfg.reps,
        seed: cfg.seed,
        corrupt_band_coefficient: corrupt,
        ..VerifyOptions::default()
    };
    let reports = run_suites(suites, &opts)?;
    let mut table = Table::new(&["check_id", "params", "max_abs_err", "pass"]);
    let mut report = Report::new(Table::default());
    for r in &reports {
        for c in &r.checks {
            table.push(vec![
                c.check_id.as_str().into(),
                c.params.as_str().into(),
                c.max_abs_err.into(),
                c.status.as_str().into(),
            ]);
        }
        report.notes.extend(r.warnings.iter().map(|w| format!("warning [{}]: {w}", r.suite)));
        if r.failed() {
            report.failed = true;
            for c in r.checks.iter().filter(|c| c.status == netbandit::verify::CheckStatus::Fail) {
                report.notes.push(format!("FAILED {} ({})", c.check_id, c.params));
            }
        }
    }
    report.table = table;
    Ok(report)
}

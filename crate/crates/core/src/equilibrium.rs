//! Pure-strategy thresholds, regions and the symmetric mixed equilibrium.

use std::fmt;

use crate::dist::binomial_pmf;
use crate::error::{Error, Result};
use crate::model::{ModelParams, NetworkSpec, Regime, TIE_TOLERANCE};
use crate::netsim::montecarlo::estimate_failure_weights;
use crate::observation::failure_weights;
use crate::surplus::planner_cutoffs;

/// Belief at which an exploiter facing failure weight `E[(1-β)^M]` is
/// indifferent to exploring:
/// `α(1-δ) / ((1+α)(1-δ) + δβ E[(1-β)^M])`.
pub fn threshold_at(params: &ModelParams, failure_weight: f64) -> f64 {
    let (a, b, d) = (params.alpha, params.beta, params.delta);
    a * (1.0 - d) / ((1.0 + a) * (1.0 - d) + d * b * failure_weight)
}

/// `(π̲, π̄)` for two agents linked with probability `p`.
pub fn two_player_thresholds(params: &ModelParams, p: f64) -> (f64, f64) {
    (
        threshold_at(params, 1.0),
        threshold_at(params, 1.0 - p * params.beta),
    )
}

/// `π ≤ threshold` up to the relative tie tolerance.
pub(crate) fn at_or_below(pi: f64, threshold: f64) -> bool {
    pi <= threshold * (1.0 + TIE_TOLERANCE)
}

/// Threshold ladder `π_{0,n} ≤ … ≤ π_{n-1,n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdSet {
    pub pi_lower: f64,
    pub pi_bar: f64,
    pub ladder: Vec<f64>,
    /// `E_k[(1-β)^M]` behind each rung.
    pub failure_weights: Vec<f64>,
    /// Standard errors of the failure weights when they were estimated.
    pub std_errors: Option<Vec<f64>>,
    pub pi_star_lower: Option<f64>,
    pub pi_star_upper: Option<f64>,
}

impl ThresholdSet {
    fn from_weights(params: &ModelParams, weights: Vec<f64>) -> Self {
        let ladder: Vec<f64> = weights.iter().map(|&e| threshold_at(params, e)).collect();
        ThresholdSet {
            pi_lower: ladder[0],
            pi_bar: *ladder.last().unwrap(),
            ladder,
            failure_weights: weights,
            std_errors: None,
            pi_star_lower: None,
            pi_star_upper: None,
        }
    }

    /// Region of belief `pi` under the half-open convention: `k` explorers
    /// on `(π_{k-1,n}, π_{k,n}]`.
    pub fn region_of(&self, pi: f64) -> Region {
        let n = self.ladder.len();
        match self.ladder.iter().position(|&t| at_or_below(pi, t)) {
            Some(0) => Region::FullExploit,
            Some(k) => Region::Asymmetric(k),
            None => Region::FullExplore { n },
        }
    }
}

/// Exact ladder. The global regime is exact up to
/// [`GLOBAL_EXACT_LIMIT`](crate::observation::GLOBAL_EXACT_LIMIT) agents.
pub fn threshold_ladder(params: &ModelParams, net: &NetworkSpec) -> Result<ThresholdSet> {
    params.validate()?;
    let mut set = ThresholdSet::from_weights(params, failure_weights(params.beta, net)?);
    attach_planner(params, net, &mut set);
    Ok(set)
}

/// Ladder from Monte Carlo estimates of the failure weights.
pub fn threshold_ladder_mc(
    params: &ModelParams,
    net: &NetworkSpec,
    reps: usize,
    seed: u64,
) -> Result<ThresholdSet> {
    params.validate()?;
    let est = estimate_failure_weights(net, params.beta, reps, seed)?;
    let mut set = ThresholdSet::from_weights(params, est.iter().map(|e| e.mean).collect());
    set.std_errors = Some(est.iter().map(|e| e.std_error).collect());
    attach_planner(params, net, &mut set);
    Ok(set)
}

fn attach_planner(params: &ModelParams, net: &NetworkSpec, set: &mut ThresholdSet) {
    if net.regime == Regime::Local && net.n >= 2 {
        if let Ok((lo, hi)) = planner_cutoffs(params, net) {
            set.pi_star_lower = Some(lo);
            set.pi_star_upper = Some(hi);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    FullExploit,
    Asymmetric(usize),
    FullExplore { n: usize },
}

impl Region {
    pub fn explorers(&self) -> usize {
        match *self {
            Region::FullExploit => 0,
            Region::Asymmetric(k) => k,
            Region::FullExplore { n } => n,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::FullExploit => write!(f, "full-exploit"),
            Region::Asymmetric(k) => write!(f, "asymmetric-{k}"),
            Region::FullExplore { .. } => write!(f, "full-explore"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumReport {
    pub region: Region,
    pub k: usize,
    /// Symmetric mixed-equilibrium probability, reported in asymmetric
    /// regions.
    pub mu: Option<f64>,
    pub thresholds: ThresholdSet,
}

pub fn classify(params: &ModelParams, net: &NetworkSpec) -> Result<EquilibriumReport> {
    let thresholds = threshold_ladder(params, net)?;
    let region = thresholds.region_of(params.pi);
    let mu = match region {
        Region::Asymmetric(_) => solve_mixed(params, &thresholds).ok().map(|m| m.mu),
        _ => None,
    };
    Ok(EquilibriumReport {
        region,
        k: region.explorers(),
        mu,
        thresholds,
    })
}

/// `X = (1-δ)(α(1-π) - π)/(δπβ)`: the local rung `π_{k,n}` lies at or above
/// `π` iff `(1-pβ)^k ≤ X`.
pub(crate) fn rung_ratio(params: &ModelParams) -> f64 {
    (1.0 - params.delta) * (-params.risky_mean()) / (params.delta * params.pi * params.beta)
}

/// Equilibrium number of explorers in the local regime,
/// `⌈ln X / ln(1 - pβ)⌉` clamped to `[0, n]`.
pub fn equilibrium_count(params: &ModelParams, net: &NetworkSpec) -> Result<usize> {
    if net.regime != Regime::Local {
        return Err(Error::LocalOnly {
            operation: "equilibrium_count",
            alternative: "classify",
        });
    }
    params.validate()?;
    let n = net.n;
    let base = 1.0 - net.p() * params.beta;
    let rung = |k: usize| threshold_at(params, base.powi(k as i32));
    let x = rung_ratio(params);
    let mut k = if !x.is_finite() || base >= 1.0 {
        0
    } else if x <= 0.0 {
        n
    } else if x >= 1.0 {
        0
    } else {
        let raw = (x.ln() / base.ln()).ceil();
        if raw >= n as f64 {
            n
        } else {
            raw.max(0.0) as usize
        }
    };
    // settle floating-point ties with the same comparison as `classify`
    while k > 0 && at_or_below(params.pi, rung(k - 1)) {
        k -= 1;
    }
    while k < n && !at_or_below(params.pi, rung(k)) {
        k += 1;
    }
    Ok(k)
}

/// Limit of the full-exploration threshold in the local regime,
/// `E[(1-β)^M] = e^{-λβ}` for Poisson(`λ`) neighbours.
pub fn local_threshold_limit(params: &ModelParams, lambda: f64) -> f64 {
    threshold_at(params, (-lambda * params.beta).exp())
}

/// Limiting fraction of explorers `κ(π)` in the local regime.
pub fn kappa(params: &ModelParams, lambda: f64) -> f64 {
    let lower = threshold_at(params, 1.0);
    if at_or_below(params.pi, lower) {
        return 0.0;
    }
    let upper = local_threshold_limit(params, lambda);
    if params.pi >= upper || lambda <= 0.0 {
        return 1.0;
    }
    let x = rung_ratio(params);
    ((1.0 / x).ln() / (lambda * params.beta)).clamp(0.0, 1.0)
}

/// Symmetric mixed equilibrium in which each agent explores with
/// probability `mu`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixedEquilibrium {
    pub mu: f64,
    /// Indifference residual at `mu`.
    pub residual: f64,
    pub iterations: usize,
}

/// Solves the indifference between exploring and exploiting when every
/// peer explores independently with probability `μ`:
///
/// `(1-δ)(π - α(1-π))/(δπ) = E_{K~Bin(n-1, μ)}[-β E_K[(1-β)^M]]`.
///
/// The right side is increasing in `μ`, so the root is bracketed on
/// `π ∈ (π̲, π̄]` and found by bisection.
pub fn mixed_equilibrium(params: &ModelParams, net: &NetworkSpec) -> Result<MixedEquilibrium> {
    solve_mixed(params, &threshold_ladder(params, net)?)
}

fn solve_mixed(params: &ModelParams, set: &ThresholdSet) -> Result<MixedEquilibrium> {
    let pi = params.pi;
    if at_or_below(pi, set.pi_lower) || !at_or_below(pi, set.pi_bar) || params.delta == 0.0 {
        return Err(Error::NoInteriorMixedEquilibrium {
            pi,
            pi_lower: set.pi_lower,
            pi_bar: set.pi_bar,
        });
    }
    let target = (1.0 - params.delta) * params.risky_mean() / (params.delta * pi);
    let weights = &set.failure_weights;
    let beta = params.beta;
    let residual = |mu: f64| -> f64 {
        let mix = binomial_pmf(weights.len() - 1, mu);
        let gain: f64 = mix.iter().zip(weights).map(|(q, e)| q * e).sum();
        -beta * gain - target
    };
    let f_hi = residual(1.0);
    if f_hi <= 0.0 {
        // π at π̄ up to rounding
        return Ok(MixedEquilibrium {
            mu: 1.0,
            residual: f_hi,
            iterations: 0,
        });
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let (mut f_lo, mut f_hi) = (residual(lo), f_hi);
    let mut iterations = 0;
    while hi - lo > 1e-12 && iterations < 200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = residual(mid);
        iterations += 1;
        if f_mid == 0.0 {
            return Ok(MixedEquilibrium {
                mu: mid,
                residual: 0.0,
                iterations,
            });
        }
        if f_mid < 0.0 {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    let mu = if f_hi > f_lo {
        (lo - f_lo * (hi - lo) / (f_hi - f_lo)).clamp(lo, hi)
    } else {
        0.5 * (lo + hi)
    };
    Ok(MixedEquilibrium {
        mu,
        residual: residual(mu),
        iterations,
    })
}

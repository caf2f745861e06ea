//! Brute-force ground truth for small populations.
//!
//! Up to [`GRAPH_ENUMERATION_LIMIT`] agents every graph on `n` vertices is
//! enumerated; up to [`ORACLE_LIMIT`] the exact law of each agent's observed
//! explorer count is used instead. Signals are enumerated outcome by outcome
//! and the state is summed inside each information set.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{ModelParams, NetworkSpec, Regime};
use crate::observation::observed_pmf;
use crate::surplus::social_surplus;

pub const GRAPH_ENUMERATION_LIMIT: usize = 6;
pub const ORACLE_LIMIT: usize = 10;

/// Absolute tolerance within which payoff differences count as ties.
pub const PAYOFF_TIE: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    Exploit,
    Explore,
}

impl Action {
    fn flipped(self) -> Action {
        match self {
            Action::Exploit => Action::Explore,
            Action::Explore => Action::Exploit,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StrategyProfile {
    pub choices: Vec<Action>,
}

impl StrategyProfile {
    pub fn new(choices: Vec<Action>) -> Self {
        StrategyProfile { choices }
    }

    /// Agents `0..k` explore, the rest exploit.
    pub fn with_explorers(n: usize, k: usize) -> Self {
        StrategyProfile {
            choices: (0..n)
                .map(|i| if i < k { Action::Explore } else { Action::Exploit })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }

    pub fn explorers(&self) -> usize {
        self.choices.iter().filter(|&&a| a == Action::Explore).count()
    }
}

impl fmt::Display for StrategyProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.choices {
            f.write_str(match a {
                Action::Explore => "R",
                Action::Exploit => "S",
            })?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub payoffs: Vec<f64>,
    pub is_nash: bool,
    pub surplus: f64,
    /// Total weight of all enumerated branches for agent 0; one up to
    /// rounding.
    pub total_probability: f64,
}

fn check_profile(net: &NetworkSpec, profile: &StrategyProfile) -> Result<()> {
    if profile.len() != net.n {
        return Err(Error::InvalidProfile(format!(
            "profile has {} entries for {} agents",
            profile.len(),
            net.n
        )));
    }
    if net.n > ORACLE_LIMIT {
        return Err(Error::TooLarge {
            what: "exhaustive oracle",
            n: net.n,
            limit: ORACLE_LIMIT,
        });
    }
    Ok(())
}

/// Law of `m_i`, the number of first-period draws agent `i` sees (her own
/// included), for every agent.
fn draw_counts(net: &NetworkSpec, profile: &StrategyProfile) -> Result<Vec<Vec<f64>>> {
    let n = net.n;
    let explore: Vec<bool> = profile.choices.iter().map(|&a| a == Action::Explore).collect();
    let mut laws = vec![vec![0.0; n + 1]; n];
    if n <= GRAPH_ENUMERATION_LIMIT {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let p = net.p();
        let mut adj = vec![0u32; n];
        for mask in 0u64..(1u64 << pairs.len()) {
            let mut weight = 1.0;
            adj.fill(0);
            for (e, &(u, v)) in pairs.iter().enumerate() {
                if mask >> e & 1 == 1 {
                    weight *= p;
                    adj[u] |= 1 << v;
                    adj[v] |= 1 << u;
                } else {
                    weight *= 1.0 - p;
                }
            }
            if weight == 0.0 {
                continue;
            }
            for i in 0..n {
                let seen = match net.regime {
                    Regime::Local => adj[i],
                    Regime::Global => component(&adj, i) & !(1 << i),
                };
                let mut m = (0..n).filter(|&j| seen >> j & 1 == 1 && explore[j]).count();
                if explore[i] {
                    m += 1;
                }
                laws[i][m] += weight;
            }
        }
    } else {
        let total = profile.explorers();
        for i in 0..n {
            let own = usize::from(explore[i]);
            let pmf = observed_pmf(net, total - own)?;
            for (m, q) in pmf.into_iter().enumerate() {
                laws[i][m + own] += q;
            }
        }
    }
    Ok(laws)
}

fn component(adj: &[u32], start: usize) -> u32 {
    let mut seen = 1u32 << start;
    let mut frontier = seen;
    while frontier != 0 {
        let v = frontier.trailing_zeros() as usize;
        frontier &= frontier - 1;
        let fresh = adj[v] & !seen;
        seen |= fresh;
        frontier |= fresh;
    }
    seen
}

/// `Σ_y max(E[θ - α(1-θ); y], 0)` and `Σ_y P(y)` over all `2^m` outcome
/// vectors of `m` draws.
fn information_value(params: &ModelParams, m: usize) -> (f64, f64) {
    let (pi, a, b) = (params.pi, params.alpha, params.beta);
    let mut value = 0.0;
    let mut mass = 0.0;
    for y in 0u32..(1u32 << m) {
        let hits = y.count_ones() as i32;
        let good = pi * b.powi(hits) * (1.0 - b).powi(m as i32 - hits);
        let bad = if hits == 0 { 1.0 - pi } else { 0.0 };
        value += (good - a * bad).max(0.0);
        mass += good + bad;
    }
    (value, mass)
}

fn payoffs_and_mass(params: &ModelParams, net: &NetworkSpec, profile: &StrategyProfile) -> Result<(Vec<f64>, f64)> {
    let laws = draw_counts(net, profile)?;
    let cache: Vec<(f64, f64)> = (0..=net.n).map(|m| information_value(params, m)).collect();
    let first = (1.0 - params.delta) * (params.pi - params.alpha * (1.0 - params.pi));
    let mut total_probability = 0.0;
    let payoffs = laws
        .iter()
        .enumerate()
        .map(|(i, law)| {
            let mut second = 0.0;
            let mut mass = 0.0;
            for (m, &q) in law.iter().enumerate() {
                second += q * cache[m].0;
                mass += q * cache[m].1;
            }
            if i == 0 {
                total_probability = mass;
            }
            let explores = profile.choices[i] == Action::Explore;
            let own = if explores { first } else { 0.0 };
            own + params.delta * second
        })
        .collect();
    Ok((payoffs, total_probability))
}

/// Exact expected payoff of every agent under `profile`.
pub fn exact_payoffs(params: &ModelParams, net: &NetworkSpec, profile: &StrategyProfile) -> Result<OracleResult> {
    check_profile(net, profile)?;
    let (payoffs, total_probability) = payoffs_and_mass(params, net, profile)?;
    let is_nash = nash_given(params, net, profile, &payoffs)?;
    Ok(OracleResult {
        surplus: payoffs.iter().sum(),
        payoffs,
        is_nash,
        total_probability,
    })
}

fn nash_given(params: &ModelParams, net: &NetworkSpec, profile: &StrategyProfile, payoffs: &[f64]) -> Result<bool> {
    for i in 0..net.n {
        let mut dev = profile.clone();
        dev.choices[i] = dev.choices[i].flipped();
        let (alt, _) = payoffs_and_mass(params, net, &dev)?;
        let gain = alt[i] - payoffs[i];
        let ok = match profile.choices[i] {
            // explorers must strictly prefer exploring
            Action::Explore => gain < -PAYOFF_TIE,
            Action::Exploit => gain <= PAYOFF_TIE,
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether no agent gains from a unilateral deviation (explorers strictly,
/// exploiters weakly).
pub fn verify_nash(params: &ModelParams, net: &NetworkSpec, profile: &StrategyProfile) -> Result<bool> {
    check_profile(net, profile)?;
    let (payoffs, _) = payoffs_and_mass(params, net, profile)?;
    nash_given(params, net, profile, &payoffs)
}

/// Surplus-maximizing number of explorers.
#[derive(Clone, Debug, PartialEq)]
pub struct Optimum {
    pub k: usize,
    pub surplus: f64,
    /// Surplus for every `k` in `0..=n`.
    pub values: Vec<f64>,
}

/// Argmax over `k` of total surplus, ties going to the smaller `k`.
///
/// Values come from full enumeration for `n ≤ 6` and from the closed form
/// otherwise.
pub fn exact_optimum(params: &ModelParams, net: &NetworkSpec) -> Result<Optimum> {
    let n = net.n;
    if n > ORACLE_LIMIT {
        return Err(Error::TooLarge {
            what: "exact optimum",
            n,
            limit: ORACLE_LIMIT,
        });
    }
    let values = (0..=n)
        .map(|k| {
            if n <= GRAPH_ENUMERATION_LIMIT {
                let (pay, _) = payoffs_and_mass(params, net, &StrategyProfile::with_explorers(n, k))?;
                Ok(pay.iter().sum())
            } else {
                Ok(social_surplus(params, net, k)?.value)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut k = 0;
    for (j, &v) in values.iter().enumerate().skip(1) {
        if v > values[k] + PAYOFF_TIE {
            k = j;
        }
    }
    Ok(Optimum {
        k,
        surplus: values[k],
        values,
    })
}

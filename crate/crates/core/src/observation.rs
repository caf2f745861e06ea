//! Law of the number `M` of explorers an agent observes.
//!
//! `E_k` denotes expectation when `k` of the agent's `n - 1` peers explore.

use crate::dist::{binomial_pmf, hypergeometric_pmf};
use crate::error::{Error, Result};
use crate::model::{NetworkSpec, Regime};
use crate::netsim::exact::exact_component_pmf;

/// Largest population for which global-regime expectations are computed
/// exactly; above it a Monte Carlo estimate is required.
pub const GLOBAL_EXACT_LIMIT: usize = 30;

fn check_peers(net: &NetworkSpec, k: usize) -> Result<()> {
    if k + 1 > net.n {
        return Err(Error::CountOutOfRange {
            k,
            min: 0,
            max: net.n - 1,
        });
    }
    Ok(())
}

/// Masses of `M` on `0..=k` when `k` peers explore.
///
/// Local: `M ~ Bin(k, p)`. Global: the agent's component has size `s` with
/// the exact finite-`n` law, and its other `s - 1` members are a uniform
/// subset of the peers, so `M | s ~ Hypergeometric(n - 1, k, s - 1)`.
pub fn observed_pmf(net: &NetworkSpec, k: usize) -> Result<Vec<f64>> {
    check_peers(net, k)?;
    match net.regime {
        Regime::Local => Ok(binomial_pmf(k, net.p())),
        Regime::Global => {
            if net.n > GLOBAL_EXACT_LIMIT {
                return Err(Error::EstimateRequired {
                    n: net.n,
                    limit: GLOBAL_EXACT_LIMIT,
                });
            }
            let sizes = exact_component_pmf(net.n, net.p())?;
            Ok(mix_component_sizes(net.n, k, &sizes))
        }
    }
}

/// Mixes hypergeometric draws over a component-size law indexed by size.
pub(crate) fn mix_component_sizes(n: usize, k: usize, sizes: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; k + 1];
    for (s, &ps) in sizes.iter().enumerate().skip(1) {
        if ps == 0.0 {
            continue;
        }
        for (m, h) in hypergeometric_pmf(n - 1, k, s - 1).into_iter().enumerate() {
            out[m] += ps * h;
        }
    }
    out
}

/// `E_k[(1-β)^M]`.
pub fn failure_weight(beta: f64, net: &NetworkSpec, k: usize) -> Result<f64> {
    check_peers(net, k)?;
    match net.regime {
        Regime::Local => Ok((1.0 - net.p() * beta).powi(k as i32)),
        Regime::Global => {
            let pmf = observed_pmf(net, k)?;
            Ok(moment(&pmf, 1.0 - beta))
        }
    }
}

/// `E_k[(1-β)^M]` for every `k` in `0..n`.
pub fn failure_weights(beta: f64, net: &NetworkSpec) -> Result<Vec<f64>> {
    match net.regime {
        Regime::Local => {
            let base = 1.0 - net.p() * beta;
            Ok((0..net.n).map(|k| base.powi(k as i32)).collect())
        }
        Regime::Global => {
            if net.n > GLOBAL_EXACT_LIMIT {
                return Err(Error::EstimateRequired {
                    n: net.n,
                    limit: GLOBAL_EXACT_LIMIT,
                });
            }
            let sizes = exact_component_pmf(net.n, net.p())?;
            Ok((0..net.n)
                .map(|k| moment(&mix_component_sizes(net.n, k, &sizes), 1.0 - beta))
                .collect())
        }
    }
}

/// `Σ_m pmf[m] z^m`.
pub fn moment(pmf: &[f64], z: f64) -> f64 {
    let mut zm = 1.0;
    let mut acc = 0.0;
    for &q in pmf {
        acc += q * zm;
        zm *= z;
    }
    acc
}

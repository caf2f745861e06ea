//! Closed-form expected payoffs of explorers (`v_k`) and exploiters (`w_k`).

use crate::error::{Error, Result};
use crate::model::{ModelParams, NetworkSpec};
use crate::observation::{failure_weight, observed_pmf};

/// Payoff of an exploiter when `k` of the other agents explore.
///
/// `w_k = δ E_k[(π z^M - α(1-π))⁺] + δ π E_k[1 - z^M]` with `z = 1 - β`.
pub fn payoff_w(params: &ModelParams, net: &NetworkSpec, k: usize) -> Result<f64> {
    let pmf = observed_pmf(net, k)?;
    Ok(params.delta * continuation(params, &pmf, 0))
}

/// Payoff of an explorer when `k` agents explore in total, herself included.
pub fn payoff_v(params: &ModelParams, net: &NetworkSpec, k: usize) -> Result<f64> {
    if k == 0 || k > net.n {
        return Err(Error::CountOutOfRange {
            k,
            min: 1,
            max: net.n,
        });
    }
    let pmf = observed_pmf(net, k - 1)?;
    Ok((1.0 - params.delta) * params.risky_mean() + params.delta * continuation(params, &pmf, 1))
}

/// Second-period value given the law of observed peers and `own` extra
/// signals drawn by the agent herself.
///
/// With `j = M + own` draws: a success reveals `θ = 1` and pays `1`;
/// otherwise the agent acts on the posterior.
pub(crate) fn continuation(params: &ModelParams, pmf: &[f64], own: usize) -> f64 {
    let (pi, alpha) = (params.pi, params.alpha);
    let z = params.failure();
    let mut zj = z.powi(own as i32);
    let mut acc = 0.0;
    for &q in pmf {
        acc += q * ((pi * zj - alpha * (1.0 - pi)).max(0.0) + pi * (1.0 - zj));
        zj *= z;
    }
    acc
}

/// `Γ_k = E_{k-1}[(1-β)^{M+1}] - E_k[(1-β)^M]`, with `E_{-1}` the point mass
/// at `M = 0`.
pub fn gamma_k(params: &ModelParams, net: &NetworkSpec, k: usize) -> Result<f64> {
    let z = params.failure();
    if k == 0 {
        return Ok(z - 1.0);
    }
    Ok(z * failure_weight(params.beta, net, k - 1)? - failure_weight(params.beta, net, k)?)
}

/// Gain from exploring rather than exploiting when `k` peers explore,
/// `v_{k+1} - w_k`.
pub fn exploration_gain(params: &ModelParams, net: &NetworkSpec, k: usize) -> Result<f64> {
    Ok(payoff_v(params, net, k + 1)? - payoff_w(params, net, k)?)
}

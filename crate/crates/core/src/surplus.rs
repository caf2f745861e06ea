//! Social surplus, the marginal value of an extra explorer, planner cutoffs
//! and large-network surplus limits.

use rayon::prelude::*;

use crate::dist::{binomial_pmf, poisson_pmf_truncated};
use crate::equilibrium::{equilibrium_count, local_threshold_limit, rung_ratio, threshold_at};
use crate::error::{Error, Result};
use crate::model::{ModelParams, NetworkSpec, Regime, TIE_TOLERANCE};
use crate::payoff::{payoff_v, payoff_w};

/// Total surplus with `k` explorers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurplusPoint {
    pub k: usize,
    pub n: usize,
    pub value: f64,
}

impl SurplusPoint {
    pub fn per_capita(&self) -> f64 {
        self.value / self.n as f64
    }
}

/// `u_{k,n} = k v_k + (n - k) w_k`.
pub fn social_surplus(params: &ModelParams, net: &NetworkSpec, k: usize) -> Result<SurplusPoint> {
    let n = net.n;
    if k > n {
        return Err(Error::CountOutOfRange { k, min: 0, max: n });
    }
    let mut value = 0.0;
    if k > 0 {
        value += k as f64 * payoff_v(params, net, k)?;
    }
    if k < n {
        value += (n - k) as f64 * payoff_w(params, net, k)?;
    }
    Ok(SurplusPoint { k, n, value })
}

fn require_local(net: &NetworkSpec, operation: &'static str) -> Result<()> {
    if net.regime != Regime::Local {
        return Err(Error::LocalOnly {
            operation,
            alternative: "social_surplus differences",
        });
    }
    Ok(())
}

/// Which closed form governs `Δu_k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MarginalRegion {
    /// `π/(1-π) < α`: no posterior without a success favours the risky arm.
    LowBelief,
    /// `k < r`: every explorer's information leaves decisions unchanged.
    HighBeliefLowK,
    /// `k ≥ r`, with `α/(1-β)^r ≤ π/(1-π) ≤ α/(1-β)^{r+1}`.
    Banded,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarginalDecomposition {
    pub region: MarginalRegion,
    /// The band index `r` when `π/(1-π) ≥ α`.
    pub band: Option<usize>,
    pub a_k: Option<f64>,
    pub b_k: Option<f64>,
    /// `A_k` recomputed from point masses.
    pub a_k_identity: Option<f64>,
    pub delta_u: f64,
}

/// Band of the current belief: `None` below `α`, else `(r, on_edge)`.
fn belief_band(params: &ModelParams) -> Option<(usize, bool)> {
    let pi = params.pi;
    if pi >= 1.0 {
        return Some((usize::MAX, false));
    }
    let odds = pi / (1.0 - pi);
    if odds < params.alpha * (1.0 - TIE_TOLERANCE) {
        return None;
    }
    let t = (params.alpha / odds).ln() / (1.0 - params.beta).ln();
    let nearest = t.round();
    if (t - nearest).abs() <= TIE_TOLERANCE * nearest.max(1.0) {
        return Some((nearest.max(0.0) as usize, true));
    }
    let r = t.floor().max(0.0);
    if r >= usize::MAX as f64 {
        return Some((usize::MAX, false));
    }
    Some((r as usize, false))
}

/// Binomial laws `q_{k-1}`, `q_k`, `q_{k+1}` with suffix sums of `q(m) z^m`.
struct LocalLaws {
    q: [Vec<f64>; 3],
    tail: [Vec<f64>; 3],
    cdf: [Vec<f64>; 3],
    k: usize,
}

impl LocalLaws {
    fn new(k: usize, p: f64, z: f64) -> Self {
        let q = [
            if k == 0 { Vec::new() } else { binomial_pmf(k - 1, p) },
            binomial_pmf(k, p),
            binomial_pmf(k + 1, p),
        ];
        let tail = q.clone().map(|v| {
            let mut out = vec![0.0; v.len() + 1];
            for m in (0..v.len()).rev() {
                out[m] = out[m + 1] + v[m] * z.powi(m as i32);
            }
            out
        });
        let cdf = q.clone().map(|v| {
            let mut acc = 0.0;
            v.iter()
                .map(|x| {
                    acc += x;
                    acc
                })
                .collect()
        });
        LocalLaws { q, tail, cdf, k }
    }

    /// Index into the three laws for population `a ∈ {k-1, k, k+1}`.
    fn slot(&self, a: usize) -> usize {
        a + 1 - self.k
    }

    fn mass(&self, a: usize, m: isize) -> f64 {
        let v = &self.q[self.slot(a)];
        if m < 0 || m as usize >= v.len() {
            0.0
        } else {
            v[m as usize]
        }
    }

    fn cdf(&self, a: usize, b: isize) -> f64 {
        if b < 0 {
            return 0.0;
        }
        let v = &self.cdf[self.slot(a)];
        if v.is_empty() {
            return 0.0;
        }
        v[(b as usize).min(v.len() - 1)]
    }

    /// `Σ_{m ≥ from} q_a(m) z^m`.
    fn tail(&self, a: usize, from: usize) -> f64 {
        let v = &self.tail[self.slot(a)];
        v[from.min(v.len() - 1)]
    }
}

/// `(A_k, B_k, A_k from point masses)` for band `r ≤ k`.
fn band_coefficients(params: &ModelParams, n: usize, p: f64, laws: &LocalLaws, r: usize) -> (f64, f64, f64) {
    let d = params.delta;
    let z = params.failure();
    let k = laws.k;
    let (kf, nf) = (k as f64, n as f64);
    let ri = r as isize;
    let km1 = k.saturating_sub(1);
    let prev = |f: &dyn Fn(usize) -> f64| if k == 0 { 0.0 } else { f(km1) };
    let a = (1.0 - d) + d * (kf + 1.0) * laws.cdf(k, ri - 1)
        + d * (nf - kf - 1.0) * laws.cdf(k + 1, ri)
        - d * kf * prev(&|a| laws.cdf(a, ri - 1))
        - d * (nf - kf) * laws.cdf(k, ri);
    let b = (1.0 - d) - d * (kf + 1.0) * z * laws.tail(k, r)
        - d * (nf - kf - 1.0) * laws.tail(k + 1, r + 1)
        + d * kf * z * prev(&|a| laws.tail(a, r))
        + d * (nf - kf) * laws.tail(k, r + 1);
    let a_identity = 1.0
        - d
        - d * kf * p * prev(&|a| laws.mass(a, ri - 1))
        - d * (nf - kf) * p * laws.mass(k, ri)
        - d * (1.0 - p) * laws.mass(k, ri);
    (a, b, a_identity)
}

/// `(A_k, B_k)` of band `r ≤ k` in the local regime.
pub fn band_coefficients_for(params: &ModelParams, net: &NetworkSpec, k: usize, r: usize) -> (f64, f64) {
    let laws = LocalLaws::new(k, net.p(), params.failure());
    let (a, b, _) = band_coefficients(params, net.n, net.p(), &laws, r);
    (a, b)
}

/// `Δu_k` in the low-belief region, in closed form.
fn low_belief_marginal(params: &ModelParams, n: usize, p: f64, k: usize) -> f64 {
    let (d, b, pi) = (params.delta, params.beta, params.pi);
    (1.0 - d) * params.risky_mean() + d * pi * b * low_belief_factor(n, p, b, k)
}

/// `(1-pβ)^k (1 + (n-1)p - k p(1-p)β/(1-pβ))`.
fn low_belief_factor(n: usize, p: f64, beta: f64, k: usize) -> f64 {
    let base = 1.0 - p * beta;
    let correction = if k == 0 { 0.0 } else { k as f64 * p * (1.0 - p) * beta / base };
    base.powi(k as i32) * (1.0 + (n as f64 - 1.0) * p - correction)
}

/// `Δu_k = u_{k+1,n} - u_{k,n}` through its regional closed forms.
pub fn marginal_surplus(params: &ModelParams, net: &NetworkSpec, k: usize) -> Result<MarginalDecomposition> {
    require_local(net, "marginal_surplus")?;
    let n = net.n;
    if k >= n {
        return Err(Error::CountOutOfRange { k, min: 0, max: n - 1 });
    }
    let p = net.p();
    let band = match belief_band(params) {
        None => {
            return Ok(MarginalDecomposition {
                region: MarginalRegion::LowBelief,
                band: None,
                a_k: None,
                b_k: None,
                a_k_identity: None,
                delta_u: low_belief_marginal(params, n, p, k),
            })
        }
        Some(b) => b,
    };
    let r = match band {
        (r, _) if k >= r => Some(r),
        // on the edge the band below holds as well
        (r, true) if k + 1 == r => Some(k),
        _ => None,
    };
    match r {
        None => Ok(MarginalDecomposition {
            region: MarginalRegion::HighBeliefLowK,
            band: Some(band.0),
            a_k: None,
            b_k: None,
            a_k_identity: None,
            delta_u: (1.0 - params.delta) * params.risky_mean(),
        }),
        Some(r) => {
            let laws = LocalLaws::new(k, p, params.failure());
            let (a, b, a_id) = band_coefficients(params, n, p, &laws, r);
            Ok(MarginalDecomposition {
                region: MarginalRegion::Banded,
                band: Some(r),
                a_k: Some(a),
                b_k: Some(b),
                a_k_identity: Some(a_id),
                delta_u: params.pi * b - params.alpha * (1.0 - params.pi) * a,
            })
        }
    }
}

/// `dΔu_k/dπ` at the current belief.
pub fn marginal_slope(params: &ModelParams, net: &NetworkSpec, k: usize) -> Result<f64> {
    let dec = marginal_surplus(params, net, k)?;
    Ok(match dec.region {
        MarginalRegion::LowBelief => {
            (1.0 - params.delta) * (1.0 + params.alpha)
                + params.delta * params.beta * low_belief_factor(net.n, net.p(), params.beta, k)
        }
        MarginalRegion::HighBeliefLowK => (1.0 - params.delta) * (1.0 + params.alpha),
        MarginalRegion::Banded => dec.b_k.unwrap() + params.alpha * dec.a_k.unwrap(),
    })
}

/// Planner cutoffs `(π̲*, π̄*)`: full exploitation is optimal iff `π ≤ π̲*`,
/// full exploration iff `π ≥ π̄*`.
pub fn planner_cutoffs(params: &ModelParams, net: &NetworkSpec) -> Result<(f64, f64)> {
    require_local(net, "planner_cutoffs")?;
    if net.n < 2 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: net.n as f64,
            reason: "planner cutoffs need at least two agents",
        });
    }
    let (n, p, b) = (net.n as f64, net.p(), params.beta);
    let lower = threshold_at(params, 1.0 + (n - 1.0) * p);
    let upper = threshold_at(
        params,
        (1.0 - p * b).powi(net.n as i32 - 2) * (n * p * (1.0 - b) + 1.0 - p),
    );
    Ok((lower, upper))
}

/// Planner cutoffs as `n → ∞` with `np = λ`.
pub fn planner_cutoffs_limit(params: &ModelParams, lambda: f64) -> (f64, f64) {
    let b = params.beta;
    (
        threshold_at(params, 1.0 + lambda),
        threshold_at(params, (-lambda * b).exp() * (lambda * (1.0 - b) + 1.0)),
    )
}

/// A discontinuity of equilibrium surplus along `λ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jump {
    pub lambda_star: f64,
    /// Explorers from `λ*` on; just below `λ*` there are `k + 1`.
    pub k: usize,
    /// `u_{k,n} - u_{k+1,n}` at `λ*`.
    pub drop: f64,
    pub closed_form: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurplusCurve {
    /// `(λ, per-capita equilibrium surplus)` in grid order.
    pub points: Vec<(f64, f64)>,
    /// Discontinuities inside the grid range, by increasing `λ*`.
    pub jumps: Vec<Jump>,
}

/// Closed-form total surplus change `u_{k,n} - u_{k+1,n}` at `π = π_{k,n}`
/// (`k ≥ 1`).
pub fn drop_closed_form(params: &ModelParams, n: usize, p: f64, k: usize) -> f64 {
    let (a, b, d) = (params.alpha, params.beta, params.delta);
    let base = 1.0 - p * b;
    let bracket = (n as f64 - 1.0) * base - k as f64 * (1.0 - p) * b;
    -a * p * b * d * (1.0 - d) * base.powi(k as i32 - 1) * bracket
        / ((1.0 + a) * (1.0 - d) + d * b * base.powi(k as i32))
}

/// `λ` at which the local rung `π_{k,n}` reaches the current belief.
pub fn regime_change_lambda(params: &ModelParams, n: usize, k: usize) -> Option<f64> {
    let x = rung_ratio(params);
    if k == 0 || !(x > 0.0 && x < 1.0) {
        return None;
    }
    let lambda = n as f64 * (1.0 - x.powf(1.0 / k as f64)) / params.beta;
    (lambda <= n as f64).then_some(lambda)
}

/// Per-capita equilibrium surplus along a grid of mean degrees, with the
/// exact locations and sizes of its drops.
pub fn equilibrium_surplus_curve(params: &ModelParams, n: usize, lambda_grid: &[f64]) -> Result<SurplusCurve> {
    if lambda_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    params.validate()?;
    let points = lambda_grid
        .par_iter()
        .map(|&lambda| {
            let net = NetworkSpec::with_mean_degree(n, lambda, Regime::Local)?;
            let k = equilibrium_count(params, &net)?;
            Ok((lambda, social_surplus(params, &net, k)?.per_capita()))
        })
        .collect::<Result<Vec<_>>>()?;
    let lo = lambda_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = lambda_grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut jumps = Vec::new();
    for k in 1..n {
        let Some(lambda_star) = regime_change_lambda(params, n, k) else {
            continue;
        };
        if lambda_star < lo || lambda_star > hi {
            continue;
        }
        let net = NetworkSpec::with_mean_degree(n, lambda_star, Regime::Local)?;
        let drop = social_surplus(params, &net, k)?.value - social_surplus(params, &net, k + 1)?.value;
        jumps.push(Jump {
            lambda_star,
            k,
            drop,
            closed_form: drop_closed_form(params, n, net.p(), k),
        });
    }
    jumps.sort_by(|a, b| a.lambda_star.total_cmp(&b.lambda_star));
    Ok(SurplusCurve { points, jumps })
}

/// `λ(π)`: the mean degree beyond which `π` lies below the limiting local
/// full-exploration threshold.
pub fn lambda_threshold(params: &ModelParams) -> Option<f64> {
    let x = rung_ratio(params);
    (x > 0.0 && x < 1.0).then(|| -x.ln() / params.beta)
}

/// Per-capita equilibrium surplus as `n → ∞` in the local regime.
pub fn limit_surplus(params: &ModelParams, lambda: f64) -> f64 {
    let (a, b, d, pi) = (params.alpha, params.beta, params.delta, params.pi);
    let lower = threshold_at(params, 1.0);
    if pi <= lower {
        return 0.0;
    }
    if pi < local_threshold_limit(params, lambda) {
        return (1.0 - d) * params.risky_mean() / b + d * pi;
    }
    let z = params.failure();
    let pois = poisson_pmf_truncated(lambda, 1e-14);
    let mut zm = z;
    let mut positive = 0.0;
    for &q in &pois {
        positive += q * (pi * zm - a * (1.0 - pi)).max(0.0);
        zm *= z;
    }
    (1.0 - d) * params.risky_mean() + d * pi * (1.0 - z * (-lambda * b).exp()) + d * positive
}

/// Limit of the externality of the last explorer on the others, `λβe^{-λβ}`.
pub fn nth_externality_limit(params: &ModelParams, lambda: f64) -> f64 {
    let x = lambda * params.beta;
    x * (-x).exp()
}

/// Finite-`n` externality `(n-1)[f(n-1) - f(n-2)]` with
/// `f(a) = Σ_m q_a(m)(1 - (1-β)^m)`.
pub fn nth_externality_finite(params: &ModelParams, n: usize, lambda: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: n as f64,
            reason: "needs at least two agents",
        });
    }
    let p = NetworkSpec::with_mean_degree(n, lambda, Regime::Local)?.p();
    let z = params.failure();
    let f = |a: usize| -> f64 {
        let mut zm = 1.0;
        binomial_pmf(a, p)
            .iter()
            .map(|q| {
                let t = q * (1.0 - zm);
                zm *= z;
                t
            })
            .sum()
    };
    Ok((n - 1) as f64 * (f(n - 1) - f(n - 2)))
}

/// Minimum of `dΔu_k/dπ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplementarityReport {
    pub lambda: f64,
    /// Minimum over every `k < n` and every belief region.
    pub min_derivative: f64,
    pub argmin_k: usize,
    pub argmin_region: MarginalRegion,
    pub argmin_band: Option<usize>,
    /// Minimum over `k < n` at the supplied beliefs.
    pub grid_min: Option<f64>,
    /// Whether `δ(λ + 2) ≤ 1`, the sufficient condition for a nonnegative
    /// minimum.
    pub predicted_nonnegative: bool,
}

impl ComplementarityReport {
    pub fn is_nonnegative(&self) -> bool {
        self.min_derivative >= 0.0
    }
}

pub fn complementarity_check(params: &ModelParams, net: &NetworkSpec, pi_grid: &[f64]) -> Result<ComplementarityReport> {
    require_local(net, "complementarity_check")?;
    params.validate()?;
    let (n, p) = (net.n, net.p());
    let (a, b, d) = (params.alpha, params.beta, params.delta);
    let flat = (1.0 - d) * (1.0 + a);
    let per_k: Vec<(f64, MarginalRegion, Option<usize>)> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut best = (flat + d * b * low_belief_factor(n, p, b, k), MarginalRegion::LowBelief, None);
            if flat < best.0 {
                best = (flat, MarginalRegion::HighBeliefLowK, None);
            }
            let laws = LocalLaws::new(k, p, params.failure());
            for r in 0..=k {
                let (ak, bk, _) = band_coefficients(params, n, p, &laws, r);
                let v = bk + a * ak;
                if v < best.0 {
                    best = (v, MarginalRegion::Banded, Some(r));
                }
            }
            best
        })
        .collect();
    let (argmin_k, &(min_derivative, argmin_region, argmin_band)) = per_k
        .iter()
        .enumerate()
        .min_by(|x, y| x.1 .0.total_cmp(&y.1 .0))
        .expect("n ≥ 1");
    let grid_min = if pi_grid.is_empty() {
        None
    } else {
        let vals = pi_grid
            .par_iter()
            .map(|&pi| {
                let at = params.with_pi(pi);
                (0..n).try_fold(f64::INFINITY, |m, k| Ok::<_, Error>(m.min(marginal_slope(&at, net, k)?)))
            })
            .collect::<Result<Vec<f64>>>()?;
        Some(vals.into_iter().fold(f64::INFINITY, f64::min))
    };
    Ok(ComplementarityReport {
        lambda: net.lambda(),
        min_derivative,
        argmin_k,
        argmin_region,
        argmin_band,
        grid_min,
        predicted_nonnegative: d * (net.lambda() + 2.0) <= 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{threshold_ladder, two_player_thresholds};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn fig3(pi: f64) -> ModelParams {
        ModelParams::new(1.0, 0.3, 0.15, pi).unwrap()
    }

    fn third() -> NetworkSpec {
        NetworkSpec::local(2, 1.0 / 3.0).unwrap()
    }

    #[test]
    fn all_exploit_surplus() {
        for &pi in &[0.3, 0.6] {
            let params = fig3(pi);
            let u = social_surplus(&params, &third(), 0).unwrap();
            assert_abs_diff_eq!(u.value, 2.0 * 0.15 * params.risky_mean().max(0.0), epsilon = 1e-15);
        }
    }

    #[test]
    fn two_player_markers() {
        // markers sit at the six-digit tick values of the thresholds
        let (lo, hi) = two_player_thresholds(&fig3(0.5), 1.0 / 3.0);
        assert_abs_diff_eq!(lo, 0.487106, epsilon = 5e-7);
        assert_abs_diff_eq!(hi, 0.488365, epsilon = 5e-7);
        let u2 = social_surplus(&fig3(0.488365), &third(), 2).unwrap();
        assert_abs_diff_eq!(u2.value, 0.0146495, epsilon = 1e-6);
        assert_abs_diff_eq!(social_surplus(&fig3(0.488365), &third(), 1).unwrap().value, 0.0095224, epsilon = 1e-6);
        assert_abs_diff_eq!(social_surplus(&fig3(0.487106), &third(), 1).unwrap().value, 0.0073065, epsilon = 1e-6);
    }

    #[test]
    fn planner_examples() {
        let (lo, hi) = planner_cutoffs(&fig3(0.5), &third()).unwrap();
        assert_abs_diff_eq!(lo, 0.482955, epsilon = 1e-6);
        assert_abs_diff_eq!(hi, 0.485437, epsilon = 1e-6);
        let isolated = NetworkSpec::local(7, 0.0).unwrap();
        let (lo, hi) = planner_cutoffs(&fig3(0.5), &isolated).unwrap();
        let single = two_player_thresholds(&fig3(0.5), 0.0).0;
        assert_abs_diff_eq!(lo, single, epsilon = 1e-15);
        assert_abs_diff_eq!(hi, single, epsilon = 1e-15);
        let (llo, lhi) = planner_cutoffs_limit(&fig3(0.5), 3.0);
        let big = NetworkSpec::with_mean_degree(1_000_000, 3.0, Regime::Local).unwrap();
        let (blo, bhi) = planner_cutoffs(&fig3(0.5), &big).unwrap();
        assert_abs_diff_eq!(llo, blo, epsilon = 1e-6);
        assert_abs_diff_eq!(lhi, bhi, epsilon = 1e-6);
    }

    #[test]
    fn low_belief_closed_form() {
        let net = NetworkSpec::local(9, 0.35).unwrap();
        let params = fig3(0.47);
        for k in 0..9 {
            let dec = marginal_surplus(&params, &net, k).unwrap();
            assert_eq!(dec.region, MarginalRegion::LowBelief);
            let diff = social_surplus(&params, &net, k + 1).unwrap().value - social_surplus(&params, &net, k).unwrap().value;
            assert_abs_diff_eq!(dec.delta_u, diff, epsilon = 1e-12);
        }
    }

    #[test]
    fn high_belief_low_k() {
        // odds 4 with α = 1, β = 0.3 gives r = 3
        let params = fig3(0.8);
        let net = NetworkSpec::local(8, 0.4).unwrap();
        let dec = marginal_surplus(&params, &net, 1).unwrap();
        assert_eq!(dec.region, MarginalRegion::HighBeliefLowK);
        assert_eq!(dec.band, Some(3));
        assert_abs_diff_eq!(dec.delta_u, 0.85 * params.risky_mean(), epsilon = 1e-15);
        let banded = marginal_surplus(&params, &net, 5).unwrap();
        assert_eq!(banded.region, MarginalRegion::Banded);
        assert_abs_diff_eq!(banded.a_k.unwrap(), banded.a_k_identity.unwrap(), epsilon = 1e-13);
    }

    #[test]
    fn band_edges_agree() {
        // π/(1-π) = α/(1-β)^2 exactly
        let odds = 1.0 / 0.49;
        let params = fig3(odds / (1.0 + odds));
        let net = NetworkSpec::local(6, 0.5).unwrap();
        for k in 0..6 {
            let dec = marginal_surplus(&params, &net, k).unwrap();
            let diff = social_surplus(&params, &net, k + 1).unwrap().value - social_surplus(&params, &net, k).unwrap().value;
            assert_abs_diff_eq!(dec.delta_u, diff, epsilon = 1e-12);
            if k >= 1 {
                assert_eq!(dec.region, MarginalRegion::Banded);
            }
        }
    }

    #[test]
    fn drop_matches_surplus_difference() {
        for &n in &[2usize, 10, 50] {
            let params = fig3(0.488);
            let grid: Vec<f64> = (0..=400).map(|i| i as f64 * n as f64 / 400.0).collect();
            let curve = equilibrium_surplus_curve(&params, n, &grid).unwrap();
            assert!(!curve.jumps.is_empty());
            for j in &curve.jumps {
                assert!(j.drop < 0.0);
                assert_abs_diff_eq!(j.drop, j.closed_form, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn naive_bracket_is_not_the_drop() {
        let params = fig3(0.49);
        let (n, k) = (10usize, 1usize);
        let lambda = regime_change_lambda(&params, n, k).unwrap();
        let p = lambda / n as f64;
        let full = drop_closed_form(&params, n, p, k);
        let naive = full / ((n as f64 - 1.0) * (1.0 - p * 0.3) - k as f64 * (1.0 - p) * 0.3)
            * ((n - 1 - k) as f64 * (1.0 - p) * 0.3);
        let net = NetworkSpec::with_mean_degree(n, lambda, Regime::Local).unwrap();
        let diff = social_surplus(&params, &net, k).unwrap().value - social_surplus(&params, &net, k + 1).unwrap().value;
        assert_abs_diff_eq!(diff, full, epsilon = 1e-12);
        assert!((diff - naive).abs() > 1e-3);
    }

    #[test]
    fn two_player_curve_has_one_drop() {
        let params = fig3(0.488);
        let grid: Vec<f64> = (0..=200).map(|i| i as f64 / 100.0).collect();
        let curve = equilibrium_surplus_curve(&params, 2, &grid).unwrap();
        assert_eq!(curve.jumps.len(), 1);
        let star = curve.jumps[0].lambda_star;
        for w in curve.points.windows(2) {
            if !(w[0].0 < star && w[1].0 >= star) {
                assert!(w[1].1 >= w[0].1 - 1e-15);
            }
        }
        assert!(equilibrium_surplus_curve(&params, 2, &[]).is_err());
    }

    #[test]
    fn limit_surplus_pieces() {
        let lower = two_player_thresholds(&fig3(0.5), 0.0).0;
        assert_eq!(limit_surplus(&fig3(lower), 2.0), 0.0);
        let params = fig3(0.49);
        let lam = lambda_threshold(&params).unwrap();
        let flat = 0.85 * params.risky_mean() / 0.3 + 0.15 * 0.49;
        assert_abs_diff_eq!(limit_surplus(&params, lam + 1.0), flat, epsilon = 1e-15);
        assert_abs_diff_eq!(limit_surplus(&params, lam + 1e-9), limit_surplus(&params, lam - 1e-9), epsilon = 1e-8);
        let high = fig3(0.55);
        let zero = 0.85 * high.risky_mean() + 0.15 * (0.55 * 0.3 + (0.55 * 0.7 - 0.45f64).max(0.0));
        assert_abs_diff_eq!(limit_surplus(&high, 0.0), zero, epsilon = 1e-15);
        let isolated = NetworkSpec::local(5, 0.0).unwrap();
        assert_abs_diff_eq!(social_surplus(&high, &isolated, 5).unwrap().per_capita(), zero, epsilon = 1e-15);
    }

    #[test]
    fn externality_values() {
        let params = fig3(0.5);
        assert_eq!(nth_externality_limit(&params, 0.0), 0.0);
        assert_abs_diff_eq!(nth_externality_limit(&params, 3.0), 0.9 * (-0.9f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(nth_externality_limit(&params, 3.0), 0.365913, epsilon = 1e-6);
        let finite = nth_externality_finite(&params, 10_000, 3.0).unwrap();
        assert!((finite - nth_externality_limit(&params, 3.0)).abs() < 1e-3);
    }

    #[test]
    fn complementarity_signs() {
        let params = ModelParams::new(1.0, 0.05, 0.3, 0.5).unwrap();
        let at = |lambda: f64| {
            let net = NetworkSpec::with_mean_degree(500, lambda, Regime::Local).unwrap();
            complementarity_check(&params, &net, &[]).unwrap()
        };
        let low = at(4.0 / 3.0);
        assert!(low.predicted_nonnegative && low.is_nonnegative());
        let high = at(2.0);
        assert!(!high.is_nonnegative());
        assert_abs_diff_eq!(high.min_derivative, -0.353, epsilon = 1e-3);
    }

    #[test]
    fn complementarity_flat_region_value() {
        let params = ModelParams::new(1.0, 0.3, 0.2, 0.95).unwrap();
        let net = NetworkSpec::local(6, 0.2).unwrap();
        let dec = marginal_surplus(&params, &net, 0).unwrap();
        assert_eq!(dec.region, MarginalRegion::HighBeliefLowK);
        assert_abs_diff_eq!(marginal_slope(&params, &net, 0).unwrap(), 0.8 * 2.0, epsilon = 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn marginal_equals_difference(
            pi in 0.01f64..0.999, alpha in 0.2f64..2.0, beta in 0.02f64..0.9,
            delta in 0.0f64..=1.0, p in 0.0f64..=1.0, n in 1usize..=200,
        ) {
            let params = ModelParams::new(alpha, beta, delta, pi).unwrap();
            let net = NetworkSpec::local(n, p).unwrap();
            let u: Vec<f64> = (0..=n).map(|k| social_surplus(&params, &net, k).unwrap().value).collect();
            for k in 0..n {
                let dec = marginal_surplus(&params, &net, k).unwrap();
                prop_assert!((dec.delta_u - (u[k + 1] - u[k])).abs() <= 1e-10);
                if let (Some(a), Some(b)) = (dec.a_k, dec.a_k_identity) {
                    prop_assert!((a - b).abs() <= 1e-12);
                }
            }
        }

        #[test]
        fn band_coefficient_bounds(
            beta in 0.02f64..0.9, delta in 0.0f64..=1.0, p in 0.0f64..=1.0,
            n in 1usize..=100, kf in 0.0f64..1.0, rf in 0.0f64..=1.0,
        ) {
            let params = ModelParams::new(1.0, beta, delta, 0.5).unwrap();
            let k = ((n - 1) as f64 * kf) as usize;
            let r = (k as f64 * rf) as usize;
            let laws = LocalLaws::new(k, p, 1.0 - beta);
            let (a, b, _) = band_coefficients(&params, n, p, &laws, r);
            let z = 1.0 - beta;
            prop_assert!(b >= (z.powi(r as i32) * a).max(z.powi(r as i32 + 1) * a) - 1e-12);
        }

        #[test]
        fn marginal_decreasing_at_low_belief(
            t in 0.0f64..=1.0, beta in 0.02f64..0.9, delta in 0.0f64..=1.0,
            p in 0.0f64..=1.0, n in 2usize..=120,
        ) {
            let params = ModelParams::new(1.0, beta, delta, 0.5 * t).unwrap();
            let net = NetworkSpec::local(n, p).unwrap();
            let mut prev = f64::INFINITY;
            for k in 0..n {
                let d = marginal_surplus(&params, &net, k).unwrap().delta_u;
                prop_assert!(d <= prev + 1e-12);
                prev = d;
            }
        }

        #[test]
        fn over_exploitation(
            alpha in 0.2f64..2.0, beta in 0.02f64..0.9, delta in 0.0f64..=1.0,
            p in 0.0f64..=1.0, n in 2usize..=300,
        ) {
            let params = ModelParams::new(alpha, beta, delta, 0.5).unwrap();
            let net = NetworkSpec::local(n, p).unwrap();
            let (slo, shi) = planner_cutoffs(&params, &net).unwrap();
            let set = threshold_ladder(&params, &net).unwrap();
            prop_assert!(slo <= set.pi_lower * (1.0 + 1e-15));
            prop_assert!(shi <= set.pi_bar * (1.0 + 1e-15));
        }

        #[test]
        fn limit_surplus_monotone_in_lambda(pi in 0.3f64..0.7, lambda in 0.0f64..10.0) {
            let params = fig3(pi);
            prop_assert!(limit_surplus(&params, lambda + 0.05) >= limit_surplus(&params, lambda) - 1e-13);
        }
    }
}

//! Large-network limits of the global regime.
//!
//! In `G(n, λ/n)` the component of a vertex converges to the total progeny
//! `T` of a Poisson(`λ`) branching process. Its generating function `ψ` is
//! expressed through the principal branch of the Lambert W function.

use std::f64::consts::E;


use crate::equilibrium::threshold_at;
use crate::error::{Error, Result};
use crate::model::ModelParams;

const BRANCH_POINT: f64 = -1.0 / E;

/// Principal branch `W₀(x)` for `x ≥ -1/e`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() || x < BRANCH_POINT - 1e-15 {
        return Err(Error::LambertDomain { x });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let gap = E * x + 1.0;
    if gap <= 1e-30 {
        return Ok(-1.0);
    }
    let mut w = if gap < 0.25 {
        // expansion around the branch point
        let p = (2.0 * gap).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x.abs() < 0.25 {
        x * (1.0 - x + 1.5 * x * x)
    } else if x < 3.0 {
        0.5 * x.ln_1p()
    } else {
        let l = x.ln();
        l - l.ln()
    };
    for _ in 0..50 {
        let ew = w.exp();
        let f = w * ew - x;
        if f == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-300 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        let next = w - step;
        if (next - w).abs() <= 4.0 * f64::EPSILON * (1.0 + next.abs()) {
            w = next;
            break;
        }
        w = next;
    }
    Ok(w.max(-1.0))
}

/// `ψ(z) = E[z^T; T < ∞] = -W₀(-λ z e^{-λ}) / λ`.
pub fn psi(lambda: f64, z: f64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            value: lambda,
            reason: "must be nonnegative",
        });
    }
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::InvalidParameter {
            name: "z",
            value: z,
            reason: "must lie in [0, 1]",
        });
    }
    if lambda == 0.0 {
        return Ok(z);
    }
    if z == 1.0 && lambda <= 1.0 {
        return Ok(1.0);
    }
    let x = (-lambda * z * (-lambda).exp()).max(BRANCH_POINT);
    Ok(-lambert_w0(x)? / lambda)
}

/// Borel mass `P(T = k) = e^{-λk}(λk)^{k-1}/k!`.
pub fn borel_pmf(lambda: f64, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter {
            name: "k",
            value: 0.0,
            reason: "Borel support starts at 1",
        });
    }
    if lambda == 0.0 {
        return Ok(if k == 1 { 1.0 } else { 0.0 });
    }
    let kf = k as f64;
    if k <= 50 {
        let mut v = (-lambda * kf).exp();
        for i in 1..k {
            v *= lambda * kf / (i + 1) as f64;
        }
        // (λk)^{k-1}/k! accumulated as Π_{i=1}^{k-1} λk/(i+1)
        Ok(v)
    } else {
        Ok(ln_borel(lambda, kf).exp())
    }
}

/// Stirling form, valid for `x ≥ 50`; the `x ln x` terms cancel analytically.
fn ln_borel(lambda: f64, x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    let ln_lambda = lambda.ln();
    x * (1.0 - lambda + ln_lambda) - ln_lambda - 1.5 * x.ln()
        - 0.5 * (2.0 * std::f64::consts::PI).ln()
        - series
}

/// Total progeny law of a Poisson branching process.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchingLaw {
    pub lambda: f64,
}

impl BranchingLaw {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                value: lambda,
                reason: "must be finite and > 0",
            });
        }
        Ok(BranchingLaw { lambda })
    }

    pub fn pmf(&self, k: usize) -> Result<f64> {
        borel_pmf(self.lambda, k)
    }

    pub fn generating_function(&self, z: f64) -> Result<f64> {
        psi(self.lambda, z)
    }

    /// Probability of finite progeny, `ψ(1)`.
    pub fn extinction_probability(&self) -> f64 {
        psi(self.lambda, 1.0).unwrap_or(1.0)
    }

    /// `Σ_k P(T = k) z^k` by direct summation, with an Euler–Maclaurin tail.
    pub fn mass_sum(&self, z: f64) -> f64 {
        borel_weighted_sum(self.lambda, z)
    }
}

/// `Σ_{k≥1} P(T = k) z^k` summed directly.
///
/// Terms are added up to `K = 2000` (or until they fall below `1e-20`
/// relative). The remainder is approximated by
/// `∫_K^∞ f + f(K)/2 - f'(K)/12` on the continuous extension of the summand,
/// which matters only near the critical `λ = 1` where the tail decays like
/// `k^{-3/2}`.
pub fn borel_weighted_sum(lambda: f64, z: f64) -> f64 {
    if lambda == 0.0 {
        return z;
    }
    const K: usize = 2000;
    let ln_z = z.ln();
    let term = |x: f64| (ln_borel(lambda, x) + (x * ln_z)).exp();
    let mut acc = 0.0;
    let mut comp = 0.0;
    for k in 1..K {
        let t = borel_pmf(lambda, k).unwrap_or(0.0) * z.powi(k as i32);
        // Kahan summation
        let y = t - comp;
        let s = acc + y;
        comp = (s - acc) - y;
        acc = s;
        if k > 10 && t < 1e-20 * acc {
            return acc;
        }
    }
    let kf = K as f64;
    let h = 1e-3 * kf;
    let deriv = (term(kf + h) - term(kf - h)) / (2.0 * h);
    acc + tail_integral(&term, kf, lambda, z) + term(kf) / 2.0 - deriv / 12.0
}

/// `∫_K^∞ f(x) dx` via `x = K/u²` and composite Simpson on `u ∈ (0, 1]`.
fn tail_integral(f: &dyn Fn(f64) -> f64, k: f64, lambda: f64, z: f64) -> f64 {
    let g = |u: f64| {
        if u == 0.0 {
            // f(x) ~ x^{-3/2}/√(2π) only when nothing decays exponentially
            if (lambda - 1.0).abs() < 1e-15 && z == 1.0 {
                2.0 / (2.0 * std::f64::consts::PI * k).sqrt()
            } else {
                0.0
            }
        } else {
            let x = k / (u * u);
            f(x) * 2.0 * k / (u * u * u)
        }
    };
    let steps = 4000;
    let h = 1.0 / steps as f64;
    let mut s = g(0.0) + g(1.0);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * g(i as f64 * h);
    }
    s * h / 3.0
}

/// `E[(1-β)^{T-1}] = ψ(1-β)/(1-β)`, the infinite-progeny event contributing
/// zero.
pub fn progeny_failure_weight(lambda: f64, beta: f64) -> Result<f64> {
    let z = 1.0 - beta;
    Ok(psi(lambda, z)? / z)
}

/// Limit of the full-exploration threshold in the global regime.
pub fn global_threshold_limit(params: &ModelParams, lambda: f64) -> Result<f64> {
    Ok(threshold_at(params, progeny_failure_weight(lambda, params.beta)?))
}

/// `ψ` and its first two derivatives in `λ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsiDerivatives {
    pub psi: f64,
    pub dpsi: f64,
    pub d2psi: f64,
}

/// Derivatives obtained by differentiating `ψ = z e^{λ(ψ-1)}` implicitly:
/// `ψ' = ψ(ψ-1)/(1-λψ)`, `ψ'' = ψ'(3ψ-1+λψ')/(1-λψ)`. At `λ = 1` the second
/// derivative reduces to `ψ(1-2ψ)/(1-ψ)`, which is what is returned there.
pub fn psi_derivatives_at(lambda: f64, z: f64) -> Result<PsiDerivatives> {
    let s = psi(lambda, z)?;
    let gap = 1.0 - lambda * s;
    if gap.abs() < 1e-10 {
        return Err(Error::NearCritical { lambda, z, gap: gap.abs() });
    }
    let dpsi = s * (s - 1.0) / gap;
    let d2psi = if lambda == 1.0 {
        s * (1.0 - 2.0 * s) / (1.0 - s)
    } else {
        dpsi * (3.0 * s - 1.0 + lambda * dpsi) / gap
    };
    Ok(PsiDerivatives { psi: s, dpsi, d2psi })
}

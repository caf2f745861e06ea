//! Primitive model types and Bayesian updating.
//!
//! The risky arm pays `1` in the good state (`θ = 1`) and `-α` in the bad
//! state. In the good state an explorer additionally draws a conclusive
//! high signal with probability `β`; a bad state never produces one. The
//! first period is weighted by `1 - δ` and the second by `δ`.

use std::fmt;

use crate::error::{Error, Result};

/// Relative tolerance used to resolve floating-point ties at thresholds.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Preference/technology parameters and the common prior.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub pi: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, beta: f64, delta: f64, pi: f64) -> Result<Self> {
        let params = ModelParams {
            alpha,
            beta,
            delta,
            pi,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: self.alpha,
                reason: "must be finite and > 0",
            });
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidParameter {
                name: "beta",
                value: self.beta,
                reason: "must lie strictly inside (0, 1)",
            });
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::InvalidParameter {
                name: "delta",
                value: self.delta,
                reason: "must lie in [0, 1]",
            });
        }
        if !(0.0..=1.0).contains(&self.pi) {
            return Err(Error::InvalidParameter {
                name: "pi",
                value: self.pi,
                reason: "must lie in [0, 1]",
            });
        }
        Ok(())
    }

    /// Non-fatal remarks about the parameter choice.
    pub fn validation_notes(&self) -> Vec<String> {
        let mut notes = Vec::new();
        if self.alpha >= 1.0 {
            notes.push(format!(
                "alpha = {} is outside (0, 1); accepted, all results remain well defined",
                self.alpha
            ));
        }
        notes
    }

    pub fn with_pi(self, pi: f64) -> Self {
        ModelParams { pi, ..self }
    }

    /// Expected one-shot payoff of the risky arm, `π - α(1 - π)`.
    pub fn risky_mean(&self) -> f64 {
        self.pi - self.alpha * (1.0 - self.pi)
    }

    /// Myopic indifference belief `α / (1 + α)`.
    pub fn myopic_cutoff(&self) -> f64 {
        self.alpha / (1.0 + self.alpha)
    }

    pub(crate) fn failure(&self) -> f64 {
        1.0 - self.beta
    }

    /// Largest observation count `r` with `π(1-β)^r ≥ α(1-π)`, i.e. the last
    /// `m` for which a no-success history still leaves the risky arm weakly
    /// attractive. `None` when even `m = 0` fails (`π/(1-π) < α`). Values
    /// within the tie tolerance of an integer snap to it.
    pub fn active_count(&self) -> Option<usize> {
        let pi = self.pi;
        if pi >= 1.0 {
            return Some(usize::MAX);
        }
        let odds = pi / (1.0 - pi);
        if odds < self.alpha * (1.0 - TIE_TOLERANCE) {
            return None;
        }
        // odds ≥ α  ⇔  ratio ≤ 1
        let ratio = (self.alpha / odds).min(1.0);
        let t = ratio.ln() / self.failure().ln();
        let nearest = t.round();
        let snapped = if (t - nearest).abs() <= TIE_TOLERANCE * nearest.max(1.0) {
            nearest
        } else {
            t.floor()
        };
        if snapped >= usize::MAX as f64 {
            Some(usize::MAX)
        } else {
            Some(snapped.max(0.0) as usize)
        }
    }
}

impl fmt::Display for ModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "alpha={} beta={} delta={} pi={}",
            self.alpha, self.beta, self.delta, self.pi
        )
    }
}

/// Who an agent observes in the second period.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Immediate neighbours only.
    Local,
    /// Everyone in the agent's connected component.
    Global,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Local => "local",
            Regime::Global => "global",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "local" => Ok(Regime::Local),
            "global" => Ok(Regime::Global),
            other => Err(format!("unknown regime `{other}` (expected local|global)")),
        }
    }
}

/// Population size, Erdős–Rényi connection probability and observation
/// regime.
///
/// A network can be built from either `p` or the mean degree `λ = n p`; the
/// value supplied is stored verbatim so it round-trips exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NetworkSpec {
    pub n: usize,
    p: f64,
    lambda: f64,
    pub regime: Regime,
}

impl NetworkSpec {
    pub fn new(n: usize, p: f64, regime: Regime) -> Result<Self> {
        check_population(n)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter {
                name: "p",
                value: p,
                reason: "must lie in [0, 1]",
            });
        }
        Ok(NetworkSpec {
            n,
            p,
            lambda: n as f64 * p,
            regime,
        })
    }

    pub fn with_mean_degree(n: usize, lambda: f64, regime: Regime) -> Result<Self> {
        check_population(n)?;
        if !(lambda >= 0.0 && lambda <= n as f64) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                value: lambda,
                reason: "must lie in [0, n]",
            });
        }
        Ok(NetworkSpec {
            n,
            p: lambda / n as f64,
            lambda,
            regime,
        })
    }

    pub fn local(n: usize, p: f64) -> Result<Self> {
        Self::new(n, p, Regime::Local)
    }

    pub fn global(n: usize, p: f64) -> Result<Self> {
        Self::new(n, p, Regime::Global)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

fn check_population(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: 0.0,
            reason: "population must be at least 1",
        });
    }
    Ok(())
}

/// Observed first-period outcomes: `m` explorers seen, `ell` of them with a
/// high signal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ObservationCount {
    m: usize,
    ell: usize,
}

impl ObservationCount {
    pub fn new(m: usize, ell: usize) -> Result<Self> {
        if ell > m {
            return Err(Error::InvalidParameter {
                name: "ell",
                value: ell as f64,
                reason: "high-signal count cannot exceed observed count",
            });
        }
        Ok(ObservationCount { m, ell })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn ell(&self) -> usize {
        self.ell
    }
}

/// Posterior `P(θ = 1 | L = ℓ, M = m)`.
pub fn posterior(params: &ModelParams, obs: ObservationCount) -> f64 {
    if obs.ell >= 1 {
        return 1.0;
    }
    let pi = params.pi;
    let weighted = pi * params.failure().powi(obs.m as i32);
    let denom = 1.0 - pi + weighted;
    if denom <= 0.0 {
        // π = 1 and (1-β)^m underflowed
        return 1.0;
    }
    weighted / denom
}

/// Second-period value `max{π̃ - α(1 - π̃), 0}` of a posterior belief.
pub fn second_period_value(posterior: f64, alpha: f64) -> f64 {
    (posterior - alpha * (1.0 - posterior)).max(0.0)
}

//! Two-period social bandit on Erdős–Rényi networks.
//!
//! Agents share a prior over a risky arm, choose whether to experiment in the
//! first period, and learn from the outcomes of the explorers they observe:
//! immediate neighbours in the [`Regime::Local`] regime, their whole
//! connected component in the [`Regime::Global`] regime.
//!
//! The crate computes equilibrium thresholds and regions, the symmetric mixed
//! equilibrium, social surplus and planner cutoffs, large-network limits, and
//! checks all of them against Monte Carlo simulation and exhaustive
//! enumeration.

pub mod asymptotics;
pub mod dist;
pub mod equilibrium;
pub mod error;
pub mod model;
pub mod netsim;
pub mod observation;
pub mod oracle;
pub mod payoff;
pub mod surplus;
pub mod verify;

pub use error::{Error, Result};
pub use model::{
    posterior, second_period_value, ModelParams, NetworkSpec, ObservationCount, Regime,
    TIE_TOLERANCE,
};

//! Random-graph simulation and exact finite-`n` component laws.

pub mod exact;
pub mod graph;
pub mod montecarlo;

pub use exact::{component_pmf_via_connectivity, connected_probability, exact_component_pmf};
pub use graph::{sample_graph, GraphSample, UnionFind};
pub use montecarlo::{
    component_size_distribution, estimate_expectation, estimate_failure_weights,
    replicate_rng, ComponentSizeDistribution, McEstimate, ObserverRole,
};

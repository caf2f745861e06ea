mod common;

use common::*;
use netbandit::netsim::{
    component_size_distribution, estimate_expectation, estimate_failure_weights, exact_component_pmf, sample_graph,
    ObserverRole,
};
use netbandit::observation::failure_weight;
use netbandit::{NetworkSpec, Regime};

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn estimates_do_not_depend_on_worker_count() {
    let net = NetworkSpec::with_mean_degree(40, 1.5, Regime::Global).unwrap();
    let run = || {
        (
            estimate_expectation(&net, 20, 0.3, ObserverRole::Explorer, 5000, 17).unwrap(),
            estimate_failure_weights(&net, 0.3, 3000, 18).unwrap(),
            component_size_distribution(200, 0.5, 3000, 19).unwrap(),
        )
    };
    let one = in_pool(1, run);
    let three = in_pool(3, run);
    assert_eq!(one.0.mean.to_bits(), three.0.mean.to_bits());
    assert_eq!(one.0.std_error.to_bits(), three.0.std_error.to_bits());
    for (a, b) in one.1.iter().zip(&three.1) {
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    }
    assert_eq!(one.2.counts, three.2.counts);
}

#[test]
fn graphs_reproduce_bit_for_bit() {
    for &p in &[0.03, 0.5] {
        let a = sample_graph(300, p, 99);
        let b = sample_graph(300, p, 99);
        assert_eq!(a.edges, b.edges);
        assert_eq!(a.component_labels, b.component_labels);
        assert_ne!(a.edges, sample_graph(300, p, 100).edges);
    }
}

#[test]
fn sparse_graph_mean_degree() {
    let n = 10_000;
    let mut total = 0.0;
    for seed in 0..20 {
        let g = sample_graph(n, 3.0 / (n - 1) as f64, seed);
        assert!(g.edges.len() <= n * (n - 1) / 2);
        total += g.mean_degree();
    }
    // 20 graphs of ~15000 edges: SE of the mean degree ≈ 0.0039
    assert!((total / 20.0 - 3.0).abs() < 0.02, "{}", total / 20.0);
}

#[test]
fn component_labels_partition_vertices() {
    let g = sample_graph(500, 0.004, 5);
    let mut sizes = std::collections::HashMap::new();
    for &label in &g.component_labels {
        *sizes.entry(label).or_insert(0usize) += 1;
    }
    assert_eq!(sizes.values().sum::<usize>(), 500);
    assert_eq!(sizes.len(), g.component_count());
    for (u, v) in &g.edges {
        assert_eq!(g.component_labels[*u], g.component_labels[*v]);
    }
}

#[test]
fn exact_component_law_matches_enumeration() {
    for n in 1..=6 {
        for &p in &[0.0, 0.2, 0.55, 1.0] {
            let pmf = exact_component_pmf(n, p).unwrap();
            // both sides are polynomials of degree n - 1 in z
            for &z in &[0.1f64, 0.3, 0.5, 0.7, 0.9, 1.0] {
                let exact: f64 = pmf.iter().enumerate().skip(1).map(|(s, q)| q * z.powi(s as i32 - 1)).sum();
                let reference = enumerated_failure_weight(n, p, n - 1, z, true);
                assert!((exact - reference).abs() <= 1e-13, "n={n} p={p} z={z}");
            }
            assert!((pmf.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn local_and_global_weights_within_four_standard_errors() {
    let mut seed = 1000;
    for &lambda in &[0.5, 3.0] {
        for &beta in &[0.05, 0.3] {
            let local = NetworkSpec::with_mean_degree(300, lambda, Regime::Local).unwrap();
            seed += 1;
            let est = estimate_expectation(&local, 150, beta, ObserverRole::Exploiter, 20_000, seed).unwrap();
            assert!(est.within((1.0 - local.p() * beta).powi(150), 4.0));
        }
        let global = NetworkSpec::with_mean_degree(20, lambda, Regime::Global).unwrap();
        seed += 1;
        let all = estimate_failure_weights(&global, 0.3, 20_000, seed).unwrap();
        for (k, est) in all.iter().enumerate() {
            assert!(est.within(failure_weight(0.3, &global, k).unwrap(), 4.0), "k={k}");
        }
    }
}

#[test]
fn component_weight_falls_with_connectivity() {
    let z: f64 = 0.9;
    let mut prev = f64::INFINITY;
    for &lambda in &[0.3, 0.8, 1.5, 3.0] {
        let d = component_size_distribution(400, lambda, 2000, 7).unwrap();
        let weight: f64 = (1..=400).map(|s| d.probability(s) * z.powi(s as i32)).sum();
        assert!(weight < prev);
        prev = weight;
    }
}

#[test]
fn borel_fit_improves_with_size() {
    let small = component_size_distribution(50, 0.5, 20_000, 3).unwrap();
    let large = component_size_distribution(2000, 0.5, 20_000, 4).unwrap();
    let tv = |d: &netbandit::netsim::ComponentSizeDistribution| {
        0.5 * (1..=20).map(|s| (d.probability(s) - borel_by_product(0.5, s)).abs()).sum::<f64>()
    };
    assert!(tv(&large) < tv(&small));
    assert!((tv(&large) - large.tv_distance_to_borel(0.5, 20)).abs() < 1e-12);
}

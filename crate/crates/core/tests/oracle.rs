mod common;

use common::*;
use netbandit::equilibrium::{classify, Region};
use netbandit::oracle::{exact_optimum, exact_payoffs, verify_nash, Action, StrategyProfile};
use netbandit::surplus::{planner_cutoffs, social_surplus};
use netbandit::{ModelParams, NetworkSpec, Regime};
use proptest::prelude::*;

fn params_strategy() -> impl Strategy<Value = ModelParams> {
    (0.2f64..2.0, 0.02f64..0.95, 0.0f64..0.99, 0.01f64..0.99)
        .prop_map(|(a, b, d, pi)| ModelParams::new(a, b, d, pi).unwrap())
}

fn profile_of(bits: &[bool]) -> StrategyProfile {
    StrategyProfile::new(
        bits.iter()
            .map(|&x| if x { Action::Explore } else { Action::Exploit })
            .collect(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn arbitrary_profiles_match_enumeration(
        params in params_strategy(),
        p in 0.0f64..=1.0,
        bits in prop::collection::vec(any::<bool>(), 1..=5),
        global in any::<bool>(),
    ) {
        let n = bits.len();
        let regime = if global { Regime::Global } else { Regime::Local };
        let net = NetworkSpec::new(n, p, regime).unwrap();
        let lib = exact_payoffs(&params, &net, &profile_of(&bits)).unwrap();
        let reference = enumerate_profile(&params, n, p, global, &bits);
        prop_assert!((lib.total_probability - 1.0).abs() <= 1e-13);
        for (a, b) in lib.payoffs.iter().zip(&reference.payoffs) {
            prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
        prop_assert!((lib.surplus - lib.payoffs.iter().sum::<f64>()).abs() <= 1e-12);
    }

    #[test]
    fn classified_profiles_are_nash_and_neighbours_are_not_strictly_better(
        params in params_strategy(),
        p in 0.0f64..=1.0,
        n in 1usize..=5,
    ) {
        let net = NetworkSpec::local(n, p).unwrap();
        let report = classify(&params, &net).unwrap();
        prop_assert!(verify_nash(&params, &net, &StrategyProfile::with_explorers(n, report.k)).unwrap());
        if params.pi > params.alpha / (1.0 + params.alpha) {
            prop_assert!(!matches!(report.region, Region::Asymmetric(_)));
        }
    }
}

#[test]
fn all_exploit_is_not_nash_at_high_beliefs() {
    let params = ModelParams::new(1.0, 0.3, 0.15, 0.7).unwrap();
    let net = NetworkSpec::local(4, 0.5).unwrap();
    assert!(!verify_nash(&params, &net, &StrategyProfile::with_explorers(4, 0)).unwrap());
    assert!(verify_nash(&params, &net, &StrategyProfile::with_explorers(4, 4)).unwrap());
}

#[test]
fn optimum_agrees_with_enumerated_argmax() {
    for &(pi, p) in &[(0.3, 0.4), (0.484, 1.0 / 3.0), (0.49, 0.6), (0.8, 0.2)] {
        let params = ModelParams::new(1.0, 0.3, 0.15, pi).unwrap();
        for n in 1..=5 {
            let net = NetworkSpec::local(n, p).unwrap();
            let opt = exact_optimum(&params, &net).unwrap();
            let values: Vec<f64> = (0..=n)
                .map(|k| enumerate_profile(&params, n, p, false, &symmetric_profile(n, k)).surplus())
                .collect();
            let mut best = 0;
            for k in 1..=n {
                if values[k] > values[best] + 1e-13 {
                    best = k;
                }
            }
            assert_eq!(opt.k, best, "pi={pi} n={n}");
        }
    }
}

#[test]
fn planner_optimum_is_extreme_outside_cutoffs() {
    let sets = [(1.0, 0.3, 0.15), (0.5, 0.1, 0.4), (1.5, 0.6, 0.7)];
    for &(alpha, beta, delta) in &sets {
        for n in 2..=8 {
            for &p in &[0.1, 0.5, 0.9] {
                let base = ModelParams::new(alpha, beta, delta, 0.5).unwrap();
                let net = NetworkSpec::local(n, p).unwrap();
                let (lo, hi) = planner_cutoffs(&base, &net).unwrap();
                for i in 0..100 {
                    let pi = (i as f64 + 0.5) / 100.0;
                    if (pi - lo).abs() < 1e-9 || (pi - hi).abs() < 1e-9 || (pi > lo && pi < hi) {
                        continue;
                    }
                    let params = base.with_pi(pi);
                    let u: Vec<f64> = (0..=n).map(|k| social_surplus(&params, &net, k).unwrap().value).collect();
                    let argmax = (0..=n).fold(0, |best, k| if u[k] > u[best] + 1e-13 { k } else { best });
                    let expected = if pi <= lo { 0 } else { n };
                    assert_eq!(argmax, expected, "alpha={alpha} n={n} p={p} pi={pi}");
                }
            }
        }
    }
}

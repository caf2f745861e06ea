//! Brute-force references shared by the integration tests.
//!
//! Nothing here calls into the library's closed forms: payoffs come from
//! enumerating states, graphs and raw signals and applying Bayes' rule.

#![allow(dead_code)]

use netbandit::ModelParams;

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Default)]
pub struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Per-agent expected payoffs of a pure profile and the total branch mass.
pub struct Enumerated {
    pub payoffs: Vec<f64>,
    pub mass: f64,
}

impl Enumerated {
    pub fn surplus(&self) -> f64 {
        self.payoffs.iter().sum()
    }
}

fn observed_sets(n: usize, adj: &[u32], global: bool) -> Vec<u32> {
    (0..n)
        .map(|i| {
            let mut seen = (1u32 << i) | if global { 0 } else { adj[i] };
            if global {
                let mut frontier = 1u32 << i;
                while frontier != 0 {
                    let v = frontier.trailing_zeros() as usize;
                    frontier &= frontier - 1;
                    let fresh = adj[v] & !seen;
                    seen |= fresh;
                    frontier |= fresh;
                }
            }
            seen
        })
        .collect()
}

/// Agent `i` explores iff `explore[i]`. Local: an agent sees its neighbours'
/// outcomes. Global: it sees everyone in its component.
pub fn enumerate_profile(params: &ModelParams, n: usize, p: f64, global: bool, explore: &[bool]) -> Enumerated {
    assert_eq!(explore.len(), n);
    let (alpha, beta, delta, pi) = (params.alpha, params.beta, params.delta, params.pi);
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let explorers: u32 = (0..n).filter(|&i| explore[i]).map(|i| 1u32 << i).sum();
    let mut payoffs = vec![Compensated::default(); n];
    let mut mass = Compensated::default();
    for edges in 0u32..(1 << pairs.len()) {
        let mut graph_prob = 1.0;
        let mut adj = vec![0u32; n];
        for (e, &(i, j)) in pairs.iter().enumerate() {
            if edges >> e & 1 == 1 {
                graph_prob *= p;
                adj[i] |= 1 << j;
                adj[j] |= 1 << i;
            } else {
                graph_prob *= 1.0 - p;
            }
        }
        if graph_prob == 0.0 {
            continue;
        }
        let seen = observed_sets(n, &adj, global);
        for theta in [1u8, 0u8] {
            let prior = if theta == 1 { pi } else { 1.0 - pi };
            let risky_payoff = if theta == 1 { 1.0 } else { -alpha };
            // every subset of explorers may be the set of successes
            let mut successes = explorers;
            loop {
                let hits = successes.count_ones() as i32;
                let misses = (explorers.count_ones() - successes.count_ones()) as i32;
                let signal_prob = if theta == 1 {
                    beta.powi(hits) * (1.0 - beta).powi(misses)
                } else if successes == 0 {
                    1.0
                } else {
                    0.0
                };
                let w = prior * graph_prob * signal_prob;
                if w > 0.0 {
                    mass.add(w);
                    for i in 0..n {
                        let first = if explore[i] { risky_payoff } else { 0.0 };
                        let watched = seen[i] & explorers;
                        let second = if watched & successes != 0 {
                            risky_payoff
                        } else {
                            let failures = watched.count_ones() as i32;
                            let like1 = pi * (1.0 - beta).powi(failures);
                            let post = like1 / (like1 + 1.0 - pi);
                            if post - alpha * (1.0 - post) > 0.0 {
                                risky_payoff
                            } else {
                                0.0
                            }
                        };
                        payoffs[i].add(w * ((1.0 - delta) * first + delta * second));
                    }
                }
                if successes == 0 {
                    break;
                }
                successes = (successes - 1) & explorers;
            }
        }
    }
    Enumerated {
        payoffs: payoffs.iter().map(Compensated::value).collect(),
        mass: mass.value(),
    }
}

/// The first `k` agents explore.
pub fn symmetric_profile(n: usize, k: usize) -> Vec<bool> {
    (0..n).map(|i| i < k).collect()
}

/// `E_k[z^M]` for agent `0` with explorers `1..=k`, by enumerating graphs.
pub fn enumerated_failure_weight(n: usize, p: f64, k: usize, z: f64, global: bool) -> f64 {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let explorers: u32 = (1..=k).map(|i| 1u32 << i).sum();
    let mut acc = Compensated::default();
    for edges in 0u32..(1 << pairs.len()) {
        let mut prob = 1.0;
        let mut adj = vec![0u32; n];
        for (e, &(i, j)) in pairs.iter().enumerate() {
            if edges >> e & 1 == 1 {
                prob *= p;
                adj[i] |= 1 << j;
                adj[j] |= 1 << i;
            } else {
                prob *= 1.0 - p;
            }
        }
        let m = (observed_sets(n, &adj, global)[0] & explorers).count_ones() as i32;
        acc.add(prob * z.powi(m));
    }
    acc.value()
}

/// `C(t, m) p^m (1-p)^{t-m}` term by term; `t ≤ 1000`.
pub fn binomial(trials: usize, p: f64) -> Vec<f64> {
    assert!(trials <= 1000);
    let mut choose = 1.0f64;
    (0..=trials)
        .map(|m| {
            if m > 0 {
                choose = choose * (trials - m + 1) as f64 / m as f64;
            }
            choose * p.powi(m as i32) * (1.0 - p).powi((trials - m) as i32)
        })
        .collect()
}

/// `A_k` and `B_k` of the banded marginal value, term by term.
pub fn band_terms(params: &ModelParams, n: usize, p: f64, k: usize, r: usize) -> (f64, f64) {
    let (d, z) = (params.delta, 1.0 - params.beta);
    let q = |a: isize| -> Vec<f64> {
        if a < 0 {
            vec![1.0]
        } else {
            binomial(a as usize, p)
        }
    };
    let cdf = |law: &[f64], upto: isize| -> f64 { (0..=upto.max(-1)).filter_map(|m| law.get(m as usize)).sum() };
    let zsum = |law: &[f64], from: usize, to: isize| -> f64 {
        (from as isize..=to).map(|m| law.get(m as usize).copied().unwrap_or(0.0) * z.powi(m as i32)).sum()
    };
    let (ki, ri) = (k as isize, r as isize);
    let (qm, q0, qp) = (q(ki - 1), q(ki), q(ki + 1));
    let kf = k as f64;
    let nf = n as f64;
    let a = (1.0 - d) + d * (kf + 1.0) * cdf(&q0, ri - 1) + d * (nf - kf - 1.0) * cdf(&qp, ri)
        - d * kf * cdf(&qm, ri - 1)
        - d * (nf - kf) * cdf(&q0, ri);
    let b = (1.0 - d) - d * (kf + 1.0) * z * zsum(&q0, r, ki) - d * (nf - kf - 1.0) * zsum(&qp, r + 1, ki + 1)
        + d * kf * z * zsum(&qm, r, ki - 1)
        + d * (nf - kf) * zsum(&q0, r + 1, ki);
    (a, b)
}

/// `du_k/dπ` on the local regime, from the payoff definitions. The belief
/// enters only through `odds = π/(1-π)`, which decides each posterior action.
pub fn surplus_slope(params: &ModelParams, n: usize, laws: &[Vec<f64>], k: usize, odds: f64) -> f64 {
    let (a, d, z) = (params.alpha, params.delta, 1.0 - params.beta);
    let term = |j: i32| -> f64 {
        let zj = z.powi(j);
        (1.0 - zj) + if odds * zj > a { zj + a } else { 0.0 }
    };
    let mut slope = 0.0;
    if k > 0 {
        let dv: f64 = laws[k - 1].iter().enumerate().map(|(m, q)| q * term(m as i32 + 1)).sum();
        slope += k as f64 * ((1.0 - d) * (1.0 + a) + d * dv);
    }
    if k < n {
        let dw: f64 = laws[k].iter().enumerate().map(|(m, q)| q * term(m as i32)).sum();
        slope += (n - k) as f64 * d * dw;
    }
    slope
}

/// Smallest root of `s = z e^{λ(s-1)}` on `[0, 1]`.
pub fn psi_by_bisection(lambda: f64, z: f64) -> f64 {
    let g = |s: f64| z * (lambda * (s - 1.0)).exp() - s;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if z == 1.0 {
        if lambda <= 1.0 {
            return 1.0;
        }
        hi = 1.0 - 1e-6;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn borel_by_product(lambda: f64, s: usize) -> f64 {
    let sf = s as f64;
    let mut v = (-lambda * sf).exp();
    for i in 2..=s {
        v *= lambda * sf / i as f64;
    }
    v
}

/// `α(1-δ) / ((1+α)(1-δ) + δβE)`.
pub fn threshold(params: &ModelParams, weight: f64) -> f64 {
    let (a, b, d) = (params.alpha, params.beta, params.delta);
    a * (1.0 - d) / ((1.0 + a) * (1.0 - d) + d * b * weight)
}

pub fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

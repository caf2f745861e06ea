//! Seeded Monte Carlo estimators.
//!
//! Replicate `r` draws from the ChaCha8 stream `r` of the master seed, and
//! replicates are grouped in fixed chunks whose moments are merged in chunk
//! order. Results therefore do not depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::graph::{for_each_edge, UnionFind, SKIP_THRESHOLD};
use crate::asymptotics::borel_pmf;
use crate::error::{Error, Result};
use crate::model::{NetworkSpec, Regime};

/// Replicates per work unit.
pub const CHUNK: usize = 1024;

/// Monte Carlo mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub reps: usize,
    pub seed: u64,
}

impl McEstimate {
    /// Distance to `target` in standard errors; zero-SE estimates compare
    /// exactly up to rounding.
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = (self.mean - target).abs();
        if self.std_error > 0.0 {
            diff / self.std_error
        } else if diff <= 1e-12 * target.abs().max(1.0) {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn within(&self, target: f64, sigmas: f64) -> bool {
        self.z_score(target) <= sigmas
    }
}

/// The RNG for replicate `replicate` under master seed `master`.
pub fn replicate_rng(master: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(replicate);
    rng
}

#[derive(Clone, Copy, Debug, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let d = x - self.mean;
        self.mean += d / self.count;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if other.count == 0.0 {
            return self;
        }
        if self.count == 0.0 {
            return other;
        }
        let count = self.count + other.count;
        let d = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + d * other.count / count,
            m2: self.m2 + other.m2 + d * d * self.count * other.count / count,
        }
    }

    fn estimate(&self, seed: u64) -> McEstimate {
        let reps = self.count as usize;
        let var = if reps > 1 { self.m2 / (self.count - 1.0) } else { 0.0 };
        McEstimate {
            mean: self.mean,
            std_error: (var.max(0.0) / self.count).sqrt(),
            reps,
            seed,
        }
    }
}

/// Whether the evaluating agent is herself one of the `k` explorers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObserverRole {
    /// `k` peers explore; estimates `E_k`.
    Exploiter,
    /// The agent and `k - 1` peers explore; estimates `E_{k-1}`.
    Explorer,
}

fn check_reps(reps: usize) -> Result<()> {
    if reps < 2 {
        return Err(Error::TooFewReplicates { reps, min: 2 });
    }
    Ok(())
}

fn chunk_ranges(reps: usize) -> Vec<(usize, usize)> {
    (0..reps.div_ceil(CHUNK))
        .map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(reps)))
        .collect()
}

/// Number of successes in `j` Bernoulli(`p`) trials.
fn bernoulli_count<R: Rng>(rng: &mut R, j: usize, p: f64) -> usize {
    if p <= 0.0 || j == 0 {
        return 0;
    }
    if p >= 1.0 {
        return j;
    }
    if p < SKIP_THRESHOLD {
        let log_q = (-p).ln_1p();
        let mut pos = 0f64;
        let mut count = 0;
        loop {
            let r: f64 = rng.random();
            pos += ((1.0 - r).ln() / log_q).floor();
            if pos >= j as f64 {
                return count;
            }
            count += 1;
            pos += 1.0;
        }
    }
    (0..j).filter(|_| rng.random::<f64>() < p).count()
}

/// Marks which of vertices `1..n` vertex `0` observes in one graph draw.
fn observed_flags<R: Rng>(rng: &mut R, net: &NetworkSpec, uf: &mut UnionFind, flags: &mut [bool]) {
    let n = net.n;
    flags.fill(false);
    match net.regime {
        Regime::Local => {
            for f in flags.iter_mut().skip(1) {
                *f = rng.random::<f64>() < net.p();
            }
        }
        Regime::Global => {
            uf.reset();
            for_each_edge(rng, n, net.p(), |u, v| uf.union(u, v));
            let root = uf.find(0);
            for (v, f) in flags.iter_mut().enumerate().skip(1) {
                *f = uf.find(v) == root;
            }
        }
    }
}

/// Estimates `E[(1-β)^M]` where `M` counts the explorers the evaluating agent
/// observes.
///
/// The graph is exchangeable, so the agent is vertex `0` and the exploring
/// peers are vertices `1..=j`. In the local regime only the agent's incident
/// edges are drawn.
pub fn estimate_expectation(
    net: &NetworkSpec,
    k: usize,
    beta: f64,
    role: ObserverRole,
    reps: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_reps(reps)?;
    let n = net.n;
    let peers = match role {
        ObserverRole::Exploiter if k < n => k,
        ObserverRole::Explorer if (1..=n).contains(&k) => k - 1,
        ObserverRole::Exploiter => {
            return Err(Error::CountOutOfRange { k, min: 0, max: n - 1 })
        }
        ObserverRole::Explorer => return Err(Error::CountOutOfRange { k, min: 1, max: n }),
    };
    let z = 1.0 - beta;
    let parts: Vec<Moments> = chunk_ranges(reps)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut acc = Moments::default();
            let mut uf = UnionFind::new(if net.regime == Regime::Global { n } else { 0 });
            for r in lo..hi {
                let mut rng = replicate_rng(seed, r as u64);
                let m = match net.regime {
                    Regime::Local => bernoulli_count(&mut rng, peers, net.p()),
                    Regime::Global => {
                        uf.reset();
                        for_each_edge(&mut rng, n, net.p(), |u, v| uf.union(u, v));
                        let root = uf.find(0);
                        (1..=peers).filter(|&v| uf.find(v) == root).count()
                    }
                };
                acc.push(z.powi(m as i32));
            }
            acc
        })
        .collect();
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    Ok(total.estimate(seed))
}

/// Estimates `E_k[(1-β)^M]` for every `k` in `0..n` from shared graph draws:
/// in each replicate, `M_k` counts observed vertices among `1..=k`.
pub fn estimate_failure_weights(
    net: &NetworkSpec,
    beta: f64,
    reps: usize,
    seed: u64,
) -> Result<Vec<McEstimate>> {
    check_reps(reps)?;
    let n = net.n;
    let z = 1.0 - beta;
    let parts: Vec<Vec<Moments>> = chunk_ranges(reps)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut acc = vec![Moments::default(); n];
            let mut uf = UnionFind::new(n);
            let mut flags = vec![false; n];
            for r in lo..hi {
                let mut rng = replicate_rng(seed, r as u64);
                observed_flags(&mut rng, net, &mut uf, &mut flags);
                let mut seen = 0;
                for (k, slot) in acc.iter_mut().enumerate() {
                    if k > 0 && flags[k] {
                        seen += 1;
                    }
                    slot.push(z.powi(seen));
                }
            }
            acc
        })
        .collect();
    let mut total = vec![Moments::default(); n];
    for part in parts {
        for (t, m) in total.iter_mut().zip(part) {
            *t = t.merge(m);
        }
    }
    Ok(total.iter().map(|m| m.estimate(seed)).collect())
}

/// Empirical law of the component size of a uniformly chosen vertex.
///
/// Every vertex of every replicate contributes, so `counts[s]` is the number
/// of (replicate, vertex) pairs whose component has size `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentSizeDistribution {
    pub n: usize,
    pub lambda: f64,
    pub reps: usize,
    pub seed: u64,
    pub counts: Vec<u64>,
}

impl ComponentSizeDistribution {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn probability(&self, size: usize) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        self.counts.get(size).copied().unwrap_or(0) as f64 / total as f64
    }

    /// `½ Σ_{s=1}^{atoms} |P̂(s) - Borel_λ(s)|`.
    pub fn tv_distance_to_borel(&self, lambda: f64, atoms: usize) -> f64 {
        0.5 * (1..=atoms)
            .map(|s| (self.probability(s) - borel_pmf(lambda, s).unwrap_or(0.0)).abs())
            .sum::<f64>()
    }

    /// `size,count,probability` rows for every observed size.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("size,count,probability\n");
        for (s, &c) in self.counts.iter().enumerate() {
            if c > 0 {
                out.push_str(&format!("{},{},{:.9e}\n", s, c, self.probability(s)));
            }
        }
        out
    }
}

pub fn component_size_distribution(
    n: usize,
    lambda: f64,
    reps: usize,
    seed: u64,
) -> Result<ComponentSizeDistribution> {
    if reps == 0 {
        return Err(Error::TooFewReplicates { reps, min: 1 });
    }
    let p = NetworkSpec::with_mean_degree(n, lambda, Regime::Global)?.p();
    let parts: Vec<Vec<u64>> = chunk_ranges(reps)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut counts = vec![0u64; n + 1];
            let mut uf = UnionFind::new(n);
            for r in lo..hi {
                let mut rng = replicate_rng(seed, r as u64);
                uf.reset();
                for_each_edge(&mut rng, n, p, |u, v| uf.union(u, v));
                for v in 0..n {
                    if uf.find(v) == v {
                        let s = uf.set_size(v);
                        counts[s] += s as u64;
                    }
                }
            }
            counts
        })
        .collect();
    let mut counts = vec![0u64; n + 1];
    for part in parts {
        for (c, x) in counts.iter_mut().zip(part) {
            *c += x;
        }
    }
    Ok(ComponentSizeDistribution {
        n,
        lambda,
        reps,
        seed,
        counts,
    })
}

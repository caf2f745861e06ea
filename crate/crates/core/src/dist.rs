//! Discrete probability mass functions used throughout the crate.

use statrs::function::gamma::ln_gamma;

/// `ln C(a, b)`.
pub fn ln_choose(a: usize, b: usize) -> f64 {
    debug_assert!(b <= a);
    ln_gamma(a as f64 + 1.0) - ln_gamma(b as f64 + 1.0) - ln_gamma((a - b) as f64 + 1.0)
}

/// Exact `C(a, b)` as a float, by multiplicative recurrence.
pub fn choose(a: usize, b: usize) -> f64 {
    if b > a {
        return 0.0;
    }
    let b = b.min(a - b);
    let mut c = 1.0f64;
    for i in 0..b {
        c = c * (a - i) as f64 / (i + 1) as f64;
    }
    c
}

/// `Bin(a, p)` masses for `0..=a`.
pub fn binomial_pmf(a: usize, p: f64) -> Vec<f64> {
    if p <= 0.0 {
        let mut v = vec![0.0; a + 1];
        v[0] = 1.0;
        return v;
    }
    if p >= 1.0 {
        let mut v = vec![0.0; a + 1];
        v[a] = 1.0;
        return v;
    }
    let q = 1.0 - p;
    if a <= 1000 && q.powi(a as i32) > 1e-250 && p.powi(a as i32) > 0.0 {
        // upward recurrence from q^a
        let mut v = Vec::with_capacity(a + 1);
        let mut cur = q.powi(a as i32);
        let odds = p / q;
        v.push(cur);
        for m in 0..a {
            cur *= (a - m) as f64 / (m + 1) as f64 * odds;
            v.push(cur);
        }
        v
    } else {
        let (lp, lq) = (p.ln(), (-p).ln_1p());
        (0..=a)
            .map(|m| (ln_choose(a, m) + m as f64 * lp + (a - m) as f64 * lq).exp())
            .collect()
    }
}

/// Single `Bin(a, p)` mass; zero outside `0..=a`.
pub fn binomial_mass(a: usize, b: isize, p: f64) -> f64 {
    if b < 0 || b as usize > a {
        return 0.0;
    }
    let b = b as usize;
    if p <= 0.0 {
        return if b == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if b == a { 1.0 } else { 0.0 };
    }
    (ln_choose(a, b) + b as f64 * p.ln() + (a - b) as f64 * (-p).ln_1p()).exp()
}

/// `Poisson(λ)` masses truncated at the smallest `m` whose upper tail is
/// below `tail`; returns the masses `0..=m`.
pub fn poisson_pmf_truncated(lambda: f64, tail: f64) -> Vec<f64> {
    if lambda <= 0.0 {
        return vec![1.0];
    }
    let cap = (lambda + 40.0 * lambda.sqrt() + 40.0).ceil() as usize;
    let mut out = Vec::with_capacity(cap + 1);
    let mut acc = 0.0;
    for m in 0..=cap {
        let lnp = -lambda + m as f64 * lambda.ln() - ln_gamma(m as f64 + 1.0);
        let mass = lnp.exp();
        out.push(mass);
        acc += mass;
        if m as f64 > lambda && 1.0 - acc < tail {
            break;
        }
    }
    out
}

/// Hypergeometric masses: drawing `draws` items without replacement from a
/// population of `population` containing `successes` marked items.
/// Returns masses for `0..=min(draws, successes)`.
pub fn hypergeometric_pmf(population: usize, successes: usize, draws: usize) -> Vec<f64> {
    debug_assert!(successes <= population && draws <= population);
    let top = draws.min(successes);
    let ln_total = ln_choose(population, draws);
    (0..=top)
        .map(|j| {
            if draws - j > population - successes {
                0.0
            } else {
                (ln_choose(successes, j) + ln_choose(population - successes, draws - j) - ln_total)
                    .exp()
            }
        })
        .collect()
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

//! Exact finite-`n` law of the size of a given vertex's component in
//! `G(n, p)`.

use crate::dist::{binomial_pmf, choose};
use crate::error::{Error, Result};

/// Largest `n` accepted by the exact component-size routines.
pub const EXACT_COMPONENT_LIMIT: usize = 30;

fn check_size(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: 0.0,
            reason: "population must be at least 1",
        });
    }
    if n > EXACT_COMPONENT_LIMIT {
        return Err(Error::TooLarge {
            what: "exact component-size law",
            n,
            limit: EXACT_COMPONENT_LIMIT,
        });
    }
    Ok(())
}

/// `P(|C| = s)` for `s = 0..=n` (index 0 is always zero).
///
/// Runs the breadth-first exploration chain: with `d` vertices discovered and
/// `a` of them still unprocessed, processing one reveals `Bin(n - d, p)` new
/// vertices. Every term is nonnegative, so there is no cancellation.
pub fn exact_component_pmf(n: usize, p: f64) -> Result<Vec<f64>> {
    check_size(n)?;
    let reveal: Vec<Vec<f64>> = (0..=n).map(|free| binomial_pmf(free, p)).collect();
    let mut out = vec![0.0; n + 1];
    // cur[d] = P(d discovered, d - t active) after t vertices processed
    let mut cur = vec![0.0; n + 1];
    cur[1] = 1.0;
    for t in 0..n {
        let mut next = vec![0.0; n + 1];
        for d in (t + 1)..=n {
            let mass = cur[d];
            if mass == 0.0 {
                continue;
            }
            for (x, &q) in reveal[n - d].iter().enumerate() {
                let d2 = d + x;
                if d2 == t + 1 {
                    out[d2] += mass * q;
                } else {
                    next[d2] += mass * q;
                }
            }
        }
        cur = next;
    }
    Ok(out)
}

/// Probability that `G(k, p)` is connected, by the classical recursion on the
/// component of a fixed vertex.
pub fn connected_probability(k: usize, p: f64) -> f64 {
    connected_table(k, p)[k]
}

fn connected_table(k: usize, p: f64) -> Vec<f64> {
    let q = 1.0 - p;
    let mut conn = vec![0.0; k + 1];
    if k >= 1 {
        conn[1] = 1.0;
    }
    for m in 2..=k {
        let mut disconnected = 0.0;
        for j in 1..m {
            disconnected += choose(m - 1, j - 1) * conn[j] * q.powi((j * (m - j)) as i32);
        }
        conn[m] = 1.0 - disconnected;
    }
    conn
}

/// Component-size law assembled from connectivity probabilities,
/// `C(n-1, s-1) P_conn(s) (1-p)^{s(n-s)}`. Equal in exact arithmetic to
/// [`exact_component_pmf`] but prone to cancellation for small `p`.
pub fn component_pmf_via_connectivity(n: usize, p: f64) -> Result<Vec<f64>> {
    check_size(n)?;
    let conn = connected_table(n, p);
    let q = 1.0 - p;
    let mut out = vec![0.0; n + 1];
    for s in 1..=n {
        out[s] = choose(n - 1, s - 1) * conn[s] * q.powi((s * (n - s)) as i32);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_vertices() {
        let pmf = exact_component_pmf(2, 0.3).unwrap();
        assert_abs_diff_eq!(pmf[1], 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(pmf[2], 0.3, epsilon = 1e-15);
    }

    #[test]
    fn three_vertices_half() {
        let pmf = exact_component_pmf(3, 0.5).unwrap();
        assert_abs_diff_eq!(pmf[1], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(pmf[2], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(pmf[3], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(connected_probability(3, 0.5), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn normalizes_and_agrees_with_connectivity_route() {
        for n in 1..=30 {
            for &p in &[0.0, 0.02, 0.1, 0.35, 0.8, 1.0] {
                let pmf = exact_component_pmf(n, p).unwrap();
                assert_abs_diff_eq!(pmf.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
                if n <= 16 {
                    let alt = component_pmf_via_connectivity(n, p).unwrap();
                    for s in 1..=n {
                        assert_abs_diff_eq!(pmf[s], alt[s], epsilon = 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn degenerate_links() {
        let iso = exact_component_pmf(7, 0.0).unwrap();
        assert_eq!(iso[1], 1.0);
        let full = exact_component_pmf(7, 1.0).unwrap();
        assert_eq!(full[7], 1.0);
    }

    #[test]
    fn size_limit() {
        assert!(matches!(
            exact_component_pmf(31, 0.1),
            Err(Error::TooLarge { .. })
        ));
    }
}

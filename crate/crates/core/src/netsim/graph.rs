//! Erdős–Rényi sampling and connected components.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Below this edge probability pairs are visited by geometric skipping.
pub const SKIP_THRESHOLD: f64 = 0.1;

/// Disjoint-set forest with path compression and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn reset(&mut self) {
        for (i, p) in self.parent.iter_mut().enumerate() {
            *p = i as u32;
        }
        self.size.fill(1);
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] as usize != root {
            root = self.parent[root] as usize;
        }
        let mut cur = x;
        while self.parent[cur] as usize != root {
            let next = self.parent[cur] as usize;
            self.parent[cur] = root as u32;
            cur = next;
        }
        root
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
    }

    /// Size of the set containing `x`.
    pub fn set_size(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r] as usize
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }
}

/// Calls `emit(u, v)` with `v < u` for every pair present in one draw of
/// `G(n, p)`.
///
/// Pairs are visited in the order `(1,0), (2,0), (2,1), (3,0), …`. For
/// `p < SKIP_THRESHOLD` gaps between present pairs are drawn as geometric
/// variables; otherwise each pair consumes one uniform.
pub fn for_each_edge<R: Rng + ?Sized>(rng: &mut R, n: usize, p: f64, mut emit: impl FnMut(usize, usize)) {
    if n < 2 || p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        for u in 1..n {
            for v in 0..u {
                emit(u, v);
            }
        }
        return;
    }
    if p < SKIP_THRESHOLD {
        let log_q = (-p).ln_1p();
        let (mut u, mut v) = (1usize, 0usize);
        let mut first = true;
        loop {
            let r: f64 = rng.random();
            let skip = ((1.0 - r).ln() / log_q).floor();
            let step = if first { skip } else { skip + 1.0 };
            first = false;
            if !(step < 1e18) {
                return;
            }
            let mut w = v as u64 + step as u64;
            let mut row = u as u64;
            while w >= row {
                w -= row;
                row += 1;
                if row >= n as u64 {
                    return;
                }
            }
            u = row as usize;
            v = w as usize;
            emit(u, v);
        }
    } else {
        for u in 1..n {
            for v in 0..u {
                if rng.random::<f64>() < p {
                    emit(u, v);
                }
            }
        }
    }
}

/// One realized graph.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphSample {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    /// Component id per vertex: the smallest vertex index in its component.
    pub component_labels: Vec<usize>,
    pub seed: u64,
}

impl GraphSample {
    pub fn component_count(&self) -> usize {
        self.component_labels
            .iter()
            .enumerate()
            .filter(|&(i, &l)| i == l)
            .count()
    }

    pub fn component_size(&self, v: usize) -> usize {
        let l = self.component_labels[v];
        self.component_labels.iter().filter(|&&x| x == l).count()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    pub fn mean_degree(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        2.0 * self.edges.len() as f64 / self.n as f64
    }
}

/// Draws `G(n, p)` from a ChaCha8 stream seeded with `seed`.
pub fn sample_graph(n: usize, p: f64, seed: u64) -> GraphSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    let mut uf = UnionFind::new(n);
    for_each_edge(&mut rng, n, p, |u, v| {
        edges.push((u, v));
        uf.union(u, v);
    });
    let mut smallest = vec![usize::MAX; n];
    for v in 0..n {
        let r = uf.find(v);
        if smallest[r] == usize::MAX {
            smallest[r] = v;
        }
    }
    let component_labels = (0..n).map(|v| smallest[uf.find(v)]).collect();
    GraphSample {
        n,
        edges,
        component_labels,
        seed,
    }
}

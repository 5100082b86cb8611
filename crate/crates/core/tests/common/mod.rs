#![allow(dead_code)]

use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use sgml::graph::{Color, Coloring, SignedGraph};
use sgml::MetricMatrix;

pub struct TestRng(Xoshiro256PlusPlus);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// Uniform integer in `lo..=hi`.
    pub fn int(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.0.next_u64() % (hi - lo + 1) as u64) as usize
    }

    pub fn coin(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.0)
    }
}

/// Random spanning tree plus extra edges with probability `density`.
pub fn connected_edges(rng: &mut TestRng, k: usize, density: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for j in 1..k {
        edges.push((rng.int(0, j - 1), j));
    }
    for i in 0..k {
        for j in (i + 1)..k {
            if !edges.contains(&(i, j)) && !edges.contains(&(j, i)) && rng.coin(density) {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// Random coloring and a connected graph whose edge signs agree with it:
/// positive within a color, negative across.
pub fn balanced_graph(rng: &mut TestRng, k: usize) -> (SignedGraph, Coloring) {
    let coloring = Coloring(
        (0..k)
            .map(|_| if rng.coin(0.5) { Color::Blue } else { Color::Red })
            .collect(),
    );
    let density = rng.uniform(0.05, 0.6);
    let edges: Vec<(usize, usize, f64)> = connected_edges(rng, k, density)
        .into_iter()
        .map(|(i, j)| {
            let w = rng.uniform(0.1, 2.0);
            (i, j, if coloring.same(i, j) { w } else { -w })
        })
        .collect();
    let loops = (0..k).map(|_| rng.uniform(-1.0, 1.0)).collect();
    (SignedGraph::new(k, edges, loops).unwrap(), coloring)
}

pub fn random_psd(rng: &mut TestRng, k: usize) -> MetricMatrix {
    let a: Vec<Vec<f64>> = (0..k).map(|_| (0..k).map(|_| rng.normal()).collect()).collect();
    let mut m = MetricMatrix::zeros(k);
    for i in 0..k {
        for j in i..k {
            let v: f64 = (0..k).map(|t| a[i][t] * a[j][t]).sum::<f64>() / k as f64;
            m.set(i, j, v + if i == j { 0.1 } else { 0.0 });
        }
    }
    m
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))?;
        if a[p][c].abs() < 1e-10 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in (c + 1)..n {
            let f = a[r][c] / a[c][c];
            for t in c..n {
                a[r][t] -= f * a[c][t];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = ((r + 1)..n).map(|t| a[r][t] * x[t]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Every `k`-subset of `0..n`.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// True when some simple cycle carries an odd number of negative edges.
pub fn has_odd_negative_cycle(k: usize, edges: &[(usize, usize, f64)]) -> bool {
    let mut adj = vec![Vec::new(); k];
    for &(i, j, w) in edges {
        adj[i].push((j, w < 0.0));
        adj[j].push((i, w < 0.0));
    }
    // cycles are enumerated from their smallest node
    fn dfs(
        adj: &[Vec<(usize, bool)>],
        start: usize,
        node: usize,
        depth: usize,
        negatives: usize,
        visited: &mut Vec<bool>,
    ) -> bool {
        for &(next, neg) in &adj[node] {
            let n = negatives + usize::from(neg);
            if next == start && depth >= 2 && n % 2 == 1 {
                return true;
            }
            if next > start && !visited[next] {
                visited[next] = true;
                if dfs(adj, start, next, depth + 1, n, visited) {
                    return true;
                }
                visited[next] = false;
            }
        }
        false
    }
    (0..k).any(|s| {
        let mut visited = vec![false; k];
        visited[s] = true;
        dfs(&adj, s, s, 0, 0, &mut visited)
    })
}

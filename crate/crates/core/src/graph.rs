//! Signed graphs, generalized Laplacians and balance.
//!
//! A generalized Laplacian is `L = D - W + diag(W)`: off-diagonal entries are
//! negated edge weights and each diagonal entry is the self-loop weight plus the
//! sum of the node's inter-node edge weights. A positive edge (correlation)
//! therefore shows up as a negative off-diagonal, a negative edge
//! (anti-correlation) as a positive one.
//!
//! A signed graph is balanced when no cycle carries an odd number of negative
//! edges. Equivalently the nodes split into blue and red so that positive edges
//! stay inside a color and negative edges cross between colors.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::MetricMatrix;

/// Undirected signed graph with self-loops.
///
/// Edges are kept sorted by `(i, j)` with `i < j`; zero weights are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedGraph {
    node_count: usize,
    edges: Vec<(usize, usize, f64)>,
    self_loops: Vec<f64>,
}

impl SignedGraph {
    pub fn new(
        node_count: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
        self_loops: Vec<f64>,
    ) -> Result<Self> {
        if self_loops.len() != node_count {
            return Err(Error::DimensionMismatch {
                expected: node_count,
                found: self_loops.len(),
            });
        }
        let mut canon = Vec::new();
        for (a, b, w) in edges {
            if a == b || a >= node_count || b >= node_count {
                return Err(Error::InvalidParameter(format!(
                    "edge ({a}, {b}) is not an inter-node edge of a {node_count}-node graph"
                )));
            }
            if !w.is_finite() {
                return Err(Error::NonFinite {
                    what: format!("weight of edge ({a}, {b})"),
                });
            }
            if w != 0.0 {
                canon.push((a.min(b), a.max(b), w));
            }
        }
        canon.sort_by_key(|x| (x.0, x.1));
        if let Some(w) = canon.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::InvalidParameter(format!(
                "duplicate edge ({}, {})",
                w[0].0, w[0].1
            )));
        }
        Ok(SignedGraph {
            node_count,
            edges: canon,
            self_loops,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn self_loops(&self) -> &[f64] {
        &self.self_loops
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let key = (i.min(j), i.max(j));
        self.edges
            .binary_search_by(|e| (e.0, e.1).cmp(&key))
            .map(|pos| self.edges[pos].2)
            .unwrap_or(0.0)
    }

    fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for &(i, j, w) in &self.edges {
            adj[i].push((j, w));
            adj[j].push((i, w));
        }
        for list in &mut adj {
            list.sort_by_key(|e| e.0);
        }
        adj
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Blue,
    Red,
}

impl Color {
    pub fn flipped(self) -> Color {
        match self {
            Color::Blue => Color::Red,
            Color::Red => Color::Blue,
        }
    }
}

/// Blue/red node partition certifying that a signed graph is balanced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coloring(pub Vec<Color>);

impl Coloring {
    pub fn all_blue(k: usize) -> Self {
        Coloring(vec![Color::Blue; k])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn color(&self, i: usize) -> Color {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, c: Color) {
        self.0[i] = c;
    }

    pub fn same(&self, i: usize, j: usize) -> bool {
        self.0[i] == self.0[j]
    }

    /// True when every nonzero off-diagonal of `m` has the sign the coloring
    /// demands: `M_ij <= 0` (positive edge) within a color, `M_ij >= 0` across.
    pub fn certifies(&self, m: &MetricMatrix) -> bool {
        let k = m.dim();
        (0..k).all(|i| {
            ((i + 1)..k).all(|j| {
                let v = m.get(i, j);
                if self.same(i, j) {
                    v <= 0.0
                } else {
                    v >= 0.0
                }
            })
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Balance {
    Balanced(Coloring),
    /// Witness edge closing a cycle with an odd number of negative edges.
    Unbalanced { edge: (usize, usize) },
}

impl Balance {
    pub fn coloring(&self) -> Option<&Coloring> {
        match self {
            Balance::Balanced(c) => Some(c),
            Balance::Unbalanced { .. } => None,
        }
    }

    pub fn is_balanced(&self) -> bool {
        matches!(self, Balance::Balanced(_))
    }
}

/// `M_ij = -w_ij` off the diagonal, `M_ii = u_i + sum_j w_ij`.
pub fn laplacian_from_graph(g: &SignedGraph) -> MetricMatrix {
    let k = g.node_count;
    let mut m = MetricMatrix::zeros(k);
    let mut degree = vec![0.0; k];
    for &(i, j, w) in &g.edges {
        m.set(i, j, -w);
    }
    // accumulate in ascending neighbour order so the inverse map sums identically
    for (i, d) in degree.iter_mut().enumerate() {
        *d = (0..k).filter(|&j| j != i).map(|j| -m.get(i, j)).sum::<f64>();
    }
    for i in 0..k {
        m.set(i, i, g.self_loops[i] + degree[i]);
    }
    m
}

/// Inverse of [`laplacian_from_graph`]: `w_ij = -M_ij`, `u_i = sum_j M_ij`.
pub fn graph_from_laplacian(m: &MetricMatrix) -> SignedGraph {
    let k = m.dim();
    let mut edges = Vec::new();
    let mut loops = vec![0.0; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let v = m.get(i, j);
            if v != 0.0 {
                edges.push((i, j, -v));
            }
        }
        let degree: f64 = (0..k).filter(|&j| j != i).map(|j| -m.get(i, j)).sum();
        loops[i] = m.get(i, i) - degree;
    }
    SignedGraph {
        node_count: k,
        edges,
        self_loops: loops,
    }
}

/// Breadth-first sign propagation, one component at a time in index order.
/// The lowest-index node of every component is colored blue.
pub fn check_balance(g: &SignedGraph) -> Balance {
    let adj = g.adjacency();
    let mut color: Vec<Option<Color>> = vec![None; g.node_count];
    let mut queue = VecDeque::new();
    for root in 0..g.node_count {
        if color[root].is_some() {
            continue;
        }
        color[root] = Some(Color::Blue);
        queue.push_back(root);
        while let Some(i) = queue.pop_front() {
            let ci = color[i].expect("queued nodes are colored");
            for &(j, w) in &adj[i] {
                let want = if w > 0.0 { ci } else { ci.flipped() };
                match color[j] {
                    None => {
                        color[j] = Some(want);
                        queue.push_back(j);
                    }
                    Some(cj) if cj != want => {
                        return Balance::Unbalanced {
                            edge: (i.min(j), i.max(j)),
                        };
                    }
                    Some(_) => {}
                }
            }
        }
    }
    Balance::Balanced(Coloring(
        color.into_iter().map(|c| c.expect("all colored")).collect(),
    ))
}

/// Balance of the graph whose Laplacian is `m`.
pub fn check_balance_matrix(m: &MetricMatrix) -> Balance {
    check_balance(&graph_from_laplacian(m))
}

/// Connected components of the off-diagonal nonzero pattern. Blocks are listed
/// by their smallest index and each block is sorted ascending.
pub fn connected_components(m: &MetricMatrix) -> Vec<Vec<usize>> {
    let k = m.dim();
    let mut seen = vec![false; k];
    let mut blocks = Vec::new();
    let mut stack = Vec::new();
    for root in 0..k {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        stack.push(root);
        let mut block = Vec::new();
        while let Some(i) = stack.pop() {
            block.push(i);
            for j in 0..k {
                if j != i && !seen[j] && m.get(i, j).abs() > 0.0 {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        block.sort_unstable();
        blocks.push(block);
    }
    blocks
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eq4() -> MetricMatrix {
        MetricMatrix::from_rows(&[
            vec![2.0, -2.0, -1.0],
            vec![-2.0, 5.0, -2.0],
            vec![-1.0, -2.0, 4.0],
        ])
        .unwrap()
    }

    #[test]
    fn two_node_self_loop_assignment() {
        for w in [-1.5, 0.75] {
            let u = 2.0 * f64::abs(w);
            let g = SignedGraph::new(2, [(0, 1, w)], vec![u, u]).unwrap();
            let m = laplacian_from_graph(&g);
            assert_eq!(m.to_rows(), vec![vec![u + w, -w], vec![-w, u + w]]);
        }
    }

    #[test]
    fn empty_graph_with_unit_loops_is_identity() {
        let g = SignedGraph::new(4, [], vec![1.0; 4]).unwrap();
        assert_eq!(laplacian_from_graph(&g), MetricMatrix::identity(4));
    }

    #[test]
    fn eq4_from_its_graph() {
        // u_i = M_ii - sum_j w_ij: (2-3, 5-4, 4-3)
        let g = SignedGraph::new(3, [(0, 1, 2.0), (1, 2, 2.0), (0, 2, 1.0)], vec![-1.0, 1.0, 1.0])
            .unwrap();
        assert_eq!(laplacian_from_graph(&g), eq4());
    }

    #[test]
    fn graph_of_eq4() {
        let g = graph_from_laplacian(&eq4());
        assert_eq!(g.edges(), &[(0, 1, 2.0), (0, 2, 1.0), (1, 2, 2.0)]);
        assert_eq!(g.self_loops(), &[-1.0, 1.0, 1.0]);
        assert_eq!(laplacian_from_graph(&g), eq4());
    }

    #[test]
    fn graph_of_identity_and_negative_edge() {
        let g = graph_from_laplacian(&MetricMatrix::identity(3));
        assert!(g.edges().is_empty());
        assert_eq!(g.self_loops(), &[1.0; 3]);

        let m = MetricMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let g = graph_from_laplacian(&m);
        assert_eq!(g.edges(), &[(0, 1, -1.0)]);
        assert_eq!(g.self_loops(), &[3.0, 3.0]);
    }

    #[test]
    fn balanced_triangle() {
        // A=0, B=1, C=2: (A,B)=+1, (B,C)=(C,A)=-1
        let g = SignedGraph::new(3, [(0, 1, 1.0), (1, 2, -1.0), (2, 0, -1.0)], vec![0.0; 3])
            .unwrap();
        let b = check_balance(&g);
        assert_eq!(
            b.coloring().unwrap().0,
            vec![Color::Blue, Color::Blue, Color::Red]
        );
    }

    #[test]
    fn unbalanced_triangle() {
        let g = SignedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, -1.0)], vec![0.0; 3])
            .unwrap();
        assert!(matches!(check_balance(&g), Balance::Unbalanced { .. }));
    }

    #[test]
    fn positive_graph_is_all_blue() {
        let g = SignedGraph::new(
            5,
            [(0, 1, 0.3), (1, 2, 2.0), (2, 3, 1.0), (3, 0, 0.1), (4, 2, 5.0), (1, 3, 1.0)],
            vec![0.0; 5],
        )
        .unwrap();
        assert_eq!(check_balance(&g).coloring().unwrap(), &Coloring::all_blue(5));
    }

    #[test]
    fn lowest_index_of_each_component_is_blue() {
        let g = SignedGraph::new(4, [(2, 3, -1.0), (0, 1, -2.0)], vec![0.0; 4]).unwrap();
        let c = check_balance(&g).coloring().cloned().unwrap();
        assert_eq!(c.0, vec![Color::Blue, Color::Red, Color::Blue, Color::Red]);
    }

    #[test]
    fn components() {
        let mut m = MetricMatrix::identity(4);
        m.set(0, 1, -0.5);
        m.set(2, 3, 0.5);
        assert_eq!(connected_components(&m), vec![vec![0, 1], vec![2, 3]]);

        let dense = MetricMatrix::from_rows(&[vec![1.0; 3], vec![1.0; 3], vec![1.0; 3]]).unwrap();
        assert_eq!(connected_components(&dense), vec![vec![0, 1, 2]]);

        assert_eq!(
            connected_components(&MetricMatrix::identity(3)),
            vec![vec![0], vec![1], vec![2]]
        );
    }

    #[test]
    fn rejects_self_edges_and_duplicates() {
        assert!(SignedGraph::new(2, [(1, 1, 1.0)], vec![0.0; 2]).is_err());
        assert!(SignedGraph::new(2, [(0, 1, 1.0), (1, 0, 2.0)], vec![0.0; 2]).is_err());
        let g = SignedGraph::new(2, [(1, 0, 0.0)], vec![0.0; 2]).unwrap();
        assert!(g.edges().is_empty());
    }
}

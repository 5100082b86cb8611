use log::warn;

use crate::data::{covariance, Dataset};
use crate::error::{Error, Result};
use crate::graph::Coloring;
use crate::matrix::MetricMatrix;

/// Tree-graph starting point.
///
/// Diagonals are `C / K`. Starting from node 0, the tree repeatedly attaches
/// the outside node with the largest `|E_ij|` to any tree node and sets
/// `M_ij = sign(E_ij) C / K^2` (a zero covariance counts as positive). Colors
/// follow the edge signs outward from node 0, which is blue.
pub fn init_metric(data: &Dataset, budget: f64) -> Result<(MetricMatrix, Coloring)> {
    let e = covariance(data)?;
    tree_metric(&e, budget, |v| if v < 0.0 { -1.0 } else { 1.0 })
}

/// Same tree, but every edge positive (`M_ij = -C / K^2`) and all nodes blue.
pub fn init_positive_metric(data: &Dataset, budget: f64) -> Result<(MetricMatrix, Coloring)> {
    let e = covariance(data)?;
    tree_metric(&e, budget, |_| -1.0)
}

pub(crate) fn tree_metric(
    e: &MetricMatrix,
    budget: f64,
    sign: impl Fn(f64) -> f64,
) -> Result<(MetricMatrix, Coloring)> {
    let k = e.dim();
    if k == 0 {
        return Err(Error::InvalidParameter("no features".into()));
    }
    if !(budget > 0.0) {
        return Err(Error::InvalidParameter(format!("trace budget {budget}")));
    }
    let kf = k as f64;
    let mut m = MetricMatrix::from_diagonal(&vec![budget / kf; k]);
    let mut coloring = Coloring::all_blue(k);
    let mut in_tree = vec![false; k];
    in_tree[0] = true;
    let mut order = vec![0usize];
    for _ in 1..k {
        let mut best: Option<(f64, usize, usize)> = None;
        for &u in &order {
            for v in (0..k).filter(|&v| !in_tree[v]) {
                let mag = e.get(u, v).abs();
                if best.is_none_or(|(b, _, _)| mag > b) {
                    best = Some((mag, u, v));
                }
            }
        }
        let (mag, u, v) = best.expect("an outside node remains");
        if mag == 0.0 {
            warn!("feature pair ({u}, {v}) has zero covariance; using a positive sign");
        }
        let entry = sign(e.get(u, v)) * budget / (kf * kf);
        m.set(u, v, entry);
        // M_uv <= 0 is a positive edge and keeps the color
        let c = if entry <= 0.0 {
            coloring.color(u)
        } else {
            coloring.color(u).flipped()
        };
        coloring.set(v, c);
        in_tree[v] = true;
        order.push(v);
    }
    debug_assert!(coloring.certifies(&m));
    Ok((m, coloring))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Color;

    #[test]
    fn three_node_tree() {
        let e = MetricMatrix::from_rows(&[
            vec![1.0, 0.9, -0.8],
            vec![0.9, 1.0, 0.1],
            vec![-0.8, 0.1, 1.0],
        ])
        .unwrap();
        let (m, c) = tree_metric(&e, 3.0, |v| if v < 0.0 { -1.0 } else { 1.0 }).unwrap();
        let w = 3.0 / 9.0;
        assert_eq!(m.get(0, 1), w);
        assert_eq!(m.get(0, 2), -w);
        assert_eq!(m.get(1, 2), 0.0);
        assert_eq!(m.diagonal(), vec![1.0; 3]);
        // M_01 > 0 is a negative edge: node 1 takes the other color
        assert_eq!(c.0, vec![Color::Blue, Color::Red, Color::Blue]);
    }

    #[test]
    fn single_feature() {
        let (m, c) = tree_metric(&MetricMatrix::identity(1), 2.5, |_| 1.0).unwrap();
        assert_eq!(m.to_rows(), vec![vec![2.5]]);
        assert_eq!(c, Coloring::all_blue(1));
    }

    #[test]
    fn four_node_tree() {
        let e = MetricMatrix::from_rows(&[
            vec![1.0, -0.9, 0.8, 0.1],
            vec![-0.9, 1.0, 0.2, 0.1],
            vec![0.8, 0.2, 1.0, -0.7],
            vec![0.1, 0.1, -0.7, 1.0],
        ])
        .unwrap();
        let c = 8.0;
        let (m, _) = tree_metric(&e, c, |v| if v < 0.0 { -1.0 } else { 1.0 }).unwrap();
        let q = 1.0 / 4.0;
        let expected = [
            [1.0, -q, q, 0.0],
            [-q, 1.0, 0.0, 0.0],
            [q, 0.0, 1.0, -q],
            [0.0, 0.0, -q, 1.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m.get(i, j), c / 4.0 * expected[i][j]);
            }
        }
        assert!(crate::spectral::gershgorin(&m).lower_bound > 0.0);
    }
}

//! k-nearest-neighbor classification under a learned metric.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::matrix::MetricMatrix;
use crate::objectives::mahalanobis;

pub const DEFAULT_NEIGHBORS: usize = 10;

/// Training indices of the `k` nearest samples to `query`, nearest first.
/// Equal distances go to the lower index.
pub fn nearest(train: &Dataset, m: &MetricMatrix, query: &[f64], k: usize) -> Result<Vec<usize>> {
    let mut dist = (0..train.len())
        .map(|i| Ok((mahalanobis(m, train.sample(i), query)?, i)))
        .collect::<Result<Vec<_>>>()?;
    dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(dist.into_iter().take(k).map(|(_, i)| i).collect())
}

/// Majority label among the `k` nearest training samples; a tied vote takes
/// the label of the single nearest one.
pub fn predict(train: &Dataset, m: &MetricMatrix, query: &[f64], k: usize) -> Result<i8> {
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    let idx = nearest(train, m, query, k)?;
    let votes: i64 = idx.iter().map(|&i| i64::from(train.label(i))).sum();
    Ok(match votes.signum() {
        1 => 1,
        -1 => -1,
        _ => train.label(idx[0]),
    })
}

/// Predicted labels for every sample of `test`.
pub fn predict_all(train: &Dataset, test: &Dataset, m: &MetricMatrix, k: usize) -> Result<Vec<i8>> {
    (0..test.len())
        .map(|i| predict(train, m, test.sample(i), k))
        .collect()
}

/// Fraction of `test` labelled correctly.
pub fn accuracy(train: &Dataset, test: &Dataset, m: &MetricMatrix, k: usize) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let pred = predict_all(train, test, m, k)?;
    let hits = pred
        .iter()
        .zip(test.labels())
        .filter(|(p, y)| p == y)
        .count();
    Ok(hits as f64 / test.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset {
        Dataset::new(
            "toy",
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![5.0, 5.0], vec![6.0, 5.0]],
            vec![1, 1, -1, -1],
        )
        .unwrap()
    }

    #[test]
    fn exact_match_with_one_neighbor() {
        let m = MetricMatrix::identity(2);
        assert_eq!(predict(&toy(), &m, &[5.0, 5.0], 1).unwrap(), -1);
    }

    #[test]
    fn tied_vote_uses_nearest() {
        let m = MetricMatrix::identity(2);
        // two of each label: nearest is sample 1
        assert_eq!(predict(&toy(), &m, &[1.5, 0.0], 4).unwrap(), 1);
    }

    #[test]
    fn distance_ties_prefer_lower_index() {
        let m = MetricMatrix::identity(2);
        assert_eq!(nearest(&toy(), &m, &[0.5, 0.0], 2).unwrap(), vec![0, 1]);
    }

    #[test]
    fn perfect_accuracy_on_training_set() {
        let m = MetricMatrix::identity(2);
        assert_eq!(accuracy(&toy(), &toy(), &m, 1).unwrap(), 1.0);
    }
}

//! Exact nearest-neighbour search by linear scan.

use std::cmp::Ordering;

use crate::data::Dataset;
use crate::error::{Error, Result};

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Positions of the `n` rows nearest to `query` in Euclidean distance,
/// ordered by `(distance, id)`. Callers guarantee `1 <= n <= rows.len()`.
pub(crate) fn nearest_positions(
    rows: &[&[f64]],
    ids: &[u64],
    query: &[f64],
    n: usize,
) -> Vec<usize> {
    let mut scored: Vec<(f64, u64, usize)> = rows
        .iter()
        .zip(ids)
        .enumerate()
        .map(|(p, (r, &id))| (squared_distance(r, query), id, p))
        .collect();
    let cmp = |a: &(f64, u64, usize), b: &(f64, u64, usize)| -> Ordering {
        a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
    };
    if n < scored.len() {
        scored.select_nth_unstable_by(n - 1, cmp);
        scored.truncate(n);
    }
    scored.sort_unstable_by(cmp);
    scored.into_iter().map(|(_, _, p)| p).collect()
}

/// Ids of the `n` training samples nearest to `query`, sorted by
/// `(distance, id)`.
pub fn knn_indices(train: &Dataset, query: &[f64], n: usize) -> Result<Vec<u64>> {
    if n == 0 || n > train.len() {
        return Err(Error::arg(format!(
            "neighbour count {n} must lie in [1, {}]",
            train.len()
        )));
    }
    if query.len() != train.dim() {
        return Err(Error::arg(format!(
            "query has dimension {}, dataset has {}",
            query.len(),
            train.dim()
        )));
    }
    let rows = train.rows();
    let ids = train.ids();
    Ok(nearest_positions(&rows, &ids, query, n)
        .into_iter()
        .map(|p| ids[p])
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Sample;
    use proptest::prelude::*;

    fn line(points: &[f64]) -> Dataset {
        Dataset::from_rows(
            points.iter().map(|&p| vec![p]).collect(),
            vec![0; points.len()],
            vec!["a".into()],
        )
        .unwrap()
    }

    #[test]
    fn hand_computed_neighbours() {
        let ds = line(&[0.0, 1.0, 10.0]);
        assert_eq!(knn_indices(&ds, &[0.4], 2).unwrap(), vec![0, 1]);
        assert_eq!(knn_indices(&ds, &[10.0], 1).unwrap(), vec![2]);
        assert_eq!(knn_indices(&ds, &[6.0], 3).unwrap(), vec![2, 1, 0]);
    }

    #[test]
    fn ties_prefer_lower_id() {
        let samples = vec![
            Sample {
                id: 9,
                label: 0,
                features: vec![1.0],
            },
            Sample {
                id: 4,
                label: 0,
                features: vec![-1.0],
            },
            Sample {
                id: 7,
                label: 0,
                features: vec![5.0],
            },
        ];
        let ds = Dataset::new(samples, vec!["a".into()]).unwrap();
        assert_eq!(knn_indices(&ds, &[0.0], 2).unwrap(), vec![4, 9]);
    }

    #[test]
    fn out_of_range_n() {
        let ds = line(&[0.0, 1.0]);
        assert!(knn_indices(&ds, &[0.0], 0).is_err());
        assert!(knn_indices(&ds, &[0.0], 3).is_err());
        assert!(knn_indices(&ds, &[0.0, 1.0], 1).is_err());
    }

    proptest! {
        #[test]
        fn agrees_with_full_sort(
            points in prop::collection::vec(prop::collection::vec(-3i32..3, 2), 1..40),
            q in prop::collection::vec(-3i32..3, 2),
            n in 1usize..40,
        ) {
            let rows: Vec<Vec<f64>> = points.iter().map(|p| p.iter().map(|&v| f64::from(v)).collect()).collect();
            let len = rows.len();
            prop_assume!(n <= len);
            let ds = Dataset::from_rows(rows.clone(), vec![0; len], vec!["a".into()]).unwrap();
            let query: Vec<f64> = q.iter().map(|&v| f64::from(v)).collect();
            let mut oracle: Vec<(f64, u64)> = rows
                .iter()
                .enumerate()
                .map(|(i, r)| (r.iter().zip(&query).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt(), i as u64))
                .collect();
            oracle.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let expected: Vec<u64> = oracle.into_iter().take(n).map(|(_, id)| id).collect();
            prop_assert_eq!(knn_indices(&ds, &query, n).unwrap(), expected);
        }
    }
}

//! Deterministic splitting primitives.
//!
//! Every split walks the samples in id order, so the result depends only on
//! `(sample ids, labels, parameters, seed)` and never on storage order.
//! Split sizes use round-half-up; remainders go to the earliest folds.

use std::collections::BTreeMap;

use super::Dataset;
use crate::error::{Error, Result};
use crate::seed::{rng_from_seed, round_half_up, shuffle};

/// Assignment of every sample of a dataset to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    k: usize,
    seed: u64,
    fold_of: BTreeMap<u64, usize>,
    // dataset positions per fold, in id order
    members: Vec<Vec<usize>>,
    len: usize,
}

impl FoldAssignment {
    fn from_order(dataset: &Dataset, order: &[usize], k: usize, seed: u64) -> Self {
        let mut members = vec![Vec::new(); k];
        for (slot, &pos) in order.iter().enumerate() {
            members[slot % k].push(pos);
        }
        Self::from_members(dataset, members, k, seed)
    }

    fn from_members(dataset: &Dataset, mut members: Vec<Vec<usize>>, k: usize, seed: u64) -> Self {
        let samples = dataset.samples();
        let mut fold_of = BTreeMap::new();
        for (f, m) in members.iter_mut().enumerate() {
            m.sort_by_key(|&p| samples[p].id);
            for &p in m.iter() {
                fold_of.insert(samples[p].id, f);
            }
        }
        FoldAssignment {
            k,
            seed,
            fold_of,
            members,
            len: dataset.len(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn fold_of(&self, id: u64) -> Option<usize> {
        self.fold_of.get(&id).copied()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    /// Dataset positions in fold `f`, ordered by sample id.
    pub fn fold_positions(&self, f: usize) -> &[usize] {
        &self.members[f]
    }

    /// Dataset positions outside fold `f`, ordered by sample id.
    pub fn complement_positions(&self, dataset: &Dataset, f: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .members
            .iter()
            .enumerate()
            .filter(|&(g, _)| g != f)
            .flat_map(|(_, m)| m.iter().copied())
            .collect();
        out.sort_by_key(|&p| dataset.samples()[p].id);
        out
    }

    /// `(training part, held-out fold)` for outer cross-validation.
    pub fn split(&self, dataset: &Dataset, f: usize) -> Result<(Dataset, Dataset)> {
        if dataset.len() != self.len || f >= self.k {
            return Err(Error::arg("fold assignment does not match dataset"));
        }
        let test = dataset.select(&self.members[f])?;
        let train = dataset.select(&self.complement_positions(dataset, f))?;
        Ok((train, test))
    }
}

fn check_k(dataset: &Dataset, k: usize) -> Result<()> {
    if k < 2 || k > dataset.len() {
        return Err(Error::arg(format!(
            "fold count {k} must lie in [2, {}]",
            dataset.len()
        )));
    }
    Ok(())
}

/// Plain random k-fold: shuffle, then deal contiguous chunks whose sizes
/// differ by at most one.
pub fn random_kfold(dataset: &Dataset, k: usize, seed: u64) -> Result<FoldAssignment> {
    check_k(dataset, k)?;
    let mut order = dataset.positions_by_id();
    let mut rng = rng_from_seed(seed);
    shuffle(&mut rng, &mut order);
    let n = order.len();
    let (base, extra) = (n / k, n % k);
    let mut members = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        members.push(order[start..start + size].to_vec());
        start += size;
    }
    Ok(FoldAssignment::from_members(dataset, members, k, seed))
}

/// Positions grouped by class, each group in id order.
fn by_class(dataset: &Dataset) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); dataset.class_count()];
    for p in dataset.positions_by_id() {
        groups[dataset.samples()[p].label].push(p);
    }
    groups
}

/// Stratified k-fold. Classes are shuffled independently and dealt
/// round-robin with one running counter, so per-class fold counts differ by
/// at most one and so do total fold sizes.
pub fn stratified_kfold(dataset: &Dataset, k: usize, seed: u64) -> Result<FoldAssignment> {
    check_k(dataset, k)?;
    let mut rng = rng_from_seed(seed);
    let mut order = Vec::with_capacity(dataset.len());
    for mut group in by_class(dataset) {
        shuffle(&mut rng, &mut group);
        order.extend(group);
    }
    Ok(FoldAssignment::from_order(dataset, &order, k, seed))
}

/// Per-class quotas summing to `round(fraction * n)` (largest remainder,
/// ties to the lower class index).
fn stratified_quota(counts: &[usize], fraction: f64) -> Vec<usize> {
    let total: usize = counts.iter().sum();
    let target = round_half_up(fraction * total as f64);
    let exact: Vec<f64> = counts.iter().map(|&c| fraction * c as f64).collect();
    let mut quota: Vec<usize> = exact
        .iter()
        .map(|&x| (x + 1e-9).floor() as usize)
        .zip(counts)
        .map(|(q, &c)| q.min(c))
        .collect();
    let mut assigned: usize = quota.iter().sum();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - quota[a] as f64;
        let fb = exact[b] - quota[b] as f64;
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let mut i = 0;
    while assigned < target && i < 2 * order.len() {
        let c = order[i % order.len()];
        if quota[c] < counts[c] {
            quota[c] += 1;
            assigned += 1;
        }
        i += 1;
    }
    quota
}

/// Stratified holdout. The second part has `round(fraction * n)` samples.
/// Both parts keep id order.
pub fn holdout_split(dataset: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::arg(format!(
            "holdout fraction {fraction} must lie in (0, 1)"
        )));
    }
    let groups = by_class(dataset);
    let counts: Vec<usize> = groups.iter().map(Vec::len).collect();
    let quota = stratified_quota(&counts, fraction);
    let mut rng = rng_from_seed(seed);
    let mut keep = Vec::new();
    let mut held = Vec::new();
    for (mut group, q) in groups.into_iter().zip(quota) {
        shuffle(&mut rng, &mut group);
        held.extend_from_slice(&group[..q]);
        keep.extend_from_slice(&group[q..]);
    }
    if keep.is_empty() || held.is_empty() {
        return Err(Error::arg(format!(
            "holdout fraction {fraction} leaves an empty part on {} samples",
            dataset.len()
        )));
    }
    let by_id = |v: &mut Vec<usize>| v.sort_by_key(|&p| dataset.samples()[p].id);
    by_id(&mut keep);
    by_id(&mut held);
    Ok((dataset.select(&keep)?, dataset.select(&held)?))
}

/// Keeps `round(fraction * count)` uniformly chosen samples of every class.
pub fn subsample_per_class(dataset: &Dataset, fraction: f64, seed: u64) -> Result<Dataset> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::arg(format!(
            "subsample fraction {fraction} must lie in (0, 1]"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut keep = Vec::new();
    for mut group in by_class(dataset) {
        let q = round_half_up(fraction * group.len() as f64).min(group.len());
        shuffle(&mut rng, &mut group);
        keep.extend_from_slice(&group[..q]);
    }
    if keep.is_empty() {
        return Err(Error::arg("subsample keeps no samples"));
    }
    keep.sort_by_key(|&p| dataset.samples()[p].id);
    dataset.select(&keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn dataset(labels: &[usize], classes: usize) -> Dataset {
        let rows = (0..labels.len()).map(|i| vec![i as f64]).collect();
        let names = (0..classes).map(|c| format!("c{c}")).collect();
        Dataset::from_rows(rows, labels.to_vec(), names).unwrap()
    }

    fn sorted(mut v: Vec<usize>) -> Vec<usize> {
        v.sort_unstable();
        v
    }

    #[test]
    fn random_kfold_sizes() {
        let ds = dataset(&[0; 10], 1);
        assert_eq!(random_kfold(&ds, 5, 1).unwrap().fold_sizes(), vec![2; 5]);
        let ds = dataset(&[0; 11], 1);
        assert_eq!(
            sorted(random_kfold(&ds, 5, 1).unwrap().fold_sizes()),
            vec![2, 2, 2, 2, 3]
        );
    }

    #[test]
    fn kfold_rejects_bad_k() {
        let ds = dataset(&[0; 4], 1);
        assert!(random_kfold(&ds, 1, 0).is_err());
        assert!(random_kfold(&ds, 5, 0).is_err());
        assert!(stratified_kfold(&ds, 5, 0).is_err());
    }

    #[test]
    fn kfold_is_deterministic_and_seed_sensitive() {
        let ds = dataset(&[0; 30], 1);
        assert_eq!(
            random_kfold(&ds, 3, 9).unwrap(),
            random_kfold(&ds, 3, 9).unwrap()
        );
        assert_ne!(
            random_kfold(&ds, 3, 9).unwrap(),
            random_kfold(&ds, 3, 10).unwrap()
        );
        assert_eq!(
            stratified_kfold(&ds, 3, 9).unwrap(),
            stratified_kfold(&ds, 3, 9).unwrap()
        );
    }

    #[test]
    fn stratified_exact_divisibility() {
        let labels: Vec<usize> = (0..20).map(|i| i % 2).collect();
        let ds = dataset(&labels, 2);
        let folds = stratified_kfold(&ds, 5, 3).unwrap();
        for f in 0..5 {
            let per_class = folds.fold_positions(f).iter().fold([0; 2], |mut acc, &p| {
                acc[ds.samples()[p].label] += 1;
                acc
            });
            assert_eq!(per_class, [2, 2]);
        }
    }

    #[test]
    fn small_class_spreads_over_distinct_folds() {
        let mut labels = vec![0; 17];
        labels.extend([1, 1, 1]);
        let ds = dataset(&labels, 2);
        let folds = stratified_kfold(&ds, 5, 11).unwrap();
        let hit: BTreeSet<usize> = ds
            .samples()
            .iter()
            .filter(|s| s.label == 1)
            .map(|s| folds.fold_of(s.id).unwrap())
            .collect();
        assert_eq!(hit.len(), 3);
    }

    #[test]
    fn holdout_sizes() {
        let labels: Vec<usize> = (0..100).map(|i| i % 3).collect();
        let ds = dataset(&labels, 3);
        let (a, b) = holdout_split(&ds, 0.15, 4).unwrap();
        assert_eq!((a.len(), b.len()), (85, 15));
        let ids: BTreeSet<u64> = a.ids().into_iter().chain(b.ids()).collect();
        assert_eq!(ids.len(), 100);

        let ds = dataset(&[0, 1], 2);
        let (a, b) = holdout_split(&ds, 0.5, 0).unwrap();
        assert_eq!((a.len(), b.len()), (1, 1));

        assert!(holdout_split(&ds, 0.0, 0).is_err());
        assert!(holdout_split(&ds, 1.0, 0).is_err());
    }

    #[test]
    fn subsample_rounding_and_identity() {
        let mut labels = vec![0; 10];
        labels.extend(vec![1; 5]);
        let ds = dataset(&labels, 2);
        assert_eq!(subsample_per_class(&ds, 1.0, 3).unwrap(), ds);
        let sub = subsample_per_class(&ds, 0.6, 3).unwrap();
        assert_eq!(sub.class_counts(), vec![6, 3]);
        let sub = subsample_per_class(&ds, 0.8, 3).unwrap();
        assert_eq!(sub.class_counts(), vec![8, 4]);
        assert!(subsample_per_class(&ds, 0.0, 3).is_err());
        assert!(subsample_per_class(&ds, 1.5, 3).is_err());
    }

    #[test]
    fn splits_ignore_storage_order() {
        let labels: Vec<usize> = (0..23).map(|i| i % 3).collect();
        let ds = dataset(&labels, 3);
        let mut rev: Vec<usize> = (0..23).collect();
        rev.reverse();
        let rds = ds.select(&rev).unwrap();
        for f in [random_kfold, stratified_kfold] {
            let a = f(&ds, 4, 5).unwrap();
            let b = f(&rds, 4, 5).unwrap();
            for id in 0..23 {
                assert_eq!(a.fold_of(id), b.fold_of(id));
            }
        }
        let (a, _) = holdout_split(&ds, 0.3, 2).unwrap();
        let (b, _) = holdout_split(&rds, 0.3, 2).unwrap();
        assert_eq!(a.ids(), b.ids());
    }

    proptest! {
        #[test]
        fn fold_assignments_partition(
            labels in prop::collection::vec(0usize..4, 2..80),
            k in 2usize..8,
            seed in any::<u64>(),
        ) {
            let ds = dataset(&labels, 4);
            prop_assume!(k <= ds.len());
            for folds in [random_kfold(&ds, k, seed).unwrap(), stratified_kfold(&ds, k, seed).unwrap()] {
                let sizes = folds.fold_sizes();
                prop_assert_eq!(sizes.iter().sum::<usize>(), ds.len());
                let (lo, hi) = (*sizes.iter().min().unwrap(), *sizes.iter().max().unwrap());
                prop_assert!(hi - lo <= 1);
                let mut seen = BTreeSet::new();
                for f in 0..k {
                    for &p in folds.fold_positions(f) {
                        prop_assert!(seen.insert(p));
                        prop_assert_eq!(folds.fold_of(ds.samples()[p].id), Some(f));
                    }
                }
                prop_assert_eq!(seen.len(), ds.len());
            }
            let strat = stratified_kfold(&ds, k, seed).unwrap();
            for c in 0..4 {
                let per_fold: Vec<usize> = (0..k)
                    .map(|f| strat.fold_positions(f).iter().filter(|&&p| ds.samples()[p].label == c).count())
                    .collect();
                let (lo, hi) = (*per_fold.iter().min().unwrap(), *per_fold.iter().max().unwrap());
                prop_assert!(hi - lo <= 1);
            }
        }

        #[test]
        fn holdout_partitions(
            labels in prop::collection::vec(0usize..3, 4..60),
            fraction in 0.05f64..0.95,
            seed in any::<u64>(),
        ) {
            let ds = dataset(&labels, 3);
            if let Ok((a, b)) = holdout_split(&ds, fraction, seed) {
                prop_assert_eq!(b.len(), round_half_up(fraction * ds.len() as f64));
                let ia: BTreeSet<u64> = a.ids().into_iter().collect();
                let ib: BTreeSet<u64> = b.ids().into_iter().collect();
                prop_assert!(ia.is_disjoint(&ib));
                prop_assert_eq!(ia.len() + ib.len(), ds.len());
            }
        }
    }
}

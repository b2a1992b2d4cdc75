use crate::dataset::DatasetInstance;
use crate::metrics::Subgroup;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// One outer fold. Indices refer to positions in the dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub index: usize,
    pub calibration: Vec<usize>,
    pub evaluation: Vec<usize>,
    /// Drawn from `calibration`; used for configuration selection.
    pub inner: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub seed: u64,
    pub stratified: bool,
    pub folds: Vec<Fold>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FoldError {
    #[error("need at least k = {k} instances, got {n}")]
    TooSmall { n: usize, k: usize },
    #[error("k must be at least 2")]
    BadK,
}

/// Seeded shuffle, then `k` contiguous evaluation blocks. With `stratified`,
/// each subgroup is shuffled and dealt round-robin so every fold gets an
/// equal share of VB/VU/IB/IU.
pub fn plan_folds(dataset: &[DatasetInstance], k: usize, inner: usize, seed: u64, stratified: bool) -> Result<FoldPlan, FoldError> {
    let n = dataset.len();
    if k < 2 {
        return Err(FoldError::BadK);
    }
    if n < k {
        return Err(FoldError::TooSmall { n, k });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; n];
    if stratified {
        let mut groups: BTreeMap<Subgroup, Vec<usize>> = BTreeMap::new();
        for (i, inst) in dataset.iter().enumerate() {
            groups.entry(inst.subgroup()).or_default().push(i);
        }
        let mut next = 0;
        for members in groups.values_mut() {
            members.shuffle(&mut rng);
            for &i in members.iter() {
                assignment[i] = next % k;
                next += 1;
            }
        }
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        for (pos, &i) in order.iter().enumerate() {
            // contiguous blocks whose sizes differ by at most one
            assignment[i] = pos * k / n;
        }
    }

    let folds = (0..k)
        .map(|f| {
            let evaluation: Vec<usize> = (0..n).filter(|&i| assignment[i] == f).collect();
            let calibration: Vec<usize> = (0..n).filter(|&i| assignment[i] != f).collect();
            let mut inner_ids: Vec<usize> = calibration.choose_multiple(&mut rng, inner.min(calibration.len())).copied().collect();
            inner_ids.sort_unstable();
            Fold { index: f, calibration, evaluation, inner: inner_ids }
        })
        .collect();
    Ok(FoldPlan { seed, stratified, folds })
}

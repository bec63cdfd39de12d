use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::super_learner::{cv_folds, FoldAssignment};

/// Repeated partitions of the individuals into cross-fitting folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossFitPlan {
    splits: Vec<FoldAssignment>,
    seed: u64,
}

impl CrossFitPlan {
    pub fn n_splits(&self) -> usize {
        self.splits.len()
    }

    pub fn n_folds(&self) -> usize {
        self.splits[0].k()
    }

    pub fn split(&self, s: usize) -> &FoldAssignment {
        &self.splits[s]
    }

    pub fn splits(&self) -> &[FoldAssignment] {
        &self.splits
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `ss` copies of the trivial one-fold partition (no cross-fitting).
    pub fn full_sample(n_ids: usize, ss: usize, seed: u64) -> Self {
        Self {
            splits: vec![FoldAssignment::single(n_ids); ss],
            seed,
        }
    }

    pub(crate) fn replace_split(&mut self, s: usize, folds: FoldAssignment) {
        self.splits[s] = folds;
    }
}

/// Seed of partition `s`; `attempt` > 0 gives the redraw used after a degenerate fold.
pub(crate) fn split_seed(seed: u64, s: usize, attempt: u64) -> u64 {
    derive_seed(derive_seed(seed, s as u64), attempt)
}

/// `ss` independent partitions of `n_ids` individuals into `b` near-equal folds.
pub fn make_crossfit_plan(n_ids: usize, b: usize, ss: usize, seed: u64) -> Result<CrossFitPlan> {
    if ss == 0 {
        return Err(Error::InvalidInput("need at least one sample split".into()));
    }
    if b < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 cross-fitting folds, got {b}"
        )));
    }
    if n_ids < b {
        return Err(Error::InvalidInput(format!(
            "cannot split {n_ids} individuals into {b} folds"
        )));
    }
    let splits = (0..ss)
        .map(|s| cv_folds(n_ids, b, split_seed(seed, s, 0)))
        .collect::<Result<_>>()?;
    Ok(CrossFitPlan { splits, seed })
}

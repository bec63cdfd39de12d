//! Cross-fitted super-learner control-function estimation.
//!
//! For every sample split the individuals are partitioned into `B` folds.
//! On each fold the first stage `E[τx₁ | I_t]` is learned by a super learner
//! on the other folds, its residual `τû` enters the structural equation as a
//! control, and `θ = (β₁, β₂, ρ)` solves the weighted moment equations on the
//! fold. Fold estimates are averaged within a split, splits are aggregated by
//! mean or median, and the variance adds the across-split dispersion to the
//! averaged per-split cluster sandwich.

mod estimator;
mod orthogonality;
mod plan;

pub use estimator::{
    first_stage_residuals, second_stage, slcf_estimate, slcf_estimate_with, split_correction,
    variance_estimate, FirstStageFit, FoldFit, Nuisance, SplitFit,
};
pub use orthogonality::{orthogonality_check, OrthogonalityCheck, ScoreBlock};
pub use plan::{make_crossfit_plan, CrossFitPlan};

use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::panel::{DesignOptions, TransformKind, Weighting};
use crate::scalar::Real;
use crate::super_learner::SuperLearnerConfig;

/// How per-split estimates are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregate {
    #[default]
    Mean,
    Median,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlcfConfig {
    #[serde(default = "SlcfConfig::default_transform")]
    pub transform: TransformKind,
    /// Cross-fitting folds `B`.
    #[serde(default = "SlcfConfig::default_folds")]
    pub folds: usize,
    /// Repeated sample splits `SS`.
    #[serde(default = "SlcfConfig::default_splits")]
    pub splits: usize,
    #[serde(default)]
    pub super_learner: SuperLearnerConfig,
    #[serde(default)]
    pub weighting: Weighting,
    #[serde(default)]
    pub aggregate: Aggregate,
    #[serde(default)]
    pub design: DesignOptions,
    /// When false the first stage is fit and evaluated on the full sample
    /// (one fold per split); only useful for diagnostics.
    #[serde(default = "SlcfConfig::default_cross_fit")]
    pub cross_fit: bool,
    #[serde(default)]
    pub seed: u64,
}

impl SlcfConfig {
    fn default_transform() -> TransformKind {
        TransformKind::FirstDifference
    }

    fn default_folds() -> usize {
        5
    }

    fn default_splits() -> usize {
        10
    }

    fn default_cross_fit() -> bool {
        true
    }

    pub fn new(transform: TransformKind) -> Self {
        Self {
            transform,
            folds: Self::default_folds(),
            splits: Self::default_splits(),
            super_learner: SuperLearnerConfig::default(),
            weighting: Weighting::default(),
            aggregate: Aggregate::default(),
            design: DesignOptions::default(),
            cross_fit: true,
            seed: 0,
        }
    }

    pub fn validate(&self) -> crate::error::Result<()> {
        use crate::error::Error;
        if self.splits == 0 {
            return Err(Error::InvalidInput("need at least one sample split".into()));
        }
        if self.cross_fit && self.folds < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 cross-fitting folds, got {}",
                self.folds
            )));
        }
        self.super_learner.validate()
    }
}

impl Default for SlcfConfig {
    fn default() -> Self {
        Self::new(Self::default_transform())
    }
}

/// Result of [`slcf_estimate`].
#[derive(Debug, Clone)]
pub struct SlcfFit<T> {
    /// `(β₁, β₂…, ρ)`.
    pub theta: Vec<T>,
    /// Asymptotic variance of `√N_T (θ̂ − θ)`, split correction included.
    pub sigma: Matrix<T>,
    pub standard_errors: Vec<T>,
    pub ci95: Vec<(T, T)>,
    pub splits: Vec<SplitFit<T>>,
    pub correction: Matrix<T>,
    /// Partitions actually used (after any redraws).
    pub plan: CrossFitPlan,
    /// `N_T = Σ Tᵢ`.
    pub n_total: usize,
    pub names: Vec<String>,
    pub transform: TransformKind,
}

impl<T: Real> SlcfFit<T> {
    pub fn per_split_thetas(&self) -> Vec<Vec<T>> {
        self.splits.iter().map(|s| s.theta.clone()).collect()
    }

    pub fn beta1(&self) -> T {
        self.theta[0]
    }

    pub fn rho(&self) -> T {
        *self.theta.last().expect("non-empty theta")
    }

    /// Index of the control coefficient `ρ`.
    pub fn rho_index(&self) -> usize {
        self.theta.len() - 1
    }
}

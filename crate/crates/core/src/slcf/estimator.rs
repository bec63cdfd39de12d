use rayon::prelude::*;

use super::plan::{make_crossfit_plan, split_seed, CrossFitPlan};
use super::{Aggregate, SlcfConfig, SlcfFit};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::panel::{
    first_stage_design, transform_with, FirstStageDesign, PanelDataset, TransformedPanel,
};
use crate::regression::{self, MomentBlock};
use crate::rng::derive_seed;
use crate::scalar::Real;
use crate::super_learner::{fit_super_learner, FoldAssignment, SuperLearnerConfig};

/// Source of the first-stage control `τû`.
#[derive(Debug, Clone, Copy)]
pub enum Nuisance<'a, T> {
    /// Super learner fit on the training individuals of each fold.
    SuperLearner {
        design: &'a FirstStageDesign<T>,
        config: &'a SuperLearnerConfig,
    },
    /// Fixed per-individual controls (for example the true `τu`), one vector
    /// per transformed block.
    Oracle(&'a [Vec<T>]),
}

/// First-stage output for one fold.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstStageFit<T> {
    /// Control values for each test individual, in the order of `test`.
    pub residuals: Vec<Vec<T>>,
    /// Individuals whose rows entered the nuisance fit.
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub sl_weights: Vec<T>,
    pub sl_cv_risks: Vec<T>,
    pub sl_degenerate: bool,
}

/// Per-fold diagnostics kept in the fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldFit<T> {
    pub fold: usize,
    pub theta: Vec<T>,
    /// `Σ Tᵢ` over the fold's individuals.
    pub n_obs: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub sl_weights: Vec<T>,
    pub sl_cv_risks: Vec<T>,
    pub sl_degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitFit<T> {
    /// Mean of the fold estimates.
    pub theta: Vec<T>,
    /// Cluster sandwich of this split evaluated at `theta`.
    pub sigma: Matrix<T>,
    pub folds: Vec<FoldFit<T>>,
    /// True when the original partition was degenerate and a redraw was used.
    pub resampled: bool,
}

/// Residuals `τx₁ − ĝ` on `test`, with `ĝ` learned on `train` only.
pub fn first_stage_residuals<T: Real>(
    nuisance: &Nuisance<'_, T>,
    train: &[usize],
    test: &[usize],
    seed: u64,
) -> Result<FirstStageFit<T>> {
    if test.is_empty() || train.is_empty() {
        return Err(Error::InvalidInput(
            "cross-fitting fold or its complement is empty".into(),
        ));
    }
    match nuisance {
        Nuisance::Oracle(controls) => {
            let residuals = test
                .iter()
                .map(|&i| {
                    controls.get(i).cloned().ok_or_else(|| {
                        Error::Dimension(format!("no oracle control for individual {i}"))
                    })
                })
                .collect::<Result<_>>()?;
            Ok(FirstStageFit {
                residuals,
                train: train.to_vec(),
                test: test.to_vec(),
                sl_weights: Vec::new(),
                sl_cv_risks: Vec::new(),
                sl_degenerate: false,
            })
        }
        Nuisance::SuperLearner { design, config } => {
            let train_rows = design.rows_of(train);
            let groups = design.groups_of(&train_rows);
            let x = design.features.select_rows(&train_rows);
            let y: Vec<T> = train_rows.iter().map(|&r| design.target[r]).collect();
            let model = fit_super_learner(&x, &y, Some(&groups), config, seed)?;

            let test_rows = design.rows_of(test);
            let pred = model.predict(&design.features.select_rows(&test_rows))?;
            let mut residuals = Vec::with_capacity(test.len());
            let mut pos = 0;
            for &i in test {
                let len = design.block_rows[i].len();
                let rows = &test_rows[pos..pos + len];
                residuals.push(
                    rows.iter()
                        .zip(&pred[pos..pos + len])
                        .map(|(&r, &p)| design.target[r] - p)
                        .collect(),
                );
                pos += len;
            }
            Ok(FirstStageFit {
                residuals,
                train: train.to_vec(),
                test: test.to_vec(),
                sl_weights: model.weights().to_vec(),
                sl_cv_risks: model.cv_risks().to_vec(),
                sl_degenerate: model.degenerate(),
            })
        }
    }
}

/// Moment blocks `(τyᵢ, H̃ᵢ = [τx₁ᵢ, τX̃ᵢ, τûᵢ], Ṽᵢ⁻¹)` for the given individuals.
pub(crate) fn control_blocks<T: Real>(
    tp: &TransformedPanel<T>,
    individuals: &[usize],
    controls: &[Vec<T>],
) -> Result<Vec<MomentBlock<T>>> {
    individuals
        .iter()
        .zip(controls)
        .map(|(&i, u)| {
            let b = &tp.blocks[i];
            if u.len() != b.rows() {
                return Err(Error::Dimension(format!(
                    "control of length {} for a block of {} rows",
                    u.len(),
                    b.rows()
                )));
            }
            let h = Matrix::hstack(&[
                &Matrix::column_vector(&b.tx1),
                &b.tx_exog,
                &Matrix::column_vector(u),
            ])?;
            MomentBlock::gls(h, b.ty.clone(), &b.weight)
        })
        .collect()
}

/// `θ̂ = (Σ H̃ᵢ'WᵢH̃ᵢ)⁻¹ Σ H̃ᵢ'Wᵢτyᵢ`.
pub fn second_stage<T: Real>(blocks: &[MomentBlock<T>], names: &[String]) -> Result<Vec<T>> {
    regression::solve_moments(blocks, names)
}

/// Per-split sandwich `J⁻¹ M J⁻¹`.
///
/// `J` averages the fold breads `Σ H̃'WH̃ / n_b`; `M` sums the cluster score
/// outer products over all folds at `theta`, scaled by `n_total`.
pub fn variance_estimate<T: Real>(
    fold_blocks: &[Vec<MomentBlock<T>>],
    fold_n: &[usize],
    theta: &[T],
    n_total: usize,
) -> Result<Matrix<T>> {
    if fold_blocks.is_empty() || fold_blocks.len() != fold_n.len() {
        return Err(Error::Dimension(
            "fold blocks and fold sizes disagree".into(),
        ));
    }
    let k = theta.len();
    let nt = T::from_usize_lossy(n_total);
    let mut j = Matrix::zeros(k, k);
    let mut m = Matrix::zeros(k, k);
    for (blocks, &n) in fold_blocks.iter().zip(fold_n) {
        j = j.add(&regression::bread(blocks, T::from_usize_lossy(n))?)?;
        m = m.add(&regression::meat(blocks, theta, nt)?)?;
    }
    let j = j.scale(T::one() / T::from_usize_lossy(fold_blocks.len()));
    regression::sandwich_from_parts(&j, &m)
}

/// `C = (1/SS) Σ (θ̂_ss − θ̂)(θ̂_ss − θ̂)'`.
pub fn split_correction<T: Real>(per_split: &[Vec<T>], theta: &[T]) -> Matrix<T> {
    let k = theta.len();
    let mut c = Matrix::zeros(k, k);
    if per_split.is_empty() {
        return c;
    }
    for t in per_split {
        for a in 0..k {
            for b in 0..k {
                c[(a, b)] = c[(a, b)] + (t[a] - theta[a]) * (t[b] - theta[b]);
            }
        }
    }
    c.scale(T::one() / T::from_usize_lossy(per_split.len()))
}

fn coordinatewise<T: Real>(rows: &[Vec<T>], aggregate: Aggregate) -> Vec<T> {
    let k = rows[0].len();
    (0..k)
        .map(|j| {
            let mut col: Vec<T> = rows.iter().map(|r| r[j]).collect();
            match aggregate {
                Aggregate::Mean => crate::scalar::mean(&col),
                Aggregate::Median => {
                    col.sort_by(|a, b| a.partial_cmp(b).expect("finite estimates"));
                    let n = col.len();
                    if n % 2 == 1 {
                        col[n / 2]
                    } else {
                        (col[n / 2 - 1] + col[n / 2]) * T::lit(0.5)
                    }
                }
            }
        })
        .collect()
}

fn sl_seed(seed: u64, split: usize, fold: usize) -> u64 {
    derive_seed(derive_seed(derive_seed(seed, 1), split as u64), fold as u64)
}

fn run_split<T: Real>(
    tp: &TransformedPanel<T>,
    names: &[String],
    nuisance: &Nuisance<'_, T>,
    folds: &FoldAssignment,
    split: usize,
    seed: u64,
) -> Result<SplitFit<T>> {
    let n = tp.blocks.len();
    let k = folds.k();
    let mut fold_blocks = Vec::with_capacity(k);
    let mut fold_n = Vec::with_capacity(k);
    let mut fold_fits = Vec::with_capacity(k);
    for b in 0..k {
        let test = folds.members(b);
        let train: Vec<usize> = if k == 1 {
            test.clone()
        } else {
            (0..n).filter(|&i| folds.fold_of(i) != b).collect()
        };
        let fs = first_stage_residuals(nuisance, &train, &test, sl_seed(seed, split, b))?;
        let blocks = control_blocks(tp, &fs.test, &fs.residuals)?;
        let theta = second_stage(&blocks, names)?;
        let n_obs = test.iter().map(|&i| tp.blocks[i].periods).sum();
        fold_fits.push(FoldFit {
            fold: b,
            theta,
            n_obs,
            train: fs.train,
            test: fs.test,
            sl_weights: fs.sl_weights,
            sl_cv_risks: fs.sl_cv_risks,
            sl_degenerate: fs.sl_degenerate,
        });
        fold_blocks.push(blocks);
        fold_n.push(n_obs);
    }
    let thetas: Vec<Vec<T>> = fold_fits.iter().map(|f| f.theta.clone()).collect();
    let theta = coordinatewise(&thetas, Aggregate::Mean);
    let sigma = variance_estimate(&fold_blocks, &fold_n, &theta, tp.total_obs())?;
    Ok(SplitFit {
        theta,
        sigma,
        folds: fold_fits,
        resampled: false,
    })
}

/// Full estimator on a raw panel.
pub fn slcf_estimate<T: Real>(data: &PanelDataset<T>, config: &SlcfConfig) -> Result<SlcfFit<T>> {
    let tp = transform_with(data, config.transform, config.weighting)?;
    let design = first_stage_design(data, config.transform, config.design)?;
    let mut names = data.regressor_names();
    names.push("rho".into());
    let nuisance = Nuisance::SuperLearner {
        design: &design,
        config: &config.super_learner,
    };
    slcf_estimate_with(&tp, &names, &nuisance, config)
}

/// Estimator on an already transformed panel with an explicit nuisance source.
///
/// `names` labels `(β₁, β₂…, ρ)`.
pub fn slcf_estimate_with<T: Real>(
    tp: &TransformedPanel<T>,
    names: &[String],
    nuisance: &Nuisance<'_, T>,
    config: &SlcfConfig,
) -> Result<SlcfFit<T>> {
    if config.splits == 0 {
        return Err(Error::InvalidInput("need at least one sample split".into()));
    }
    if tp.blocks.is_empty() {
        return Err(Error::InvalidInput("empty panel".into()));
    }
    let n = tp.blocks.len();
    let plan_seed = derive_seed(config.seed, 0);
    let plan = if config.cross_fit {
        make_crossfit_plan(n, config.folds, config.splits, plan_seed)?
    } else {
        CrossFitPlan::full_sample(n, config.splits, plan_seed)
    };

    let results: Vec<(SplitFit<T>, Option<FoldAssignment>)> = (0..config.splits)
        .into_par_iter()
        .map(
            |s| match run_split(tp, names, nuisance, plan.split(s), s, config.seed) {
                Err(e) if e.is_numeric() && config.cross_fit => {
                    let redraw = crate::super_learner::cv_folds(
                        n,
                        config.folds,
                        split_seed(plan_seed, s, 1),
                    )?;
                    let mut fit = run_split(tp, names, nuisance, &redraw, s, config.seed)?;
                    fit.resampled = true;
                    Ok((fit, Some(redraw)))
                }
                other => other.map(|fit| (fit, None)),
            },
        )
        .collect::<Result<_>>()?;

    let mut plan = plan;
    let mut splits = Vec::with_capacity(results.len());
    for (s, (fit, redraw)) in results.into_iter().enumerate() {
        if let Some(folds) = redraw {
            plan.replace_split(s, folds);
        }
        splits.push(fit);
    }

    let per_split: Vec<Vec<T>> = splits.iter().map(|s| s.theta.clone()).collect();
    let theta = coordinatewise(&per_split, config.aggregate);
    let correction = split_correction(&per_split, &theta);
    let k = theta.len();
    let mut sigma = Matrix::zeros(k, k);
    for s in &splits {
        sigma = sigma.add(&s.sigma)?;
    }
    let sigma = sigma
        .scale(T::one() / T::from_usize_lossy(splits.len()))
        .add(&correction)?
        .symmetrize();
    let n_total = tp.total_obs();
    let standard_errors = regression::standard_errors(&sigma, n_total);
    let ci95 = regression::ci95(&theta, &standard_errors);
    Ok(SlcfFit {
        theta,
        sigma,
        standard_errors,
        ci95,
        splits,
        correction,
        plan,
        n_total,
        names: names.to_vec(),
        transform: tp.kind,
    })
}

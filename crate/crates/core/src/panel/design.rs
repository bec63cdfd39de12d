use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::transform::apply_vec;
use super::{PanelDataset, TransformKind};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{mean, Real};

/// Conditioning set for the within-transformed first stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WithinFeatures {
    /// `(x̃ᵢₜ, zᵢₜ, x̃̄ᵢ, z̄ᵢ)`; fixed width for unbalanced panels.
    #[default]
    Means,
    /// `(x̃ᵢₜ, zᵢₜ, x̃ᵢ₁…x̃ᵢT, zᵢ₁…zᵢT)`; balanced panels only.
    FullStack,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignOptions {
    pub within_features: WithinFeatures,
}

/// Feature matrix and target for learning `E[τx₁ | I_t]`.
///
/// Rows are grouped by individual in panel order and, within an individual,
/// follow the rows of the corresponding transformed block.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstStageDesign<T> {
    pub features: Matrix<T>,
    pub target: Vec<T>,
    /// `(individual, transformed row)` for every design row.
    pub index: Vec<(usize, usize)>,
    pub block_rows: Vec<Range<usize>>,
    pub feature_names: Vec<String>,
}

impl<T: Real> FirstStageDesign<T> {
    /// Design rows belonging to the given individuals, in the order given.
    pub fn rows_of(&self, individuals: &[usize]) -> Vec<usize> {
        individuals
            .iter()
            .flat_map(|&i| self.block_rows[i].clone())
            .collect()
    }

    /// Individual index of every row in `rows`.
    pub fn groups_of(&self, rows: &[usize]) -> Vec<usize> {
        rows.iter().map(|&r| self.index[r].0).collect()
    }
}

pub fn first_stage_design<T: Real>(
    data: &PanelDataset<T>,
    kind: TransformKind,
    options: DesignOptions,
) -> Result<FirstStageDesign<T>> {
    let kx = data.n_exog();
    let kz = data.n_inst();
    let full_stack =
        kind == TransformKind::Within && options.within_features == WithinFeatures::FullStack;
    if full_stack && !data.is_balanced() {
        return Err(Error::InvalidInput(
            "full-stack within features require a balanced panel".into(),
        ));
    }
    let feature_names = feature_names(data, kind, full_stack);
    let width = feature_names.len();

    let mut rows = Vec::new();
    let mut target = Vec::new();
    let mut index = Vec::new();
    let mut block_rows = Vec::with_capacity(data.n());
    for (i, b) in data.individuals().iter().enumerate() {
        let start = target.len();
        let tx1 = apply_vec(kind, &b.x1);
        match kind {
            TransformKind::FirstDifference => {
                for (r, &tgt) in tx1.iter().enumerate() {
                    let (t, prev) = (r + 1, r);
                    let mut row = Vec::with_capacity(width);
                    row.extend_from_slice(b.x_exog.row(t));
                    row.extend_from_slice(b.x_exog.row(prev));
                    row.extend_from_slice(b.z.row(t));
                    row.extend_from_slice(b.z.row(prev));
                    rows.extend(row);
                    target.push(tgt);
                    index.push((i, r));
                }
            }
            TransformKind::Within => {
                let xbar: Vec<T> = (0..kx).map(|k| mean(&b.x_exog.column(k))).collect();
                let zbar: Vec<T> = (0..kz).map(|l| mean(&b.z.column(l))).collect();
                for (t, &tgt) in tx1.iter().enumerate() {
                    let mut row = Vec::with_capacity(width);
                    row.extend_from_slice(b.x_exog.row(t));
                    row.extend_from_slice(b.z.row(t));
                    if full_stack {
                        for s in 0..b.periods() {
                            row.extend_from_slice(b.x_exog.row(s));
                        }
                        for s in 0..b.periods() {
                            row.extend_from_slice(b.z.row(s));
                        }
                    } else {
                        row.extend_from_slice(&xbar);
                        row.extend_from_slice(&zbar);
                    }
                    rows.extend(row);
                    target.push(tgt);
                    index.push((i, t));
                }
            }
        }
        block_rows.push(start..target.len());
    }
    let n_rows = target.len();
    Ok(FirstStageDesign {
        features: Matrix::new(n_rows, width, rows)?,
        target,
        index,
        block_rows,
        feature_names,
    })
}

fn feature_names<T: Real>(
    data: &PanelDataset<T>,
    kind: TransformKind,
    full_stack: bool,
) -> Vec<String> {
    let ex = data.exog_names();
    let iv = data.inst_names();
    let with = |suffix: &str, names: &[String]| -> Vec<String> {
        names.iter().map(|n| format!("{n}{suffix}")).collect()
    };
    match kind {
        TransformKind::FirstDifference => [
            with("_t", ex),
            with("_lag", ex),
            with("_t", iv),
            with("_lag", iv),
        ]
        .concat(),
        TransformKind::Within if full_stack => {
            let t = data.individuals()[0].periods();
            let mut names = [with("_t", ex), with("_t", iv)].concat();
            for s in 1..=t {
                names.extend(with(&format!("_{s}"), ex));
            }
            for s in 1..=t {
                names.extend(with(&format!("_{s}"), iv));
            }
            names
        }
        TransformKind::Within => [
            with("_t", ex),
            with("_t", iv),
            with("_mean", ex),
            with("_mean", iv),
        ]
        .concat(),
    }
}

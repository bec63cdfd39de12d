use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{IndividualBlock, PanelDataset};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

/// Fixed-effect-removing transformation `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    /// `y_t − y_{t−1}`, maps `T` rows to `T − 1`.
    FirstDifference,
    /// `y_t − ȳ`, maps `T` rows to `T`.
    Within,
}

impl TransformKind {
    /// Rows left after transforming a block of `t` periods.
    pub fn output_rows(self, t: usize) -> usize {
        match self {
            TransformKind::FirstDifference => t.saturating_sub(1),
            TransformKind::Within => t,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TransformKind::FirstDifference => "FD",
            TransformKind::Within => "W",
        }
    }
}

/// Which matrix weights the second-stage moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// `Ṽᵢ⁻¹` from [`vtilde_matrix`].
    #[default]
    Vtilde,
    /// Identity (pooled OLS on the transformed data).
    Identity,
}

fn check_periods(t: usize) -> Result<()> {
    if t < 2 {
        return Err(Error::Dimension(format!(
            "transformation needs T >= 2, got {t}"
        )));
    }
    Ok(())
}

/// First-difference operator `D` of shape `(T−1) × T`; row `r` maps to `v[r+1] − v[r]`.
pub fn fd_matrix<T: Real>(t: usize) -> Result<Matrix<T>> {
    check_periods(t)?;
    Ok(Matrix::from_fn(t - 1, t, |r, c| {
        if c == r + 1 {
            T::one()
        } else if c == r {
            -T::one()
        } else {
            T::zero()
        }
    }))
}

/// Within operator `W = I − J/T`.
pub fn within_matrix<T: Real>(t: usize) -> Result<Matrix<T>> {
    check_periods(t)?;
    let inv_t = T::one() / T::from_usize_lossy(t);
    Ok(Matrix::from_fn(t, t, |r, c| {
        if r == c {
            T::one() - inv_t
        } else {
            -inv_t
        }
    }))
}

/// Weighting matrix `Ṽ`: `D Dᵀ` (tridiagonal 2/−1) for first differences,
/// the identity for the within transformation since `W Wᵀ = W` is singular.
pub fn vtilde_matrix<T: Real>(kind: TransformKind, t: usize) -> Result<Matrix<T>> {
    check_periods(t)?;
    Ok(match kind {
        TransformKind::FirstDifference => {
            let m = t - 1;
            Matrix::from_fn(m, m, |r, c| {
                if r == c {
                    T::lit(2.0)
                } else if r.abs_diff(c) == 1 {
                    -T::one()
                } else {
                    T::zero()
                }
            })
        }
        TransformKind::Within => Matrix::identity(t),
    })
}

pub(crate) fn apply_vec<T: Real>(kind: TransformKind, v: &[T]) -> Vec<T> {
    match kind {
        TransformKind::FirstDifference => v.windows(2).map(|w| w[1] - w[0]).collect(),
        TransformKind::Within => {
            let m = crate::scalar::mean(v);
            v.iter().map(|&x| x - m).collect()
        }
    }
}

pub(crate) fn apply_matrix<T: Real>(kind: TransformKind, m: &Matrix<T>) -> Matrix<T> {
    let cols: Vec<Vec<T>> = (0..m.cols())
        .map(|c| apply_vec(kind, &m.column(c)))
        .collect();
    let rows = kind.output_rows(m.rows());
    Matrix::from_fn(rows, m.cols(), |r, c| cols[c][r])
}

/// One individual after transformation.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedBlock<T> {
    pub ty: Vec<T>,
    pub tx1: Vec<T>,
    pub tx_exog: Matrix<T>,
    pub tz: Matrix<T>,
    /// `Ṽᵢ` for this block's row count.
    pub vtilde: Matrix<T>,
    /// Inverse of the weighting matrix the second stage uses for this block.
    pub weight: Matrix<T>,
    /// Original period count `Tᵢ`.
    pub periods: usize,
}

impl<T: Real> TransformedBlock<T> {
    #[inline]
    pub fn rows(&self) -> usize {
        self.ty.len()
    }
}

/// Panel after applying `τ` to every block.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedPanel<T> {
    pub blocks: Vec<TransformedBlock<T>>,
    pub kind: TransformKind,
    pub weighting: Weighting,
}

impl<T: Real> TransformedPanel<T> {
    pub fn total_obs(&self) -> usize {
        self.blocks.iter().map(|b| b.periods).sum()
    }

    pub fn total_rows(&self) -> usize {
        self.blocks.iter().map(TransformedBlock::rows).sum()
    }
}

/// Transforms with the default `Ṽ` weighting.
pub fn transform<T: Real>(
    data: &PanelDataset<T>,
    kind: TransformKind,
) -> Result<TransformedPanel<T>> {
    transform_with(data, kind, Weighting::Vtilde)
}

pub fn transform_with<T: Real>(
    data: &PanelDataset<T>,
    kind: TransformKind,
    weighting: Weighting,
) -> Result<TransformedPanel<T>> {
    let mut cache: HashMap<usize, (Matrix<T>, Matrix<T>)> = HashMap::new();
    let blocks = data
        .individuals()
        .iter()
        .map(|b| {
            check_periods(b.periods())?;
            if kind == TransformKind::FirstDifference {
                check_consecutive(b)?;
            }
            let t = b.periods();
            if let std::collections::hash_map::Entry::Vacant(e) = cache.entry(t) {
                let v = vtilde_matrix(kind, t)?;
                let w = match weighting {
                    Weighting::Vtilde => v.spd_inverse()?,
                    Weighting::Identity => Matrix::identity(kind.output_rows(t)),
                };
                e.insert((v, w));
            }
            let (v, w) = &cache[&t];
            Ok(TransformedBlock {
                ty: apply_vec(kind, &b.y),
                tx1: apply_vec(kind, &b.x1),
                tx_exog: apply_matrix(kind, &b.x_exog),
                tz: apply_matrix(kind, &b.z),
                vtilde: v.clone(),
                weight: w.clone(),
                periods: t,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TransformedPanel {
        blocks,
        kind,
        weighting,
    })
}

fn check_consecutive<T: Real>(b: &IndividualBlock<T>) -> Result<()> {
    if let Some(w) = b.times.windows(2).find(|w| w[1] != w[0] + 1) {
        return Err(Error::InvalidInput(format!(
            "individual `{}` has a gap between times {} and {}; first differences need consecutive periods",
            b.id, w[0], w[1]
        )));
    }
    Ok(())
}

//! Grouped panel observations and the fixed-effect-removing transformations.
//!
//! A [`PanelDataset`] holds one [`IndividualBlock`] per cross-sectional unit.
//! [`transform`] maps every block through either the first-difference or the
//! within operator, which annihilates additive individual effects, and
//! attaches the weighting matrix `Ṽᵢ` used by the second-stage moments.

mod csv;
mod design;
mod transform;

pub use self::csv::{load_csv, read_panel, write_panel, ColumnSchema};
pub use self::design::{first_stage_design, DesignOptions, FirstStageDesign, WithinFeatures};
pub use self::transform::{
    fd_matrix, transform, transform_with, vtilde_matrix, within_matrix, TransformKind,
    TransformedBlock, TransformedPanel, Weighting,
};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{all_finite, Real};

/// Default cap on periods per individual.
pub const DEFAULT_MAX_PERIODS: usize = 10_000;

/// Observations of one individual, rows ordered by time.
#[derive(Debug, Clone, PartialEq)]
pub struct IndividualBlock<T> {
    pub id: String,
    pub times: Vec<i64>,
    pub y: Vec<T>,
    pub x1: Vec<T>,
    /// `Tᵢ × (K−1)` exogenous regressors.
    pub x_exog: Matrix<T>,
    /// `Tᵢ × L` excluded instruments.
    pub z: Matrix<T>,
}

impl<T: Real> IndividualBlock<T> {
    /// Block with times `1..=Tᵢ`.
    pub fn new(
        id: impl Into<String>,
        y: Vec<T>,
        x1: Vec<T>,
        x_exog: Matrix<T>,
        z: Matrix<T>,
    ) -> Self {
        let times = (1..=y.len() as i64).collect();
        Self {
            id: id.into(),
            times,
            y,
            x1,
            x_exog,
            z,
        }
    }

    #[inline]
    pub fn periods(&self) -> usize {
        self.y.len()
    }

    fn check(&self, n_exog: usize, n_inst: usize, max_periods: usize) -> Result<()> {
        let t = self.periods();
        let id = &self.id;
        if t < 2 {
            return Err(Error::InvalidInput(format!(
                "individual `{id}` has T_i < 2 ({t} rows)"
            )));
        }
        if t > max_periods {
            return Err(Error::InvalidInput(format!(
                "individual `{id}` has {t} periods, more than the limit {max_periods}"
            )));
        }
        if self.x1.len() != t
            || self.times.len() != t
            || self.x_exog.rows() != t
            || self.z.rows() != t
        {
            return Err(Error::Dimension(format!(
                "individual `{id}` has inconsistent row counts"
            )));
        }
        if self.x_exog.cols() != n_exog || self.z.cols() != n_inst {
            return Err(Error::Dimension(format!(
                "individual `{id}` has {} exogenous and {} instrument columns, expected {n_exog} and {n_inst}",
                self.x_exog.cols(),
                self.z.cols()
            )));
        }
        if !(all_finite(&self.y)
            && all_finite(&self.x1)
            && self.x_exog.all_finite()
            && self.z.all_finite())
        {
            return Err(Error::NonFinite(format!("individual `{id}`")));
        }
        Ok(())
    }
}

/// Validated panel of individuals sharing one column layout.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelDataset<T> {
    individuals: Vec<IndividualBlock<T>>,
    exog_names: Vec<String>,
    inst_names: Vec<String>,
}

impl<T: Real> PanelDataset<T> {
    /// Validates blocks with default column names `x2, x3, …` and `z1, z2, …`.
    pub fn new(individuals: Vec<IndividualBlock<T>>) -> Result<Self> {
        let first = individuals
            .first()
            .ok_or_else(|| Error::InvalidInput("panel has no individuals".into()))?;
        let exog_names = (0..first.x_exog.cols())
            .map(|k| format!("x{}", k + 2))
            .collect();
        let inst_names = (0..first.z.cols()).map(|l| format!("z{}", l + 1)).collect();
        Self::with_names(individuals, exog_names, inst_names, DEFAULT_MAX_PERIODS)
    }

    pub fn with_names(
        individuals: Vec<IndividualBlock<T>>,
        exog_names: Vec<String>,
        inst_names: Vec<String>,
        max_periods: usize,
    ) -> Result<Self> {
        if individuals.is_empty() {
            return Err(Error::InvalidInput("panel has no individuals".into()));
        }
        if inst_names.is_empty() {
            return Err(Error::InvalidInput(
                "at least one instrument is required".into(),
            ));
        }
        for block in &individuals {
            block.check(exog_names.len(), inst_names.len(), max_periods)?;
        }
        Ok(Self {
            individuals,
            exog_names,
            inst_names,
        })
    }

    #[inline]
    pub fn individuals(&self) -> &[IndividualBlock<T>] {
        &self.individuals
    }

    /// Number of individuals `N`.
    #[inline]
    pub fn n(&self) -> usize {
        self.individuals.len()
    }

    /// `K − 1`.
    #[inline]
    pub fn n_exog(&self) -> usize {
        self.exog_names.len()
    }

    /// `L`.
    #[inline]
    pub fn n_inst(&self) -> usize {
        self.inst_names.len()
    }

    /// `N_T = Σ Tᵢ`.
    pub fn total_obs(&self) -> usize {
        self.individuals.iter().map(IndividualBlock::periods).sum()
    }

    pub fn exog_names(&self) -> &[String] {
        &self.exog_names
    }

    pub fn inst_names(&self) -> &[String] {
        &self.inst_names
    }

    pub fn is_balanced(&self) -> bool {
        let t0 = self.individuals[0].periods();
        self.individuals.iter().all(|b| b.periods() == t0)
    }

    /// Names of the structural regressors `[x1, x̃…]`.
    pub fn regressor_names(&self) -> Vec<String> {
        std::iter::once("x1".to_string())
            .chain(self.exog_names.iter().cloned())
            .collect()
    }

    /// Returns a copy with every block passed through `f`, revalidated.
    pub fn map_blocks(
        &self,
        f: impl Fn(&IndividualBlock<T>) -> IndividualBlock<T>,
    ) -> Result<Self> {
        Self::with_names(
            self.individuals.iter().map(f).collect(),
            self.exog_names.clone(),
            self.inst_names.clone(),
            usize::MAX,
        )
    }
}


#[cfg(test)]
mod tests {
    use super::test_support::small_panel;
    use super::*;

    #[test]
    fn rejects_short_and_nonfinite_blocks() {
        let short = IndividualBlock::new(
            "a",
            vec![1.0],
            vec![1.0],
            Matrix::zeros(1, 0),
            Matrix::zeros(1, 1),
        );
        assert!(matches!(
            PanelDataset::new(vec![short]),
            Err(Error::InvalidInput(_))
        ));

        let nan = IndividualBlock::new(
            "b",
            vec![1.0, f64::NAN],
            vec![1.0, 2.0],
            Matrix::zeros(2, 0),
            Matrix::zeros(2, 1),
        );
        assert!(matches!(
            PanelDataset::new(vec![nan]),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn rejects_inconsistent_columns() {
        let a = IndividualBlock::new(
            "a",
            vec![1.0, 2.0],
            vec![1.0, 2.0],
            Matrix::zeros(2, 1),
            Matrix::zeros(2, 1),
        );
        let b = IndividualBlock::new(
            "b",
            vec![1.0, 2.0],
            vec![1.0, 2.0],
            Matrix::zeros(2, 2),
            Matrix::zeros(2, 1),
        );
        assert!(matches!(
            PanelDataset::new(vec![a, b]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn rejects_blocks_longer_than_limit() {
        let a = IndividualBlock::new(
            "a",
            vec![0.0; 3],
            vec![0.0; 3],
            Matrix::zeros(3, 0),
            Matrix::zeros(3, 1),
        );
        let err = PanelDataset::with_names(vec![a], vec![], vec!["z".into()], 2).unwrap_err();
        assert!(err.to_string().contains("limit"));
    }

    #[test]
    fn counts() {
        let p = small_panel(4, 3);
        assert_eq!(p.n(), 4);
        assert_eq!(p.total_obs(), 12);
        assert_eq!(p.n_exog(), 1);
        assert_eq!(p.n_inst(), 1);
        assert!(p.is_balanced());
        assert_eq!(
            p.regressor_names(),
            vec!["x1".to_string(), "x2".to_string()]
        );
    }
}

//! Base learners for the first-stage regression.
//!
//! Every learner shares the same contract: [`fit`] on an `n × p` feature
//! matrix and a length-`n` target, then [`FittedLearner::predict`]. Fits are
//! deterministic given the spec's seed.

mod forest;
mod linear;
mod nnet;
mod scaling;

pub use forest::{Forest, Tree, TreeNode};
pub use nnet::Network;
pub use scaling::Scaler;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{all_finite, mean, Real};

/// Output activation of the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    #[default]
    Linear,
    /// Logistic output on a target min-max scaled to `[0, 1]`.
    Logistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeuralNetParams {
    #[serde(default = "NeuralNetParams::default_hidden")]
    pub hidden_units: usize,
    #[serde(default)]
    pub output: OutputActivation,
    #[serde(default = "NeuralNetParams::default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "NeuralNetParams::default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default)]
    pub l2: f64,
}

impl NeuralNetParams {
    fn default_hidden() -> usize {
        2
    }
    fn default_max_iter() -> usize {
        100
    }
    fn default_learning_rate() -> f64 {
        0.1
    }
}

impl Default for NeuralNetParams {
    fn default() -> Self {
        Self {
            hidden_units: 2,
            output: OutputActivation::Linear,
            max_iter: 100,
            learning_rate: 0.1,
            l2: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestParams {
    #[serde(default = "ForestParams::default_trees")]
    pub n_trees: usize,
    #[serde(default = "ForestParams::default_min_leaf")]
    pub min_leaf: usize,
    #[serde(default = "ForestParams::default_mtry")]
    pub mtry: usize,
}

impl ForestParams {
    fn default_trees() -> usize {
        100
    }
    fn default_min_leaf() -> usize {
        5
    }
    fn default_mtry() -> usize {
        2
    }
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            min_leaf: 5,
            mtry: 2,
        }
    }
}

/// Learner family and hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnerKind {
    Mean,
    Linear,
    NeuralNet(NeuralNetParams),
    RandomForest(ForestParams),
}

impl LearnerKind {
    pub fn name(&self) -> &'static str {
        match self {
            LearnerKind::Mean => "mean",
            LearnerKind::Linear => "linear",
            LearnerKind::NeuralNet(_) => "neural_net",
            LearnerKind::RandomForest(_) => "random_forest",
        }
    }

    /// Checks hyperparameters that do not depend on the data.
    pub fn validate(&self) -> Result<()> {
        match self {
            LearnerKind::NeuralNet(nn) => {
                if nn.hidden_units == 0 || nn.max_iter == 0 {
                    return Err(Error::InvalidInput(
                        "neural net needs hidden_units >= 1 and max_iter >= 1".into(),
                    ));
                }
                if !(nn.learning_rate > 0.0 && nn.learning_rate.is_finite())
                    || !(nn.l2 >= 0.0 && nn.l2.is_finite())
                {
                    return Err(Error::InvalidInput(
                        "neural net learning_rate must be positive and l2 non-negative".into(),
                    ));
                }
            }
            LearnerKind::RandomForest(rf) => {
                if rf.n_trees == 0 || rf.min_leaf == 0 || rf.mtry == 0 {
                    return Err(Error::InvalidInput(
                        "random forest needs n_trees, min_leaf and mtry >= 1".into(),
                    ));
                }
            }
            LearnerKind::Mean | LearnerKind::Linear => {}
        }
        Ok(())
    }

    /// Mean, linear model and the two-unit network.
    pub fn default_library() -> Vec<LearnerKind> {
        vec![
            LearnerKind::Linear,
            LearnerKind::NeuralNet(NeuralNetParams::default()),
            LearnerKind::Mean,
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerSpec {
    pub kind: LearnerKind,
    pub seed: u64,
}

impl LearnerSpec {
    pub fn new(kind: LearnerKind, seed: u64) -> Self {
        Self { kind, seed }
    }

    fn validate(&self, p: usize) -> Result<()> {
        self.kind.validate()?;
        if let LearnerKind::RandomForest(rf) = &self.kind {
            if rf.mtry > p {
                return Err(Error::InvalidInput(format!(
                    "random forest mtry = {} must lie in 1..={p}",
                    rf.mtry
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Model<T> {
    Mean(T),
    /// Coefficients on standardized features, standardized-target intercept.
    Linear {
        coef: Vec<T>,
        intercept: T,
    },
    Net(Network<T>),
    Forest(Forest<T>),
}

/// A trained learner.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedLearner<T> {
    spec: LearnerSpec,
    model: Model<T>,
    x_scaler: Scaler<T>,
    y_offset: T,
    y_scale: T,
}

pub fn fit<T: Real>(spec: &LearnerSpec, x: &Matrix<T>, y: &[T]) -> Result<FittedLearner<T>> {
    let (n, p) = (x.rows(), x.cols());
    if n == 0 {
        return Err(Error::InvalidInput(
            "cannot fit a learner on zero rows".into(),
        ));
    }
    if p == 0 {
        return Err(Error::InvalidInput(
            "learner needs at least one feature".into(),
        ));
    }
    if y.len() != n {
        return Err(Error::Dimension(format!(
            "{n} feature rows but {} targets",
            y.len()
        )));
    }
    if !x.all_finite() || !all_finite(y) {
        return Err(Error::NonFinite("learner training data".into()));
    }
    spec.validate(p)?;

    let fitted = match &spec.kind {
        LearnerKind::Mean => FittedLearner {
            spec: spec.clone(),
            model: Model::Mean(mean(y)),
            x_scaler: Scaler::identity(p),
            y_offset: T::zero(),
            y_scale: T::one(),
        },
        LearnerKind::Linear => {
            let x_scaler = Scaler::fit(x);
            let (y_offset, y_scale) = scaling::standardize_target(y);
            let xs = x_scaler.apply(x);
            let ys: Vec<T> = y.iter().map(|&v| (v - y_offset) / y_scale).collect();
            let (coef, intercept) = linear::least_squares(&xs, &ys)?;
            FittedLearner {
                spec: spec.clone(),
                model: Model::Linear { coef, intercept },
                x_scaler,
                y_offset,
                y_scale,
            }
        }
        LearnerKind::NeuralNet(params) => {
            let x_scaler = Scaler::fit(x);
            let (y_offset, y_scale) = match params.output {
                OutputActivation::Linear => scaling::standardize_target(y),
                OutputActivation::Logistic => scaling::unit_interval_target(y),
            };
            let xs = x_scaler.apply(x);
            let ys: Vec<T> = y.iter().map(|&v| (v - y_offset) / y_scale).collect();
            let net = nnet::train(params, &xs, &ys, spec.seed);
            FittedLearner {
                spec: spec.clone(),
                model: Model::Net(net),
                x_scaler,
                y_offset,
                y_scale,
            }
        }
        LearnerKind::RandomForest(params) => FittedLearner {
            spec: spec.clone(),
            model: Model::Forest(forest::grow(params, x, y, spec.seed)),
            x_scaler: Scaler::identity(p),
            y_offset: T::zero(),
            y_scale: T::one(),
        },
    };
    Ok(fitted)
}

impl<T: Real> FittedLearner<T> {
    pub fn spec(&self) -> &LearnerSpec {
        &self.spec
    }

    pub fn n_features(&self) -> usize {
        self.x_scaler.len()
    }

    pub fn scaler(&self) -> &Scaler<T> {
        &self.x_scaler
    }

    pub fn network(&self) -> Option<&Network<T>> {
        match &self.model {
            Model::Net(n) => Some(n),
            _ => None,
        }
    }

    pub fn forest(&self) -> Option<&Forest<T>> {
        match &self.model {
            Model::Forest(f) => Some(f),
            _ => None,
        }
    }

    /// Intercept and slopes on the original feature scale, for linear models.
    pub fn linear_coefficients(&self) -> Option<(T, Vec<T>)> {
        match &self.model {
            Model::Linear { coef, intercept } => {
                let mut b0 = self.y_offset + self.y_scale * *intercept;
                let slopes = coef
                    .iter()
                    .enumerate()
                    .map(|(j, &c)| {
                        let (m, s) = self.x_scaler.params(j);
                        b0 = b0 - self.y_scale * c * m / s;
                        self.y_scale * c / s
                    })
                    .collect();
                Some((b0, slopes))
            }
            _ => None,
        }
    }

    pub fn predict(&self, x: &Matrix<T>) -> Result<Vec<T>> {
        if x.cols() != self.n_features() {
            return Err(Error::Dimension(format!(
                "model trained on {} features, got {}",
                self.n_features(),
                x.cols()
            )));
        }
        Ok((0..x.rows()).map(|r| self.predict_row(x.row(r))).collect())
    }

    pub fn predict_row(&self, row: &[T]) -> T {
        match &self.model {
            Model::Mean(m) => *m,
            Model::Linear { coef, intercept } => {
                let mut acc = *intercept;
                for (j, (&c, &v)) in coef.iter().zip(row).enumerate() {
                    acc = acc + c * self.x_scaler.transform(j, v);
                }
                self.y_offset + self.y_scale * acc
            }
            Model::Net(net) => {
                let xs: Vec<T> = row
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| self.x_scaler.transform(j, v))
                    .collect();
                self.y_offset + self.y_scale * net.output(&xs)
            }
            Model::Forest(f) => f.predict_row(row),
        }
    }
}

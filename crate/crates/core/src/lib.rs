//! Panel-data estimation of a structural equation with one endogenous
//! regressor, using a cross-fitted super learner for the first stage and
//! its residual as a control function.
//!
//! The numerical core is generic over the scalar type ([`scalar::Real`]);
//! the aliases below fix it to `f64`, which is what the simulation driver
//! and the command-line front end use.
//!
//! ```
//! use slcf::panel::TransformKind;
//! use slcf::simulation::{gen_dgp1, DgpConfig};
//! use slcf::slcf::{slcf_estimate, SlcfConfig};
//!
//! let sim = gen_dgp1(&DgpConfig::new(2.0, 200, 2, 7)).unwrap();
//! let mut config = SlcfConfig::new(TransformKind::FirstDifference);
//! config.splits = 2;
//! let fit = slcf_estimate(&sim.data, &config).unwrap();
//! assert_eq!(fit.names, ["x1", "x2", "rho"]);
//! ```

pub mod baselines;
pub mod error;
pub mod learners;
pub mod linalg;
pub mod panel;
pub mod regression;
pub mod rng;
pub mod scalar;
pub mod simulation;
pub mod slcf;
pub mod super_learner;

pub use error::{Error, Result};

pub type Matrix = linalg::Matrix<f64>;
pub type PanelDataset = panel::PanelDataset<f64>;
pub type IndividualBlock = panel::IndividualBlock<f64>;
pub type TransformedPanel = panel::TransformedPanel<f64>;
pub type FirstStageDesign = panel::FirstStageDesign<f64>;
pub type FittedLearner = learners::FittedLearner<f64>;
pub type SuperLearnerModel = super_learner::SuperLearnerModel<f64>;
pub type MomentBlock = regression::MomentBlock<f64>;
pub type MomentFit = regression::MomentFit<f64>;
pub type SlcfFit = slcf::SlcfFit<f64>;
pub type SplitFit = slcf::SplitFit<f64>;
pub type FoldFit = slcf::FoldFit<f64>;
pub type OrthogonalityCheck = slcf::OrthogonalityCheck<f64>;
pub type BaselineFit = baselines::BaselineFit<f64>;

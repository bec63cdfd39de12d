use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dgp::{gen_dgp1, DgpConfig};
use crate::baselines::{naive_plugin_2sls, plugin_iv, w2sls, wols, PolynomialInstruments};
use crate::error::{Error, Result};
use crate::panel::{PanelDataset, TransformKind};
use crate::regression::Z95;
use crate::rng::derive_seed;
use crate::slcf::{slcf_estimate, SlcfConfig};

/// An estimator run on every replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EstimatorSpec {
    Wols,
    W2sls {
        degree: usize,
        #[serde(default)]
        interactions: bool,
    },
    Slcf {
        transform: TransformKind,
    },
    PluginIv {
        transform: TransformKind,
        #[serde(default = "default_true")]
        cross_fit: bool,
    },
    NaivePlugin2sls {
        transform: TransformKind,
        #[serde(default = "default_true")]
        cross_fit: bool,
    },
}

fn default_true() -> bool {
    true
}

impl EstimatorSpec {
    /// Short label used in result tables.
    pub fn label(&self) -> String {
        match self {
            EstimatorSpec::Wols => "WOLS".into(),
            EstimatorSpec::W2sls {
                degree: 1,
                interactions: false,
            } => "W2SLS".into(),
            EstimatorSpec::W2sls {
                degree,
                interactions,
            } => {
                format!(
                    "W2SLS_poly{degree}{}",
                    if *interactions { "_int" } else { "" }
                )
            }
            EstimatorSpec::Slcf { transform } => format!("{}CF", transform.label()),
            EstimatorSpec::PluginIv {
                transform,
                cross_fit,
            } => {
                format!(
                    "{}_plugin_IV{}",
                    transform.label(),
                    if *cross_fit { "" } else { "_nocf" }
                )
            }
            EstimatorSpec::NaivePlugin2sls {
                transform,
                cross_fit,
            } => {
                format!(
                    "{}_naive_2SLS{}",
                    transform.label(),
                    if *cross_fit { "" } else { "_nocf" }
                )
            }
        }
    }

    /// Whether the estimate carries a control coefficient `ρ`.
    pub fn has_control(&self) -> bool {
        matches!(self, EstimatorSpec::Slcf { .. })
    }

    /// The estimators compared in the coverage study.
    pub fn study_set() -> Vec<EstimatorSpec> {
        vec![
            EstimatorSpec::Wols,
            EstimatorSpec::W2sls {
                degree: 1,
                interactions: false,
            },
            EstimatorSpec::W2sls {
                degree: 5,
                interactions: false,
            },
            EstimatorSpec::Slcf {
                transform: TransformKind::FirstDifference,
            },
            EstimatorSpec::Slcf {
                transform: TransformKind::Within,
            },
        ]
    }
}

/// Coefficients of one estimator on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub names: Vec<String>,
    pub values: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub ci95: Vec<(f64, f64)>,
}

/// Runs `spec` on `data`; SLCF-type estimators take their settings from `base`.
pub fn run_estimator(
    spec: &EstimatorSpec,
    data: &PanelDataset<f64>,
    base: &SlcfConfig,
) -> Result<Estimate> {
    let with = |transform: TransformKind, cross_fit: bool| SlcfConfig {
        transform,
        cross_fit,
        ..base.clone()
    };
    let baseline = match spec {
        EstimatorSpec::Wols => wols(data)?,
        EstimatorSpec::W2sls {
            degree,
            interactions,
        } => w2sls(
            data,
            PolynomialInstruments {
                degree: *degree,
                interactions: *interactions,
            },
        )?,
        EstimatorSpec::PluginIv {
            transform,
            cross_fit,
        } => plugin_iv(data, &with(*transform, *cross_fit))?,
        EstimatorSpec::NaivePlugin2sls {
            transform,
            cross_fit,
        } => naive_plugin_2sls(data, &with(*transform, *cross_fit))?,
        EstimatorSpec::Slcf { transform } => {
            let fit = slcf_estimate(data, &with(*transform, base.cross_fit))?;
            return Ok(Estimate {
                names: fit.names,
                values: fit.theta,
                standard_errors: fit.standard_errors,
                ci95: fit.ci95,
            });
        }
    };
    Ok(Estimate {
        names: baseline.names,
        values: baseline.coefficients,
        standard_errors: baseline.standard_errors,
        ci95: baseline.ci95,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub dgp: DgpConfig,
    #[serde(default = "McConfig::default_replications")]
    pub replications: usize,
    #[serde(default = "EstimatorSpec::study_set")]
    pub estimators: Vec<EstimatorSpec>,
    /// Settings shared by the learned-first-stage estimators; the transform
    /// and cross-fitting flag come from each estimator entry.
    #[serde(default = "McConfig::default_slcf")]
    pub slcf: SlcfConfig,
    /// Values of `a` for a sweep; `dgp.a` is used when absent.
    #[serde(default)]
    pub a_grid: Option<Vec<f64>>,
}

impl McConfig {
    fn default_replications() -> usize {
        100
    }

    fn default_slcf() -> SlcfConfig {
        SlcfConfig::new(TransformKind::FirstDifference)
    }

    pub fn new(dgp: DgpConfig, replications: usize, estimators: Vec<EstimatorSpec>) -> Self {
        Self {
            dgp,
            replications,
            estimators,
            slcf: Self::default_slcf(),
            a_grid: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.dgp.validate()?;
        if self.replications < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 replications, got {}",
                self.replications
            )));
        }
        if self.estimators.is_empty() {
            return Err(Error::InvalidInput("estimator list is empty".into()));
        }
        if let Some(grid) = &self.a_grid {
            if grid.is_empty() {
                return Err(Error::InvalidInput("a_grid is empty".into()));
            }
        }
        Ok(())
    }

    /// Seed of replication `r`'s dataset.
    pub fn replication_seed(&self, r: usize) -> u64 {
        derive_seed(self.dgp.seed, r as u64)
    }
}

/// One row of the long-format per-replication output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McRecord {
    pub replication: usize,
    pub estimator: String,
    pub coefficient: String,
    pub estimate: f64,
    pub se: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McFailure {
    pub replication: usize,
    pub estimator: String,
    pub message: String,
}

/// Aggregate statistics of one estimator over the successful replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub estimator: String,
    pub n_ok: usize,
    pub n_failed: usize,
    pub mean_beta1: f64,
    /// Sample standard deviation (denominator `R − 1`).
    pub sd: f64,
    pub bias: f64,
    pub rmse: f64,
    /// Percentage of 95% intervals containing the true `β₁`.
    pub coverage: f64,
    pub mean_se: f64,
    pub mean_rho: Option<f64>,
    /// Percentage of replications rejecting `ρ = 0` at the 5% level.
    pub rho_rejection_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub a: f64,
    pub n: usize,
    pub t: usize,
    pub replications: usize,
    pub beta1: f64,
    pub summaries: Vec<EstimatorSummary>,
    pub records: Vec<McRecord>,
    pub failures: Vec<McFailure>,
}

impl McResult {
    pub fn summary(&self, estimator: &str) -> Option<&EstimatorSummary> {
        self.summaries.iter().find(|s| s.estimator == estimator)
    }

    /// `β₁` estimates of one estimator in replication order.
    pub fn beta1_estimates(&self, estimator: &str) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.estimator == estimator && r.coefficient == "x1")
            .map(|r| r.estimate)
            .collect()
    }
}

/// Runs every estimator on `R` independently seeded datasets.
pub fn run_monte_carlo(config: &McConfig) -> Result<McResult> {
    config.validate()?;
    let per_rep: Vec<Vec<std::result::Result<Estimate, String>>> = (0..config.replications)
        .into_par_iter()
        .map(|r| {
            let dgp = DgpConfig {
                seed: config.replication_seed(r),
                ..config.dgp.clone()
            };
            let base = SlcfConfig {
                seed: derive_seed(dgp.seed, 1),
                ..config.slcf.clone()
            };
            match gen_dgp1(&dgp) {
                Ok(sim) => config
                    .estimators
                    .iter()
                    .map(|e| run_estimator(e, &sim.data, &base).map_err(|err| err.to_string()))
                    .collect(),
                Err(err) => vec![Err(err.to_string()); config.estimators.len()],
            }
        })
        .collect();
    Ok(summarize(config, &per_rep))
}

fn summarize(
    config: &McConfig,
    per_rep: &[Vec<std::result::Result<Estimate, String>>],
) -> McResult {
    let beta1 = config.dgp.beta1;
    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut summaries = Vec::new();
    for (e, spec) in config.estimators.iter().enumerate() {
        let label = spec.label();
        let mut ok: Vec<&Estimate> = Vec::new();
        for (r, results) in per_rep.iter().enumerate() {
            match &results[e] {
                Ok(est) => {
                    for (j, name) in est.names.iter().enumerate() {
                        records.push(McRecord {
                            replication: r,
                            estimator: label.clone(),
                            coefficient: name.clone(),
                            estimate: est.values[j],
                            se: est.standard_errors[j],
                            ci_lo: est.ci95[j].0,
                            ci_hi: est.ci95[j].1,
                        });
                    }
                    ok.push(est);
                }
                Err(message) => failures.push(McFailure {
                    replication: r,
                    estimator: label.clone(),
                    message: message.clone(),
                }),
            }
        }
        summaries.push(EstimatorSummary::from_estimates(
            &label,
            spec.has_control(),
            &ok,
            per_rep.len() - ok.len(),
            beta1,
        ));
    }
    McResult {
        a: config.dgp.a,
        n: config.dgp.n,
        t: config.dgp.t,
        replications: config.replications,
        beta1,
        summaries,
        records,
        failures,
    }
}

impl EstimatorSummary {
    /// Statistics over successful estimates; `β₁` is the first coefficient and,
    /// when `has_control`, `ρ` the last.
    pub fn from_estimates(
        label: &str,
        has_control: bool,
        ok: &[&Estimate],
        n_failed: usize,
        beta1: f64,
    ) -> Self {
        let n = ok.len();
        let b: Vec<f64> = ok.iter().map(|e| e.values[0]).collect();
        let nf = n as f64;
        let mean = b.iter().sum::<f64>() / nf;
        let sd = if n > 1 {
            (b.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt()
        } else {
            0.0
        };
        let bias = mean - beta1;
        let rmse = (b.iter().map(|v| (v - beta1).powi(2)).sum::<f64>() / nf).sqrt();
        let covered = ok
            .iter()
            .filter(|e| e.ci95[0].0 <= beta1 && beta1 <= e.ci95[0].1)
            .count();
        let mean_se = ok.iter().map(|e| e.standard_errors[0]).sum::<f64>() / nf;
        let (mean_rho, rho_rejection_rate) = if has_control && n > 0 {
            let rhos: Vec<(f64, f64)> = ok
                .iter()
                .map(|e| {
                    (
                        *e.values.last().unwrap(),
                        *e.standard_errors.last().unwrap(),
                    )
                })
                .collect();
            let mean_rho = rhos.iter().map(|r| r.0).sum::<f64>() / nf;
            let rejected = rhos.iter().filter(|(r, se)| (r / se).abs() > Z95).count();
            (Some(mean_rho), Some(100.0 * rejected as f64 / nf))
        } else {
            (None, None)
        };
        EstimatorSummary {
            estimator: label.to_string(),
            n_ok: n,
            n_failed,
            mean_beta1: mean,
            sd,
            bias,
            rmse,
            coverage: 100.0 * covered as f64 / nf,
            mean_se,
            mean_rho,
            rho_rejection_rate,
        }
    }
}

/// One Monte Carlo study per grid value of `a`, all with the same seeds.
pub fn sweep_a(config: &McConfig) -> Result<Vec<McResult>> {
    let grid = config
        .a_grid
        .clone()
        .ok_or_else(|| Error::InvalidInput("a_grid is required for a sweep".into()))?;
    if grid.is_empty() {
        return Err(Error::InvalidInput("a_grid is empty".into()));
    }
    grid.iter()
        .map(|&a| {
            let cfg = McConfig {
                dgp: DgpConfig {
                    a,
                    ..config.dgp.clone()
                },
                a_grid: None,
                ..config.clone()
            };
            run_monte_carlo(&cfg)
        })
        .collect()
}

/// Plot-ready row: mean `β₁` of one estimator at one grid value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub a: f64,
    pub estimator: String,
    pub mean_beta1: f64,
    pub sd: f64,
    pub coverage: f64,
    pub n_ok: usize,
}

pub fn sweep_points(results: &[McResult]) -> Vec<SweepPoint> {
    results
        .iter()
        .flat_map(|r| {
            r.summaries.iter().map(move |s| SweepPoint {
                a: r.a,
                estimator: s.estimator.clone(),
                mean_beta1: s.mean_beta1,
                sd: s.sd,
                coverage: s.coverage,
                n_ok: s.n_ok,
            })
        })
        .collect()
}

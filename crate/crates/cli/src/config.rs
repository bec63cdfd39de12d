//! Run configuration: one JSON file with a section per concern, checked in
//! full before any data is read or any estimator runs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use slcf::panel::{ColumnSchema, TransformKind};
use slcf::simulation::{DgpConfig, EstimatorSpec, McConfig};
use slcf::slcf::SlcfConfig;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub data: Option<DataSection>,
    #[serde(default)]
    pub dgp: Option<DgpConfig>,
    #[serde(default)]
    pub slcf: SlcfConfig,
    /// Estimators for `simulate` and `compare`; each command has its own default.
    #[serde(default)]
    pub estimators: Option<Vec<EstimatorSpec>>,
    #[serde(default)]
    pub monte_carlo: MonteCarloSection,
    #[serde(default)]
    pub compare: CompareSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    /// CSV file; relative paths are resolved against the config file's directory.
    pub path: PathBuf,
    pub schema: ColumnSchema,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSection {
    #[serde(default = "MonteCarloSection::default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub a_grid: Option<Vec<f64>>,
}

impl MonteCarloSection {
    fn default_replications() -> usize {
        100
    }
}

impl Default for MonteCarloSection {
    fn default() -> Self {
        Self {
            replications: Self::default_replications(),
            a_grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    /// Pairs whose `|Δβ̂₁|` exceeds this are flagged as non-equivalent.
    #[serde(default = "CompareSection::default_tol")]
    pub equivalence_tol: f64,
}

impl CompareSection {
    fn default_tol() -> f64 {
        1e-6
    }
}

impl Default for CompareSection {
    fn default() -> Self {
        Self {
            equivalence_tol: Self::default_tol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub transform: Option<TransformKind>,
}

/// Where the input panel comes from in `compare`.
#[derive(Debug, Clone)]
pub enum Source<'a> {
    Csv(&'a DataSection),
    Simulated(&'a DgpConfig),
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        if let Some(data) = &mut cfg.data {
            if data.path.is_relative() {
                let base = path.parent().unwrap_or_else(|| Path::new(""));
                data.path = base.join(&data.path);
            }
        }
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Applies flag overrides. `--seed` seeds both the SLCF plan and the
    /// simulated data.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.slcf.seed = seed;
            if let Some(dgp) = &mut self.dgp {
                dgp.seed = seed;
            }
        }
        if let Some(dir) = &o.out {
            self.output.dir = Some(dir.clone());
        }
        if let Some(t) = o.transform {
            self.slcf.transform = t;
            if let Some(list) = &mut self.estimators {
                list.retain(|e| transform_of(e).is_none_or(|k| k == t));
            }
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.output
            .dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("slcf-out"))
    }

    pub fn validate_estimate(&self) -> CliResult<&DataSection> {
        let data = self
            .data
            .as_ref()
            .ok_or_else(|| CliError::Config("`estimate` needs a `data` section".into()))?;
        self.slcf.validate().map_err(config)?;
        Ok(data)
    }

    /// Builds the Monte Carlo study, with the transform filter applied.
    pub fn validate_simulate(&self, transform: Option<TransformKind>) -> CliResult<McConfig> {
        let dgp = self
            .dgp
            .as_ref()
            .ok_or_else(|| CliError::Config("`simulate` needs a `dgp` section".into()))?;
        let mut estimators = self
            .estimators
            .clone()
            .unwrap_or_else(EstimatorSpec::study_set);
        if let Some(t) = transform {
            estimators.retain(|e| transform_of(e).is_none_or(|k| k == t));
        }
        let mc = McConfig {
            dgp: dgp.clone(),
            replications: self.monte_carlo.replications,
            estimators,
            slcf: self.slcf.clone(),
            a_grid: Some(
                self.monte_carlo
                    .a_grid
                    .clone()
                    .unwrap_or_else(|| vec![dgp.a]),
            ),
        };
        mc.validate().map_err(config)?;
        for &a in mc.a_grid.iter().flatten() {
            DgpConfig { a, ..dgp.clone() }.validate().map_err(config)?;
        }
        self.slcf.validate().map_err(config)?;
        Ok(mc)
    }

    pub fn validate_compare(
        &self,
        transform: Option<TransformKind>,
    ) -> CliResult<(Source<'_>, Vec<EstimatorSpec>)> {
        let source = match (&self.data, &self.dgp) {
            (Some(d), None) => Source::Csv(d),
            (None, Some(g)) => {
                g.validate().map_err(config)?;
                Source::Simulated(g)
            }
            _ => {
                return Err(CliError::Config(
                    "`compare` needs exactly one of `data` and `dgp`".into(),
                ))
            }
        };
        let mut estimators = self.estimators.clone().unwrap_or_else(compare_set);
        if let Some(t) = transform {
            estimators.retain(|e| transform_of(e).is_none_or(|k| k == t));
        }
        if estimators.is_empty() {
            return Err(CliError::Config("estimator list is empty".into()));
        }
        let tol = self.compare.equivalence_tol;
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::Config(format!(
                "equivalence_tol must be positive, got {tol}"
            )));
        }
        self.slcf.validate().map_err(config)?;
        Ok((source, estimators))
    }
}

fn config(e: slcf::Error) -> CliError {
    CliError::Config(e.to_string())
}

/// Transform used by a learned-first-stage estimator; `None` for the
/// within-estimated baselines.
pub fn transform_of(spec: &EstimatorSpec) -> Option<TransformKind> {
    match spec {
        EstimatorSpec::Wols | EstimatorSpec::W2sls { .. } => None,
        EstimatorSpec::Slcf { transform }
        | EstimatorSpec::PluginIv { transform, .. }
        | EstimatorSpec::NaivePlugin2sls { transform, .. } => Some(*transform),
    }
}

/// Default estimators for `compare`.
pub fn compare_set() -> Vec<EstimatorSpec> {
    use TransformKind::{FirstDifference as Fd, Within};
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
        EstimatorSpec::PluginIv {
            transform: Fd,
            cross_fit: true,
        },
        EstimatorSpec::PluginIv {
            transform: Within,
            cross_fit: true,
        },
        EstimatorSpec::NaivePlugin2sls {
            transform: Fd,
            cross_fit: true,
        },
        EstimatorSpec::Slcf { transform: Fd },
        EstimatorSpec::Slcf { transform: Within },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected_at_every_level() {
        assert!(RunConfig::from_json(r#"{"bogus": 1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"slcf": {"fold": 3}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"monte_carlo": {"reps": 3}}"#).is_err());
        assert!(RunConfig::from_json(
            r#"{"slcf": {"super_learner": {"library": [{"kind": "random_forest", "trees": 3}]}}}"#
        )
        .is_err());
        assert!(RunConfig::from_json(r#"{"slcf": {"design": {"within": "means"}}}"#).is_err());
    }

    #[test]
    fn defaults_fill_missing_sections() {
        let cfg = RunConfig::from_json("{}").unwrap();
        assert_eq!(cfg.slcf, SlcfConfig::default());
        assert_eq!(cfg.monte_carlo.replications, 100);
        assert_eq!(cfg.compare.equivalence_tol, 1e-6);
        assert!(cfg.validate_estimate().is_err());
        assert!(cfg.validate_compare(None).is_err());
    }

    #[test]
    fn transform_override_filters_learned_estimators() {
        let mut cfg = RunConfig::from_json(r#"{"dgp": {"a": 1.0, "n": 50}}"#).unwrap();
        cfg.estimators = Some(compare_set());
        cfg.apply(&Overrides {
            transform: Some(TransformKind::Within),
            seed: Some(9),
            ..Default::default()
        });
        let labels: Vec<String> = cfg.estimators.iter().flatten().map(|e| e.label()).collect();
        assert_eq!(
            labels,
            ["WOLS", "W2SLS", "W2SLS_poly5", "W_plugin_IV", "WCF"]
        );
        assert_eq!(cfg.dgp.as_ref().unwrap().seed, 9);
        assert_eq!(cfg.slcf.seed, 9);
    }

    #[test]
    fn invalid_settings_are_config_errors() {
        let cfg = RunConfig::from_json(
            r#"{"data": {"path": "x.csv", "schema": {"y": "y", "x1": "x1", "instruments": ["z"]}},
                "slcf": {"folds": 1}}"#,
        )
        .unwrap();
        assert_eq!(cfg.validate_estimate().unwrap_err().exit_code(), 2);
        let cfg =
            RunConfig::from_json(r#"{"dgp": {"a": 1.0, "n": 50}, "estimators": []}"#).unwrap();
        assert_eq!(cfg.validate_compare(None).unwrap_err().exit_code(), 2);
        assert_eq!(cfg.validate_simulate(None).unwrap_err().exit_code(), 2);
        let cfg = RunConfig::from_json(
            r#"{"dgp": {"a": 1.0, "n": 50}, "monte_carlo": {"a_grid": [1.0, -2.0]}}"#,
        )
        .unwrap();
        assert!(cfg.validate_simulate(None).is_err());
    }
}

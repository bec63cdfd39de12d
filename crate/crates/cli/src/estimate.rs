use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use slcf::panel::{load_csv, TransformKind};
use slcf::slcf::{slcf_estimate, Aggregate};
use slcf::{Matrix, SlcfFit};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::format::{human, machine, write_csv, write_json, CsvRow, SCHEMA_VERSION};

pub const COEFFICIENTS_CSV: &str = "estimate_coefficients.csv";
pub const REPORT_JSON: &str = "estimate.json";

/// One coefficient with its spread over the sample splits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub schema_version: u32,
    pub coefficient: String,
    pub estimate: f64,
    pub se: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub split_min: f64,
    pub split_max: f64,
    pub split_sd: f64,
}

impl CsvRow for CoefficientRow {
    const HEADER: &'static [&'static str] = &[
        "schema_version",
        "coefficient",
        "estimate",
        "se",
        "ci_lo",
        "ci_hi",
        "split_min",
        "split_max",
        "split_sd",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.schema_version.to_string(),
            self.coefficient.clone(),
            machine(self.estimate),
            machine(self.se),
            machine(self.ci_lo),
            machine(self.ci_hi),
            machine(self.split_min),
            machine(self.split_max),
            machine(self.split_sd),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub n_obs: usize,
    pub theta: Vec<f64>,
    pub sl_weights: Vec<f64>,
    pub sl_cv_risks: Vec<f64>,
    pub sl_degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub split: usize,
    pub theta: Vec<f64>,
    pub resampled: bool,
    pub folds: Vec<FoldReport>,
}

/// Everything `estimate` knows about the fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub schema_version: u32,
    pub transform: TransformKind,
    pub n_individuals: usize,
    pub n_total: usize,
    pub folds: usize,
    pub splits: usize,
    pub aggregate: Aggregate,
    pub cross_fit: bool,
    pub seed: u64,
    pub learners: Vec<String>,
    pub coefficients: Vec<CoefficientRow>,
    pub sigma: Vec<Vec<f64>>,
    pub split_correction: Vec<Vec<f64>>,
    pub split_estimates: Vec<SplitReport>,
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|r| m.row(r).to_vec()).collect()
}

fn spread(v: &[f64]) -> (f64, f64, f64) {
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sd = if v.len() < 2 {
        0.0
    } else {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
    };
    (min, max, sd)
}

pub fn build_report(cfg: &RunConfig, fit: &SlcfFit, n_individuals: usize) -> EstimateReport {
    let per_split = fit.per_split_thetas();
    let coefficients = fit
        .names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let across: Vec<f64> = per_split.iter().map(|t| t[j]).collect();
            let (split_min, split_max, split_sd) = spread(&across);
            CoefficientRow {
                schema_version: SCHEMA_VERSION,
                coefficient: name.clone(),
                estimate: fit.theta[j],
                se: fit.standard_errors[j],
                ci_lo: fit.ci95[j].0,
                ci_hi: fit.ci95[j].1,
                split_min,
                split_max,
                split_sd,
            }
        })
        .collect();
    let split_estimates = fit
        .splits
        .iter()
        .enumerate()
        .map(|(s, sp)| SplitReport {
            split: s,
            theta: sp.theta.clone(),
            resampled: sp.resampled,
            folds: sp
                .folds
                .iter()
                .map(|f| FoldReport {
                    fold: f.fold,
                    n_obs: f.n_obs,
                    theta: f.theta.clone(),
                    sl_weights: f.sl_weights.clone(),
                    sl_cv_risks: f.sl_cv_risks.clone(),
                    sl_degenerate: f.sl_degenerate,
                })
                .collect(),
        })
        .collect();
    EstimateReport {
        schema_version: SCHEMA_VERSION,
        transform: fit.transform,
        n_individuals,
        n_total: fit.n_total,
        folds: fit.plan.n_folds(),
        splits: fit.splits.len(),
        aggregate: cfg.slcf.aggregate,
        cross_fit: cfg.slcf.cross_fit,
        seed: cfg.slcf.seed,
        learners: cfg
            .slcf
            .super_learner
            .library
            .iter()
            .map(|l| l.name().to_string())
            .collect(),
        coefficients,
        sigma: rows(&fit.sigma),
        split_correction: rows(&fit.correction),
        split_estimates,
    }
}

/// Runs SLCF on the configured CSV and writes the coefficient table and report.
pub fn run(cfg: &RunConfig) -> CliResult<(EstimateReport, Vec<PathBuf>)> {
    let data_cfg = cfg.validate_estimate()?;
    let data = load_csv::<f64>(&data_cfg.path, &data_cfg.schema).map_err(CliError::loading)?;
    let fit = slcf_estimate(&data, &cfg.slcf).map_err(CliError::estimation)?;
    let report = build_report(cfg, &fit, data.n());

    let dir = cfg.out_dir();
    create_dir(&dir)?;
    let csv_path = dir.join(COEFFICIENTS_CSV);
    let json_path = dir.join(REPORT_JSON);
    write_csv(&csv_path, &report.coefficients)?;
    write_json(&json_path, &report)?;
    Ok((report, vec![csv_path, json_path]))
}

pub fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))
}

/// Terminal summary of an estimate.
pub fn summary(r: &EstimateReport) -> String {
    let mut out = format!(
        "SLCF ({}), {} individuals, {} observations, {} split(s) x {} fold(s)\n\n",
        r.transform.label(),
        r.n_individuals,
        r.n_total,
        r.splits,
        r.folds
    );
    out += &format!(
        "{:<12} {:>11} {:>11} {:>11} {:>11} {:>11}\n",
        "coefficient", "estimate", "se", "ci_lo", "ci_hi", "split_sd"
    );
    for c in &r.coefficients {
        out += &format!(
            "{:<12} {:>11} {:>11} {:>11} {:>11} {:>11}\n",
            c.coefficient,
            human(c.estimate),
            human(c.se),
            human(c.ci_lo),
            human(c.ci_hi),
            human(c.split_sd)
        );
    }

    let folds: Vec<&FoldReport> = r.split_estimates.iter().flat_map(|s| &s.folds).collect();
    out += &format!(
        "\nFirst-stage super learner, averaged over {} fold fit(s):\n",
        folds.len()
    );
    out += &format!("{:<14} {:>9} {:>11}\n", "learner", "weight", "cv_risk");
    for (k, name) in r.learners.iter().enumerate() {
        let avg = |f: fn(&FoldReport) -> &Vec<f64>| {
            folds.iter().map(|fr| f(fr)[k]).sum::<f64>() / folds.len() as f64
        };
        out += &format!(
            "{:<14} {:>9} {:>11}\n",
            name,
            human(avg(|f| &f.sl_weights)),
            human(avg(|f| &f.sl_cv_risks))
        );
    }
    let degenerate = folds.iter().filter(|f| f.sl_degenerate).count();
    if degenerate > 0 {
        out += &format!(
            "{degenerate} fold fit(s) had indistinguishable learners and used uniform weights\n"
        );
    }
    out
}

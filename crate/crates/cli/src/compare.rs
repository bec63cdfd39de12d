use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use slcf::panel::{load_csv, TransformKind};
use slcf::simulation::{gen_dgp1, run_estimator, EstimatorSpec};

use crate::config::{transform_of, RunConfig, Source};
use crate::error::{CliError, CliResult};
use crate::estimate::create_dir;
use crate::format::{human, machine, opt, write_csv, write_json, CsvRow, SCHEMA_VERSION};

pub const TABLE_CSV: &str = "compare.csv";
pub const PAIRS_CSV: &str = "compare_pairs.csv";
pub const REPORT_JSON: &str = "compare.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Failed,
}

/// One estimator's `β̂₁`; numeric fields are empty when it failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub schema_version: u32,
    pub estimator: String,
    pub status: Status,
    pub beta1: Option<f64>,
    pub se: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub rho: Option<f64>,
    pub rho_se: Option<f64>,
    pub message: String,
}

impl CsvRow for CompareRow {
    const HEADER: &'static [&'static str] = &[
        "schema_version",
        "estimator",
        "status",
        "beta1",
        "se",
        "ci_lo",
        "ci_hi",
        "rho",
        "rho_se",
        "message",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.schema_version.to_string(),
            self.estimator.clone(),
            match self.status {
                Status::Ok => "ok".into(),
                Status::Failed => "failed".into(),
            },
            opt(self.beta1),
            opt(self.se),
            opt(self.ci_lo),
            opt(self.ci_hi),
            opt(self.rho),
            opt(self.rho_se),
            self.message.clone(),
        ]
    }
}

/// `|Δβ̂₁|` between two learned-first-stage estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub schema_version: u32,
    pub estimator_a: String,
    pub estimator_b: String,
    pub abs_diff_beta1: f64,
    pub non_equivalent: bool,
}

impl CsvRow for PairRow {
    const HEADER: &'static [&'static str] = &[
        "schema_version",
        "estimator_a",
        "estimator_b",
        "abs_diff_beta1",
        "non_equivalent",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.schema_version.to_string(),
            self.estimator_a.clone(),
            self.estimator_b.clone(),
            machine(self.abs_diff_beta1),
            self.non_equivalent.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub schema_version: u32,
    /// `csv` or `dgp`.
    pub source: String,
    pub n_individuals: usize,
    pub n_obs: usize,
    pub transform: TransformKind,
    pub equivalence_tol: f64,
    pub rows: Vec<CompareRow>,
    pub pairs: Vec<PairRow>,
}

pub fn run(
    cfg: &RunConfig,
    transform: Option<TransformKind>,
) -> CliResult<(CompareReport, Vec<PathBuf>)> {
    let (source, estimators) = cfg.validate_compare(transform)?;
    let (data, source_name) = match source {
        Source::Csv(d) => (
            load_csv::<f64>(&d.path, &d.schema).map_err(CliError::loading)?,
            "csv",
        ),
        Source::Simulated(g) => (gen_dgp1(g).map_err(CliError::loading)?.data, "dgp"),
    };

    let results: Vec<(EstimatorSpec, slcf::Result<_>)> = estimators
        .iter()
        .map(|e| (e.clone(), run_estimator(e, &data, &cfg.slcf)))
        .collect();
    if let Some(err) = results
        .iter()
        .all(|(_, r)| r.is_err())
        .then(|| results.iter().find_map(|(_, r)| r.as_ref().err()))
        .flatten()
    {
        return Err(CliError::estimation(err.clone()));
    }

    let rows: Vec<CompareRow> = results
        .iter()
        .map(|(spec, r)| match r {
            Ok(est) => {
                let rho = spec.has_control().then(|| est.values.len() - 1);
                CompareRow {
                    schema_version: SCHEMA_VERSION,
                    estimator: spec.label(),
                    status: Status::Ok,
                    beta1: Some(est.values[0]),
                    se: Some(est.standard_errors[0]),
                    ci_lo: Some(est.ci95[0].0),
                    ci_hi: Some(est.ci95[0].1),
                    rho: rho.map(|j| est.values[j]),
                    rho_se: rho.map(|j| est.standard_errors[j]),
                    message: String::new(),
                }
            }
            Err(e) => CompareRow {
                schema_version: SCHEMA_VERSION,
                estimator: spec.label(),
                status: Status::Failed,
                beta1: None,
                se: None,
                ci_lo: None,
                ci_hi: None,
                rho: None,
                rho_se: None,
                message: e.to_string(),
            },
        })
        .collect();

    let tol = cfg.compare.equivalence_tol;
    let learned: Vec<(String, f64)> = results
        .iter()
        .filter(|(spec, _)| transform_of(spec).is_some())
        .filter_map(|(spec, r)| r.as_ref().ok().map(|e| (spec.label(), e.values[0])))
        .collect();
    let mut pairs = Vec::new();
    for (i, (a, ba)) in learned.iter().enumerate() {
        for (b, bb) in &learned[i + 1..] {
            let d = (ba - bb).abs();
            pairs.push(PairRow {
                schema_version: SCHEMA_VERSION,
                estimator_a: a.clone(),
                estimator_b: b.clone(),
                abs_diff_beta1: d,
                non_equivalent: d > tol,
            });
        }
    }

    let report = CompareReport {
        schema_version: SCHEMA_VERSION,
        source: source_name.into(),
        n_individuals: data.n(),
        n_obs: data.total_obs(),
        transform: cfg.slcf.transform,
        equivalence_tol: tol,
        rows,
        pairs,
    };
    let dir = cfg.out_dir();
    create_dir(&dir)?;
    let files = vec![
        dir.join(TABLE_CSV),
        dir.join(PAIRS_CSV),
        dir.join(REPORT_JSON),
    ];
    write_csv(&files[0], &report.rows)?;
    write_csv(&files[1], &report.pairs)?;
    write_json(&files[2], &report)?;
    Ok((report, files))
}

pub fn summary(r: &CompareReport) -> String {
    let cell = |x: Option<f64>| x.map(human).unwrap_or_else(|| "-".into());
    let mut out = format!(
        "Estimator comparison on {} individuals ({} observations)\n\n{:<20} {:>10} {:>10} {:>10} {:>10} {:>10}\n",
        r.n_individuals, r.n_obs, "estimator", "beta1", "se", "ci_lo", "ci_hi", "rho"
    );
    for row in &r.rows {
        out += &format!(
            "{:<20} {:>10} {:>10} {:>10} {:>10} {:>10}",
            row.estimator,
            cell(row.beta1),
            cell(row.se),
            cell(row.ci_lo),
            cell(row.ci_hi),
            cell(row.rho)
        );
        if row.status == Status::Failed {
            out += &format!("  failed: {}", row.message);
        }
        out.push('\n');
    }
    let flagged: Vec<&PairRow> = r.pairs.iter().filter(|p| p.non_equivalent).collect();
    out += &format!(
        "\n{} of {} learned-estimator pair(s) differ by more than {}\n",
        flagged.len(),
        r.pairs.len(),
        human(r.equivalence_tol)
    );
    for p in flagged {
        out += &format!(
            "  {} vs {}: |diff beta1| = {}\n",
            p.estimator_a,
            p.estimator_b,
            human(p.abs_diff_beta1)
        );
    }
    out
}

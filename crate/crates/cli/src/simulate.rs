use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use slcf::panel::TransformKind;
use slcf::simulation::{sweep_a, sweep_points, EstimatorSummary, McFailure, McResult};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::estimate::create_dir;
use crate::format::{human, machine, write_csv, write_json, CsvRow, SCHEMA_VERSION};

pub const REPLICATIONS_CSV: &str = "mc_replications.csv";
pub const SUMMARY_JSON: &str = "mc_summary.json";
pub const PLOT_CSV: &str = "mc_plot.csv";

/// One coefficient of one estimator in one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRow {
    pub schema_version: u32,
    pub a: f64,
    pub replication: usize,
    pub estimator: String,
    pub coefficient: String,
    pub estimate: f64,
    pub se: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl CsvRow for ReplicationRow {
    const HEADER: &'static [&'static str] = &[
        "schema_version",
        "a",
        "replication",
        "estimator",
        "coefficient",
        "estimate",
        "se",
        "ci_lo",
        "ci_hi",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.schema_version.to_string(),
            machine(self.a),
            self.replication.to_string(),
            self.estimator.clone(),
            self.coefficient.clone(),
            machine(self.estimate),
            machine(self.se),
            machine(self.ci_lo),
            machine(self.ci_hi),
        ]
    }
}

/// Mean `β̂₁` of one estimator at one value of `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub schema_version: u32,
    pub a: f64,
    pub estimator: String,
    pub mean_beta1: f64,
    pub sd: f64,
    pub coverage: f64,
    pub n_ok: usize,
}

impl CsvRow for PlotRow {
    const HEADER: &'static [&'static str] = &[
        "schema_version",
        "a",
        "estimator",
        "mean_beta1",
        "sd",
        "coverage",
        "n_ok",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.schema_version.to_string(),
            machine(self.a),
            self.estimator.clone(),
            machine(self.mean_beta1),
            machine(self.sd),
            machine(self.coverage),
            self.n_ok.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub a: f64,
    pub summaries: Vec<EstimatorSummary>,
    pub failures: Vec<McFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub schema_version: u32,
    pub n: usize,
    pub t: usize,
    pub replications: usize,
    pub beta1: f64,
    pub seed: u64,
    pub estimators: Vec<String>,
    pub learners: Vec<String>,
    pub points: Vec<GridPoint>,
}

pub struct SimulateOutput {
    pub report: SimulateReport,
    pub replications: Vec<ReplicationRow>,
    pub plot: Vec<PlotRow>,
    pub files: Vec<PathBuf>,
}

pub fn run(cfg: &RunConfig, transform: Option<TransformKind>) -> CliResult<SimulateOutput> {
    let mc = cfg.validate_simulate(transform)?;
    let results: Vec<McResult> = sweep_a(&mc).map_err(CliError::estimation)?;

    let replications: Vec<ReplicationRow> = results
        .iter()
        .flat_map(|r| {
            r.records.iter().map(move |rec| ReplicationRow {
                schema_version: SCHEMA_VERSION,
                a: r.a,
                replication: rec.replication,
                estimator: rec.estimator.clone(),
                coefficient: rec.coefficient.clone(),
                estimate: rec.estimate,
                se: rec.se,
                ci_lo: rec.ci_lo,
                ci_hi: rec.ci_hi,
            })
        })
        .collect();
    let plot: Vec<PlotRow> = sweep_points(&results)
        .into_iter()
        .map(|p| PlotRow {
            schema_version: SCHEMA_VERSION,
            a: p.a,
            estimator: p.estimator,
            mean_beta1: p.mean_beta1,
            sd: p.sd,
            coverage: p.coverage,
            n_ok: p.n_ok,
        })
        .collect();
    let report = SimulateReport {
        schema_version: SCHEMA_VERSION,
        n: mc.dgp.n,
        t: mc.dgp.t,
        replications: mc.replications,
        beta1: mc.dgp.beta1,
        seed: mc.dgp.seed,
        estimators: mc.estimators.iter().map(|e| e.label()).collect(),
        learners: mc
            .slcf
            .super_learner
            .library
            .iter()
            .map(|l| l.name().to_string())
            .collect(),
        points: results
            .into_iter()
            .map(|r| GridPoint {
                a: r.a,
                summaries: r.summaries,
                failures: r.failures,
            })
            .collect(),
    };

    let dir = cfg.out_dir();
    create_dir(&dir)?;
    let files = vec![
        dir.join(REPLICATIONS_CSV),
        dir.join(SUMMARY_JSON),
        dir.join(PLOT_CSV),
    ];
    write_csv(&files[0], &replications)?;
    write_json(&files[1], &report)?;
    write_csv(&files[2], &plot)?;
    Ok(SimulateOutput {
        report,
        replications,
        plot,
        files,
    })
}

pub fn summary(r: &SimulateReport) -> String {
    let mut out = format!(
        "Monte Carlo: N = {}, T = {}, R = {}, true beta1 = {}\n",
        r.n,
        r.t,
        r.replications,
        human(r.beta1)
    );
    for p in &r.points {
        out += &format!(
            "\na = {}\n{:<14} {:>5} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}\n",
            human(p.a),
            "estimator",
            "ok",
            "mean",
            "bias",
            "sd",
            "rmse",
            "mean_se",
            "cover%"
        );
        for s in &p.summaries {
            out += &format!(
                "{:<14} {:>5} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}\n",
                s.estimator,
                s.n_ok,
                human(s.mean_beta1),
                human(s.bias),
                human(s.sd),
                human(s.rmse),
                human(s.mean_se),
                human(s.coverage)
            );
        }
        if !p.failures.is_empty() {
            out += &format!(
                "{} estimator run(s) failed; see {SUMMARY_JSON}\n",
                p.failures.len()
            );
        }
    }
    out
}

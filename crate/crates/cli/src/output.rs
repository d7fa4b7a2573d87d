//! JSON-lines and CSV sinks.
//!
//! CSV rows are flat projections of the JSON records. Floats go through the
//! same shortest round-trip formatting in both, so the numbers agree exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use qlsearch::phase::{PolicyKind, PolicySpec};
use serde::Serialize;

use crate::args::Format;
use crate::config::ExperimentConfig;
use crate::CliResult;

/// A record with a JSON form and a flat CSV row.
pub trait Record: Serialize {
    type Row: Serialize;
    fn row(&self) -> Self::Row;
}

pub enum Sink<'a> {
    Jsonl(Box<dyn Write + 'a>),
    Csv(Box<csv::Writer<Box<dyn Write + 'a>>>),
}

impl<'a> Sink<'a> {
    pub fn new(format: Format, out: Option<&Path>, stdout: &'a mut dyn Write) -> CliResult<Self> {
        let writer: Box<dyn Write + 'a> = match out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(stdout),
        };
        Ok(match format {
            Format::Jsonl => Sink::Jsonl(writer),
            Format::Csv => Sink::Csv(Box::new(csv::Writer::from_writer(writer))),
        })
    }

    pub fn emit<R: Record>(&mut self, record: &R) -> CliResult<()> {
        match self {
            Sink::Jsonl(w) => {
                serde_json::to_writer(&mut *w, record)?;
                w.write_all(b"\n")?;
            }
            Sink::Csv(w) => w.serialize(record.row())?,
        }
        Ok(())
    }

    pub fn finish(self) -> CliResult<()> {
        match self {
            Sink::Jsonl(mut w) => w.flush()?,
            Sink::Csv(mut w) => w.flush()?,
        }
        Ok(())
    }
}

/// `;`-joined numbers with JSON float formatting; empty for missing values.
pub fn join_floats<'a>(values: impl IntoIterator<Item = &'a Option<f64>>) -> String {
    values
        .into_iter()
        .map(|v| v.map(|x| serde_json::to_string(&x).unwrap_or_default()).unwrap_or_default())
        .collect::<Vec<_>>()
        .join(";")
}

fn policy_columns(policy: &PolicySpec) -> (String, Option<String>, Option<usize>) {
    match policy.kind {
        PolicyKind::SimpleThreshold { c_start } => (policy.kind.name().into(), Some(c_start.to_string()), None),
        PolicyKind::Neighborhood { n_start } => (policy.kind.name().into(), None, Some(n_start)),
    }
}

/// Outcome of one trial.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub engine: String,
    pub instance: usize,
    pub source: String,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub seed: Option<u64>,
    pub policy: Option<PolicySpec>,
    pub mixer_alpha: Option<usize>,
    pub j_max: Option<usize>,
    pub solutions: Option<String>,
    pub best_j: Option<usize>,
    pub best_cost: Option<f64>,
    pub p_best: Option<f64>,
    pub max_norm_drift: Option<f64>,
    pub p_soln_by_step: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub histograms: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub caveat: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub config: ExperimentConfig,
}

#[derive(Debug, Serialize)]
pub struct RunRow {
    pub engine: String,
    pub instance: usize,
    pub source: String,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub seed: Option<u64>,
    pub policy: Option<String>,
    pub c_start: Option<String>,
    pub n_start: Option<usize>,
    pub max_steps: Option<usize>,
    pub mixer_alpha: Option<usize>,
    pub j_max: Option<usize>,
    pub solutions: Option<String>,
    pub best_j: Option<usize>,
    pub best_cost: Option<f64>,
    pub p_best: Option<f64>,
    pub max_norm_drift: Option<f64>,
    pub p_soln_by_step: String,
    pub error: Option<String>,
    pub config: String,
}

impl Record for RunRecord {
    type Row = RunRow;

    fn row(&self) -> RunRow {
        let (policy, c_start, n_start) = match &self.policy {
            Some(p) => {
                let (a, b, c) = policy_columns(p);
                (Some(a), b, c)
            }
            None => (None, None, None),
        };
        let steps: Vec<Option<f64>> = self.p_soln_by_step.iter().map(|v| Some(*v)).collect();
        RunRow {
            engine: self.engine.clone(),
            instance: self.instance,
            source: self.source.clone(),
            n: self.n,
            k: self.k,
            m: self.m,
            seed: self.seed,
            policy,
            c_start,
            n_start,
            max_steps: self.policy.map(|p| p.max_steps),
            mixer_alpha: self.mixer_alpha,
            j_max: self.j_max,
            solutions: self.solutions.clone(),
            best_j: self.best_j,
            best_cost: self.best_cost,
            p_best: self.p_best,
            max_norm_drift: self.max_norm_drift,
            p_soln_by_step: join_floats(&steps),
            error: self.error.clone(),
            config: self.config.to_json(),
        }
    }
}

/// Aggregate over the instances at one sweep point.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub engine: String,
    pub axis: String,
    pub value: f64,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub policy: String,
    pub mixer_alpha: usize,
    /// Mean of the finite per-instance costs.
    pub mean_cost: Option<f64>,
    /// Standard error of that mean.
    pub sem: Option<f64>,
    pub trials: usize,
    /// Instances whose solution probability stayed zero (infinite cost).
    pub infinite: usize,
    /// Instances that could not be generated or run.
    pub failures: usize,
    pub mean_best_j: Option<f64>,
    pub costs: Vec<Option<f64>>,
    pub best_js: Vec<Option<usize>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
    pub config: ExperimentConfig,
}

#[derive(Debug, Serialize)]
pub struct SweepRow {
    pub engine: String,
    pub axis: String,
    pub value: f64,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub policy: String,
    pub mixer_alpha: usize,
    pub mean_cost: Option<f64>,
    pub sem: Option<f64>,
    pub trials: usize,
    pub infinite: usize,
    pub failures: usize,
    pub mean_best_j: Option<f64>,
    pub costs: String,
    pub best_js: String,
    pub errors: String,
    pub config: String,
}

impl Record for SweepRecord {
    type Row = SweepRow;

    fn row(&self) -> SweepRow {
        SweepRow {
            engine: self.engine.clone(),
            axis: self.axis.clone(),
            value: self.value,
            n: self.n,
            k: self.k,
            m: self.m,
            policy: self.policy.clone(),
            mixer_alpha: self.mixer_alpha,
            mean_cost: self.mean_cost,
            sem: self.sem,
            trials: self.trials,
            infinite: self.infinite,
            failures: self.failures,
            mean_best_j: self.mean_best_j,
            costs: join_floats(&self.costs),
            best_js: self.best_js.iter().map(|b| b.map(|v| v.to_string()).unwrap_or_default()).collect::<Vec<_>>().join(";"),
            errors: self.errors.join(";"),
            config: self.config.to_json(),
        }
    }
}

/// Summary of one generated instance.
#[derive(Debug, Clone, Serialize)]
pub struct GenerateRecord {
    pub index: usize,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub ensemble: String,
    pub seed: u64,
    pub planted: Option<u64>,
    pub soluble: Option<bool>,
    pub solutions: Option<String>,
    pub attempts: Option<u64>,
    pub file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub config: ExperimentConfig,
}

#[derive(Debug, Serialize)]
pub struct GenerateRow {
    pub index: usize,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub ensemble: String,
    pub seed: u64,
    pub planted: Option<u64>,
    pub soluble: Option<bool>,
    pub solutions: Option<String>,
    pub attempts: Option<u64>,
    pub file: Option<String>,
    pub error: Option<String>,
    pub config: String,
}

impl Record for GenerateRecord {
    type Row = GenerateRow;

    fn row(&self) -> GenerateRow {
        GenerateRow {
            index: self.index,
            n: self.n,
            k: self.k,
            m: self.m,
            ensemble: self.ensemble.clone(),
            seed: self.seed,
            planted: self.planted,
            soluble: self.soluble,
            solutions: self.solutions.clone(),
            attempts: self.attempts,
            file: self.file.clone(),
            error: self.error.clone(),
            config: self.config.to_json(),
        }
    }
}

/// One self-check of `verify`.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
    pub config: ExperimentConfig,
}

#[derive(Debug, Serialize)]
pub struct CheckRow {
    pub check: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
    pub config: String,
}

impl Record for CheckRecord {
    type Row = CheckRow;

    fn row(&self) -> CheckRow {
        CheckRow {
            check: self.check.clone(),
            passed: self.passed,
            measured: self.measured,
            tolerance: self.tolerance,
            detail: self.detail.clone(),
            config: self.config.to_json(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_join_like_json() {
        let v = [Some(0.1), None, Some(1e-20), Some(3.0)];
        assert_eq!(join_floats(&v), "0.1;;1e-20;3.0");
    }

    #[test]
    fn csv_and_json_sinks() {
        let rec = CheckRecord {
            check: "x".into(),
            passed: true,
            measured: 0.25,
            tolerance: 1e-12,
            detail: "ok".into(),
            config: ExperimentConfig { command: "verify".into(), ..Default::default() },
        };
        let mut buf = Vec::new();
        let mut sink = Sink::new(Format::Csv, None, &mut buf).unwrap();
        sink.emit(&rec).unwrap();
        sink.finish().unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("check,passed,measured,tolerance,detail,config\nx,true,0.25,1e-12,ok,"));
        let mut buf = Vec::new();
        let mut sink = Sink::new(Format::Jsonl, None, &mut buf).unwrap();
        sink.emit(&rec).unwrap();
        sink.finish().unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["measured"], 0.25);
        assert_eq!(v["config"]["command"], "verify");
    }
}

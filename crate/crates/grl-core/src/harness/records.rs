//! Run records and their CSV round trip. The column set is the stable
//! interface consumed by the plotter and external tooling:
//! `seed,algorithm,iteration,objective,objective_stderr,bound_value,k_sub,k_sup,wall_ms`.

use crate::error::Result;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

/// One iteration of one algorithm on one seeded instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub algorithm: String,
    pub iteration: usize,
    pub objective: f64,
    pub objective_stderr: f64,
    pub bound_value: f64,
    pub k_sub: f64,
    pub k_sup: f64,
    pub wall_ms: f64,
}

pub fn write_records<W: Write>(records: &[RunRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for record in records {
        w.serialize(record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_records_to_path(records: &[RunRecord], path: &Path) -> Result<()> {
    write_records(records, std::fs::File::create(path)?)
}

pub fn read_records<R: Read>(reader: R) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

pub fn read_records_from_path(path: &Path) -> Result<Vec<RunRecord>> {
    read_records(std::fs::File::open(path)?)
}

/// Cross-seed aggregate for one algorithm at one iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub algorithm: String,
    pub iteration: usize,
    pub mean_objective: f64,
    pub std_objective: f64,
    pub runs: usize,
}

/// Mean and sample standard deviation of the objective across seeds, per
/// algorithm and iteration. Seeds that converged early carry their last
/// objective forward, and every series is extended to the globally last
/// iteration so single-shot baselines read as flat lines.
pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut series: BTreeMap<&str, BTreeMap<u64, BTreeMap<usize, f64>>> = BTreeMap::new();
    let mut max_iteration = 0;
    for r in records {
        max_iteration = max_iteration.max(r.iteration);
        series
            .entry(&r.algorithm)
            .or_default()
            .entry(r.seed)
            .or_default()
            .insert(r.iteration, r.objective);
    }
    let mut out = Vec::new();
    for (algorithm, per_seed) in &series {
        for iteration in 0..=max_iteration {
            let mut values = Vec::with_capacity(per_seed.len());
            for trace in per_seed.values() {
                // Last observed objective at or before this iteration.
                if let Some((_, &v)) = trace.range(..=iteration).next_back() {
                    values.push(v);
                }
            }
            if values.is_empty() {
                continue;
            }
            let n = values.len();
            let mean = values.iter().sum::<f64>() / n as f64;
            let std = if n > 1 {
                (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0))
                    .sqrt()
            } else {
                0.0
            };
            out.push(SummaryRow {
                algorithm: algorithm.to_string(),
                iteration,
                mean_objective: mean,
                std_objective: std,
                runs: n,
            });
        }
    }
    out
}

pub fn write_summary<W: Write>(summary: &[SummaryRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in summary {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_to_path(summary: &[SummaryRow], path: &Path) -> Result<()> {
    write_summary(summary, std::fs::File::create(path)?)
}

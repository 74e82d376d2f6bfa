//! Monte-Carlo sweep harness.
//!
//! A sweep runs a grid of (axis value, policy, group size) cells, each cell
//! averaging many repeated simulations. Every cell derives its per-repetition
//! seeds the same way from the master seed, so cells at the same axis value
//! are paired: differences between policies or group sizes are attributable
//! to the policy, not to sampling noise. Repetitions run in parallel but
//! reduce in repetition order, so results do not depend on thread timing.

use crate::dist::ShiftedExp;
use crate::sim::{run, Policy, SimConfig, SimError};
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("invalid sweep: {0}")]
    InvalidSweep(&'static str),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Mean, standard deviation, and raw makespans over repeated runs.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloStats {
    pub mean: f64,
    pub std: f64,
    pub makespans: Vec<f64>,
}

/// Runs `reps` simulations of `config`, seeding repetition `i` with
/// `master_seed + i`. Aggregation is done in repetition order regardless of
/// which repetition finishes first.
pub fn monte_carlo(
    config: &SimConfig,
    reps: usize,
    master_seed: u64,
) -> Result<MonteCarloStats, ExperimentError> {
    let cell = run_cell(config, reps, master_seed)?;
    Ok(MonteCarloStats {
        mean: cell.mean_makespan,
        std: cell.std_makespan,
        makespans: cell.makespans,
    })
}

#[derive(Debug, Clone)]
struct CellStats {
    mean_makespan: f64,
    std_makespan: f64,
    mean_wasted: f64,
    makespans: Vec<f64>,
}

fn run_cell(config: &SimConfig, reps: usize, master_seed: u64) -> Result<CellStats, ExperimentError> {
    if reps < 1 {
        return Err(ExperimentError::InvalidSweep("repetitions must be >= 1"));
    }
    config.validate()?;
    let outcomes: Vec<Result<(f64, f64), SimError>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut cfg = config.clone();
            cfg.seed = master_seed.wrapping_add(rep as u64);
            run(&cfg).map(|r| (r.makespan, r.metrics.wasted_time))
        })
        .collect();
    let mut makespans = Vec::with_capacity(reps);
    let mut wasted_sum = 0.0;
    for outcome in outcomes {
        let (makespan, wasted) = outcome?;
        makespans.push(makespan);
        wasted_sum += wasted;
    }
    let mean = makespans.iter().sum::<f64>() / reps as f64;
    let std = if reps > 1 {
        (makespans.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(CellStats {
        mean_makespan: mean,
        std_makespan: std,
        mean_wasted: wasted_sum / reps as f64,
        makespans,
    })
}

/// What the sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Assignment overhead `H`.
    Overhead,
    /// Group size `G`; axis values are the group sizes themselves.
    GroupSize,
    /// Tasks-to-workers ratio `S/W`, realized by varying `S` at fixed `W`.
    TaskToWorkerRatio,
    /// Straggler variance: task times come from a shifted exponential with
    /// this rate and the base model's shift.
    Lambda,
}

/// A sweep: one base config, one axis, and the policy/group-size grid to run
/// at every axis value.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: SimConfig,
    pub axis: SweepAxis,
    pub axis_values: Vec<f64>,
    pub policies: Vec<Policy>,
    pub group_sizes: Vec<usize>,
    pub repetitions: usize,
    pub master_seed: u64,
}

impl SweepSpec {
    fn validate(&self) -> Result<(), ExperimentError> {
        if self.axis_values.is_empty() {
            return Err(ExperimentError::InvalidSweep("axis_values must be non-empty"));
        }
        if self.axis_values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(ExperimentError::InvalidSweep("axis_values must be strictly increasing"));
        }
        if self.policies.is_empty() {
            return Err(ExperimentError::InvalidSweep("policies must be non-empty"));
        }
        if self.repetitions < 1 {
            return Err(ExperimentError::InvalidSweep("repetitions must be >= 1"));
        }
        if self.axis != SweepAxis::GroupSize && self.group_sizes.is_empty() {
            return Err(ExperimentError::InvalidSweep("group_sizes must be non-empty"));
        }
        Ok(())
    }

    /// Group sizes realized at one axis value.
    fn cell_group_sizes(&self, axis_value: f64) -> Vec<usize> {
        match self.axis {
            SweepAxis::GroupSize => vec![axis_value.round() as usize],
            _ => self.group_sizes.clone(),
        }
    }

    fn cell_config(&self, axis_value: f64, policy: Policy, group_size: usize) -> SimConfig {
        let mut cfg = self.base.clone();
        cfg.policy = policy;
        cfg.group_size = group_size;
        match self.axis {
            SweepAxis::Overhead => cfg.overhead = axis_value,
            SweepAxis::GroupSize => {}
            SweepAxis::TaskToWorkerRatio => {
                cfg.num_tasks = ((axis_value * cfg.num_workers as f64).round() as usize).max(1);
            }
            SweepAxis::Lambda => {
                let shift = self.base.task_time.min_support();
                cfg.task_time = ShiftedExp::new(axis_value, shift)
                    .expect("positive sweep rate")
                    .into();
            }
        }
        cfg
    }
}

/// One aggregated sweep cell.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub policy: Policy,
    pub group_size: usize,
    pub mean_makespan: f64,
    pub std_makespan: f64,
    pub mean_wasted: f64,
    /// Percent improvement over the same policy's G=1 cell at this axis
    /// value; absent when no G=1 cell was swept.
    pub savings_vs_g1: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
}

/// Runs every cell of the sweep. Rows come back ordered by axis value, then
/// policy (in the order listed), then group size.
pub fn sweep(spec: &SweepSpec) -> Result<SweepResult, ExperimentError> {
    sweep_with_progress(spec, |_, _| {})
}

/// Like [`sweep`], invoking `progress(done, total)` after each finished cell.
pub fn sweep_with_progress(
    spec: &SweepSpec,
    mut progress: impl FnMut(usize, usize),
) -> Result<SweepResult, ExperimentError> {
    spec.validate()?;
    let total: usize = spec
        .axis_values
        .iter()
        .map(|v| spec.policies.len() * spec.cell_group_sizes(*v).len())
        .sum();
    let mut done = 0;
    let mut rows = Vec::new();
    for &axis_value in &spec.axis_values {
        for &policy in &spec.policies {
            for &g in &spec.cell_group_sizes(axis_value) {
                let cfg = spec.cell_config(axis_value, policy, g);
                let stats = run_cell(&cfg, spec.repetitions, spec.master_seed)?;
                done += 1;
                progress(done, total);
                rows.push(SweepRow {
                    axis_value,
                    policy,
                    group_size: g,
                    mean_makespan: stats.mean_makespan,
                    std_makespan: stats.std_makespan,
                    mean_wasted: stats.mean_wasted,
                    savings_vs_g1: None,
                });
            }
        }
    }
    fill_savings(spec, &mut rows);
    Ok(SweepResult { axis: spec.axis, rows })
}

/// Savings compare each cell to the same policy's G=1 reference: the G=1
/// cell at the same axis value, or, when group size itself is the axis, the
/// cell at axis value 1.
fn fill_savings(spec: &SweepSpec, rows: &mut [SweepRow]) {
    let reference = |policy: Policy, axis_value: f64, rows: &[SweepRow]| -> Option<f64> {
        rows.iter()
            .find(|r| {
                r.policy == policy
                    && r.group_size == 1
                    && match spec.axis {
                        SweepAxis::GroupSize => true,
                        _ => r.axis_value == axis_value,
                    }
            })
            .map(|r| r.mean_makespan)
    };
    let baselines: Vec<Option<f64>> = rows
        .iter()
        .map(|row| reference(row.policy, row.axis_value, rows))
        .collect();
    for (row, baseline) in rows.iter_mut().zip(baselines) {
        row.savings_vs_g1 = baseline.map(|b| 100.0 * (b - row.mean_makespan) / b);
    }
}

/// Writes the sweep table as CSV with a fixed header and deterministic row
/// order. Re-exporting the same result is byte-identical.
pub fn write_csv<W: Write>(result: &SweepResult, writer: W) -> Result<(), ExperimentError> {
    let mut csv_writer = csv::Writer::from_writer(writer);
    csv_writer.write_record([
        "axis",
        "policy",
        "group_size",
        "mean_makespan",
        "std_makespan",
        "mean_wasted",
        "savings_vs_g1_pct",
    ])?;
    for row in &result.rows {
        csv_writer.write_record([
            row.axis_value.to_string(),
            row.policy.to_string(),
            row.group_size.to_string(),
            row.mean_makespan.to_string(),
            row.std_makespan.to_string(),
            row.mean_wasted.to_string(),
            row.savings_vs_g1.map(|s| s.to_string()).unwrap_or_default(),
        ])?;
    }
    csv_writer.flush()?;
    Ok(())
}

pub fn write_csv_file(result: &SweepResult, path: &Path) -> Result<(), ExperimentError> {
    let file = std::fs::File::create(path)?;
    write_csv(result, std::io::BufWriter::new(file))
}

/// JSON mirror of the CSV table.
pub fn write_json_file(result: &SweepResult, path: &Path) -> Result<(), ExperimentError> {
    let file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), result)?;
    Ok(())
}

//! Run traces and the metrics derived from them.
//!
//! A trace records every processing interval with its outcome, every group
//! issuance, and the spans in which workers were away. Traces serialize to a
//! stable JSON schema (`schema_version` 1) and feed both the metrics
//! computation and the Gantt renderer.

use crate::scheduler::WorkerId;
use crate::sim::SimConfig;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace is incomplete: {completed} of {expected} tasks completed")]
    IncompleteTrace { completed: usize, expected: usize },
    #[error("savings baseline must be positive")]
    ZeroBaseline,
    #[error("unsupported trace schema version {0}")]
    SchemaVersion(u32),
    #[error("malformed trace: {0}")]
    Malformed(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// What became of one processing interval (or of a copy that never ran).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    /// Accepted by the master as the task's result.
    Completed,
    /// Copy dropped before it started; zero duration, no work spent.
    Skipped,
    /// Abandoned mid-processing on a skip signal.
    Preempted,
    /// Work discarded: the worker left mid-task, or a fully processed copy
    /// was rejected because another worker's result was accepted first.
    Lost,
}

/// One processing interval of one task copy on one worker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub worker: usize,
    pub task: usize,
    pub start: f64,
    pub end: f64,
    pub outcome: Outcome,
    pub group_id: usize,
}

/// One group issuance: which worker, when, and how much setup time was
/// actually spent before processing (or before the run ended).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupRecord {
    pub id: usize,
    pub worker: usize,
    pub issued_at: f64,
    pub overhead: f64,
}

/// Span during which a worker was away from the cluster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnavailableSpan {
    pub worker: usize,
    pub start: f64,
    pub end: f64,
}

/// Complete record of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskTrace {
    pub num_workers: usize,
    pub records: Vec<TaskRecord>,
    pub groups: Vec<GroupRecord>,
    pub unavailable: Vec<UnavailableSpan>,
}

impl TaskTrace {
    pub fn completed_count(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.outcome == Outcome::Completed)
            .count()
    }

    /// Records of one worker in chronological order.
    pub fn worker_records(&self, worker: WorkerId) -> Vec<TaskRecord> {
        self.records
            .iter()
            .copied()
            .filter(|r| r.worker == worker.0)
            .collect()
    }

    /// End of the latest accepted interval; zero for an empty trace.
    pub fn last_completion(&self) -> f64 {
        self.records
            .iter()
            .filter(|r| r.outcome == Outcome::Completed)
            .map(|r| r.end)
            .fold(0.0, f64::max)
    }

    pub fn from_json_reader<R: std::io::Read>(reader: R) -> Result<Self, TraceError> {
        let wire: WireTrace = serde_json::from_reader(reader)?;
        wire.into_trace()
    }

    pub fn from_json_file(path: &Path) -> Result<Self, TraceError> {
        Self::from_json_reader(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    pub fn to_json_writer<W: Write>(&self, writer: W) -> Result<(), TraceError> {
        serde_json::to_writer_pretty(writer, &WireTrace::from_trace(self))?;
        Ok(())
    }

    pub fn to_json_file(&self, path: &Path) -> Result<(), TraceError> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.to_json_writer(&mut file)?;
        file.flush()?;
        Ok(())
    }
}

pub const TRACE_SCHEMA_VERSION: u32 = 1;

/// Wire form of a trace: intervals grouped per worker.
#[derive(Debug, Serialize, Deserialize)]
struct WireTrace {
    schema_version: u32,
    workers: Vec<WireWorker>,
    #[serde(default)]
    groups: Vec<GroupRecord>,
    #[serde(default)]
    unavailable: Vec<UnavailableSpan>,
}

#[derive(Debug, Serialize, Deserialize)]
struct WireWorker {
    id: usize,
    intervals: Vec<WireInterval>,
}

#[derive(Debug, Serialize, Deserialize)]
struct WireInterval {
    task: usize,
    start: f64,
    end: f64,
    outcome: Outcome,
    group_id: usize,
}

impl WireTrace {
    fn from_trace(trace: &TaskTrace) -> Self {
        let mut workers: Vec<WireWorker> = (0..trace.num_workers)
            .map(|id| WireWorker { id, intervals: Vec::new() })
            .collect();
        for r in &trace.records {
            workers[r.worker].intervals.push(WireInterval {
                task: r.task,
                start: r.start,
                end: r.end,
                outcome: r.outcome,
                group_id: r.group_id,
            });
        }
        WireTrace {
            schema_version: TRACE_SCHEMA_VERSION,
            workers,
            groups: trace.groups.clone(),
            unavailable: trace.unavailable.clone(),
        }
    }

    fn into_trace(self) -> Result<TaskTrace, TraceError> {
        if self.schema_version != TRACE_SCHEMA_VERSION {
            return Err(TraceError::SchemaVersion(self.schema_version));
        }
        let num_workers = self.workers.len();
        let mut records = Vec::new();
        for w in &self.workers {
            if w.id >= num_workers {
                return Err(TraceError::Malformed(format!("worker id {} out of range", w.id)));
            }
            for iv in &w.intervals {
                if !(iv.start <= iv.end) {
                    return Err(TraceError::Malformed(format!(
                        "interval for task {} has start {} after end {}",
                        iv.task, iv.start, iv.end
                    )));
                }
                records.push(TaskRecord {
                    worker: w.id,
                    task: iv.task,
                    start: iv.start,
                    end: iv.end,
                    outcome: iv.outcome,
                    group_id: iv.group_id,
                });
            }
        }
        Ok(TaskTrace {
            num_workers,
            records,
            groups: self.groups,
            unavailable: self.unavailable,
        })
    }
}

/// Resource accounting for one completed run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// End of the latest accepted completion.
    pub makespan: f64,
    /// Processing time spent on copies that were preempted or lost.
    pub wasted_time: f64,
    /// Setup time spent across all issued groups.
    pub overhead_time: f64,
    /// Processing time of accepted completions.
    pub useful_time: f64,
    /// useful_time over total worker-available time within the run window.
    pub utilization: f64,
    pub completions: usize,
}

/// Derives metrics from a completed run's trace.
///
/// Utilization divides useful time by total worker-available seconds over
/// `[0, makespan]`: `W * makespan` minus recorded away spans, so elastic runs
/// are not charged for time workers spent off the cluster.
pub fn compute_metrics(trace: &TaskTrace, config: &SimConfig) -> Result<Metrics, TraceError> {
    let completions = trace.completed_count();
    if completions < config.num_tasks {
        return Err(TraceError::IncompleteTrace {
            completed: completions,
            expected: config.num_tasks,
        });
    }
    let makespan = trace.last_completion();
    let mut useful = 0.0;
    let mut wasted = 0.0;
    for r in &trace.records {
        let len = r.end - r.start;
        match r.outcome {
            Outcome::Completed => useful += len,
            Outcome::Preempted | Outcome::Lost => wasted += len,
            Outcome::Skipped => {}
        }
    }
    let overhead: f64 = trace.groups.iter().map(|g| g.overhead).sum();
    let away: f64 = trace
        .unavailable
        .iter()
        .map(|s| (s.end.min(makespan) - s.start.min(makespan)).max(0.0))
        .sum();
    let available = config.num_workers as f64 * makespan - away;
    let utilization = if available > 0.0 { useful / available } else { 0.0 };
    Ok(Metrics {
        makespan,
        wasted_time: wasted,
        overhead_time: overhead,
        useful_time: useful,
        utilization,
        completions,
    })
}

/// Percentage improvement of `value` over `baseline`; negative for slowdowns.
pub fn savings_percent(baseline: f64, value: f64) -> Result<f64, TraceError> {
    if !(baseline > 0.0) {
        return Err(TraceError::ZeroBaseline);
    }
    Ok(100.0 * (baseline - value) / baseline)
}

//! Deterministic discrete-event simulator for straggler mitigation in
//! master/worker clusters via task grouping and replication.
//!
//! A master hands each idle worker a group of tasks: a prefix of tasks never
//! assigned before, padded with replicas of in-flight tasks when the
//! unassigned queue runs short. Only the first finished copy of a task
//! counts; the rest is skipped, preempted, or discarded. Grouping amortizes
//! the per-assignment overhead, and frequent per-task progress reports let
//! the master stop other workers from redoing finished work, which turns
//! straggling workers' partial progress into useful output instead of waste.
//!
//! The crate provides:
//!
//! - [`dist`]: shifted-exponential and mixture completion-time models plus
//!   histogram tooling.
//! - [`fit`]: simplex-constrained least-squares fitting of mixture weights to
//!   a target completion-time histogram.
//! - [`scheduler`]: the master's bookkeeping (group formation, replica
//!   selection, completion tracking).
//! - [`sim`]: the event-driven cluster simulation, including elastic
//!   clusters whose workers leave and rejoin.
//! - [`trace`] and [`svg`]: run traces, derived metrics, JSON export, and
//!   Gantt-style rendering.
//! - [`experiments`]: seeded Monte-Carlo sweeps over overhead, group size,
//!   workload ratio, and straggler variance, with CSV/JSON output.
//! - [`manifest`]: TOML manifests consumed by the `straggler-sim` binary.

pub mod dist;
pub mod experiments;
pub mod fit;
pub mod manifest;
pub mod rng;
pub mod scheduler;
pub mod sim;
pub mod svg;
pub mod trace;

pub use dist::{build_histogram, Deterministic, Histogram, MixtureModel, ShiftedExp, TaskTimeModel};
pub use experiments::{monte_carlo, sweep, MonteCarloStats, SweepAxis, SweepResult, SweepSpec};
pub use fit::{combination_residual, fit_profile_weights};
pub use scheduler::{GroupAssignment, MasterState, SkipSignal, TaskId, WorkerId};
pub use sim::{run, AvailabilitySchedule, Elasticity, Policy, SimConfig, SimResult};
pub use trace::{compute_metrics, savings_percent, Metrics, Outcome, TaskTrace};

//! Discrete-event simulation of a master and `W` workers processing `S`
//! tasks under one of three replication policies.
//!
//! A worker that becomes idle receives a task group from the master, pays the
//! assignment overhead `H` once, then processes the group's tasks
//! sequentially. One per-task time `X` is drawn per group and every task in
//! that group costs exactly `X`, modeling straggler behaviour that is
//! consistent over short spans but independent across groups.
//!
//! Policies differ only in when the master hears about completions:
//!
//! - `Proposed`: the worker notifies after every task; the master's skip
//!   signals land instantly, so other holders drop queued copies and abandon
//!   in-flight copies immediately.
//! - `GroupingOnly`: the worker stays silent until its whole group is done,
//!   then reports all of it; skip signals still prune and preempt at that
//!   point.
//! - `Standard`: `Proposed` with the group size forced to one.
//!
//! Runs are bit-reproducible: one master seed feeds separate ChaCha streams
//! for task times, replica tie-breaks, replica shuffles, and availability, so
//! toggling one knob never disturbs the draws of another.

use crate::dist::TaskTimeModel;
use crate::rng::{purpose_rng, worker_rng, StreamPurpose};
use crate::scheduler::{MasterState, TaskId, WorkerId};
use crate::trace::{
    compute_metrics, GroupRecord, Metrics, Outcome, TaskRecord, TaskTrace, UnavailableSpan,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("invalid config: {0}")]
    InvalidConfig(&'static str),
}

/// Replication policy run by the cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    Standard,
    GroupingOnly,
    Proposed,
}

impl Policy {
    pub fn name(&self) -> &'static str {
        match self {
            Policy::Standard => "standard",
            Policy::GroupingOnly => "grouping-only",
            Policy::Proposed => "proposed",
        }
    }
}

impl std::fmt::Display for Policy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// On-off availability rates for elastic clusters: a worker stays for an
/// exponential span with rate `rate_available`, leaves, stays away for an
/// exponential span with rate `rate_unavailable`, and rejoins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Elasticity {
    pub rate_available: f64,
    pub rate_unavailable: f64,
}

/// Full parameterization of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub num_workers: usize,
    pub num_tasks: usize,
    pub group_size: usize,
    pub overhead: f64,
    pub policy: Policy,
    pub task_time: TaskTimeModel,
    pub elasticity: Option<Elasticity>,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.num_workers < 1 {
            return Err(SimError::InvalidConfig("num_workers must be >= 1"));
        }
        if self.num_tasks < 1 {
            return Err(SimError::InvalidConfig("num_tasks must be >= 1"));
        }
        if self.group_size < 1 {
            return Err(SimError::InvalidConfig("group_size must be >= 1"));
        }
        if !self.overhead.is_finite() || self.overhead < 0.0 {
            return Err(SimError::InvalidConfig("overhead must be finite and >= 0"));
        }
        if let Some(e) = &self.elasticity {
            if !(e.rate_available > 0.0) || !(e.rate_unavailable > 0.0) {
                return Err(SimError::InvalidConfig("elasticity rates must be positive"));
            }
        }
        Ok(())
    }

    /// Standard replication is the group-size-one special case.
    pub fn effective_group_size(&self) -> usize {
        match self.policy {
            Policy::Standard => 1,
            _ => self.group_size,
        }
    }
}

/// Outcome of one run: the full trace plus derived metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub trace: TaskTrace,
    pub makespan: f64,
    pub metrics: Metrics,
}

// ── Event queue ─────────────────────────────────────────────────────────────

/// Event classes in tie-break order at equal times: completions resolve
/// before departures, departures before joins, joins before assignments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum EventKind {
    TaskFinish { epoch: u64 },
    Departure,
    Join,
    SetupDone { epoch: u64 },
    Assign,
}

impl EventKind {
    fn class(&self) -> u8 {
        match self {
            EventKind::TaskFinish { .. } => 0,
            EventKind::Departure => 1,
            EventKind::Join => 2,
            EventKind::SetupDone { .. } | EventKind::Assign => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Event {
    pub time: f64,
    pub worker: usize,
    pub kind: EventKind,
    seq: u64,
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.kind.class().cmp(&other.kind.class()))
            .then(self.worker.cmp(&other.worker))
            .then(self.seq.cmp(&other.seq))
    }
}

/// Min-queue over events ordered by (time, class, worker, insertion).
#[derive(Debug, Default)]
pub(crate) struct EventQueue {
    heap: BinaryHeap<std::cmp::Reverse<Event>>,
    next_seq: u64,
}

impl EventQueue {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn push(&mut self, time: f64, worker: usize, kind: EventKind) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(std::cmp::Reverse(Event { time, worker, kind, seq }));
    }

    /// Pops the earliest event, breaking time ties by class then worker id.
    pub(crate) fn pop(&mut self) -> Option<Event> {
        self.heap.pop().map(|r| r.0)
    }
}

// ── Availability ────────────────────────────────────────────────────────────

/// Per-worker alternating available/unavailable span generator. Spans are
/// exponential with the configured rates and independent across workers; all
/// workers start available at time zero. Without elasticity every worker is
/// available forever.
#[derive(Debug)]
pub struct AvailabilitySchedule {
    rates: Option<Elasticity>,
    streams: Vec<ChaCha8Rng>,
}

impl AvailabilitySchedule {
    pub fn build(config: &SimConfig) -> Self {
        let streams = (0..config.num_workers)
            .map(|w| worker_rng(config.seed, StreamPurpose::Availability, w))
            .collect();
        Self { rates: config.elasticity, streams }
    }

    pub fn is_elastic(&self) -> bool {
        self.rates.is_some()
    }

    fn draw_exp(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
        let u = 1.0 - rng.gen::<f64>(); // (0, 1]
        -u.ln() / rate
    }

    /// Duration the worker stays available before its next departure.
    pub fn next_available_span(&mut self, worker: usize) -> f64 {
        match self.rates {
            Some(e) => Self::draw_exp(&mut self.streams[worker], e.rate_available),
            None => f64::INFINITY,
        }
    }

    /// Duration the worker stays away before rejoining.
    pub fn next_unavailable_span(&mut self, worker: usize) -> f64 {
        match self.rates {
            Some(e) => Self::draw_exp(&mut self.streams[worker], e.rate_unavailable),
            None => f64::INFINITY,
        }
    }

    /// Materializes the next `count` (available, unavailable) span pairs for
    /// one worker.
    pub fn take_spans(&mut self, worker: usize, count: usize) -> Vec<(f64, f64)> {
        (0..count)
            .map(|_| {
                (
                    self.next_available_span(worker),
                    self.next_unavailable_span(worker),
                )
            })
            .collect()
    }
}

// ── Worker state ────────────────────────────────────────────────────────────

#[derive(Debug)]
struct InFlight {
    task: TaskId,
    start: f64,
}

#[derive(Debug)]
struct ActiveGroup {
    gid: usize,
    issued_at: f64,
    setup_done: bool,
    /// The group's sampled per-task processing time.
    per_task_time: f64,
    /// Tasks not yet started, in processing order.
    queue: VecDeque<TaskId>,
    current: Option<InFlight>,
    /// Locally finished but unreported tasks (grouping-only policy).
    done_local: Vec<(TaskId, f64, f64)>,
}

#[derive(Debug)]
struct WorkerState {
    available: bool,
    /// Bumped whenever the in-flight task or the whole group changes;
    /// scheduled finish/setup events carry the epoch they were issued under
    /// and are dropped when it no longer matches.
    epoch: u64,
    group: Option<ActiveGroup>,
}

// ── Engine ──────────────────────────────────────────────────────────────────

struct Engine<'a> {
    config: &'a SimConfig,
    policy: Policy,
    master: MasterState,
    workers: Vec<WorkerState>,
    queue: EventQueue,
    time_rng: ChaCha8Rng,
    tie_rng: ChaCha8Rng,
    shuffle_rng: ChaCha8Rng,
    avail: AvailabilitySchedule,
    records: Vec<TaskRecord>,
    groups: Vec<GroupRecord>,
    unavailable: Vec<UnavailableSpan>,
    away_since: Vec<Option<f64>>,
    now: f64,
}

impl<'a> Engine<'a> {
    fn new(config: &'a SimConfig) -> Result<Self, SimError> {
        config.validate()?;
        let master = MasterState::new(config.num_tasks, config.effective_group_size())
            .map_err(|_| SimError::InvalidConfig("invalid task or group count"))?;
        Ok(Self {
            config,
            policy: config.policy,
            master,
            workers: (0..config.num_workers)
                .map(|_| WorkerState { available: true, epoch: 0, group: None })
                .collect(),
            queue: EventQueue::new(),
            time_rng: purpose_rng(config.seed, StreamPurpose::TaskTime),
            tie_rng: purpose_rng(config.seed, StreamPurpose::ReplicaTieBreak),
            shuffle_rng: purpose_rng(config.seed, StreamPurpose::ReplicaShuffle),
            avail: AvailabilitySchedule::build(config),
            records: Vec::new(),
            groups: Vec::new(),
            unavailable: Vec::new(),
            away_since: vec![None; config.num_workers],
            now: 0.0,
        })
    }

    fn record(&mut self, worker: usize, task: TaskId, start: f64, end: f64, outcome: Outcome, gid: usize) {
        self.records.push(TaskRecord { worker, task: task.0, start, end, outcome, group_id: gid });
    }

    /// Idle, available worker asks the master for a group.
    fn handle_assign(&mut self, w: usize, at: f64) {
        if !self.workers[w].available || self.workers[w].group.is_some() {
            return;
        }
        let Some(group) = self.master.assign_group(
            WorkerId(w),
            at,
            &mut self.tie_rng,
            &mut self.shuffle_rng,
        ) else {
            // No work anywhere means the run is over; the loop exits before
            // any such assignment fires.
            debug_assert!(self.master.is_done());
            return;
        };
        let gid = self.groups.len();
        let per_task_time = self.config.task_time.sample(&mut self.time_rng);
        self.groups.push(GroupRecord {
            id: gid,
            worker: w,
            issued_at: at,
            overhead: self.config.overhead,
        });
        self.workers[w].group = Some(ActiveGroup {
            gid,
            issued_at: at,
            setup_done: false,
            per_task_time,
            queue: group.tasks().collect(),
            current: None,
            done_local: Vec::new(),
        });
        self.workers[w].epoch += 1;
        let epoch = self.workers[w].epoch;
        self.queue.push(at + self.config.overhead, w, EventKind::SetupDone { epoch });
    }

    /// Overhead paid; begin processing whatever survived the setup window.
    fn handle_setup_done(&mut self, w: usize, at: f64) {
        let group = self.workers[w].group.as_mut().expect("setup without group");
        group.setup_done = true;
        self.start_next_task(w, at);
    }

    /// Starts the worker's next queued task, or finishes the group.
    fn start_next_task(&mut self, w: usize, at: f64) {
        let next = {
            let group = self.workers[w].group.as_mut().expect("advance without group");
            debug_assert!(group.setup_done && group.current.is_none());
            group.queue.pop_front().map(|t| (t, group.per_task_time))
        };
        match next {
            Some((task, x)) => {
                debug_assert!(!self.master.is_completed(task));
                let group = self.workers[w].group.as_mut().expect("advance without group");
                group.current = Some(InFlight { task, start: at });
                self.workers[w].epoch += 1;
                let epoch = self.workers[w].epoch;
                self.queue.push(at + x, w, EventKind::TaskFinish { epoch });
            }
            None => self.finish_group(w, at),
        }
    }

    /// Group exhausted: report what the policy withheld, then go idle.
    ///
    /// The grouping-only report is one batch message: every locally finished
    /// task is accepted (or rejected as a duplicate) before any skip signal
    /// fans out, so a cascade triggered by the signals can never race the
    /// remainder of the batch.
    fn finish_group(&mut self, w: usize, at: f64) {
        let group = self.workers[w].group.take().expect("finish without group");
        debug_assert!(group.queue.is_empty() && group.current.is_none());
        if self.policy == Policy::GroupingOnly {
            let mut signals = Vec::new();
            for (task, start, end) in group.done_local {
                if self.master.is_completed(task) {
                    // Another worker's copy was accepted first; this fully
                    // processed copy is discarded.
                    self.record(w, task, start, end, Outcome::Lost, group.gid);
                } else {
                    self.record(w, task, start, end, Outcome::Completed, group.gid);
                    signals.extend(self.master.mark_task_complete(task, at).expect("task in range"));
                }
            }
            for s in &signals {
                self.prune_queued_copies(s.task, s.at);
            }
            for s in signals {
                self.preempt_inflight_copy(s.task, s.at);
            }
        }
        self.queue.push(at, w, EventKind::Assign);
    }

    fn handle_task_finish(&mut self, w: usize, at: f64) {
        let (task, start, gid) = {
            let group = self.workers[w].group.as_mut().expect("finish without group");
            let inflight = group.current.take().expect("finish without in-flight task");
            (inflight.task, inflight.start, group.gid)
        };
        match self.policy {
            Policy::Proposed | Policy::Standard => {
                // Instant signals preempt every speculative copy the moment a
                // task completes, so a still-valid finish is always first.
                debug_assert!(!self.master.is_completed(task));
                self.record(w, task, start, at, Outcome::Completed, gid);
                let signals = self.master.mark_task_complete(task, at).expect("task in range");
                for s in signals {
                    self.deliver_skip(s.task, s.at);
                }
                self.start_next_task(w, at);
            }
            Policy::GroupingOnly => {
                let group = self.workers[w].group.as_mut().expect("group vanished");
                group.done_local.push((task, start, at));
                self.start_next_task(w, at);
            }
        }
    }

    /// Tells every holder of `task` to drop it: queued copies are removed
    /// (zero-duration skip), in-flight copies are abandoned on the spot and
    /// the worker moves on with no extra overhead.
    ///
    /// Pruning runs over all workers before any preemption. A preempted
    /// worker advancing can finish its group, and in the grouping-only
    /// policy that report cascades into further completions; those nested
    /// advances must never pop a queue that still holds a completed task.
    fn deliver_skip(&mut self, task: TaskId, at: f64) {
        self.prune_queued_copies(task, at);
        self.preempt_inflight_copy(task, at);
    }

    fn prune_queued_copies(&mut self, task: TaskId, at: f64) {
        for v in 0..self.workers.len() {
            let pruned_gid = {
                let Some(group) = self.workers[v].group.as_mut() else { continue };
                group.queue.iter().position(|t| *t == task).map(|pos| {
                    group.queue.remove(pos);
                    group.gid
                })
            };
            if let Some(gid) = pruned_gid {
                self.record(v, task, at, at, Outcome::Skipped, gid);
            }
        }
    }

    fn preempt_inflight_copy(&mut self, task: TaskId, at: f64) {
        for v in 0..self.workers.len() {
            let hit = {
                let Some(group) = self.workers[v].group.as_mut() else { continue };
                if group.current.as_ref().map(|c| c.task) == Some(task) {
                    let inflight = group.current.take().expect("checked");
                    Some((group.gid, inflight.start))
                } else {
                    None
                }
            };
            if let Some((gid, start)) = hit {
                self.workers[v].epoch += 1;
                if start < at {
                    self.record(v, task, start, at, Outcome::Preempted, gid);
                } else {
                    // Killed at the instant it would have started.
                    self.record(v, task, at, at, Outcome::Skipped, gid);
                }
                self.start_next_task(v, at);
            }
        }
    }

    /// Worker leaves the cluster: in-progress and unreported work is lost,
    /// and any task whose last live copy it held goes back to the front of
    /// the unassigned list. Returns the requeued tasks.
    fn handle_departure(&mut self, w: usize, at: f64) -> Vec<TaskId> {
        debug_assert!(self.workers[w].available, "departure of an absent worker");
        self.workers[w].available = false;
        self.away_since[w] = Some(at);
        self.workers[w].epoch += 1;
        let mut requeued = Vec::new();
        if let Some(group) = self.workers[w].group.take() {
            if !group.setup_done {
                self.groups[group.gid].overhead = at - group.issued_at;
            }
            let mut possessed: Vec<TaskId> = Vec::new();
            for (task, start, end) in &group.done_local {
                self.record(w, *task, *start, *end, Outcome::Lost, group.gid);
                possessed.push(*task);
            }
            if let Some(inflight) = group.current {
                self.record(w, inflight.task, inflight.start, at, Outcome::Lost, group.gid);
                possessed.push(inflight.task);
            }
            possessed.extend(group.queue.iter().copied());
            requeued = possessed
                .into_iter()
                .filter(|t| !self.master.is_completed(*t) && !self.held_elsewhere(*t, w))
                .collect();
            self.master.requeue_front(&requeued);
        }
        let span = self.avail.next_unavailable_span(w);
        self.queue.push(at + span, w, EventKind::Join);
        requeued
    }

    fn held_elsewhere(&self, task: TaskId, except: usize) -> bool {
        self.workers.iter().enumerate().any(|(v, wk)| {
            v != except
                && wk.available
                && wk.group.as_ref().is_some_and(|g| {
                    g.queue.contains(&task)
                        || g.current.as_ref().map(|c| c.task) == Some(task)
                        || g.done_local.iter().any(|(t, _, _)| *t == task)
                })
        })
    }

    /// Worker rejoins idle and immediately eligible for assignment.
    fn handle_join(&mut self, w: usize, at: f64) {
        debug_assert!(!self.workers[w].available, "join of a present worker");
        self.workers[w].available = true;
        let since = self.away_since[w].take().expect("join without departure");
        self.unavailable.push(UnavailableSpan { worker: w, start: since, end: at });
        let span = self.avail.next_available_span(w);
        self.queue.push(at + span, w, EventKind::Departure);
        self.queue.push(at, w, EventKind::Assign);
    }

    fn dispatch(&mut self, ev: Event) {
        match ev.kind {
            EventKind::TaskFinish { epoch } => {
                if epoch == self.workers[ev.worker].epoch {
                    self.handle_task_finish(ev.worker, ev.time);
                }
            }
            EventKind::SetupDone { epoch } => {
                if epoch == self.workers[ev.worker].epoch {
                    self.handle_setup_done(ev.worker, ev.time);
                }
            }
            EventKind::Departure => {
                self.handle_departure(ev.worker, ev.time);
            }
            EventKind::Join => self.handle_join(ev.worker, ev.time),
            EventKind::Assign => self.handle_assign(ev.worker, ev.time),
        }
    }

    fn finalize(mut self) -> TaskTrace {
        let makespan = self.now;
        for (w, since) in self.away_since.iter().enumerate() {
            if let Some(start) = since {
                self.unavailable.push(UnavailableSpan { worker: w, start: *start, end: makespan });
            }
        }
        // A group still in setup when the last task completed never got to
        // spend its full overhead.
        for wk in &self.workers {
            if let Some(group) = &wk.group {
                if !group.setup_done {
                    self.groups[group.gid].overhead = makespan - group.issued_at;
                }
            }
        }
        self.unavailable.sort_by(|a, b| {
            a.start.total_cmp(&b.start).then(a.worker.cmp(&b.worker))
        });
        TaskTrace {
            num_workers: self.config.num_workers,
            records: self.records,
            groups: self.groups,
            unavailable: self.unavailable,
        }
    }
}

/// Runs one simulation to completion.
///
/// Identical configs (seed included) produce bit-identical results.
pub fn run(config: &SimConfig) -> Result<SimResult, SimError> {
    let mut engine = Engine::new(config)?;
    for w in 0..config.num_workers {
        engine.queue.push(0.0, w, EventKind::Assign);
    }
    if config.elasticity.is_some() {
        for w in 0..config.num_workers {
            let span = engine.avail.next_available_span(w);
            engine.queue.push(span, w, EventKind::Departure);
        }
    }
    while !engine.master.is_done() {
        let ev = engine
            .queue
            .pop()
            .expect("event queue drained before all tasks completed");
        engine.now = ev.time;
        engine.dispatch(ev);
    }
    let makespan = engine.now;
    let trace = engine.finalize();
    debug_assert_eq!(trace.last_completion(), makespan);
    let metrics = compute_metrics(&trace, config).expect("completed run yields metrics");
    Ok(SimResult { trace, makespan, metrics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{Deterministic, ShiftedExp};

    fn det_config(workers: usize, tasks: usize, group: usize, overhead: f64, x: f64, policy: Policy) -> SimConfig {
        SimConfig {
            num_workers: workers,
            num_tasks: tasks,
            group_size: group,
            overhead,
            policy,
            task_time: Deterministic::new(x).unwrap().into(),
            elasticity: None,
            seed: 7,
        }
    }

    #[test]
    fn queue_breaks_time_ties_by_worker() {
        let mut q = EventQueue::new();
        q.push(5.0, 2, EventKind::TaskFinish { epoch: 0 });
        q.push(5.0, 1, EventKind::TaskFinish { epoch: 0 });
        assert_eq!(q.pop().unwrap().worker, 1);
        assert_eq!(q.pop().unwrap().worker, 2);
    }

    #[test]
    fn queue_orders_classes_at_equal_times() {
        let mut q = EventQueue::new();
        q.push(5.0, 1, EventKind::Join);
        q.push(5.0, 2, EventKind::TaskFinish { epoch: 0 });
        q.push(5.0, 0, EventKind::Assign);
        q.push(5.0, 3, EventKind::Departure);
        let order: Vec<u8> = std::iter::from_fn(|| q.pop()).map(|e| e.kind.class()).collect();
        assert_eq!(order, vec![0, 1, 2, 3]);
    }

    #[test]
    fn queue_singleton() {
        let mut q = EventQueue::new();
        q.push(3.0, 4, EventKind::Assign);
        let ev = q.pop().unwrap();
        assert_eq!((ev.time, ev.worker), (3.0, 4));
        assert!(q.pop().is_none());
    }

    #[test]
    fn standard_two_waves() {
        let result = run(&det_config(2, 4, 1, 1.0, 6.0, Policy::Standard)).unwrap();
        assert_eq!(result.makespan, 14.0);
        assert_eq!(result.trace.completed_count(), 4);
    }

    #[test]
    fn single_worker_pays_overhead_once_per_group() {
        let result = run(&det_config(1, 3, 3, 2.0, 4.0, Policy::Proposed)).unwrap();
        assert_eq!(result.makespan, 14.0);
        assert_eq!(result.metrics.overhead_time, 2.0);
        assert_eq!(result.metrics.useful_time, 12.0);
    }

    #[test]
    fn deterministic_full_wave_oracle() {
        // S = k * W * G: every wave is synchronous, nothing replicates until
        // the very end, and the makespan is exactly k * (H + G * x).
        for &(k, w, g) in &[(1usize, 2usize, 2usize), (2, 3, 1), (3, 2, 3)] {
            let (h, x) = (1.5, 2.5);
            let cfg = det_config(w, k * w * g, g, h, x, Policy::Proposed);
            let result = run(&cfg).unwrap();
            assert_eq!(result.makespan, k as f64 * (h + g as f64 * x), "k={k} w={w} g={g}");
            assert_eq!(result.metrics.wasted_time, 0.0);
        }
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let cfg = SimConfig {
            num_workers: 5,
            num_tasks: 30,
            group_size: 1,
            overhead: 1.2,
            policy: Policy::Standard,
            task_time: ShiftedExp::new(0.15, 6.0).unwrap().into(),
            elasticity: None,
            seed: 42,
        };
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trace.completed_count(), 30);
        assert!(a.makespan >= 30.0 * 6.0 / 5.0);
        let mut other = cfg.clone();
        other.seed = 43;
        let c = run(&other).unwrap();
        assert_ne!(a.makespan, c.makespan);
    }

    #[test]
    fn group_size_one_policies_agree() {
        for seed in 0..20 {
            let mk = |policy: Policy, group_size: usize| SimConfig {
                num_workers: 4,
                num_tasks: 17,
                group_size,
                overhead: 0.8,
                policy,
                task_time: ShiftedExp::new(0.2, 3.0).unwrap().into(),
                elasticity: None,
                seed,
            };
            let std_run = run(&mk(Policy::Standard, 5)).unwrap();
            let grouping = run(&mk(Policy::GroupingOnly, 1)).unwrap();
            let proposed = run(&mk(Policy::Proposed, 1)).unwrap();
            assert_eq!(std_run.makespan, grouping.makespan, "seed {seed}");
            assert_eq!(std_run.makespan, proposed.makespan, "seed {seed}");
        }
    }

    #[test]
    fn availability_span_means() {
        let cfg = SimConfig {
            num_workers: 1,
            num_tasks: 1,
            group_size: 1,
            overhead: 0.0,
            policy: Policy::Proposed,
            task_time: Deterministic::new(1.0).unwrap().into(),
            elasticity: Some(Elasticity { rate_available: 0.01, rate_unavailable: 0.1 }),
            seed: 9,
        };
        let mut sched = AvailabilitySchedule::build(&cfg);
        let n = 100_000;
        let spans = sched.take_spans(0, n);
        let mean_a: f64 = spans.iter().map(|s| s.0).sum::<f64>() / n as f64;
        let mean_u: f64 = spans.iter().map(|s| s.1).sum::<f64>() / n as f64;
        assert!((mean_a - 100.0).abs() < 1.0, "available mean {mean_a}");
        assert!((mean_u - 10.0).abs() < 0.1, "unavailable mean {mean_u}");
    }

    #[test]
    fn no_elasticity_means_always_available() {
        let cfg = det_config(2, 2, 1, 0.0, 1.0, Policy::Proposed);
        let mut sched = AvailabilitySchedule::build(&cfg);
        assert!(!sched.is_elastic());
        assert_eq!(sched.next_available_span(0), f64::INFINITY);
        let result = run(&cfg).unwrap();
        assert!(result.trace.unavailable.is_empty());
    }

    #[test]
    fn departure_requeues_sole_copies_in_order() {
        let cfg = SimConfig {
            num_workers: 2,
            num_tasks: 10,
            group_size: 2,
            overhead: 0.0,
            policy: Policy::Proposed,
            task_time: Deterministic::new(5.0).unwrap().into(),
            elasticity: Some(Elasticity { rate_available: 0.01, rate_unavailable: 0.1 }),
            seed: 11,
        };
        let mut engine = Engine::new(&cfg).unwrap();
        engine.handle_assign(0, 0.0);
        engine.handle_setup_done(0, 0.0); // starts task 0, holds task 1
        engine.now = 2.0;
        let requeued = engine.handle_departure(0, 2.0);
        assert_eq!(requeued, vec![TaskId(0), TaskId(1)]);
        let head: Vec<TaskId> = engine.master.unassigned().take(3).collect();
        assert_eq!(head, vec![TaskId(0), TaskId(1), TaskId(2)]);
        let lost: Vec<&TaskRecord> = engine
            .records
            .iter()
            .filter(|r| r.outcome == Outcome::Lost)
            .collect();
        assert_eq!(lost.len(), 1);
        assert_eq!((lost[0].task, lost[0].start, lost[0].end), (0, 0.0, 2.0));
    }

    #[test]
    fn departure_keeps_tasks_held_elsewhere_assigned() {
        let cfg = SimConfig {
            num_workers: 2,
            num_tasks: 2,
            group_size: 2,
            overhead: 0.0,
            policy: Policy::Proposed,
            task_time: Deterministic::new(5.0).unwrap().into(),
            elasticity: Some(Elasticity { rate_available: 0.01, rate_unavailable: 0.1 }),
            seed: 11,
        };
        let mut engine = Engine::new(&cfg).unwrap();
        engine.handle_assign(0, 0.0);
        engine.handle_setup_done(0, 0.0);
        // Worker 1 receives both tasks again as replicas.
        engine.handle_assign(1, 0.0);
        engine.handle_setup_done(1, 0.0);
        engine.now = 1.0;
        let requeued = engine.handle_departure(0, 1.0);
        assert!(requeued.is_empty());
        assert_eq!(engine.master.unassigned().count(), 0);
        assert_eq!(engine.master.assigned().len(), 2);
    }

    #[test]
    fn departure_while_idle_moves_nothing() {
        let cfg = SimConfig {
            num_workers: 2,
            num_tasks: 2,
            group_size: 1,
            overhead: 0.0,
            policy: Policy::Proposed,
            task_time: Deterministic::new(5.0).unwrap().into(),
            elasticity: Some(Elasticity { rate_available: 0.01, rate_unavailable: 0.1 }),
            seed: 11,
        };
        let mut engine = Engine::new(&cfg).unwrap();
        let requeued = engine.handle_departure(1, 0.5);
        assert!(requeued.is_empty());
        assert_eq!(engine.master.unassigned().count(), 2);
    }

    #[test]
    fn elastic_runs_complete_every_task_once() {
        for seed in 0..10 {
            let cfg = SimConfig {
                num_workers: 4,
                num_tasks: 25,
                group_size: 3,
                overhead: 1.0,
                policy: Policy::Proposed,
                task_time: ShiftedExp::new(0.2, 2.0).unwrap().into(),
                elasticity: Some(Elasticity { rate_available: 0.05, rate_unavailable: 0.2 }),
                seed,
            };
            let result = run(&cfg).unwrap();
            assert_eq!(result.trace.completed_count(), 25, "seed {seed}");
            let mut seen = vec![0; 25];
            for r in &result.trace.records {
                if r.outcome == Outcome::Completed {
                    seen[r.task] += 1;
                }
            }
            assert!(seen.iter().all(|c| *c == 1), "seed {seed}");
        }
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = det_config(0, 1, 1, 0.0, 1.0, Policy::Proposed);
        assert!(run(&cfg).is_err());
        cfg = det_config(1, 0, 1, 0.0, 1.0, Policy::Proposed);
        assert!(run(&cfg).is_err());
        cfg = det_config(1, 1, 0, 0.0, 1.0, Policy::Proposed);
        assert!(run(&cfg).is_err());
        cfg = det_config(1, 1, 1, -1.0, 1.0, Policy::Proposed);
        assert!(run(&cfg).is_err());
        cfg = det_config(1, 1, 1, 0.0, 1.0, Policy::Proposed);
        cfg.elasticity = Some(Elasticity { rate_available: 0.0, rate_unavailable: 0.1 });
        assert!(run(&cfg).is_err());
    }
}

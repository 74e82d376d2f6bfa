//! Master-side task bookkeeping: group formation, replication selection, and
//! completion tracking.
//!
//! The master keeps an ordered list of unassigned tasks and an ordered list of
//! assigned (in-flight) tasks. A group handed to a worker is a fresh prefix
//! taken from the head of the unassigned list, padded with replicas of
//! assigned tasks when there is room. Replicas are picked least-replicated
//! first with uniform tie-breaking and the replica suffix is handed over in
//! randomized order. The first accepted completion of a task wins; the master
//! then signals every other holder to skip it.
//!
//! This module is simulation-agnostic: it never looks at the clock except to
//! stamp assignments, and all randomness comes in through caller-owned
//! streams.

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SchedulerError {
    #[error("invalid parameter: {0}")]
    InvalidParam(&'static str),
    #[error("replica candidate set is empty")]
    EmptyCandidates,
    #[error("unknown task index {0}")]
    UnknownTask(usize),
}

/// Index of a task within a workload, in `[0, num_tasks)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaskId(pub usize);

impl std::fmt::Display for TaskId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Index of a worker, in `[0, num_workers)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WorkerId(pub usize);

impl std::fmt::Display for WorkerId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An ordered task group issued to a worker: a fresh prefix (never handed out
/// before) followed by a shuffled suffix of replicas.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupAssignment {
    pub worker: WorkerId,
    pub fresh: Vec<TaskId>,
    pub replicas: Vec<TaskId>,
    pub issued_at: f64,
}

impl GroupAssignment {
    /// Tasks in processing order: fresh prefix, then replicas.
    pub fn tasks(&self) -> impl Iterator<Item = TaskId> + '_ {
        self.fresh.iter().chain(self.replicas.iter()).copied()
    }

    pub fn len(&self) -> usize {
        self.fresh.len() + self.replicas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Master-to-workers notification that a task is complete: holders drop it
/// before starting or abandon it mid-processing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkipSignal {
    pub task: TaskId,
    pub at: f64,
}

/// The master's view of the workload.
///
/// Unassigned, assigned, and completed sets partition the tasks at all times.
#[derive(Debug, Clone, PartialEq)]
pub struct MasterState {
    num_tasks: usize,
    group_size: usize,
    unassigned: std::collections::VecDeque<TaskId>,
    assigned: Vec<TaskId>,
    replica_count: Vec<u32>,
    completed: Vec<bool>,
    completed_count: usize,
}

impl MasterState {
    /// Fresh master over tasks `0..num_tasks` with the given group size.
    pub fn new(num_tasks: usize, group_size: usize) -> Result<Self, SchedulerError> {
        if num_tasks < 1 {
            return Err(SchedulerError::InvalidParam("num_tasks must be >= 1"));
        }
        if group_size < 1 {
            return Err(SchedulerError::InvalidParam("group_size must be >= 1"));
        }
        Ok(Self {
            num_tasks,
            group_size,
            unassigned: (0..num_tasks).map(TaskId).collect(),
            assigned: Vec::new(),
            replica_count: vec![0; num_tasks],
            completed: vec![false; num_tasks],
            completed_count: 0,
        })
    }

    pub fn num_tasks(&self) -> usize {
        self.num_tasks
    }

    pub fn group_size(&self) -> usize {
        self.group_size
    }

    pub fn unassigned(&self) -> impl Iterator<Item = TaskId> + '_ {
        self.unassigned.iter().copied()
    }

    pub fn assigned(&self) -> &[TaskId] {
        &self.assigned
    }

    pub fn replica_count(&self, task: TaskId) -> u32 {
        self.replica_count[task.0]
    }

    pub fn is_completed(&self, task: TaskId) -> bool {
        self.completed[task.0]
    }

    pub fn completed_count(&self) -> usize {
        self.completed_count
    }

    /// True once every task has an accepted completion.
    pub fn is_done(&self) -> bool {
        self.unassigned.is_empty() && self.assigned.is_empty()
    }

    /// Forms the next group for an idle worker, or `None` when no work
    /// remains anywhere.
    ///
    /// Up to `group_size` tasks move from the head of the unassigned list
    /// into the fresh prefix; remaining room is filled with replicas of
    /// assigned tasks not already in this group, chosen least-replicated
    /// first. The replica suffix is returned in randomized order. Every task
    /// in the group has its replica count incremented, the fresh ones
    /// included, so the count means "times handed out".
    pub fn assign_group<R1: Rng + ?Sized, R2: Rng + ?Sized>(
        &mut self,
        worker: WorkerId,
        now: f64,
        tie_rng: &mut R1,
        shuffle_rng: &mut R2,
    ) -> Option<GroupAssignment> {
        let mut fresh = Vec::new();
        while !self.unassigned.is_empty() && fresh.len() < self.group_size {
            let task = self.unassigned.pop_front().expect("non-empty");
            fresh.push(task);
            self.assigned.push(task);
        }
        let room = self.group_size - fresh.len();
        let mut replicas: Vec<TaskId> = Vec::new();
        let mut in_group = vec![false; self.num_tasks];
        for t in &fresh {
            in_group[t.0] = true;
        }
        while !self.assigned.is_empty() && replicas.len() < room {
            let candidates: Vec<TaskId> = self
                .assigned
                .iter()
                .copied()
                .filter(|t| !in_group[t.0])
                .collect();
            if candidates.is_empty() {
                break;
            }
            let pick = select_replica(&candidates, &self.replica_count, tie_rng)
                .expect("candidates checked non-empty");
            in_group[pick.0] = true;
            replicas.push(pick);
        }
        if fresh.is_empty() && replicas.is_empty() {
            return None;
        }
        replicas.shuffle(shuffle_rng);
        for t in fresh.iter().chain(replicas.iter()) {
            self.replica_count[t.0] += 1;
        }
        Some(GroupAssignment { worker, fresh, replicas, issued_at: now })
    }

    /// Accepts a completion. The first call for a task moves it to the
    /// completed set and emits one skip signal; later calls are no-ops, so
    /// simultaneous finishes resolve to whichever arrives first.
    pub fn mark_task_complete(
        &mut self,
        task: TaskId,
        now: f64,
    ) -> Result<Vec<SkipSignal>, SchedulerError> {
        if task.0 >= self.num_tasks {
            return Err(SchedulerError::UnknownTask(task.0));
        }
        if self.completed[task.0] {
            return Ok(Vec::new());
        }
        if let Some(pos) = self.assigned.iter().position(|t| *t == task) {
            self.assigned.remove(pos);
        } else if let Some(pos) = self.unassigned.iter().position(|t| *t == task) {
            // Completion for a never-assigned task violates the caller
            // contract; keep the partition intact anyway.
            self.unassigned.remove(pos);
        }
        self.completed[task.0] = true;
        self.completed_count += 1;
        Ok(vec![SkipSignal { task, at: now }])
    }

    /// Puts tasks back at the front of the unassigned list, preserving their
    /// order, after their last live copy disappeared with a departing worker.
    pub fn requeue_front(&mut self, tasks: &[TaskId]) {
        for t in tasks.iter().rev() {
            if let Some(pos) = self.assigned.iter().position(|a| a == t) {
                self.assigned.remove(pos);
                self.unassigned.push_front(*t);
            }
        }
    }
}

/// Picks the least-replicated candidate, breaking ties uniformly at random.
pub fn select_replica<R: Rng + ?Sized>(
    candidates: &[TaskId],
    replica_count: &[u32],
    rng: &mut R,
) -> Result<TaskId, SchedulerError> {
    if candidates.is_empty() {
        return Err(SchedulerError::EmptyCandidates);
    }
    let min = candidates
        .iter()
        .map(|t| replica_count[t.0])
        .min()
        .expect("non-empty");
    let tied: Vec<TaskId> = candidates
        .iter()
        .copied()
        .filter(|t| replica_count[t.0] == min)
        .collect();
    if tied.len() == 1 {
        return Ok(tied[0]);
    }
    Ok(tied[rng.gen_range(0..tied.len())])
}

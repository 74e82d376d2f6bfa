//! Seeded random-stream derivation.
//!
//! A run owns one master seed; each randomness consumer gets its own ChaCha8
//! stream derived as `seed XOR purpose`, so changing one consumer (say,
//! toggling elasticity) never perturbs the draws seen by another. Same seed,
//! same call sequence, same values.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Fixed constants naming each randomness consumer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamPurpose {
    /// Per-group task-time draws.
    TaskTime,
    /// Tie-breaking among equally replicated candidates.
    ReplicaTieBreak,
    /// Shuffling the replicated suffix of a group.
    ReplicaShuffle,
    /// Worker availability span draws.
    Availability,
}

impl StreamPurpose {
    fn tag(self) -> u64 {
        match self {
            StreamPurpose::TaskTime => 0x7461_736b_7469_6d65,
            StreamPurpose::ReplicaTieBreak => 0x7469_6562_7265_616b,
            StreamPurpose::ReplicaShuffle => 0x7368_7566_666c_6530,
            StreamPurpose::Availability => 0x6176_6169_6c61_626c,
        }
    }
}

/// Stream for a run-wide purpose.
pub fn purpose_rng(seed: u64, purpose: StreamPurpose) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ purpose.tag())
}

/// Per-worker stream for a purpose; workers draw independently.
pub fn worker_rng(seed: u64, purpose: StreamPurpose, worker: usize) -> ChaCha8Rng {
    let mixed = (seed ^ purpose.tag()).wrapping_add((worker as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    ChaCha8Rng::seed_from_u64(mixed)
}

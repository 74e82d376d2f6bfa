//! Task completion-time models: shifted exponentials, mixtures of them, and
//! completion-time histograms.
//!
//! A shifted exponential with rate `lambda` and shift `T` has density
//! `lambda * exp(-lambda * (x - T))` for `x >= T`. The shift is the minimum
//! time a task can take; smaller rates mean heavier straggling. Mixtures
//! combine several components with convex weights and are sampled by first
//! drawing a component, then drawing from it by inverse CDF.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance for "weights sum to one" checks.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("rate must be positive and finite, got {0}")]
    InvalidRate(f64),
    #[error("shift must be non-negative and finite, got {0}")]
    InvalidShift(f64),
    #[error("deterministic value must be non-negative and finite, got {0}")]
    InvalidValue(f64),
    #[error("mixture must have at least one component")]
    NoComponents,
    #[error("mixture weights must be non-negative and sum to 1, got sum {0}")]
    InvalidWeights(f64),
    #[error("histogram requires at least one sample")]
    EmptySamples,
    #[error("bin edges must be strictly increasing with at least two entries")]
    NonMonotonicEdges,
    #[error("histogram frequencies must be non-negative and sum to 1")]
    InvalidFrequencies,
}

/// Shifted exponential distribution with density
/// `rate * exp(-rate * (x - shift))` on `[shift, inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftedExp {
    rate: f64,
    shift: f64,
}

impl ShiftedExp {
    pub fn new(rate: f64, shift: f64) -> Result<Self, ModelError> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(ModelError::InvalidRate(rate));
        }
        if !(shift >= 0.0) || !shift.is_finite() {
            return Err(ModelError::InvalidShift(shift));
        }
        Ok(Self { rate, shift })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Density at `x`: `rate * exp(-rate * (x - shift))` for `x >= shift`, else 0.
    pub fn pdf(&self, x: f64) -> f64 {
        if x < self.shift {
            0.0
        } else {
            self.rate * (-self.rate * (x - self.shift)).exp()
        }
    }

    /// CDF at `x`: `1 - exp(-rate * (x - shift))` for `x >= shift`, else 0.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < self.shift {
            0.0
        } else {
            1.0 - (-self.rate * (x - self.shift)).exp()
        }
    }

    pub fn mean(&self) -> f64 {
        self.shift + 1.0 / self.rate
    }

    /// Inverse-CDF draw using one uniform from `rng`.
    ///
    /// Uses `shift - ln(u) / rate` with `u` uniform on (0, 1], so the result
    /// is always `>= shift`. Consumes exactly one stream value.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = 1.0 - rng.gen::<f64>(); // (0, 1]
        self.shift - u.ln() / self.rate
    }
}

/// Degenerate distribution that always yields `value`. Useful for analytic
/// oracles in tests: with no randomness, schedules are exactly predictable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deterministic {
    value: f64,
}

impl Deterministic {
    pub fn new(value: f64) -> Result<Self, ModelError> {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(ModelError::InvalidValue(value));
        }
        Ok(Self { value })
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

/// Convex combination of shifted exponentials.
///
/// Sampling selects component `i` with probability `weight_i` using a single
/// uniform draw, then draws from that component by inverse CDF, so every
/// sample consumes exactly two stream values regardless of the component
/// count. Fixed consumption keeps seeded simulation traces stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureModel {
    components: Vec<(f64, ShiftedExp)>,
}

impl MixtureModel {
    pub fn new(components: Vec<(f64, ShiftedExp)>) -> Result<Self, ModelError> {
        if components.is_empty() {
            return Err(ModelError::NoComponents);
        }
        let sum: f64 = components.iter().map(|(w, _)| *w).sum();
        if components.iter().any(|(w, _)| !(*w >= 0.0)) || (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(ModelError::InvalidWeights(sum));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[(f64, ShiftedExp)] {
        &self.components
    }

    /// Expected value: `sum_i w_i * (shift_i + 1 / rate_i)`.
    pub fn mean(&self) -> f64 {
        self.components
            .iter()
            .map(|(w, d)| w * d.mean())
            .sum()
    }

    /// Mixture density at `x`.
    pub fn pdf(&self, x: f64) -> f64 {
        self.components.iter().map(|(w, d)| w * d.pdf(x)).sum()
    }

    /// Draws a sample, consuming exactly two stream values: one to pick the
    /// component, one for the inverse-CDF draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let pick = rng.gen::<f64>();
        let mut acc = 0.0;
        let mut chosen = &self.components[self.components.len() - 1].1;
        for (w, d) in &self.components {
            acc += w;
            if pick < acc {
                chosen = d;
                break;
            }
        }
        chosen.sample(rng)
    }
}

/// Any of the supported task completion-time models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TaskTimeModel {
    Deterministic(Deterministic),
    Shifted(ShiftedExp),
    Mixture(MixtureModel),
}

impl TaskTimeModel {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            TaskTimeModel::Deterministic(d) => d.value(),
            TaskTimeModel::Shifted(d) => d.sample(rng),
            TaskTimeModel::Mixture(m) => m.sample(rng),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            TaskTimeModel::Deterministic(d) => d.value(),
            TaskTimeModel::Shifted(d) => d.mean(),
            TaskTimeModel::Mixture(m) => m.mean(),
        }
    }

    /// Lower edge of the support: the fastest a single task can complete.
    pub fn min_support(&self) -> f64 {
        match self {
            TaskTimeModel::Deterministic(d) => d.value(),
            TaskTimeModel::Shifted(d) => d.shift(),
            TaskTimeModel::Mixture(m) => m
                .components()
                .iter()
                .map(|(_, d)| d.shift())
                .fold(f64::INFINITY, f64::min),
        }
    }
}

impl From<Deterministic> for TaskTimeModel {
    fn from(d: Deterministic) -> Self {
        TaskTimeModel::Deterministic(d)
    }
}

impl From<ShiftedExp> for TaskTimeModel {
    fn from(d: ShiftedExp) -> Self {
        TaskTimeModel::Shifted(d)
    }
}

impl From<MixtureModel> for TaskTimeModel {
    fn from(m: MixtureModel) -> Self {
        TaskTimeModel::Mixture(m)
    }
}

/// Normalized completion-time histogram: `d + 1` strictly increasing bin
/// edges and `d` frequencies that sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub frequencies: Vec<f64>,
}

impl Histogram {
    pub fn new(bin_edges: Vec<f64>, frequencies: Vec<f64>) -> Result<Self, ModelError> {
        check_edges(&bin_edges)?;
        if frequencies.len() != bin_edges.len() - 1 {
            return Err(ModelError::InvalidFrequencies);
        }
        let sum: f64 = frequencies.iter().sum();
        if frequencies.iter().any(|f| !(*f >= 0.0)) || (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(ModelError::InvalidFrequencies);
        }
        Ok(Self { bin_edges, frequencies })
    }

    pub fn num_bins(&self) -> usize {
        self.frequencies.len()
    }
}

fn check_edges(edges: &[f64]) -> Result<(), ModelError> {
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(ModelError::NonMonotonicEdges);
    }
    Ok(())
}

/// Builds a normalized histogram of `samples` over `bin_edges`.
///
/// Samples below the first edge land in the first bin and samples at or above
/// the last edge land in the last bin, so the total count is conserved and the
/// frequencies sum to exactly one.
pub fn build_histogram(samples: &[f64], bin_edges: &[f64]) -> Result<Histogram, ModelError> {
    check_edges(bin_edges)?;
    if samples.is_empty() {
        return Err(ModelError::EmptySamples);
    }
    let bins = bin_edges.len() - 1;
    let mut counts = vec![0u64; bins];
    for &s in samples {
        // partition_point gives the count of edges <= s; clamp into range.
        let idx = bin_edges.partition_point(|e| *e <= s);
        let bin = idx.saturating_sub(1).min(bins - 1);
        counts[bin] += 1;
    }
    let total = samples.len() as f64;
    let frequencies = counts.iter().map(|&c| c as f64 / total).collect();
    Ok(Histogram {
        bin_edges: bin_edges.to_vec(),
        frequencies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pdf_at_shift_equals_rate() {
        let d = ShiftedExp::new(0.3, 5.0).unwrap();
        assert_eq!(d.pdf(5.0), 0.3);
    }

    #[test]
    fn pdf_zero_below_shift() {
        let d = ShiftedExp::new(0.3, 5.0).unwrap();
        assert_eq!(d.pdf(4.9), 0.0);
    }

    #[test]
    fn pdf_halves_after_one_half_life() {
        let d = ShiftedExp::new(0.15, 6.0).unwrap();
        let x = 6.0 + 2f64.ln() / 0.15;
        assert!((d.pdf(x) - 0.075).abs() < 1e-12);
    }

    #[test]
    fn pdf_integrates_to_one() {
        // Trapezoid quadrature over [T, T + 200/rate] for several parameters.
        for &(rate, shift) in &[(0.3, 5.0), (0.1, 11.0), (0.04, 19.0), (2.0, 0.0)] {
            let d = ShiftedExp::new(rate, shift).unwrap();
            let hi = shift + 200.0 / rate;
            let n = 200_000;
            let h = (hi - shift) / n as f64;
            let mut area = 0.0;
            for i in 0..n {
                let a = shift + i as f64 * h;
                area += 0.5 * (d.pdf(a) + d.pdf(a + h)) * h;
            }
            assert!((area - 1.0).abs() < 1e-4, "rate={rate} shift={shift} area={area}");
        }
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(ShiftedExp::new(0.0, 1.0).is_err());
        assert!(ShiftedExp::new(-1.0, 1.0).is_err());
        assert!(ShiftedExp::new(1.0, -0.1).is_err());
        assert!(ShiftedExp::new(f64::NAN, 1.0).is_err());
        assert!(Deterministic::new(-1.0).is_err());
        assert!(MixtureModel::new(vec![]).is_err());
        let d = ShiftedExp::new(0.3, 5.0).unwrap();
        assert!(MixtureModel::new(vec![(0.5, d)]).is_err());
        assert!(MixtureModel::new(vec![(1.5, d), (-0.5, d)]).is_err());
    }

    #[test]
    fn deterministic_sample_is_constant() {
        let m = TaskTimeModel::from(Deterministic::new(6.0).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(m.sample(&mut rng), 6.0);
        }
    }

    #[test]
    fn shifted_exp_samples_respect_support() {
        let d = ShiftedExp::new(0.3, 5.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10_000 {
            assert!(d.sample(&mut rng) >= 5.0);
        }
    }

    fn mixture_i1() -> MixtureModel {
        MixtureModel::new(vec![
            (0.6, ShiftedExp::new(0.3, 5.0).unwrap()),
            (0.4, ShiftedExp::new(0.1, 11.0).unwrap()),
        ])
        .unwrap()
    }

    #[test]
    fn mixture_sample_mean_matches_closed_form() {
        // Closed form: 0.6 * (5 + 1/0.3) + 0.4 * (11 + 1/0.1) = 13.4.
        let m = mixture_i1();
        assert!((m.mean() - 13.4).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| m.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 13.4).abs() < 0.2, "sample mean {mean}");
    }

    #[test]
    fn mixture_means() {
        let n = MixtureModel::new(vec![(1.0, ShiftedExp::new(0.3, 5.0).unwrap())]).unwrap();
        assert!((n.mean() - 25.0 / 3.0).abs() < 1e-12);
        let i2 = MixtureModel::new(vec![
            (0.3, ShiftedExp::new(0.3, 5.0).unwrap()),
            (0.7, ShiftedExp::new(0.04, 19.0).unwrap()),
        ])
        .unwrap();
        assert!((i2.mean() - 33.3).abs() < 1e-10);
    }

    #[test]
    fn mixture_mean_within_three_standard_errors_of_sample_mean() {
        let m = mixture_i1();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 1_000_000usize;
        let samples: Vec<f64> = (0..n).map(|_| m.sample(&mut rng)).collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((m.mean() - mean).abs() < 3.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn mixture_consumes_two_stream_values_per_sample() {
        let m = mixture_i1();
        let mut a = ChaCha8Rng::seed_from_u64(5);
        let mut b = ChaCha8Rng::seed_from_u64(5);
        let _ = m.sample(&mut a);
        let _: f64 = b.gen();
        let _: f64 = b.gen();
        // Both streams advanced by exactly two f64 draws.
        assert_eq!(a.gen::<u64>(), b.gen::<u64>());
    }

    #[test]
    fn empirical_cdf_matches_analytic_ks() {
        let d = ShiftedExp::new(0.3, 5.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let n = 100_000;
        let mut samples: Vec<f64> = (0..n).map(|_| d.sample(&mut rng)).collect();
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut ks: f64 = 0.0;
        for (i, x) in samples.iter().enumerate() {
            let f = d.cdf(*x);
            let lo = i as f64 / n as f64;
            let hi = (i + 1) as f64 / n as f64;
            ks = ks.max((f - lo).abs()).max((f - hi).abs());
        }
        assert!(ks < 0.01, "KS statistic {ks}");
    }

    #[test]
    fn histogram_direct_count() {
        let h = build_histogram(&[1.0, 1.0, 3.0], &[0.0, 2.0, 4.0]).unwrap();
        assert!((h.frequencies[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((h.frequencies[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn histogram_clamps_out_of_range() {
        let h = build_histogram(&[5.0], &[0.0, 2.0, 4.0]).unwrap();
        assert_eq!(h.frequencies, vec![0.0, 1.0]);
        let h = build_histogram(&[-3.0], &[0.0, 2.0, 4.0]).unwrap();
        assert_eq!(h.frequencies, vec![1.0, 0.0]);
    }

    #[test]
    fn histogram_errors() {
        assert_eq!(
            build_histogram(&[], &[0.0, 1.0]).unwrap_err(),
            ModelError::EmptySamples
        );
        assert_eq!(
            build_histogram(&[1.0], &[0.0, 0.0, 1.0]).unwrap_err(),
            ModelError::NonMonotonicEdges
        );
        assert_eq!(
            build_histogram(&[1.0], &[1.0]).unwrap_err(),
            ModelError::NonMonotonicEdges
        );
    }

    #[test]
    fn histogram_frequencies_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let d = ShiftedExp::new(0.2, 3.0).unwrap();
        let samples: Vec<f64> = (0..5000).map(|_| d.sample(&mut rng)).collect();
        let edges: Vec<f64> = (0..=40).map(|i| i as f64).collect();
        let h = build_histogram(&samples, &edges).unwrap();
        let sum: f64 = h.frequencies.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }
}

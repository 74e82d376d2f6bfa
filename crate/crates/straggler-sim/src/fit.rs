//! Fits convex-combination weights so a weighted sum of basis histograms
//! approximates a target histogram.
//!
//! Solves `min_p || y - sum_i p_i x_i ||_2  s.t.  p_i >= 0, sum_i p_i = 1`
//! by projected gradient descent on the squared objective with a fixed step
//! from a Lipschitz bound, projecting onto the probability simplex after each
//! step. Dependency-free and deterministic.

use crate::dist::Histogram;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("basis must contain at least one histogram")]
    EmptyBasis,
    #[error("histogram {0} does not share the target's bin edges")]
    BinMismatch(usize),
}

/// Stop when an iteration improves the squared objective by less than this.
const IMPROVEMENT_TOL: f64 = 1e-12;
const MAX_ITERS: usize = 100_000;

/// Returns the convex weights `p` minimizing `|| y - sum_i p_i x_i ||_2` over
/// the probability simplex, where `y` is the target's frequency vector and
/// `x_i` the basis frequency vectors.
///
/// All histograms must share the target's bin edges exactly.
pub fn fit_profile_weights(target: &Histogram, basis: &[Histogram]) -> Result<Vec<f64>, FitError> {
    if basis.is_empty() {
        return Err(FitError::EmptyBasis);
    }
    for (i, b) in basis.iter().enumerate() {
        if b.bin_edges != target.bin_edges {
            return Err(FitError::BinMismatch(i));
        }
    }
    let n = basis.len();
    let d = target.num_bins();
    let y = &target.frequencies;
    let xs: Vec<&[f64]> = basis.iter().map(|b| b.frequencies.as_slice()).collect();

    // Gram matrix G = X^T X and linear term c = X^T y.
    let mut gram = vec![vec![0.0; n]; n];
    let mut lin = vec![0.0; n];
    for i in 0..n {
        for j in i..n {
            let dot: f64 = (0..d).map(|k| xs[i][k] * xs[j][k]).sum();
            gram[i][j] = dot;
            gram[j][i] = dot;
        }
        lin[i] = (0..d).map(|k| xs[i][k] * y[k]).sum();
    }

    // Objective f(p) = ||y - Xp||^2, gradient 2 (G p - c). The gradient is
    // Lipschitz with constant 2 * lambda_max(G) <= 2 * ||G||_F.
    let frob: f64 = gram
        .iter()
        .flat_map(|row| row.iter())
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt();
    let step = 1.0 / (2.0 * frob).max(1e-30);

    let objective = |p: &[f64]| -> f64 {
        let mut obj = 0.0;
        for k in 0..d {
            let fitted: f64 = (0..n).map(|i| p[i] * xs[i][k]).sum();
            let r = y[k] - fitted;
            obj += r * r;
        }
        obj
    };

    let mut p = vec![1.0 / n as f64; n];
    let mut prev_obj = objective(&p);
    for _ in 0..MAX_ITERS {
        let mut grad = vec![0.0; n];
        for i in 0..n {
            let gp: f64 = (0..n).map(|j| gram[i][j] * p[j]).sum();
            grad[i] = 2.0 * (gp - lin[i]);
        }
        let moved: Vec<f64> = p.iter().zip(&grad).map(|(pi, gi)| pi - step * gi).collect();
        let next = project_to_simplex(&moved);
        let obj = objective(&next);
        p = next;
        if prev_obj - obj < IMPROVEMENT_TOL {
            break;
        }
        prev_obj = obj;
    }
    Ok(p)
}

/// Euclidean norm of `y - sum_i p_i x_i` for already-fitted weights.
pub fn combination_residual(target: &Histogram, basis: &[Histogram], weights: &[f64]) -> f64 {
    let d = target.num_bins();
    let mut obj = 0.0;
    for k in 0..d {
        let fitted: f64 = weights
            .iter()
            .zip(basis)
            .map(|(w, b)| w * b.frequencies[k])
            .sum();
        let r = target.frequencies[k] - fitted;
        obj += r * r;
    }
    obj.sqrt()
}

/// Euclidean projection of `v` onto the probability simplex
/// `{ p : p_i >= 0, sum p_i = 1 }` (sort-based algorithm).
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        acc += u;
        let candidate = (acc - 1.0) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    (0..n).map(|i| (v[i] - theta).max(0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Histogram;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hist(edges: &[f64], freqs: &[f64]) -> Histogram {
        Histogram::new(edges.to_vec(), freqs.to_vec()).unwrap()
    }

    fn random_histogram(rng: &mut ChaCha8Rng, edges: &[f64]) -> Histogram {
        let d = edges.len() - 1;
        let raw: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
        let sum: f64 = raw.iter().sum();
        hist(edges, &raw.iter().map(|v| v / sum).collect::<Vec<_>>())
    }

    /// Exhaustive search over the simplex at the given integer resolution,
    /// independent of the gradient solver.
    pub(crate) fn grid_search_objective(
        target: &Histogram,
        basis: &[Histogram],
        steps: usize,
    ) -> (Vec<f64>, f64) {
        let n = basis.len();
        let mut best = (vec![0.0; n], f64::INFINITY);
        let mut current = vec![0usize; n];
        fn recurse(
            target: &Histogram,
            basis: &[Histogram],
            steps: usize,
            idx: usize,
            left: usize,
            current: &mut Vec<usize>,
            best: &mut (Vec<f64>, f64),
        ) {
            if idx == basis.len() - 1 {
                current[idx] = left;
                let p: Vec<f64> = current.iter().map(|&c| c as f64 / steps as f64).collect();
                let r = combination_residual(target, basis, &p);
                let obj = r * r;
                if obj < best.1 {
                    *best = (p, obj);
                }
                return;
            }
            for c in 0..=left {
                current[idx] = c;
                recurse(target, basis, steps, idx + 1, left - c, current, best);
            }
        }
        recurse(target, basis, steps, 0, steps, &mut current, &mut best);
        best
    }

    #[test]
    fn exact_basis_member_recovers_unit_vector() {
        let edges = [0.0, 1.0, 2.0, 3.0, 4.0];
        let b0 = hist(&edges, &[0.7, 0.1, 0.1, 0.1]);
        let b1 = hist(&edges, &[0.1, 0.7, 0.1, 0.1]);
        let b2 = hist(&edges, &[0.1, 0.1, 0.1, 0.7]);
        let basis = vec![b0.clone(), b1, b2];
        let p = fit_profile_weights(&b0, &basis).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-6, "p = {p:?}");
        assert!(p[1].abs() < 1e-6 && p[2].abs() < 1e-6);
        assert!(combination_residual(&b0, &basis, &p) < 1e-6);
    }

    #[test]
    fn even_blend_recovered_and_matches_grid_oracle() {
        let edges: Vec<f64> = (0..=10).map(|i| i as f64).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x1 = random_histogram(&mut rng, &edges);
        let x2 = random_histogram(&mut rng, &edges);
        let freqs: Vec<f64> = x1
            .frequencies
            .iter()
            .zip(&x2.frequencies)
            .map(|(a, b)| 0.5 * a + 0.5 * b)
            .collect();
        let target = hist(&edges, &freqs);
        let basis = vec![x1, x2];
        let p = fit_profile_weights(&target, &basis).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-6 && (p[1] - 0.5).abs() < 1e-6, "p = {p:?}");
        // Independent 0.01-step oracle confirms a zero objective at (0.5, 0.5).
        let (grid_p, grid_obj) = grid_search_objective(&target, &basis, 100);
        assert!((grid_p[0] - 0.5).abs() < 1e-12);
        assert!(grid_obj < 1e-20);
        let solver_obj = combination_residual(&target, &basis, &p).powi(2);
        assert!(solver_obj <= grid_obj + 1e-12);
    }

    #[test]
    fn single_basis_forces_weight_one() {
        let edges = [0.0, 1.0, 2.0];
        let b0 = hist(&edges, &[0.9, 0.1]);
        let target = hist(&edges, &[0.2, 0.8]);
        let p = fit_profile_weights(&target, &[b0.clone()]).unwrap();
        assert_eq!(p.len(), 1);
        assert!((p[0] - 1.0).abs() < 1e-12);
        assert!(combination_residual(&target, &[b0], &p) > 0.1);
    }

    #[test]
    fn errors_reported() {
        let edges = [0.0, 1.0, 2.0];
        let target = hist(&edges, &[0.5, 0.5]);
        assert_eq!(fit_profile_weights(&target, &[]).unwrap_err(), FitError::EmptyBasis);
        let other = hist(&[0.0, 1.5, 2.0], &[0.5, 0.5]);
        assert_eq!(
            fit_profile_weights(&target, &[other]).unwrap_err(),
            FitError::BinMismatch(0)
        );
    }

    #[test]
    fn output_always_on_simplex() {
        let edges: Vec<f64> = (0..=15).map(|i| i as f64).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let n = rng.gen_range(1..=5);
            let basis: Vec<Histogram> = (0..n).map(|_| random_histogram(&mut rng, &edges)).collect();
            let target = random_histogram(&mut rng, &edges);
            let p = fit_profile_weights(&target, &basis).unwrap();
            assert!(p.iter().all(|v| *v >= -1e-12), "p = {p:?}");
            let sum: f64 = p.iter().sum();
            assert!((sum - 1.0).abs() <= 1e-8, "sum = {sum}");
        }
    }

    #[test]
    fn objective_beats_every_simplex_vertex() {
        let edges: Vec<f64> = (0..=12).map(|i| i as f64).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let n = rng.gen_range(2..=5);
            let basis: Vec<Histogram> = (0..n).map(|_| random_histogram(&mut rng, &edges)).collect();
            let target = random_histogram(&mut rng, &edges);
            let p = fit_profile_weights(&target, &basis).unwrap();
            let solver = combination_residual(&target, &basis, &p);
            for i in 0..n {
                let mut vertex = vec![0.0; n];
                vertex[i] = 1.0;
                let at_vertex = combination_residual(&target, &basis, &vertex);
                assert!(solver <= at_vertex + 1e-9, "vertex {i} beats solver");
            }
        }
    }

    #[test]
    fn projection_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..200 {
            let n = rng.gen_range(1..=8);
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let p = project_to_simplex(&v);
            let sum: f64 = p.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            assert!(p.iter().all(|x| *x >= 0.0));
            // Projection of a simplex point is itself.
            let q = project_to_simplex(&p);
            for (a, b) in p.iter().zip(&q) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }
}

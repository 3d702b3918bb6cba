//! Derivative-free pattern search.
//!
//! Each iteration polls `±step` along the coordinate axes, then along a
//! freshly drawn random orthonormal frame, accepting the first improvement
//! and extending along it while it keeps improving. A failed iteration halves
//! the step. The random frames keep the method from stalling on the kinks of
//! non-smooth gauges (`ℓ1`, `ℓ∞`, cones), where coordinate polling alone can
//! get stuck.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternSearch {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for PatternSearch {
    fn default() -> Self {
        Self {
            initial_step: 0.25,
            min_step: 1e-13,
            max_iters: 5000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// True when the step fell below `min_step` before the iteration cap.
    pub converged: bool,
}

impl PatternSearch {
    pub fn minimize<F>(&self, mut f: F, x0: &[f64]) -> Minimum
    where
        F: FnMut(&[f64]) -> f64,
    {
        let n = x0.len();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut x = x0.to_vec();
        let mut fx = f(&x);
        let mut step = self.initial_step;
        let max_step = 16.0 * self.initial_step;
        let mut iterations = 0;
        let mut converged = false;
        let axes: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
        let mut trial = vec![0.0; n];

        while iterations < self.max_iters {
            if step < self.min_step || fx == 0.0 {
                converged = true;
                break;
            }
            iterations += 1;
            let mut improved = poll(&mut f, &mut x, &mut fx, &axes, step, &mut trial);
            if !improved && n > 1 {
                let frame = random_frame(n, &mut rng);
                improved = poll(&mut f, &mut x, &mut fx, &frame, step, &mut trial);
            }
            if improved {
                step = (2.0 * step).min(max_step);
            } else {
                step *= 0.5;
            }
        }
        if step < self.min_step {
            converged = true;
        }
        Minimum {
            x,
            value: fx,
            iterations,
            converged,
        }
    }
}

fn poll<F>(
    f: &mut F,
    x: &mut [f64],
    fx: &mut f64,
    dirs: &[Vec<f64>],
    step: f64,
    trial: &mut [f64],
) -> bool
where
    F: FnMut(&[f64]) -> f64,
{
    for d in dirs {
        for sign in [1.0, -1.0] {
            let h = sign * step;
            for ((t, xi), di) in trial.iter_mut().zip(x.iter()).zip(d) {
                *t = xi + h * di;
            }
            let ft = f(trial);
            if ft < *fx {
                x.copy_from_slice(trial);
                *fx = ft;
                // extend while the same direction keeps paying off
                let mut h = 2.0 * h;
                for _ in 0..8 {
                    for ((t, xi), di) in trial.iter_mut().zip(x.iter()).zip(d) {
                        *t = xi + h * di;
                    }
                    let ft = f(trial);
                    if ft < *fx {
                        x.copy_from_slice(trial);
                        *fx = ft;
                        h *= 2.0;
                    } else {
                        break;
                    }
                }
                return true;
            }
        }
    }
    false
}

fn random_frame(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(n);
    while frame.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        for b in &frame {
            let dot: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= dot * bi;
            }
        }
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-8 {
            frame.push(v.into_iter().map(|c| c / norm).collect());
        }
    }
    frame
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_smooth_quadratic() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + 10.0 * (x[1] + 0.5).powi(2);
        let m = PatternSearch::default().minimize(f, &[0.0, 0.0]);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-9 && (m.x[1] + 0.5).abs() < 1e-9);
    }

    #[test]
    fn escapes_diagonal_kink() {
        // max-type function whose valley runs diagonally: coordinate polling
        // alone stalls at (1, 1)
        let f = |x: &[f64]| (x[0] - x[1]).abs().max(0.0) * 10.0 + (x[0] + x[1] - 4.0).abs();
        let m = PatternSearch::default().minimize(f, &[1.0, 1.0]);
        assert!(m.value < 1e-10, "{m:?}");
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let f = |x: &[f64]| x.iter().map(|c| c.abs()).sum::<f64>() + (x[0] - x[2]).abs();
        let a = PatternSearch::default().minimize(f, &[0.3, -0.2, 0.9]);
        let b = PatternSearch::default().minimize(f, &[0.3, -0.2, 0.9]);
        assert_eq!(a, b);
    }
}

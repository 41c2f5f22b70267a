use rand::Rng;
use serde::Serialize;

use crate::error::{invalid_arg, Result};
use crate::exec::stream_rng;

/// Point count above which pairs are subsampled.
const EXHAUSTIVE_POINTS: usize = 10_000;
const SUBSAMPLED_PAIRS: usize = 4_000_000;

fn pairs<P>(points: &[P], mut visit: impl FnMut(&P, &P)) {
    let m = points.len();
    if m <= EXHAUSTIVE_POINTS {
        for i in 0..m {
            for j in i + 1..m {
                visit(&points[i], &points[j]);
            }
        }
    } else {
        let mut rng = stream_rng(0x6d65_7472_6963, 0);
        for _ in 0..SUBSAMPLED_PAIRS {
            let i = rng.random_range(0..m);
            let mut j = rng.random_range(0..m - 1);
            if j >= i {
                j += 1;
            }
            visit(&points[i], &points[j]);
        }
    }
}

/// `½ E[d(X₁, X₂)²]` estimated by the U-statistic over distinct pairs.
pub fn metric_variance<P>(points: &[P], d: impl Fn(&P, &P) -> f64) -> Result<f64> {
    if points.len() < 2 {
        return invalid_arg("metric variance needs at least two samples");
    }
    let (mut sum, mut count) = (0.0, 0usize);
    pairs(points, |a, b| {
        sum += d(a, b).powi(2);
        count += 1;
    });
    Ok(0.5 * sum / count as f64)
}

/// `½ Σ_{ij} w_i w_j d(x_i, x_j)²` for a finitely supported distribution.
pub fn metric_variance_exact<P>(
    points: &[P],
    weights: &[f64],
    d: impl Fn(&P, &P) -> f64,
) -> Result<f64> {
    if points.is_empty() || points.len() != weights.len() {
        return invalid_arg("one weight per point required");
    }
    let mut sum = 0.0;
    for (a, wa) in points.iter().zip(weights) {
        for (b, wb) in points.iter().zip(weights) {
            sum += wa * wb * d(a, b).powi(2);
        }
    }
    Ok(0.5 * sum)
}

/// Empirical pair tail against the Chebyshev bound `Var / τ²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChebyshevCheck {
    pub tau: f64,
    pub variance: f64,
    pub tail: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Compares `Pr[d(X₁, X₂) > 2τ]` over sample pairs with `Var / τ²`.
pub fn metric_chebyshev_check<P>(
    points: &[P],
    d: impl Fn(&P, &P) -> f64,
    tau: f64,
) -> Result<ChebyshevCheck> {
    if !(tau > 0.0) {
        return invalid_arg("tolerance must be positive");
    }
    let variance = metric_variance(points, &d)?;
    let (mut hits, mut count) = (0usize, 0usize);
    pairs(points, |a, b| {
        hits += (d(a, b) > 2.0 * tau) as usize;
        count += 1;
    });
    let tail = hits as f64 / count as f64;
    let bound = variance / (tau * tau);
    Ok(ChebyshevCheck {
        tau,
        variance,
        tail,
        bound,
        holds: tail <= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abs(a: &f64, b: &f64) -> f64 {
        (a - b).abs()
    }

    #[test]
    fn identical_samples() {
        assert_eq!(metric_variance(&[0.3; 5], abs).unwrap(), 0.0);
        assert!(metric_variance(&[0.3], abs).is_err());
    }

    #[test]
    fn two_point_distribution() {
        let v = metric_variance_exact(&[0.0, 1.0], &[0.5, 0.5], abs).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
    }

    #[test]
    fn matches_classical_variance() {
        let mut rng = stream_rng(5, 0);
        let xs: Vec<f64> = (0..500).map(|_| rng.random::<f64>() * 3.0).collect();
        let mean = xs.iter().sum::<f64>() / 500.0;
        let unbiased = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 499.0;
        assert!((metric_variance(&xs, abs).unwrap() - unbiased).abs() < 1e-10);
    }

    #[test]
    fn chebyshev_on_uniform_samples() {
        let mut rng = stream_rng(6, 0);
        let xs: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
        for tau in [0.05, 0.2, 0.4] {
            assert!(metric_chebyshev_check(&xs, abs, tau).unwrap().holds);
        }
    }
}

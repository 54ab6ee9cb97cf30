//! Binomial summaries for Monte-Carlo game runs.

use serde::Serialize;

/// z-score of a two-sided 95% interval.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateSummary {
    pub successes: u64,
    pub trials: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Wilson score interval at 95% confidence.
///
/// For `k` successes in `n` trials with `p = k/n` and `z = 1.96`:
/// centre `(p + z²/2n) / (1 + z²/n)`, half-width
/// `z·sqrt(p(1−p)/n + z²/4n²) / (1 + z²/n)`.
pub fn wilson(successes: u64, trials: u64) -> RateSummary {
    if trials == 0 {
        return RateSummary {
            successes,
            trials,
            rate: 0.0,
            ci_low: 0.0,
            ci_high: 1.0,
        };
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    RateSummary {
        successes,
        trials,
        rate: p,
        ci_low: if successes == 0 { 0.0 } else { (centre - half).max(0.0) },
        ci_high: if successes == trials { 1.0 } else { (centre + half).min(1.0) },
    }
}

/// Standard deviation of the sample mean of `n` Bernoulli(p) draws.
pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// True when `observed` lies within `k` binomial standard deviations of `p`.
pub fn within_sigmas(observed: f64, p: f64, n: u64, k: f64) -> bool {
    (observed - p).abs() <= k * binomial_sigma(p, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_brackets_rate() {
        let s = wilson(30, 100);
        assert!(s.ci_low < 0.3 && 0.3 < s.ci_high);
        // reference values for k=30, n=100
        assert!((s.ci_low - 0.2189).abs() < 1e-3);
        assert!((s.ci_high - 0.3958).abs() < 1e-3);
    }

    #[test]
    fn wilson_edges() {
        let s = wilson(0, 50);
        assert_eq!(s.ci_low, 0.0);
        assert!(s.ci_high > 0.0 && s.ci_high < 0.1);
        let s = wilson(50, 50);
        assert_eq!(s.ci_high, 1.0);
        let s = wilson(0, 0);
        assert_eq!((s.ci_low, s.ci_high), (0.0, 1.0));
    }

    #[test]
    fn sigma_window() {
        assert!(within_sigmas(0.26, 0.25, 10_000, 3.0));
        assert!(!within_sigmas(0.30, 0.25, 10_000, 3.0));
    }
}

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Point estimate with a 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub half_width: f64,
}

impl Estimate {
    pub fn lower(&self) -> f64 {
        self.value - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.value + self.half_width
    }

    pub fn covers(&self, x: f64) -> bool {
        (x - self.value).abs() <= self.half_width
    }

    /// `|x - value|` in units of the standard error.
    pub fn z_score(&self, x: f64) -> f64 {
        let d = (x - self.value).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }

    pub(crate) fn undefined() -> Self {
        Estimate {
            value: f64::NAN,
            std_error: f64::NAN,
            half_width: f64::NAN,
        }
    }
}

/// Two-sided 95% Student-t quantile with `dof` degrees of freedom.
pub fn t_quantile_975(dof: usize) -> f64 {
    StudentsT::new(0.0, 1.0, dof.max(1) as f64)
        .expect("valid Student-t")
        .inverse_cdf(0.975)
}

/// Mean and 95% interval from independent observations.
pub fn mean_estimate(values: &[f64]) -> Estimate {
    let n = values.len();
    if n == 0 {
        return Estimate::undefined();
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return Estimate {
            value: mean,
            std_error: f64::NAN,
            half_width: f64::NAN,
        };
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se = (var / n as f64).sqrt();
    Estimate {
        value: mean,
        std_error: se,
        half_width: t_quantile_975(n - 1) * se,
    }
}

/// Batch-means estimate of the mean of a correlated sequence: the sequence
/// is cut into `groups` contiguous blocks whose means are treated as
/// independent.
pub fn batch_means(values: &[f64], groups: usize) -> Estimate {
    let n = values.len();
    if n == 0 {
        return Estimate::undefined();
    }
    let groups = groups.min(n / 2).max(1);
    if groups < 2 {
        return mean_estimate(values);
    }
    let means: Vec<f64> = (0..groups)
        .map(|g| {
            let lo = g * n / groups;
            let hi = (g + 1) * n / groups;
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect();
    let mut e = mean_estimate(&means);
    // Report the overall mean rather than the mean of unequal blocks.
    e.value = values.iter().sum::<f64>() / n as f64;
    e
}

/// Nearest-rank quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = (p * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_quantiles() {
        assert!((t_quantile_975(1) - 12.706).abs() < 1e-3);
        assert!((t_quantile_975(19) - 2.093).abs() < 1e-3);
        assert!((t_quantile_975(10_000) - 1.960).abs() < 1e-3);
    }

    #[test]
    fn mean_estimate_basic() {
        let e = mean_estimate(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.value, 2.5);
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((e.std_error - sd / 2.0).abs() < 1e-12);
        assert!(mean_estimate(&[]).value.is_nan());
    }

    #[test]
    fn batch_means_constant_sequence() {
        let e = batch_means(&vec![0.25; 1000], 50);
        assert_eq!(e.value, 0.25);
        assert_eq!(e.half_width, 0.0);
    }

    #[test]
    fn nearest_rank() {
        let s: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(quantile_sorted(&s, 0.99), 99.0);
        assert_eq!(quantile_sorted(&s, 1.0), 100.0);
        assert_eq!(quantile_sorted(&s, 0.0), 1.0);
    }
}

use statrs::function::gamma::ln_gamma;

/// Poisson probabilities `P(N = k)` for `N ~ Poisson(mean)`, truncated on
/// the right once the remaining mass drops below the error budget.
#[derive(Debug, Clone)]
pub struct PoissonWeights {
    weights: Vec<f64>,
    omitted: f64,
}

impl PoissonWeights {
    pub fn new(mean: f64, budget: f64) -> Self {
        assert!(mean >= 0.0 && mean.is_finite());
        if mean == 0.0 {
            return PoissonWeights {
                weights: vec![1.0],
                omitted: 0.0,
            };
        }
        let ln_mean = mean.ln();
        let mut weights = Vec::new();
        let mut cumulative = 0.0;
        let mut k = 0u64;
        loop {
            let kf = k as f64;
            let w = (kf * ln_mean - mean - ln_gamma(kf + 1.0)).exp();
            weights.push(w);
            cumulative += w;
            if kf > mean && 1.0 - cumulative < budget {
                break;
            }
            k += 1;
        }
        PoissonWeights {
            weights,
            omitted: (1.0 - cumulative).max(0.0),
        }
    }

    /// Number of terms needed to stay within the budget for `mean`.
    pub fn terms(mean: f64, budget: f64) -> usize {
        PoissonWeights::new(mean, budget).weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Probability mass beyond the last kept term.
    pub fn omitted(&self) -> f64 {
        self.omitted
    }

    /// `sum_k P(N = k) values[k]`, treating missing entries as zero.
    pub fn mix(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one_within_budget() {
        for mean in [0.0, 0.1, 3.0, 40.0, 900.0, 25_000.0] {
            let p = PoissonWeights::new(mean, 1e-10);
            let total: f64 = p.weights().iter().sum();
            assert!((total - 1.0).abs() < 2e-10, "mean {mean}: {total}");
            assert!(p.omitted() < 1e-10);
        }
    }

    #[test]
    fn small_mean_matches_direct_formula() {
        let p = PoissonWeights::new(2.5, 1e-12);
        let mut direct = (-2.5f64).exp();
        for (k, w) in p.weights().iter().enumerate() {
            if k > 0 {
                direct *= 2.5 / k as f64;
            }
            assert!((w - direct).abs() < 1e-14);
        }
    }
}

//! Efficient scores and information for multinomial data whose cell
//! probabilities depend on `eta = 1 - 2 chi`.

use super::LikelihoodError;

/// Central-difference step for category derivatives at `eta = 0`.
pub const SCORE_STEP: f64 = 1e-5;

type EtaFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// A data category with probability `p(eta)`, optionally with an analytic
/// derivative `p'(eta)`.
pub struct ScoreCategory {
    probability: EtaFn,
    derivative: Option<EtaFn>,
}

impl ScoreCategory {
    pub fn new(p: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        ScoreCategory { probability: Box::new(p), derivative: None }
    }

    pub fn with_derivative(
        p: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dp: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ScoreCategory { probability: Box::new(p), derivative: Some(Box::new(dp)) }
    }

    pub fn probability(&self, eta: f64) -> f64 {
        (self.probability)(eta)
    }

    fn slope_at_null(&self) -> f64 {
        match &self.derivative {
            Some(dp) => dp(0.0),
            None => {
                let h = SCORE_STEP;
                (self.probability(h) - self.probability(-h)) / (2.0 * h)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    /// `sum_i a_i x_i`.
    pub score: f64,
    /// `N * sum_i p_i a_i^2`.
    pub information: f64,
    pub information_per_observation: f64,
    /// `a_i = p_i'(0) / p_i(0)`; zero for categories with `p_i(0) = 0`.
    pub category_scores: Vec<f64>,
    pub observations: u64,
}

/// Efficient score and expected information at `eta = 0`.
pub fn finney_score(categories: &[ScoreCategory], counts: &[u64]) -> Result<ScoreReport, LikelihoodError> {
    if categories.len() != counts.len() {
        return Err(LikelihoodError::CategoryMismatch {
            categories: categories.len(),
            counts: counts.len(),
        });
    }
    let null: Vec<f64> = categories.iter().map(|c| c.probability(0.0)).collect();
    let total: f64 = null.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(LikelihoodError::NotNormalized(total));
    }
    let mut a = Vec::with_capacity(categories.len());
    for (i, (cat, &p0)) in categories.iter().zip(&null).enumerate() {
        if p0 == 0.0 {
            if counts[i] > 0 {
                return Err(LikelihoodError::NullProbabilityZero(i));
            }
            a.push(0.0);
        } else {
            a.push(cat.slope_at_null() / p0);
        }
    }
    let n: u64 = counts.iter().sum();
    let score = a.iter().zip(counts).map(|(ai, &x)| ai * x as f64).sum();
    let per_obs: f64 = null.iter().zip(&a).map(|(p, ai)| p * ai * ai).sum();
    Ok(ScoreReport {
        score,
        information: n as f64 * per_obs,
        information_per_observation: per_obs,
        category_scores: a,
        observations: n,
    })
}

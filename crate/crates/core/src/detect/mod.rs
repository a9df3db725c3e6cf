//! Linkage detection: sequential tests, false-discovery arithmetic, the
//! odds-of-error identity, the admixture heterogeneity test, elods and
//! Kullback-Leibler information.

mod elod;
mod hetero;

use thiserror::Error;

use crate::likelihood::LikelihoodError;
use crate::sim::SimError;

pub use elod::{
    data_law, elod_enumerate, elod_enumerate_design, elod_monte_carlo, elod_monte_carlo_design,
    ElodMethod, ElodResult,
};
pub use hetero::{heterogeneity_test, HetTestResult, ALPHA_TOLERANCE};

/// One-in-twenty prior probability of linkage.
pub const PI_ONE_IN_20: f64 = 1.0 / 20.0;
/// One-in-twenty-four prior probability of linkage.
pub const PI_ONE_IN_24: f64 = 1.0 / 24.0;

/// Tolerance on the total mass of a finite distribution.
const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("critical region has zero probability under the alternative")]
    ZeroPowerRegion,
    #[error("outcome {0} is in the critical region with zero alternative probability but positive null probability")]
    UndefinedRatio(usize),
    #[error("outcome {0} has positive mass under the first law but none under the second")]
    SupportMismatch(usize),
    #[error("distributions have {0} and {1} outcomes")]
    LengthMismatch(usize, usize),
    #[error("lod curve grid does not contain 0.5")]
    GridMissingNull,
    #[error("lod curves are not on a shared grid")]
    GridMismatch,
    #[error("need at least {needed} families, got {got}")]
    TooFewFamilies { needed: usize, got: usize },
    #[error("zero replicates requested")]
    ZeroReplicates,
    #[error(transparent)]
    Likelihood(#[from] LikelihoodError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SprtConfig {
    pub alpha: f64,
    pub beta: f64,
    /// Recombination fraction of the simple alternative.
    pub chi_alt: f64,
}

impl SprtConfig {
    pub fn new(alpha: f64, beta: f64, chi_alt: f64) -> Result<Self, DetectError> {
        let open = |x: f64| x > 0.0 && x < 1.0;
        if !open(alpha) || !open(beta) || alpha + beta >= 1.0 {
            return Err(DetectError::InvalidArgument(format!(
                "need 0 < alpha, beta < 1 and alpha + beta < 1, got alpha={alpha}, beta={beta}"
            )));
        }
        if !(0.0..0.5).contains(&chi_alt) {
            return Err(DetectError::InvalidArgument(format!("chi_alt {chi_alt} outside [0, 0.5)")));
        }
        Ok(SprtConfig { alpha, beta, chi_alt })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SprtBoundaries {
    pub log10_a: f64,
    pub log10_b: f64,
}

/// Upper boundary `A = (1 - beta) / alpha` and lower boundary
/// `B = beta / (1 - alpha)`, in base-10 logs.
pub fn sprt_boundaries(cfg: &SprtConfig) -> SprtBoundaries {
    SprtBoundaries {
        log10_a: ((1.0 - cfg.beta) / cfg.alpha).log10(),
        log10_b: (cfg.beta / (1.0 - cfg.alpha)).log10(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SprtDecision {
    DeclareLinkage { step: usize, total: f64 },
    DeclareNoLinkage { step: usize, total: f64 },
    Undecided { steps: usize, total: f64 },
}

impl SprtDecision {
    pub fn total(&self) -> f64 {
        match *self {
            SprtDecision::DeclareLinkage { total, .. }
            | SprtDecision::DeclareNoLinkage { total, .. }
            | SprtDecision::Undecided { total, .. } => total,
        }
    }
}

/// Accumulates per-family lods until the running total first reaches
/// either boundary. Steps are 1-based.
pub fn sprt_run<I: IntoIterator<Item = f64>>(lods: I, b: &SprtBoundaries) -> SprtDecision {
    let mut total = 0.0;
    let mut steps = 0;
    for l in lods {
        steps += 1;
        total += l;
        if total >= b.log10_a {
            return SprtDecision::DeclareLinkage { step: steps, total };
        }
        if total <= b.log10_b {
            return SprtDecision::DeclareNoLinkage { step: steps, total };
        }
    }
    SprtDecision::Undecided { steps, total }
}

/// Probability that a declared linkage is false,
/// `alpha (1 - pi) / (alpha (1 - pi) + pi W)`.
///
/// Evaluated in prior-odds form, `alpha o / (alpha o + W)` with
/// `o = 1/pi - 1`, so `pi = 1/20` gives `19 alpha / (19 alpha + W)` to the
/// last bit.
pub fn fdr(alpha: f64, pi: f64, power: f64) -> Result<f64, DetectError> {
    for (name, v) in [("alpha", alpha), ("pi", pi), ("power", power)] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(DetectError::InvalidArgument(format!("{name} = {v} outside (0, 1]")));
        }
    }
    let odds = 1.0 / pi - 1.0;
    let false_rate = alpha * odds;
    Ok(false_rate / (false_rate + power))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OddsOfError {
    pub alpha: f64,
    pub power: f64,
    /// `E1(f0/f1 | X in C)`.
    pub conditional_mean_lr: f64,
}

fn check_distribution(f: &[f64]) -> Result<(), DetectError> {
    if f.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(DetectError::InvalidArgument("probabilities must be finite and nonnegative".into()));
    }
    let total: f64 = f.iter().sum();
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(DetectError::InvalidArgument(format!("probabilities sum to {total}")));
    }
    Ok(())
}

/// Size, power and the alternative-conditional mean likelihood ratio of a
/// critical region; `alpha / power` equals the last.
pub fn odds_of_error_check(f0: &[f64], f1: &[f64], critical: &[usize]) -> Result<OddsOfError, DetectError> {
    if f0.len() != f1.len() {
        return Err(DetectError::LengthMismatch(f0.len(), f1.len()));
    }
    check_distribution(f0)?;
    check_distribution(f1)?;
    let mut region = critical.to_vec();
    region.sort_unstable();
    region.dedup();
    if let Some(&x) = region.iter().find(|&&x| x >= f0.len()) {
        return Err(DetectError::InvalidArgument(format!("outcome {x} out of range")));
    }
    let mut alpha = 0.0;
    let mut power = 0.0;
    let mut weighted = 0.0;
    for &x in &region {
        alpha += f0[x];
        power += f1[x];
        if f1[x] > 0.0 {
            weighted += f1[x] * (f0[x] / f1[x]);
        } else if f0[x] > 0.0 {
            return Err(DetectError::UndefinedRatio(x));
        }
    }
    if power == 0.0 {
        return Err(DetectError::ZeroPowerRegion);
    }
    Ok(OddsOfError { alpha, power, conditional_mean_lr: weighted / power })
}

/// `sum f0 ln(f0 / f1)` in natural-log units.
pub fn kl_information(f0: &[f64], f1: &[f64]) -> Result<f64, DetectError> {
    if f0.len() != f1.len() {
        return Err(DetectError::LengthMismatch(f0.len(), f1.len()));
    }
    check_distribution(f0)?;
    check_distribution(f1)?;
    let mut kl = 0.0;
    for (x, (&a, &b)) in f0.iter().zip(f1).enumerate() {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return Err(DetectError::SupportMismatch(x));
        }
        kl += a * (a / b).ln();
    }
    Ok(kl)
}

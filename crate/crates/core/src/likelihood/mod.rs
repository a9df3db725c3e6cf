//! Exact pedigree likelihoods.
//!
//! [`LikelihoodEngine`] evaluates the probability of observed trait and
//! marker data on a pedigree by peeling over nuclear families. Every
//! accumulation is kept in natural-log space. Pedigrees whose marriage
//! graph contains a loop fall back to explicit enumeration
//! ([`brute_force_loglik`]), which doubles as the test oracle for the
//! peeling route.

mod enumerate;
mod lod;
mod peel;
mod score;

use thiserror::Error;

use crate::model::{penetrance_prob, founder_prior, ModelError, Phenotype, TwoLocusModel};
use crate::pedigree::{peeling_order, Pedigree, PedigreeError, PeelingOrder};

pub use enumerate::{
    brute_force_loglik, brute_force_loglik_with_limit, brute_force_posterior,
    DEFAULT_ENUMERATION_LIMIT,
};
pub use lod::{
    family_lod_curves, family_lods, lod, lod_curve, mle_recombination, ChiGrid, LodCurve,
    LodFunction, MleResult, MLE_GRID_POINTS, MLE_TOLERANCE,
};
pub use score::{finney_score, ScoreCategory, ScoreReport, SCORE_STEP};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LikelihoodError {
    #[error("data has {got} records for a pedigree of {expected} individuals")]
    DataMismatch { expected: usize, got: usize },
    #[error("individual {individual:?}: marker allele {allele} out of range")]
    InvalidAllele { individual: String, allele: usize },
    #[error("{individuals} individuals exceed the enumeration limit of {limit}")]
    TooLargeToEnumerate { individuals: usize, limit: usize },
    #[error("data in family {0:?} have zero probability under the model")]
    InconsistentData(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Pedigree(#[from] PedigreeError),
    #[error("{categories} categories but {counts} counts")]
    CategoryMismatch { categories: usize, counts: usize },
    #[error("null category probabilities sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("category {0} has zero null probability but positive count")]
    NullProbabilityZero(usize),
    #[error("lod curve grid must contain 0.5 and be strictly increasing in [0, 0.5]")]
    InvalidGrid,
    #[error("no families supplied")]
    NoFamilies,
}

/// One individual's observations. Marker alleles are 0-based and stored
/// smaller first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Observation {
    pub phenotype: Phenotype,
    pub marker: Option<(usize, usize)>,
}

impl Observation {
    pub fn new(phenotype: Phenotype, marker: Option<(usize, usize)>) -> Self {
        Observation { phenotype, marker: marker.map(|(a, b)| crate::model::sorted(a, b)) }
    }

    pub fn is_unknown(&self) -> bool {
        self.phenotype == Phenotype::Unknown && self.marker.is_none()
    }
}

/// Observations for every individual of a pedigree, in pedigree order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ObservedData {
    records: Vec<Observation>,
}

impl ObservedData {
    pub fn new(records: Vec<Observation>) -> Self {
        ObservedData { records }
    }

    pub fn unknown(n: usize) -> Self {
        ObservedData { records: vec![Observation::default(); n] }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[Observation] {
        &self.records
    }

    pub fn get(&self, i: usize) -> Observation {
        self.records[i]
    }

    pub fn set(&mut self, i: usize, obs: Observation) {
        self.records[i] = Observation::new(obs.phenotype, obs.marker);
    }

    pub(crate) fn validate(&self, p: &Pedigree, m: &TwoLocusModel) -> Result<(), LikelihoodError> {
        if self.records.len() != p.len() {
            return Err(LikelihoodError::DataMismatch { expected: p.len(), got: self.records.len() });
        }
        let nm = m.marker_locus.n_alleles();
        for (i, obs) in self.records.iter().enumerate() {
            if let Some((a, b)) = obs.marker {
                if a >= nm || b >= nm {
                    return Err(LikelihoodError::InvalidAllele {
                        individual: p.id(i).to_string(),
                        allele: a.max(b) + 1,
                    });
                }
            }
        }
        Ok(())
    }
}

/// A pedigree together with its observations; lods add over families.
#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    pub pedigree: Pedigree,
    pub data: ObservedData,
}

impl Family {
    pub fn new(pedigree: Pedigree, data: ObservedData) -> Self {
        Family { pedigree, data }
    }
}

/// Linear-domain evidence factor P(observation | phased state).
pub(crate) fn evidence(m: &TwoLocusModel, obs: &Observation) -> Vec<f64> {
    m.states()
        .map(|g| {
            let marker_ok = obs.marker.is_none_or(|mk| mk == g.marker_genotype());
            if marker_ok {
                penetrance_prob(obs.phenotype, &g, &m.penetrance)
            } else {
                0.0
            }
        })
        .collect()
}

pub(crate) fn founder_priors(m: &TwoLocusModel) -> Vec<f64> {
    m.states().map(|g| founder_prior(&g, &m.trait_locus, &m.marker_locus)).collect()
}

/// Per-individual log factors: evidence, times the founder prior for
/// founders.
pub(crate) fn log_unaries(p: &Pedigree, m: &TwoLocusModel, d: &ObservedData) -> Vec<Vec<f64>> {
    let prior = founder_priors(m);
    (0..p.len())
        .map(|i| {
            let e = evidence(m, &d.get(i));
            if p.is_founder(i) {
                e.iter().zip(&prior).map(|(x, q)| (x * q).ln()).collect()
            } else {
                e.iter().map(|x| x.ln()).collect()
            }
        })
        .collect()
}

/// Exact marginal posteriors of every individual's phased genotype.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub loglik: f64,
    /// `marginals[i][s]` is P(individual i has phased state s | data).
    pub marginals: Vec<Vec<f64>>,
}

/// Likelihood evaluator bound to one pedigree and model. Peels when the
/// pedigree is loop-free, otherwise enumerates (subject to the
/// enumeration limit).
#[derive(Debug, Clone)]
pub struct LikelihoodEngine<'a> {
    pedigree: &'a Pedigree,
    model: &'a TwoLocusModel,
    order: Option<PeelingOrder>,
}

impl<'a> LikelihoodEngine<'a> {
    pub fn new(pedigree: &'a Pedigree, model: &'a TwoLocusModel) -> Self {
        let order = match peeling_order(pedigree) {
            Ok(order) => Some(order),
            Err(PedigreeError::LoopDetected(id)) => {
                log::debug!("family {}: loop through {id}, using enumeration", pedigree.family_id());
                None
            }
            Err(e) => unreachable!("validated pedigree failed to order: {e}"),
        };
        LikelihoodEngine { pedigree, model, order }
    }

    pub fn pedigree(&self) -> &Pedigree {
        self.pedigree
    }

    pub fn model(&self) -> &TwoLocusModel {
        self.model
    }

    pub fn is_peelable(&self) -> bool {
        self.order.is_some()
    }

    /// Natural-log likelihood at recombination fraction `chi`; `-inf` when
    /// the data are impossible.
    pub fn loglik(&self, d: &ObservedData, chi: f64) -> Result<f64, LikelihoodError> {
        let r = crate::model::RecombinationParam::new(chi)?;
        self.loglik_at(d, r)
    }

    /// Log-likelihood as a function of `eta = 1 - 2 chi`, continued to
    /// `eta` in `[-1, 1]` so that derivatives at the null can be taken by
    /// central differences.
    pub fn loglik_eta(&self, d: &ObservedData, eta: f64) -> Result<f64, LikelihoodError> {
        if !(-1.0..=1.0).contains(&eta) {
            return Err(ModelError::InvalidEta(eta).into());
        }
        self.loglik_at(d, crate::model::RecombinationParam::continued((1.0 - eta) / 2.0))
    }

    fn loglik_at(
        &self,
        d: &ObservedData,
        r: crate::model::RecombinationParam,
    ) -> Result<f64, LikelihoodError> {
        d.validate(self.pedigree, self.model)?;
        let unaries = log_unaries(self.pedigree, self.model, d);
        self.loglik_unaries(&unaries, r)
    }

    pub(crate) fn loglik_unaries(
        &self,
        unaries: &[Vec<f64>],
        r: crate::model::RecombinationParam,
    ) -> Result<f64, LikelihoodError> {
        match &self.order {
            Some(order) => Ok(peel::collect(order, self.model, unaries, r)),
            None => enumerate::enumerate_unaries(
                self.pedigree,
                self.model,
                unaries,
                r,
                DEFAULT_ENUMERATION_LIMIT,
                false,
            )
            .map(|(ll, _)| ll),
        }
    }

    /// Marginal genotype posteriors by an upward then downward pass.
    pub fn posterior(&self, d: &ObservedData, chi: f64) -> Result<Posterior, LikelihoodError> {
        let r = crate::model::RecombinationParam::new(chi)?;
        d.validate(self.pedigree, self.model)?;
        let unaries = log_unaries(self.pedigree, self.model, d);
        self.posterior_unaries(&unaries, r)
    }

    pub(crate) fn posterior_unaries(
        &self,
        unaries: &[Vec<f64>],
        r: crate::model::RecombinationParam,
    ) -> Result<Posterior, LikelihoodError> {
        let posterior = match &self.order {
            Some(order) => peel::posterior(order, self.model, unaries, r),
            None => {
                let (loglik, marginals) = enumerate::enumerate_unaries(
                    self.pedigree,
                    self.model,
                    unaries,
                    r,
                    DEFAULT_ENUMERATION_LIMIT,
                    true,
                )?;
                Posterior { loglik, marginals: marginals.expect("marginals requested") }
            }
        };
        if posterior.loglik == f64::NEG_INFINITY {
            return Err(LikelihoodError::InconsistentData(self.pedigree.family_id().to_string()));
        }
        Ok(posterior)
    }
}

/// Natural-log likelihood of `d` on `p` at recombination fraction `chi`.
/// Returns `-inf` for data with zero probability.
pub fn pedigree_loglik(
    p: &Pedigree,
    m: &TwoLocusModel,
    d: &ObservedData,
    chi: f64,
) -> Result<f64, LikelihoodError> {
    LikelihoodEngine::new(p, m).loglik(d, chi)
}

/// Exact marginal posterior of every individual's phased genotype.
pub fn posterior_genotypes(
    p: &Pedigree,
    m: &TwoLocusModel,
    d: &ObservedData,
    chi: f64,
) -> Result<Posterior, LikelihoodError> {
    LikelihoodEngine::new(p, m).posterior(d, chi)
}

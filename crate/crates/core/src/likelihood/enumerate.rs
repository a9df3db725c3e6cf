//! Likelihood by explicit summation over joint phased-genotype
//! assignments. Used as the fallback for looped pedigrees and as the
//! independent oracle for peeling.

use crate::model::{transmission_prob, RecombinationParam, TwoLocusModel};
use crate::pedigree::Pedigree;

use super::{evidence, founder_priors, LikelihoodError, ObservedData, Posterior};

/// Largest pedigree enumerated by default.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 8;

pub fn brute_force_loglik(
    p: &Pedigree,
    m: &TwoLocusModel,
    d: &ObservedData,
    chi: f64,
) -> Result<f64, LikelihoodError> {
    brute_force_loglik_with_limit(p, m, d, chi, DEFAULT_ENUMERATION_LIMIT)
}

pub fn brute_force_loglik_with_limit(
    p: &Pedigree,
    m: &TwoLocusModel,
    d: &ObservedData,
    chi: f64,
    limit: usize,
) -> Result<f64, LikelihoodError> {
    guard(p, limit)?;
    let r = RecombinationParam::new(chi)?;
    d.validate(p, m)?;
    let weights = linear_weights(p, m, d);
    Ok(Enumerator::new(p, m, &weights, r).run(false).0.ln())
}

pub fn brute_force_posterior(
    p: &Pedigree,
    m: &TwoLocusModel,
    d: &ObservedData,
    chi: f64,
) -> Result<Posterior, LikelihoodError> {
    guard(p, DEFAULT_ENUMERATION_LIMIT)?;
    let r = RecombinationParam::new(chi)?;
    d.validate(p, m)?;
    let weights = linear_weights(p, m, d);
    let (total, marginals) = Enumerator::new(p, m, &weights, r).run(true);
    if total == 0.0 {
        return Err(LikelihoodError::InconsistentData(p.family_id().to_string()));
    }
    let marginals = marginals
        .expect("requested")
        .into_iter()
        .map(|row| row.into_iter().map(|x| x / total).collect())
        .collect();
    Ok(Posterior { loglik: total.ln(), marginals })
}

fn guard(p: &Pedigree, limit: usize) -> Result<(), LikelihoodError> {
    if p.len() > limit {
        return Err(LikelihoodError::TooLargeToEnumerate { individuals: p.len(), limit });
    }
    Ok(())
}

fn linear_weights(p: &Pedigree, m: &TwoLocusModel, d: &ObservedData) -> Vec<Vec<f64>> {
    let prior = founder_priors(m);
    (0..p.len())
        .map(|i| {
            let e = evidence(m, &d.get(i));
            if p.is_founder(i) {
                e.iter().zip(&prior).map(|(x, q)| x * q).collect()
            } else {
                e
            }
        })
        .collect()
}

/// Enumeration over log-domain unaries, used by the engine when peeling
/// is unavailable. Returns the log-likelihood and, when asked, marginals.
pub(crate) fn enumerate_unaries(
    p: &Pedigree,
    m: &TwoLocusModel,
    unaries: &[Vec<f64>],
    r: RecombinationParam,
    limit: usize,
    marginals: bool,
) -> Result<(f64, Option<Vec<Vec<f64>>>), LikelihoodError> {
    guard(p, limit)?;
    // Rescale each unary so the linear sum cannot underflow.
    let mut offset = 0.0;
    let weights: Vec<Vec<f64>> = unaries
        .iter()
        .map(|u| {
            let max = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if max == f64::NEG_INFINITY {
                return vec![0.0; u.len()];
            }
            offset += max;
            u.iter().map(|x| (x - max).exp()).collect()
        })
        .collect();
    let (total, marg) = Enumerator::new(p, m, &weights, r).run(marginals);
    let marg = marg.map(|rows| {
        rows.into_iter()
            .map(|row| row.into_iter().map(|x| if total > 0.0 { x / total } else { 0.0 }).collect())
            .collect()
    });
    Ok((total.ln() + offset, marg))
}

struct Enumerator<'a> {
    p: &'a Pedigree,
    weights: &'a [Vec<f64>],
    // trans[parent_state * H + haplotype]
    trans: Vec<f64>,
    n_states: usize,
    n_haplotypes: usize,
}

impl<'a> Enumerator<'a> {
    fn new(p: &'a Pedigree, m: &TwoLocusModel, weights: &'a [Vec<f64>], r: RecombinationParam) -> Self {
        let n_haplotypes = m.n_haplotypes();
        let mut trans = Vec::with_capacity(m.n_states() * n_haplotypes);
        for g in m.states() {
            for h in 0..n_haplotypes {
                trans.push(transmission_prob(&g, &m.haplotype(h), r));
            }
        }
        Enumerator { p, weights, trans, n_states: m.n_states(), n_haplotypes }
    }

    fn run(&self, want_marginals: bool) -> (f64, Option<Vec<Vec<f64>>>) {
        let n = self.p.len();
        let mut assignment = vec![usize::MAX; n];
        let mut total = 0.0;
        let mut marginals = want_marginals.then(|| vec![vec![0.0; self.n_states]; n]);
        self.descend(0, 1.0, &mut assignment, &mut total, &mut marginals);
        (total, marginals)
    }

    fn descend(
        &self,
        depth: usize,
        weight: f64,
        assignment: &mut [usize],
        total: &mut f64,
        marginals: &mut Option<Vec<Vec<f64>>>,
    ) {
        let order = self.p.topological_order();
        if depth == order.len() {
            *total += weight;
            if let Some(marg) = marginals {
                for (i, &s) in assignment.iter().enumerate() {
                    marg[i][s] += weight;
                }
            }
            return;
        }
        let ind = order[depth];
        let h = self.n_haplotypes;
        for s in 0..self.n_states {
            let mut w = self.weights[ind][s];
            if w == 0.0 {
                continue;
            }
            if let Some((f, m)) = self.p.parents(ind) {
                let (pat, mat) = (s / h, s % h);
                w *= self.trans[assignment[f] * h + pat] * self.trans[assignment[m] * h + mat];
                if w == 0.0 {
                    continue;
                }
            }
            assignment[ind] = s;
            self.descend(depth + 1, weight * w, assignment, total, marginals);
        }
        assignment[ind] = usize::MAX;
    }
}

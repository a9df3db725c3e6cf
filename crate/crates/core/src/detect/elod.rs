//! Expected lod scores, by exhaustive enumeration of observable data or
//! by gene-drop Monte Carlo.

use std::f64::consts::LN_10;

use rayon::prelude::*;

use crate::likelihood::{
    LikelihoodEngine, LikelihoodError, Observation, ObservedData, DEFAULT_ENUMERATION_LIMIT,
};
use crate::model::{Phenotype, TwoLocusModel};
use crate::pedigree::Pedigree;
use crate::sim::{drop_with_rng, replicate_rng, ObservationDesign, Role};

use super::DetectError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElodMethod {
    Enumeration,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElodResult {
    /// Expected base-10 lod.
    pub value: f64,
    /// Present for Monte Carlo estimates only.
    pub standard_error: Option<f64>,
    pub method: ElodMethod,
    pub replicates: Option<usize>,
}

fn check_chi(chi: f64) -> Result<(), DetectError> {
    if !(0.0..=0.5).contains(&chi) {
        return Err(LikelihoodError::from(crate::model::ModelError::InvalidRecombination(chi)).into());
    }
    Ok(())
}

/// Depth-first walk over every complete observation of the simulated
/// individuals (phenotype affected/unaffected times unordered marker
/// genotype), skipping branches whose likelihood at `chi = 1/2` is zero.
/// Since every transmission with positive probability at some `chi` has
/// positive probability at 1/2, the pruned set is the union of the
/// supports over all `chi`.
struct Configurations<'a> {
    engine: LikelihoodEngine<'a>,
    slots: Vec<usize>,
    options: Vec<Observation>,
}

impl<'a> Configurations<'a> {
    fn new(p: &'a Pedigree, m: &'a TwoLocusModel, design: &ObservationDesign) -> Result<Self, DetectError> {
        if p.len() > DEFAULT_ENUMERATION_LIMIT {
            return Err(LikelihoodError::TooLargeToEnumerate {
                individuals: p.len(),
                limit: DEFAULT_ENUMERATION_LIMIT,
            }
            .into());
        }
        if design.len() != p.len() {
            return Err(crate::sim::SimError::DesignMismatch { expected: p.len(), got: design.len() }.into());
        }
        let slots = (0..p.len()).filter(|&i| design.roles()[i] == Role::Simulated).collect();
        let n = m.marker_locus.n_alleles();
        let mut options = Vec::new();
        for phenotype in [Phenotype::Affected, Phenotype::Unaffected] {
            for a in 0..n {
                for b in a..n {
                    options.push(Observation::new(phenotype, Some((a, b))));
                }
            }
        }
        Ok(Configurations { engine: LikelihoodEngine::new(p, m), slots, options })
    }

    fn visit<F>(&self, start: ObservedData, leaf: &mut F) -> Result<(), DetectError>
    where
        F: FnMut(&ObservedData) -> Result<(), DetectError>,
    {
        let mut data = start;
        self.walk(0, &mut data, leaf)
    }

    fn walk<F>(&self, depth: usize, data: &mut ObservedData, leaf: &mut F) -> Result<(), DetectError>
    where
        F: FnMut(&ObservedData) -> Result<(), DetectError>,
    {
        if depth == self.slots.len() {
            return leaf(data);
        }
        let i = self.slots[depth];
        for &obs in &self.options {
            data.set(i, obs);
            if self.engine.loglik(data, 0.5)? > f64::NEG_INFINITY {
                self.walk(depth + 1, data, leaf)?;
            }
        }
        data.set(i, Observation::default());
        Ok(())
    }
}

fn fixed_loglik(engine: &LikelihoodEngine, design: &ObservationDesign, chi: f64) -> Result<f64, DetectError> {
    let ll = engine.loglik(&design.fixed_data(), chi)?;
    if ll == f64::NEG_INFINITY {
        return Err(LikelihoodError::InconsistentData(engine.pedigree().family_id().to_string()).into());
    }
    Ok(ll)
}

/// Every observable configuration of `design` in the support at
/// `chi = 1/2`, with its probability at `chi` given the fixed data.
pub fn data_law(
    p: &Pedigree,
    m: &TwoLocusModel,
    design: &ObservationDesign,
    chi: f64,
) -> Result<Vec<(ObservedData, f64)>, DetectError> {
    check_chi(chi)?;
    let configs = Configurations::new(p, m, design)?;
    let base = fixed_loglik(&configs.engine, design, chi)?;
    let mut law = Vec::new();
    configs.visit(design.fixed_data(), &mut |d| {
        let ll = configs.engine.loglik(d, chi)?;
        law.push((d.clone(), (ll - base).exp()));
        Ok(())
    })?;
    Ok(law)
}

/// Exact elod with every individual observed.
pub fn elod_enumerate(
    p: &Pedigree,
    m: &TwoLocusModel,
    chi_true: f64,
    chi_eval: f64,
) -> Result<ElodResult, DetectError> {
    elod_enumerate_design(p, m, &ObservationDesign::all_simulated(p.len()), chi_true, chi_eval)
}

/// Exact elod: the lod at `chi_eval` averaged over the law of the data at
/// `chi_true`, given the design's fixed observations.
pub fn elod_enumerate_design(
    p: &Pedigree,
    m: &TwoLocusModel,
    design: &ObservationDesign,
    chi_true: f64,
    chi_eval: f64,
) -> Result<ElodResult, DetectError> {
    check_chi(chi_true)?;
    check_chi(chi_eval)?;
    let configs = Configurations::new(p, m, design)?;
    let base = fixed_loglik(&configs.engine, design, chi_true)?;
    let mut value = 0.0;
    configs.visit(design.fixed_data(), &mut |d| {
        let ll_true = configs.engine.loglik(d, chi_true)?;
        if ll_true == f64::NEG_INFINITY {
            return Ok(());
        }
        let lod = (configs.engine.loglik(d, chi_eval)? - configs.engine.loglik(d, 0.5)?) / LN_10;
        value += (ll_true - base).exp() * lod;
        Ok(())
    })?;
    Ok(ElodResult { value, standard_error: None, method: ElodMethod::Enumeration, replicates: None })
}

/// Monte Carlo elod with every individual observed and no missingness.
pub fn elod_monte_carlo(
    p: &Pedigree,
    m: &TwoLocusModel,
    chi_true: f64,
    chi_eval: f64,
    replicates: usize,
    seed: u64,
) -> Result<ElodResult, DetectError> {
    elod_monte_carlo_design(p, m, &ObservationDesign::all_simulated(p.len()), chi_true, chi_eval, replicates, seed)
}

/// Mean and standard error of the lod at `chi_eval` over data sets
/// gene-dropped at `chi_true`. Replicate `k` uses its own generator
/// derived from `(seed, k)`.
pub fn elod_monte_carlo_design(
    p: &Pedigree,
    m: &TwoLocusModel,
    design: &ObservationDesign,
    chi_true: f64,
    chi_eval: f64,
    replicates: usize,
    seed: u64,
) -> Result<ElodResult, DetectError> {
    if replicates == 0 {
        return Err(DetectError::ZeroReplicates);
    }
    check_chi(chi_true)?;
    check_chi(chi_eval)?;
    let engine = LikelihoodEngine::new(p, m);
    let lods: Vec<f64> = (0..replicates as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = replicate_rng(seed, k);
            let sim = drop_with_rng(p, m, design, chi_true, 0.0, &mut rng)?;
            let lod = (engine.loglik(&sim.data, chi_eval)? - engine.loglik(&sim.data, 0.5)?) / LN_10;
            Ok(lod)
        })
        .collect::<Result<_, DetectError>>()?;
    let n = lods.len() as f64;
    let mean = lods.iter().sum::<f64>() / n;
    let se = if lods.len() > 1 {
        let var = lods.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(ElodResult {
        value: mean,
        standard_error: Some(se),
        method: ElodMethod::MonteCarlo,
        replicates: Some(lods.len()),
    })
}

//! Gene-drop simulation of trait and marker data on pedigrees.
//!
//! Every replicate draws from its own generator, seeded by mixing the run
//! seed with the replicate index through SplitMix64, so results do not
//! depend on the order (or thread) in which replicates run.
//!
//! An [`ObservationDesign`] says, per individual, whether data are held
//! fixed, simulated, or left unobserved. With fixed data present the
//! genotypes are drawn from their conditional law given those data: the
//! topological prefix that covers every fixed individual is sampled one
//! individual at a time from exact posteriors; the rest is dropped
//! forward from the sampled ancestors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::likelihood::{
    evidence, founder_priors, ChiGrid, Family, LikelihoodEngine, LikelihoodError, LodFunction,
    Observation, ObservedData,
};
use crate::model::{Haplotype, PhasedGenotype, Phenotype, RecombinationParam, TwoLocusModel};
use crate::pedigree::Pedigree;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("design has {got} roles for {expected} individuals")]
    DesignMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Likelihood(#[from] LikelihoodError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub chi_true: f64,
    pub replicates: usize,
    pub seed: u64,
    /// Probability that a simulated marker genotype is masked.
    pub missingness_rate: f64,
}

impl SimConfig {
    pub fn new(chi_true: f64, replicates: usize, seed: u64) -> Self {
        SimConfig { chi_true, replicates, seed, missingness_rate: 0.0 }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(0.0..=0.5).contains(&self.chi_true) {
            return Err(SimError::InvalidConfig(format!("chi_true {} outside [0, 0.5]", self.chi_true)));
        }
        if self.replicates == 0 {
            return Err(SimError::InvalidConfig("replicates must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.missingness_rate) {
            return Err(SimError::InvalidConfig(format!(
                "missingness rate {} outside [0, 1]",
                self.missingness_rate
            )));
        }
        Ok(())
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed of replicate `index`: `splitmix64(seed ^ splitmix64(index))`.
pub fn replicate_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(replicate_seed(seed, index))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// Observation held at the given value.
    Fixed(Observation),
    /// Phenotype and marker genotype drawn by the simulation.
    Simulated,
    /// Never observed.
    Hidden,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationDesign {
    roles: Vec<Role>,
}

impl ObservationDesign {
    pub fn new(roles: Vec<Role>) -> Self {
        ObservationDesign { roles }
    }

    pub fn all_simulated(n: usize) -> Self {
        ObservationDesign { roles: vec![Role::Simulated; n] }
    }

    /// Individuals with any observation are fixed; the rest are simulated.
    pub fn from_data(d: &ObservedData) -> Self {
        let roles = d
            .records()
            .iter()
            .map(|o| if o.is_unknown() { Role::Simulated } else { Role::Fixed(*o) })
            .collect();
        ObservationDesign { roles }
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn len(&self) -> usize {
        self.roles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty()
    }

    pub fn has_fixed(&self) -> bool {
        self.roles.iter().any(|r| matches!(r, Role::Fixed(_)))
    }

    /// The fixed observations, with every other individual unknown.
    pub fn fixed_data(&self) -> ObservedData {
        ObservedData::new(
            self.roles
                .iter()
                .map(|r| match r {
                    Role::Fixed(o) => *o,
                    _ => Observation::default(),
                })
                .collect(),
        )
    }

    pub(crate) fn check(&self, p: &Pedigree) -> Result<(), SimError> {
        if self.roles.len() != p.len() {
            return Err(SimError::DesignMismatch { expected: p.len(), got: self.roles.len() });
        }
        Ok(())
    }
}

/// Simulated phased genotypes (state indices) and the resulting data.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulated {
    pub genotypes: Vec<PhasedGenotype>,
    pub data: ObservedData,
}

fn sample_index<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last = i;
            if u < w {
                return i;
            }
            u -= w;
        }
    }
    last
}

fn sample_gamete<R: Rng>(parent: &PhasedGenotype, chi: f64, rng: &mut R) -> Haplotype {
    let (first, second) = if rng.gen_bool(0.5) {
        (parent.paternal, parent.maternal)
    } else {
        (parent.maternal, parent.paternal)
    };
    if rng.gen::<f64>() < chi {
        Haplotype::new(first.trait_allele, second.marker_allele)
    } else {
        first
    }
}

fn sample_founder<R: Rng>(m: &TwoLocusModel, rng: &mut R) -> PhasedGenotype {
    let t = m.trait_locus.frequencies();
    let k = m.marker_locus.frequencies();
    let paternal = Haplotype::new(sample_index(t, rng), sample_index(k, rng));
    let maternal = Haplotype::new(sample_index(t, rng), sample_index(k, rng));
    PhasedGenotype::new(paternal, maternal)
}

fn observe<R: Rng>(m: &TwoLocusModel, g: &PhasedGenotype, missing: f64, rng: &mut R) -> Observation {
    let affected = rng.gen::<f64>() < m.penetrance.affected(g.trait_genotype());
    let phenotype = if affected { Phenotype::Affected } else { Phenotype::Unaffected };
    let marker = if missing > 0.0 && rng.gen::<f64>() < missing {
        None
    } else {
        Some(g.marker_genotype())
    };
    Observation::new(phenotype, marker)
}

/// Draws one data set from `design` with the supplied generator.
pub fn drop_with_rng<R: Rng>(
    p: &Pedigree,
    m: &TwoLocusModel,
    design: &ObservationDesign,
    chi: f64,
    missingness_rate: f64,
    rng: &mut R,
) -> Result<Simulated, SimError> {
    design.check(p)?;
    let r = RecombinationParam::new(chi).map_err(LikelihoodError::from)?;
    let topo = p.topological_order();
    let n = p.len();
    let mut genotypes: Vec<Option<PhasedGenotype>> = vec![None; n];

    let last_fixed = topo.iter().rposition(|&i| matches!(design.roles[i], Role::Fixed(_)));
    if let Some(last) = last_fixed {
        let engine = LikelihoodEngine::new(p, m);
        let prior = founder_priors(m);
        let mut unaries: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let e = match design.roles[i] {
                    Role::Fixed(obs) => evidence(m, &obs),
                    _ => vec![1.0; m.n_states()],
                };
                if p.is_founder(i) {
                    e.iter().zip(&prior).map(|(x, q)| (x * q).ln()).collect()
                } else {
                    e.iter().map(|x| x.ln()).collect()
                }
            })
            .collect();
        for &i in &topo[..=last] {
            let post = engine.posterior_unaries(&unaries, r)?;
            let s = sample_index(&post.marginals[i], rng);
            for (k, u) in unaries[i].iter_mut().enumerate() {
                if k != s {
                    *u = f64::NEG_INFINITY;
                }
            }
            genotypes[i] = Some(m.state(s));
        }
    }

    for &i in topo {
        if genotypes[i].is_some() {
            continue;
        }
        let g = match p.parents(i) {
            None => sample_founder(m, rng),
            Some((f, mo)) => {
                let gf = genotypes[f].expect("parents precede children");
                let gm = genotypes[mo].expect("parents precede children");
                PhasedGenotype::new(sample_gamete(&gf, chi, rng), sample_gamete(&gm, chi, rng))
            }
        };
        genotypes[i] = Some(g);
    }

    let genotypes: Vec<PhasedGenotype> = genotypes.into_iter().map(|g| g.expect("sampled")).collect();
    let data = ObservedData::new(
        design
            .roles
            .iter()
            .zip(&genotypes)
            .map(|(role, g)| match role {
                Role::Fixed(obs) => *obs,
                Role::Simulated => observe(m, g, missingness_rate, rng),
                Role::Hidden => Observation::default(),
            })
            .collect(),
    );
    Ok(Simulated { genotypes, data })
}

/// Replicate `replicate_index` of `design` under `cfg`.
pub fn gene_drop_design(
    p: &Pedigree,
    m: &TwoLocusModel,
    design: &ObservationDesign,
    cfg: &SimConfig,
    replicate_index: u64,
) -> Result<Simulated, SimError> {
    cfg.validate()?;
    let mut rng = replicate_rng(cfg.seed, replicate_index);
    drop_with_rng(p, m, design, cfg.chi_true, cfg.missingness_rate, &mut rng)
}

/// Unconditional gene drop with every individual observed (subject to
/// marker missingness).
pub fn gene_drop(
    p: &Pedigree,
    m: &TwoLocusModel,
    cfg: &SimConfig,
    replicate_index: u64,
) -> Result<ObservedData, SimError> {
    let design = ObservationDesign::all_simulated(p.len());
    Ok(gene_drop_design(p, m, &design, cfg, replicate_index)?.data)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerEstimate {
    pub power: f64,
    pub standard_error: f64,
    pub replicates: usize,
}

/// Fraction of replicates whose maximum total lod over `grid` reaches
/// `threshold`, with its binomial standard error.
pub fn estimate_power(
    families: &[(Pedigree, ObservationDesign)],
    m: &TwoLocusModel,
    threshold: f64,
    cfg: &SimConfig,
    grid: &ChiGrid,
) -> Result<PowerEstimate, SimError> {
    cfg.validate()?;
    if families.is_empty() {
        return Err(LikelihoodError::NoFamilies.into());
    }
    let hits: Vec<bool> = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replicate_rng(cfg.seed, rep);
            let data = families
                .iter()
                .map(|(p, design)| {
                    let sim = drop_with_rng(p, m, design, cfg.chi_true, cfg.missingness_rate, &mut rng)?;
                    Ok(Family::new(p.clone(), sim.data))
                })
                .collect::<Result<Vec<_>, SimError>>()?;
            let f = LodFunction::new(&data, m)?;
            let mut best = f64::NEG_INFINITY;
            for &chi in grid.points() {
                best = best.max(f.total(chi)?);
            }
            Ok(best >= threshold)
        })
        .collect::<Result<_, SimError>>()?;
    let n = hits.len() as f64;
    let power = hits.iter().filter(|&&h| h).count() as f64 / n;
    Ok(PowerEstimate {
        power,
        standard_error: (power * (1.0 - power) / n).sqrt(),
        replicates: hits.len(),
    })
}

//! Model-free family tests: a sib-pair concordance chi-square, the
//! transmission disequilibrium test and a single-marker homozygosity
//! score.

use rayon::prelude::*;
use thiserror::Error;

use crate::likelihood::ObservedData;
use crate::model::{Phenotype, TwoLocusModel};
use crate::pedigree::{validate_pedigree, Individual, Pedigree};
use crate::sim::{drop_with_rng, replicate_rng, ObservationDesign, SimError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyTestError {
    #[error("no sib pairs supplied")]
    EmptyInput,
    #[error("no informative transmissions")]
    NoInformativeTransmissions,
    #[error("individual {0:?}: marker genotype inconsistent with parents")]
    MendelianInconsistency(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Concordance of one sib pair for two traits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SibPair {
    pub trait_a_concordant: bool,
    pub trait_b_concordant: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SibPairResult {
    pub statistic: f64,
    /// `table[a][b]`, index 0 for concordant and 1 for discordant.
    pub table: [[u64; 2]; 2],
    /// Set when a row or column total is zero; the statistic is then 0.
    pub degenerate: bool,
}

/// Pearson chi-square for association between concordance on trait A and
/// concordance on trait B.
pub fn sib_pair_test(pairs: &[SibPair]) -> Result<SibPairResult, FamilyTestError> {
    if pairs.is_empty() {
        return Err(FamilyTestError::EmptyInput);
    }
    let mut table = [[0u64; 2]; 2];
    for p in pairs {
        table[usize::from(!p.trait_a_concordant)][usize::from(!p.trait_b_concordant)] += 1;
    }
    Ok(pearson(table))
}

fn pearson(table: [[u64; 2]; 2]) -> SibPairResult {
    let [[a, b], [c, d]] = table.map(|r| r.map(|x| x as f64));
    let margins = [a + b, c + d, a + c, b + d];
    if margins.contains(&0.0) {
        return SibPairResult { statistic: 0.0, table, degenerate: true };
    }
    let n = a + b + c + d;
    let statistic = n * (a * d - b * c).powi(2) / margins.iter().product::<f64>();
    SibPairResult { statistic, table, degenerate: false }
}

/// Sib-pair concordance from family data: trait A is affection status,
/// trait B the unordered marker genotype. `None` unless both sibs have a
/// known phenotype and marker genotype.
pub fn sib_pair_from_data(d: &ObservedData, sib1: usize, sib2: usize) -> Option<SibPair> {
    let (x, y) = (d.get(sib1), d.get(sib2));
    if x.phenotype == Phenotype::Unknown || y.phenotype == Phenotype::Unknown {
        return None;
    }
    Some(SibPair {
        trait_a_concordant: x.phenotype == y.phenotype,
        trait_b_concordant: x.marker? == y.marker?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrioTransmission {
    /// Transmissions scored from parents heterozygous for the target.
    pub heterozygous_parent_count: u64,
    /// Target allele transmitted.
    pub transmitted: u64,
    /// Other allele transmitted.
    pub untransmitted: u64,
}

impl TrioTransmission {
    pub fn new(transmitted: u64, untransmitted: u64) -> Self {
        TrioTransmission {
            heterozygous_parent_count: transmitted + untransmitted,
            transmitted,
            untransmitted,
        }
    }

    pub fn add(&mut self, other: TrioTransmission) {
        self.heterozygous_parent_count += other.heterozygous_parent_count;
        self.transmitted += other.transmitted;
        self.untransmitted += other.untransmitted;
    }
}

/// `(b - c)^2 / (b + c)`.
pub fn tdt(t: &TrioTransmission) -> Result<f64, FamilyTestError> {
    let (b, c) = (t.transmitted as f64, t.untransmitted as f64);
    if b + c == 0.0 {
        return Err(FamilyTestError::NoInformativeTransmissions);
    }
    Ok((b - c).powi(2) / (b + c))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TransmissionCount {
    pub counts: TrioTransmission,
    /// Children whose parental origin of alleles could not be resolved.
    pub ambiguous: u64,
}

/// Transmissions of marker allele `target` (0-based) from heterozygous
/// parents to children with all three marker genotypes known. One
/// transmission per heterozygous parent per child; a child whose
/// genotype admits orderings that score differently is skipped.
pub fn count_transmissions(
    p: &Pedigree,
    d: &ObservedData,
    target: usize,
    affected_only: bool,
) -> Result<TransmissionCount, FamilyTestError> {
    let mut out = TransmissionCount::default();
    for child in p.non_founders() {
        let obs = d.get(child);
        if affected_only && obs.phenotype != Phenotype::Affected {
            continue;
        }
        let (f, m) = p.parents(child).expect("non-founder");
        let (Some(gc), Some(gf), Some(gm)) = (obs.marker, d.get(f).marker, d.get(m).marker) else {
            continue;
        };
        let mut scored: Option<TrioTransmission> = None;
        let mut consistent = false;
        let mut ambiguous = false;
        for (from_f, from_m) in [(gc.0, gc.1), (gc.1, gc.0)] {
            if !(from_f == gf.0 || from_f == gf.1) || !(from_m == gm.0 || from_m == gm.1) {
                continue;
            }
            consistent = true;
            let mut t = TrioTransmission::default();
            for (parent, allele) in [(gf, from_f), (gm, from_m)] {
                let het = parent.0 != parent.1 && (parent.0 == target || parent.1 == target);
                if het {
                    t.heterozygous_parent_count += 1;
                    if allele == target {
                        t.transmitted += 1;
                    } else {
                        t.untransmitted += 1;
                    }
                }
            }
            match scored {
                None => scored = Some(t),
                Some(s) if s != t => ambiguous = true,
                Some(_) => {}
            }
        }
        if !consistent {
            return Err(FamilyTestError::MendelianInconsistency(p.id(child).to_string()));
        }
        if ambiguous {
            out.ambiguous += 1;
        } else if let Some(t) = scored {
            out.counts.add(t);
        }
    }
    Ok(out)
}

/// Single-marker homozygosity data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomozygosityInput {
    /// Inbreeding coefficient; recorded but not used by the score.
    pub inbreeding: f64,
    /// Frequency of the observed allele (of either allele for a
    /// heterozygote; the value does not matter there).
    pub allele_frequency: f64,
    pub genotype: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HomozygosityScore {
    Finite(f64),
    /// A heterozygote cannot be autozygous.
    NegativeInfinite,
}

impl HomozygosityScore {
    pub fn value(&self) -> f64 {
        match *self {
            HomozygosityScore::Finite(v) => v,
            HomozygosityScore::NegativeInfinite => f64::NEG_INFINITY,
        }
    }
}

/// `log10 P(genotype | autozygous) / P(genotype | Hardy-Weinberg)`: for a
/// homozygote `p / p^2`.
pub fn homozygosity_score(h: &HomozygosityInput) -> Result<HomozygosityScore, FamilyTestError> {
    if !(0.0..=1.0).contains(&h.inbreeding) {
        return Err(FamilyTestError::InvalidArgument(format!("inbreeding {} outside [0, 1]", h.inbreeding)));
    }
    let p = h.allele_frequency;
    if !(p > 0.0 && p <= 1.0) {
        return Err(FamilyTestError::InvalidArgument(format!("allele frequency {p} outside (0, 1]")));
    }
    if h.genotype.0 != h.genotype.1 {
        return Ok(HomozygosityScore::NegativeInfinite);
    }
    Ok(HomozygosityScore::Finite((p / (p * p)).log10()))
}

fn nuclear(n_children: usize) -> Pedigree {
    let mut raw = vec![Individual::founder("f"), Individual::founder("m")];
    for k in 1..=n_children {
        raw.push(Individual::child(format!("c{k}"), "f", "m"));
    }
    validate_pedigree("nuclear", raw).expect("valid")
}

/// Sib-pair statistics under simulation: each replicate gene-drops
/// `units` two-child families at recombination fraction `chi` and scores
/// affection concordance against marker-genotype concordance.
pub fn simulate_sib_pair_statistics(
    m: &TwoLocusModel,
    chi: f64,
    units: usize,
    replicates: usize,
    seed: u64,
) -> Result<Vec<f64>, FamilyTestError> {
    let p = nuclear(2);
    let design = ObservationDesign::all_simulated(p.len());
    (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, r);
            let mut pairs = Vec::with_capacity(units);
            while pairs.len() < units {
                let sim = drop_with_rng(&p, m, &design, chi, 0.0, &mut rng)?;
                pairs.extend(sib_pair_from_data(&sim.data, 2, 3));
            }
            Ok(sib_pair_test(&pairs)?.statistic)
        })
        .collect()
}

/// TDT statistics under simulation: each replicate gene-drops trios at
/// recombination fraction `chi` until it has `units` with an affected
/// child (and at least one informative transmission), then scores
/// transmissions of marker allele 0.
pub fn simulate_tdt_statistics(
    m: &TwoLocusModel,
    chi: f64,
    units: usize,
    replicates: usize,
    seed: u64,
) -> Result<Vec<f64>, FamilyTestError> {
    let p = nuclear(1);
    let design = ObservationDesign::all_simulated(p.len());
    (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, r);
            let mut total = TrioTransmission::default();
            let mut trios = 0;
            while trios < units || total.heterozygous_parent_count == 0 {
                let sim = drop_with_rng(&p, m, &design, chi, 0.0, &mut rng)?;
                if sim.data.get(2).phenotype != Phenotype::Affected {
                    continue;
                }
                trios += 1;
                total.add(count_transmissions(&p, &sim.data, 0, true)?.counts);
            }
            tdt(&total)
        })
        .collect()
}

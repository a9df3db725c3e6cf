//! Bundled fixtures: the phase-known backcross design and the small-pedigree
//! corpus on which peeling is checked against enumeration.

use std::time::Instant;

use crate::likelihood::{
    brute_force_loglik, Family, LikelihoodEngine, LikelihoodError, Observation, ObservedData,
};
use crate::model::{Locus, PenetranceModel, Phenotype, TwoLocusModel};
use crate::pedigree::{validate_pedigree, Individual, Pedigree};
use crate::sim::{gene_drop, SimConfig};

/// Rare fully penetrant dominant trait (disease allele index 0) and a
/// 50/50 biallelic marker.
pub fn dominant_model() -> TwoLocusModel {
    TwoLocusModel::new(
        Locus::new("trait", vec!["D".into(), "d".into()], vec![0.01, 0.99]).expect("valid"),
        Locus::numbered("marker", vec![0.5, 0.5]).expect("valid"),
        PenetranceModel::fully_penetrant_dominant(),
    )
    .expect("valid model")
}

/// Grandparents `gf`, `gm`; their son `f`; his spouse `m`; children
/// `c1..cn`.
pub fn phase_known_pedigree(n_children: usize) -> Pedigree {
    let mut raw = vec![
        Individual::founder("gf"),
        Individual::founder("gm"),
        Individual::child("f", "gf", "gm"),
        Individual::founder("m"),
    ];
    for k in 1..=n_children {
        raw.push(Individual::child(format!("c{k}"), "f", "m"));
    }
    validate_pedigree(format!("pk{n_children}"), raw).expect("valid pedigree")
}

/// Data on the first two generations that make the father's phase known
/// under [`dominant_model`]: he carries haplotypes (D, 1) from his father
/// and (d, 2) from his mother; his spouse is d/d, 2/2. Children are left
/// unobserved.
pub fn phase_known_parents(n_children: usize) -> ObservedData {
    let mut d = ObservedData::unknown(4 + n_children);
    d.set(0, Observation::new(Phenotype::Affected, Some((0, 0))));
    d.set(1, Observation::new(Phenotype::Unaffected, Some((1, 1))));
    d.set(2, Observation::new(Phenotype::Affected, Some((0, 1))));
    d.set(3, Observation::new(Phenotype::Unaffected, Some((1, 1))));
    d
}

/// A phase-known family whose first `recombinants` children are
/// recombinant and the rest are not. Each child is one informative
/// meiosis with likelihood ratio `2(1 - chi)` or `2 chi`.
pub fn phase_known_family(n_children: usize, recombinants: usize) -> Family {
    assert!(recombinants <= n_children);
    let pedigree = phase_known_pedigree(n_children);
    let mut data = phase_known_parents(n_children);
    for k in 0..n_children {
        let affected = k % 2 == 0;
        let got_one = if k < recombinants { !affected } else { affected };
        let phenotype = if affected { Phenotype::Affected } else { Phenotype::Unaffected };
        let marker = if got_one { (0, 1) } else { (1, 1) };
        data.set(4 + k, Observation::new(phenotype, Some(marker)));
    }
    Family::new(pedigree, data)
}

/// One corpus element: a pedigree, its data, a model and a recombination
/// fraction.
#[derive(Debug, Clone)]
pub struct CorpusCase {
    pub name: String,
    pub family: Family,
    pub model: TwoLocusModel,
    pub chi: f64,
}

pub const CORPUS_CHIS: [f64; 5] = [0.0, 0.05, 0.1, 0.3, 0.5];

fn corpus_models() -> Vec<(&'static str, TwoLocusModel)> {
    let dominant = TwoLocusModel::new(
        Locus::numbered("trait", vec![0.05, 0.95]).expect("valid"),
        Locus::numbered("marker", vec![0.3, 0.7]).expect("valid"),
        PenetranceModel::fully_penetrant_dominant(),
    )
    .expect("valid");
    let recessive = TwoLocusModel::new(
        Locus::numbered("trait", vec![0.2, 0.8]).expect("valid"),
        Locus::numbered("marker", vec![0.25, 0.35, 0.4]).expect("valid"),
        PenetranceModel::fully_penetrant_recessive(),
    )
    .expect("valid");
    let partial = TwoLocusModel::new(
        Locus::numbered("trait", vec![0.1, 0.9]).expect("valid"),
        Locus::numbered("marker", vec![0.5, 0.5]).expect("valid"),
        PenetranceModel::biallelic(0.8, 0.8, 0.05).expect("valid"),
    )
    .expect("valid");
    vec![("dominant", dominant), ("recessive", recessive), ("partial", partial)]
}

fn corpus_structures() -> Vec<Pedigree> {
    let f = Individual::founder;
    let c = Individual::child;
    let shapes: Vec<(&str, Vec<Individual>)> = vec![
        ("single", vec![f("a")]),
        ("trio", vec![f("a"), f("b"), c("c", "a", "b")]),
        ("sibs2", vec![f("a"), f("b"), c("c", "a", "b"), c("d", "a", "b")]),
        ("sibs3", vec![f("a"), f("b"), c("c", "a", "b"), c("d", "a", "b"), c("e", "a", "b")]),
        (
            "sibs4",
            vec![f("a"), f("b"), c("c", "a", "b"), c("d", "a", "b"), c("e", "a", "b"), c("g", "a", "b")],
        ),
        ("chain", vec![f("a"), f("b"), c("c", "a", "b"), f("d"), c("e", "c", "d")]),
        (
            "chain_sibs",
            vec![f("a"), f("b"), c("c", "a", "b"), f("d"), c("e", "c", "d"), c("g", "c", "d")],
        ),
        ("halfsibs", vec![f("a"), f("b"), f("d"), c("c", "a", "b"), c("e", "a", "d")]),
        (
            "halfsibs_maternal",
            vec![f("a"), f("b"), f("d"), c("c", "a", "b"), c("e", "d", "b"), c("g", "d", "b")],
        ),
        (
            "uncle",
            vec![f("a"), f("b"), c("c", "a", "b"), c("d", "a", "b"), f("e"), c("g", "c", "e")],
        ),
        (
            "mother_line",
            vec![f("a"), f("b"), c("c", "a", "b"), f("d"), c("e", "d", "c"), c("g", "d", "c")],
        ),
        ("trio_plus", vec![f("a"), f("b"), c("c", "a", "b"), f("u")]),
        ("two_trios", vec![f("a"), f("b"), c("c", "a", "b"), f("d"), f("e"), c("g", "d", "e")]),
        ("trio_unrelated", vec![f("a"), f("b"), c("c", "a", "b"), f("u"), f("v")]),
        (
            "double_marriage",
            vec![f("a"), f("b"), f("d"), c("c", "a", "b"), c("e", "a", "d"), c("g", "a", "d")],
        ),
        ("founder_pair", vec![f("a"), f("b")]),
        (
            "grandchild",
            vec![f("a"), f("b"), c("c", "a", "b"), f("d"), c("e", "d", "c")],
        ),
        (
            "sibs_spouse",
            vec![f("a"), f("b"), c("c", "a", "b"), c("d", "a", "b"), f("e"), c("g", "e", "d")],
        ),
        (
            "three_gen_paternal",
            vec![f("a"), f("b"), c("c", "a", "b"), f("d"), c("e", "c", "d"), f("g")],
        ),
        ("sibs5", {
            let mut v = vec![f("a"), f("b")];
            for k in 0..4 {
                v.push(Individual::child(format!("k{k}"), "a", "b"));
            }
            v
        }),
    ];
    shapes
        .into_iter()
        .map(|(name, raw)| validate_pedigree(name, raw).expect("corpus pedigree is valid"))
        .collect()
}

/// Structures times models times recombination fractions. Data are gene
/// dropped at the case's own `chi` with a little marker missingness, so
/// every element has positive likelihood.
pub fn oracle_corpus() -> Vec<CorpusCase> {
    let mut cases = Vec::new();
    for (s, pedigree) in corpus_structures().into_iter().enumerate() {
        for (k, (model_name, model)) in corpus_models().into_iter().enumerate() {
            for (c, &chi) in CORPUS_CHIS.iter().enumerate() {
                let cfg = SimConfig {
                    chi_true: chi,
                    replicates: 1,
                    seed: 0x5eed_0000 + (s * 100 + k * 10 + c) as u64,
                    missingness_rate: 0.15,
                };
                let data = gene_drop(&pedigree, &model, &cfg, 0).expect("valid simulation");
                cases.push(CorpusCase {
                    name: format!("{}/{}/chi={}", pedigree.family_id(), model_name, chi),
                    family: Family::new(pedigree.clone(), data),
                    model: model.clone(),
                    chi,
                });
            }
        }
    }
    cases
}

/// Relative tolerance for peeling against enumeration.
pub const CHECK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: String,
    pub peeled: f64,
    pub enumerated: f64,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub outcomes: Vec<CheckOutcome>,
    pub structures: usize,
    pub seconds: f64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.outcomes.iter().filter(|o| !o.passed)
    }
}

/// `|a - b| <= tol * max(1, |a|)`, with matching infinities accepted.
pub fn agrees(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= tol * a.abs().max(1.0)
}

/// Runs peeling and enumeration on every corpus element.
pub fn run_check() -> Result<CheckReport, LikelihoodError> {
    let start = Instant::now();
    let cases = oracle_corpus();
    let mut outcomes = Vec::with_capacity(cases.len());
    for case in &cases {
        let engine = LikelihoodEngine::new(&case.family.pedigree, &case.model);
        let peeled = engine.loglik(&case.family.data, case.chi)?;
        let enumerated =
            brute_force_loglik(&case.family.pedigree, &case.model, &case.family.data, case.chi)?;
        outcomes.push(CheckOutcome {
            name: case.name.clone(),
            peeled,
            enumerated,
            passed: engine.is_peelable() && agrees(peeled, enumerated, CHECK_TOLERANCE),
        });
    }
    Ok(CheckReport {
        outcomes,
        structures: corpus_structures().len(),
        seconds: start.elapsed().as_secs_f64(),
    })
}

//! Text and JSON formats: pedigree/data files, model documents,
//! phenotype-system documents and sib-pair tables.
//!
//! Pedigree lines are whitespace-delimited,
//! `family id father mother sex [phenotype m1 m2]`, with `0` for an absent
//! parent. Sex is 1 (male), 2 (female) or 0 (unknown); phenotype is 2
//! (affected), 1 (unaffected) or 0 (unknown); marker alleles are 1-based
//! with `0 0` for missing. Lines starting with `#` and blank lines are
//! skipped.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::familytests::SibPair;
use crate::genecount::{GeneCountError, PhenotypeSystem};
use crate::likelihood::{Family, Observation, ObservedData};
use crate::model::{Locus, ModelError, PenetranceModel, Phenotype, TwoLocusModel};
use crate::pedigree::{validate_pedigree, Individual, PedigreeError, Sex};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("family {family}: {source}")]
    Pedigree { family: String, source: PedigreeError },
    #[error("no families in input")]
    Empty,
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid model: {0}")]
    Model(String),
    #[error(transparent)]
    GeneCount(#[from] GeneCountError),
}

impl From<ModelError> for FormatError {
    fn from(e: ModelError) -> Self {
        FormatError::Model(e.to_string())
    }
}

fn parse_error(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse { line, message: message.into() }
}

/// One family read from a pedigree file.
#[derive(Debug, Clone)]
pub struct ParsedFamily {
    pub family: Family,
    /// Whether any line of the family carried phenotype/marker columns.
    pub has_data: bool,
}

fn parse_code(token: &str, line: usize, what: &str, max: u8) -> Result<u8, FormatError> {
    match token.parse::<u8>() {
        Ok(v) if v <= max => Ok(v),
        _ => Err(parse_error(line, format!("{what} must be an integer in 0..={max}, got {token:?}"))),
    }
}

fn parse_allele(token: &str, line: usize) -> Result<usize, FormatError> {
    token
        .parse::<usize>()
        .map_err(|_| parse_error(line, format!("marker allele must be a nonnegative integer, got {token:?}")))
}

/// Parses a pedigree or pedigree-plus-data file into families, in order
/// of first appearance of each family id.
pub fn parse_pedigree_file(text: &str) -> Result<Vec<ParsedFamily>, FormatError> {
    let mut order: Vec<String> = Vec::new();
    let mut rows: BTreeMap<String, (Vec<Individual>, Vec<Observation>, bool)> = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() != 5 && tokens.len() != 8 {
            return Err(parse_error(line, format!("expected 5 or 8 columns, found {}", tokens.len())));
        }
        let parent = |t: &str| if t == "0" { None } else { Some(t.to_string()) };
        let sex = match parse_code(tokens[4], line, "sex", 2)? {
            1 => Sex::Male,
            2 => Sex::Female,
            _ => Sex::Unknown,
        };
        let individual = Individual {
            id: tokens[1].to_string(),
            father: parent(tokens[2]),
            mother: parent(tokens[3]),
            sex,
        };
        let mut obs = Observation::default();
        if tokens.len() == 8 {
            obs.phenotype = match parse_code(tokens[5], line, "phenotype", 2)? {
                2 => Phenotype::Affected,
                1 => Phenotype::Unaffected,
                _ => Phenotype::Unknown,
            };
            let (a, b) = (parse_allele(tokens[6], line)?, parse_allele(tokens[7], line)?);
            obs.marker = match (a, b) {
                (0, 0) => None,
                (0, _) | (_, 0) => {
                    log::warn!("line {line}: partially observed marker genotype treated as missing");
                    None
                }
                (a, b) => Some(crate::model::sorted(a - 1, b - 1)),
            };
        }
        let family = tokens[0].to_string();
        let entry = rows.entry(family.clone()).or_insert_with(|| {
            order.push(family);
            (Vec::new(), Vec::new(), false)
        });
        entry.0.push(individual);
        entry.1.push(obs);
        entry.2 |= tokens.len() == 8;
    }
    if order.is_empty() {
        return Err(FormatError::Empty);
    }
    order
        .into_iter()
        .map(|id| {
            let (individuals, observations, has_data) = rows.remove(&id).expect("recorded");
            let pedigree = validate_pedigree(id.clone(), individuals)
                .map_err(|source| FormatError::Pedigree { family: id, source })?;
            // Validation keeps input order, so observations line up.
            Ok(ParsedFamily { family: Family::new(pedigree, ObservedData::new(observations)), has_data })
        })
        .collect()
}

/// Writes families in the 8-column format.
pub fn write_pedigree_file(families: &[Family]) -> String {
    let mut out = String::new();
    for fam in families {
        let p = &fam.pedigree;
        for (i, ind) in p.individuals().iter().enumerate() {
            let obs = fam.data.get(i);
            let sex = match ind.sex {
                Sex::Male => 1,
                Sex::Female => 2,
                Sex::Unknown => 0,
            };
            let phenotype = match obs.phenotype {
                Phenotype::Affected => 2,
                Phenotype::Unaffected => 1,
                Phenotype::Unknown => 0,
            };
            let (m1, m2) = obs.marker.map_or((0, 0), |(a, b)| (a + 1, b + 1));
            out.push_str(&format!(
                "{} {} {} {} {} {} {} {}\n",
                p.family_id(),
                ind.id,
                ind.father.as_deref().unwrap_or("0"),
                ind.mother.as_deref().unwrap_or("0"),
                sex,
                phenotype,
                m1,
                m2
            ));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocusDoc {
    pub alleles: Vec<String>,
    pub frequencies: Vec<f64>,
}

/// JSON model document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    #[serde(rename = "trait")]
    pub trait_locus: LocusDoc,
    pub marker: LocusDoc,
    /// P(affected) keyed by unordered trait genotype, e.g. `"D/d"`.
    pub penetrance: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<f64>,
}

impl ModelDoc {
    pub fn to_model(&self) -> Result<TwoLocusModel, FormatError> {
        let t = Locus::new("trait", self.trait_locus.alleles.clone(), self.trait_locus.frequencies.clone())?;
        let m = Locus::new("marker", self.marker.alleles.clone(), self.marker.frequencies.clone())?;
        let n = t.n_alleles();
        let mut table: Vec<Option<f64>> = vec![None; n * (n + 1) / 2];
        let index = |i: usize, j: usize| i * n - i * (i + 1) / 2 + j;
        for (key, &value) in &self.penetrance {
            let (a, b) = key
                .split_once('/')
                .ok_or_else(|| FormatError::Model(format!("penetrance key {key:?} is not of the form a/b")))?;
            let lookup = |name: &str| {
                t.allele_index(name.trim())
                    .ok_or_else(|| FormatError::Model(format!("unknown trait allele {name:?} in {key:?}")))
            };
            let (i, j) = crate::model::sorted(lookup(a)?, lookup(b)?);
            if table[index(i, j)].replace(value).is_some() {
                return Err(FormatError::Model(format!("genotype {key:?} given twice")));
            }
        }
        let mut values = Vec::with_capacity(table.len());
        for i in 0..n {
            for j in i..n {
                values.push(table[index(i, j)].ok_or_else(|| {
                    FormatError::Model(format!(
                        "penetrance missing for {}/{}",
                        t.alleles()[i],
                        t.alleles()[j]
                    ))
                })?);
            }
        }
        let penetrance = PenetranceModel::new(n, values)?;
        let mut model = TwoLocusModel::new(t, m, penetrance)?;
        if let Some(chi) = self.chi {
            crate::model::RecombinationParam::new(chi)?;
            model.default_chi = Some(chi);
        }
        Ok(model)
    }
}

pub fn parse_model(json: &str) -> Result<TwoLocusModel, FormatError> {
    serde_json::from_str::<ModelDoc>(json)?.to_model()
}

/// JSON phenotype-system document for gene counting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhenotypeSystemDoc {
    pub alleles: Vec<String>,
    /// Phenotype shown by each unordered genotype, e.g. `"A/O": "A"`.
    pub genotypes: BTreeMap<String, String>,
    pub counts: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<Vec<f64>>,
}

/// A parsed phenotype system with counts aligned to its phenotypes
/// (sorted by name).
#[derive(Debug, Clone, PartialEq)]
pub struct GeneCountInput {
    pub system: PhenotypeSystem,
    pub counts: Vec<u64>,
    pub init: Option<Vec<f64>>,
}

pub fn parse_phenotype_system(json: &str) -> Result<GeneCountInput, FormatError> {
    let doc: PhenotypeSystemDoc = serde_json::from_str(json)?;
    let phenotypes: Vec<String> = {
        let mut v: Vec<String> = doc.genotypes.values().cloned().collect();
        v.sort();
        v.dedup();
        v
    };
    let allele = |name: &str, key: &str| {
        doc.alleles
            .iter()
            .position(|a| a == name.trim())
            .ok_or_else(|| FormatError::Model(format!("unknown allele {name:?} in {key:?}")))
    };
    let mut membership = Vec::new();
    for (key, ph) in &doc.genotypes {
        let (a, b) = key
            .split_once('/')
            .ok_or_else(|| FormatError::Model(format!("genotype key {key:?} is not of the form a/b")))?;
        let k = phenotypes.iter().position(|p| p == ph).expect("collected");
        membership.push(((allele(a, key)?, allele(b, key)?), k));
    }
    let system = PhenotypeSystem::new(doc.alleles.clone(), phenotypes.clone(), membership)?;
    let mut counts = vec![0; phenotypes.len()];
    for (name, &n) in &doc.counts {
        let k = phenotypes
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| FormatError::Model(format!("count for unknown phenotype {name:?}")))?;
        counts[k] = n;
    }
    Ok(GeneCountInput { system, counts, init: doc.init })
}

fn parse_bool(token: &str) -> Option<bool> {
    match token.to_ascii_lowercase().as_str() {
        "1" | "true" | "t" | "yes" => Some(true),
        "0" | "false" | "f" | "no" => Some(false),
        _ => None,
    }
}

/// Sib-pair table: four boolean columns `a1 a2 b1 b2`, the two sibs'
/// values for trait A then for trait B. An optional header line is
/// skipped.
pub fn parse_sib_pairs(text: &str) -> Result<Vec<SibPair>, FormatError> {
    let mut pairs = Vec::new();
    let mut first = true;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        let values: Vec<Option<bool>> = tokens.iter().map(|t| parse_bool(t)).collect();
        if first && values.iter().all(Option::is_none) {
            first = false;
            continue;
        }
        first = false;
        if tokens.len() != 4 || values.iter().any(Option::is_none) {
            return Err(parse_error(line, "expected four boolean columns"));
        }
        let v: Vec<bool> = values.into_iter().map(|x| x.expect("checked")).collect();
        pairs.push(SibPair { trait_a_concordant: v[0] == v[1], trait_b_concordant: v[2] == v[3] });
    }
    Ok(pairs)
}

//! Allele frequencies from phenotype counts by gene counting (EM under
//! Hardy-Weinberg).

use thiserror::Error;

use crate::model::sorted;

/// Stop once the log-likelihood moves by less than this.
pub const EM_TOLERANCE: f64 = 1e-10;
pub const EM_MAX_ITERATIONS: usize = 10_000;
/// Number of trailing error ratios averaged by [`em_convergence_rate`].
pub const RATE_WINDOW: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeneCountError {
    #[error("invalid phenotype system: {0}")]
    InvalidSystem(String),
    #[error("{expected} phenotypes but {got} counts")]
    CountMismatch { expected: usize, got: usize },
    #[error("total count is zero")]
    ZeroTotalCount,
    #[error("initial frequencies must be positive and sum to 1")]
    NonSimplexInit,
    #[error("observed phenotype {0:?} has zero probability")]
    ImpossiblePhenotype(String),
    #[error("trajectory too short to estimate a rate")]
    InsufficientIterates,
}

/// Alleles, phenotypes and the phenotype each unordered genotype shows.
#[derive(Debug, Clone, PartialEq)]
pub struct PhenotypeSystem {
    alleles: Vec<String>,
    phenotypes: Vec<String>,
    /// `(genotype, phenotype index)` for every unordered genotype.
    membership: Vec<((usize, usize), usize)>,
}

impl PhenotypeSystem {
    pub fn new(
        alleles: Vec<String>,
        phenotypes: Vec<String>,
        membership: Vec<((usize, usize), usize)>,
    ) -> Result<Self, GeneCountError> {
        let n = alleles.len();
        if n == 0 {
            return Err(GeneCountError::InvalidSystem("no alleles".into()));
        }
        let mut seen = vec![vec![false; n]; n];
        let mut used = vec![false; phenotypes.len()];
        let mut canonical = Vec::with_capacity(membership.len());
        for &((a, b), ph) in &membership {
            if a >= n || b >= n || ph >= phenotypes.len() {
                return Err(GeneCountError::InvalidSystem(format!("genotype ({a}, {b}) -> {ph} out of range")));
            }
            let (a, b) = sorted(a, b);
            if seen[a][b] {
                return Err(GeneCountError::InvalidSystem(format!(
                    "genotype {}/{} listed twice",
                    alleles[a], alleles[b]
                )));
            }
            seen[a][b] = true;
            used[ph] = true;
            canonical.push(((a, b), ph));
        }
        for a in 0..n {
            for b in a..n {
                if !seen[a][b] {
                    return Err(GeneCountError::InvalidSystem(format!(
                        "genotype {}/{} has no phenotype",
                        alleles[a], alleles[b]
                    )));
                }
            }
        }
        if let Some(k) = used.iter().position(|u| !u) {
            return Err(GeneCountError::InvalidSystem(format!("phenotype {:?} has no genotype", phenotypes[k])));
        }
        canonical.sort_unstable();
        Ok(PhenotypeSystem { alleles, phenotypes, membership: canonical })
    }

    /// Every genotype is its own phenotype, named `a/b`.
    pub fn codominant(alleles: Vec<String>) -> Self {
        let n = alleles.len();
        let mut phenotypes = Vec::new();
        let mut membership = Vec::new();
        for a in 0..n {
            for b in a..n {
                membership.push(((a, b), phenotypes.len()));
                phenotypes.push(format!("{}/{}", alleles[a], alleles[b]));
            }
        }
        PhenotypeSystem::new(alleles, phenotypes, membership).expect("complete by construction")
    }

    /// Alleles A, B, O; phenotypes A, B, AB, O with O recessive.
    pub fn abo() -> Self {
        let s = |x: &str| x.to_string();
        PhenotypeSystem::new(
            vec![s("A"), s("B"), s("O")],
            vec![s("A"), s("B"), s("AB"), s("O")],
            vec![((0, 0), 0), ((0, 2), 0), ((1, 1), 1), ((1, 2), 1), ((0, 1), 2), ((2, 2), 3)],
        )
        .expect("valid")
    }

    pub fn alleles(&self) -> &[String] {
        &self.alleles
    }

    pub fn phenotypes(&self) -> &[String] {
        &self.phenotypes
    }

    pub fn membership(&self) -> &[((usize, usize), usize)] {
        &self.membership
    }

    pub fn phenotype_index(&self, name: &str) -> Option<usize> {
        self.phenotypes.iter().position(|p| p == name)
    }

    /// Hardy-Weinberg phenotype probabilities.
    pub fn phenotype_probabilities(&self, freqs: &[f64]) -> Vec<f64> {
        let mut probs = vec![0.0; self.phenotypes.len()];
        for &((a, b), ph) in &self.membership {
            probs[ph] += genotype_probability(freqs, a, b);
        }
        probs
    }
}

fn genotype_probability(freqs: &[f64], a: usize, b: usize) -> f64 {
    if a == b {
        freqs[a] * freqs[a]
    } else {
        2.0 * freqs[a] * freqs[b]
    }
}

/// Observed-data log-likelihood `sum_k n_k ln P(phenotype k)`; empty
/// phenotypes contribute nothing.
pub fn phenotype_loglik(system: &PhenotypeSystem, counts: &[u64], freqs: &[f64]) -> f64 {
    system
        .phenotype_probabilities(freqs)
        .iter()
        .zip(counts)
        .filter(|(_, &n)| n > 0)
        .map(|(p, &n)| n as f64 * p.ln())
        .sum()
}

/// One gene-counting step: expected allele counts given the phenotype
/// counts, divided by the number of alleles.
pub fn em_step(system: &PhenotypeSystem, counts: &[u64], freqs: &[f64]) -> Vec<f64> {
    let probs = system.phenotype_probabilities(freqs);
    let mut alleles = vec![0.0; freqs.len()];
    for &((a, b), ph) in &system.membership {
        if counts[ph] == 0 || probs[ph] == 0.0 {
            continue;
        }
        let expected = counts[ph] as f64 * genotype_probability(freqs, a, b) / probs[ph];
        alleles[a] += expected;
        alleles[b] += expected;
    }
    let total: f64 = 2.0 * counts.iter().sum::<u64>() as f64;
    alleles.iter().map(|x| x / total).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmIterate {
    pub frequencies: Vec<f64>,
    pub loglik: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmTrajectory {
    /// Starting point first.
    pub iterates: Vec<EmIterate>,
    pub converged: bool,
}

impl EmTrajectory {
    pub fn last(&self) -> &EmIterate {
        self.iterates.last().expect("trajectory holds the starting point")
    }

    /// EM steps taken.
    pub fn steps(&self) -> usize {
        self.iterates.len() - 1
    }
}

/// Runs gene counting from `init` (uniform when `None`) until the
/// log-likelihood changes by less than [`EM_TOLERANCE`] or after
/// [`EM_MAX_ITERATIONS`] steps.
pub fn em_gene_count(
    system: &PhenotypeSystem,
    counts: &[u64],
    init: Option<&[f64]>,
) -> Result<EmTrajectory, GeneCountError> {
    let n = system.alleles.len();
    if counts.len() != system.phenotypes.len() {
        return Err(GeneCountError::CountMismatch { expected: system.phenotypes.len(), got: counts.len() });
    }
    if counts.iter().sum::<u64>() == 0 {
        return Err(GeneCountError::ZeroTotalCount);
    }
    let start = match init {
        Some(f) => {
            let total: f64 = f.iter().sum();
            if f.len() != n || f.iter().any(|&x| !(x > 0.0)) || (total - 1.0).abs() > 1e-12 {
                return Err(GeneCountError::NonSimplexInit);
            }
            f.to_vec()
        }
        None => vec![1.0 / n as f64; n],
    };
    let loglik = phenotype_loglik(system, counts, &start);
    if loglik == f64::NEG_INFINITY {
        let probs = system.phenotype_probabilities(&start);
        let k = (0..counts.len()).find(|&k| counts[k] > 0 && probs[k] == 0.0).unwrap_or(0);
        return Err(GeneCountError::ImpossiblePhenotype(system.phenotypes[k].clone()));
    }
    let mut iterates = vec![EmIterate { frequencies: start, loglik }];
    let mut converged = false;
    for _ in 0..EM_MAX_ITERATIONS {
        let prev = iterates.last().expect("nonempty");
        let frequencies = em_step(system, counts, &prev.frequencies);
        let loglik = phenotype_loglik(system, counts, &frequencies);
        let delta = (loglik - prev.loglik).abs();
        iterates.push(EmIterate { frequencies, loglik });
        if delta < EM_TOLERANCE {
            converged = true;
            break;
        }
    }
    Ok(EmTrajectory { iterates, converged })
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Linear convergence rate: geometric mean of the last
/// [`RATE_WINDOW`] ratios `|t(k+1) - t*| / |t(k) - t*|`, with `t*` the final
/// iterate. Errors no larger than 100 times the final step are below what
/// `t*` can resolve, so only ratios between two errors above that floor
/// enter. A run whose first error above the floor is followed directly by
/// one below it converged in one step and has rate 0.
pub fn em_convergence_rate(t: &EmTrajectory) -> Result<f64, GeneCountError> {
    let it = &t.iterates;
    if it.len() < 3 {
        return Err(GeneCountError::InsufficientIterates);
    }
    let last = &it[it.len() - 1].frequencies;
    let floor = 100.0 * distance(last, &it[it.len() - 2].frequencies);
    let errors: Vec<f64> = it.iter().map(|x| distance(&x.frequencies, last)).collect();
    let resolved = errors.iter().take_while(|&&e| e > floor).count();
    match resolved {
        0 => Err(GeneCountError::InsufficientIterates),
        1 => Ok(0.0),
        _ => {
            let ratios: Vec<f64> = (0..resolved - 1).map(|k| errors[k + 1] / errors[k]).collect();
            let window = &ratios[ratios.len().saturating_sub(RATE_WINDOW)..];
            Ok((window.iter().map(|r| r.ln()).sum::<f64>() / window.len() as f64).exp())
        }
    }
}

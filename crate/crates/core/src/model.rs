//! Two-locus genetic model: a trait locus and a marker locus, founder
//! priors, meiotic transmission with recombination, and penetrance.
//!
//! Haplotypes are indexed `trait * n_marker + marker`; phased genotype
//! states are indexed `paternal * n_haplotypes + maternal`, so `(h1, h2)`
//! and `(h2, h1)` are distinct states.

use thiserror::Error;

/// Frequencies must sum to one within this tolerance.
pub const FREQUENCY_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("locus {locus:?}: {reason}")]
    InvalidLocus { locus: String, reason: String },
    #[error("recombination fraction {0} outside [0, 1/2]")]
    InvalidRecombination(f64),
    #[error("eta {0} outside [0, 1]")]
    InvalidEta(f64),
    #[error("penetrance {value} for trait genotype {genotype:?} outside [0, 1]")]
    InvalidPenetrance { genotype: (usize, usize), value: f64 },
    #[error("penetrance table has {got} entries, expected {expected}")]
    PenetranceShape { got: usize, expected: usize },
    #[error("allele index {index} out of range for locus {locus:?}")]
    AlleleOutOfRange { locus: String, index: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Locus {
    name: String,
    alleles: Vec<String>,
    frequencies: Vec<f64>,
}

impl Locus {
    /// Builds a locus; a zero frequency marks an allele declared absent.
    pub fn new(
        name: impl Into<String>,
        alleles: Vec<String>,
        frequencies: Vec<f64>,
    ) -> Result<Self, ModelError> {
        let name = name.into();
        let bad = |reason: String| ModelError::InvalidLocus { locus: name.clone(), reason };
        if frequencies.is_empty() {
            return Err(bad("no alleles".into()));
        }
        if alleles.len() != frequencies.len() {
            return Err(bad(format!(
                "{} allele names for {} frequencies",
                alleles.len(),
                frequencies.len()
            )));
        }
        if let Some(f) = frequencies.iter().find(|f| !(0.0..=1.0).contains(*f)) {
            return Err(bad(format!("frequency {f} outside [0, 1]")));
        }
        let total: f64 = frequencies.iter().sum();
        if (total - 1.0).abs() > FREQUENCY_SUM_TOLERANCE {
            return Err(bad(format!("frequencies sum to {total}")));
        }
        Ok(Locus { name, alleles, frequencies })
    }

    /// Locus with alleles named `1..=n`.
    pub fn numbered(name: impl Into<String>, frequencies: Vec<f64>) -> Result<Self, ModelError> {
        let alleles = (1..=frequencies.len()).map(|i| i.to_string()).collect();
        Locus::new(name, alleles, frequencies)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alleles(&self) -> &[String] {
        &self.alleles
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn n_alleles(&self) -> usize {
        self.frequencies.len()
    }

    pub fn allele_index(&self, name: &str) -> Option<usize> {
        self.alleles.iter().position(|a| a == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Haplotype {
    pub trait_allele: usize,
    pub marker_allele: usize,
}

impl Haplotype {
    pub fn new(trait_allele: usize, marker_allele: usize) -> Self {
        Haplotype { trait_allele, marker_allele }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PhasedGenotype {
    pub paternal: Haplotype,
    pub maternal: Haplotype,
}

impl PhasedGenotype {
    pub fn new(paternal: Haplotype, maternal: Haplotype) -> Self {
        PhasedGenotype { paternal, maternal }
    }

    pub fn swapped(self) -> Self {
        PhasedGenotype { paternal: self.maternal, maternal: self.paternal }
    }

    /// Unordered trait genotype, smaller allele first.
    pub fn trait_genotype(&self) -> (usize, usize) {
        sorted(self.paternal.trait_allele, self.maternal.trait_allele)
    }

    /// Unordered marker genotype, smaller allele first.
    pub fn marker_genotype(&self) -> (usize, usize) {
        sorted(self.paternal.marker_allele, self.maternal.marker_allele)
    }
}

pub(crate) fn sorted(a: usize, b: usize) -> (usize, usize) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Recombination fraction between trait and marker, with `eta = 1 - 2 chi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecombinationParam {
    chi: f64,
}

impl RecombinationParam {
    pub const FREE: RecombinationParam = RecombinationParam { chi: 0.5 };

    pub fn new(chi: f64) -> Result<Self, ModelError> {
        if !(0.0..=0.5).contains(&chi) {
            return Err(ModelError::InvalidRecombination(chi));
        }
        Ok(RecombinationParam { chi })
    }

    pub fn from_eta(eta: f64) -> Result<Self, ModelError> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(ModelError::InvalidEta(eta));
        }
        Ok(RecombinationParam { chi: (1.0 - eta) / 2.0 })
    }

    /// Polynomial continuation to `chi` in `[0, 1]`, i.e. `eta` in
    /// `[-1, 1]`. Only meaningful for derivatives at the null.
    pub(crate) fn continued(chi: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&chi));
        RecombinationParam { chi }
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn eta(&self) -> f64 {
        1.0 - 2.0 * self.chi
    }

    pub fn is_null(&self) -> bool {
        self.chi == 0.5
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Phenotype {
    Affected,
    Unaffected,
    #[default]
    Unknown,
}

/// P(affected | unordered trait genotype).
#[derive(Debug, Clone, PartialEq)]
pub struct PenetranceModel {
    n_alleles: usize,
    // Upper triangle, row-major over (i, j) with i <= j.
    table: Vec<f64>,
}

fn tri_index(n: usize, (i, j): (usize, usize)) -> usize {
    let (i, j) = sorted(i, j);
    i * n - i * (i + 1) / 2 + j
}

impl PenetranceModel {
    /// `values` lists P(affected) for genotypes (0,0), (0,1), ..., (0,n-1),
    /// (1,1), ..., (n-1,n-1).
    pub fn new(n_alleles: usize, values: Vec<f64>) -> Result<Self, ModelError> {
        let expected = n_alleles * (n_alleles + 1) / 2;
        if values.len() != expected {
            return Err(ModelError::PenetranceShape { got: values.len(), expected });
        }
        let model = PenetranceModel { n_alleles, table: values };
        for i in 0..n_alleles {
            for j in i..n_alleles {
                let value = model.table[tri_index(n_alleles, (i, j))];
                if !(0.0..=1.0).contains(&value) {
                    return Err(ModelError::InvalidPenetrance { genotype: (i, j), value });
                }
            }
        }
        Ok(model)
    }

    /// Biallelic trait with allele 0 the disease allele: penetrances for
    /// (DD, Dd, dd).
    pub fn biallelic(dd: f64, dn: f64, nn: f64) -> Result<Self, ModelError> {
        PenetranceModel::new(2, vec![dd, dn, nn])
    }

    pub fn fully_penetrant_dominant() -> Self {
        PenetranceModel::biallelic(1.0, 1.0, 0.0).expect("valid table")
    }

    pub fn fully_penetrant_recessive() -> Self {
        PenetranceModel::biallelic(1.0, 0.0, 0.0).expect("valid table")
    }

    pub fn n_alleles(&self) -> usize {
        self.n_alleles
    }

    pub fn affected(&self, genotype: (usize, usize)) -> f64 {
        self.table[tri_index(self.n_alleles, genotype)]
    }

    pub fn set(&mut self, genotype: (usize, usize), value: f64) -> Result<(), ModelError> {
        if !(0.0..=1.0).contains(&value) {
            return Err(ModelError::InvalidPenetrance { genotype, value });
        }
        let k = tri_index(self.n_alleles, genotype);
        self.table[k] = value;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoLocusModel {
    pub trait_locus: Locus,
    pub marker_locus: Locus,
    pub penetrance: PenetranceModel,
    pub default_chi: Option<f64>,
}

impl TwoLocusModel {
    pub fn new(
        trait_locus: Locus,
        marker_locus: Locus,
        penetrance: PenetranceModel,
    ) -> Result<Self, ModelError> {
        if penetrance.n_alleles() != trait_locus.n_alleles() {
            let n = trait_locus.n_alleles();
            return Err(ModelError::PenetranceShape {
                got: penetrance.table.len(),
                expected: n * (n + 1) / 2,
            });
        }
        Ok(TwoLocusModel { trait_locus, marker_locus, penetrance, default_chi: None })
    }

    pub fn n_haplotypes(&self) -> usize {
        self.trait_locus.n_alleles() * self.marker_locus.n_alleles()
    }

    pub fn n_states(&self) -> usize {
        self.n_haplotypes() * self.n_haplotypes()
    }

    pub fn haplotype_index(&self, h: Haplotype) -> usize {
        h.trait_allele * self.marker_locus.n_alleles() + h.marker_allele
    }

    pub fn haplotype(&self, index: usize) -> Haplotype {
        let nm = self.marker_locus.n_alleles();
        Haplotype::new(index / nm, index % nm)
    }

    pub fn state_index(&self, g: PhasedGenotype) -> usize {
        self.haplotype_index(g.paternal) * self.n_haplotypes() + self.haplotype_index(g.maternal)
    }

    pub fn state(&self, index: usize) -> PhasedGenotype {
        let h = self.n_haplotypes();
        PhasedGenotype::new(self.haplotype(index / h), self.haplotype(index % h))
    }

    pub fn states(&self) -> impl Iterator<Item = PhasedGenotype> + '_ {
        (0..self.n_states()).map(|s| self.state(s))
    }

    pub fn check_genotype(&self, g: &PhasedGenotype) -> Result<(), ModelError> {
        for h in [g.paternal, g.maternal] {
            if h.trait_allele >= self.trait_locus.n_alleles() {
                return Err(ModelError::AlleleOutOfRange {
                    locus: self.trait_locus.name().into(),
                    index: h.trait_allele,
                });
            }
            if h.marker_allele >= self.marker_locus.n_alleles() {
                return Err(ModelError::AlleleOutOfRange {
                    locus: self.marker_locus.name().into(),
                    index: h.marker_allele,
                });
            }
        }
        Ok(())
    }
}

/// Prior probability of a founder's phased genotype under Hardy-Weinberg at
/// each locus and linkage equilibrium between them.
pub fn founder_prior(g: &PhasedGenotype, trait_locus: &Locus, marker: &Locus) -> f64 {
    let t = trait_locus.frequencies();
    let m = marker.frequencies();
    // Grouped by locus so the value is bitwise symmetric in the two
    // haplotypes.
    (t[g.paternal.trait_allele] * t[g.maternal.trait_allele])
        * (m[g.paternal.marker_allele] * m[g.maternal.marker_allele])
}

/// The up to four gametes a parent can transmit, with probabilities,
/// identical gametes merged. Order: paternal, maternal, then the two
/// recombinants.
pub fn gametes(parent: &PhasedGenotype, r: RecombinationParam) -> Vec<(Haplotype, f64)> {
    let chi = r.chi();
    let (p, m) = (parent.paternal, parent.maternal);
    let outcomes = [
        (p, 0.5 * (1.0 - chi)),
        (m, 0.5 * (1.0 - chi)),
        (Haplotype::new(p.trait_allele, m.marker_allele), 0.5 * chi),
        (Haplotype::new(m.trait_allele, p.marker_allele), 0.5 * chi),
    ];
    let mut out: Vec<(Haplotype, f64)> = Vec::with_capacity(4);
    for (h, w) in outcomes {
        match out.iter_mut().find(|(g, _)| *g == h) {
            Some(slot) => slot.1 += w,
            None => out.push((h, w)),
        }
    }
    out
}

/// Probability that `parent` transmits `gamete`.
pub fn transmission_prob(parent: &PhasedGenotype, gamete: &Haplotype, r: RecombinationParam) -> f64 {
    let chi = r.chi();
    let (p, m) = (parent.paternal, parent.maternal);
    let mut prob = 0.0;
    if *gamete == p {
        prob += 0.5 * (1.0 - chi);
    }
    if *gamete == m {
        prob += 0.5 * (1.0 - chi);
    }
    if gamete.trait_allele == p.trait_allele && gamete.marker_allele == m.marker_allele {
        prob += 0.5 * chi;
    }
    if gamete.trait_allele == m.trait_allele && gamete.marker_allele == p.marker_allele {
        prob += 0.5 * chi;
    }
    prob
}

/// P(phenotype | trait genotype of `g`); unknown phenotypes carry no data.
pub fn penetrance_prob(phenotype: Phenotype, g: &PhasedGenotype, pm: &PenetranceModel) -> f64 {
    match phenotype {
        Phenotype::Unknown => 1.0,
        Phenotype::Affected => pm.affected(g.trait_genotype()),
        Phenotype::Unaffected => 1.0 - pm.affected(g.trait_genotype()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn biallelic(name: &str, p: f64) -> Locus {
        Locus::numbered(name, vec![p, 1.0 - p]).unwrap()
    }

    fn model(t: f64, m: f64) -> TwoLocusModel {
        TwoLocusModel::new(
            biallelic("trait", t),
            biallelic("marker", m),
            PenetranceModel::fully_penetrant_dominant(),
        )
        .unwrap()
    }

    fn double_het() -> PhasedGenotype {
        PhasedGenotype::new(Haplotype::new(0, 0), Haplotype::new(1, 1))
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-15
    }

    #[test]
    fn uniform_founder_prior() {
        let m = model(0.5, 0.5);
        for g in m.states() {
            assert_eq!(founder_prior(&g, &m.trait_locus, &m.marker_locus), 1.0 / 16.0);
        }
    }

    #[test]
    fn rare_allele_founder_prior() {
        let m = model(0.01, 0.3);
        let g = PhasedGenotype::new(Haplotype::new(0, 0), Haplotype::new(0, 0));
        let p = founder_prior(&g, &m.trait_locus, &m.marker_locus);
        assert!((p - 9e-6).abs() < 1e-18);
        let total: f64 =
            m.states().map(|g| founder_prior(&g, &m.trait_locus, &m.marker_locus)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn transmission_tight_free_and_partial() {
        let g = double_het();
        let parental = [Haplotype::new(0, 0), Haplotype::new(1, 1)];
        let recomb = [Haplotype::new(0, 1), Haplotype::new(1, 0)];
        for (chi, par, rec) in [(0.0, 0.5, 0.0), (0.5, 0.25, 0.25), (0.1, 0.45, 0.05)] {
            let r = RecombinationParam::new(chi).unwrap();
            for h in parental {
                assert!(close(transmission_prob(&g, &h, r), par));
            }
            for h in recomb {
                assert!(close(transmission_prob(&g, &h, r), rec));
            }
        }
    }

    #[test]
    fn gametes_agree_with_transmission_prob() {
        let m = model(0.3, 0.6);
        let r = RecombinationParam::new(0.17).unwrap();
        for g in m.states() {
            let listed = gametes(&g, r);
            for h in 0..m.n_haplotypes() {
                let h = m.haplotype(h);
                let from_list = listed.iter().find(|(x, _)| *x == h).map_or(0.0, |x| x.1);
                assert!(close(from_list, transmission_prob(&g, &h, r)));
            }
        }
    }

    #[test]
    fn penetrance_lookups() {
        let rec = PenetranceModel::fully_penetrant_recessive();
        let dd = PhasedGenotype::new(Haplotype::new(0, 0), Haplotype::new(0, 1));
        let dn = PhasedGenotype::new(Haplotype::new(0, 0), Haplotype::new(1, 1));
        assert_eq!(penetrance_prob(Phenotype::Affected, &dd, &rec), 1.0);
        assert_eq!(penetrance_prob(Phenotype::Affected, &dn, &rec), 0.0);
        assert_eq!(penetrance_prob(Phenotype::Unknown, &dn, &rec), 1.0);

        let partial = PenetranceModel::biallelic(0.8, 0.8, 0.05).unwrap();
        let nn = PhasedGenotype::new(Haplotype::new(1, 0), Haplotype::new(1, 1));
        assert_eq!(penetrance_prob(Phenotype::Affected, &dn, &partial), 0.8);
        assert_eq!(penetrance_prob(Phenotype::Affected, &nn, &partial), 0.05);
        assert!(close(penetrance_prob(Phenotype::Unaffected, &nn, &partial), 0.95));
    }

    #[test]
    fn eta_round_trip() {
        let r = RecombinationParam::new(0.5).unwrap();
        assert_eq!(r.eta(), 0.0);
        assert!(r.is_null());
        assert_eq!(RecombinationParam::from_eta(1.0).unwrap().chi(), 0.0);
        assert!(RecombinationParam::new(0.51).is_err());
        assert!(RecombinationParam::new(-0.01).is_err());
    }

    #[test]
    fn locus_validation() {
        assert!(Locus::numbered("m", vec![0.3, 0.6]).is_err());
        assert!(Locus::numbered("m", vec![1.2, -0.2]).is_err());
        assert!(Locus::numbered("m", vec![0.0, 1.0]).is_ok());
        assert!(PenetranceModel::biallelic(1.1, 0.0, 0.0).is_err());
    }

    fn arb_model() -> impl Strategy<Value = TwoLocusModel> {
        (
            prop::collection::vec(0.05f64..1.0, 2..4),
            prop::collection::vec(0.05f64..1.0, 2..5),
        )
            .prop_map(|(t, m)| {
                let norm = |v: Vec<f64>| {
                    let s: f64 = v.iter().sum();
                    let mut v: Vec<f64> = v.iter().map(|x| x / s).collect();
                    let head: f64 = v[..v.len() - 1].iter().sum();
                    *v.last_mut().unwrap() = 1.0 - head;
                    v
                };
                let t = norm(t);
                let n = t.len();
                TwoLocusModel::new(
                    Locus::numbered("t", t).unwrap(),
                    Locus::numbered("m", norm(m)).unwrap(),
                    PenetranceModel::new(n, vec![0.5; n * (n + 1) / 2]).unwrap(),
                )
                .unwrap()
            })
    }

    proptest! {
        #[test]
        fn gametes_sum_to_one(m in arb_model(), chi in 0.0f64..=0.5, seed in 0usize..1000) {
            let r = RecombinationParam::new(chi).unwrap();
            let g = m.state(seed % m.n_states());
            let total: f64 = (0..m.n_haplotypes())
                .map(|h| transmission_prob(&g, &m.haplotype(h), r))
                .sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }

        #[test]
        fn transmission_symmetric_under_phase_swap(
            m in arb_model(), chi in 0.0f64..=0.5, seed in 0usize..1000
        ) {
            let r = RecombinationParam::new(chi).unwrap();
            let g = m.state(seed % m.n_states());
            for h in 0..m.n_haplotypes() {
                let h = m.haplotype(h);
                prop_assert!(close(transmission_prob(&g, &h, r), transmission_prob(&g.swapped(), &h, r)));
            }
        }

        #[test]
        fn founder_prior_symmetric_under_phase_swap(m in arb_model(), seed in 0usize..1000) {
            let g = m.state(seed % m.n_states());
            let a = founder_prior(&g, &m.trait_locus, &m.marker_locus);
            let b = founder_prior(&g.swapped(), &m.trait_locus, &m.marker_locus);
            prop_assert_eq!(a, b);
        }

        #[test]
        fn free_recombination_factorizes(m in arb_model(), seed in 0usize..1000) {
            let r = RecombinationParam::FREE;
            let g = m.state(seed % m.n_states());
            for h in 0..m.n_haplotypes() {
                let h = m.haplotype(h);
                let t = [g.paternal.trait_allele, g.maternal.trait_allele]
                    .iter().filter(|&&a| a == h.trait_allele).count() as f64 / 2.0;
                let k = [g.paternal.marker_allele, g.maternal.marker_allele]
                    .iter().filter(|&&a| a == h.marker_allele).count() as f64 / 2.0;
                prop_assert!((transmission_prob(&g, &h, r) - t * k).abs() < 1e-15);
            }
        }
    }
}

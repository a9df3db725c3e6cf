//! Independent likelihood oracle: plain summation over every joint
//! assignment of phased genotypes, written from the model definition
//! without using the crate's transmission or evidence code.

#![allow(dead_code)]

use linkage_core::{ObservedData, Pedigree, Phenotype, TwoLocusModel};

type Hap = (usize, usize);

fn haps(m: &TwoLocusModel) -> Vec<Hap> {
    let (nt, nm) = (m.trait_locus.n_alleles(), m.marker_locus.n_alleles());
    (0..nt).flat_map(|t| (0..nm).map(move |k| (t, k))).collect()
}

fn meiosis(parent: (Hap, Hap), g: Hap, chi: f64) -> f64 {
    let (h1, h2) = parent;
    let mut p = 0.0;
    if g == h1 {
        p += 0.5 * (1.0 - chi);
    }
    if g == h2 {
        p += 0.5 * (1.0 - chi);
    }
    if g == (h1.0, h2.1) {
        p += 0.5 * chi;
    }
    if g == (h2.0, h1.1) {
        p += 0.5 * chi;
    }
    p
}

fn local(m: &TwoLocusModel, d: &ObservedData, i: usize, g: (Hap, Hap)) -> f64 {
    let obs = d.get(i);
    let (a, b) = (g.0 .1.min(g.1 .1), g.0 .1.max(g.1 .1));
    if let Some(mk) = obs.marker {
        if mk != (a, b) {
            return 0.0;
        }
    }
    let pen = m.penetrance.affected((g.0 .0, g.1 .0));
    match obs.phenotype {
        Phenotype::Affected => pen,
        Phenotype::Unaffected => 1.0 - pen,
        Phenotype::Unknown => 1.0,
    }
}

/// Likelihood and, per individual, the joint probability of the data
/// with each phased genotype (indexed paternal * H + maternal, haplotype
/// index trait * n_marker + marker). Individuals must be listed parents
/// first.
pub fn oracle(p: &Pedigree, m: &TwoLocusModel, d: &ObservedData, chi: f64) -> (f64, Vec<Vec<f64>>) {
    let hs = haps(m);
    let n = p.len();
    let h = hs.len();
    let tf = m.trait_locus.frequencies();
    let mf = m.marker_locus.frequencies();
    let mut joint = vec![vec![0.0; h * h]; n];
    let mut assign = vec![(0usize, 0usize); n];
    let mut total = 0.0;

    #[allow(clippy::too_many_arguments)]
    fn rec(
        i: usize,
        w: f64,
        p: &Pedigree,
        m: &TwoLocusModel,
        d: &ObservedData,
        chi: f64,
        hs: &[Hap],
        tf: &[f64],
        mf: &[f64],
        assign: &mut Vec<(usize, usize)>,
        joint: &mut Vec<Vec<f64>>,
        total: &mut f64,
    ) {
        if i == p.len() {
            *total += w;
            for (j, &(a, b)) in assign.iter().enumerate() {
                joint[j][a * hs.len() + b] += w;
            }
            return;
        }
        for a in 0..hs.len() {
            for b in 0..hs.len() {
                let g = (hs[a], hs[b]);
                let prior = match p.parents(i) {
                    None => tf[g.0 .0] * mf[g.0 .1] * tf[g.1 .0] * mf[g.1 .1],
                    Some((f, mo)) => {
                        assert!(f < i && mo < i, "oracle needs parents listed first");
                        let gf = (hs[assign[f].0], hs[assign[f].1]);
                        let gm = (hs[assign[mo].0], hs[assign[mo].1]);
                        meiosis(gf, g.0, chi) * meiosis(gm, g.1, chi)
                    }
                };
                let v = w * prior * local(m, d, i, g);
                if v == 0.0 {
                    continue;
                }
                assign[i] = (a, b);
                rec(i + 1, v, p, m, d, chi, hs, tf, mf, assign, joint, total);
            }
        }
    }

    rec(0, 1.0, p, m, d, chi, &hs, tf, mf, &mut assign, &mut joint, &mut total);
    (total, joint)
}

pub fn oracle_loglik(p: &Pedigree, m: &TwoLocusModel, d: &ObservedData, chi: f64) -> f64 {
    oracle(p, m, d, chi).0.ln()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(1.0)
}

//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if
//! any criterion fails.

use std::collections::HashMap;
use std::f64::consts::{LN_10, LOG10_E};
use std::process::Command;
use std::time::Instant;

use linkage_core::corpus::{
    agrees, dominant_model, oracle_corpus, phase_known_family, phase_known_parents, phase_known_pedigree,
    run_check, CORPUS_CHIS,
};
use linkage_core::detect::{
    data_law, elod_enumerate, elod_enumerate_design, elod_monte_carlo, fdr, heterogeneity_test, kl_information,
    odds_of_error_check, sprt_boundaries, sprt_run, SprtBoundaries, SprtConfig, SprtDecision, PI_ONE_IN_20,
    PI_ONE_IN_24,
};
use linkage_core::familytests::{
    homozygosity_score, simulate_sib_pair_statistics, simulate_tdt_statistics, tdt, HomozygosityInput,
    TrioTransmission,
};
use linkage_core::genecount::{em_convergence_rate, em_gene_count, phenotype_loglik, EmTrajectory, PhenotypeSystem};
use linkage_core::likelihood::{
    brute_force_loglik, family_lod_curves, finney_score, mle_recombination, ChiGrid, LodFunction, ScoreCategory,
};
use linkage_core::sim::{drop_with_rng, estimate_power, replicate_rng, ObservationDesign, Role, SimConfig};
use linkage_core::{
    validate_pedigree, Family, Individual, LikelihoodEngine, Locus, ObservedData, PenetranceModel, Pedigree,
    TwoLocusModel,
};
use rand::Rng;

struct Outcome {
    passed: bool,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { passed: true, details: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if !ok {
            self.passed = false;
            self.details.push(format!("FAILED {what}"));
        } else {
            self.details.push(what);
        }
    }
}

fn nuclear(children: usize) -> Pedigree {
    let mut raw = vec![Individual::founder("f"), Individual::founder("m")];
    for k in 1..=children {
        raw.push(Individual::child(format!("c{k}"), "f", "m"));
    }
    validate_pedigree("nuclear", raw).unwrap()
}

fn common_dominant() -> TwoLocusModel {
    TwoLocusModel::new(
        Locus::numbered("trait", vec![0.2, 0.8]).unwrap(),
        Locus::numbered("marker", vec![0.5, 0.5]).unwrap(),
        PenetranceModel::fully_penetrant_dominant(),
    )
    .unwrap()
}

/// Phase-known parents fixed, children simulated.
fn phase_known_design(children: usize) -> (Pedigree, ObservationDesign) {
    let fixed = phase_known_parents(children);
    let roles = (0..4 + children).map(|i| if i < 4 { Role::Fixed(fixed.get(i)) } else { Role::Simulated }).collect();
    (phase_known_pedigree(children), ObservationDesign::new(roles))
}

// 1 -------------------------------------------------------------------

fn oracle_equivalence() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let cases = oracle_corpus();
    let mut names: Vec<&str> = cases.iter().map(|c| c.family.pedigree.family_id()).collect();
    names.dedup();
    let largest = cases.iter().map(|c| c.family.pedigree.len()).max().unwrap();
    o.check(names.len() >= 20 && largest <= 6, format!("{} structures, at most {largest} individuals", names.len()));
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    for c in &cases {
        let engine = LikelihoodEngine::new(&c.family.pedigree, &c.model);
        let peeled = engine.loglik(&c.family.data, c.chi).unwrap();
        let enumerated = brute_force_loglik(&c.family.pedigree, &c.model, &c.family.data, c.chi).unwrap();
        if !(engine.is_peelable() && agrees(peeled, enumerated, 1e-10)) {
            bad += 1;
        }
        if peeled.is_finite() {
            worst = worst.max((peeled - enumerated).abs() / peeled.abs().max(1.0));
        }
    }
    o.check(bad == 0, format!("{} cases over 3 models and chi {:?}, worst relative gap {worst:.1e}", cases.len(), CORPUS_CHIS));
    let secs = start.elapsed().as_secs_f64();
    o.check(secs < 60.0, format!("{secs:.2} s"));
    o
}

// 2 -------------------------------------------------------------------

fn lod_identities() -> Outcome {
    let mut o = Outcome::new();
    let cases = oracle_corpus();
    let nonzero = cases
        .iter()
        .filter(|c| LodFunction::new(std::slice::from_ref(&c.family), &c.model).unwrap().total(0.5).unwrap() != 0.0)
        .count();
    o.check(nonzero == 0, format!("lod(0.5) == 0 on all {} corpus elements", cases.len()));

    let mut worst: f64 = 0.0;
    for model_name in ["dominant", "recessive", "partial"] {
        let group: Vec<_> = cases.iter().filter(|c| c.name.contains(&format!("/{model_name}/"))).collect();
        let fams: Vec<Family> = group.iter().map(|c| c.family.clone()).collect();
        let m = &group[0].model;
        let f = LodFunction::new(&fams, m).unwrap();
        for chi in [0.05, 0.1, 0.3] {
            let total = f.total(chi).unwrap();
            let separate: f64 = fams
                .iter()
                .map(|fam| LodFunction::new(std::slice::from_ref(fam), m).unwrap().total(chi).unwrap())
                .sum();
            worst = worst.max((total - separate).abs());
        }
    }
    o.check(worst <= 1e-12, format!("additivity gap {worst:.1e}"));

    let fam = phase_known_family(10, 0);
    let fit = mle_recombination(std::slice::from_ref(&fam), &dominant_model()).unwrap();
    let want = 10.0 * 2f64.log10();
    o.check(
        (fit.max_lod - want).abs() < 1e-4 && fit.chi_hat.abs() < 1e-4,
        format!("ten meioses: max lod {:.10} at chi {:.2e}", fit.max_lod, fit.chi_hat),
    );
    o
}

// 3 -------------------------------------------------------------------

fn score_expansion() -> Outcome {
    let mut o = Outcome::new();
    let exact = vec![
        ScoreCategory::with_derivative(|eta| 0.5 * (1.0 + eta), |_| 0.5),
        ScoreCategory::with_derivative(|eta| 0.5 * (1.0 - eta), |_| -0.5),
    ];
    let r = finney_score(&exact, &[37, 13]).unwrap();
    o.check(
        r.category_scores == [1.0, -1.0] && r.score == 24.0 && r.information_per_observation == 1.0,
        format!("a = {:?}, score {}, information per observation {}", r.category_scores, r.score, r.information_per_observation),
    );

    let m = dominant_model();
    let numeric = vec![
        ScoreCategory::new(|eta| 0.5 * (1.0 + eta)),
        ScoreCategory::new(|eta| 0.5 * (1.0 - eta)),
    ];
    let mut worst: f64 = 0.0;
    for (n, k) in [(10, 0), (10, 2), (8, 3), (12, 5)] {
        let f = phase_known_family(n, k);
        let engine = LikelihoodEngine::new(&f.pedigree, &m);
        let h = 1e-5;
        let fd = (engine.loglik_eta(&f.data, h).unwrap() - engine.loglik_eta(&f.data, -h).unwrap()) / (2.0 * h);
        let s = finney_score(&numeric, &[(n - k) as u64, k as u64]).unwrap().score;
        worst = worst.max((fd - s).abs() / s.abs().max(1.0));
    }
    o.check(worst <= 1e-6, format!("pedigree finite-difference score vs finney_score, relative gap {worst:.1e}"));

    let f = phase_known_family(10, 2);
    let engine = LikelihoodEngine::new(&f.pedigree, &m);
    let null = engine.loglik(&f.data, 0.5).unwrap();
    let mut ratio: f64 = 0.0;
    for eta in [0.001, 0.005, 0.01, 0.02, 0.03, 0.05] {
        let lod = (engine.loglik_eta(&f.data, eta).unwrap() - null) / LN_10;
        let linear = 6.0 * eta * LOG10_E;
        ratio = ratio.max((lod - linear).abs() / (eta * eta));
    }
    o.check(ratio <= 5.0, format!("first-order lod error <= {ratio:.3} eta^2"));
    o
}

// 4 -------------------------------------------------------------------

fn sprt_fdr_arithmetic() -> Outcome {
    let mut o = Outcome::new();
    let b = sprt_boundaries(&SprtConfig::new(0.001, 0.01, 0.1).unwrap());
    o.check(
        (b.log10_a - 990f64.log10()).abs() < 1e-12 && (b.log10_a - 2.9957).abs() < 1e-4,
        format!("log10 A = {:.6}", b.log10_a),
    );
    let s = fdr(0.05, PI_ONE_IN_24, 1.0).unwrap();
    o.check((s - 0.535).abs() < 1e-3 && s > 0.5, format!("fdr(0.05, 1/24, 1) = {s:.6}"));
    let mut exact = true;
    for alpha in [1e-6, 1e-4, 0.001, 0.01, 0.05, 0.2] {
        for w in [0.05, 0.3, 0.8, 1.0] {
            exact &= fdr(alpha, PI_ONE_IN_20, w).unwrap() == 19.0 * alpha / (19.0 * alpha + w);
        }
    }
    o.check(exact, "fdr at pi = 1/20 is 19a/(19a + W) bit for bit");
    o
}

// 5 -------------------------------------------------------------------

fn random_law<R: Rng>(rng: &mut R, n: usize, zeros: bool) -> Vec<f64> {
    let mut v: Vec<f64> =
        (0..n).map(|_| if zeros && rng.gen_bool(0.15) { 0.0 } else { rng.gen_range(0.001..1.0) }).collect();
    if v.iter().all(|&x| x == 0.0) {
        v[0] = 1.0;
    }
    let total: f64 = v.iter().sum();
    v.iter().map(|x| x / total).collect()
}

struct StreamTally {
    linkage: usize,
    no_linkage: usize,
    undecided: usize,
}

fn run_streams(
    p: &Pedigree,
    m: &TwoLocusModel,
    chi_true: f64,
    chi_alt: f64,
    b: &SprtBoundaries,
    streams: u64,
    seed: u64,
    memo: &mut HashMap<ObservedData, f64>,
) -> StreamTally {
    let engine = LikelihoodEngine::new(p, m);
    let design = ObservationDesign::all_simulated(p.len());
    let mut t = StreamTally { linkage: 0, no_linkage: 0, undecided: 0 };
    for s in 0..streams {
        let mut rng = replicate_rng(seed, s);
        let lods = std::iter::from_fn(|| {
            let d = drop_with_rng(p, m, &design, chi_true, 0.0, &mut rng).unwrap().data;
            let lod = *memo.entry(d).or_insert_with_key(|d| {
                (engine.loglik(d, chi_alt).unwrap() - engine.loglik(d, 0.5).unwrap()) / LN_10
            });
            Some(lod)
        })
        .take(1000);
        match sprt_run(lods, b) {
            SprtDecision::DeclareLinkage { .. } => t.linkage += 1,
            SprtDecision::DeclareNoLinkage { .. } => t.no_linkage += 1,
            SprtDecision::Undecided { .. } => t.undecided += 1,
        }
    }
    t
}

fn barnard_identity() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let mut rng = replicate_rng(2024, 0);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    while checked < 1000 {
        let n = rng.gen_range(2..12);
        let f0 = random_law(&mut rng, n, true);
        let f1 = random_law(&mut rng, n, false);
        let region: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        if region.is_empty() {
            continue;
        }
        let r = odds_of_error_check(&f0, &f1, &region).unwrap();
        let ratio = r.alpha / r.power;
        worst = worst.max((ratio - r.conditional_mean_lr).abs() / ratio.abs().max(1.0));
        checked += 1;
    }
    o.check(worst <= 1e-12, format!("{checked} random models and regions, worst gap {worst:.1e}"));

    let mut violations = 0;
    let mut regions = 0;
    for k in 0..1000 {
        let n = 2 + k % 10;
        let f0 = random_law(&mut rng, n, true);
        let f1 = random_law(&mut rng, n, false);
        let a: f64 = rng.gen_range(1.5..50.0);
        let region: Vec<usize> = (0..n).filter(|&x| f0[x] / f1[x] <= 1.0 / a).collect();
        if region.is_empty() {
            continue;
        }
        regions += 1;
        let r = odds_of_error_check(&f0, &f1, &region).unwrap();
        if r.alpha / r.power > 1.0 / a {
            violations += 1;
        }
    }
    o.check(violations == 0, format!("alpha/power <= 1/A on {regions} likelihood-ratio regions"));

    let cfg = SprtConfig::new(0.05, 0.1, 0.1).unwrap();
    let b = sprt_boundaries(&cfg);
    let p = nuclear(4);
    let m = common_dominant();
    let mut memo = HashMap::new();
    let n = 10_000u64;
    let h0 = run_streams(&p, &m, 0.5, cfg.chi_alt, &b, n, 11, &mut memo);
    let h1 = run_streams(&p, &m, cfg.chi_alt, cfg.chi_alt, &b, n, 12, &mut memo);
    let alpha_hat = h0.linkage as f64 / n as f64;
    let beta_hat = h1.no_linkage as f64 / n as f64;
    let ratio = alpha_hat / (1.0 - beta_hat);
    let var_a = alpha_hat * (1.0 - alpha_hat) / n as f64;
    let var_b = beta_hat * (1.0 - beta_hat) / n as f64;
    let se = (var_a / (1.0 - beta_hat).powi(2) + alpha_hat.powi(2) * var_b / (1.0 - beta_hat).powi(4)).sqrt();
    let bound = 10f64.powf(-b.log10_a);
    o.check(
        ratio <= bound + 3.0 * se,
        format!(
            "SPRT over {n} streams per hypothesis: alpha {alpha_hat:.4}, beta {beta_hat:.4}, ratio {ratio:.4} <= 1/A {bound:.4} + 3 x {se:.4} (undecided {}/{})",
            h0.undecided, h1.undecided
        ),
    );
    let secs = start.elapsed().as_secs_f64();
    o.check(secs < 120.0, format!("{secs:.2} s"));
    o
}

// 6 -------------------------------------------------------------------

fn elods() -> Outcome {
    let mut o = Outcome::new();
    let p = nuclear(2);
    let m = common_dominant();
    let exact = elod_enumerate(&p, &m, 0.1, 0.1).unwrap().value;
    let mc = elod_monte_carlo(&p, &m, 0.1, 0.1, 10_000, 77).unwrap();
    let se = mc.standard_error.unwrap();
    o.check(
        (mc.value - exact).abs() <= 3.0 * se,
        format!("4-person family: Monte Carlo {:.5} +- {se:.5} vs enumerated {exact:.5}", mc.value),
    );

    let design = ObservationDesign::all_simulated(p.len());
    let mut worst: f64 = 0.0;
    for chi in [0.0, 0.05, 0.1, 0.3] {
        let at = data_law(&p, &m, &design, chi).unwrap();
        let null = data_law(&p, &m, &design, 0.5).unwrap();
        let f0: Vec<f64> = at.iter().map(|x| x.1).collect();
        let f1: Vec<f64> = null.iter().map(|x| x.1).collect();
        let kl = kl_information(&f0, &f1).unwrap() / LN_10;
        let e = elod_enumerate(&p, &m, chi, chi).unwrap().value;
        worst = worst.max((e - kl).abs());
    }
    o.check(worst <= 1e-10, format!("elod at the truth vs KL / ln 10, worst gap {worst:.1e}"));

    let (p1, d1) = phase_known_design(1);
    let per = elod_enumerate_design(&p1, &dominant_model(), &d1, 0.0, 0.0).unwrap().value;
    o.check((per - 2f64.log10()).abs() < 1e-12, format!("single meiosis at chi = 0: {per:.12}"));
    o
}

// 7 -------------------------------------------------------------------

const ABO_COUNTS: [u64; 4] = [186, 38, 13, 284];

fn monotone(t: &EmTrajectory) -> bool {
    t.iterates.windows(2).all(|w| w[1].loglik >= w[0].loglik - 1e-12)
}

fn em() -> Outcome {
    let mut o = Outcome::new();
    let abo = PhenotypeSystem::abo();
    let mut runs = vec![em_gene_count(&abo, &ABO_COUNTS, None).unwrap()];
    let mut rng = replicate_rng(99, 0);
    for _ in 0..20 {
        let init = random_law(&mut rng, 3, false);
        runs.push(em_gene_count(&abo, &ABO_COUNTS, Some(&init)).unwrap());
    }
    for _ in 0..20 {
        let counts: Vec<u64> = (0..4).map(|_| rng.gen_range(1..500)).collect();
        runs.push(em_gene_count(&abo, &counts, None).unwrap());
    }
    let codominant = PhenotypeSystem::codominant(vec!["1".into(), "2".into(), "3".into()]);
    let cod_counts = [12, 30, 7, 25, 40, 9];
    let cod = em_gene_count(&codominant, &cod_counts, None).unwrap();
    runs.push(cod.clone());
    let steps: usize = runs.iter().map(|t| t.steps()).sum();
    o.check(runs.iter().all(monotone), format!("log-likelihood never decreases over {} runs, {steps} steps", runs.len()));

    let n = 10_000usize;
    let mut best = (f64::NEG_INFINITY, [0.0; 3]);
    for i in 1..n {
        for j in 1..n - i {
            let f = [i as f64 / n as f64, j as f64 / n as f64, (n - i - j) as f64 / n as f64];
            let ll = phenotype_loglik(&abo, &ABO_COUNTS, &f);
            if ll > best.0 {
                best = (ll, f);
            }
        }
    }
    let limit = &runs[0].last().frequencies;
    let gap = limit.iter().zip(best.1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    o.check(gap <= 1e-4, format!("ABO limit {limit:.6?} vs grid {:?}, gap {gap:.1e}", best.1));

    let first = &cod.iterates[1].frequencies;
    let last = &cod.last().frequencies;
    let moved = first.iter().zip(last).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let rate = em_convergence_rate(&cod).unwrap();
    o.check(moved < 1e-15 && rate == 0.0, format!("codominant: first step lands on the limit (gap {moved:.1e}), rate {rate}"));
    o
}

// 8 -------------------------------------------------------------------

fn het_replicate(
    design: &(Pedigree, ObservationDesign),
    m: &TwoLocusModel,
    linked: usize,
    unlinked: usize,
    seed: u64,
    r: u64,
) -> linkage_core::detect::HetTestResult {
    let mut rng = replicate_rng(seed, r);
    let (p, d) = design;
    let fams: Vec<Family> = (0..linked + unlinked)
        .map(|k| {
            let chi = if k < linked { 0.05 } else { 0.5 };
            Family::new(p.clone(), drop_with_rng(p, m, d, chi, 0.0, &mut rng).unwrap().data)
        })
        .collect();
    let curves = family_lod_curves(&fams, m, &ChiGrid::default()).unwrap();
    heterogeneity_test(&curves).unwrap()
}

fn heterogeneity() -> Outcome {
    let mut o = Outcome::new();
    // Twenty informative meioses per family, so a linked family rarely
    // looks unlinked by chance.
    let design = phase_known_design(20);
    let m = dominant_model();
    let homogeneous: Vec<_> = (0..100).map(|r| het_replicate(&design, &m, 20, 0, 31, r)).collect();
    let mixed: Vec<_> = (0..100).map(|r| het_replicate(&design, &m, 20, 20, 32, r)).collect();
    let min_lr = homogeneous.iter().chain(&mixed).map(|h| h.lr_statistic).fold(f64::INFINITY, f64::min);
    o.check(min_lr >= 0.0, format!("smallest LR statistic {min_lr:.3e}"));
    let ones = homogeneous.iter().filter(|h| h.alpha_hat == 1.0).count();
    o.check(ones >= 95, format!("homogeneous: alpha_hat = 1 in {ones}/100"));
    let inside = mixed.iter().filter(|h| (0.25..=0.75).contains(&h.alpha_hat)).count();
    o.check(inside >= 90, format!("50/50 admixture: alpha_hat in [0.25, 0.75] in {inside}/100"));
    o
}

// 9 -------------------------------------------------------------------

fn family_tests() -> Outcome {
    let mut o = Outcome::new();
    let ten = tdt(&TrioTransmission::new(10, 0)).unwrap();
    o.check(ten == 10.0, format!("TDT(10, 0) = {ten}"));
    let symmetric = (0..30u64).all(|b| {
        (0..30u64).filter(|c| b + c > 0).all(|c| {
            tdt(&TrioTransmission::new(b, c)).unwrap() == tdt(&TrioTransmission::new(c, b)).unwrap()
        })
    });
    o.check(symmetric, "TDT symmetric in b and c");

    let m = TwoLocusModel::new(
        Locus::numbered("trait", vec![0.3, 0.7]).unwrap(),
        Locus::numbered("marker", vec![0.4, 0.6]).unwrap(),
        PenetranceModel::biallelic(0.8, 0.5, 0.1).unwrap(),
    )
    .unwrap();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    // A chi-square(1) mean over 200 replicates has standard error 0.1, the
    // whole tolerance; 2,000 replicates bring it to 0.032.
    let reps = 2000;
    let sib = simulate_sib_pair_statistics(&m, 0.5, 10_000, reps, 41).unwrap();
    let t = simulate_tdt_statistics(&m, 0.5, 10_000, reps, 42).unwrap();
    o.check((mean(&sib) - 1.0).abs() <= 0.1, format!("null sib-pair mean {:.4} over {reps} x 10,000", mean(&sib)));
    o.check((mean(&t) - 1.0).abs() <= 0.1, format!("null TDT mean {:.4} over {reps} x 10,000", mean(&t)));

    let h = homozygosity_score(&HomozygosityInput { inbreeding: 1.0 / 16.0, allele_frequency: 0.05, genotype: (0, 0) })
        .unwrap()
        .value();
    o.check((h - 20f64.log10()).abs() < 1e-12 && (h - 1.301).abs() < 1e-3, format!("homozygosity score {h:.6}"));
    o
}

// 10 ------------------------------------------------------------------

fn reproducibility(suite_start: Instant) -> Outcome {
    let mut o = Outcome::new();
    let p = nuclear(2);
    let m = common_dominant();
    let same_elod = elod_monte_carlo(&p, &m, 0.1, 0.1, 2000, 5).unwrap() == elod_monte_carlo(&p, &m, 0.1, 0.1, 2000, 5).unwrap();
    let (pk, design) = phase_known_design(6);
    let fams = vec![(pk, design)];
    let cfg = SimConfig::new(0.1, 300, 6);
    let grid = ChiGrid::default();
    let pm = dominant_model();
    let same_power = estimate_power(&fams, &pm, 1.0, &cfg, &grid).unwrap() == estimate_power(&fams, &pm, 1.0, &cfg, &grid).unwrap();
    let het = phase_known_design(10);
    let same_het = het_replicate(&het, &pm, 5, 5, 7, 3) == het_replicate(&het, &pm, 5, 5, 7, 3);
    let b = sprt_boundaries(&SprtConfig::new(0.05, 0.1, 0.1).unwrap());
    let tally = |seed| {
        let t = run_streams(&p, &m, 0.5, 0.1, &b, 300, seed, &mut HashMap::new());
        (t.linkage, t.no_linkage, t.undecided)
    };
    let same_sprt = tally(8) == tally(8);
    let same_corpus = {
        let a: Vec<f64> = oracle_corpus().iter().take(30).map(|c| brute_force_loglik(&c.family.pedigree, &c.model, &c.family.data, c.chi).unwrap()).collect();
        let b: Vec<f64> = oracle_corpus().iter().take(30).map(|c| brute_force_loglik(&c.family.pedigree, &c.model, &c.family.data, c.chi).unwrap()).collect();
        a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits())
    };
    o.check(
        same_elod && same_power && same_het && same_sprt && same_corpus,
        "seeded elod, power, heterogeneity, SPRT and corpus runs repeat bit for bit",
    );
    o.check(run_check().unwrap().passed(), "library self-check passes");
    let status = Command::new(env!("CARGO_BIN_EXE_linkage")).args(["check", "--out", "/dev/null"]).status().unwrap();
    o.check(status.code() == Some(0), format!("`linkage check` exit code {:?}", status.code()));
    let secs = suite_start.elapsed().as_secs_f64();
    o.check(secs < 600.0, format!("whole suite {secs:.1} s"));
    o
}

fn main() {
    let start = Instant::now();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("Oracle equivalence", Box::new(oracle_equivalence)),
        ("Lod identities", Box::new(lod_identities)),
        ("Score expansion", Box::new(score_expansion)),
        ("SPRT/FDR arithmetic", Box::new(sprt_fdr_arithmetic)),
        ("Odds-of-error identity and SPRT simulation", Box::new(barnard_identity)),
        ("Elods", Box::new(elods)),
        ("Gene-counting EM", Box::new(em)),
        ("Heterogeneity test", Box::new(heterogeneity)),
        ("Family tests", Box::new(family_tests)),
        ("Reproducibility", Box::new(move || reproducibility(start))),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = f();
        let tag = if outcome.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {}. {name} ({:.1} s): {}", k + 1, t.elapsed().as_secs_f64(), outcome.details.join("; "));
        if !outcome.passed {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed in {:.1} s", criteria.len() - failed, criteria.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}

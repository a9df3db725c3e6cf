use linkage_core::genecount::{
    em_convergence_rate, em_gene_count, em_step, phenotype_loglik, PhenotypeSystem,
};

const ABO_COUNTS: [u64; 4] = [186, 38, 13, 284];

/// Exhaustive search over the 3-simplex at resolution 1e-4.
fn grid_max_3(system: &PhenotypeSystem, counts: &[u64]) -> [f64; 3] {
    let n = 10_000usize;
    let mut best = (f64::NEG_INFINITY, [0.0; 3]);
    for i in 1..n {
        for j in 1..n - i {
            let f = [i as f64 / n as f64, j as f64 / n as f64, (n - i - j) as f64 / n as f64];
            let ll = phenotype_loglik(system, counts, &f);
            if ll > best.0 {
                best = (ll, f);
            }
        }
    }
    best.1
}

fn grid_max_2(system: &PhenotypeSystem, counts: &[u64]) -> [f64; 2] {
    let n = 10_000usize;
    let mut best = (f64::NEG_INFINITY, [0.0; 2]);
    for i in 1..n {
        let f = [i as f64 / n as f64, (n - i) as f64 / n as f64];
        let ll = phenotype_loglik(system, counts, &f);
        if ll > best.0 {
            best = (ll, f);
        }
    }
    best.1
}

#[test]
fn abo_matches_grid_search() {
    let sys = PhenotypeSystem::abo();
    let t = em_gene_count(&sys, &ABO_COUNTS, None).unwrap();
    let grid = grid_max_3(&sys, &ABO_COUNTS);
    for (e, g) in t.last().frequencies.iter().zip(grid) {
        assert!((e - g).abs() <= 1e-4, "{:?} vs {grid:?}", t.last().frequencies);
    }
    for w in t.iterates.windows(2) {
        assert!(w[1].loglik >= w[0].loglik - 1e-12);
    }
    // The stop rule works on the log-likelihood, so the returned iterate
    // can still move by ~1e-7; the limit it approaches is a fixed point.
    let mut f = t.last().frequencies.clone();
    for _ in 0..100 {
        f = em_step(&sys, &ABO_COUNTS, &f);
    }
    let again = em_step(&sys, &ABO_COUNTS, &f);
    for (a, b) in f.iter().zip(&again) {
        assert!((a - b).abs() < 1e-8);
    }
    for (a, b) in f.iter().zip(&t.last().frequencies) {
        assert!((a - b).abs() < 1e-6);
    }
    let rate = em_convergence_rate(&t).unwrap();
    assert!(rate > 0.0 && rate < 1.0);
}

#[test]
fn dominant_two_allele_matches_grid_search() {
    let s = |x: &str| x.to_string();
    let sys = PhenotypeSystem::new(
        vec![s("A"), s("a")],
        vec![s("dominant"), s("recessive")],
        vec![((0, 0), 0), ((0, 1), 0), ((1, 1), 1)],
    )
    .unwrap();
    let counts = [70, 30];
    let t = em_gene_count(&sys, &counts, None).unwrap();
    let grid = grid_max_2(&sys, &counts);
    // Closed form: q = sqrt(30/100).
    assert!((t.last().frequencies[1] - 0.3f64.sqrt()).abs() < 1e-4);
    for (e, g) in t.last().frequencies.iter().zip(grid) {
        assert!((e - g).abs() <= 1e-4);
    }
    let rate = em_convergence_rate(&t).unwrap();
    assert!(rate > 0.0 && rate < 1.0);
}

#[test]
fn codominant_three_alleles() {
    let sys = PhenotypeSystem::codominant(vec!["1".into(), "2".into(), "3".into()]);
    // Genotype order 1/1, 1/2, 1/3, 2/2, 2/3, 3/3.
    let counts = [10, 20, 5, 30, 15, 20];
    let t = em_gene_count(&sys, &counts, Some(&[0.2, 0.5, 0.3])).unwrap();
    let n = 2.0 * 100.0;
    let want = [(20.0 + 20.0 + 5.0) / n, (20.0 + 60.0 + 15.0) / n, (5.0 + 15.0 + 40.0) / n];
    for (a, b) in t.iterates[1].frequencies.iter().zip(want) {
        assert!((a - b).abs() < 1e-15);
    }
    assert_eq!(em_convergence_rate(&t).unwrap(), 0.0);
}

#[test]
fn monotone_from_many_starts() {
    let sys = PhenotypeSystem::abo();
    for init in [[0.8, 0.1, 0.1], [0.1, 0.8, 0.1], [0.05, 0.05, 0.9], [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]] {
        let t = em_gene_count(&sys, &ABO_COUNTS, Some(&init)).unwrap();
        assert!(t.converged);
        for w in t.iterates.windows(2) {
            assert!(w[1].loglik >= w[0].loglik - 1e-12);
        }
        for it in &t.iterates {
            assert!((it.frequencies.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}


//! One function per command, each mapping a [`RunConfig`] onto library
//! calls and collecting a [`Report`].

use std::fs;
use std::path::Path;

use linkage_core::corpus::run_check;
use linkage_core::detect::{
    elod_enumerate_design, elod_monte_carlo_design, fdr, heterogeneity_test, sprt_boundaries, sprt_run,
    SprtConfig, SprtDecision,
};
use linkage_core::familytests::{
    count_transmissions, homozygosity_score, sib_pair_test, tdt, HomozygosityInput, TrioTransmission,
};
use linkage_core::genecount::{em_convergence_rate, em_gene_count};
use linkage_core::io::{parse_model, parse_pedigree_file, parse_phenotype_system, parse_sib_pairs, write_pedigree_file};
use linkage_core::likelihood::{family_lod_curves, mle_recombination, LodFunction};
use linkage_core::sim::{estimate_power, gene_drop_design, replicate_seed, ObservationDesign, SimConfig};
use linkage_core::{validate_pedigree, Family, TwoLocusModel};
use serde_json::{json, Value};

use crate::args::{Command, RunConfig};
use crate::output::{num, Report, Table};
use crate::CliError;

/// A finished command: its report and whether it succeeded.
pub struct Outcome {
    pub report: Report,
    pub success: bool,
}

impl From<Report> for Outcome {
    fn from(report: Report) -> Self {
        Outcome { report, success: true }
    }
}

fn analysis(e: impl std::fmt::Display) -> CliError {
    CliError::Analysis(e.to_string())
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::FileNotFound(path.to_path_buf()),
        _ => CliError::Analysis(format!("{}: {e}", path.display())),
    })
}

fn families(cfg: &RunConfig) -> Result<Vec<Family>, CliError> {
    let text = read(cfg.ped.as_deref().expect("validated"))?;
    Ok(parse_pedigree_file(&text).map_err(analysis)?.into_iter().map(|f| f.family).collect())
}

fn model(cfg: &RunConfig) -> Result<TwoLocusModel, CliError> {
    parse_model(&read(cfg.model.as_deref().expect("validated"))?).map_err(analysis)
}

/// `--chi`, else the model's default.
fn chi(cfg: &RunConfig, m: &TwoLocusModel, open_top: bool) -> Result<f64, CliError> {
    let chi = cfg
        .chi
        .or(m.default_chi)
        .ok_or_else(|| CliError::Usage("--chi is required (or set \"chi\" in the model)".into()))?;
    let ok = if open_top { (0.0..0.5).contains(&chi) } else { (0.0..=0.5).contains(&chi) };
    if !ok {
        return Err(CliError::Usage(format!("--chi {chi} out of range")));
    }
    Ok(chi)
}

fn ids(fams: &[Family]) -> Vec<Value> {
    fams.iter().map(|f| json!(f.pedigree.family_id())).collect()
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.command {
        Command::Lodscan => lodscan(cfg).map(Into::into),
        Command::Mle => mle(cfg).map(Into::into),
        Command::Sprt => sprt(cfg).map(Into::into),
        Command::Fdr => fdr_cmd(cfg).map(Into::into),
        Command::Elod => elod(cfg).map(Into::into),
        Command::Hettest => hettest(cfg).map(Into::into),
        Command::Em => em(cfg).map(Into::into),
        Command::Tdt => tdt_cmd(cfg).map(Into::into),
        Command::Sibpair => sibpair(cfg).map(Into::into),
        Command::Homozygosity => homozygosity(cfg).map(Into::into),
        Command::Simulate => simulate(cfg).map(Into::into),
        Command::Power => power(cfg).map(Into::into),
        Command::Check => check(),
    }
}

fn lodscan(cfg: &RunConfig) -> Result<Report, CliError> {
    let fams = families(cfg)?;
    let m = model(cfg)?;
    let f = LodFunction::new(&fams, &m).map_err(analysis)?;
    let multi = fams.len() > 1;
    let mut columns = vec!["chi".to_string(), "lod".to_string()];
    if multi {
        columns.extend(fams.iter().map(|f| format!("lod_{}", f.pedigree.family_id())));
    }
    let mut rows = Vec::new();
    for &chi in cfg.grid.grid().points() {
        let per = f.family_lods(chi).map_err(analysis)?;
        let mut row = vec![num(chi), num(f.total(chi).map_err(analysis)?)];
        if multi {
            row.extend(per.iter().map(|&l| num(l)));
        }
        rows.push(row);
    }
    let mut r = Report::new();
    r.set("families", Value::Array(ids(&fams)));
    r.table = Some(Table { columns, rows });
    Ok(r)
}

fn mle(cfg: &RunConfig) -> Result<Report, CliError> {
    let fams = families(cfg)?;
    let m = model(cfg)?;
    let fit = mle_recombination(&fams, &m).map_err(analysis)?;
    let per = LodFunction::new(&fams, &m).and_then(|f| f.family_lods(fit.chi_hat)).map_err(analysis)?;
    let mut r = Report::new();
    r.set("chi_hat", num(fit.chi_hat));
    r.set("max_lod", num(fit.max_lod));
    r.set("flat", json!(fit.flat));
    r.table = Some(Table {
        columns: vec!["family".into(), "lod_at_chi_hat".into()],
        rows: fams.iter().zip(per).map(|(f, l)| vec![json!(f.pedigree.family_id()), num(l)]).collect(),
    });
    Ok(r)
}

fn sprt(cfg: &RunConfig) -> Result<Report, CliError> {
    let fams = families(cfg)?;
    let m = model(cfg)?;
    let chi_alt = chi(cfg, &m, true)?;
    let sc = SprtConfig::new(cfg.alpha.expect("validated"), cfg.beta.expect("validated"), chi_alt)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let b = sprt_boundaries(&sc);
    let lods = LodFunction::new(&fams, &m).and_then(|f| f.family_lods(chi_alt)).map_err(analysis)?;
    let decision = sprt_run(lods.iter().copied(), &b);
    let mut r = Report::new();
    r.set("chi_alt", num(chi_alt));
    r.set("log10_a", num(b.log10_a));
    r.set("log10_b", num(b.log10_b));
    let (label, steps) = match decision {
        SprtDecision::DeclareLinkage { step, .. } => ("linkage", step),
        SprtDecision::DeclareNoLinkage { step, .. } => ("no_linkage", step),
        SprtDecision::Undecided { steps, .. } => ("undecided", steps),
    };
    r.set("decision", json!(label));
    r.set("steps", json!(steps));
    r.set("total", num(decision.total()));
    let mut running = 0.0;
    let rows = fams
        .iter()
        .zip(&lods)
        .map(|(f, &l)| {
            running += l;
            vec![json!(f.pedigree.family_id()), num(l), num(running)]
        })
        .collect();
    r.table = Some(Table { columns: vec!["family".into(), "lod".into(), "cumulative".into()], rows });
    Ok(r)
}

fn fdr_cmd(cfg: &RunConfig) -> Result<Report, CliError> {
    let v = fdr(cfg.alpha.expect("validated"), cfg.pi.expect("validated"), cfg.power.expect("validated"))
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut r = Report::new();
    r.set("fdr", num(v));
    Ok(r)
}

fn elod(cfg: &RunConfig) -> Result<Report, CliError> {
    let fams = families(cfg)?;
    let m = model(cfg)?;
    let chi_true = chi(cfg, &m, false)?;
    let chi_eval = cfg.chi_eval.unwrap_or(chi_true);
    if !(0.0..=0.5).contains(&chi_eval) {
        return Err(CliError::Usage(format!("--chi-eval {chi_eval} out of range")));
    }
    let mut rows = Vec::new();
    let (mut total, mut var) = (0.0, 0.0);
    for (k, f) in fams.iter().enumerate() {
        let design = ObservationDesign::from_data(&f.data);
        let e = match cfg.replicates {
            None => elod_enumerate_design(&f.pedigree, &m, &design, chi_true, chi_eval),
            Some(n) => elod_monte_carlo_design(
                &f.pedigree,
                &m,
                &design,
                chi_true,
                chi_eval,
                n,
                replicate_seed(cfg.seed, k as u64),
            ),
        }
        .map_err(analysis)?;
        total += e.value;
        let se = e.standard_error.unwrap_or(0.0);
        var += se * se;
        rows.push(vec![json!(f.pedigree.family_id()), num(e.value), e.standard_error.map_or(Value::Null, num)]);
    }
    let mut r = Report::new();
    r.set("chi_true", num(chi_true));
    r.set("chi_eval", num(chi_eval));
    r.set("method", json!(if cfg.replicates.is_some() { "monte_carlo" } else { "enumeration" }));
    r.set("elod", num(total));
    r.set("standard_error", if cfg.replicates.is_some() { num(var.sqrt()) } else { Value::Null });
    r.table = Some(Table { columns: vec!["family".into(), "elod".into(), "standard_error".into()], rows });
    Ok(r)
}

fn hettest(cfg: &RunConfig) -> Result<Report, CliError> {
    let fams = families(cfg)?;
    let m = model(cfg)?;
    let curves = family_lod_curves(&fams, &m, &cfg.grid.grid()).map_err(analysis)?;
    let h = heterogeneity_test(&curves).map_err(analysis)?;
    let mut r = Report::new();
    r.set("families", json!(fams.len()));
    r.set("alpha_hat", num(h.alpha_hat));
    r.set("chi_hat", num(h.chi_hat));
    r.set("lr_statistic", num(h.lr_statistic));
    r.set("homogeneous_chi_hat", num(h.homogeneous_chi_hat));
    Ok(r)
}

fn em(cfg: &RunConfig) -> Result<Report, CliError> {
    let input = parse_phenotype_system(&read(cfg.input.as_deref().expect("validated"))?).map_err(analysis)?;
    let t = em_gene_count(&input.system, &input.counts, input.init.as_deref()).map_err(analysis)?;
    let alleles = input.system.alleles();
    let mut r = Report::new();
    r.set(
        "frequencies",
        Value::Object(alleles.iter().cloned().zip(t.last().frequencies.iter().map(|&f| num(f))).collect()),
    );
    r.set("loglik", num(t.last().loglik));
    r.set("iterations", json!(t.steps()));
    r.set("converged", json!(t.converged));
    r.set("rate", em_convergence_rate(&t).map_or(Value::Null, num));
    let mut columns = vec!["iteration".to_string(), "loglik".to_string()];
    columns.extend(alleles.iter().map(|a| format!("freq_{a}")));
    let rows = t
        .iterates
        .iter()
        .enumerate()
        .map(|(k, it)| {
            let mut row = vec![json!(k), num(it.loglik)];
            row.extend(it.frequencies.iter().map(|&f| num(f)));
            row
        })
        .collect();
    r.table = Some(Table { columns, rows });
    Ok(r)
}

fn tdt_cmd(cfg: &RunConfig) -> Result<Report, CliError> {
    let fams = families(cfg)?;
    let target = cfg.allele - 1;
    let mut total = TrioTransmission::default();
    let mut ambiguous = 0;
    for f in &fams {
        let c = count_transmissions(&f.pedigree, &f.data, target, true).map_err(analysis)?;
        total.add(c.counts);
        ambiguous += c.ambiguous;
    }
    let stat = tdt(&total).map_err(analysis)?;
    let mut r = Report::new();
    r.set("allele", json!(cfg.allele));
    r.set("transmitted", json!(total.transmitted));
    r.set("untransmitted", json!(total.untransmitted));
    r.set("ambiguous_children", json!(ambiguous));
    r.set("statistic", num(stat));
    Ok(r)
}

fn sibpair(cfg: &RunConfig) -> Result<Report, CliError> {
    let pairs = parse_sib_pairs(&read(cfg.input.as_deref().expect("validated"))?).map_err(analysis)?;
    let s = sib_pair_test(&pairs).map_err(analysis)?;
    let mut r = Report::new();
    r.set("pairs", json!(pairs.len()));
    r.set("statistic", num(s.statistic));
    r.set("degenerate", json!(s.degenerate));
    r.set(
        "table",
        json!({
            "a_concordant_b_concordant": s.table[0][0],
            "a_concordant_b_discordant": s.table[0][1],
            "a_discordant_b_concordant": s.table[1][0],
            "a_discordant_b_discordant": s.table[1][1],
        }),
    );
    Ok(r)
}

fn homozygosity(cfg: &RunConfig) -> Result<Report, CliError> {
    let (a, b) = cfg.genotype.expect("validated");
    let h = HomozygosityInput {
        inbreeding: cfg.inbreeding,
        allele_frequency: cfg.freq.expect("validated"),
        genotype: (a - 1, b - 1),
    };
    let s = homozygosity_score(&h).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut r = Report::new();
    r.set("score", num(s.value()));
    Ok(r)
}

fn simulate(cfg: &RunConfig) -> Result<Report, CliError> {
    let fams = families(cfg)?;
    let m = model(cfg)?;
    let chi_true = chi(cfg, &m, false)?;
    let reps = cfg.replicates.unwrap_or(1);
    let mut out = Vec::with_capacity(fams.len() * reps);
    for rep in 0..reps {
        for (k, f) in fams.iter().enumerate() {
            let sc = SimConfig {
                chi_true,
                replicates: reps,
                seed: replicate_seed(cfg.seed, k as u64),
                missingness_rate: cfg.missing,
            };
            let design = ObservationDesign::from_data(&f.data);
            let sim = gene_drop_design(&f.pedigree, &m, &design, &sc, rep as u64).map_err(analysis)?;
            let id = format!("{}_{}", f.pedigree.family_id(), rep + 1);
            let p = validate_pedigree(id, f.pedigree.individuals().to_vec()).map_err(analysis)?;
            out.push(Family::new(p, sim.data));
        }
    }
    let text = write_pedigree_file(&out);
    let mut r = Report::new();
    r.set("chi_true", num(chi_true));
    r.set("replicates", json!(reps));
    r.set("families", Value::Array(ids(&out)));
    r.set("ped", json!(text));
    r.raw_tsv = Some(text);
    if cfg.format == crate::args::Format::Tsv {
        r.result.remove("ped");
        r.result.remove("families");
    }
    Ok(r)
}

fn power(cfg: &RunConfig) -> Result<Report, CliError> {
    let fams = families(cfg)?;
    let m = model(cfg)?;
    let chi_true = chi(cfg, &m, false)?;
    let designs: Vec<_> =
        fams.iter().map(|f| (f.pedigree.clone(), ObservationDesign::from_data(&f.data))).collect();
    let sc = SimConfig {
        chi_true,
        replicates: cfg.replicates.expect("validated"),
        seed: cfg.seed,
        missingness_rate: cfg.missing,
    };
    let p = estimate_power(&designs, &m, cfg.threshold, &sc, &cfg.grid.grid()).map_err(analysis)?;
    let mut r = Report::new();
    r.set("chi_true", num(chi_true));
    r.set("threshold", num(cfg.threshold));
    r.set("power", num(p.power));
    r.set("standard_error", num(p.standard_error));
    r.set("replicates", json!(p.replicates));
    Ok(r)
}

fn check() -> Result<Outcome, CliError> {
    let report = run_check().map_err(analysis)?;
    let mut r = Report::new();
    r.set("passed", json!(report.passed()));
    r.set("cases", json!(report.outcomes.len()));
    r.set("structures", json!(report.structures));
    r.set("failures", json!(report.failures().count()));
    r.table = Some(Table {
        columns: vec!["case".into(), "peeled".into(), "enumerated".into(), "passed".into()],
        rows: report
            .outcomes
            .iter()
            .map(|o| vec![json!(o.name), num(o.peeled), num(o.enumerated), json!(o.passed)])
            .collect(),
    });
    Ok(Outcome { report: r, success: report.passed() })
}

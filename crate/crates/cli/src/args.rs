//! Command-line parsing into a validated [`RunConfig`].

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use linkage_core::likelihood::ChiGrid;
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Lodscan,
    Mle,
    Sprt,
    Fdr,
    Elod,
    Hettest,
    Em,
    Tdt,
    Sibpair,
    Homozygosity,
    Simulate,
    Power,
    Check,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Tsv,
}

/// `lo:step:hi` over recombination fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub lo: f64,
    pub step: f64,
    pub hi: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { lo: 0.0, step: 0.01, hi: 0.5 }
    }
}

impl GridSpec {
    pub fn grid(&self) -> ChiGrid {
        ChiGrid::new(self.lo, self.step, self.hi).expect("validated when parsed")
    }
}

fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, step, hi] = parts[..] else {
        return Err(format!("grid {s:?} is not lo:step:hi"));
    };
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("grid {s:?}: {t:?} is not a number"));
    let g = GridSpec { lo: num(lo)?, step: num(step)?, hi: num(hi)? };
    ChiGrid::new(g.lo, g.step, g.hi)
        .map_err(|_| format!("grid {s:?} must be increasing within [0, 0.5] and include 0.5"))?;
    Ok(g)
}

fn parse_genotype(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once('/').ok_or_else(|| format!("genotype {s:?} is not a/b"))?;
    let allele = |t: &str| match t.trim().parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(format!("genotype {s:?}: alleles are numbered from 1")),
    };
    Ok((allele(a)?, allele(b)?))
}

#[derive(Debug, Parser)]
#[command(name = "linkage", about = "Linkage analysis on pedigree files", version)]
struct Args {
    command: Command,
    /// Pedigree (and data) file.
    #[arg(long)]
    ped: Option<PathBuf>,
    /// Model JSON.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Phenotype-system JSON (em) or sib-pair table (sibpair).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_parser = parse_grid)]
    grid: Option<GridSpec>,
    /// Recombination fraction: the alternative (sprt) or the truth (elod,
    /// simulate, power).
    #[arg(long)]
    chi: Option<f64>,
    /// Recombination fraction the elod is evaluated at; defaults to --chi.
    #[arg(long = "chi-eval")]
    chi_eval: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    pi: Option<f64>,
    #[arg(long)]
    power: Option<f64>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Target marker allele for tdt, numbered from 1.
    #[arg(long)]
    allele: Option<usize>,
    /// Allele frequency for homozygosity.
    #[arg(long)]
    freq: Option<f64>,
    /// Genotype a/b for homozygosity, alleles numbered from 1.
    #[arg(long, value_parser = parse_genotype)]
    genotype: Option<(usize, usize)>,
    #[arg(long)]
    inbreeding: Option<f64>,
    /// Per-observation missingness rate for simulated data.
    #[arg(long)]
    missing: Option<f64>,
}

/// Everything needed to rerun a command exactly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ped: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
    pub grid: GridSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi_eval: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power: Option<f64>,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    pub allele: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub freq: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub genotype: Option<(usize, usize)>,
    pub inbreeding: f64,
    pub missing: f64,
}

fn require<T>(value: &Option<T>, flag: &str, command: Command) -> Result<(), CliError> {
    if value.is_none() {
        return Err(CliError::Usage(format!("{} requires --{flag}", name(command))));
    }
    Ok(())
}

fn name(c: Command) -> String {
    c.to_possible_value().expect("no skipped variants").get_name().to_string()
}

fn existing(path: &Option<PathBuf>) -> Result<(), CliError> {
    match path {
        Some(p) if !Path::new(p).is_file() => Err(CliError::FileNotFound(p.clone())),
        _ => Ok(()),
    }
}

/// Parses `argv` (without the program name) and checks that each command
/// has what it needs and that its input files exist.
pub fn parse_args<I, S>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args = Args::try_parse_from(std::iter::once("linkage".into()).chain(argv.into_iter().map(Into::into)))
        .map_err(|e| match e.kind() {
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                CliError::Help(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        })?;
    let cfg = RunConfig {
        command: args.command,
        ped: args.ped,
        model: args.model,
        input: args.input,
        out: args.out,
        format: args.format,
        seed: args.seed,
        grid: args.grid.unwrap_or_default(),
        chi: args.chi,
        chi_eval: args.chi_eval,
        alpha: args.alpha,
        beta: args.beta,
        pi: args.pi,
        power: args.power,
        threshold: args.threshold.unwrap_or(3.0),
        replicates: args.replicates,
        allele: args.allele.unwrap_or(1),
        freq: args.freq,
        genotype: args.genotype,
        inbreeding: args.inbreeding.unwrap_or(0.0),
        missing: args.missing.unwrap_or(0.0),
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    use Command::*;
    let c = cfg.command;
    match c {
        Lodscan | Mle | Hettest | Sprt | Elod | Simulate | Power => {
            require(&cfg.ped, "ped", c)?;
            require(&cfg.model, "model", c)?;
        }
        Tdt => require(&cfg.ped, "ped", c)?,
        Em | Sibpair => require(&cfg.input, "input", c)?,
        Fdr => {
            require(&cfg.alpha, "alpha", c)?;
            require(&cfg.pi, "pi", c)?;
            require(&cfg.power, "power", c)?;
        }
        Homozygosity => {
            require(&cfg.freq, "freq", c)?;
            require(&cfg.genotype, "genotype", c)?;
        }
        Check => {}
    }
    match c {
        Sprt => {
            require(&cfg.alpha, "alpha", c)?;
            require(&cfg.beta, "beta", c)?;
        }
        Power => require(&cfg.replicates, "replicates", c)?,
        _ => {}
    }
    if cfg.allele == 0 {
        return Err(CliError::Usage("--allele is numbered from 1".into()));
    }
    if !(0.0..1.0).contains(&cfg.missing) {
        return Err(CliError::Usage(format!("--missing {} outside [0, 1)", cfg.missing)));
    }
    if cfg.replicates == Some(0) {
        return Err(CliError::Usage("--replicates must be at least 1".into()));
    }
    existing(&cfg.ped)?;
    existing(&cfg.model)?;
    existing(&cfg.input)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lodscan_defaults() {
        let dir = std::env::temp_dir();
        let ped = dir.join("linkage-args-test.ped");
        std::fs::write(&ped, "f a 0 0 0\n").unwrap();
        let p = ped.to_str().unwrap();
        let cfg = parse_args(["lodscan", "--ped", p, "--model", p]).unwrap();
        assert_eq!(cfg.command, Command::Lodscan);
        assert_eq!(cfg.grid, GridSpec { lo: 0.0, step: 0.01, hi: 0.5 });
        assert_eq!(cfg.format, Format::Json);
    }

    #[test]
    fn missing_required_flag_is_usage_error() {
        assert!(matches!(parse_args(["lodscan"]), Err(CliError::Usage(_))));
        assert!(matches!(parse_args(["sprt", "--alpha", "0.1"]), Err(CliError::Usage(_))));
    }

    #[test]
    fn unknown_flag_rejected() {
        assert!(matches!(parse_args(["fdr", "--bogus", "1"]), Err(CliError::Usage(_))));
        assert!(matches!(parse_args(["nonsense"]), Err(CliError::Usage(_))));
    }

    #[test]
    fn fdr_needs_no_files() {
        let cfg = parse_args(["fdr", "--alpha", "0.001", "--pi", "0.05", "--power", "1.0"]).unwrap();
        assert_eq!((cfg.alpha, cfg.pi, cfg.power), (Some(0.001), Some(0.05), Some(1.0)));
    }

    #[test]
    fn missing_file() {
        let r = parse_args(["tdt", "--ped", "/nonexistent/file.ped"]);
        assert!(matches!(r, Err(CliError::FileNotFound(_))));
    }

    #[test]
    fn grids() {
        assert!(parse_grid("0:0.05:0.5").is_ok());
        assert!(parse_grid("0:0.05:0.4").is_err());
        assert!(parse_grid("0:0.05").is_err());
        assert!(parse_grid("0:-1:0.5").is_err());
    }

    #[test]
    fn genotypes() {
        assert_eq!(parse_genotype("1/2"), Ok((1, 2)));
        assert!(parse_genotype("0/1").is_err());
        assert!(parse_genotype("12").is_err());
    }
}

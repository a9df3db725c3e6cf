//! Base-10 lod scores, lod curves and the maximum-likelihood recombination
//! fraction.

use std::f64::consts::LN_10;

use crate::model::TwoLocusModel;
use crate::numeric::golden_section_max;

use super::{Family, LikelihoodEngine, LikelihoodError};

/// Points in the coarse scan that brackets the global maximum.
pub const MLE_GRID_POINTS: usize = 512;
/// Final bracket width of the golden-section refinement.
pub const MLE_TOLERANCE: f64 = 1e-6;
/// Maximum lods below this are treated as flat.
const FLAT_LOD: f64 = 1e-12;

/// Per-family lods `log10 L(chi) - log10 L(1/2)`, with the null
/// log-likelihoods computed once.
pub struct LodFunction<'a> {
    engines: Vec<(LikelihoodEngine<'a>, &'a Family, f64)>,
}

impl<'a> LodFunction<'a> {
    pub fn new(families: &'a [Family], m: &'a TwoLocusModel) -> Result<Self, LikelihoodError> {
        let engines = families
            .iter()
            .map(|fam| {
                let engine = LikelihoodEngine::new(&fam.pedigree, m);
                let null = engine.loglik(&fam.data, 0.5)?;
                if null == f64::NEG_INFINITY {
                    return Err(LikelihoodError::InconsistentData(
                        fam.pedigree.family_id().to_string(),
                    ));
                }
                Ok((engine, fam, null))
            })
            .collect::<Result<_, _>>()?;
        Ok(LodFunction { engines })
    }

    pub fn family_lods(&self, chi: f64) -> Result<Vec<f64>, LikelihoodError> {
        self.engines
            .iter()
            .map(|(engine, fam, null)| Ok((engine.loglik(&fam.data, chi)? - null) / LN_10))
            .collect()
    }

    pub fn total(&self, chi: f64) -> Result<f64, LikelihoodError> {
        Ok(self.family_lods(chi)?.iter().sum())
    }
}

/// Sum over families of the base-10 lod at `chi`.
pub fn lod(families: &[Family], m: &TwoLocusModel, chi: f64) -> Result<f64, LikelihoodError> {
    LodFunction::new(families, m)?.total(chi)
}

pub fn family_lods(
    families: &[Family],
    m: &TwoLocusModel,
    chi: f64,
) -> Result<Vec<f64>, LikelihoodError> {
    LodFunction::new(families, m)?.family_lods(chi)
}

/// Recombination fractions, strictly increasing in `[0, 1/2]` and
/// containing `1/2` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiGrid {
    points: Vec<f64>,
}

impl ChiGrid {
    /// `lo, lo + step, ...` up to `hi`; a point within `1e-9` of `1/2` is
    /// snapped to `1/2`.
    pub fn new(lo: f64, step: f64, hi: f64) -> Result<Self, LikelihoodError> {
        if !(step > 0.0) || !(lo <= hi) {
            return Err(LikelihoodError::InvalidGrid);
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        let points = (0..=n)
            .map(|k| {
                let x = lo + k as f64 * step;
                if (x - 0.5).abs() < 1e-9 {
                    0.5
                } else {
                    // Trim representation noise such as 0.30000000000000004.
                    (x * 1e12).round() / 1e12
                }
            })
            .collect();
        ChiGrid::from_points(points)
    }

    pub fn from_points(points: Vec<f64>) -> Result<Self, LikelihoodError> {
        let increasing = points.windows(2).all(|w| w[0] < w[1]);
        let in_range = points.iter().all(|x| (0.0..=0.5).contains(x));
        if !increasing || !in_range || !points.contains(&0.5) {
            return Err(LikelihoodError::InvalidGrid);
        }
        Ok(ChiGrid { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

impl Default for ChiGrid {
    /// `0:0.01:0.5`.
    fn default() -> Self {
        ChiGrid::new(0.0, 0.01, 0.5).expect("default grid")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LodCurve {
    points: Vec<(f64, f64)>,
}

impl LodCurve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, LikelihoodError> {
        let chis: Vec<f64> = points.iter().map(|p| p.0).collect();
        ChiGrid::from_points(chis)?;
        if points.iter().any(|&(c, l)| c == 0.5 && l != 0.0) {
            return Err(LikelihoodError::InvalidGrid);
        }
        Ok(LodCurve { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn chis(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.0)
    }

    pub fn lods(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.1)
    }

    /// The grid point with the largest lod (the smaller chi on ties).
    pub fn max(&self) -> (f64, f64) {
        self.points
            .iter()
            .copied()
            .fold((0.5, f64::NEG_INFINITY), |best, p| if p.1 > best.1 { p } else { best })
    }
}

/// Total lod over all families evaluated on `grid`.
pub fn lod_curve(
    families: &[Family],
    m: &TwoLocusModel,
    grid: &ChiGrid,
) -> Result<LodCurve, LikelihoodError> {
    let f = LodFunction::new(families, m)?;
    let points = grid
        .points()
        .iter()
        .map(|&chi| Ok((chi, f.total(chi)?)))
        .collect::<Result<_, LikelihoodError>>()?;
    LodCurve::new(points)
}

/// One lod curve per family on a shared grid.
pub fn family_lod_curves(
    families: &[Family],
    m: &TwoLocusModel,
    grid: &ChiGrid,
) -> Result<Vec<LodCurve>, LikelihoodError> {
    let f = LodFunction::new(families, m)?;
    let mut columns = vec![Vec::with_capacity(grid.points().len()); families.len()];
    for &chi in grid.points() {
        for (col, l) in columns.iter_mut().zip(f.family_lods(chi)?) {
            col.push((chi, l));
        }
    }
    columns.into_iter().map(LodCurve::new).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleResult {
    pub chi_hat: f64,
    pub max_lod: f64,
    /// Set when no recombination fraction beats the null; `chi_hat` is
    /// then reported as 1/2.
    pub flat: bool,
}

/// Maximum-likelihood recombination fraction on `[0, 1/2]`: a coarse grid
/// scan brackets the maximum, then golden-section search refines it.
/// The boundary `chi = 0` is a legal answer.
pub fn mle_recombination(families: &[Family], m: &TwoLocusModel) -> Result<MleResult, LikelihoodError> {
    if families.is_empty() {
        return Err(LikelihoodError::NoFamilies);
    }
    let f = LodFunction::new(families, m)?;
    let last = MLE_GRID_POINTS - 1;
    let grid: Vec<f64> = (0..MLE_GRID_POINTS)
        .map(|k| if k == last { 0.5 } else { 0.5 * k as f64 / last as f64 })
        .collect();
    let mut scan = Vec::with_capacity(grid.len());
    for &chi in &grid {
        scan.push(f.total(chi)?);
    }
    let mut k_best = 0;
    for (k, &v) in scan.iter().enumerate() {
        if v > scan[k_best] {
            k_best = k;
        }
    }
    let (lo, hi) = (grid[k_best.saturating_sub(1)], grid[(k_best + 1).min(last)]);
    let mut failure = None;
    let (mut chi_hat, mut max_lod) = golden_section_max(
        |chi| match f.total(chi) {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                f64::NEG_INFINITY
            }
        },
        lo,
        hi,
        MLE_TOLERANCE,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    if scan[k_best] > max_lod {
        chi_hat = grid[k_best];
        max_lod = scan[k_best];
    }
    if max_lod < FLAT_LOD {
        return Ok(MleResult { chi_hat: 0.5, max_lod: 0.0, flat: true });
    }
    Ok(MleResult { chi_hat, max_lod, flat: false })
}

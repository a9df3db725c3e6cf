//! Admixture test for locus heterogeneity: a fraction `alpha` of families
//! is linked at `chi`, the rest unlinked.

use std::f64::consts::LN_10;

use crate::likelihood::LodCurve;
use crate::numeric::{golden_section_max, log_add};

use super::DetectError;

/// Final bracket width of the per-`chi` search over `alpha`.
pub const ALPHA_TOLERANCE: f64 = 1e-8;
/// A mixture must beat the homogeneous fit by more than this to be
/// reported with `alpha < 1`.
const TIE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HetTestResult {
    /// Estimated proportion of linked families.
    pub alpha_hat: f64,
    pub chi_hat: f64,
    /// `2 (max mixture ln L - max homogeneous ln L)`.
    pub lr_statistic: f64,
    /// Grid maximizer with every family linked.
    pub homogeneous_chi_hat: f64,
}

/// Natural-log mixture likelihood ratio against no linkage.
fn mixture(lods: &[f64], alpha: f64) -> f64 {
    if alpha == 1.0 {
        return lods.iter().map(|l| l * LN_10).sum();
    }
    let (la, lb) = (alpha.ln(), (1.0 - alpha).ln());
    lods.iter().map(|l| log_add(la + l * LN_10, lb)).sum()
}

/// Maximizes the admixture likelihood over `alpha` in `[0, 1]` (golden
/// section) and `chi` over the shared grid of the curves.
pub fn heterogeneity_test(curves: &[LodCurve]) -> Result<HetTestResult, DetectError> {
    if curves.len() < 2 {
        return Err(DetectError::TooFewFamilies { needed: 2, got: curves.len() });
    }
    let grid: Vec<f64> = curves[0].chis().collect();
    for c in &curves[1..] {
        if !c.chis().eq(grid.iter().copied()) {
            return Err(DetectError::GridMismatch);
        }
    }
    let null = grid.iter().position(|&x| x == 0.5).ok_or(DetectError::GridMissingNull)?;

    let n = grid.len();
    let columns: Vec<Vec<f64>> = (0..n).map(|k| curves.iter().map(|c| c.points()[k].1).collect()).collect();

    // Scan from the null downward; only strict improvements move the
    // estimate, so ties resolve toward chi = 1/2 and alpha = 1.
    let mut homogeneous = (grid[null], mixture(&columns[null], 1.0));
    let mut best = (1.0, grid[null], homogeneous.1);
    for k in (0..n).rev() {
        let lods = &columns[k];
        let at_one = mixture(lods, 1.0);
        if at_one > homogeneous.1 {
            homogeneous = (grid[k], at_one);
        }
        let (a, v) = golden_section_max(|a| mixture(lods, a), 0.0, 1.0, ALPHA_TOLERANCE);
        let (a, v) = if v > at_one + TIE { (a, v) } else { (1.0, at_one) };
        if v > best.2 {
            best = (a, grid[k], v);
        }
    }
    Ok(HetTestResult {
        alpha_hat: best.0,
        chi_hat: best.1,
        lr_statistic: 2.0 * (best.2 - homogeneous.1),
        homogeneous_chi_hat: homogeneous.0,
    })
}

//! Closed-form second moment validated against exact permutation
//! enumeration, emitted as a machine-readable report.
//!
//! The closed-form cross-product expression does not match the exact
//! randomization distribution on every weight structure. This module runs
//! both routes over a grid of (n, D, weights) cells and reports the
//! deviation per cell, so downstream consumers can decide which value to
//! trust; permutation-based variances remain authoritative in reports.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::CompositionSample;
use crate::inference::PermutationEngine;
use crate::numeric::kahan_sum;
use crate::statistic::second_moment_randomization;
use crate::weights::SpatialWeights;

/// One comparison: closed-form E(Iₐ²) versus the mean square of the full
/// enumeration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentValidationCell {
    pub n: usize,
    pub d: usize,
    pub weights: String,
    pub sample_index: usize,
    pub analytic_e_r2: f64,
    pub enumerated_e_r2: f64,
    pub abs_deviation: f64,
    pub rel_deviation: f64,
    pub within_tolerance: bool,
    /// Variance implied by the closed form, e_r2 − 1/(n−1)²; may be negative
    /// where the closed form disagrees with enumeration.
    pub analytic_var: f64,
    pub enumerated_var: f64,
}

/// Validation report over a grid of cells.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentValidationReport {
    pub tolerance: f64,
    pub cells: Vec<MomentValidationCell>,
    pub max_rel_deviation: f64,
    pub all_within_tolerance: bool,
    /// Cells where the closed-form variance is negative.
    pub negative_variance_cells: usize,
}

/// Mean square of the full n! enumeration of the statistic — the exact
/// second randomization moment.
pub fn enumerated_second_moment(
    sample: &CompositionSample,
    w: &SpatialWeights,
    cap: usize,
) -> Result<f64> {
    let dist = PermutationEngine::for_reyes(sample, w)?.exact(cap)?;
    Ok(kahan_sum(dist.values.iter().map(|v| v * v)) / dist.values.len() as f64)
}

/// Compare the closed-form and enumerated second moments for one
/// (sample, weights) pair.
pub fn validate_cell(
    sample: &CompositionSample,
    w: &SpatialWeights,
    weights_label: &str,
    sample_index: usize,
    cap: usize,
    tolerance: f64,
) -> Result<MomentValidationCell> {
    let analytic = second_moment_randomization(sample, w)?;
    let enumerated = enumerated_second_moment(sample, w, cap)?;
    let abs_deviation = (analytic.e_r2 - enumerated).abs();
    let rel_deviation = abs_deviation / enumerated.abs().max(f64::MIN_POSITIVE);
    let n = sample.n() as f64;
    let mean_sq = 1.0 / ((n - 1.0) * (n - 1.0));
    Ok(MomentValidationCell {
        n: sample.n(),
        d: sample.dim(),
        weights: weights_label.to_string(),
        sample_index,
        analytic_e_r2: analytic.e_r2,
        enumerated_e_r2: enumerated,
        abs_deviation,
        rel_deviation,
        within_tolerance: rel_deviation <= tolerance,
        analytic_var: analytic.e_r2 - mean_sq,
        enumerated_var: enumerated - mean_sq,
    })
}

/// Assemble the full report from individual cells.
pub fn build_report(cells: Vec<MomentValidationCell>, tolerance: f64) -> MomentValidationReport {
    let max_rel_deviation = cells
        .iter()
        .map(|c| c.rel_deviation)
        .fold(0.0_f64, f64::max);
    let all_within_tolerance = cells.iter().all(|c| c.within_tolerance);
    let negative_variance_cells = cells.iter().filter(|c| c.analytic_var < 0.0).count();
    MomentValidationReport {
        tolerance,
        cells,
        max_rel_deviation,
        all_within_tolerance,
        negative_variance_cells,
    }
}

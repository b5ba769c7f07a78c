//! Reyes's I for compositional samples, its Cauchy–Schwarz upper bound,
//! closed-form randomization moments, and the real-valued Moran baseline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CompositionSample;
use crate::numeric::KahanSum;
use crate::weights::{weight_summaries, SpatialWeights};

/// Centered ilr coordinates plus the quantities every statistic needs.
pub(crate) struct CenteredCoords {
    /// Row-major n×k, k = D−1.
    pub coords: Vec<f64>,
    pub n: usize,
    pub k: usize,
    /// Σᵢ ‖uᵢ‖².
    pub sq_norm_total: f64,
}

pub(crate) fn centered_coords(
    sample: &CompositionSample,
    w: &SpatialWeights,
) -> Result<CenteredCoords> {
    if !w.is_standardized() {
        return Err(Error::NotStandardized);
    }
    if w.n() != sample.n() {
        return Err(Error::DimensionMismatch {
            expected: w.n(),
            found: sample.n(),
        });
    }
    if sample.n() < 2 {
        return Err(Error::TooFewUnits {
            n: sample.n(),
            min: 2,
        });
    }
    let coords = sample.centered_ilr()?;
    let k = sample.dim() - 1;
    let mut total = KahanSum::new();
    for u in coords.chunks_exact(k) {
        total.add(u.iter().map(|v| v * v).sum::<f64>());
    }
    Ok(CenteredCoords {
        coords,
        n: sample.n(),
        k,
        sq_norm_total: total.value(),
    })
}

impl CenteredCoords {
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.coords[i * self.k..(i + 1) * self.k]
    }

    /// Numerator Σᵢ Σⱼ wᵢⱼ ⟨uᵢ, uⱼ⟩ in stored entry order.
    pub fn lag_inner_total(&self, w: &SpatialWeights) -> f64 {
        let mut acc = KahanSum::new();
        for (i, j, v) in w.entries() {
            let dot: f64 = self
                .row(i)
                .iter()
                .zip(self.row(j))
                .map(|(a, b)| a * b)
                .sum();
            acc.add(v * dot);
        }
        acc.value()
    }

    /// Spatial lag rows: (WU)ᵢ.
    pub fn lag_rows(&self, w: &SpatialWeights) -> Vec<f64> {
        let mut lag = vec![0.0; self.n * self.k];
        for (i, j, v) in w.entries() {
            let src = i * self.k;
            for r in 0..self.k {
                lag[src + r] += v * self.coords[j * self.k + r];
            }
        }
        lag
    }
}

/// Reyes's I: Σᵢ ⟨zᵢ, z̃ᵢ⟩ₐ / Σₖ ‖zₖ‖²ₐ, computed in ilr coordinates with the
/// spatial lag taken rowwise through the weight matrix. Requires
/// row-standardized weights (which make the leading n/S₀ factor equal one).
pub fn reyes_i(sample: &CompositionSample, w: &SpatialWeights) -> Result<f64> {
    let cc = centered_coords(sample, w)?;
    if cc.sq_norm_total == 0.0 {
        return Err(Error::DegenerateSample);
    }
    Ok(cc.lag_inner_total(w) / cc.sq_norm_total)
}

/// Cauchy–Schwarz bound: Σᵢ ‖zᵢ‖ₐ‖z̃ᵢ‖ₐ / Σₖ ‖zₖ‖²ₐ ≥ |Iₐ|.
pub fn upper_bound(sample: &CompositionSample, w: &SpatialWeights) -> Result<f64> {
    let cc = centered_coords(sample, w)?;
    if cc.sq_norm_total == 0.0 {
        return Err(Error::DegenerateSample);
    }
    let lag = cc.lag_rows(w);
    let mut acc = KahanSum::new();
    for i in 0..cc.n {
        let nu: f64 = cc.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
        let nl: f64 = lag[i * cc.k..(i + 1) * cc.k]
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        acc.add(nu * nl);
    }
    Ok(acc.value() / cc.sq_norm_total)
}

/// (statistic, bound) pair that stays defined when every composition is
/// identical: both sides of the 0/0 limit saturate the bound at 1, the value
/// reached as all units share one composition.
pub fn reyes_i_or_bound(sample: &CompositionSample, w: &SpatialWeights) -> Result<(f64, f64)> {
    let cc = centered_coords(sample, w)?;
    if cc.sq_norm_total == 0.0 {
        return Ok((1.0, 1.0));
    }
    let value = cc.lag_inner_total(w) / cc.sq_norm_total;
    let lag = cc.lag_rows(w);
    let mut acc = KahanSum::new();
    for i in 0..cc.n {
        let nu: f64 = cc.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
        let nl: f64 = lag[i * cc.k..(i + 1) * cc.k]
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        acc.add(nu * nl);
    }
    Ok((value, acc.value() / cc.sq_norm_total))
}

/// First randomization moment: −1/(n−1).
pub fn expected_value_randomization(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::TooFewUnits { n, min: 2 });
    }
    Ok(-1.0 / (n as f64 - 1.0))
}

/// Second randomization moment with its building blocks, for auditability.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SecondMoment {
    /// E_R(Iₐ²) assembled from the closed-form expressions below.
    pub e_r2: f64,
    /// m = tr(M₂) = mean of ‖zₖ‖²ₐ.
    pub m: f64,
    /// m₄ = mean of ‖zₖ‖⁴ₐ.
    pub m4: f64,
    /// tr(M₂²).
    pub tr_m2_sq: f64,
}

/// Closed-form E_R(Iₐ²) under randomization.
///
/// The cross-product term E_R(AᵢAⱼ) is assembled exactly as the closed form
/// states it, including the (1 − cᵢⱼ − wⱼᵢ) factor. Exact permutation
/// enumeration disagrees with that form on some weight structures; the
/// `validation` module quantifies the gap, and permutation distributions are
/// the authoritative source for variances downstream.
pub fn second_moment_randomization(
    sample: &CompositionSample,
    w: &SpatialWeights,
) -> Result<SecondMoment> {
    let cc = centered_coords(sample, w)?;
    let n = cc.n;
    if n < 4 {
        return Err(Error::TooFewUnits { n, min: 4 });
    }
    if cc.sq_norm_total == 0.0 {
        return Err(Error::DegenerateSample);
    }
    let summaries = weight_summaries(w)?;
    let nf = n as f64;
    let k = cc.k;

    // M2 = (1/n) Σ u_l u_lᵀ and its scalars, with compensated accumulation.
    let mut m2 = vec![KahanSum::new(); k * k];
    let mut m4_acc = KahanSum::new();
    for i in 0..n {
        let u = cc.row(i);
        let sq: f64 = u.iter().map(|v| v * v).sum();
        m4_acc.add(sq * sq);
        for a in 0..k {
            for b in 0..k {
                m2[a * k + b].add(u[a] * u[b]);
            }
        }
    }
    let m2: Vec<f64> = m2.iter().map(|s| s.value() / nf).collect();
    let m = (0..k).map(|a| m2[a * k + a]).sum::<f64>();
    let m4 = m4_acc.value() / nf;
    let mut tr_m2_sq = KahanSum::new();
    for a in 0..k {
        for b in 0..k {
            tr_m2_sq.add(m2[a * k + b] * m2[b * k + a]);
        }
    }
    let tr_m2_sq = tr_m2_sq.value();

    // Pair moments over distinct unit labels.
    let q_pair = (nf * tr_m2_sq - m4) / (nf - 1.0);
    let q_shared = (2.0 * m4 - nf * tr_m2_sq) / ((nf - 1.0) * (nf - 2.0));
    let q_disjoint = (2.0 * nf * tr_m2_sq + nf * m * m - 6.0 * m4)
        / ((nf - 1.0) * (nf - 2.0) * (nf - 3.0));

    // Σ_i E(Aᵢ²) = Σ_i [q_pair cᵢ + q_shared (1 − cᵢ)]
    let mut own = KahanSum::new();
    for &ci in &summaries.c {
        own.add(q_pair * ci + q_shared * (1.0 - ci));
    }

    // Σ_{i≠j} E(AᵢAⱼ) with E(AᵢAⱼ) = q_disjoint (1 − cᵢⱼ − wⱼᵢ) + q_shared cᵢⱼ:
    // summing over ordered pairs, Σ 1 = n(n−1), Σ wⱼᵢ = S₀, Σ cᵢⱼ = cross total.
    let cross_total = summaries.cross_total();
    let cross_sum = q_disjoint * (nf * (nf - 1.0) - cross_total - summaries.s0)
        + q_shared * cross_total;

    let e_r2 = (own.value() + cross_sum) / (nf * nf * m * m);
    Ok(SecondMoment {
        e_r2,
        m,
        m4,
        tr_m2_sq,
    })
}

/// The statistic together with its closed-form randomization moments.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReyesStatistic {
    pub value: f64,
    pub upper_bound: f64,
    /// First randomization moment, −1/(n−1).
    pub e_r: f64,
    /// Closed-form second moment; see [`second_moment_randomization`].
    pub e_r2: f64,
    /// e_r2 − e_r². Can be negative where the closed-form cross term
    /// disagrees with the exact permutation distribution; prefer the
    /// empirical variance of a permutation distribution.
    pub var_r: f64,
    pub n: usize,
    pub d: usize,
}

impl ReyesStatistic {
    /// Compute value, bound, and moments in one pass. Requires n ≥ 4 (the
    /// cross-moment denominator) and a nondegenerate sample.
    pub fn compute(sample: &CompositionSample, w: &SpatialWeights) -> Result<Self> {
        let value = reyes_i(sample, w)?;
        let bound = upper_bound(sample, w)?;
        let e_r = expected_value_randomization(sample.n())?;
        let sm = second_moment_randomization(sample, w)?;
        Ok(ReyesStatistic {
            value,
            upper_bound: bound,
            e_r,
            e_r2: sm.e_r2,
            var_r: sm.e_r2 - e_r * e_r,
            n: sample.n(),
            d: sample.dim(),
        })
    }
}

/// Classical Moran's I for a real-valued variable: n Σ zᵢ z̃ᵢ / (S₀ Σ zᵢ²).
pub fn moran_i(values: &[f64], w: &SpatialWeights) -> Result<f64> {
    if !w.is_standardized() {
        return Err(Error::NotStandardized);
    }
    if values.len() != w.n() {
        return Err(Error::DimensionMismatch {
            expected: w.n(),
            found: values.len(),
        });
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let z: Vec<f64> = values.iter().map(|&v| v - mean).collect();
    let den: f64 = z.iter().map(|v| v * v).sum();
    if den == 0.0 {
        return Err(Error::ConstantVector { component: None });
    }
    let mut num = KahanSum::new();
    let mut s0 = KahanSum::new();
    for (i, j, v) in w.entries() {
        num.add(v * z[i] * z[j]);
        s0.add(v);
    }
    Ok(n as f64 * num.value() / (s0.value() * den))
}

/// Componentwise Moran baseline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MoranStatistic {
    /// I_m = mean of the component values.
    pub value: f64,
    pub component_values: Vec<f64>,
}

/// I_m: the average of Moran's I computed on each closed part separately.
pub fn moran_mean(sample: &CompositionSample, w: &SpatialWeights) -> Result<MoranStatistic> {
    let n = sample.n();
    if w.n() != n {
        return Err(Error::DimensionMismatch {
            expected: w.n(),
            found: n,
        });
    }
    let d = sample.dim();
    // closed proportions per component
    let mut component_values = Vec::with_capacity(d);
    for j in 0..d {
        let column: Vec<f64> = (0..n)
            .map(|i| {
                let row = sample.raw_row(i);
                let total: f64 = row.iter().sum();
                row[j] / total
            })
            .collect();
        let ij = moran_i(&column, w).map_err(|e| match e {
            Error::ConstantVector { .. } => Error::ConstantVector { component: Some(j) },
            other => other,
        })?;
        component_values.push(ij);
    }
    let value = component_values.iter().sum::<f64>() / d as f64;
    Ok(MoranStatistic {
        value,
        component_values,
    })
}

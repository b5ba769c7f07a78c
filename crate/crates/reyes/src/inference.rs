//! Exact and Monte Carlo randomization distributions, p-values, and
//! empirical critical values.
//!
//! Evaluation works on a precomputed snapshot of scaled coordinate rows:
//! relabeling units permutes rows while the weights stay fixed, the
//! denominator is permutation-invariant and folded into the row scaling, so
//! each permutation costs one sparse pass over the weight entries. Monte
//! Carlo draws use one counter-derived random stream per draw index, which
//! makes results bit-identical for a fixed (seed, B) regardless of how many
//! worker threads execute the draws.

use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CompositionSample;
use crate::numeric::KahanSum;
use crate::statistic::centered_coords;
use crate::weights::SpatialWeights;

/// Default cap on exact enumeration: 9! = 362,880 evaluations.
pub const DEFAULT_EXACT_CAP: usize = 9;

/// Above this unit count the engine computes row dot products directly
/// instead of materializing the n×n Gram matrix.
const GRAM_LIMIT: usize = 1024;

/// How a permutation distribution was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionMode {
    Exact,
    MonteCarlo,
}

/// The randomization distribution of a statistic: one value per relabeling,
/// in enumeration rank order (exact) or draw order (Monte Carlo).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PermutationDistribution {
    pub values: Vec<f64>,
    pub mode: DistributionMode,
    /// Number of relabelings: n! in exact mode, B in Monte Carlo mode.
    pub b: usize,
    /// Master seed (Monte Carlo only).
    pub seed: Option<u64>,
    /// The statistic at the observed arrangement (identity relabeling).
    pub observed: f64,
}

impl PermutationDistribution {
    pub fn mean(&self) -> f64 {
        crate::numeric::kahan_sum(self.values.iter().copied()) / self.values.len() as f64
    }

    pub fn sd(&self) -> f64 {
        let mean = self.mean();
        let ss = crate::numeric::kahan_sum(self.values.iter().map(|v| {
            let d = v - mean;
            d * d
        }));
        (ss / self.values.len() as f64).sqrt()
    }
}

/// Tail handling for the p-value estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correction {
    /// p = m / B, the plain proportion (can be zero in Monte Carlo mode).
    Raw,
    /// p = (m + 1) / (B + 1), never zero.
    PlusOne,
}

/// One- and two-sided p-values with the Monte Carlo binomial standard error.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PValueReport {
    /// P(statistic ≥ observed): evidence for positive autocorrelation.
    pub p_pos: f64,
    /// P(statistic ≤ observed): evidence for negative autocorrelation.
    pub p_neg: f64,
    /// min(1, 2·min(p_pos, p_neg)).
    pub p_two: f64,
    /// sqrt(p_pos (1 − p_pos) / B), Monte Carlo mode only.
    pub se: Option<f64>,
    pub correction: Correction,
}

/// Empirical critical values at level alpha (nearest-rank quantiles).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalValues {
    pub lower: f64,
    pub upper: f64,
}

/// Snapshot of scaled coordinate rows and weight entries on which
/// permutations are evaluated. Immutable and shared across workers.
pub struct PermutationEngine {
    n: usize,
    k: usize,
    /// Row-major n×k scaled rows; the permuted statistic is
    /// Σ wᵢⱼ ⟨r_{π(i)}, r_{π(j)}⟩.
    rows: Vec<f64>,
    /// (i, j, w) in fixed row-major order.
    edges: Vec<(u32, u32, f64)>,
    /// Gram matrix of the scaled rows when n is small enough.
    gram: Option<Vec<f64>>,
}

impl PermutationEngine {
    fn from_scaled_rows(rows: Vec<f64>, n: usize, k: usize, w: &SpatialWeights) -> Self {
        let edges: Vec<(u32, u32, f64)> = w
            .entries()
            .map(|(i, j, v)| (i as u32, j as u32, v))
            .collect();
        let gram = if n <= GRAM_LIMIT {
            let mut g = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    g[i * n + j] = rows[i * k..(i + 1) * k]
                        .iter()
                        .zip(&rows[j * k..(j + 1) * k])
                        .map(|(a, b)| a * b)
                        .sum();
                }
            }
            Some(g)
        } else {
            None
        };
        PermutationEngine {
            n,
            k,
            rows,
            edges,
            gram,
        }
    }

    /// Engine for Reyes's I: centered ilr rows scaled by the inverse root of
    /// the (permutation-invariant) squared-norm total.
    pub fn for_reyes(sample: &CompositionSample, w: &SpatialWeights) -> Result<Self> {
        let cc = centered_coords(sample, w)?;
        if cc.sq_norm_total == 0.0 {
            return Err(Error::DegenerateSample);
        }
        let scale = 1.0 / cc.sq_norm_total.sqrt();
        let rows: Vec<f64> = cc.coords.iter().map(|v| v * scale).collect();
        Ok(Self::from_scaled_rows(rows, cc.n, cc.k, w))
    }

    /// Engine for the componentwise Moran average I_m: each unit's row holds
    /// its closed-part deviations, scaled so the engine value equals
    /// (1/D) Σⱼ Iⱼ at every permutation.
    pub fn for_moran_mean(sample: &CompositionSample, w: &SpatialWeights) -> Result<Self> {
        if !w.is_standardized() {
            return Err(Error::NotStandardized);
        }
        let n = sample.n();
        if w.n() != n {
            return Err(Error::DimensionMismatch {
                expected: w.n(),
                found: n,
            });
        }
        let d = sample.dim();
        let mut s0 = KahanSum::new();
        for (_, _, v) in w.entries() {
            s0.add(v);
        }
        let s0 = s0.value();

        let mut rows = vec![0.0; n * d];
        for j in 0..d {
            let column: Vec<f64> = (0..n)
                .map(|i| {
                    let row = sample.raw_row(i);
                    let total: f64 = row.iter().sum();
                    row[j] / total
                })
                .collect();
            let mean = column.iter().sum::<f64>() / n as f64;
            let den: f64 = column.iter().map(|v| (v - mean) * (v - mean)).sum();
            if den == 0.0 {
                return Err(Error::ConstantVector { component: Some(j) });
            }
            let scale = (n as f64 / (s0 * den * d as f64)).sqrt();
            for i in 0..n {
                rows[i * d + j] = (column[i] - mean) * scale;
            }
        }
        Ok(Self::from_scaled_rows(rows, n, d, w))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Statistic value under a relabeling: unit i receives the data row
    /// perm[i].
    pub fn value(&self, perm: &[usize]) -> f64 {
        let mut acc = KahanSum::new();
        match &self.gram {
            Some(g) => {
                for &(i, j, w) in &self.edges {
                    acc.add(w * g[perm[i as usize] * self.n + perm[j as usize]]);
                }
            }
            None => {
                for &(i, j, w) in &self.edges {
                    let a = perm[i as usize] * self.k;
                    let b = perm[j as usize] * self.k;
                    let dot: f64 = self.rows[a..a + self.k]
                        .iter()
                        .zip(&self.rows[b..b + self.k])
                        .map(|(x, y)| x * y)
                        .sum();
                    acc.add(w * dot);
                }
            }
        }
        acc.value()
    }

    /// Statistic at the observed arrangement.
    pub fn observed(&self) -> f64 {
        let identity: Vec<usize> = (0..self.n).collect();
        self.value(&identity)
    }

    /// Full randomization distribution: all n! relabelings in rank order.
    pub fn exact(&self, cap: usize) -> Result<PermutationDistribution> {
        if self.n > cap {
            return Err(Error::TooManyUnits { n: self.n, cap });
        }
        let total = factorial(self.n);
        let values: Vec<f64> = (0..total)
            .into_par_iter()
            .map(|rank| {
                let perm = unrank_permutation(rank, self.n);
                self.value(&perm)
            })
            .collect();
        Ok(PermutationDistribution {
            observed: self.observed(),
            b: values.len(),
            values,
            mode: DistributionMode::Exact,
            seed: None,
        })
    }

    /// Monte Carlo distribution: B uniform random relabelings, draw b driven
    /// by the stream derived from (seed, b). Output order is draw order.
    pub fn monte_carlo(&self, b: usize, seed: u64) -> Result<PermutationDistribution> {
        if b == 0 {
            return Err(Error::InvalidParameter(
                "Monte Carlo needs at least one permutation".into(),
            ));
        }
        let n = self.n;
        let values: Vec<f64> = (0..b as u64)
            .into_par_iter()
            .map(|draw| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(draw);
                let mut perm: Vec<usize> = (0..n).collect();
                // Fisher–Yates
                for i in (1..n).rev() {
                    let j = rng.random_range(0..=i);
                    perm.swap(i, j);
                }
                self.value(&perm)
            })
            .collect();
        Ok(PermutationDistribution {
            observed: self.observed(),
            b: values.len(),
            values,
            mode: DistributionMode::MonteCarlo,
            seed: Some(seed),
        })
    }
}

/// Exact randomization distribution of Reyes's I. Errors with the unit count
/// when n exceeds `cap` (enumeration is n!).
pub fn exact_distribution(
    sample: &CompositionSample,
    w: &SpatialWeights,
    cap: usize,
) -> Result<PermutationDistribution> {
    PermutationEngine::for_reyes(sample, w)?.exact(cap)
}

/// Monte Carlo randomization distribution of Reyes's I.
pub fn monte_carlo_distribution(
    sample: &CompositionSample,
    w: &SpatialWeights,
    b: usize,
    seed: u64,
) -> Result<PermutationDistribution> {
    PermutationEngine::for_reyes(sample, w)?.monte_carlo(b, seed)
}

/// One- and two-sided p-values. Ties with the observed value are counted in
/// both tails; comparisons are exact floating-point ≥ / ≤ because permuted
/// values come from the same code path as the observed one.
pub fn p_values(dist: &PermutationDistribution, correction: Correction) -> Result<PValueReport> {
    if dist.values.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    let b = dist.values.len() as f64;
    let ge = dist.values.iter().filter(|&&v| v >= dist.observed).count() as f64;
    let le = dist.values.iter().filter(|&&v| v <= dist.observed).count() as f64;
    let (p_pos, p_neg) = match correction {
        Correction::Raw => (ge / b, le / b),
        Correction::PlusOne => ((ge + 1.0) / (b + 1.0), (le + 1.0) / (b + 1.0)),
    };
    let p_two = (2.0 * p_pos.min(p_neg)).min(1.0);
    let se = match dist.mode {
        DistributionMode::MonteCarlo => Some((p_pos * (1.0 - p_pos) / b).sqrt()),
        DistributionMode::Exact => None,
    };
    Ok(PValueReport {
        p_pos,
        p_neg,
        p_two,
        se,
        correction,
    })
}

/// Empirical alpha and 1−alpha quantiles by the nearest-rank rule.
pub fn critical_values(dist: &PermutationDistribution, alpha: f64) -> Result<CriticalValues> {
    if dist.values.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let mut sorted = dist.values.clone();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("statistic values are finite"));
    Ok(CriticalValues {
        lower: nearest_rank(&sorted, alpha),
        upper: nearest_rank(&sorted, 1.0 - alpha),
    })
}

/// Nearest-rank quantile: the ⌈q·N⌉-th smallest value, guarding the ceiling
/// against floating-point noise when q·N is integral.
fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let rank = (q * n as f64 - 1e-9).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

pub(crate) fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Permutation at `rank` in lexicographic order via the factorial number
/// system.
pub(crate) fn unrank_permutation(mut rank: u64, n: usize) -> Vec<usize> {
    let mut available: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n);
    for i in (0..n).rev() {
        let f = factorial(i);
        let idx = (rank / f) as usize;
        rank %= f;
        out.push(available.remove(idx));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CompositionSample;
    use crate::weights::{Contiguity, SpatialWeights};
    use approx::assert_relative_eq;
    use rand_chacha::ChaCha8Rng;

    fn random_sample(n: usize, d: usize, seed: u64) -> CompositionSample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(0.05..1.0)).collect())
            .collect();
        CompositionSample::from_rows(rows, None).unwrap()
    }

    #[test]
    fn unranking_enumerates_all_permutations_in_order() {
        let perms: Vec<Vec<usize>> = (0..factorial(4)).map(|r| unrank_permutation(r, 4)).collect();
        assert_eq!(perms.len(), 24);
        assert_eq!(perms[0], vec![0, 1, 2, 3]); // identity at rank 0
        assert_eq!(perms[23], vec![3, 2, 1, 0]);
        let unique: std::collections::HashSet<_> = perms.iter().collect();
        assert_eq!(unique.len(), 24);
        // lexicographic order
        for pair in perms.windows(2) {
            assert!(pair[0] < pair[1]);
        }
    }

    #[test]
    fn exact_2x2_queen_has_24_values_with_mean_minus_third() {
        let sample = random_sample(4, 3, 1);
        let w = SpatialWeights::standardized_lattice(2, 2, Contiguity::Queen).unwrap();
        let dist = exact_distribution(&sample, &w, DEFAULT_EXACT_CAP).unwrap();
        assert_eq!(dist.values.len(), 24);
        assert!((dist.mean() + 1.0 / 3.0).abs() <= 1e-12);
    }

    #[test]
    fn exact_mode_observed_is_the_rank_zero_value() {
        let sample = random_sample(5, 3, 2);
        let ids: Vec<String> = (0..5).map(|i| i.to_string()).collect();
        let edges: Vec<(String, String)> = (0..4)
            .map(|i| (i.to_string(), (i + 1).to_string()))
            .collect();
        let w = crate::weights::row_standardize(
            &crate::weights::from_edge_list(&edges, &ids).unwrap(),
            crate::weights::IslandPolicy::Error,
        )
        .unwrap();
        let dist = exact_distribution(&sample, &w, DEFAULT_EXACT_CAP).unwrap();
        assert_eq!(dist.values[0], dist.observed);
    }

    #[test]
    fn identical_compositions_make_every_relabeling_equal() {
        // one perturbed unit would break this; fully identical rows are
        // degenerate, so perturb one unit and relabel: all values must come
        // from the same multiset regardless of rank order.
        let mut rows = vec![vec![0.5, 0.3, 0.2]; 4];
        rows[0] = vec![0.4, 0.35, 0.25];
        let sample = CompositionSample::from_rows(rows, None).unwrap();
        let w = SpatialWeights::standardized_lattice(2, 2, Contiguity::Queen).unwrap();
        let dist = exact_distribution(&sample, &w, DEFAULT_EXACT_CAP).unwrap();
        // 2x2 queen is the complete graph: the statistic is relabeling
        // invariant, so all 24 values coincide.
        for v in &dist.values {
            assert_relative_eq!(*v, dist.observed, epsilon = 1e-12);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let sample = random_sample(4, 3, 3);
        let w = SpatialWeights::standardized_lattice(2, 2, Contiguity::Queen).unwrap();
        assert!(matches!(
            exact_distribution(&sample, &w, 3),
            Err(Error::TooManyUnits { n: 4, cap: 3 })
        ));
    }

    #[test]
    fn monte_carlo_is_bit_identical_across_reruns_and_worker_counts() {
        let sample = random_sample(9, 3, 4);
        let w = SpatialWeights::standardized_lattice(3, 3, Contiguity::Queen).unwrap();
        let reference = monte_carlo_distribution(&sample, &w, 512, 99).unwrap();
        let rerun = monte_carlo_distribution(&sample, &w, 512, 99).unwrap();
        assert_eq!(reference.values, rerun.values);

        for workers in [1usize, 2, 8] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .unwrap();
            let values =
                pool.install(|| monte_carlo_distribution(&sample, &w, 512, 99).unwrap().values);
            assert_eq!(reference.values, values, "worker count {workers}");
        }

        let other_seed = monte_carlo_distribution(&sample, &w, 512, 100).unwrap();
        assert_ne!(reference.values, other_seed.values);
    }

    #[test]
    fn monte_carlo_mean_sits_in_the_clt_band() {
        let sample = random_sample(9, 3, 5);
        let w = SpatialWeights::standardized_lattice(3, 3, Contiguity::Rook).unwrap();
        let dist = monte_carlo_distribution(&sample, &w, 100_000, 7).unwrap();
        let expect = -1.0 / 8.0;
        let band = 4.0 * dist.sd() / (dist.values.len() as f64).sqrt();
        assert!(
            (dist.mean() - expect).abs() <= band,
            "mean {} outside {} ± {}",
            dist.mean(),
            expect,
            band
        );
    }

    #[test]
    fn p_value_tails_and_corrections() {
        let dist = PermutationDistribution {
            values: vec![1.0, 2.0, 3.0, 4.0, 4.0],
            mode: DistributionMode::Exact,
            b: 5,
            seed: None,
            observed: 4.0,
        };
        let p = p_values(&dist, Correction::Raw).unwrap();
        assert_relative_eq!(p.p_pos, 2.0 / 5.0);
        assert_relative_eq!(p.p_neg, 1.0);
        assert_relative_eq!(p.p_two, 4.0 / 5.0);
        assert!(p.se.is_none());
        // ties counted in both tails: p_pos + p_neg >= 1
        assert!(p.p_pos + p.p_neg >= 1.0);

        let plus = p_values(&dist, Correction::PlusOne).unwrap();
        assert_relative_eq!(plus.p_pos, 3.0 / 6.0);

        let constant = PermutationDistribution {
            values: vec![2.0; 10],
            mode: DistributionMode::MonteCarlo,
            b: 10,
            seed: Some(1),
            observed: 2.0,
        };
        let p = p_values(&constant, Correction::Raw).unwrap();
        assert_relative_eq!(p.p_pos, 1.0);
        assert_relative_eq!(p.p_neg, 1.0);
        assert_relative_eq!(p.p_two, 1.0);

        let empty = PermutationDistribution {
            values: vec![],
            mode: DistributionMode::Exact,
            b: 0,
            seed: None,
            observed: 0.0,
        };
        assert!(matches!(
            p_values(&empty, Correction::Raw),
            Err(Error::EmptyDistribution)
        ));
    }

    #[test]
    fn exact_mode_identity_guarantees_a_positive_floor() {
        let sample = random_sample(5, 3, 6);
        let ids: Vec<String> = (0..5).map(|i| i.to_string()).collect();
        let edges: Vec<(String, String)> = (0..4)
            .map(|i| (i.to_string(), (i + 1).to_string()))
            .collect();
        let w = crate::weights::row_standardize(
            &crate::weights::from_edge_list(&edges, &ids).unwrap(),
            crate::weights::IslandPolicy::Error,
        )
        .unwrap();
        let dist = exact_distribution(&sample, &w, DEFAULT_EXACT_CAP).unwrap();
        let p = p_values(&dist, Correction::Raw).unwrap();
        assert!(p.p_pos >= 1.0 / 120.0);
        assert!(p.p_neg >= 1.0 / 120.0);
    }

    #[test]
    fn observed_p_is_uniform_on_the_rank_grid_when_values_are_distinct() {
        let sample = random_sample(5, 3, 8);
        let ids: Vec<String> = (0..5).map(|i| i.to_string()).collect();
        let edges: Vec<(String, String)> = (0..4)
            .map(|i| (i.to_string(), (i + 1).to_string()))
            .collect();
        let w = crate::weights::row_standardize(
            &crate::weights::from_edge_list(&edges, &ids).unwrap(),
            crate::weights::IslandPolicy::Error,
        )
        .unwrap();
        let dist = exact_distribution(&sample, &w, DEFAULT_EXACT_CAP).unwrap();
        let unique: std::collections::HashSet<u64> =
            dist.values.iter().map(|v| v.to_bits()).collect();
        if unique.len() == dist.values.len() {
            let mut ps: Vec<f64> = dist
                .values
                .iter()
                .map(|&obs| {
                    dist.values.iter().filter(|&&v| v >= obs).count() as f64
                        / dist.values.len() as f64
                })
                .collect();
            ps.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
            for (rank, p) in ps.iter().enumerate() {
                assert_relative_eq!(*p, (rank + 1) as f64 / 120.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn critical_values_follow_the_nearest_rank_rule() {
        let dist = PermutationDistribution {
            values: (1..=100).map(|v| v as f64).collect(),
            mode: DistributionMode::Exact,
            b: 100,
            seed: None,
            observed: 50.0,
        };
        let cv = critical_values(&dist, 0.05).unwrap();
        assert_eq!(cv.lower, 5.0);
        assert_eq!(cv.upper, 95.0);

        let median = critical_values(&dist, 0.5).unwrap();
        assert_eq!(median.lower, 50.0);
        assert_eq!(median.upper, 50.0);

        assert!(critical_values(&dist, 0.0).is_err());
        assert!(critical_values(&dist, 1.0).is_err());
    }

    #[test]
    fn critical_values_match_a_sort_based_oracle_on_an_exact_distribution() {
        let sample = random_sample(5, 3, 10);
        let ids: Vec<String> = (0..5).map(|i| i.to_string()).collect();
        let edges: Vec<(String, String)> = (0..4)
            .map(|i| (i.to_string(), (i + 1).to_string()))
            .collect();
        let w = crate::weights::row_standardize(
            &crate::weights::from_edge_list(&edges, &ids).unwrap(),
            crate::weights::IslandPolicy::Error,
        )
        .unwrap();
        let dist = exact_distribution(&sample, &w, DEFAULT_EXACT_CAP).unwrap();
        for alpha in [0.01, 0.05, 0.1, 0.25] {
            let cv = critical_values(&dist, alpha).unwrap();
            let mut sorted = dist.values.clone();
            sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
            let lower_rank = (alpha * 120.0).ceil() as usize;
            let upper_rank = ((1.0 - alpha) * 120.0).ceil() as usize;
            assert_eq!(cv.lower, sorted[lower_rank - 1]);
            assert_eq!(cv.upper, sorted[upper_rank - 1]);
        }
    }

    #[test]
    fn moran_mean_engine_matches_the_statistic_at_identity() {
        let sample = random_sample(9, 4, 11);
        let w = SpatialWeights::standardized_lattice(3, 3, Contiguity::Queen).unwrap();
        let engine = PermutationEngine::for_moran_mean(&sample, &w).unwrap();
        let direct = crate::statistic::moran_mean(&sample, &w).unwrap();
        assert_relative_eq!(engine.observed(), direct.value, epsilon = 1e-12);
    }

    #[test]
    fn reyes_engine_matches_the_statistic_at_identity() {
        let sample = random_sample(12, 3, 12);
        let w = SpatialWeights::standardized_lattice(3, 4, Contiguity::Rook).unwrap();
        let engine = PermutationEngine::for_reyes(&sample, &w).unwrap();
        let direct = crate::statistic::reyes_i(&sample, &w).unwrap();
        assert_relative_eq!(engine.observed(), direct, epsilon = 1e-12);
    }
}

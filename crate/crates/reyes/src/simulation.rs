//! Simulation harness: identical compositions (bound saturation),
//! independent logistic-normal fields (type-I-error calibration), and
//! spatially autoregressive fields (power), under identity, exchangeable,
//! and Wishart–Toeplitz covariance structures on queen or rook lattices.
//!
//! Replications run in parallel; every replication owns random streams
//! derived from (master seed, replication index), so results are
//! bit-reproducible regardless of worker count.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CompositionSample, ContrastMatrix, ContrastScheme};
use crate::inference::{p_values, Correction, PermutationEngine};
use crate::statistic::reyes_i_or_bound;
use crate::weights::{Contiguity, SpatialWeights};

/// Covariance structure of the ilr-space noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceKind {
    Identity,
    Exchangeable,
    WishartToeplitz,
}

impl std::fmt::Display for CovarianceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CovarianceKind::Identity => write!(f, "identity"),
            CovarianceKind::Exchangeable => write!(f, "exchangeable"),
            CovarianceKind::WishartToeplitz => write!(f, "wishart_toeplitz"),
        }
    }
}

/// Specification of a (D−1)-dimensional covariance matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceSpec {
    pub kind: CovarianceKind,
    /// Matrix dimension, D−1.
    pub dim: usize,
    /// Off-diagonal value for the exchangeable structure. Positive
    /// definiteness requires −1/(dim−1) < rho1 < 1 (open interval; the
    /// endpoints are singular).
    #[serde(default = "default_rho1")]
    pub rho1: f64,
    /// Toeplitz scale parameter: T_ij = toeplitz_rho^|i−j|.
    #[serde(default = "default_toeplitz_rho")]
    pub toeplitz_rho: f64,
    /// Wishart degrees of freedom; the draw is scaled by 1/dof so its
    /// expectation is the Toeplitz scale matrix. Defaults to dim + 2.
    #[serde(default)]
    pub dof: Option<usize>,
    /// Seed for the Wishart draw.
    #[serde(default)]
    pub seed: u64,
}

fn default_rho1() -> f64 {
    0.5
}

fn default_toeplitz_rho() -> f64 {
    0.5
}

impl CovarianceSpec {
    pub fn identity(dim: usize) -> Self {
        CovarianceSpec {
            kind: CovarianceKind::Identity,
            dim,
            rho1: default_rho1(),
            toeplitz_rho: default_toeplitz_rho(),
            dof: None,
            seed: 0,
        }
    }

    pub fn exchangeable(dim: usize, rho1: f64) -> Self {
        CovarianceSpec {
            kind: CovarianceKind::Exchangeable,
            dim,
            rho1,
            toeplitz_rho: default_toeplitz_rho(),
            dof: None,
            seed: 0,
        }
    }

    pub fn wishart_toeplitz(dim: usize, toeplitz_rho: f64, dof: usize, seed: u64) -> Self {
        CovarianceSpec {
            kind: CovarianceKind::WishartToeplitz,
            dim,
            rho1: default_rho1(),
            toeplitz_rho,
            dof: Some(dof),
            seed,
        }
    }

    fn effective_dof(&self) -> usize {
        self.dof.unwrap_or(self.dim + 2)
    }
}

/// Realize the covariance matrix described by `spec`. The result is checked
/// to be symmetric positive definite via its Cholesky factorization.
pub fn make_covariance(spec: &CovarianceSpec) -> Result<DMatrix<f64>> {
    let dim = spec.dim;
    if dim == 0 {
        return Err(Error::InvalidParameter(
            "covariance dimension must be at least 1".into(),
        ));
    }
    let sigma = match spec.kind {
        CovarianceKind::Identity => DMatrix::identity(dim, dim),
        CovarianceKind::Exchangeable => {
            let lower = if dim > 1 {
                -1.0 / (dim as f64 - 1.0)
            } else {
                -1.0
            };
            if !(spec.rho1 > lower && spec.rho1 < 1.0) {
                return Err(Error::NotPositiveDefinite);
            }
            DMatrix::from_fn(dim, dim, |i, j| if i == j { 1.0 } else { spec.rho1 })
        }
        CovarianceKind::WishartToeplitz => {
            let dof = spec.effective_dof();
            if dof < dim {
                return Err(Error::InvalidParameter(format!(
                    "Wishart dof {dof} below dimension {dim}"
                )));
            }
            let scale = DMatrix::from_fn(dim, dim, |i, j| {
                spec.toeplitz_rho.powi((i as i32 - j as i32).abs())
            });
            let l = scale
                .clone()
                .cholesky()
                .ok_or(Error::NotPositiveDefinite)?
                .l();
            // Bartlett decomposition: W = L A Aᵀ Lᵀ with chi-square diagonal
            // and standard normal strict lower triangle.
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let mut a = DMatrix::zeros(dim, dim);
            for i in 0..dim {
                let chi = ChiSquared::new((dof - i) as f64).expect("positive dof");
                a[(i, i)] = chi.sample(&mut rng).sqrt();
                for j in 0..i {
                    a[(i, j)] = StandardNormal.sample(&mut rng);
                }
            }
            let la = &l * a;
            (&la * la.transpose()) / dof as f64
        }
    };
    if sigma.clone().cholesky().is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(sigma)
}

/// Draw n independent logistic-normal compositions: ilr coordinates are
/// N(0, Σ), so the simplex mean is the neutral composition.
pub fn logistic_normal_sample(
    n: usize,
    d: usize,
    sigma: &DMatrix<f64>,
    psi: &ContrastMatrix,
    seed: u64,
) -> Result<CompositionSample> {
    let coords = normal_rows(n, d, sigma, seed)?;
    CompositionSample::from_ilr_rows(&coords, psi)
}

/// Draw one composition and copy it to all n units (maximal autocorrelation).
pub fn identical_sample(
    n: usize,
    d: usize,
    sigma: &DMatrix<f64>,
    psi: &ContrastMatrix,
    seed: u64,
) -> Result<CompositionSample> {
    let coords = normal_rows(1, d, sigma, seed)?;
    let rows: Vec<Vec<f64>> = vec![coords[0].clone(); n];
    CompositionSample::from_ilr_rows(&rows, psi)
}

/// Draw a spatially autoregressive compositional field: ilr coordinates
/// solve (I − ρW) Y = E with independent N(0, Σ) noise rows, then map back
/// through the inverse transform.
pub fn sar_sample(
    w: &SpatialWeights,
    rho: f64,
    sigma: &DMatrix<f64>,
    psi: &ContrastMatrix,
    seed: u64,
) -> Result<CompositionSample> {
    if !w.is_standardized() {
        return Err(Error::NotStandardized);
    }
    if !rho.is_finite() || rho.abs() >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "SAR coefficient must satisfy |rho| < 1, got {rho}"
        )));
    }
    let n = w.n();
    let k = sigma.nrows();
    let noise = normal_rows(n, k + 1, sigma, seed)?;
    let e = DMatrix::from_fn(n, k, |i, j| noise[i][j]);

    let mut system = DMatrix::identity(n, n);
    for (i, j, v) in w.entries() {
        system[(i, j)] -= rho * v;
    }
    let lu = system.clone().lu();
    let y = lu.solve(&e).ok_or(Error::SingularSystem)?;

    // solver contract: residual below 1e-10
    let residual = (&system * &y - &e).abs().max();
    if residual > 1e-10 {
        return Err(Error::SingularSystem);
    }

    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| y.row(i).iter().copied().collect())
        .collect();
    CompositionSample::from_ilr_rows(&rows, psi)
}

/// n rows of N(0, Σ) noise in R^{D−1}, drawn row by row from the stream
/// seeded by `seed`.
fn normal_rows(n: usize, d: usize, sigma: &DMatrix<f64>, seed: u64) -> Result<Vec<Vec<f64>>> {
    let k = d - 1;
    if sigma.nrows() != k || sigma.ncols() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: sigma.nrows(),
        });
    }
    let l = sigma
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite)?
        .l();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let z: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut u = vec![0.0; k];
        for r in 0..k {
            let mut acc = 0.0;
            for c in 0..=r {
                acc += l[(r, c)] * z[c];
            }
            u[r] = acc;
        }
        rows.push(u);
    }
    Ok(rows)
}

/// Which data-generating process a scenario uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioCase {
    /// One composition copied to every unit.
    Identical,
    /// Independent logistic-normal compositions.
    Independent,
    /// Spatially autoregressive coordinates.
    Sar,
}

/// Full description of a simulation scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub case: ScenarioCase,
    /// (rows, cols) of the lattice.
    pub grid: (usize, usize),
    /// Part count D.
    pub d: usize,
    pub contiguity: Contiguity,
    pub covariance: CovarianceSpec,
    /// SAR coefficient, used when case = sar.
    #[serde(default = "default_rho_sar")]
    pub rho_sar: f64,
    pub replications: usize,
    /// Monte Carlo permutations per replication.
    #[serde(default = "default_b")]
    pub b: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub master_seed: u64,
}

fn default_rho_sar() -> f64 {
    0.9
}

fn default_b() -> usize {
    10_000
}

fn default_alpha() -> f64 {
    0.05
}

impl ScenarioConfig {
    fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::InvalidParameter(format!(
                "scenario needs D >= 2, got {}",
                self.d
            )));
        }
        if self.covariance.dim != self.d - 1 {
            return Err(Error::DimensionMismatch {
                expected: self.d - 1,
                found: self.covariance.dim,
            });
        }
        if self.replications == 0 {
            return Err(Error::InvalidParameter(
                "scenario needs at least one replication".into(),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.case == ScenarioCase::Sar && (!self.rho_sar.is_finite() || self.rho_sar.abs() >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "SAR coefficient must satisfy |rho| < 1, got {}",
                self.rho_sar
            )));
        }
        Ok(())
    }
}

/// Per-replication measurements. Fields that do not apply to a case (for
/// example p-values in the identical-composition case) are None.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub replication: usize,
    pub i_a: f64,
    pub upper_bound: f64,
    pub i_m: Option<f64>,
    pub p_a: Option<f64>,
    pub p_m: Option<f64>,
    pub time_a_ns: u64,
    pub time_m_ns: u64,
}

/// Scenario aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioAggregates {
    pub rejection_rate_a: Option<f64>,
    pub rejection_rate_m: Option<f64>,
    pub mean_i_a: f64,
    pub sd_i_a: f64,
    pub mean_i_m: Option<f64>,
    pub sd_i_m: Option<f64>,
    /// Replications where the statistic saturates its bound within 1e-10
    /// (meaningful for the identical-composition case).
    pub bound_saturation_count: usize,
}

/// Result of running a scenario: the configuration echo, per-replication
/// records in replication order, and aggregates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub config: ScenarioConfig,
    pub records: Vec<ReplicationRecord>,
    pub aggregates: ScenarioAggregates,
}

impl ScenarioResult {
    /// Zero out wall-clock fields so serialized output depends only on
    /// (config, master_seed).
    pub fn strip_timings(&mut self) {
        for r in &mut self.records {
            r.time_a_ns = 0;
            r.time_m_ns = 0;
        }
    }
}

/// Run the scenario selected by `config.case`.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioResult> {
    match config.case {
        ScenarioCase::Identical => run_case1(config),
        ScenarioCase::Independent => run_case2(config),
        ScenarioCase::Sar => run_case3(config),
    }
}

/// Case 1 — identical compositions. Each replication draws one composition,
/// copies it to every unit, and records the statistic next to its bound.
pub fn run_case1(config: &ScenarioConfig) -> Result<ScenarioResult> {
    if config.case != ScenarioCase::Identical {
        return Err(Error::InvalidParameter(format!(
            "run_case1 expects an identical-composition scenario, got {:?}",
            config.case
        )));
    }
    run_replications(config, |ctx| {
        let sample = identical_sample(ctx.n, ctx.config.d, &ctx.sigma, &ctx.psi, ctx.data_seed)?;
        let started = std::time::Instant::now();
        let (i_a, bound) = reyes_i_or_bound(&sample, ctx.weights)?;
        let time_a_ns = started.elapsed().as_nanos() as u64;
        Ok(ReplicationRecord {
            replication: ctx.replication,
            i_a,
            upper_bound: bound,
            i_m: None,
            p_a: None,
            p_m: None,
            time_a_ns,
            time_m_ns: 0,
        })
    })
}

/// Case 2 — independent compositions. Each replication computes both
/// indicators with their Monte Carlo tail probabilities, timing each
/// pipeline separately; aggregates estimate type-I error at `alpha`.
pub fn run_case2(config: &ScenarioConfig) -> Result<ScenarioResult> {
    if config.case != ScenarioCase::Independent {
        return Err(Error::InvalidParameter(format!(
            "run_case2 expects an independent-composition scenario, got {:?}",
            config.case
        )));
    }
    run_replications(config, |ctx| {
        let sample =
            logistic_normal_sample(ctx.n, ctx.config.d, &ctx.sigma, &ctx.psi, ctx.data_seed)?;
        measure_both_indicators(ctx, &sample)
    })
}

/// Case 3 — spatially autoregressive compositions; aggregates estimate power.
pub fn run_case3(config: &ScenarioConfig) -> Result<ScenarioResult> {
    if config.case != ScenarioCase::Sar {
        return Err(Error::InvalidParameter(format!(
            "run_case3 expects a SAR scenario, got {:?}",
            config.case
        )));
    }
    run_replications(config, |ctx| {
        let sample = sar_sample(
            ctx.weights,
            ctx.config.rho_sar,
            &ctx.sigma,
            &ctx.psi,
            ctx.data_seed,
        )?;
        measure_both_indicators(ctx, &sample)
    })
}

/// Everything one replication closure needs.
struct ReplicationContext<'a> {
    config: &'a ScenarioConfig,
    weights: &'a SpatialWeights,
    psi: ContrastMatrix,
    sigma: DMatrix<f64>,
    n: usize,
    replication: usize,
    data_seed: u64,
    mc_seed_a: u64,
    mc_seed_m: u64,
}

fn measure_both_indicators(
    ctx: &ReplicationContext<'_>,
    sample: &CompositionSample,
) -> Result<ReplicationRecord> {
    let b = ctx.config.b;

    let started = std::time::Instant::now();
    let engine_a = PermutationEngine::for_reyes(sample, ctx.weights)?;
    let i_a = engine_a.observed();
    let dist_a = engine_a.monte_carlo(b, ctx.mc_seed_a)?;
    let p_a = p_values(&dist_a, Correction::Raw)?.p_pos;
    let time_a_ns = started.elapsed().as_nanos() as u64;

    let started = std::time::Instant::now();
    let engine_m = PermutationEngine::for_moran_mean(sample, ctx.weights)?;
    let i_m = engine_m.observed();
    let dist_m = engine_m.monte_carlo(b, ctx.mc_seed_m)?;
    let p_m = p_values(&dist_m, Correction::Raw)?.p_pos;
    let time_m_ns = started.elapsed().as_nanos() as u64;

    let (_, bound) = reyes_i_or_bound(sample, ctx.weights)?;
    Ok(ReplicationRecord {
        replication: ctx.replication,
        i_a,
        upper_bound: bound,
        i_m: Some(i_m),
        p_a: Some(p_a),
        p_m: Some(p_m),
        time_a_ns,
        time_m_ns,
    })
}

fn run_replications<F>(config: &ScenarioConfig, replicate: F) -> Result<ScenarioResult>
where
    F: Fn(&ReplicationContext<'_>) -> Result<ReplicationRecord> + Sync,
{
    config.validate()?;
    let weights =
        SpatialWeights::standardized_lattice(config.grid.0, config.grid.1, config.contiguity)?;
    let psi = ContrastMatrix::new(config.d, ContrastScheme::HelmertLike)?;
    let n = weights.n();

    // Fixed covariance for identity/exchangeable; the Wishart structure is
    // redrawn per replication inside the loop.
    let base_sigma = match config.covariance.kind {
        CovarianceKind::WishartToeplitz => None,
        _ => Some(make_covariance(&config.covariance)?),
    };

    let records: Vec<ReplicationRecord> = (0..config.replications)
        .into_par_iter()
        .map(|replication| {
            // independent streams per replication, derived from the master seed
            let mut seed_rng = ChaCha8Rng::seed_from_u64(config.master_seed);
            seed_rng.set_stream(replication as u64 + 1);
            let data_seed: u64 = seed_rng.random();
            let mc_seed_a: u64 = seed_rng.random();
            let mc_seed_m: u64 = seed_rng.random();
            let wishart_seed: u64 = seed_rng.random();

            let sigma = match &base_sigma {
                Some(s) => s.clone(),
                None => {
                    let mut spec = config.covariance.clone();
                    spec.seed = wishart_seed;
                    make_covariance(&spec)?
                }
            };
            let ctx = ReplicationContext {
                config,
                weights: &weights,
                psi: psi.clone(),
                sigma,
                n,
                replication,
                data_seed,
                mc_seed_a,
                mc_seed_m,
            };
            replicate(&ctx)
        })
        .collect::<Result<_>>()?;

    let aggregates = aggregate(&records, config.alpha);
    Ok(ScenarioResult {
        config: config.clone(),
        records,
        aggregates,
    })
}

fn aggregate(records: &[ReplicationRecord], alpha: f64) -> ScenarioAggregates {
    let r = records.len() as f64;
    let mean_i_a = records.iter().map(|x| x.i_a).sum::<f64>() / r;
    let sd_i_a = (records
        .iter()
        .map(|x| (x.i_a - mean_i_a).powi(2))
        .sum::<f64>()
        / r)
        .sqrt();

    let i_ms: Vec<f64> = records.iter().filter_map(|x| x.i_m).collect();
    let (mean_i_m, sd_i_m) = if i_ms.is_empty() {
        (None, None)
    } else {
        let m = i_ms.iter().sum::<f64>() / i_ms.len() as f64;
        let s = (i_ms.iter().map(|v| (v - m).powi(2)).sum::<f64>() / i_ms.len() as f64).sqrt();
        (Some(m), Some(s))
    };

    let rejection = |ps: Vec<f64>| -> Option<f64> {
        if ps.is_empty() {
            None
        } else {
            Some(ps.iter().filter(|&&p| p < alpha).count() as f64 / ps.len() as f64)
        }
    };
    let rejection_rate_a = rejection(records.iter().filter_map(|x| x.p_a).collect());
    let rejection_rate_m = rejection(records.iter().filter_map(|x| x.p_m).collect());

    let bound_saturation_count = records
        .iter()
        .filter(|x| (x.i_a - x.upper_bound).abs() <= 1e-10)
        .count();

    ScenarioAggregates {
        rejection_rate_a,
        rejection_rate_m,
        mean_i_a,
        sd_i_a,
        mean_i_m,
        sd_i_m,
        bound_saturation_count,
    }
}

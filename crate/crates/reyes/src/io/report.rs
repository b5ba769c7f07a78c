//! The analysis pipeline and its serialized reports.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{CompositionSample, DeltaPolicy};
use crate::inference::{
    critical_values, p_values, Correction, PermutationDistribution, PermutationEngine,
};
use crate::statistic::ReyesStatistic;
use crate::weights::{
    from_edge_list, lattice_weights, row_standardize, Contiguity, IslandPolicy, SpatialWeights,
};

use super::compositions::{read_compositions, read_edge_list};

/// Where the spatial structure comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightsSource {
    EdgeList { path: PathBuf },
    Lattice { rows: usize, cols: usize },
}

/// Zero-replacement settings for the ingestion pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroPolicy {
    pub enabled: bool,
    pub delta_policy: DeltaPolicy,
    pub delta: f64,
}

impl Default for ZeroPolicy {
    fn default() -> Self {
        ZeroPolicy {
            enabled: false,
            delta_policy: DeltaPolicy::FractionOfMin,
            delta: 0.5,
        }
    }
}

/// Everything `analyze` needs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisRequest {
    pub compositions_path: PathBuf,
    pub weights_source: WeightsSource,
    pub contiguity: Contiguity,
    /// Monte Carlo permutations.
    pub b: usize,
    pub seed: u64,
    pub alpha: f64,
    pub zero_policy: ZeroPolicy,
    pub island_policy: IslandPolicy,
}

/// Content digest of an input file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// What produced the report: seeds, sizes, and input digests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub b: usize,
    pub alpha: f64,
    pub n: usize,
    pub d: usize,
    pub weights: String,
    pub input_digests: Vec<InputDigest>,
}

/// Summary of the Monte Carlo randomization distribution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
    pub lower_critical: f64,
    pub upper_critical: f64,
}

/// Full analysis output: the statistic with closed-form moments, permutation
/// p-values, the distribution summary, and provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReyesReport {
    pub statistic: ReyesStatistic,
    pub p_values: crate::inference::PValueReport,
    pub distribution_summary: DistributionSummary,
    pub provenance: Provenance,
    pub warnings: Vec<String>,
}

/// SHA-256 of a file's bytes, hex encoded.
pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(hex::encode(hasher.finalize()))
}

/// Build standardized weights from the request and align the sample to the
/// surviving units (island drops subset the sample by id).
pub fn build_weights_and_align(
    request: &AnalysisRequest,
    sample: CompositionSample,
) -> Result<(CompositionSample, SpatialWeights, String)> {
    match &request.weights_source {
        WeightsSource::Lattice { rows, cols } => {
            let raw = lattice_weights(*rows, *cols, request.contiguity)?;
            if raw.n() != sample.n() {
                return Err(Error::DimensionMismatch {
                    expected: raw.n(),
                    found: sample.n(),
                });
            }
            let w = row_standardize(&raw, request.island_policy)?;
            let label = format!("lattice {rows}x{cols} {}", request.contiguity);
            Ok((sample, w, label))
        }
        WeightsSource::EdgeList { path } => {
            let edges = read_edge_list(path)?;
            let raw = from_edge_list(&edges, sample.unit_ids())?;
            let w = row_standardize(&raw, request.island_policy)?;
            let label = format!("edge list {} ({} units)", path.display(), w.n());
            if w.n() == sample.n() {
                Ok((sample, w, label))
            } else {
                // island drops removed units; subset the sample to match
                let keep: Vec<usize> = w
                    .unit_ids()
                    .iter()
                    .map(|id| {
                        sample
                            .unit_ids()
                            .iter()
                            .position(|s| s == id)
                            .expect("surviving ids come from the sample")
                    })
                    .collect();
                let sub = sample.subset(&keep)?;
                Ok((sub, w, label))
            }
        }
    }
}

/// Run the full pipeline: read, replace zeros if enabled, build and
/// standardize weights, compute the statistic and its closed-form moments,
/// draw the Monte Carlo distribution, and summarize.
pub fn analyze(request: &AnalysisRequest) -> Result<ReyesReport> {
    if request.b == 0 {
        return Err(Error::InvalidParameter(
            "analysis needs at least one Monte Carlo permutation".into(),
        ));
    }
    if !(request.alpha > 0.0 && request.alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {}",
            request.alpha
        )));
    }
    let mut digests = vec![InputDigest {
        path: request.compositions_path.display().to_string(),
        sha256: sha256_file(&request.compositions_path)?,
    }];
    if let WeightsSource::EdgeList { path } = &request.weights_source {
        digests.push(InputDigest {
            path: path.display().to_string(),
            sha256: sha256_file(path)?,
        });
    }

    let sample = read_compositions(&request.compositions_path)?;
    let sample = if request.zero_policy.enabled {
        sample.replace_zeros(request.zero_policy.delta_policy, request.zero_policy.delta)?
    } else {
        sample
    };
    let (sample, weights, weights_label) = build_weights_and_align(request, sample)?;

    let statistic = ReyesStatistic::compute(&sample, &weights)?;
    let engine = PermutationEngine::for_reyes(&sample, &weights)?;
    let dist = engine.monte_carlo(request.b, request.seed)?;
    let pv = p_values(&dist, Correction::Raw)?;
    let cv = critical_values(&dist, request.alpha)?;
    let median = critical_values(&dist, 0.5)?.lower;

    let summary = DistributionSummary {
        mean: dist.mean(),
        sd: dist.sd(),
        median,
        lower_critical: cv.lower,
        upper_critical: cv.upper,
    };
    let warnings = collect_warnings(&statistic, &dist, &summary);

    Ok(ReyesReport {
        statistic,
        p_values: pv,
        distribution_summary: summary,
        provenance: Provenance {
            seed: request.seed,
            b: request.b,
            alpha: request.alpha,
            n: sample.n(),
            d: sample.dim(),
            weights: weights_label,
            input_digests: digests,
        },
        warnings,
    })
}

fn collect_warnings(
    statistic: &ReyesStatistic,
    dist: &PermutationDistribution,
    summary: &DistributionSummary,
) -> Vec<String> {
    let mut warnings = Vec::new();
    let expect = statistic.e_r;
    let band = 4.0 * summary.sd / (dist.values.len() as f64).sqrt();
    if (summary.mean - expect).abs() > band {
        warnings.push(format!(
            "permutation mean {:.6} is more than 4 sd/sqrt(B) away from the expected {:.6}",
            summary.mean, expect
        ));
    }
    let empirical_var = summary.sd * summary.sd;
    if statistic.var_r < 0.0
        || (empirical_var > 0.0
            && (statistic.var_r - empirical_var).abs() / empirical_var > 0.05)
    {
        warnings.push(format!(
            "closed-form variance {:.6e} deviates from the permutation-distribution variance {:.6e}; prefer the empirical value",
            statistic.var_r, empirical_var
        ));
    }
    warnings
}

/// Output of the exact-enumeration command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExactReport {
    pub n: usize,
    /// n! values.
    pub b: usize,
    pub observed: f64,
    pub mean: f64,
    pub sd: f64,
    pub p_values: crate::inference::PValueReport,
    pub lower_critical: f64,
    pub upper_critical: f64,
    /// The full distribution in enumeration rank order.
    pub values: Vec<f64>,
}

/// Enumerate the full randomization distribution and summarize it.
pub fn exact_report(
    sample: &CompositionSample,
    weights: &SpatialWeights,
    cap: usize,
    alpha: f64,
) -> Result<ExactReport> {
    let engine = PermutationEngine::for_reyes(sample, weights)?;
    let dist = engine.exact(cap)?;
    let pv = p_values(&dist, Correction::Raw)?;
    let cv = critical_values(&dist, alpha)?;
    Ok(ExactReport {
        n: sample.n(),
        b: dist.values.len(),
        observed: dist.observed,
        mean: dist.mean(),
        sd: dist.sd(),
        p_values: pv,
        lower_critical: cv.lower,
        upper_critical: cv.upper,
        values: dist.values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_file(dir: &tempfile::TempDir, name: &str, content: &str) -> PathBuf {
        let path = dir.path().join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    fn lattice_request(path: PathBuf) -> AnalysisRequest {
        AnalysisRequest {
            compositions_path: path,
            weights_source: WeightsSource::Lattice { rows: 2, cols: 2 },
            contiguity: Contiguity::Queen,
            b: 200,
            seed: 5,
            alpha: 0.05,
            zero_policy: ZeroPolicy::default(),
            island_policy: IslandPolicy::Error,
        }
    }

    #[test]
    fn analyze_produces_a_consistent_report() {
        let dir = tempfile::tempdir().unwrap();
        let comps = write_file(
            &dir,
            "comps.csv",
            "id,a,b,c\nu1,0.5,0.3,0.2\nu2,0.2,0.5,0.3\nu3,0.3,0.2,0.5\nu4,0.4,0.4,0.2\n",
        );
        let report = analyze(&lattice_request(comps)).unwrap();
        assert_eq!(report.provenance.n, 4);
        assert_eq!(report.provenance.d, 3);
        assert_eq!(report.statistic.n, 4);
        assert!(report.statistic.value.abs() <= report.statistic.upper_bound + 1e-10);
        assert!(report.p_values.p_pos > 0.0 && report.p_values.p_pos <= 1.0);
        assert_eq!(report.provenance.input_digests.len(), 1);
        assert_eq!(report.provenance.input_digests[0].sha256.len(), 64);
    }

    #[test]
    fn analyze_is_deterministic_per_seed() {
        let dir = tempfile::tempdir().unwrap();
        let comps = write_file(
            &dir,
            "comps.csv",
            "id,a,b,c\nu1,0.5,0.3,0.2\nu2,0.2,0.5,0.3\nu3,0.3,0.2,0.5\nu4,0.4,0.4,0.2\n",
        );
        let a = analyze(&lattice_request(comps.clone())).unwrap();
        let b = analyze(&lattice_request(comps)).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn zero_replacement_feeds_the_pipeline() {
        let dir = tempfile::tempdir().unwrap();
        let comps = write_file(
            &dir,
            "comps.csv",
            "id,a,b,c\nu1,0.5,0.5,0\nu2,0.2,0.5,0.3\nu3,0.3,0.2,0.5\nu4,0.4,0.4,0.2\n",
        );
        // without replacement: zero surfaces as NonPositivePart naming u1
        let request = lattice_request(comps.clone());
        match analyze(&request) {
            Err(Error::NonPositivePart { row: Some(r), .. }) => assert_eq!(r, "u1"),
            other => panic!("expected NonPositivePart for u1, got {other:?}"),
        }
        // with replacement the pipeline completes
        let mut request = lattice_request(comps);
        request.zero_policy.enabled = true;
        let report = analyze(&request).unwrap();
        assert!(report.statistic.value.is_finite());
    }

    #[test]
    fn island_error_and_drop_policies() {
        let dir = tempfile::tempdir().unwrap();
        let comps = write_file(
            &dir,
            "comps.csv",
            "id,a,b,c\nu1,0.5,0.3,0.2\nu2,0.2,0.5,0.3\nu3,0.3,0.2,0.5\nu4,0.4,0.4,0.2\nu5,0.25,0.5,0.25\n",
        );
        let edges = write_file(&dir, "edges.csv", "src,dst\nu1,u2\nu2,u3\nu3,u4\nu4,u1\n");
        let mut request = AnalysisRequest {
            compositions_path: comps,
            weights_source: WeightsSource::EdgeList { path: edges },
            contiguity: Contiguity::Queen,
            b: 100,
            seed: 9,
            alpha: 0.05,
            zero_policy: ZeroPolicy::default(),
            island_policy: IslandPolicy::Error,
        };
        match analyze(&request) {
            Err(Error::IslandUnit { unit }) => assert_eq!(unit, "u5"),
            other => panic!("expected IslandUnit u5, got {other:?}"),
        }
        request.island_policy = IslandPolicy::DropUnit;
        let report = analyze(&request).unwrap();
        assert_eq!(report.provenance.n, 4);
    }
}

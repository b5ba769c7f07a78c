//! The full ingestion-to-report pipeline on the bundled department-style
//! fixtures: CSV table with zeros, adjacency edge list, multiplicative zero
//! replacement, and Monte Carlo inference.
//!
//! Run with: cargo run --example analyze_pipeline

use std::path::Path;

use reyes::geometry::DeltaPolicy;
use reyes::io::{analyze, AnalysisRequest, WeightsSource, ZeroPolicy};
use reyes::weights::{Contiguity, IslandPolicy};

fn main() -> reyes::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    let request = AnalysisRequest {
        compositions_path: data.join("departments_33.csv"),
        weights_source: WeightsSource::EdgeList {
            path: data.join("adjacency_33.csv"),
        },
        contiguity: Contiguity::Queen,
        b: 20_000,
        seed: 20_210_106,
        alpha: 0.05,
        zero_policy: ZeroPolicy {
            enabled: true,
            delta_policy: DeltaPolicy::FractionOfMin,
            delta: 0.5,
        },
        island_policy: IslandPolicy::Error,
    };

    let report = analyze(&request)?;
    println!(
        "n = {}, D = {}, weights: {}",
        report.provenance.n, report.provenance.d, report.provenance.weights
    );
    println!(
        "I_a = {:+.4} (bound {:.4}), E_R = {:+.4}",
        report.statistic.value, report.statistic.upper_bound, report.statistic.e_r
    );
    println!(
        "p_pos = {:.4} +/- {:.4}, two-sided {:.4}",
        report.p_values.p_pos,
        report.p_values.se.unwrap_or(0.0),
        report.p_values.p_two
    );
    println!(
        "permutation distribution: mean {:+.4}, sd {:.4}, 5% critical band [{:+.4}, {:+.4}]",
        report.distribution_summary.mean,
        report.distribution_summary.sd,
        report.distribution_summary.lower_critical,
        report.distribution_summary.upper_critical
    );
    for digest in &report.provenance.input_digests {
        println!("input {} sha256 {}", digest.path, &digest.sha256[..12]);
    }
    for warning in &report.warnings {
        println!("warning: {warning}");
    }
    Ok(())
}

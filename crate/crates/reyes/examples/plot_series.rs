//! Turning reports and scenario records into tidy, plot-ready CSV series
//! with sidecar column schemas.
//!
//! Run with: cargo run --example plot_series

use std::path::Path;

use reyes::io::{analyze, plot_report_series, plot_scenario_series, AnalysisRequest, WeightsSource, ZeroPolicy};
use reyes::simulation::{run_scenario, CovarianceSpec, ScenarioCase, ScenarioConfig};
use reyes::weights::{Contiguity, IslandPolicy};

fn main() -> reyes::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    let out_dir = std::env::temp_dir().join("reyes_plot_series");
    std::fs::create_dir_all(&out_dir)?;

    // a short "daily" series: the same map analyzed with three seeds stands
    // in for three days of reports
    let mut reports = Vec::new();
    for seed in [1u64, 2, 3] {
        let request = AnalysisRequest {
            compositions_path: data.join("independent_3x3.csv"),
            weights_source: WeightsSource::Lattice { rows: 3, cols: 3 },
            contiguity: Contiguity::Queen,
            b: 2000,
            seed,
            alpha: 0.05,
            zero_policy: ZeroPolicy::default(),
            island_policy: IslandPolicy::Error,
        };
        reports.push(analyze(&request)?);
    }
    let series = out_dir.join("daily.csv");
    plot_report_series(&reports, &series)?;
    println!("wrote {}", series.display());
    print!("{}", std::fs::read_to_string(&series)?);

    // per-replication scenario series
    let config = ScenarioConfig {
        case: ScenarioCase::Sar,
        grid: (4, 4),
        d: 3,
        contiguity: Contiguity::Rook,
        covariance: CovarianceSpec::identity(2),
        rho_sar: 0.7,
        replications: 5,
        b: 500,
        alpha: 0.05,
        master_seed: 11,
    };
    let result = run_scenario(&config)?;
    let scenario_series = out_dir.join("scenario.csv");
    plot_scenario_series(&result.records, &scenario_series)?;
    println!("wrote {}", scenario_series.display());
    println!(
        "schema sidecars: {} and {}",
        series.with_extension("schema.json").display(),
        scenario_series.with_extension("schema.json").display()
    );
    Ok(())
}

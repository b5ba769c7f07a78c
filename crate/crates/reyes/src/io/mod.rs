//! File ingestion, the analysis pipeline, report serialization, and
//! plot-ready series.

mod compositions;
mod plot;
mod report;

pub use compositions::{read_compositions, read_edge_list, write_compositions};
pub use plot::{plot_report_series, plot_scenario_series, read_records_csv, write_records_csv};
pub use report::{
    analyze, build_weights_and_align, exact_report, sha256_file, AnalysisRequest,
    DistributionSummary, ExactReport, InputDigest, Provenance, ReyesReport, WeightsSource,
    ZeroPolicy,
};

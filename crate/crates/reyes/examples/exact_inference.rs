//! Exact randomization inference on a small map: enumerate all n!
//! relabelings, read off p-values and critical values, and confirm the
//! distribution's mean is -1/(n-1).
//!
//! Run with: cargo run --example exact_inference

use reyes::geometry::CompositionSample;
use reyes::inference::{critical_values, exact_distribution, p_values, Correction};
use reyes::weights::{Contiguity, SpatialWeights};

fn main() -> reyes::Result<()> {
    // six units on a 2x3 rook lattice: 720 relabelings
    let rows = vec![
        vec![0.70, 0.20, 0.10],
        vec![0.65, 0.25, 0.10],
        vec![0.55, 0.30, 0.15],
        vec![0.30, 0.45, 0.25],
        vec![0.25, 0.45, 0.30],
        vec![0.20, 0.50, 0.30],
    ];
    let sample = CompositionSample::from_rows(rows, None)?;
    let w = SpatialWeights::standardized_lattice(2, 3, Contiguity::Rook)?;

    let dist = exact_distribution(&sample, &w, 9)?;
    println!("relabelings: {}", dist.values.len());
    println!("observed:    {:+.6}", dist.observed);
    println!("mean:        {:+.6}  (theory: {:+.6})", dist.mean(), -1.0 / 5.0);
    println!("sd:          {:.6}", dist.sd());

    let pv = p_values(&dist, Correction::Raw)?;
    println!(
        "p-values:    positive {:.4}, negative {:.4}, two-sided {:.4}",
        pv.p_pos, pv.p_neg, pv.p_two
    );

    let cv = critical_values(&dist, 0.05)?;
    println!("critical:    [{:+.4}, {:+.4}] at alpha = 0.05", cv.lower, cv.upper);

    // the identity relabeling is always part of the enumeration, so the
    // positive p-value can never drop below 1/n!
    assert!(pv.p_pos >= 1.0 / 720.0);
    Ok(())
}

//! The compositional autocorrelation statistic on three archetypal fields:
//! clustered, checkerboard, and identical, next to the componentwise Moran
//! average and the closed-form randomization moments.
//!
//! Run with: cargo run --example reyes_statistic

use reyes::geometry::CompositionSample;
use reyes::statistic::{moran_mean, reyes_i_or_bound, ReyesStatistic};
use reyes::weights::{Contiguity, SpatialWeights};

fn main() -> reyes::Result<()> {
    let w = SpatialWeights::standardized_lattice(4, 4, Contiguity::Rook)?;
    let a = vec![0.6, 0.3, 0.1];
    let b = vec![0.1, 0.3, 0.6];

    // two blocks of similar compositions -> positive autocorrelation
    let clustered: Vec<Vec<f64>> = (0..16)
        .map(|i| if i < 8 { a.clone() } else { b.clone() })
        .collect();
    // alternating compositions -> every neighbor is the opposite -> -1
    let checkerboard: Vec<Vec<f64>> = (0..16)
        .map(|i| {
            let (r, c) = (i / 4, i % 4);
            if (r + c) % 2 == 0 {
                a.clone()
            } else {
                b.clone()
            }
        })
        .collect();
    // one composition copied everywhere -> the statistic meets its bound
    let identical: Vec<Vec<f64>> = vec![a.clone(); 16];

    for (label, rows) in [
        ("clustered", clustered),
        ("checkerboard", checkerboard),
        ("identical", identical),
    ] {
        let sample = CompositionSample::from_rows(rows, None)?;
        let (value, bound) = reyes_i_or_bound(&sample, &w)?;
        println!("{label:>12}: I_a = {value:+.4}, bound = {bound:.4}");
    }

    // full statistic with closed-form moments on a mixed field
    let mixed: Vec<Vec<f64>> = (0..16)
        .map(|i| {
            let t = i as f64 / 15.0;
            vec![0.2 + 0.5 * t, 0.5 - 0.3 * t, 0.3 - 0.2 * t + 0.01 * (i % 3) as f64]
        })
        .collect();
    let sample = CompositionSample::from_rows(mixed, None)?;
    let stat = ReyesStatistic::compute(&sample, &w)?;
    println!(
        "\ngradient field: I_a = {:+.4} (bound {:.4}), E_R = {:+.4}, E_R(I^2) = {:.4}, var_R = {:.4}",
        stat.value, stat.upper_bound, stat.e_r, stat.e_r2, stat.var_r
    );

    // the componentwise Moran average sees each closed part separately
    let moran = moran_mean(&sample, &w)?;
    println!(
        "componentwise:  I_m = {:+.4} from {:?}",
        moran.value,
        moran
            .component_values
            .iter()
            .map(|v| format!("{v:+.3}"))
            .collect::<Vec<_>>()
    );
    Ok(())
}

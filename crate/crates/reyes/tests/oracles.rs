//! Independent oracles for the statistic and its permutation distribution:
//! a from-scratch evaluation path that re-centers and re-transforms per
//! relabeling using only the double-sum inner product, plus moment checks
//! against full enumeration.

use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use reyes::geometry::{ilr_inverse, Composition, CompositionSample};
use reyes::inference::{exact_distribution, monte_carlo_distribution, p_values, Correction};
use reyes::statistic::{expected_value_randomization, reyes_i};
use reyes::validation::{build_report, validate_cell};
use reyes::weights::{
    from_edge_list, row_standardize, Contiguity, IslandPolicy, SpatialWeights,
};

fn random_rows(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(0.05..1.0)).collect())
        .collect()
}

fn path_weights(n: usize) -> SpatialWeights {
    let ids: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let edges: Vec<(String, String)> = (0..n - 1)
        .map(|i| (i.to_string(), (i + 1).to_string()))
        .collect();
    row_standardize(&from_edge_list(&edges, &ids).unwrap(), IslandPolicy::Error).unwrap()
}

/// All permutations of 0..n in lexicographic order, generated recursively —
/// independent of the library's rank unranking.
fn lexicographic_permutations(n: usize) -> Vec<Vec<usize>> {
    fn recurse(prefix: &mut Vec<usize>, remaining: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for idx in 0..remaining.len() {
            let v = remaining.remove(idx);
            prefix.push(v);
            recurse(prefix, remaining, out);
            prefix.pop();
            remaining.insert(idx, v);
        }
    }
    let mut out = Vec::new();
    recurse(&mut Vec::new(), &mut (0..n).collect(), &mut out);
    out
}

/// From-scratch statistic: close the rows, recompute the geometric center,
/// take deviations, and evaluate Σᵢⱼ wᵢⱼ ⟨zᵢ, zⱼ⟩ₐ / Σₖ ⟨zₖ, zₖ⟩ₐ with the
/// double-sum inner product only. No ilr coordinates, no caching.
fn naive_reyes_i(rows: &[Vec<f64>], w: &SpatialWeights) -> f64 {
    let n = rows.len();
    let comps: Vec<Composition> = rows.iter().map(|r| Composition::new(r).unwrap()).collect();
    let d = comps[0].dim();
    let mut log_means = vec![0.0; d];
    for c in &comps {
        for (j, &p) in c.parts().iter().enumerate() {
            log_means[j] += p.ln();
        }
    }
    let g_parts: Vec<f64> = log_means.iter().map(|s| (s / n as f64).exp()).collect();
    let g = Composition::new(&g_parts).unwrap();
    let z: Vec<Composition> = comps
        .iter()
        .map(|c| c.perturb_inverse(&g).unwrap())
        .collect();

    let mut numerator = 0.0;
    for (i, j, v) in w.entries() {
        numerator += v * z[i].aitchison_inner(&z[j]).unwrap();
    }
    let denominator: f64 = z.iter().map(|zi| zi.aitchison_inner(zi).unwrap()).sum();
    numerator / denominator
}

#[test]
fn exact_distribution_matches_the_naive_oracle_on_720_permutations() {
    let rows = random_rows(6, 3, 606);
    let sample = CompositionSample::from_rows(rows.clone(), None).unwrap();
    let w = SpatialWeights::standardized_lattice(2, 3, Contiguity::Rook).unwrap();
    let dist = exact_distribution(&sample, &w, 9).unwrap();
    assert_eq!(dist.values.len(), 720);

    let perms = lexicographic_permutations(6);
    for (value, perm) in dist.values.iter().zip(&perms) {
        let permuted: Vec<Vec<f64>> = perm.iter().map(|&p| rows[p].clone()).collect();
        let oracle = naive_reyes_i(&permuted, &w);
        assert!(
            (value - oracle).abs() <= 1e-12,
            "perm {perm:?}: engine {value} vs oracle {oracle}"
        );
    }
}

#[test]
fn statistic_matches_the_naive_oracle_across_structures() {
    for (seed, w) in [
        (1u64, SpatialWeights::standardized_lattice(3, 3, Contiguity::Queen).unwrap()),
        (2, SpatialWeights::standardized_lattice(4, 4, Contiguity::Rook).unwrap()),
        (3, path_weights(7)),
    ] {
        let n = w.n();
        let rows = random_rows(n, 4, 700 + seed);
        let sample = CompositionSample::from_rows(rows.clone(), None).unwrap();
        let fast = reyes_i(&sample, &w).unwrap();
        let slow = naive_reyes_i(&rows, &w);
        assert!((fast - slow).abs() <= 1e-12, "{fast} vs {slow}");
    }
}

#[test]
fn lag_through_the_inverse_transform_agrees_with_bilinear_expansion() {
    // z̃ᵢ mapped back to the simplex from the coordinate-space lag, paired
    // with zᵢ through the double-sum inner product
    let rows = random_rows(9, 3, 42);
    let sample = CompositionSample::from_rows(rows.clone(), None).unwrap();
    let w = SpatialWeights::standardized_lattice(3, 3, Contiguity::Queen).unwrap();

    let centered = sample.center().unwrap();
    let coords = centered.ilr_coords().unwrap();
    let k = 2;
    let psi = sample.psi();
    let mut numerator = 0.0;
    for i in 0..9 {
        let mut lag = vec![0.0; k];
        for &(j, v) in w.neighbors(i) {
            for r in 0..k {
                lag[r] += v * coords[j * k + r];
            }
        }
        let lag_comp = ilr_inverse(&lag, psi).unwrap();
        let zi = centered.composition(i).unwrap();
        numerator += zi.aitchison_inner(&lag_comp).unwrap();
    }
    let denominator: f64 = (0..9)
        .map(|i| {
            let zi = centered.composition(i).unwrap();
            zi.aitchison_inner(&zi).unwrap()
        })
        .sum();

    let direct = reyes_i(&sample, &w).unwrap();
    assert!(
        (numerator / denominator - direct).abs() <= 1e-10,
        "{} vs {}",
        numerator / denominator,
        direct
    );
}

#[test]
fn exact_mean_equals_the_first_moment_for_small_n() {
    // full-enumeration mean hits −1/(n−1) to machine precision
    for (n, w) in [
        (4, SpatialWeights::standardized_lattice(2, 2, Contiguity::Queen).unwrap()),
        (5, path_weights(5)),
        (6, SpatialWeights::standardized_lattice(2, 3, Contiguity::Rook).unwrap()),
        (7, path_weights(7)),
    ] {
        for trial in 0..5 {
            let rows = random_rows(n, 3, 1000 + n as u64 * 10 + trial);
            let sample = CompositionSample::from_rows(rows, None).unwrap();
            let dist = exact_distribution(&sample, &w, 9).unwrap();
            let expect = expected_value_randomization(n).unwrap();
            assert!(
                (dist.mean() - expect).abs() <= 1e-12,
                "n={n} trial={trial}: mean {} vs {}",
                dist.mean(),
                expect
            );
        }
    }
}

#[test]
fn monte_carlo_p_tracks_exact_p_within_binomial_error() {
    let rows = random_rows(6, 3, 77);
    let sample = CompositionSample::from_rows(rows, None).unwrap();
    let w = SpatialWeights::standardized_lattice(2, 3, Contiguity::Rook).unwrap();
    let exact = exact_distribution(&sample, &w, 9).unwrap();
    let p_exact = p_values(&exact, Correction::Raw).unwrap().p_pos;

    let b = 20_000;
    let mc = monte_carlo_distribution(&sample, &w, b, 5).unwrap();
    let p_hat = p_values(&mc, Correction::Raw).unwrap().p_pos;
    let tolerance = 3.0 * (p_exact * (1.0 - p_exact) / b as f64).sqrt();
    assert!(
        (p_hat - p_exact).abs() <= tolerance,
        "p_hat {p_hat} vs exact {p_exact} (tolerance {tolerance})"
    );
}

#[test]
fn closed_form_second_moment_deviates_and_enumeration_stays_a_variance() {
    // The closed-form cross term disagrees with enumeration on these
    // structures; the validation cell must quantify the gap, and the
    // enumerated route must always yield a nonnegative variance.
    let mut cells = Vec::new();
    for (label, w) in [
        (
            "queen 2x2",
            SpatialWeights::standardized_lattice(2, 2, Contiguity::Queen).unwrap(),
        ),
        (
            "rook 2x3",
            SpatialWeights::standardized_lattice(2, 3, Contiguity::Rook).unwrap(),
        ),
    ] {
        for idx in 0..5 {
            let rows = random_rows(w.n(), 3, 2_000 + idx);
            let sample = CompositionSample::from_rows(rows, None).unwrap();
            let cell = validate_cell(&sample, &w, label, idx as usize, 9, 1e-8).unwrap();
            assert!(cell.enumerated_var >= -1e-12);
            cells.push(cell);
        }
    }
    let report = build_report(cells, 1e-8);
    assert!(
        !report.all_within_tolerance,
        "expected the closed-form cross term to deviate from enumeration"
    );
    assert!(report.max_rel_deviation > 1e-8);
}

#[test]
fn closed_form_variance_is_nonnegative_on_larger_lattices() {
    // The small-structure sign defect fades with size: audit 100 random
    // instances on a 5x5 queen lattice.
    let w = SpatialWeights::standardized_lattice(5, 5, Contiguity::Queen).unwrap();
    let e_r = expected_value_randomization(25).unwrap();
    for seed in 0..100 {
        let rows = random_rows(25, 3, 9_000 + seed);
        let sample = CompositionSample::from_rows(rows, None).unwrap();
        let sm = reyes::statistic::second_moment_randomization(&sample, &w).unwrap();
        assert!(
            sm.e_r2 - e_r * e_r >= 0.0,
            "seed {seed}: closed-form variance negative on 5x5 queen"
        );
    }
}

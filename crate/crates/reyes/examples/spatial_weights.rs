//! Building spatial weights: lattice contiguity, edge lists, row
//! standardization, and the scalar summaries used by the moment formulas.
//!
//! Run with: cargo run --example spatial_weights

use reyes::weights::{
    from_edge_list, lattice_weights, row_standardize, weight_summaries, Contiguity, IslandPolicy,
};

fn main() -> reyes::Result<()> {
    // queen vs rook neighborhoods on a 3x3 grid
    for criterion in [Contiguity::Rook, Contiguity::Queen] {
        let w = lattice_weights(3, 3, criterion)?;
        let degrees: Vec<usize> = (0..9).map(|i| w.neighbors(i).len()).collect();
        println!("{criterion} degrees: {degrees:?}");
    }

    // row standardization makes every row sum to one, so S0 = n
    let w = row_standardize(&lattice_weights(3, 3, Contiguity::Rook)?, IslandPolicy::Error)?;
    let s = weight_summaries(&w)?;
    println!("standardized rook 3x3: S0 = {}, c_i = {:?}", s.s0, &s.c[..3]);

    // arbitrary adjacency from an edge list; islands are a policy decision
    let ids: Vec<String> = ["A", "B", "C", "D"].iter().map(|s| s.to_string()).collect();
    let edges: Vec<(String, String)> = [("A", "B"), ("B", "C"), ("A", "C")]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    let raw = from_edge_list(&edges, &ids)?;
    match row_standardize(&raw, IslandPolicy::Error) {
        Err(e) => println!("island with error policy: {e}"),
        Ok(_) => unreachable!("D has no neighbors"),
    }
    let dropped = row_standardize(&raw, IslandPolicy::DropUnit)?;
    println!(
        "drop policy keeps {:?}, S0 = {}",
        dropped.unit_ids(),
        weight_summaries(&dropped)?.s0
    );
    Ok(())
}

//! Sparse spatial weight matrices: lattice contiguity, edge lists, row
//! standardization, and the scalar summaries consumed by the moment formulas.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::KahanSum;

/// Neighborhood definition on a grid: rook = 4 orthogonal neighbors,
/// queen = 8 neighbors including diagonals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Contiguity {
    Queen,
    Rook,
}

impl std::fmt::Display for Contiguity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Contiguity::Queen => write!(f, "queen"),
            Contiguity::Rook => write!(f, "rook"),
        }
    }
}

/// What to do with units that have no neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IslandPolicy {
    /// Fail with the offending unit id.
    Error,
    /// Remove islands (repeatedly, if removals create new ones) and renumber.
    DropUnit,
}

/// Sparse n×n spatial weights stored as per-row sorted neighbor lists.
/// Diagonal entries are always absent; stored weights are strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialWeights {
    n: usize,
    /// rows[i] holds (j, w_ij) sorted by j.
    rows: Vec<Vec<(usize, f64)>>,
    standardized: bool,
    unit_ids: Vec<String>,
}

/// Scalar summaries of a standardized weight matrix: S₀ = Σᵢⱼ wᵢⱼ,
/// cᵢ = Σⱼ wᵢⱼ², and the symmetric cross products cᵢⱼ = Σₖ wᵢₖ wⱼₖ.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightSummaries {
    pub s0: f64,
    pub c: Vec<f64>,
    /// (i, j, cᵢⱼ) for i < j with cᵢⱼ > 0; cᵢⱼ is symmetric.
    pub cross: Vec<(usize, usize, f64)>,
}

impl WeightSummaries {
    /// Σ over ordered pairs i ≠ j of cᵢⱼ.
    pub fn cross_total(&self) -> f64 {
        2.0 * self.cross.iter().map(|&(_, _, v)| v).sum::<f64>()
    }
}

/// Binary contiguity weights on a rows×cols lattice, row-major unit order.
/// Not yet standardized.
pub fn lattice_weights(rows: usize, cols: usize, criterion: Contiguity) -> Result<SpatialWeights> {
    if rows < 2 || cols < 2 {
        return Err(Error::InvalidParameter(format!(
            "lattice needs rows >= 2 and cols >= 2, got {rows}x{cols}"
        )));
    }
    let n = rows * cols;
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let offsets: &[(isize, isize)] = match criterion {
        Contiguity::Rook => &[(0, 1), (1, 0), (0, -1), (-1, 0)],
        Contiguity::Queen => &[
            (-1, -1),
            (-1, 0),
            (-1, 1),
            (0, -1),
            (0, 1),
            (1, -1),
            (1, 0),
            (1, 1),
        ],
    };
    for r in 0..rows {
        for c in 0..cols {
            let i = r * cols + c;
            for &(dr, dc) in offsets {
                let (rr, cc) = (r as isize + dr, c as isize + dc);
                if rr >= 0 && rr < rows as isize && cc >= 0 && cc < cols as isize {
                    adj[i].push((rr as usize * cols + cc as usize, 1.0));
                }
            }
            adj[i].sort_unstable_by_key(|&(j, _)| j);
        }
    }
    Ok(SpatialWeights {
        n,
        rows: adj,
        standardized: false,
        unit_ids: (0..n).map(|i| i.to_string()).collect(),
    })
}

/// Symmetric binary weights from an undirected edge list over labeled units.
/// Duplicate edges collapse; self edges and unknown labels are rejected.
pub fn from_edge_list(edges: &[(String, String)], ids: &[String]) -> Result<SpatialWeights> {
    let n = ids.len();
    let index: std::collections::HashMap<&str, usize> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    if index.len() != n {
        let dup = ids
            .iter()
            .find(|id| ids.iter().filter(|o| o == id).count() > 1)
            .unwrap();
        return Err(Error::DuplicateId { id: dup.clone() });
    }
    let mut adj: Vec<std::collections::BTreeSet<usize>> = vec![Default::default(); n];
    for (a, b) in edges {
        let &i = index
            .get(a.as_str())
            .ok_or_else(|| Error::UnknownLabel { label: a.clone() })?;
        let &j = index
            .get(b.as_str())
            .ok_or_else(|| Error::UnknownLabel { label: b.clone() })?;
        if i == j {
            return Err(Error::SelfEdge { label: a.clone() });
        }
        adj[i].insert(j);
        adj[j].insert(i);
    }
    Ok(SpatialWeights {
        n,
        rows: adj
            .into_iter()
            .map(|set| set.into_iter().map(|j| (j, 1.0)).collect())
            .collect(),
        standardized: false,
        unit_ids: ids.to_vec(),
    })
}

/// Scale every row to sum to one. Units without neighbors are handled per
/// `policy`; with `DropUnit`, removal repeats until no islands remain.
pub fn row_standardize(w: &SpatialWeights, policy: IslandPolicy) -> Result<SpatialWeights> {
    let mut keep: Vec<usize> = (0..w.n).collect();
    let mut rows = w.rows.clone();

    loop {
        let island = keep
            .iter()
            .position(|&orig| rows[orig].is_empty())
            .map(|pos| keep[pos]);
        match island {
            None => break,
            Some(orig) => match policy {
                IslandPolicy::Error => {
                    return Err(Error::IslandUnit {
                        unit: w.unit_ids[orig].clone(),
                    })
                }
                IslandPolicy::DropUnit => {
                    keep.retain(|&k| k != orig);
                    if keep.is_empty() {
                        return Err(Error::IslandUnit {
                            unit: w.unit_ids[orig].clone(),
                        });
                    }
                    for row in rows.iter_mut() {
                        row.retain(|&(j, _)| j != orig);
                    }
                }
            },
        }
    }

    let remap: std::collections::HashMap<usize, usize> = keep
        .iter()
        .enumerate()
        .map(|(new, &orig)| (orig, new))
        .collect();
    let out_rows: Vec<Vec<(usize, f64)>> = keep
        .iter()
        .map(|&orig| {
            let total: f64 = rows[orig].iter().map(|&(_, v)| v).sum();
            rows[orig]
                .iter()
                .map(|&(j, v)| (remap[&j], v / total))
                .collect()
        })
        .collect();
    Ok(SpatialWeights {
        n: keep.len(),
        rows: out_rows,
        standardized: true,
        unit_ids: keep.iter().map(|&i| w.unit_ids[i].clone()).collect(),
    })
}

/// S₀, cᵢ, and cᵢⱼ for a standardized matrix.
pub fn weight_summaries(w: &SpatialWeights) -> Result<WeightSummaries> {
    if !w.standardized {
        return Err(Error::NotStandardized);
    }
    let mut s0 = KahanSum::new();
    let mut c = vec![0.0; w.n];
    for (i, row) in w.rows.iter().enumerate() {
        let mut ci = KahanSum::new();
        for &(_, v) in row {
            s0.add(v);
            ci.add(v * v);
        }
        c[i] = ci.value();
    }

    // c_ij = Σ_k w_ik w_jk: accumulate over in-neighbor lists per column k.
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); w.n];
    for (i, row) in w.rows.iter().enumerate() {
        for &(j, v) in row {
            columns[j].push((i, v));
        }
    }
    let mut cross_map: std::collections::BTreeMap<(usize, usize), f64> = Default::default();
    for column in &columns {
        for (a, &(i, wi)) in column.iter().enumerate() {
            for &(j, wj) in column.iter().skip(a + 1) {
                *cross_map.entry((i.min(j), i.max(j))).or_insert(0.0) += wi * wj;
            }
        }
    }
    let cross = cross_map
        .into_iter()
        .map(|((i, j), v)| (i, j, v))
        .collect();
    Ok(WeightSummaries {
        s0: s0.value(),
        c,
        cross,
    })
}

impl SpatialWeights {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    pub fn unit_ids(&self) -> &[String] {
        &self.unit_ids
    }

    /// Neighbors of unit i as (index, weight), sorted by index.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// All stored entries flattened as (i, j, w_ij) in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, v)| (i, j, v)))
    }

    /// Number of stored (nonzero) entries.
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    /// Dense copy, mainly for oracles and small systems.
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for (i, j, v) in self.entries() {
            m[(i, j)] = v;
        }
        m
    }

    /// Convenience: standardized lattice weights.
    pub fn standardized_lattice(
        rows: usize,
        cols: usize,
        criterion: Contiguity,
    ) -> Result<SpatialWeights> {
        row_standardize(&lattice_weights(rows, cols, criterion)?, IslandPolicy::Error)
    }
}

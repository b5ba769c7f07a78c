//! Orthonormal ilr bases stored as contrast matrices.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// How the orthonormal basis of the clr hyperplane is built. The statistic is
/// invariant to this choice; two schemes exist so that invariance can be tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContrastScheme {
    /// Balances from Gram–Schmidt on part-difference directions: row i has
    /// its first i entries equal to sqrt(1/(i(i+1))) and entry i+1 equal to
    /// −sqrt(i/(i+1)).
    HelmertLike,
    /// Pivot balances: row i contrasts part i against the geometric mean of
    /// the remaining parts.
    Pivot,
}

/// A (D−1)×D matrix whose rows are clr images of an orthonormal simplex
/// basis: rows sum to zero, ΨΨᵀ = I, and ΨᵀΨ = I − J/D.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastMatrix {
    d: usize,
    scheme: ContrastScheme,
    /// Row-major (D−1)×D.
    rows: Vec<f64>,
}

impl ContrastMatrix {
    /// Build the contrast matrix for D parts. Deterministic per (D, scheme).
    pub fn new(d: usize, scheme: ContrastScheme) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParameter(format!(
                "contrast matrix needs D >= 2, got {d}"
            )));
        }
        let mut rows = vec![0.0; (d - 1) * d];
        match scheme {
            ContrastScheme::HelmertLike => {
                for i in 1..d {
                    let row = &mut rows[(i - 1) * d..i * d];
                    let head = (1.0 / (i as f64 * (i as f64 + 1.0))).sqrt();
                    for slot in row.iter_mut().take(i) {
                        *slot = head;
                    }
                    row[i] = -(i as f64 / (i as f64 + 1.0)).sqrt();
                }
            }
            ContrastScheme::Pivot => {
                for i in 0..d - 1 {
                    let row = &mut rows[i * d..(i + 1) * d];
                    let rest = (d - 1 - i) as f64;
                    row[i] = (rest / (rest + 1.0)).sqrt();
                    let tail = -(1.0 / (rest * (rest + 1.0))).sqrt();
                    for slot in row.iter_mut().skip(i + 1) {
                        *slot = tail;
                    }
                }
            }
        }
        Ok(ContrastMatrix { d, scheme, rows })
    }

    /// Part count D.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Coordinate count D−1.
    pub fn n_coords(&self) -> usize {
        self.d - 1
    }

    pub fn scheme(&self) -> ContrastScheme {
        self.scheme
    }

    /// Row r as a slice of length D.
    pub fn row(&self, r: usize) -> &[f64] {
        &self.rows[r * self.d..(r + 1) * self.d]
    }

    /// Dense copy, (D−1)×D.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.d - 1, self.d, &self.rows)
    }

    /// Check the defining identities: zero row sums (1e-12), ΨΨᵀ = I
    /// and ΨᵀΨ + J/D = I (both 1e-10).
    pub fn validate(&self) -> Result<()> {
        let d = self.d;
        for r in 0..self.n_coords() {
            let sum: f64 = self.row(r).iter().sum();
            if sum.abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "contrast row {r} sums to {sum:e}, expected 0"
                )));
            }
        }
        let psi = self.to_matrix();
        let gram = &psi * psi.transpose();
        for i in 0..d - 1 {
            for j in 0..d - 1 {
                let expected = if i == j { 1.0 } else { 0.0 };
                if (gram[(i, j)] - expected).abs() > 1e-10 {
                    return Err(Error::InvalidParameter(format!(
                        "contrast rows not orthonormal at ({i}, {j})"
                    )));
                }
            }
        }
        let proj = psi.transpose() * &psi;
        for i in 0..d {
            for j in 0..d {
                let expected = if i == j { 1.0 - 1.0 / d as f64 } else { -1.0 / d as f64 };
                if (proj[(i, j)] - expected).abs() > 1e-10 {
                    return Err(Error::InvalidParameter(format!(
                        "contrast projector wrong at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(())
    }
}

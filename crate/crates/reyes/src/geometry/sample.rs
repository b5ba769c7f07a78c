//! Samples of compositions indexed by spatial unit.

use once_cell::sync::OnceCell;

use crate::error::{Error, Result};
use crate::geometry::{ilr_inverse, Composition, ContrastMatrix, ContrastScheme, MIN_PART};

use super::zeros::{replace_zeros, DeltaPolicy};

/// n compositions over D parts, with ilr coordinates derived lazily under a
/// chosen contrast matrix.
///
/// Raw values are stored as read: nonnegative entries are accepted at
/// construction so that zero replacement can run first, and strict positivity
/// is enforced when log-ratio coordinates are requested.
#[derive(Debug)]
pub struct CompositionSample {
    n: usize,
    d: usize,
    /// Row-major n×D raw matrix, not necessarily closed.
    raw: Vec<f64>,
    unit_ids: Vec<String>,
    part_names: Vec<String>,
    psi: ContrastMatrix,
    coords: OnceCell<Vec<f64>>,
}

impl Clone for CompositionSample {
    fn clone(&self) -> Self {
        CompositionSample {
            n: self.n,
            d: self.d,
            raw: self.raw.clone(),
            unit_ids: self.unit_ids.clone(),
            part_names: self.part_names.clone(),
            psi: self.psi.clone(),
            coords: OnceCell::new(),
        }
    }
}

impl CompositionSample {
    /// Build a sample from raw rows. Entries must be finite and nonnegative,
    /// each row needs at least one positive entry, and ids must be unique.
    pub fn from_rows(rows: Vec<Vec<f64>>, unit_ids: Option<Vec<String>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidParameter("sample has no rows".into()));
        }
        let d = rows[0].len();
        if d < 2 {
            return Err(Error::InvalidParameter(format!(
                "compositions need at least 2 parts, got {d}"
            )));
        }
        let unit_ids =
            unit_ids.unwrap_or_else(|| (0..n).map(|i| i.to_string()).collect::<Vec<_>>());
        if unit_ids.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: unit_ids.len(),
            });
        }
        {
            let mut seen = std::collections::HashSet::new();
            for id in &unit_ids {
                if !seen.insert(id.as_str()) {
                    return Err(Error::DuplicateId { id: id.clone() });
                }
            }
        }
        let mut raw = Vec::with_capacity(n * d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::RaggedRow {
                    row: unit_ids[i].clone(),
                    expected: d,
                    found: row.len(),
                });
            }
            let mut any_positive = false;
            for &v in row {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::NegativeValue {
                        row: unit_ids[i].clone(),
                        value: v,
                    });
                }
                if v > 0.0 {
                    any_positive = true;
                }
            }
            if !any_positive {
                return Err(Error::AllZeroRow {
                    row: unit_ids[i].clone(),
                });
            }
            raw.extend_from_slice(row);
        }
        let part_names = (1..=d).map(|j| format!("part_{j}")).collect();
        Ok(CompositionSample {
            n,
            d,
            raw,
            unit_ids,
            part_names,
            psi: ContrastMatrix::new(d, ContrastScheme::HelmertLike)?,
            coords: OnceCell::new(),
        })
    }

    /// Build from already-validated compositions.
    pub fn from_compositions(comps: &[Composition]) -> Result<Self> {
        let rows: Vec<Vec<f64>> = comps.iter().map(|c| c.parts().to_vec()).collect();
        Self::from_rows(rows, None)
    }

    /// Build from ilr coordinate rows: each row is mapped back through the
    /// inverse transform under `psi`.
    pub fn from_ilr_rows(coord_rows: &[Vec<f64>], psi: &ContrastMatrix) -> Result<Self> {
        let comps: Vec<Composition> = coord_rows
            .iter()
            .map(|u| ilr_inverse(u, psi))
            .collect::<Result<_>>()?;
        let mut sample = Self::from_compositions(&comps)?;
        sample.psi = psi.clone();
        Ok(sample)
    }

    /// Replace the contrast matrix, invalidating cached coordinates.
    pub fn with_contrast(mut self, psi: ContrastMatrix) -> Result<Self> {
        if psi.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: psi.dim(),
            });
        }
        self.psi = psi;
        self.coords = OnceCell::new();
        Ok(self)
    }

    pub fn set_part_names(&mut self, names: Vec<String>) -> Result<()> {
        if names.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: names.len(),
            });
        }
        self.part_names = names;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Part count D.
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn unit_ids(&self) -> &[String] {
        &self.unit_ids
    }

    pub fn part_names(&self) -> &[String] {
        &self.part_names
    }

    pub fn psi(&self) -> &ContrastMatrix {
        &self.psi
    }

    /// Raw row i as stored (possibly containing zeros, not closed).
    pub fn raw_row(&self, i: usize) -> &[f64] {
        &self.raw[i * self.d..(i + 1) * self.d]
    }

    /// Row i as a closed composition. Fails on rows with zeros.
    pub fn composition(&self, i: usize) -> Result<Composition> {
        Composition::new(self.raw_row(i)).map_err(|e| self.tag_row(e, i))
    }

    fn tag_row(&self, e: Error, i: usize) -> Error {
        match e {
            Error::NonPositivePart { value, .. } => Error::NonPositivePart {
                row: Some(self.unit_ids[i].clone()),
                value,
            },
            other => other,
        }
    }

    /// ilr coordinates, row-major n×(D−1), computed once and cached.
    /// Fails with the offending row id if any part is zero or below the floor.
    pub fn ilr_coords(&self) -> Result<&[f64]> {
        let coords = self.coords.get_or_try_init(|| {
            let k = self.d - 1;
            let mut out = vec![0.0; self.n * k];
            let mut clr = vec![0.0; self.d];
            for i in 0..self.n {
                let row = self.raw_row(i);
                for (j, &v) in row.iter().enumerate() {
                    if v <= 0.0 || v < MIN_PART * self.d as f64 {
                        return Err(Error::NonPositivePart {
                            row: Some(self.unit_ids[i].clone()),
                            value: v,
                        });
                    }
                    clr[j] = v.ln();
                }
                let mean = clr.iter().sum::<f64>() / self.d as f64;
                for v in clr.iter_mut() {
                    *v -= mean;
                }
                for r in 0..k {
                    let mut acc = 0.0;
                    for (j, &p) in self.psi.row(r).iter().enumerate() {
                        acc += p * clr[j];
                    }
                    out[i * k + r] = acc;
                }
            }
            Ok(out)
        })?;
        Ok(coords)
    }

    /// Centered ilr coordinates: each column minus its mean. These are the
    /// coordinates of the deviations zᵢ = xᵢ ⊖ ĝ from the geometric center.
    pub fn centered_ilr(&self) -> Result<Vec<f64>> {
        let k = self.d - 1;
        let coords = self.ilr_coords()?;
        let mut means = vec![0.0; k];
        for i in 0..self.n {
            for r in 0..k {
                means[r] += coords[i * k + r];
            }
        }
        for m in means.iter_mut() {
            *m /= self.n as f64;
        }
        let mut out = coords.to_vec();
        for i in 0..self.n {
            for r in 0..k {
                out[i * k + r] -= means[r];
            }
        }
        Ok(out)
    }

    /// Closed geometric center ĝ: per-part geometric means across units.
    pub fn geometric_center(&self) -> Result<Composition> {
        let mut log_means = vec![0.0; self.d];
        for i in 0..self.n {
            for (j, &v) in self.raw_row(i).iter().enumerate() {
                if v <= 0.0 {
                    return Err(Error::NonPositivePart {
                        row: Some(self.unit_ids[i].clone()),
                        value: v,
                    });
                }
                log_means[j] += v.ln();
            }
        }
        let parts: Vec<f64> = log_means
            .iter()
            .map(|&s| (s / self.n as f64).exp())
            .collect();
        Composition::new(&parts)
    }

    /// Center the sample: zᵢ = xᵢ ⊖ ĝ. The ilr coordinates of the result sum
    /// to the zero vector.
    pub fn center(&self) -> Result<CompositionSample> {
        let g = self.geometric_center()?;
        let rows: Vec<Vec<f64>> = (0..self.n)
            .map(|i| {
                Ok(self
                    .composition(i)?
                    .perturb_inverse(&g)?
                    .parts()
                    .to_vec())
            })
            .collect::<Result<_>>()?;
        let mut out = Self::from_rows(rows, Some(self.unit_ids.clone()))?;
        out.psi = self.psi.clone();
        out.part_names = self.part_names.clone();
        Ok(out)
    }

    /// Apply multiplicative zero replacement to the raw matrix, returning a
    /// strictly positive sample with row sums preserved.
    pub fn replace_zeros(&self, policy: DeltaPolicy, delta: f64) -> Result<CompositionSample> {
        let rows: Vec<Vec<f64>> = (0..self.n).map(|i| self.raw_row(i).to_vec()).collect();
        let replaced = replace_zeros(&rows, policy, delta)?;
        let mut out = Self::from_rows(replaced, Some(self.unit_ids.clone()))?;
        out.psi = self.psi.clone();
        out.part_names = self.part_names.clone();
        Ok(out)
    }

    /// Keep only the rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<CompositionSample> {
        let rows: Vec<Vec<f64>> = indices.iter().map(|&i| self.raw_row(i).to_vec()).collect();
        let ids: Vec<String> = indices
            .iter()
            .map(|&i| self.unit_ids[i].clone())
            .collect();
        let mut out = Self::from_rows(rows, Some(ids))?;
        out.psi = self.psi.clone();
        out.part_names = self.part_names.clone();
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn toy_sample() -> CompositionSample {
        CompositionSample::from_rows(
            vec![
                vec![0.2, 0.3, 0.5],
                vec![0.1, 0.7, 0.2],
                vec![0.25, 0.25, 0.5],
                vec![0.4, 0.35, 0.25],
                vec![0.15, 0.45, 0.4],
            ],
            None,
        )
        .unwrap()
    }

    #[test]
    fn centering_makes_coordinate_columns_sum_to_zero() {
        let sample = toy_sample();
        let centered = sample.center().unwrap();
        let coords = centered.ilr_coords().unwrap();
        let k = centered.dim() - 1;
        for r in 0..k {
            let col_sum: f64 = (0..centered.n()).map(|i| coords[i * k + r]).sum();
            assert!(col_sum.abs() < 1e-10, "column {r} sums to {col_sum:e}");
        }
    }

    #[test]
    fn cached_coordinates_match_the_composition_transform() {
        let sample = toy_sample();
        let coords = sample.ilr_coords().unwrap();
        let k = sample.dim() - 1;
        for i in 0..sample.n() {
            let direct = sample.composition(i).unwrap().ilr(sample.psi()).unwrap();
            for r in 0..k {
                assert_relative_eq!(coords[i * k + r], direct[r], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn centered_ilr_matches_explicit_centering() {
        let sample = toy_sample();
        let fast = sample.centered_ilr().unwrap();
        let slow = sample.center().unwrap();
        let slow_coords = slow.ilr_coords().unwrap();
        for (a, b) in fast.iter().zip(slow_coords) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn identical_rows_center_to_the_neutral_element() {
        let sample =
            CompositionSample::from_rows(vec![vec![0.2, 0.3, 0.5]; 4], None).unwrap();
        let centered = sample.center().unwrap();
        for i in 0..4 {
            for p in centered.composition(i).unwrap().parts() {
                assert_relative_eq!(*p, 1.0 / 3.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn single_row_centers_to_neutral() {
        let sample = CompositionSample::from_rows(vec![vec![0.7, 0.1, 0.2]], None).unwrap();
        let centered = sample.center().unwrap();
        for p in centered.composition(0).unwrap().parts() {
            assert_relative_eq!(*p, 1.0 / 3.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn zeros_pass_construction_but_fail_at_transform_with_row_id() {
        let sample = CompositionSample::from_rows(
            vec![vec![0.5, 0.5, 0.0], vec![0.2, 0.3, 0.5]],
            Some(vec!["a".into(), "b".into()]),
        )
        .unwrap();
        match sample.ilr_coords() {
            Err(Error::NonPositivePart { row: Some(r), .. }) => assert_eq!(r, "a"),
            other => panic!("expected NonPositivePart for row a, got {other:?}"),
        }
    }

    #[test]
    fn construction_rejects_bad_rows() {
        assert!(matches!(
            CompositionSample::from_rows(vec![vec![0.0, 0.0]], None),
            Err(Error::AllZeroRow { .. })
        ));
        assert!(matches!(
            CompositionSample::from_rows(vec![vec![1.0, -0.5]], None),
            Err(Error::NegativeValue { .. })
        ));
        assert!(matches!(
            CompositionSample::from_rows(vec![vec![1.0, 2.0], vec![1.0]], None),
            Err(Error::RaggedRow { .. })
        ));
        assert!(matches!(
            CompositionSample::from_rows(
                vec![vec![1.0, 2.0], vec![1.0, 3.0]],
                Some(vec!["x".into(), "x".into()])
            ),
            Err(Error::DuplicateId { .. })
        ));
    }

    #[test]
    fn geometric_center_of_two_units_is_rowwise_geometric_mean() {
        let sample = CompositionSample::from_rows(
            vec![vec![0.1, 0.9], vec![0.9, 0.1]],
            None,
        )
        .unwrap();
        let g = sample.geometric_center().unwrap();
        // geometric means are equal -> center is neutral
        assert_relative_eq!(g.parts()[0], 0.5, epsilon = 1e-14);
        assert_relative_eq!(g.parts()[1], 0.5, epsilon = 1e-14);
    }
}

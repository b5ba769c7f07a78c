//! Strictly positive part vectors on the simplex and the Aitchison operations.

use crate::error::{Error, Result};
use crate::numeric::KahanSum;
use serde::{Deserialize, Serialize};

use super::contrast::ContrastMatrix;

/// Parts below this floor are rejected so that logarithms stay finite.
pub const MIN_PART: f64 = 1e-300;

/// A D-part composition: strictly positive parts that sum to the closure
/// constant `k` (default 1). Only ratios between parts carry information.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Composition {
    parts: Vec<f64>,
    k: f64,
}

/// Closure operator: rescale a positive vector so its parts sum to `k`,
/// preserving all ratios.
pub fn closure(v: &[f64], k: f64) -> Result<Composition> {
    if v.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "a composition needs at least 2 parts, got {}",
            v.len()
        )));
    }
    if !k.is_finite() || k <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "closure constant must be positive, got {k}"
        )));
    }
    for &x in v {
        if !x.is_finite() || x <= 0.0 {
            return Err(Error::NonPositivePart {
                row: None,
                value: x,
            });
        }
    }
    let total: f64 = v.iter().sum();
    let parts: Vec<f64> = v.iter().map(|&x| k * x / total).collect();
    if parts.iter().any(|&p| p < MIN_PART) {
        let worst = parts.iter().cloned().fold(f64::INFINITY, f64::min);
        return Err(Error::NonPositivePart {
            row: None,
            value: worst,
        });
    }
    Ok(Composition { parts, k })
}

impl Composition {
    /// Close `v` with the default constant k = 1.
    pub fn new(v: &[f64]) -> Result<Self> {
        closure(v, 1.0)
    }

    /// The neutral element C(1, …, 1): all parts equal.
    pub fn neutral(d: usize) -> Self {
        Composition {
            parts: vec![1.0 / d as f64; d],
            k: 1.0,
        }
    }

    pub fn parts(&self) -> &[f64] {
        &self.parts
    }

    /// Number of parts D.
    pub fn dim(&self) -> usize {
        self.parts.len()
    }

    pub fn closure_constant(&self) -> f64 {
        self.k
    }

    fn check_same_shape(&self, other: &Composition) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    /// Perturbation x ⊕ y = C(x₁y₁, …, x_D y_D): the simplex analogue of addition.
    pub fn perturb(&self, other: &Composition) -> Result<Composition> {
        self.check_same_shape(other)?;
        let v: Vec<f64> = self
            .parts
            .iter()
            .zip(&other.parts)
            .map(|(a, b)| a * b)
            .collect();
        closure(&v, self.k)
    }

    /// Inverse perturbation x ⊖ y = C(x₁/y₁, …, x_D/y_D).
    pub fn perturb_inverse(&self, other: &Composition) -> Result<Composition> {
        self.check_same_shape(other)?;
        let v: Vec<f64> = self
            .parts
            .iter()
            .zip(&other.parts)
            .map(|(a, b)| a / b)
            .collect();
        closure(&v, self.k)
    }

    /// Powering α ⊙ x = C(x₁^α, …, x_D^α): the simplex analogue of scaling.
    pub fn power(&self, alpha: f64) -> Result<Composition> {
        let v: Vec<f64> = self.parts.iter().map(|&x| x.powf(alpha)).collect();
        closure(&v, self.k)
    }

    /// Aitchison inner product, evaluated in its double-sum form:
    /// (1/2D) Σᵢ Σⱼ ln(xᵢ/xⱼ) ln(yᵢ/yⱼ).
    pub fn aitchison_inner(&self, other: &Composition) -> Result<f64> {
        self.check_same_shape(other)?;
        let d = self.dim();
        let lx: Vec<f64> = self.parts.iter().map(|&x| x.ln()).collect();
        let ly: Vec<f64> = other.parts.iter().map(|&y| y.ln()).collect();
        let mut acc = KahanSum::new();
        for i in 0..d {
            for j in 0..d {
                acc.add((lx[i] - lx[j]) * (ly[i] - ly[j]));
            }
        }
        Ok(acc.value() / (2.0 * d as f64))
    }

    /// Aitchison norm: sqrt of the inner product with itself.
    pub fn aitchison_norm(&self) -> f64 {
        self.aitchison_inner(self)
            .expect("same composition always shares dimensions")
            .max(0.0)
            .sqrt()
    }

    /// Centered log-ratio transform: ln(xⱼ / g(x)) with g the geometric mean.
    /// Output sums to zero.
    pub fn clr(&self) -> Vec<f64> {
        let logs: Vec<f64> = self.parts.iter().map(|&x| x.ln()).collect();
        let mean = logs.iter().sum::<f64>() / logs.len() as f64;
        logs.iter().map(|&l| l - mean).collect()
    }

    /// Isometric log-ratio coordinates under the contrast matrix `psi`:
    /// clr(x) · Ψᵀ, a length D−1 vector.
    pub fn ilr(&self, psi: &ContrastMatrix) -> Result<Vec<f64>> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: psi.dim(),
                found: self.dim(),
            });
        }
        let c = self.clr();
        Ok((0..psi.n_coords())
            .map(|r| {
                psi.row(r)
                    .iter()
                    .zip(&c)
                    .map(|(p, v)| p * v)
                    .sum::<f64>()
            })
            .collect())
    }
}

/// Inverse clr: exponentiate and close. Vectors whose entries do not sum to
/// zero are accepted; closure projects them back onto the simplex.
pub fn clr_inverse(u: &[f64]) -> Result<Composition> {
    let v: Vec<f64> = u.iter().map(|&x| x.exp()).collect();
    closure(&v, 1.0)
}

/// Inverse ilr: C(exp(u · Ψ)).
pub fn ilr_inverse(u: &[f64], psi: &ContrastMatrix) -> Result<Composition> {
    if u.len() != psi.n_coords() {
        return Err(Error::DimensionMismatch {
            expected: psi.n_coords(),
            found: u.len(),
        });
    }
    let d = psi.dim();
    let mut logs = vec![0.0; d];
    for (r, &coord) in u.iter().enumerate() {
        for (j, &p) in psi.row(r).iter().enumerate() {
            logs[j] += coord * p;
        }
    }
    clr_inverse(&logs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ContrastScheme;
    use approx::assert_relative_eq;

    #[test]
    fn closure_rescales_preserving_ratios() {
        let c = closure(&[2.0, 2.0, 2.0], 1.0).unwrap();
        assert_eq!(c.parts(), &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]);

        let c = closure(&[1.0, 1.0, 1.0, 1.0], 1.0).unwrap();
        assert_eq!(c.parts(), &[0.25, 0.25, 0.25, 0.25]);

        let c = closure(&[3.0, 1.0], 1.0).unwrap();
        assert_eq!(c.parts(), &[0.75, 0.25]);
    }

    #[test]
    fn closure_rejects_nonpositive_parts() {
        assert!(matches!(
            closure(&[1.0, 0.0], 1.0),
            Err(Error::NonPositivePart { .. })
        ));
        assert!(matches!(
            closure(&[1.0, -2.0], 1.0),
            Err(Error::NonPositivePart { .. })
        ));
        assert!(matches!(
            closure(&[1.0, f64::NAN], 1.0),
            Err(Error::NonPositivePart { .. })
        ));
    }

    #[test]
    fn perturbation_identity_and_inverse() {
        let x = Composition::new(&[0.6, 0.3, 0.1]).unwrap();
        let neutral = Composition::neutral(3);

        let same = x.perturb(&neutral).unwrap();
        for (a, b) in same.parts().iter().zip(x.parts()) {
            assert_relative_eq!(a, b, max_relative = 1e-15);
        }

        let cancel = x.perturb_inverse(&x).unwrap();
        for (a, b) in cancel.parts().iter().zip(neutral.parts()) {
            assert_relative_eq!(a, b, max_relative = 1e-15);
        }
    }

    #[test]
    fn power_fixes_equal_parts() {
        let x = Composition::new(&[0.5, 0.5]).unwrap();
        let y = x.power(2.0).unwrap();
        assert_eq!(y.parts(), &[0.5, 0.5]);
    }

    #[test]
    fn inner_product_against_frozen_constant() {
        // (1/2, 1/4, 1/4) · (1/4, 1/2, 1/4) = -(ln 2)^2 / 3, evaluated by the
        // double sum over all (i, j) pairs.
        let x = Composition::new(&[0.5, 0.25, 0.25]).unwrap();
        let y = Composition::new(&[0.25, 0.5, 0.25]).unwrap();
        let got = x.aitchison_inner(&y).unwrap();
        assert_relative_eq!(got, -0.16015100463940046, epsilon = 1e-15);
        // symmetric
        assert_relative_eq!(got, y.aitchison_inner(&x).unwrap(), epsilon = 1e-15);
    }

    #[test]
    fn inner_product_with_neutral_is_zero() {
        let neutral = Composition::neutral(3);
        let y = Composition::new(&[0.7, 0.2, 0.1]).unwrap();
        assert_relative_eq!(neutral.aitchison_inner(&y).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn norm_matches_inner_and_closed_form() {
        let x = Composition::new(&[0.3, 0.5, 0.2]).unwrap();
        assert_relative_eq!(
            x.aitchison_norm().powi(2),
            x.aitchison_inner(&x).unwrap(),
            epsilon = 1e-14
        );

        assert_eq!(Composition::neutral(3).aitchison_norm(), 0.0);

        // Two parts (0.75, 0.25): norm = ln(3)/sqrt(2).
        let two = Composition::new(&[0.75, 0.25]).unwrap();
        assert_relative_eq!(two.aitchison_norm(), 0.7768361992120932, epsilon = 1e-15);
    }

    #[test]
    fn norm_is_homogeneous_under_powering() {
        let x = Composition::new(&[0.45, 0.35, 0.2]).unwrap();
        for alpha in [-2.0, -0.5, 0.0, 1.5, 3.0] {
            let powered = x.power(alpha).unwrap();
            assert_relative_eq!(
                powered.aitchison_norm(),
                alpha.abs() * x.aitchison_norm(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn clr_of_neutral_is_zero_and_sums_to_zero() {
        let neutral = Composition::neutral(3);
        assert_eq!(neutral.clr(), vec![0.0, 0.0, 0.0]);

        let x = Composition::new(&[0.1, 0.6, 0.3]).unwrap();
        let c = x.clr();
        assert!(c.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn clr_preserves_the_inner_product() {
        let x = Composition::new(&[0.2, 0.5, 0.3]).unwrap();
        let y = Composition::new(&[0.4, 0.4, 0.2]).unwrap();
        let dot: f64 = x.clr().iter().zip(y.clr()).map(|(a, b)| a * b).sum();
        assert_relative_eq!(dot, x.aitchison_inner(&y).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn clr_round_trip() {
        let x = Composition::new(&[0.15, 0.25, 0.6]).unwrap();
        let back = clr_inverse(&x.clr()).unwrap();
        for (a, b) in back.parts().iter().zip(x.parts()) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn ilr_of_neutral_is_zero_vector() {
        let psi = ContrastMatrix::new(4, ContrastScheme::HelmertLike).unwrap();
        let u = Composition::neutral(4).ilr(&psi).unwrap();
        assert_eq!(u.len(), 3);
        for v in u {
            assert!(v.abs() < 1e-14);
        }
    }

    #[test]
    fn ilr_round_trip() {
        let psi = ContrastMatrix::new(3, ContrastScheme::HelmertLike).unwrap();
        let x = Composition::new(&[0.12, 0.58, 0.3]).unwrap();
        let u = x.ilr(&psi).unwrap();
        let back = ilr_inverse(&u, &psi).unwrap();
        for (a, b) in back.parts().iter().zip(x.parts()) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn ilr_is_linear_over_perturbation_and_powering() {
        let psi = ContrastMatrix::new(3, ContrastScheme::Pivot).unwrap();
        let x = Composition::new(&[0.2, 0.3, 0.5]).unwrap();
        let y = Composition::new(&[0.6, 0.1, 0.3]).unwrap();
        let (alpha, beta) = (1.7, -0.4);
        let combined = x
            .power(alpha)
            .unwrap()
            .perturb(&y.power(beta).unwrap())
            .unwrap();
        let lhs = combined.ilr(&psi).unwrap();
        let ux = x.ilr(&psi).unwrap();
        let uy = y.ilr(&psi).unwrap();
        for (i, l) in lhs.iter().enumerate() {
            assert_relative_eq!(*l, alpha * ux[i] + beta * uy[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let x = Composition::new(&[0.5, 0.5]).unwrap();
        let y = Composition::new(&[0.2, 0.3, 0.5]).unwrap();
        assert!(matches!(
            x.perturb(&y),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            x.aitchison_inner(&y),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}

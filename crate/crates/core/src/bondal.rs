//! Minimal Bondal groupoid on pairs (B, A) with A unipotent upper triangular,
//! and the morphism from S^local into it.

use crate::error::{Error, Result};
use crate::groupoid::GroupoidPoint;
use crate::linalg::{ComplexMatrix, ONE, ZERO};
use crate::stokes::SteinbergSection;
use itertools::Itertools;
use serde::{Deserialize, Serialize};

pub const BONDAL_TOL: f64 = 1e-9;

/// max defect of `m` from unit-diagonal upper triangular.
pub fn unipotent_defect(m: &ComplexMatrix) -> f64 {
    let d = m.dim();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        worst = worst.max((m[(i, i)] - ONE).norm());
        for j in 0..i {
            worst = worst.max(m[(i, j)].norm());
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BondalPoint {
    #[serde(rename = "B")]
    pub b: ComplexMatrix,
    #[serde(rename = "A")]
    pub a: ComplexMatrix,
}

impl BondalPoint {
    /// Checked constructor: A and B^{-T}AB^{-1} must be unipotent upper triangular.
    pub fn new(b: ComplexMatrix, a: ComplexMatrix) -> Result<Self> {
        let p = Self { b, a };
        if !p.is_member()? {
            return Err(Error::InvalidPoint("not a member of the Bondal groupoid".into()));
        }
        Ok(p)
    }

    /// A pair with the groupoid's shape but no triangularity requirement.
    pub fn pair(b: ComplexMatrix, a: ComplexMatrix) -> Self {
        Self { b, a }
    }

    pub fn unit(a: ComplexMatrix) -> Result<Self> {
        Self::new(ComplexMatrix::identity(a.dim()), a)
    }

    pub fn source(&self) -> &ComplexMatrix {
        &self.a
    }

    /// B^{-T} A B^{-1}
    pub fn target(&self) -> Result<ComplexMatrix> {
        let b_inv = self.b.inverse()?;
        Ok(&(&b_inv.transpose() * &self.a) * &b_inv)
    }

    pub fn is_member(&self) -> Result<bool> {
        Ok(unipotent_defect(&self.a) < BONDAL_TOL && unipotent_defect(&self.target()?) < BONDAL_TOL)
    }

    /// (B₁B₂, A₂), defined when A₁ = t(B₂, A₂).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        let t = other.target()?;
        let gap = self.a.max_abs_diff(&t) / t.max_abs().max(1.0);
        if gap > BONDAL_TOL {
            return Err(Error::NotComposable(format!("source does not match target ({gap:e})")));
        }
        Ok(Self { b: &self.b * &other.b, a: other.a.clone() })
    }

    pub fn inverse(&self) -> Result<Self> {
        Ok(Self { b: self.b.inverse()?, a: self.target()? })
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.b.max_abs_diff(&other.b).max(self.a.max_abs_diff(&other.a))
    }

    /// Entries rounded to a 1e-8 grid, for injectivity probes.
    pub fn quantized_key(&self) -> Vec<i64> {
        self.b
            .as_slice()
            .iter()
            .chain(self.a.as_slice())
            .flat_map(|z| [(z.re * 1e8).round() as i64, (z.im * 1e8).round() as i64])
            .collect()
    }
}

impl SteinbergSection {
    /// (B, S̃₁(s)^{-T}).
    pub fn embed_slocal(&self, p: &GroupoidPoint) -> Result<BondalPoint> {
        Ok(BondalPoint::pair(p.b.clone(), self.build_s(1, &p.s)?.inverse_transpose()?))
    }
}

/// A permutation π with P·m·Pᵀ unipotent upper triangular, P_{i,π(i)} = 1,
/// if one exists.
pub fn triangularizing_permutation(m: &ComplexMatrix, tol: f64) -> Option<Vec<usize>> {
    let d = m.dim();
    (0..d).permutations(d).find(|perm| {
        let conj = ComplexMatrix::from_fn(d, |i, j| m[(perm[i], perm[j])]);
        unipotent_defect(&conj) < tol
    })
}

/// Permutation matrix with P_{i,π(i)} = 1.
pub fn permutation_matrix(perm: &[usize]) -> ComplexMatrix {
    ComplexMatrix::from_fn(perm.len(), |i, j| if perm[i] == j { ONE } else { ZERO })
}

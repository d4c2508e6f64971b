//! dζ-coefficient of the connection form α̂ and its four symmetries.

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::structural::StructuralSet;
use serde::{Deserialize, Serialize};

const ANTI_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryKind {
    Cyclic,
    Anti,
    CReal,
    ThetaReal,
}

impl SymmetryKind {
    pub const ALL: [SymmetryKind; 4] = [Self::Cyclic, Self::Anti, Self::CReal, Self::ThetaReal];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TodaInput {
    pub n: usize,
    pub w: Vec<f64>,
    /// Stands in for x·w_x.
    pub v: Vec<f64>,
    pub x: f64,
    pub zeta: C64,
}

impl TodaInput {
    pub fn new(n: usize, w: Vec<f64>, v: Vec<f64>, x: f64, zeta: C64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidDimension("n must be at least 1".into()));
        }
        if w.len() != n + 1 || v.len() != n + 1 {
            return Err(Error::PreconditionViolation(format!("w and v must have length {}", n + 1)));
        }
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::PreconditionViolation(format!("x must be positive, got {x}")));
        }
        Ok(Self { n, w, v, x, zeta })
    }

    /// max_i |w_i + w_{n−i}|, |v_i + v_{n−i}|
    pub fn anti_symmetry_defect(&self) -> f64 {
        let n = self.n;
        (0..=n).map(|i| (self.w[i] + self.w[n - i]).abs().max((self.v[i] + self.v[n - i]).abs())).fold(0.0, f64::max)
    }

    pub fn with_zeta(&self, zeta: C64) -> Self {
        Self { zeta, ..self.clone() }
    }
}

/// W = e^{−w} Π e^{w}
pub fn build_w(structs: &StructuralSet, w: &[f64]) -> Result<ComplexMatrix> {
    if w.len() != structs.dim() {
        return Err(Error::PreconditionViolation(format!("w must have length {}", structs.dim())));
    }
    Ok(ComplexMatrix::from_fn(structs.dim(), |i, j| structs.pi[(i, j)] * (w[j] - w[i]).exp()))
}

/// A(ζ) = −ζ^{−2} Wᵀ − ζ^{−1} diag(v) + x² W
pub fn alpha_coeff(structs: &StructuralSet, inp: &TodaInput) -> Result<ComplexMatrix> {
    if inp.zeta.norm() == 0.0 {
        return Err(Error::PoleEvaluation);
    }
    if inp.v.len() != structs.dim() {
        return Err(Error::PreconditionViolation(format!("v must have length {}", structs.dim())));
    }
    let w = build_w(structs, &inp.w)?;
    let z1 = inp.zeta.inv();
    let z2 = z1 * z1;
    let v = ComplexMatrix::diag(&inp.v.iter().map(|&t| C64::new(t, 0.0)).collect::<Vec<_>>());
    Ok(&(&w.transpose().scale(-z2) - &v.scale(z1)) + &w.scale(C64::new(inp.x * inp.x, 0.0)))
}

/// Coefficient-level symmetry residual; rejects inputs that are not
/// anti-symmetric.
pub fn alpha_symmetry_residual(structs: &StructuralSet, kind: SymmetryKind, inp: &TodaInput) -> Result<f64> {
    let defect = inp.anti_symmetry_defect();
    if defect > ANTI_TOL {
        return Err(Error::PreconditionViolation(format!("w, v not anti-symmetric (defect {defect:e})")));
    }
    alpha_symmetry_residual_unchecked(structs, kind, inp)
}

/// Same as [`alpha_symmetry_residual`] without the anti-symmetry check.
pub fn alpha_symmetry_residual_unchecked(structs: &StructuralSet, kind: SymmetryKind, inp: &TodaInput) -> Result<f64> {
    let a = alpha_coeff(structs, inp)?;
    let z = inp.zeta;
    let delta = &structs.delta;
    let (lhs, rhs) = match kind {
        SymmetryKind::Cyclic => {
            let w = structs.omega_root;
            let lhs = &(&structs.d.inverse()? * &a) * &structs.d;
            (lhs, alpha_coeff(structs, &inp.with_zeta(w * z))?.scale(w))
        }
        SymmetryKind::Anti => {
            let lhs = (&(delta * &a.transpose()) * delta).scale(C64::new(-1.0, 0.0));
            (lhs, alpha_coeff(structs, &inp.with_zeta(-z))?.scale(C64::new(-1.0, 0.0)))
        }
        SymmetryKind::CReal => {
            let lhs = &(delta * &a.conj()) * delta;
            let x2 = inp.x * inp.x;
            let zb = z.conj();
            let image = alpha_coeff(structs, &inp.with_zeta((zb * x2).inv()))?;
            (lhs, image.scale(-(zb * zb * x2).inv()))
        }
        SymmetryKind::ThetaReal => (a.conj(), alpha_coeff(structs, &inp.with_zeta(z.conj()))?),
    };
    Ok(lhs.max_abs_diff(&rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ONE, ZERO};

    fn anti(n: usize, values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; n + 1];
        for (i, &u) in values.iter().enumerate() {
            out[i] = u;
            out[n - i] = -u;
        }
        out
    }

    #[test]
    fn w_examples() {
        let s = StructuralSet::new(1).unwrap();
        assert_eq!(build_w(&s, &[0.0, 0.0]).unwrap(), s.pi);
        let u: f64 = 0.3;
        // (e^{−w} Π e^{w})_{01} = e^{−w_0} e^{w_1}
        let want = ComplexMatrix::from_real(&[&[0.0, (-2.0 * u).exp()], &[(2.0 * u).exp(), 0.0]]);
        assert!(build_w(&s, &[u, -u]).unwrap().max_abs_diff(&want) < 1e-15);

        let s2 = StructuralSet::new(2).unwrap();
        let w = build_w(&s2, &[0.41, 0.0, -0.41]).unwrap();
        assert!((&(&s2.delta * &w.transpose()) * &s2.delta).max_abs_diff(&w) < 1e-14);
    }

    #[test]
    fn alpha_examples() {
        let s = StructuralSet::new(1).unwrap();
        let inp = TodaInput::new(1, vec![0.0; 2], vec![0.0; 2], 1.0, ONE).unwrap();
        assert_eq!(alpha_coeff(&s, &inp).unwrap(), &s.pi - &s.pi.transpose());
        let at_i = alpha_coeff(&s, &inp.with_zeta(C64::new(0.0, 1.0))).unwrap();
        assert!(at_i.max_abs_diff(&(&s.pi + &s.pi.transpose())) < 1e-15);
        assert!(matches!(alpha_coeff(&s, &inp.with_zeta(ZERO)), Err(Error::PoleEvaluation)));
    }

    #[test]
    fn symmetries_hold_and_fail() {
        let s = StructuralSet::new(2).unwrap();
        let inp = TodaInput::new(2, anti(2, &[0.35]), anti(2, &[-1.1]), 1.3, C64::new(0.7, 0.2)).unwrap();
        for kind in SymmetryKind::ALL {
            assert!(alpha_symmetry_residual(&s, kind, &inp).unwrap() < 1e-12, "{kind:?}");
        }
        let skew = TodaInput { w: vec![0.5, 0.2, 0.1], ..inp };
        assert!(matches!(alpha_symmetry_residual(&s, SymmetryKind::Anti, &skew), Err(Error::PreconditionViolation(_))));
        assert!(alpha_symmetry_residual_unchecked(&s, SymmetryKind::Anti, &skew).unwrap() > 1e-3);
        assert!(alpha_symmetry_residual_unchecked(&s, SymmetryKind::CReal, &skew).unwrap() > 1e-3);
    }

    #[test]
    fn real_data_is_theta_real() {
        let s = StructuralSet::new(3).unwrap();
        let inp = TodaInput::new(3, anti(3, &[0.2, -0.6]), anti(3, &[1.0, 0.3]), 0.8, C64::new(-0.4, 0.0)).unwrap();
        assert_eq!(alpha_symmetry_residual(&s, SymmetryKind::ThetaReal, &inp).unwrap(), 0.0);
    }
}

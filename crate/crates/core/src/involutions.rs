//! The twisting maps F_σ, F_θ and the involutions σ, θ of the universal
//! centralizer, with the two equivalent descriptions of S^local.

use crate::error::Result;
use crate::groupoid::GroupoidPoint;
use crate::linalg::ComplexMatrix;
use crate::tangent::{TangentKind, TangentVector};
use crate::stokes::{Parity, SectorIndex, SteinbergSection, StokesParams};

/// Outcome of [`SteinbergSection::slocal_membership`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlocalMembership {
    pub fixed_route: bool,
    pub direct_route: bool,
    pub c_reality: bool,
}

impl SteinbergSection {
    /// Π̂^{(n+1)/2} for odd n, S̃₁(s)^T for even n.
    pub fn f_sigma(&self, s: &StokesParams) -> Result<ComplexMatrix> {
        match self.roots.parity() {
            Parity::Odd => Ok(self.structs.pi_hat.pow(self.dim() / 2)),
            Parity::Even => Ok(self.build_s(1, s)?.transpose()),
        }
    }

    /// C̃·conj(Q̃_{n/(n+1)}(s)) for odd n, C for even n.
    pub fn f_theta(&self, s: &StokesParams) -> Result<ComplexMatrix> {
        match self.roots.parity() {
            Parity::Odd => {
                let q = self.build_q(SectorIndex::new(self.n() as i64), s)?;
                Ok(&self.structs.c_tilde * &q.conj())
            }
            Parity::Even => Ok(self.structs.c.clone()),
        }
    }

    /// σ₀(A) = Ad_{F_σ(A)} A^{-T}.
    pub fn sigma0(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        let f = self.f_sigma(&self.params_of(a)?)?;
        ComplexMatrix::ad(&f, &a.inverse_transpose()?)
    }

    /// θ₀(A) = Ad_{F_θ(A)} Ā^{-1}.
    pub fn theta0(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        let f = self.f_theta(&self.params_of(a)?)?;
        ComplexMatrix::ad(&f, &a.conj().inverse()?)
    }

    pub fn apply_sigma(&self, p: &GroupoidPoint) -> Result<GroupoidPoint> {
        let f = self.f_sigma(&p.s)?;
        let b = ComplexMatrix::ad(&f, &p.b.inverse_transpose()?)?;
        let a = ComplexMatrix::ad(&f, &p.a.inverse_transpose()?)?;
        GroupoidPoint::from_parts(self, b, a)
    }

    pub fn apply_theta(&self, p: &GroupoidPoint) -> Result<GroupoidPoint> {
        let f = self.f_theta(&p.s)?;
        let b = ComplexMatrix::ad(&f, &p.b.conj())?;
        let a = ComplexMatrix::ad(&f, &p.a.conj().inverse()?)?;
        GroupoidPoint::from_parts(self, b, a)
    }

    /// Derivative of F_σ along ṡ.
    pub fn f_sigma_along(&self, s: &StokesParams, s_dot: &StokesParams) -> Result<ComplexMatrix> {
        match self.roots.parity() {
            Parity::Odd => Ok(ComplexMatrix::zeros(self.dim())),
            Parity::Even => Ok(self.ds_along(1, s, s_dot)?.transpose()),
        }
    }

    /// Real-linear derivative of F_θ along ṡ.
    pub fn f_theta_along(&self, s_dot: &StokesParams) -> Result<ComplexMatrix> {
        match self.roots.parity() {
            Parity::Odd => {
                let dq = self.dq_along(SectorIndex::new(self.n() as i64), s_dot)?;
                Ok(&self.structs.c_tilde * &dq.conj())
            }
            Parity::Even => Ok(ComplexMatrix::zeros(self.dim())),
        }
    }

    /// dσ(v) at p, in closed form:
    /// d(F X^{-T} F^{-1}) = [dF·F^{-1}, F X^{-T} F^{-1}] − F X^{-T} dXᵀ X^{-T} F^{-1}.
    pub fn sigma_differential(&self, p: &GroupoidPoint, v: &TangentVector) -> Result<TangentVector> {
        let s_dot = StokesParams(v.s_dot.clone());
        let f = self.f_sigma(&p.s)?;
        let f_inv = f.inverse()?;
        let k = &self.f_sigma_along(&p.s, &s_dot)? * &f_inv;
        let part = |m: &ComplexMatrix, dm: &ComplexMatrix| -> Result<ComplexMatrix> {
            let m_it = m.inverse_transpose()?;
            let image = &(&f * &m_it) * &f_inv;
            let inner = &(&(&m_it * &dm.transpose()) * &m_it) * &f_inv;
            Ok(&k.commutator(&image) - &(&f * &inner))
        };
        Ok(TangentVector {
            x: part(&p.b, &v.x)?,
            y: part(&p.a, &v.y)?,
            s_dot: s_dot.reversed().0,
            kind: TangentKind::General,
        })
    }

    /// dθ(v) at p, in closed form: B ↦ F B̄ F^{-1}, A ↦ F Ā^{-1} F^{-1}.
    pub fn theta_differential(&self, p: &GroupoidPoint, v: &TangentVector) -> Result<TangentVector> {
        let s_dot = StokesParams(v.s_dot.clone());
        let f = self.f_theta(&p.s)?;
        let f_inv = f.inverse()?;
        let k = &self.f_theta_along(&s_dot)? * &f_inv;
        let b_img = &(&f * &p.b.conj()) * &f_inv;
        let a_bar_inv = p.a.conj().inverse()?;
        let a_img = &(&f * &a_bar_inv) * &f_inv;
        let x = &k.commutator(&b_img) + &(&(&f * &v.x.conj()) * &f_inv);
        let dy = &(&a_bar_inv * &v.y.conj()) * &a_bar_inv;
        let y = &k.commutator(&a_img) - &(&(&f * &dy) * &f_inv);
        Ok(TangentVector { x, y, s_dot: s_dot.conj_reversed().0, kind: TangentKind::General })
    }

    /// β(X) = F_σ X^{-T} F_σ^{-1} at the parameters s.
    pub fn beta_at(&self, s: &StokesParams, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        ComplexMatrix::ad(&self.f_sigma(s)?, &x.inverse_transpose()?)
    }

    /// θ̂(X) = F_θ X̄ F_θ^{-1} at the parameters s.
    pub fn theta_hat_at(&self, s: &StokesParams, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        ComplexMatrix::ad(&self.f_theta(s)?, &x.conj())
    }

    /// Both descriptions of S^local, plus the c-reality diagnostic.
    pub fn slocal_membership(&self, p: &GroupoidPoint, tol: f64) -> Result<SlocalMembership> {
        let sp = self.apply_sigma(p)?;
        let tp = self.apply_theta(p)?;
        let fixed_route = sp.distance(p) < tol && tp.distance(p) < tol;
        let direct_route = self.direct_symmetry_defect(p)? < tol;
        let c_reality = c_reality_defect(&p.b) < tol;
        Ok(SlocalMembership { fixed_route, direct_route, c_reality })
    }

    /// Largest defect among the anti-symmetry and θ-reality conditions on B
    /// and A, written without inverting the twisting matrix:
    /// X·F = F·op(X) rather than X = F·op(X)·F^{-1}.
    pub fn direct_symmetry_defect(&self, p: &GroupoidPoint) -> Result<f64> {
        let s = &p.s;
        let (fs, ft) = match self.roots.parity() {
            Parity::Odd => {
                let half = self.structs.pi_hat.powi(self.dim() as i64 / 2)?;
                let q = self.build_q(SectorIndex::new(self.n() as i64), s)?;
                (half, (&self.structs.c_tilde * &q).conj())
            }
            Parity::Even => (self.build_s(1, s)?.transpose(), self.structs.c.clone()),
        };
        let b_it = p.b.inverse_transpose()?;
        let a_it = p.a.inverse_transpose()?;
        let a_bar_inv = p.a.conj().inverse()?;
        let scale = |m: &ComplexMatrix| m.max_abs().max(1.0);
        let defects = [
            (&p.b * &fs).max_abs_diff(&(&fs * &b_it)) / scale(&fs),
            (&p.b * &ft).max_abs_diff(&(&ft * &p.b.conj())) / scale(&ft),
            (&p.a * &fs).max_abs_diff(&(&fs * &a_it)) / scale(&fs),
            (&p.a * &ft).max_abs_diff(&(&ft * &a_bar_inv)) / scale(&ft),
        ];
        Ok(defects.into_iter().fold(0.0, f64::max))
    }
}

/// ‖B·B̄ − I‖_max
pub fn c_reality_defect(b: &ComplexMatrix) -> f64 {
    (b * &b.conj()).max_abs_diff(&ComplexMatrix::identity(b.dim()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use crate::stokes::RootSetData;

    fn n1() -> SteinbergSection {
        SteinbergSection::new(RootSetData { n: 1, r1: vec![], r1p: vec![(1, 0)], survivor_count: 2 }).unwrap()
    }

    fn n2() -> SteinbergSection {
        SteinbergSection::new(RootSetData { n: 2, r1: vec![(0, 1)], r1p: vec![(2, 1)], survivor_count: 2 }).unwrap()
    }

    #[test]
    fn twisting_matrices_n1() {
        let sec = n1();
        let s = StokesParams(vec![C64::new(0.4, -0.3)]);
        assert_eq!(sec.f_sigma(&s).unwrap(), ComplexMatrix::from_real(&[&[0., 1.], &[-1., 0.]]));
        let ft = sec.f_theta(&s).unwrap();
        let want = ComplexMatrix::from_rows(vec![
            vec![C64::new(1.0, 0.0), C64::new(0.4, 0.3)],
            vec![C64::new(0.0, 0.0), C64::new(-1.0, 0.0)],
        ])
        .unwrap();
        assert!(ft.max_abs_diff(&want) < 1e-15);
        assert!((&ft * &ft).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn twisting_matrices_n2() {
        let sec = n2();
        assert_eq!(sec.f_sigma(&StokesParams::zeros(2)).unwrap(), ComplexMatrix::identity(3));
        let s = StokesParams(vec![C64::new(0.2, 1.0), C64::new(-0.7, 0.1)]);
        assert_eq!(sec.f_theta(&s).unwrap(), ComplexMatrix::from_real(&[&[1., 0., 0.], &[0., 0., 1.], &[0., 1., 0.]]));
        assert_eq!(sec.f_sigma(&s).unwrap(), sec.build_s(1, &s).unwrap().transpose());
    }

    #[test]
    fn base_maps_reverse_parameters() {
        for sec in [n1(), n2()] {
            let s = StokesParams((1..=sec.n()).map(|i| C64::new(0.5 - 0.3 * i as f64, 0.2 * i as f64)).collect());
            let a = sec.build_m(&s).unwrap();
            let sa = sec.sigma0(&a).unwrap();
            assert!(sa.max_abs_diff(&sec.build_m(&s.reversed()).unwrap()) < 1e-12);
            let ta = sec.theta0(&a).unwrap();
            assert!(ta.max_abs_diff(&sec.build_m(&s.conj_reversed()).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn n1_points() {
        let sec = n1();
        let m = sec.build_m(&StokesParams::real(&[0.8])).unwrap();
        let p = GroupoidPoint::from_parts(&sec, m.clone(), m.clone()).unwrap();
        assert!(sec.apply_sigma(&p).unwrap().distance(&p) < 1e-14);

        let unit = GroupoidPoint::from_parts(&sec, ComplexMatrix::identity(2), m).unwrap();
        assert!(sec.apply_theta(&unit).unwrap().distance(&unit) < 1e-14);

        let mi = sec.build_m(&StokesParams(vec![C64::new(0.0, 1.0)])).unwrap();
        let pi = GroupoidPoint::from_parts(&sec, ComplexMatrix::identity(2), mi).unwrap();
        let img = sec.apply_theta(&pi).unwrap();
        let want = sec.build_m(&StokesParams(vec![C64::new(0.0, -1.0)])).unwrap();
        assert!(img.a.max_abs_diff(&want) < 1e-14);
        assert_eq!(img.b, ComplexMatrix::identity(2));

        let m = sec.slocal_membership(&pi, 1e-9).unwrap();
        assert_eq!((m.fixed_route, m.direct_route, m.c_reality), (false, false, true));
    }
}

//! Tangent vectors to Z, the numerical tangent space at a point, and a
//! holomorphic chart (s, c) ↦ (Σ c_j M̃(s)^j / det^{1/(n+1)}, M̃(s)).

use crate::error::{Error, Result};
use crate::groupoid::{GroupoidPoint, POINT_TOL};
use crate::linalg::{kernel_basis, ComplexMatrix, Rect, C64, ONE, ZERO};
use crate::stokes::{SteinbergSection, StokesParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TangentKind {
    /// Along the fibre: Y = 0, X = Bξ with ξ in 𝔤_A.
    Fiber,
    /// At a unit: X = 0, Y = ∂M̃/∂s · ṡ.
    Horizontal,
    General,
}

/// A tangent vector (X, Y) at (B, A); ṡ is the induced variation of s.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub x: ComplexMatrix,
    pub y: ComplexMatrix,
    pub s_dot: Vec<C64>,
    pub kind: TangentKind,
}

impl TangentVector {
    pub fn scale(&self, c: C64) -> Self {
        Self {
            x: self.x.scale(c),
            y: self.y.scale(c),
            s_dot: self.s_dot.iter().map(|z| z * c).collect(),
            kind: self.kind,
        }
    }

    /// Real-linear combination Σ w_k v_k; the kind is General unless all
    /// inputs share one.
    pub fn combine(vectors: &[TangentVector], weights: &[C64]) -> Self {
        let first = &vectors[0];
        let mut x = ComplexMatrix::zeros(first.x.dim());
        let mut y = ComplexMatrix::zeros(first.y.dim());
        let mut s_dot = vec![ZERO; first.s_dot.len()];
        for (v, &w) in vectors.iter().zip(weights) {
            x += &v.x.scale(w);
            y += &v.y.scale(w);
            for (a, b) in s_dot.iter_mut().zip(&v.s_dot) {
                *a += b * w;
            }
        }
        let kind = if vectors.iter().all(|v| v.kind == first.kind) { first.kind } else { TangentKind::General };
        Self { x, y, s_dot, kind }
    }

    /// Entries of X then Y, split into real and imaginary parts.
    pub fn realify(&self) -> Vec<f64> {
        self.x
            .as_slice()
            .iter()
            .chain(self.y.as_slice())
            .flat_map(|z| [z.re, z.im])
            .collect()
    }
}

impl SteinbergSection {
    /// Σ ṡ_i ∂M̃/∂s_i
    pub fn dm_along(&self, s: &StokesParams, s_dot: &[C64]) -> Result<ComplexMatrix> {
        let mut y = ComplexMatrix::zeros(self.dim());
        for (i, &c) in s_dot.iter().enumerate() {
            if c != ZERO {
                y += &self.dm_ds(s, i + 1)?.scale(c);
            }
        }
        Ok(y)
    }

    /// Residual of the linearised constraints of Z along v.
    pub fn tangent_residual(&self, p: &GroupoidPoint, v: &TangentVector) -> Result<f64> {
        let b_inv = p.b.inverse()?;
        let xi = &b_inv * &v.x;
        let conj_y = &(&(&p.b * &v.y) * &b_inv) - &v.y;
        let orbit = &(&(&p.b * &xi.commutator(&p.a)) * &b_inv) + &conj_y;
        let y_res = v.y.max_abs_diff(&self.dm_along(&p.s, &v.s_dot)?);
        Ok(orbit.max_abs().max(xi.trace().norm()).max(y_res))
    }

    /// Basis of T_pZ: n fibre vectors, then n horizontal (at units) or general
    /// vectors whose ṡ-parts are the coordinate directions.
    pub fn tangent_space(&self, p: &GroupoidPoint, tol: f64) -> Result<Vec<TangentVector>> {
        let n = self.n();
        let dim = self.dim();
        let sq = dim * dim;
        let b_inv = p.b.inverse()?;
        let derivs: Vec<ComplexMatrix> = (1..=n).map(|i| self.dm_ds(&p.s, i)).collect::<Result<_>>()?;

        // columns: ξ = E_ab, then ṡ = e_i; rows: entries of the constraint, then tr ξ
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(sq + n);
        for a in 0..dim {
            for b in 0..dim {
                let e = ComplexMatrix::unit(dim, a, b);
                let img = &(&p.b * &e.commutator(&p.a)) * &b_inv;
                let mut col = img.as_slice().to_vec();
                col.push(if a == b { ONE } else { ZERO });
                cols.push(col);
            }
        }
        for d in &derivs {
            let img = &(&(&p.b * d) * &b_inv) - d;
            let mut col = img.as_slice().to_vec();
            col.push(ZERO);
            cols.push(col);
        }
        let kernel = kernel_basis(&Rect::from_columns(&cols), tol);
        if kernel.len() != 2 * n {
            return Err(Error::DegenerateTangent { expected: 2 * n, found: kernel.len() });
        }

        let basis = crate::groupoid::centralizer_basis(&p.a)?;
        let mut out: Vec<TangentVector> = basis
            .traceless
            .iter()
            .map(|xi| TangentVector { x: &p.b * xi, y: ComplexMatrix::zeros(dim), s_dot: vec![ZERO; n], kind: TangentKind::Fiber })
            .collect();

        if p.b.max_abs_diff(&ComplexMatrix::identity(dim)) < 1e-12 {
            for (i, d) in derivs.into_iter().enumerate() {
                let mut s_dot = vec![ZERO; n];
                s_dot[i] = ONE;
                out.push(TangentVector { x: ComplexMatrix::zeros(dim), y: d, s_dot, kind: TangentKind::Horizontal });
            }
            return Ok(out);
        }

        // Minimum-norm kernel combinations with ṡ = e_i: c = W^H (W W^H)^{-1} e_i
        let w = |i: usize, k: usize| kernel[k][sq + i];
        let gram = ComplexMatrix::from_fn(n, |i, j| (0..2 * n).map(|k| w(i, k) * w(j, k).conj()).sum());
        let gram_inv = gram.inverse().map_err(|_| Error::DegenerateTangent { expected: 2 * n, found: 2 * n - 1 })?;
        for i in 0..n {
            let coeffs: Vec<C64> =
                (0..2 * n).map(|k| (0..n).map(|j| w(j, k).conj() * gram_inv[(j, i)]).sum()).collect();
            let combo: Vec<C64> = (0..sq + n).map(|r| (0..2 * n).map(|k| coeffs[k] * kernel[k][r]).sum()).collect();
            let xi = ComplexMatrix::from_fn(dim, |a, b| combo[a * dim + b]);
            let s_dot = combo[sq..].to_vec();
            let y = self.dm_along(&p.s, &s_dot)?;
            out.push(TangentVector { x: &p.b * &xi, y, s_dot, kind: TangentKind::General });
        }
        Ok(out)
    }
}

/// Holomorphic chart around a point of Z. Complex coordinates are
/// (s_1, …, s_n, free commutant coefficients); one coefficient is pinned.
#[derive(Debug, Clone)]
pub struct Chart<'a> {
    sec: &'a SteinbergSection,
    origin: Vec<C64>,
    pinned: usize,
    pinned_value: C64,
}

impl<'a> Chart<'a> {
    pub fn at(sec: &'a SteinbergSection, p: &GroupoidPoint) -> Result<Self> {
        let dim = sec.dim();
        let powers: Vec<ComplexMatrix> = (0..dim).map(|j| p.a.pow(j)).collect();
        // least squares B ≈ Σ c_j A^j through the normal equations
        let normal = ComplexMatrix::from_fn(dim, |i, j| {
            powers[i].as_slice().iter().zip(powers[j].as_slice()).map(|(x, y)| x.conj() * y).sum()
        });
        let rhs: Vec<C64> =
            powers.iter().map(|m| m.as_slice().iter().zip(p.b.as_slice()).map(|(x, y)| x.conj() * y).sum()).collect();
        let inv = normal.inverse().map_err(|_| Error::DegenerateChart("commutant basis is singular".into()))?;
        let c: Vec<C64> = (0..dim).map(|i| (0..dim).map(|j| inv[(i, j)] * rhs[j]).sum()).collect();
        let mut fit = ComplexMatrix::zeros(dim);
        for (m, &cj) in powers.iter().zip(&c) {
            fit += &m.scale(cj);
        }
        let err = fit.max_abs_diff(&p.b);
        if err > 1e-8 * p.b.max_abs().max(1.0) {
            return Err(Error::DegenerateChart(format!("B is not a polynomial in A (residual {err:e})")));
        }
        let pinned = (0..dim).max_by(|&i, &j| c[i].norm().total_cmp(&c[j].norm())).unwrap_or(0);
        let mut origin = p.s.0.clone();
        origin.extend(c.iter().enumerate().filter(|&(j, _)| j != pinned).map(|(_, &z)| z));
        Ok(Self { sec, origin, pinned, pinned_value: c[pinned] })
    }

    pub fn origin(&self) -> &[C64] {
        &self.origin
    }

    /// Real dimension 4n.
    pub fn real_dim(&self) -> usize {
        2 * self.origin.len()
    }

    /// Unit step in real direction r: coordinate r/2 with phase 1 or i.
    pub fn direction(&self, r: usize) -> Vec<C64> {
        let mut e = vec![ZERO; self.origin.len()];
        e[r / 2] = if r.is_multiple_of(2) { ONE } else { C64::new(0.0, 1.0) };
        e
    }

    pub fn shifted(&self, r: usize, t: f64) -> Vec<C64> {
        let e = self.direction(r);
        self.origin.iter().zip(&e).map(|(x, d)| x + d * t).collect()
    }

    fn split(&self, x: &[C64]) -> (StokesParams, Vec<C64>) {
        let n = self.sec.n();
        let s = StokesParams(x[..n].to_vec());
        let mut c = x[n..].to_vec();
        c.insert(self.pinned, self.pinned_value);
        (s, c)
    }

    fn raw(&self, x: &[C64]) -> Result<(StokesParams, ComplexMatrix, Vec<ComplexMatrix>, Vec<C64>)> {
        let (s, c) = self.split(x);
        let a = self.sec.build_m(&s)?;
        let powers: Vec<ComplexMatrix> = (0..self.sec.dim()).map(|j| a.pow(j)).collect();
        Ok((s, a, powers, c))
    }

    pub fn point(&self, x: &[C64]) -> Result<GroupoidPoint> {
        let (s, a, powers, c) = self.raw(x)?;
        let mut poly = ComplexMatrix::zeros(self.sec.dim());
        for (m, &cj) in powers.iter().zip(&c) {
            poly += &m.scale(cj);
        }
        let det = poly.det();
        if det.norm() < POINT_TOL {
            return Err(Error::DegenerateChart(format!("|det| = {:e}", det.norm())));
        }
        let b = poly.scale(det.powf(-1.0 / self.sec.dim() as f64));
        Ok(GroupoidPoint { b, a, s })
    }

    /// Analytic image of the real direction r at chart coordinates x.
    pub fn tangent(&self, x: &[C64], r: usize) -> Result<TangentVector> {
        let n = self.sec.n();
        let dim = self.sec.dim();
        let (s, _, powers, c) = self.raw(x)?;
        let k = r / 2;
        let phase = if r.is_multiple_of(2) { ONE } else { C64::new(0.0, 1.0) };
        let mut poly = ComplexMatrix::zeros(dim);
        for (m, &cj) in powers.iter().zip(&c) {
            poly += &m.scale(cj);
        }
        let (d_poly, y, s_dot) = if k < n {
            let da = self.sec.dm_ds(&s, k + 1)?;
            let mut d_poly = ComplexMatrix::zeros(dim);
            for j in 1..dim {
                // d(A^j) = Σ_m A^m dA A^{j−1−m}
                for m in 0..j {
                    d_poly += &(&(&powers[m] * &da) * &powers[j - 1 - m]).scale(c[j]);
                }
            }
            let mut s_dot = vec![ZERO; n];
            s_dot[k] = ONE;
            (d_poly, da, s_dot)
        } else {
            let free = k - n;
            let j = if free < self.pinned { free } else { free + 1 };
            (powers[j].clone(), ComplexMatrix::zeros(dim), vec![ZERO; n])
        };
        let det = poly.det();
        let root = det.powf(-1.0 / dim as f64);
        let log_deriv = (&poly.inverse()? * &d_poly).trace() / dim as f64;
        let x_dot = (&d_poly - &poly.scale(log_deriv)).scale(root);
        Ok(TangentVector { x: x_dot, y, s_dot, kind: TangentKind::General }.scale(phase))
    }

    /// All 4n real-direction tangents at the chart origin.
    pub fn frame(&self) -> Result<Vec<TangentVector>> {
        (0..self.real_dim()).map(|r| self.tangent(&self.origin, r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stokes::RootSetData;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn n1() -> SteinbergSection {
        SteinbergSection::new(RootSetData { n: 1, r1: vec![], r1p: vec![(1, 0)], survivor_count: 2 }).unwrap()
    }

    fn n2() -> SteinbergSection {
        SteinbergSection::new(RootSetData { n: 2, r1: vec![(0, 1)], r1p: vec![(2, 1)], survivor_count: 2 }).unwrap()
    }

    #[test]
    fn unit_over_signed_shift() {
        let sec = n1();
        let p = sec.unit(&sec.build_m(&StokesParams::zeros(1)).unwrap()).unwrap();
        let basis = sec.tangent_space(&p, 1e-10).unwrap();
        assert_eq!(basis.len(), 2);
        assert_eq!(basis[0].kind, TangentKind::Fiber);
        assert_eq!(basis[0].x, sec.structs.pi_hat);
        assert_eq!(basis[0].y, ComplexMatrix::zeros(2));
        assert_eq!(basis[1].kind, TangentKind::Horizontal);
        assert_eq!(basis[1].y, ComplexMatrix::from_real(&[&[0., 0.], &[0., -1.]]));
    }

    #[test]
    fn generic_tangent_dimension_and_residual() {
        let sec = n2();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..5 {
            let p = sec.sample_z(&mut rng).unwrap();
            let basis = sec.tangent_space(&p, 1e-10).unwrap();
            assert_eq!(basis.len(), 4);
            for v in &basis {
                assert!(sec.tangent_residual(&p, v).unwrap() < 1e-8);
            }
        }
    }

    #[test]
    fn chart_reproduces_point_and_derivatives() {
        let sec = n2();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = sec.sample_z(&mut rng).unwrap();
        let chart = Chart::at(&sec, &p).unwrap();
        assert!(chart.point(chart.origin()).unwrap().distance(&p) < 1e-12);
        let h = 1e-6;
        for r in 0..chart.real_dim() {
            let plus = chart.point(&chart.shifted(r, h)).unwrap();
            let minus = chart.point(&chart.shifted(r, -h)).unwrap();
            let fd_x = (&plus.b - &minus.b).scale(C64::new(0.5 / h, 0.0));
            let fd_y = (&plus.a - &minus.a).scale(C64::new(0.5 / h, 0.0));
            let t = chart.tangent(chart.origin(), r).unwrap();
            assert!(fd_x.max_abs_diff(&t.x) < 1e-7, "direction {r}");
            assert!(fd_y.max_abs_diff(&t.y) < 1e-7, "direction {r}");
            assert!(sec.tangent_residual(&p, &t).unwrap() < 1e-9);
        }
    }
}

//! The constant matrices attached to SL(n+1, C): the cyclic shift Π and its
//! signed variant Π̂, the Fourier matrix Ω, the anti-diagonal Δ, the
//! reflections C and C̃, and the diagonal root-of-unity matrices.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ONE};

#[derive(Debug, Clone)]
pub struct StructuralSet {
    pub n: usize,
    /// ω = e^{2πi/(n+1)}.
    pub omega_root: C64,
    /// Ones on the superdiagonal and at (n, 0).
    pub pi: ComplexMatrix,
    /// diag(1, …, 1, −1)·Π.
    pub pi_hat: ComplexMatrix,
    /// Ω_{ij} = ω^{ij}.
    pub omega: ComplexMatrix,
    /// diag(1, ω, …, ω^n).
    pub d: ComplexMatrix,
    /// diag(1, ω^{1/2}, …, ω^{n/2}) on the principal branch.
    pub d_half: ComplexMatrix,
    /// Anti-diagonal ones.
    pub delta: ComplexMatrix,
    /// 1 ⊕ (anti-diagonal ones on the last n indices).
    pub c: ComplexMatrix,
    /// diag(1, −1, …, −1)·C.
    pub c_tilde: ComplexMatrix,
}

impl StructuralSet {
    pub fn new(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidDimension("n must be at least 1".into()));
        }
        let dim = n + 1;
        let omega_root = C64::from_polar(1.0, 2.0 * PI / dim as f64);
        let pi = ComplexMatrix::from_fn(dim, |i, j| if j == (i + 1) % dim { ONE } else { C64::default() });
        let mut sign = vec![ONE; dim];
        sign[n] = -ONE;
        let pi_hat = &ComplexMatrix::diag(&sign) * &pi;
        let omega = ComplexMatrix::from_fn(dim, |i, j| root_power(dim, (i * j) as f64));
        let d = ComplexMatrix::diag(&(0..dim).map(|k| root_power(dim, k as f64)).collect::<Vec<_>>());
        let d_half = ComplexMatrix::diag(&(0..dim).map(|k| root_power(dim, k as f64 / 2.0)).collect::<Vec<_>>());
        let delta = ComplexMatrix::from_fn(dim, |i, j| if i + j == n { ONE } else { C64::default() });
        let c = ComplexMatrix::from_fn(dim, |i, j| {
            let hit = (i == 0 && j == 0) || (i > 0 && j > 0 && i + j == dim);
            if hit { ONE } else { C64::default() }
        });
        let mut flip = vec![-ONE; dim];
        flip[0] = ONE;
        let c_tilde = &ComplexMatrix::diag(&flip) * &c;
        Ok(Self { n, omega_root, pi, pi_hat, omega, d, d_half, delta, c, c_tilde })
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    pub fn is_odd(&self) -> bool {
        self.n % 2 == 1
    }

    /// Coxeter element representative: Π̂ for odd n, Π for even n.
    pub fn coxeter(&self) -> &ComplexMatrix {
        if self.is_odd() { &self.pi_hat } else { &self.pi }
    }

    /// δ: i ↦ i − 1 mod n+1, applied `steps` times (negative steps allowed).
    pub fn delta_perm(&self, i: usize, steps: i64) -> usize {
        let dim = self.dim() as i64;
        (i as i64 - steps).rem_euclid(dim) as usize
    }

    /// Max residual over the defining identities of the set.
    pub fn invariant_residual(&self) -> f64 {
        let dim = self.dim();
        let id = ComplexMatrix::identity(dim);
        let mut worst: f64 = 0.0;
        let mut check = |r: f64| worst = worst.max(r);
        let omega_inv = self.omega.inverse().expect("Fourier matrix is invertible");
        check((&(&self.omega * &self.d) * &omega_inv).max_abs_diff(&self.pi));
        check(self.pi_hat.pow(dim).max_abs_diff(&id.scale(-ONE)));
        check(self.pi.pow(dim).max_abs_diff(&id));
        check((&self.c * &self.c).max_abs_diff(&id));
        check((&self.c_tilde * &self.c_tilde).max_abs_diff(&id));
        check((&self.delta * &self.delta).max_abs_diff(&id));
        let pi_inv = self.pi.inverse().expect("Π is a permutation");
        check((&(&self.c * &pi_inv) * &self.c).max_abs_diff(&self.pi));
        if self.is_odd() {
            let ph_inv = self.pi_hat.inverse().expect("Π̂ is signed permutation");
            check((&(&self.c_tilde * &ph_inv) * &self.c_tilde).max_abs_diff(&self.pi_hat));
        }
        worst
    }
}

fn root_power(dim: usize, k: f64) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * k / dim as f64)
}

//! Dense complex matrices of size (n+1)×(n+1) and the handful of
//! numerical kernels the rest of the crate is built on.

mod poly;
mod svd;

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use poly::{char_poly, Polynomial};
pub use svd::{kernel_basis, numerical_rank, singular_values, svd, Rect, Svd};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Determinant threshold below which a matrix is treated as singular.
pub const SINGULAR_DET: f64 = 1e-12;

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidDimension(format!("ragged {dim}-row matrix")));
        }
        Ok(Self { dim, data: rows.into_iter().flatten().collect() })
    }

    /// Convenience constructor for real test data; panics on ragged input.
    pub fn from_real(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "ragged matrix");
        Self::from_fn(dim, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn diag(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    /// Matrix unit E_{i,j}.
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m[(i, j)] = ONE;
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, k: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * k).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self> {
        self.same_dim(rhs)?;
        Ok(self * rhs)
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self> {
        self.same_dim(rhs)?;
        Ok(self + rhs)
    }

    fn same_dim(&self, rhs: &Self) -> Result<()> {
        if self.dim != rhs.dim {
            return Err(Error::InvalidDimension(format!("{} vs {}", self.dim, rhs.dim)));
        }
        Ok(())
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut acc = Self::identity(self.dim);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Signed power; negative exponents go through the inverse.
    pub fn powi(&self, k: i64) -> Result<Self> {
        if k >= 0 {
            Ok(self.pow(k as usize))
        } else {
            Ok(self.inverse()?.pow(k.unsigned_abs() as usize))
        }
    }

    /// Partial-pivot LU. Returns (packed LU, permutation, sign) or `None`
    /// when a pivot vanishes exactly.
    fn lu(&self) -> Option<(Vec<C64>, Vec<usize>, f64)> {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let p = (k..n).max_by(|&x, &y| a[x * n + k].norm().total_cmp(&a[y * n + k].norm()))?;
            if a[p * n + k].norm() == 0.0 {
                return None;
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] / pivot;
                a[i * n + k] = f;
                for j in k + 1..n {
                    let t = a[k * n + j];
                    a[i * n + j] -= f * t;
                }
            }
        }
        Some((a, perm, sign))
    }

    pub fn det(&self) -> C64 {
        match self.dim {
            0 => ONE,
            1 => self.data[0],
            2 => self[(0, 0)] * self[(1, 1)] - self[(0, 1)] * self[(1, 0)],
            n => match self.lu() {
                None => ZERO,
                Some((a, _, sign)) => (0..n).map(|i| a[i * n + i]).product::<C64>() * sign,
            },
        }
    }

    /// Inverse via the adjugate for side ≤ 3 and partial-pivot LU above.
    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        if det.norm() <= SINGULAR_DET {
            return Err(Error::SingularInput(format!("|det| = {:e}", det.norm())));
        }
        let n = self.dim;
        if n <= 3 {
            return Ok(self.adjugate().scale(det.inv()));
        }
        let (a, perm, _) = self.lu().ok_or_else(|| Error::SingularInput("zero pivot".into()))?;
        let mut inv = Self::zeros(n);
        let mut col = vec![ZERO; n];
        for c in 0..n {
            for i in 0..n {
                col[i] = if perm[i] == c { ONE } else { ZERO };
            }
            for i in 0..n {
                let mut acc = col[i];
                for j in 0..i {
                    acc -= a[i * n + j] * col[j];
                }
                col[i] = acc;
            }
            for i in (0..n).rev() {
                let mut acc = col[i];
                for j in i + 1..n {
                    acc -= a[i * n + j] * col[j];
                }
                col[i] = acc / a[i * n + i];
            }
            for i in 0..n {
                inv[(i, c)] = col[i];
            }
        }
        Ok(inv)
    }

    fn adjugate(&self) -> Self {
        let n = self.dim;
        match n {
            1 => Self::identity(1),
            2 => Self::from_fn(2, |i, j| match (i, j) {
                (0, 0) => self[(1, 1)],
                (1, 1) => self[(0, 0)],
                _ => -self[(i, j)],
            }),
            _ => Self::from_fn(n, |i, j| {
                // cofactor C_{j,i}
                let minor = Self::from_fn(n - 1, |r, c| {
                    let rr = if r < j { r } else { r + 1 };
                    let cc = if c < i { c } else { c + 1 };
                    self[(rr, cc)]
                });
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                minor.det() * sign
            }),
        }
    }

    /// Ad_g X = g X g^{-1}.
    pub fn ad(g: &Self, x: &Self) -> Result<Self> {
        Ok(&(g * x) * &g.inverse()?)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Inverse transpose, X^{-T}.
    pub fn inverse_transpose(&self) -> Result<Self> {
        Ok(self.inverse()?.transpose())
    }
}

/// Trace form (X, Y) = Tr(XY).
pub fn trace_form(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<C64> {
    if x.dim() != y.dim() {
        return Err(Error::InvalidDimension(format!("{} vs {}", x.dim(), y.dim())));
    }
    let n = x.dim();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += x[(i, k)] * y[(k, i)];
        }
    }
    Ok(acc)
}

/// Regularity: {I, M, …, M^n} is linearly independent, i.e. the minimal
/// polynomial has full degree. `tol` is relative to the largest singular value.
pub fn is_regular(m: &ComplexMatrix, tol: f64) -> bool {
    krylov_rank(m, tol) == m.dim()
}

pub(crate) fn krylov_rank(m: &ComplexMatrix, tol: f64) -> usize {
    let n = m.dim();
    let mut cols = Vec::with_capacity(n);
    let mut p = ComplexMatrix::identity(n);
    for _ in 0..n {
        cols.push(p.as_slice().to_vec());
        p = &p * m;
    }
    let rows = n * n;
    let a = svd::Rect::from_fn(rows, n, |r, c| cols[c][r]);
    numerical_rank(&a, tol)
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale(-ONE)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for row in self.data.chunks(self.dim) {
            let cells: Vec<String> =
                row.iter().map(|z| format!("{:+.6}{:+.6}i", z.re, z.im)).collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        write!(f, "]")
    }
}

// Repo-wide encoding: array of rows, each entry `[re, im]`.
impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = self
            .data
            .chunks(self.dim)
            .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(deserializer)?;
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(|[re, im]| C64::new(re, im)).collect())
            .collect();
        ComplexMatrix::from_rows(rows).map_err(D::Error::custom)
    }
}

/// Serde adapter for complex vectors as `[[re, im], …]`.
pub mod complex_vec_serde {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let raw: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(raw.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

//! Tilde Stokes factors Q̃_k, the section element M̃(s) and the Stokes
//! matrices S̃_m, all driven by a pair of root subsets (R1, R1p).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{char_poly, complex_vec_serde, is_regular, ComplexMatrix, C64, ZERO};
use crate::structural::StructuralSet;

/// Ordered index pair (i, j) standing for the matrix unit E_{i,j}.
pub type RootPair = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

/// Stokes parameters s = (s_1, …, s_n).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StokesParams(#[serde(with = "complex_vec_serde")] pub Vec<C64>);

impl StokesParams {
    pub fn zeros(n: usize) -> Self {
        Self(vec![ZERO; n])
    }

    pub fn real(values: &[f64]) -> Self {
        Self(values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// s_i, 1-based.
    pub fn get(&self, i: usize) -> C64 {
        self.0[i - 1]
    }

    /// (s_n, …, s_1)
    pub fn reversed(&self) -> Self {
        Self(self.0.iter().rev().copied().collect())
    }

    /// (s̄_n, …, s̄_1)
    pub fn conj_reversed(&self) -> Self {
        Self(self.0.iter().rev().map(|z| z.conj()).collect())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.0.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// max_i |s_i − s_{n−i+1}|
    pub fn palindrome_defect(&self) -> f64 {
        self.max_abs_diff(&self.reversed())
    }

    /// Real and palindromic, i.e. the parameters of a point of M^local.
    pub fn is_local(&self, tol: f64) -> bool {
        self.max_imag() < tol && self.palindrome_defect() < tol
    }
}

/// Sector index k = k_num / (n+1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SectorIndex {
    pub k_num: i64,
}

impl SectorIndex {
    pub fn new(k_num: i64) -> Self {
        Self { k_num }
    }

    /// k = num/den reduced onto the lattice (1/(n+1))ℤ.
    pub fn from_fraction(num: i64, den: i64, n: usize) -> Result<Self> {
        let dim = (n + 1) as i64;
        if den == 0 || (num * dim) % den != 0 {
            return Err(Error::InvalidSector(format!("{num}/{den} is not a multiple of 1/{dim}")));
        }
        Ok(Self { k_num: num * dim / den })
    }
}

/// Which construction to use for Q̃_k away from the two base sectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QRoute {
    /// Shift the root pairs by δ and read the sign table.
    Direct,
    /// Conjugate the base factor by powers of the Coxeter matrix.
    Conjugation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootSetData {
    pub n: usize,
    #[serde(rename = "R1")]
    pub r1: Vec<RootPair>,
    #[serde(rename = "R1p")]
    pub r1p: Vec<RootPair>,
    pub survivor_count: usize,
}

impl RootSetData {
    pub fn parity(&self) -> Parity {
        if self.n % 2 == 1 { Parity::Odd } else { Parity::Even }
    }

    /// Coefficient s_{i,j} of E_{i,j}; the parameter index is (j − i) mod n+1.
    pub fn coefficient(&self, i: usize, j: usize, s: &StokesParams) -> C64 {
        sign_of(self.n, i, j) * s.get(diff_class(self.n, i, j))
    }

    /// Disjoint, one pair per difference class, n pairs in total.
    pub fn validate(&self) -> Result<()> {
        let dim = self.n + 1;
        let all: Vec<RootPair> = self.r1.iter().chain(&self.r1p).copied().collect();
        if all.len() != self.n {
            return Err(Error::InvalidPoint(format!("{} root pairs, expected {}", all.len(), self.n)));
        }
        let mut seen = vec![false; dim];
        for &(i, j) in &all {
            if i >= dim || j >= dim || i == j {
                return Err(Error::InvalidPoint(format!("bad root pair ({i}, {j})")));
            }
            let d = diff_class(self.n, i, j);
            if seen[d] {
                return Err(Error::InvalidPoint(format!("difference class {d} used twice")));
            }
            seen[d] = true;
        }
        Ok(())
    }
}

pub(crate) fn diff_class(n: usize, i: usize, j: usize) -> usize {
    (j as i64 - i as i64).rem_euclid((n + 1) as i64) as usize
}

pub(crate) fn sign_of(n: usize, i: usize, j: usize) -> f64 {
    let base = if i < j { 1.0 } else { -1.0 };
    if n % 2 == 1 {
        base
    } else {
        let e = j as i64 - i as i64;
        if e.rem_euclid(2) == 0 { base } else { -base }
    }
}

/// Result of [`SteinbergSection::membership`].
#[derive(Debug, Clone, PartialEq)]
pub struct SectionMembership {
    pub in_section: bool,
    pub in_mlocal: bool,
    pub s: StokesParams,
}

/// The Steinberg section together with the root data that shapes it.
#[derive(Debug, Clone)]
pub struct SteinbergSection {
    pub roots: RootSetData,
    pub structs: StructuralSet,
}

impl SteinbergSection {
    pub fn new(roots: RootSetData) -> Result<Self> {
        roots.validate()?;
        let structs = StructuralSet::new(roots.n)?;
        Ok(Self { roots, structs })
    }

    pub fn n(&self) -> usize {
        self.roots.n
    }

    pub fn dim(&self) -> usize {
        self.roots.n + 1
    }

    fn check_params(&self, s: &StokesParams) -> Result<()> {
        if s.len() != self.n() {
            return Err(Error::InvalidDimension(format!("{} Stokes parameters for n = {}", s.len(), self.n())));
        }
        Ok(())
    }

    /// Base root set and shift t for a sector: k_num = n+1+2t on the R1 chain,
    /// n+2+2t on the R1p chain.
    fn chain(&self, k: SectorIndex) -> (&[RootPair], i64) {
        let off = k.k_num - self.dim() as i64;
        if off.rem_euclid(2) == 0 {
            (&self.roots.r1, off.div_euclid(2))
        } else {
            (&self.roots.r1p, (off - 1).div_euclid(2))
        }
    }

    /// Root pairs of R_k.
    pub fn roots_at(&self, k: SectorIndex) -> Vec<RootPair> {
        let (base, t) = self.chain(k);
        base.iter()
            .map(|&(i, j)| (self.structs.delta_perm(i, t), self.structs.delta_perm(j, t)))
            .collect()
    }

    pub fn build_q(&self, k: SectorIndex, s: &StokesParams) -> Result<ComplexMatrix> {
        self.build_q_via(k, s, QRoute::Direct)
    }

    pub fn build_q_via(&self, k: SectorIndex, s: &StokesParams, route: QRoute) -> Result<ComplexMatrix> {
        self.check_params(s)?;
        match route {
            QRoute::Direct => Ok(self.factor(&self.roots_at(k), s)),
            QRoute::Conjugation => {
                let (base, t) = self.chain(k);
                let q = self.factor(base, s);
                let p = self.structs.coxeter();
                Ok(&(&p.powi(t)? * &q) * &p.powi(-t)?)
            }
        }
    }

    fn factor(&self, pairs: &[RootPair], s: &StokesParams) -> ComplexMatrix {
        let mut q = ComplexMatrix::identity(self.dim());
        for &(i, j) in pairs {
            q[(i, j)] += self.roots.coefficient(i, j, s);
        }
        q
    }

    /// ∂Q̃_k/∂s_p.
    fn factor_derivative(&self, k: SectorIndex, p: usize) -> ComplexMatrix {
        let mut dq = ComplexMatrix::zeros(self.dim());
        for (i, j) in self.roots_at(k) {
            if diff_class(self.n(), i, j) == p {
                dq[(i, j)] = C64::new(sign_of(self.n(), i, j), 0.0);
            }
        }
        dq
    }

    fn k1(&self) -> SectorIndex {
        SectorIndex::new(self.dim() as i64)
    }

    fn k1p(&self) -> SectorIndex {
        SectorIndex::new(self.dim() as i64 + 1)
    }

    /// M̃(s) = Q̃_1 Q̃_{1+1/(n+1)} P with P the Coxeter matrix.
    pub fn build_m(&self, s: &StokesParams) -> Result<ComplexMatrix> {
        let q1 = self.build_q(self.k1(), s)?;
        let q2 = self.build_q(self.k1p(), s)?;
        Ok(&(&q1 * &q2) * self.structs.coxeter())
    }

    /// ∂M̃/∂s_p for p = 1..n, by the product rule over the two factors.
    pub fn dm_ds(&self, s: &StokesParams, p: usize) -> Result<ComplexMatrix> {
        let q1 = self.build_q(self.k1(), s)?;
        let q2 = self.build_q(self.k1p(), s)?;
        let d1 = self.factor_derivative(self.k1(), p);
        let d2 = self.factor_derivative(self.k1p(), p);
        let sum = &(&d1 * &q2) + &(&q1 * &d2);
        Ok(&sum * self.structs.coxeter())
    }

    /// S̃_m: product of the n+1 consecutive factors starting at k = m.
    pub fn build_s(&self, m: i64, s: &StokesParams) -> Result<ComplexMatrix> {
        if !(1..=2).contains(&m) {
            return Err(Error::InvalidSector(format!("Stokes matrix index {m} (expected 1 or 2)")));
        }
        let dim = self.dim() as i64;
        let mut acc = ComplexMatrix::identity(self.dim());
        for q in 0..dim {
            acc = &acc * &self.build_q(SectorIndex::new(m * dim + q), s)?;
        }
        Ok(acc)
    }

    /// Derivative of Q̃_k along ṡ; the factors are affine in s.
    pub fn dq_along(&self, k: SectorIndex, s_dot: &StokesParams) -> Result<ComplexMatrix> {
        self.check_params(s_dot)?;
        Ok(&self.factor(&self.roots_at(k), s_dot) - &ComplexMatrix::identity(self.dim()))
    }

    /// Derivative of S̃_m along ṡ, by the product rule.
    pub fn ds_along(&self, m: i64, s: &StokesParams, s_dot: &StokesParams) -> Result<ComplexMatrix> {
        if !(1..=2).contains(&m) {
            return Err(Error::InvalidSector(format!("Stokes matrix index {m} (expected 1 or 2)")));
        }
        let dim = self.dim() as i64;
        let ks: Vec<SectorIndex> = (0..dim).map(|q| SectorIndex::new(m * dim + q)).collect();
        let qs: Vec<ComplexMatrix> = ks.iter().map(|&k| self.build_q(k, s)).collect::<Result<_>>()?;
        let mut total = ComplexMatrix::zeros(self.dim());
        for (slot, &k) in ks.iter().enumerate() {
            let mut acc = ComplexMatrix::identity(self.dim());
            for (q, factor) in qs.iter().enumerate() {
                acc = if q == slot { &acc * &self.dq_along(k, s_dot)? } else { &acc * factor };
            }
            total += &acc;
        }
        Ok(total)
    }

    /// Read s off det(A − μI) = Σ c_i μ^i: c_i = s_i (odd n), (−1)^i s_i (even n).
    pub fn params_of(&self, a: &ComplexMatrix) -> Result<StokesParams> {
        if a.dim() != self.dim() {
            return Err(Error::InvalidDimension(format!("{}×{} matrix for n = {}", a.dim(), a.dim(), self.n())));
        }
        let p = char_poly(a);
        let flip = if self.dim().is_multiple_of(2) { 1.0 } else { -1.0 };
        let odd = self.roots.parity() == Parity::Odd;
        Ok(StokesParams(
            (1..=self.n())
                .map(|i| {
                    let c = p.coefficients[i] * flip;
                    if odd || i % 2 == 0 { c } else { -c }
                })
                .collect(),
        ))
    }

    pub fn membership(&self, a: &ComplexMatrix, tol: f64) -> Result<SectionMembership> {
        let s = self.params_of(a)?;
        let in_section = a.max_abs_diff(&self.build_m(&s)?) < tol;
        let in_mlocal = in_section && s.is_local(tol);
        Ok(SectionMembership { in_section, in_mlocal, s })
    }

    pub fn is_regular_at(&self, s: &StokesParams) -> Result<bool> {
        Ok(is_regular(&self.build_m(s)?, 1e-9))
    }

    /// Max-abs residual of M̃^{n+1} ± S̃₁S̃₂ relative to ‖M̃^{n+1}‖.
    pub fn power_identity_residual(&self, s: &StokesParams) -> Result<f64> {
        let m = self.build_m(s)?;
        let lhs = m.pow(self.dim());
        let prod = &self.build_s(1, s)? * &self.build_s(2, s)?;
        let rhs = match self.roots.parity() {
            Parity::Odd => -&prod,
            Parity::Even => prod,
        };
        Ok(lhs.max_abs_diff(&rhs) / lhs.max_abs().max(1.0))
    }

    /// max over k ∈ {1, 1+1/(n+1)} of ‖Q̃_{k+1} − Q̃_k^{-T}‖.
    pub fn antisymmetry_residual(&self, s: &StokesParams) -> Result<f64> {
        let dim = self.dim() as i64;
        let mut worst: f64 = 0.0;
        for k in [self.k1(), self.k1p()] {
            let q = self.build_q(k, s)?;
            let next = self.build_q(SectorIndex::new(k.k_num + dim), s)?;
            worst = worst.max(next.max_abs_diff(&q.inverse_transpose()?));
        }
        Ok(worst)
    }

    /// Max disagreement between the two construction routes over a full period.
    pub fn route_residual(&self, s: &StokesParams) -> Result<f64> {
        let dim = self.dim() as i64;
        let mut worst: f64 = 0.0;
        for k_num in 1..=3 * dim {
            let k = SectorIndex::new(k_num);
            let a = self.build_q_via(k, s, QRoute::Direct)?;
            let b = self.build_q_via(k, s, QRoute::Conjugation)?;
            worst = worst.max(a.max_abs_diff(&b));
        }
        Ok(worst)
    }

    /// Parameters that make χ_i(M̃(s)) the elementary symmetric functions:
    /// monic det(μI − M̃) read in descending order.
    pub fn characters(&self, s: &StokesParams) -> Result<Vec<C64>> {
        let p = char_poly(&self.build_m(s)?);
        let dim = self.dim();
        Ok((1..dim)
            .map(|i| {
                let c = p.coefficients[dim - i];
                if i % 2 == 0 { c } else { -c }
            })
            .collect())
    }
}

//! The universal centralizer Z ⇒ Σ: points, structure maps, commutant bases
//! and seeded samplers for Z, Z^θ and S^local.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{is_regular, ComplexMatrix, C64, ONE, ZERO};
use crate::stokes::{SteinbergSection, StokesParams};
use crate::symplectic::eigen_gap;

/// Default tolerance for the point invariants.
pub const POINT_TOL: f64 = 1e-9;

const REGULARITY_TOL: f64 = 1e-9;
const MIN_SAMPLE_DET: f64 = 1e-8;
const MAX_SAMPLE_ATTEMPTS: usize = 32;
/// Eigenvalue separation required of sampled S^local bases.
pub const MIN_EIGEN_GAP: f64 = 1e-2;
/// Bound on max|B|·max|B⁻¹| for sampled S^local points.
pub const MAX_SLOCAL_CONDITION: f64 = 1e4;

/// A pair (B, A) with A in the section and B in its centralizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupoidPoint {
    #[serde(rename = "B")]
    pub b: ComplexMatrix,
    #[serde(rename = "A")]
    pub a: ComplexMatrix,
    pub s: StokesParams,
}

impl GroupoidPoint {
    /// Assemble without checking the invariants; s is read off A.
    pub fn from_parts(sec: &SteinbergSection, b: ComplexMatrix, a: ComplexMatrix) -> Result<Self> {
        let s = sec.params_of(&a)?;
        Ok(Self { b, a, s })
    }

    /// Max-abs distance over both components.
    pub fn distance(&self, other: &Self) -> f64 {
        self.b.max_abs_diff(&other.b).max(self.a.max_abs_diff(&other.a))
    }

    pub fn source(&self) -> &ComplexMatrix {
        &self.a
    }

    /// Equal to the source: conjugation by B fixes A.
    pub fn target(&self) -> &ComplexMatrix {
        &self.a
    }
}

/// Two points over the same base, composable in either order.
#[derive(Debug, Clone)]
pub struct ComposablePair {
    pub p: GroupoidPoint,
    pub q: GroupoidPoint,
}

impl ComposablePair {
    pub fn new(p: GroupoidPoint, q: GroupoidPoint) -> Result<Self> {
        let gap = p.a.max_abs_diff(&q.a);
        if gap >= 1e-10 {
            return Err(Error::NotComposable(format!("bases differ by {gap:e}")));
        }
        Ok(Self { p, q })
    }
}

/// Powers {I, A, …, A^n} and the traceless generators of 𝔤_A.
#[derive(Debug, Clone)]
pub struct CentralizerBasis {
    pub powers: Vec<ComplexMatrix>,
    pub traceless: Vec<ComplexMatrix>,
}

impl SteinbergSection {
    /// Largest violated invariant of (B, A) as a point of Z.
    pub fn z_defect(&self, b: &ComplexMatrix, a: &ComplexMatrix) -> Result<f64> {
        if b.dim() != self.dim() || a.dim() != self.dim() {
            return Err(Error::InvalidDimension(format!("expected {0}×{0} matrices", self.dim())));
        }
        let comm = b.commutator(a).max_abs();
        let det = (b.det() - ONE).norm();
        let s = self.params_of(a)?;
        let section = a.max_abs_diff(&self.build_m(&s)?);
        Ok(comm.max(det).max(section))
    }

    pub fn z_membership(&self, b: &ComplexMatrix, a: &ComplexMatrix, tol: f64) -> bool {
        matches!(self.z_defect(b, a), Ok(d) if d < tol)
    }

    /// Checked constructor.
    pub fn point(&self, b: ComplexMatrix, a: ComplexMatrix) -> Result<GroupoidPoint> {
        let d = self.z_defect(&b, &a)?;
        if d >= POINT_TOL {
            return Err(Error::InvalidPoint(format!("not a point of Z (defect {d:e})")));
        }
        GroupoidPoint::from_parts(self, b, a)
    }

    pub fn unit(&self, a: &ComplexMatrix) -> Result<GroupoidPoint> {
        self.point(ComplexMatrix::identity(self.dim()), a.clone())
    }

    pub fn compose(&self, pair: &ComposablePair) -> GroupoidPoint {
        GroupoidPoint { b: &pair.p.b * &pair.q.b, a: pair.q.a.clone(), s: pair.q.s.clone() }
    }

    /// Compose after checking that the bases agree.
    pub fn try_compose(&self, p: &GroupoidPoint, q: &GroupoidPoint) -> Result<GroupoidPoint> {
        Ok(self.compose(&ComposablePair::new(p.clone(), q.clone())?))
    }

    pub fn inverse(&self, p: &GroupoidPoint) -> Result<GroupoidPoint> {
        Ok(GroupoidPoint { b: p.b.inverse()?, a: p.a.clone(), s: p.s.clone() })
    }
}

pub fn centralizer_basis(a: &ComplexMatrix) -> Result<CentralizerBasis> {
    if !is_regular(a, REGULARITY_TOL) {
        return Err(Error::NotRegular);
    }
    let dim = a.dim();
    let powers: Vec<ComplexMatrix> = (0..dim).map(|j| a.pow(j)).collect();
    let traceless = powers[1..]
        .iter()
        .map(|p| {
            let shift = p.trace() / dim as f64;
            p - &ComplexMatrix::identity(dim).scale(shift)
        })
        .collect();
    Ok(CentralizerBasis { powers, traceless })
}

/// Σ c_j A^j rescaled to determinant one by the principal (n+1)-th root.
pub fn normalized_polynomial(a: &ComplexMatrix, c: &[C64]) -> Result<ComplexMatrix> {
    let dim = a.dim();
    let mut x = ComplexMatrix::zeros(dim);
    let mut power = ComplexMatrix::identity(dim);
    for &cj in c {
        x += &power.scale(cj);
        power = &power * a;
    }
    let det = x.det();
    if det.norm() < MIN_SAMPLE_DET {
        return Err(Error::SingularInput(format!("|det| = {:e}", det.norm())));
    }
    Ok(x.scale(det.powf(-1.0 / dim as f64)))
}

fn random_complex(rng: &mut impl Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn sample_commuting_with(a: &ComplexMatrix, rng: &mut impl Rng) -> Result<ComplexMatrix> {
    if !is_regular(a, REGULARITY_TOL) {
        return Err(Error::NotRegular);
    }
    for _ in 0..MAX_SAMPLE_ATTEMPTS {
        let c: Vec<C64> = (0..a.dim()).map(|_| random_complex(rng)).collect();
        if let Ok(b) = normalized_polynomial(a, &c) {
            return Ok(b);
        }
    }
    Err(Error::DegenerateSample(MAX_SAMPLE_ATTEMPTS))
}

/// Seeded element of the commutant of A with determinant one.
pub fn sample_commuting(a: &ComplexMatrix, seed: u64) -> Result<ComplexMatrix> {
    sample_commuting_with(a, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Complex parameters, real and imaginary parts uniform in [−1, 1].
pub fn random_params(n: usize, rng: &mut impl Rng) -> StokesParams {
    StokesParams((0..n).map(|_| random_complex(rng)).collect())
}

/// Real palindromic parameters with entries in [−2, 2] (points of M^local).
pub fn random_local_params(n: usize, rng: &mut impl Rng) -> StokesParams {
    let mut s = vec![ZERO; n];
    for i in 0..n.div_ceil(2) {
        let v = C64::new(rng.random_range(-2.0..2.0), 0.0);
        s[i] = v;
        s[n - 1 - i] = v;
    }
    StokesParams(s)
}

/// Parameters fixed by θ₀: s_{n−i+1} = s̄_i.
pub fn random_theta_params(n: usize, rng: &mut impl Rng) -> StokesParams {
    let mut s = vec![ZERO; n];
    for i in 0..n.div_ceil(2) {
        let mut v = random_complex(rng);
        if i == n - 1 - i {
            v.im = 0.0;
        }
        s[i] = v;
        s[n - 1 - i] = v.conj();
    }
    StokesParams(s)
}

impl SteinbergSection {
    /// Random point of Z over a random base.
    pub fn sample_z(&self, rng: &mut impl Rng) -> Result<GroupoidPoint> {
        for _ in 0..MAX_SAMPLE_ATTEMPTS {
            let s = random_params(self.n(), rng);
            let a = self.build_m(&s)?;
            if let Ok(b) = sample_commuting_with(&a, rng) {
                return Ok(GroupoidPoint { b, a, s });
            }
        }
        Err(Error::DegenerateSample(MAX_SAMPLE_ATTEMPTS))
    }

    /// Random point over a fixed base.
    pub fn sample_over(&self, a: &ComplexMatrix, rng: &mut impl Rng) -> Result<GroupoidPoint> {
        GroupoidPoint::from_parts(self, sample_commuting_with(a, rng)?, a.clone())
    }

    /// B = D·θ̂(D), D = C·β(C) for a seeded commuting C, redrawn until
    /// ‖B‖·‖B⁻¹‖ ≤ [`MAX_SLOCAL_CONDITION`]. Requires A ∈ M^local.
    pub fn sample_slocal_fiber_with(&self, a: &ComplexMatrix, rng: &mut impl Rng) -> Result<GroupoidPoint> {
        let m = self.membership(a, POINT_TOL)?;
        if !m.in_mlocal {
            return Err(Error::PreconditionViolation("base point is not in M^local".into()));
        }
        for _ in 0..MAX_SAMPLE_ATTEMPTS {
            let c = sample_commuting_with(a, rng)?;
            let d = &c * &self.beta_at(&m.s, &c)?;
            let b = &d * &self.theta_hat_at(&m.s, &d)?;
            if b.max_abs() * b.inverse()?.max_abs() <= MAX_SLOCAL_CONDITION {
                return Ok(GroupoidPoint { b, a: a.clone(), s: m.s });
            }
        }
        Err(Error::DegenerateSample(MAX_SAMPLE_ATTEMPTS))
    }

    pub fn sample_slocal_fiber(&self, a: &ComplexMatrix, seed: u64) -> Result<GroupoidPoint> {
        self.sample_slocal_fiber_with(a, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    /// Random point of S^local over a random base of M^local whose
    /// eigenvalues are separated by more than [`MIN_EIGEN_GAP`].
    pub fn sample_slocal(&self, rng: &mut impl Rng) -> Result<GroupoidPoint> {
        for _ in 0..MAX_SAMPLE_ATTEMPTS {
            let a = self.build_m(&random_local_params(self.n(), rng))?;
            if eigen_gap(&a) > MIN_EIGEN_GAP {
                return self.sample_slocal_fiber_with(&a, rng);
            }
        }
        Err(Error::DegenerateSample(MAX_SAMPLE_ATTEMPTS))
    }

    /// `count` points of S^local from one seeded stream.
    pub fn sample_slocal_batch(&self, seed: u64, count: usize) -> Result<Vec<GroupoidPoint>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| self.sample_slocal(&mut rng)).collect()
    }

    /// Random point of Z^θ: θ₀-fixed base, B = C·θ̂(C).
    pub fn sample_ztheta(&self, rng: &mut impl Rng) -> Result<GroupoidPoint> {
        let s = random_theta_params(self.n(), rng);
        let a = self.build_m(&s)?;
        let c = sample_commuting_with(&a, rng)?;
        let b = &c * &self.theta_hat_at(&s, &c)?;
        Ok(GroupoidPoint { b, a, s })
    }
}

//! The AMM 2-form restricted to Z and the checks built on it: unit blocks,
//! multiplicativity, closedness, nondegeneracy, involution pullbacks, the
//! character system and the real forms.

use crate::error::{Error, Result};
use crate::groupoid::{ComposablePair, GroupoidPoint};
use crate::linalg::{char_poly, kernel_basis, numerical_rank, singular_values, trace_form, ComplexMatrix, Rect, C64, ONE, ZERO};
use crate::stokes::{SteinbergSection, StokesParams};
use crate::tangent::{Chart, TangentKind, TangentVector};

/// Image points farther than this from Z abort a finite-difference curve.
const TUBE_TOL: f64 = 1e-7;
/// Cutoff for fixed-subspace extraction, relative to the largest singular value.
const FIXED_CUTOFF: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Involution {
    Sigma,
    Theta,
}

/// How differentials of the involutions are evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Differential {
    Analytic,
    /// Central differences of ι∘φ in the chart, with one Richardson step.
    FiniteDifference { step: f64 },
}

/// ω(u, v) at (g, a):
/// ½[(Ad_a g⁻¹X_u, g⁻¹X_v) − (Ad_a g⁻¹X_v, g⁻¹X_u)
///   + (g⁻¹X_u, a⁻¹Y_v + Y_v a⁻¹) − (g⁻¹X_v, a⁻¹Y_u + Y_u a⁻¹)]
pub fn omega(g: &ComplexMatrix, a: &ComplexMatrix, u: &TangentVector, v: &TangentVector) -> Result<C64> {
    let g_inv = g.inverse()?;
    let a_inv = a.inverse()?;
    let lu = &g_inv * &u.x;
    let lv = &g_inv * &v.x;
    let ad = |m: &ComplexMatrix| &(a * m) * &a_inv;
    let sym = |y: &ComplexMatrix| &(&a_inv * y) + &(y * &a_inv);
    let total = trace_form(&ad(&lu), &lv)? - trace_form(&ad(&lv), &lu)? + trace_form(&lu, &sym(&v.y))?
        - trace_form(&lv, &sym(&u.y))?;
    Ok(total * 0.5)
}

pub fn omega_at(p: &GroupoidPoint, u: &TangentVector, v: &TangentVector) -> Result<C64> {
    omega(&p.b, &p.a, u, v)
}

/// Closed-form values at a unit (I, a): fibre data ξ = X, horizontal data
/// ρ = a⁻¹Y.
pub fn unit_block_values(a: &ComplexMatrix, u: &TangentVector, v: &TangentVector) -> Result<C64> {
    use TangentKind::*;
    match (u.kind, v.kind) {
        (Fiber, Fiber) | (Horizontal, Horizontal) => Ok(ZERO),
        (Horizontal, Fiber) => Ok(-trace_form(&v.x, &(&a.inverse()? * &u.y))?),
        (Fiber, Horizontal) => trace_form(&u.x, &(&a.inverse()? * &v.y)),
        (k, l) => Err(Error::InvalidTangentKind(format!("{k:?}/{l:?} has no unit block formula"))),
    }
}

/// Gram matrix of ω over a basis and its realified minimum singular value.
#[derive(Debug, Clone)]
pub struct TwoFormGram {
    pub gram: ComplexMatrix,
    pub min_singular: f64,
}

impl TwoFormGram {
    /// ‖G + Gᵀ‖_max
    pub fn antisymmetry_defect(&self) -> f64 {
        (&self.gram + &self.gram.transpose()).max_abs()
    }
}

pub fn gram_matrix(p: &GroupoidPoint, basis: &[TangentVector]) -> Result<TwoFormGram> {
    let k = basis.len();
    let mut gram = ComplexMatrix::zeros(k);
    for i in 0..k {
        for j in 0..k {
            gram[(i, j)] = omega_at(p, &basis[i], &basis[j])?;
        }
    }
    let min_singular = realified_min_singular(&gram);
    Ok(TwoFormGram { gram, min_singular })
}

/// Smallest singular value of Re ω on the real span of {u_k, i·u_k}:
/// [[Re G, −Im G], [−Im G, −Re G]].
pub fn realified_min_singular(gram: &ComplexMatrix) -> f64 {
    let k = gram.dim();
    let real = Rect::from_fn(2 * k, 2 * k, |r, c| {
        let g = gram[(r % k, c % k)];
        let v = match (r < k, c < k) {
            (true, true) => g.re,
            (true, false) | (false, true) => -g.im,
            (false, false) => -g.re,
        };
        C64::new(v, 0.0)
    });
    singular_values(&real).last().copied().unwrap_or(0.0)
}

/// max |ω(J u, v) − i·ω(u, v)| over basis pairs, J = multiplication by i.
pub fn type_20_residual(p: &GroupoidPoint, basis: &[TangentVector]) -> Result<f64> {
    let i = C64::new(0.0, 1.0);
    let mut worst: f64 = 0.0;
    for u in basis {
        for v in basis {
            let lhs = omega_at(p, &u.scale(i), v)?;
            worst = worst.max((lhs - i * omega_at(p, u, v)?).norm());
        }
    }
    Ok(worst)
}

/// Minimum pairwise distance between eigenvalues, from the characteristic
/// polynomial's roots.
pub fn eigen_gap(a: &ComplexMatrix) -> f64 {
    let roots = char_poly(a).roots();
    let mut gap = f64::INFINITY;
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            gap = gap.min((roots[i] - roots[j]).norm());
        }
    }
    gap
}

/// Characters χ_i(M̃(s)) and the rank of their Jacobian in s.
#[derive(Debug, Clone)]
pub struct CharacterSystem {
    pub values: Vec<C64>,
    pub jacobian_rank: usize,
}

/// Joint fixed tangent data at a point of S^local.
#[derive(Debug, Clone)]
pub struct JointFixedForm {
    /// Real dimension of the joint (dσ, dθ)-fixed subspace.
    pub dim: usize,
    /// Smallest singular value of the Im ω Gram on it.
    pub min_singular: f64,
    /// ‖Gram + Gramᵀ‖_max
    pub antisymmetry: f64,
    /// max |Re ω| on the subspace.
    pub re_defect: f64,
}

/// Central difference, optionally with one Richardson step.
fn derivative<T, F>(f: F, h: f64, richardson: bool) -> Result<Vec<T>>
where
    F: Fn(f64) -> Result<Vec<T>>,
    T: Copy + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    let central = |h: f64| -> Result<Vec<T>> {
        let (plus, minus) = (f(h)?, f(-h)?);
        Ok(plus.into_iter().zip(minus).map(|(a, b)| (a - b) * (0.5 / h)).collect())
    };
    let coarse = central(h)?;
    if !richardson {
        return Ok(coarse);
    }
    let fine = central(h / 2.0)?;
    Ok(fine.into_iter().zip(coarse).map(|(f, c)| f * (4.0 / 3.0) + c * (-1.0 / 3.0)).collect())
}

fn flatten(p: &GroupoidPoint) -> Vec<C64> {
    p.b.as_slice().iter().chain(p.a.as_slice()).copied().collect()
}

fn unflatten(v: &[C64], dim: usize, kind: TangentKind, s_dot: Vec<C64>) -> TangentVector {
    let sq = dim * dim;
    TangentVector {
        x: ComplexMatrix::from_fn(dim, |i, j| v[i * dim + j]),
        y: ComplexMatrix::from_fn(dim, |i, j| v[sq + i * dim + j]),
        s_dot,
        kind,
    }
}

impl SteinbergSection {
    pub fn involution(&self, kind: Involution, p: &GroupoidPoint) -> Result<GroupoidPoint> {
        match kind {
            Involution::Sigma => self.apply_sigma(p),
            Involution::Theta => self.apply_theta(p),
        }
    }

    pub fn involution_differential(&self, kind: Involution, p: &GroupoidPoint, v: &TangentVector) -> Result<TangentVector> {
        match kind {
            Involution::Sigma => self.sigma_differential(p, v),
            Involution::Theta => self.theta_differential(p, v),
        }
    }

    /// Images of the real chart frame at p under dι.
    fn pushed_frame(&self, kind: Involution, chart: &Chart, p: &GroupoidPoint, frame: &[TangentVector], diff: Differential) -> Result<Vec<TangentVector>> {
        match diff {
            Differential::Analytic => frame.iter().map(|v| self.involution_differential(kind, p, v)).collect(),
            Differential::FiniteDifference { step } => {
                (0..frame.len()).map(|r| self.involution_fd(kind, chart, r, step, vec![ZERO; self.n()])).collect()
            }
        }
    }

    /// Differential of an involution along real chart direction r, by
    /// finite differences of ι∘φ.
    fn involution_fd(
        &self,
        kind: Involution,
        chart: &Chart,
        r: usize,
        step: f64,
        image_s_dot: Vec<C64>,
    ) -> Result<TangentVector> {
        let curve = |t: f64| -> Result<Vec<C64>> {
            let q = self.involution(kind, &chart.point(&chart.shifted(r, t))?)?;
            let defect = self.z_defect(&q.b, &q.a)?;
            if defect > TUBE_TOL {
                return Err(Error::ProjectionFailure(defect));
            }
            Ok(flatten(&q))
        };
        let d = derivative(curve, step, true)?;
        Ok(unflatten(&d, self.dim(), TangentKind::General, image_s_dot))
    }

    /// σ: max |ω(dσu, dσv) − ω(u, v)|; θ: max |ω(dθu, dθv) + conj ω(u, v)|,
    /// over the real chart frame at p.
    pub fn involution_pullback_residual(&self, kind: Involution, p: &GroupoidPoint, diff: Differential) -> Result<f64> {
        let chart = Chart::at(self, p)?;
        let frame = chart.frame()?;
        let image = self.involution(kind, p)?;
        let pushed = self.pushed_frame(kind, &chart, p, &frame, diff)?;
        let mut worst: f64 = 0.0;
        for a in 0..frame.len() {
            for b in a + 1..frame.len() {
                let w = omega_at(p, &frame[a], &frame[b])?;
                let w_img = omega_at(&image, &pushed[a], &pushed[b])?;
                let res = match kind {
                    Involution::Sigma => (w_img - w).norm(),
                    Involution::Theta => (w_img + w.conj()).norm(),
                };
                worst = worst.max(res);
            }
        }
        Ok(worst)
    }

    /// Finite-difference exterior derivative of ω over all triples of real
    /// chart directions; returns max |dω|.
    pub fn closedness_residual(&self, p: &GroupoidPoint, step: f64, richardson: bool) -> Result<f64> {
        let chart = Chart::at(self, p)?;
        let m = chart.real_dim();
        // omega_pairs(x)[b][c] = ω_φ(x)(∂_b, ∂_c)
        let omega_pairs = |x: &[C64]| -> Result<Vec<C64>> {
            let q = chart.point(x)?;
            let frame: Vec<TangentVector> = (0..m).map(|r| chart.tangent(x, r)).collect::<Result<_>>()?;
            let mut out = vec![ZERO; m * m];
            for b in 0..m {
                for c in b + 1..m {
                    let w = omega_at(&q, &frame[b], &frame[c])?;
                    out[b * m + c] = w;
                    out[c * m + b] = -w;
                }
            }
            Ok(out)
        };
        let partials: Vec<Vec<C64>> = (0..m)
            .map(|a| derivative(|t| omega_pairs(&chart.shifted(a, t)), step, richardson))
            .collect::<Result<_>>()?;
        let mut worst: f64 = 0.0;
        for a in 0..m {
            for b in a + 1..m {
                for c in b + 1..m {
                    let d = partials[a][b * m + c] - partials[b][a * m + c] + partials[c][a * m + b];
                    worst = worst.max(d.norm());
                }
            }
        }
        Ok(worst)
    }

    /// Tangent pairs (u₁, u₂) at (p, q) with equal Y-components: a basis of
    /// the tangent space of the composable pairs, each pair scaled to unit
    /// max-norm.
    pub fn composable_tangent_pairs(&self, pair: &ComposablePair, tol: f64) -> Result<Vec<(TangentVector, TangentVector)>> {
        let unit = |v: TangentVector| {
            let norm = v.x.max_abs().max(v.y.max_abs());
            v.scale(C64::new(1.0 / norm, 0.0))
        };
        let bp: Vec<TangentVector> = self.tangent_space(&pair.p, tol)?.into_iter().map(unit).collect();
        let bq: Vec<TangentVector> = self.tangent_space(&pair.q, tol)?.into_iter().map(unit).collect();
        let mut cols: Vec<Vec<C64>> = bp.iter().map(|u| u.y.as_slice().to_vec()).collect();
        cols.extend(bq.iter().map(|v| v.y.as_slice().iter().map(|z| -z).collect::<Vec<_>>()));
        let kernel = kernel_basis(&Rect::from_columns(&cols), tol);
        let k = bp.len();
        Ok(kernel
            .into_iter()
            .map(|w| {
                let (u1, u2) = (TangentVector::combine(&bp, &w[..k]), TangentVector::combine(&bq, &w[k..]));
                let norm = C64::new(1.0 / u1.x.max_abs().max(u2.x.max_abs()).max(u1.y.max_abs()), 0.0);
                (u1.scale(norm), u2.scale(norm))
            })
            .collect())
    }

    /// |ω(d𝔪u, d𝔪v) − ω(u₁, v₁) − ω(u₂, v₂)| with d𝔪(u₁, u₂) = (X₁B₂ + B₁X₂, Y).
    pub fn multiplicativity_residual(
        &self,
        pair: &ComposablePair,
        u: (&TangentVector, &TangentVector),
        v: (&TangentVector, &TangentVector),
    ) -> Result<f64> {
        let rel = |a: &TangentVector, b: &TangentVector| a.y.max_abs_diff(&b.y) / a.y.max_abs().max(1.0);
        let gap = rel(u.0, u.1).max(rel(v.0, v.1));
        if gap > 1e-8 {
            return Err(Error::NotComposable(format!("tangent pair has unequal base variations ({gap:e})")));
        }
        let prod = self.compose(pair);
        let push = |t: (&TangentVector, &TangentVector)| TangentVector {
            x: &(&t.0.x * &pair.q.b) + &(&pair.p.b * &t.1.x),
            y: t.0.y.clone(),
            s_dot: t.0.s_dot.clone(),
            kind: TangentKind::General,
        };
        let lhs = omega_at(&prod, &push(u), &push(v))?;
        let rhs = omega_at(&pair.p, u.0, v.0)? + omega_at(&pair.q, u.1, v.1)?;
        Ok((lhs - rhs).norm())
    }

    /// Max multiplicativity residual over a full basis of composable tangents.
    pub fn multiplicativity_max(&self, pair: &ComposablePair, tol: f64) -> Result<f64> {
        let pairs = self.composable_tangent_pairs(pair, tol)?;
        let mut worst: f64 = 0.0;
        for i in 0..pairs.len() {
            for j in i + 1..pairs.len() {
                let r = self.multiplicativity_residual(pair, (&pairs[i].0, &pairs[i].1), (&pairs[j].0, &pairs[j].1))?;
                worst = worst.max(r);
            }
        }
        Ok(worst)
    }

    pub fn character_system(&self, s: &StokesParams) -> Result<CharacterSystem> {
        let values = self.characters(s)?;
        let n = self.n();
        let mut cols = Vec::with_capacity(n);
        for k in 0..n {
            let col = derivative(
                |t| {
                    let mut shifted = s.clone();
                    shifted.0[k] += t;
                    self.characters(&shifted)
                },
                1e-4,
                true,
            )?;
            cols.push(col);
        }
        let jacobian_rank = numerical_rank(&Rect::from_columns(&cols), 1e-8);
        Ok(CharacterSystem { values, jacobian_rank })
    }

    /// dχ_i along each tangent vector, by central differences in ṡ.
    fn character_differentials(&self, s: &StokesParams, basis: &[TangentVector]) -> Result<Vec<Vec<C64>>> {
        basis
            .iter()
            .map(|v| {
                derivative(
                    |t| {
                        let shifted = StokesParams(s.0.iter().zip(&v.s_dot).map(|(a, d)| a + d * t).collect());
                        self.characters(&shifted)
                    },
                    1e-4,
                    true,
                )
            })
            .collect()
    }

    /// |{χ_i ∘ s, χ_j ∘ s}| computed through the inverse Gram; i, j are 1-based.
    pub fn poisson_bracket_residual(&self, i: usize, j: usize, p: &GroupoidPoint) -> Result<f64> {
        let basis = self.tangent_space(p, 1e-10)?;
        let g = gram_matrix(p, &basis)?;
        if g.min_singular < 1e-10 * g.gram.max_abs().max(1.0) {
            return Err(Error::DegenerateForm);
        }
        let g_inv = g.gram.inverse().map_err(|_| Error::DegenerateForm)?;
        // df[v][k] = dχ_{k+1}(v)
        let df = self.character_differentials(&p.s, &basis)?;
        let k = basis.len();
        let mut bracket = ZERO;
        for a in 0..k {
            for b in 0..k {
                bracket += df[a][i - 1] * g_inv[(a, b)] * df[b][j - 1];
            }
        }
        Ok(bracket.norm())
    }

    /// max |ω(u, v)| over pairs of fibre vectors.
    pub fn fiber_isotropy(&self, p: &GroupoidPoint) -> Result<f64> {
        let basis = self.tangent_space(p, 1e-10)?;
        let fiber: Vec<&TangentVector> = basis.iter().filter(|v| v.kind == TangentKind::Fiber).collect();
        let mut worst: f64 = 0.0;
        for u in &fiber {
            for v in &fiber {
                worst = worst.max(omega_at(p, u, v)?.norm());
            }
        }
        Ok(worst)
    }

    /// Real matrix of dι at a fixed point of ι, in the real chart frame,
    /// fitted by least squares.
    /// Real matrix of the involution's differential in an orthonormal frame.
    fn involution_matrix(&self, kind: Involution, p: &GroupoidPoint, frame: &[TangentVector]) -> Result<Vec<Vec<f64>>> {
        let u: Vec<Vec<f64>> = frame.iter().map(|v| v.realify()).collect();
        let mut columns = Vec::with_capacity(u.len());
        for v in frame {
            let img = self.involution_differential(kind, p, v)?.realify();
            let w: Vec<f64> = u.iter().map(|q| dot(q, &img)).collect();
            let scale = img.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
            let miss = (0..img.len())
                .map(|k| (img[k] - w.iter().zip(&u).map(|(c, q)| c * q[k]).sum::<f64>()).abs())
                .fold(0.0, f64::max)
                / scale;
            if miss > 1e-6 {
                return Err(Error::ProjectionFailure(miss));
            }
            columns.push(w);
        }
        // row-major D with D[i][r] = columns[r][i]
        Ok((0..u.len()).map(|i| (0..u.len()).map(|r| columns[r][i]).collect()).collect())
    }

    fn fixed_subspace(&self, blocks: &[Vec<Vec<f64>>], frame: &[TangentVector]) -> Vec<TangentVector> {
        let m = frame.len();
        let rows = blocks.len() * m;
        let rect = Rect::from_fn(rows, m, |r, c| {
            let d = &blocks[r / m];
            let i = r % m;
            C64::new(d[i][c] - if i == c { 1.0 } else { 0.0 }, 0.0)
        });
        kernel_basis(&rect, FIXED_CUTOFF)
            .into_iter()
            .map(|w| {
                let weights: Vec<C64> = w.iter().map(|z| C64::new(z.re, 0.0)).collect();
                TangentVector::combine(frame, &weights)
            })
            .collect()
    }

    fn require_fixed(&self, kind: Involution, p: &GroupoidPoint) -> Result<()> {
        let d = self.involution(kind, p)?.distance(p) / p.b.max_abs().max(1.0);
        if d > 1e-8 {
            return Err(Error::PreconditionViolation(format!("{kind:?} moves the point by {d:e}")));
        }
        Ok(())
    }

    /// max |Re ω| on the dθ-fixed tangent subspace at a θ-fixed point, with
    /// the subspace's real dimension.
    pub fn theta_fixed_re_defect(&self, p: &GroupoidPoint) -> Result<(f64, usize)> {
        self.require_fixed(Involution::Theta, p)?;
        let frame = orthonormalize(&Chart::at(self, p)?.frame()?)?;
        let d = self.involution_matrix(Involution::Theta, p, &frame)?;
        let fixed = self.fixed_subspace(&[d], &frame);
        let mut worst: f64 = 0.0;
        for u in &fixed {
            for v in &fixed {
                worst = worst.max(omega_at(p, u, v)?.re.abs());
            }
        }
        Ok((worst, fixed.len()))
    }

    /// ω restricted to the joint (dσ, dθ)-fixed subspace at a point of S^local.
    pub fn joint_fixed_form(&self, p: &GroupoidPoint) -> Result<JointFixedForm> {
        self.require_fixed(Involution::Sigma, p)?;
        self.require_fixed(Involution::Theta, p)?;
        let frame = orthonormalize(&Chart::at(self, p)?.frame()?)?;
        let ds = self.involution_matrix(Involution::Sigma, p, &frame)?;
        let dt = self.involution_matrix(Involution::Theta, p, &frame)?;
        let fixed = self.fixed_subspace(&[ds, dt], &frame);
        let k = fixed.len();
        let mut gram = vec![vec![0.0; k]; k];
        let mut re_defect: f64 = 0.0;
        for i in 0..k {
            for j in 0..k {
                let w = omega_at(p, &fixed[i], &fixed[j])?;
                gram[i][j] = w.im;
                re_defect = re_defect.max(w.re.abs());
            }
        }
        let mut antisymmetry: f64 = 0.0;
        for (i, row) in gram.iter().enumerate() {
            for (j, g) in row.iter().enumerate() {
                antisymmetry = antisymmetry.max((g + gram[j][i]).abs());
            }
        }
        let min_singular = if k == 0 {
            0.0
        } else {
            let rect = Rect::from_fn(k, k, |i, j| C64::new(gram[i][j], 0.0));
            singular_values(&rect).last().copied().unwrap_or(0.0)
        };
        Ok(JointFixedForm { dim: k, min_singular, antisymmetry, re_defect })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Modified Gram-Schmidt with one reorthogonalization pass, in realified
/// coordinates. Combinations are real so the vectors stay tangent.
fn orthonormalize(frame: &[TangentVector]) -> Result<Vec<TangentVector>> {
    let mut out: Vec<TangentVector> = Vec::with_capacity(frame.len());
    let mut flat: Vec<Vec<f64>> = Vec::with_capacity(frame.len());
    for v in frame {
        let size = v.realify().iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut w = v.clone();
        for _ in 0..2 {
            for (q, qf) in out.iter().zip(&flat) {
                let c = dot(qf, &w.realify());
                w = TangentVector::combine(&[w, q.clone()], &[ONE, C64::new(-c, 0.0)]);
            }
        }
        let norm = w.realify().iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm.is_nan() || norm <= 1e-10 * size {
            return Err(Error::DegenerateChart("chart frame is numerically dependent".into()));
        }
        let w = w.scale(C64::new(1.0 / norm, 0.0));
        flat.push(w.realify());
        out.push(w);
    }
    Ok(out)
}

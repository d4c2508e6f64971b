//! One-sided (Hestenes) Jacobi SVD for small complex rectangular matrices.
//! Sizes here stay below ~60×60 so robustness wins over speed.

use super::{C64, ZERO};

/// Rectangular complex matrix, row-major. Only used for ranks and kernels.
#[derive(Debug, Clone)]
pub struct Rect {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl Rect {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Build from column vectors of equal length.
    pub fn from_columns(cols: &[Vec<C64>]) -> Self {
        let rows = cols.first().map_or(0, Vec::len);
        Self::from_fn(rows, cols.len(), |r, c| cols[c][r])
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }
}

#[derive(Debug, Clone)]
pub struct Svd {
    /// Singular values in descending order.
    pub values: Vec<f64>,
    /// Right singular vectors, matching `values` order.
    pub right: Vec<Vec<C64>>,
}

const MAX_SWEEPS: usize = 80;

pub fn singular_values(a: &Rect) -> Vec<f64> {
    svd(a).values
}

pub fn svd(a: &Rect) -> Svd {
    let (m, p) = (a.rows, a.cols);
    let mut u: Vec<Vec<C64>> = (0..p).map(|c| (0..m).map(|r| a.get(r, c)).collect()).collect();
    let mut v: Vec<Vec<C64>> = (0..p)
        .map(|c| (0..p).map(|r| if r == c { C64::new(1.0, 0.0) } else { ZERO }).collect())
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for j in 0..p {
            for k in j + 1..p {
                let alpha: f64 = u[j].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = u[k].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = u[j].iter().zip(&u[k]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g <= 1e-15 * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut u, j, k, c, s, phase);
                rotate(&mut v, j, k, c, s, phase);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(f64, usize)> = u
        .iter()
        .enumerate()
        .map(|(i, col)| (col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(), i))
        .collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    Svd {
        values: order.iter().map(|&(s, _)| s).collect(),
        right: order.iter().map(|&(_, i)| v[i].clone()).collect(),
    }
}

// Right-multiply columns (j, k) by the unitary
// [[c, s], [-s·conj(phase), c·conj(phase)]].
fn rotate(cols: &mut [Vec<C64>], j: usize, k: usize, c: f64, s: f64, phase: C64) {
    let ph = phase.conj();
    let (left, right) = cols.split_at_mut(k);
    let (a, b) = (&mut left[j], &mut right[0]);
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let yp = *y * ph;
        let nx = *x * c - yp * s;
        let ny = *x * s + yp * c;
        *x = nx;
        *y = ny;
    }
}

/// Number of singular values above `tol · σ_max`.
pub fn numerical_rank(a: &Rect, tol: f64) -> usize {
    let sv = singular_values(a);
    let top = sv.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * top).count()
}

/// Orthonormal basis of the numerical kernel, cutoff `tol · σ_max`.
pub fn kernel_basis(a: &Rect, tol: f64) -> Vec<Vec<C64>> {
    let d = svd(a);
    let top = d.values.first().copied().unwrap_or(0.0);
    d.values
        .iter()
        .zip(d.right)
        .filter(|(&s, _)| s <= tol * top)
        .map(|(_, v)| v)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_singular_values() {
        let a = Rect::from_fn(3, 3, |r, c| if r == c { C64::new([3.0, -1.0, 2.0][r], 0.0) } else { ZERO });
        let sv = singular_values(&a);
        assert!((sv[0] - 3.0).abs() < 1e-14 && (sv[1] - 2.0).abs() < 1e-14 && (sv[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn kernel_of_wide_matrix() {
        // [1 i 0; 0 0 1]: kernel spanned by (−i, 1, 0)/√2
        let a = Rect::from_fn(2, 3, |r, c| match (r, c) {
            (0, 0) => C64::new(1.0, 0.0),
            (0, 1) => C64::new(0.0, 1.0),
            (1, 2) => C64::new(1.0, 0.0),
            _ => ZERO,
        });
        let ker = kernel_basis(&a, 1e-12);
        assert_eq!(ker.len(), 1);
        let v = &ker[0];
        let r0 = v[0] + C64::new(0.0, 1.0) * v[1];
        assert!(r0.norm() < 1e-14 && v[2].norm() < 1e-14);
        assert!((v.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn reconstructs_frobenius_norm() {
        let a = Rect::from_fn(5, 4, |r, c| C64::new((r as f64 * 1.3 + c as f64).sin(), (r * c) as f64 * 0.2));
        let fro: f64 = a.data.iter().map(|z| z.norm_sqr()).sum();
        let sv = singular_values(&a);
        let s2: f64 = sv.iter().map(|s| s * s).sum();
        assert!((fro - s2).abs() < 1e-12 * fro);
    }
}

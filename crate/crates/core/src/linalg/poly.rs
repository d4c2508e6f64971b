use serde::{Deserialize, Serialize};

use super::{complex_vec_serde, ComplexMatrix, C64, ONE, ZERO};

/// Complex polynomial, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    #[serde(with = "complex_vec_serde")]
    pub coefficients: Vec<C64>,
}

impl Polynomial {
    pub fn new(coefficients: Vec<C64>) -> Self {
        Self { coefficients }
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn eval(&self, x: C64) -> C64 {
        self.coefficients.iter().rev().fold(ZERO, |acc, &c| acc * x + c)
    }

    fn derivative_at(&self, x: C64) -> C64 {
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(ZERO, |acc, (k, &c)| acc * x + c * k as f64)
    }

    /// All roots by Aberth–Ehrlich iteration. Degree is tiny (≤ 7) here.
    pub fn roots(&self) -> Vec<C64> {
        let deg = self.degree();
        if deg == 0 {
            return Vec::new();
        }
        let lead = self.coefficients[deg];
        let monic: Vec<C64> = self.coefficients.iter().map(|c| c / lead).collect();
        let p = Polynomial::new(monic);
        // Cauchy bound for the initial circle.
        let radius = 1.0 + p.coefficients[..deg].iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut z: Vec<C64> = (0..deg)
            .map(|k| C64::from_polar(radius, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / deg as f64))
            .collect();
        for _ in 0..500 {
            let mut worst: f64 = 0.0;
            for i in 0..deg {
                let pv = p.eval(z[i]);
                let dv = p.derivative_at(z[i]);
                if pv == ZERO {
                    continue;
                }
                let ratio = pv / dv;
                let repulsion: C64 = (0..deg).filter(|&j| j != i).map(|j| ONE / (z[i] - z[j])).sum();
                let step = ratio / (ONE - ratio * repulsion);
                if step.re.is_finite() && step.im.is_finite() {
                    z[i] -= step;
                    worst = worst.max(step.norm() / (1.0 + z[i].norm()));
                }
            }
            if worst < 1e-15 {
                break;
            }
        }
        z
    }
}

/// Characteristic polynomial det(μI − M) by the Faddeev–LeVerrier trace
/// recursion. Monic, ascending coefficients.
pub fn char_poly(m: &ComplexMatrix) -> Polynomial {
    let n = m.dim();
    let mut coeffs = vec![ZERO; n + 1];
    coeffs[n] = ONE;
    let mut mk = ComplexMatrix::zeros(n);
    for k in 1..=n {
        // M_k = A·M_{k-1} + c_{n-k+1}·I
        let mut next = m * &mk;
        for i in 0..n {
            next[(i, i)] += coeffs[n - k + 1];
        }
        mk = next;
        coeffs[n - k] = -(m * &mk).trace() / k as f64;
    }
    Polynomial::new(coeffs)
}

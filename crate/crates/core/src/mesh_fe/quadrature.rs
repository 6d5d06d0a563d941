//! Tensor-product Gauss rules on the reference cell `[0, 1]^2`.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    /// Local coordinates in the reference cell.
    pub points: Vec<[f64; 2]>,
    /// Weights summing to the reference-cell area (1).
    pub weights: Vec<f64>,
    /// Highest per-variable polynomial degree integrated exactly.
    pub degree: usize,
}

/// 1D Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (x, w): (Vec<f64>, Vec<f64>) = match n {
        1 => (vec![0.0], vec![2.0]),
        2 => {
            let a = 1.0 / 3f64.sqrt();
            (vec![-a, a], vec![1.0, 1.0])
        }
        3 => {
            let a = (3.0f64 / 5.0).sqrt();
            (vec![-a, 0.0, a], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
        }
        4 => {
            let a = (3.0 / 7.0 - 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
            let b = (3.0 / 7.0 + 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
            let wa = (18.0 + 30f64.sqrt()) / 36.0;
            let wb = (18.0 - 30f64.sqrt()) / 36.0;
            (vec![-b, -a, a, b], vec![wb, wa, wa, wb])
        }
        5 => {
            let a = (5.0 - 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
            let b = (5.0 + 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
            let wa = (322.0 + 13.0 * 70f64.sqrt()) / 900.0;
            let wb = (322.0 - 13.0 * 70f64.sqrt()) / 900.0;
            (vec![-b, -a, 0.0, a, b], vec![wb, wa, 128.0 / 225.0, wa, wb])
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "Gauss rule with {n} points per axis is not tabulated (1..=5)"
            )))
        }
    };
    Ok((x, w))
}

impl QuadratureRule {
    /// `n x n` tensor Gauss rule mapped to `[0, 1]^2`.
    pub fn gauss(n: usize) -> Result<Self> {
        let (x, w) = gauss_legendre(n)?;
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                points.push([0.5 * (x[i] + 1.0), 0.5 * (x[j] + 1.0)]);
                weights.push(0.25 * w[i] * w[j]);
            }
        }
        Ok(Self {
            points,
            weights,
            degree: 2 * n - 1,
        })
    }

    /// The 3x3 rule used for every volume integral in the solver.
    pub fn default_rule() -> Self {
        Self::gauss(3).expect("3-point rule is tabulated")
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_unit_area() {
        for n in 1..=5 {
            let q = QuadratureRule::gauss(n).unwrap();
            assert!((q.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!(q.weights.iter().all(|&w| w > 0.0));
        }
        assert!(QuadratureRule::gauss(6).is_err());
    }

    #[test]
    fn monomials_integrated_exactly() {
        for n in 1..=5 {
            let q = QuadratureRule::gauss(n).unwrap();
            for p in 0..=q.degree {
                for r in 0..=q.degree {
                    let num: f64 = q
                        .points
                        .iter()
                        .zip(&q.weights)
                        .map(|(x, w)| w * x[0].powi(p as i32) * x[1].powi(r as i32))
                        .sum();
                    let exact = 1.0 / ((p + 1) * (r + 1)) as f64;
                    assert!((num - exact).abs() < 1e-13, "n={n} p={p} r={r}");
                }
            }
        }
    }
}

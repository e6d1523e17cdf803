//! Cyclic weighted shift matrices `S(a_1, ..., a_n)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariant::check_degree;

/// `A = S(a_1, ..., a_n)` with `A[j][j+1] = a_j` (indices mod n) and zeros elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ShiftDoc")]
pub struct ShiftMatrix {
    pub n: usize,
    pub weights: Vec<Complex64>,
}

#[derive(Deserialize)]
struct ShiftDoc {
    n: usize,
    weights: Vec<Complex64>,
}

impl TryFrom<ShiftDoc> for ShiftMatrix {
    type Error = Error;
    fn try_from(doc: ShiftDoc) -> Result<Self> {
        let w = ShiftMatrix::new(doc.weights)?;
        if w.n != doc.n {
            return Err(Error::InvalidInput(format!("n = {} but {} weights given", doc.n, w.n)));
        }
        Ok(w)
    }
}

impl ShiftMatrix {
    pub fn new(weights: Vec<Complex64>) -> Result<Self> {
        check_degree(weights.len())?;
        if !weights.iter().all(|w| w.re.is_finite() && w.im.is_finite()) {
            return Err(Error::InvalidInput("weights must be finite".into()));
        }
        Ok(Self { n: weights.len(), weights })
    }

    pub fn from_real(weights: &[f64]) -> Result<Self> {
        Self::new(weights.iter().map(|w| Complex64::new(*w, 0.0)).collect())
    }

    pub fn matrix(&self) -> DMatrix<Complex64> {
        let n = self.n;
        let mut a = DMatrix::zeros(n, n);
        for (j, w) in self.weights.iter().enumerate() {
            a[(j, (j + 1) % n)] = *w;
        }
        a
    }

    /// `t I + (u/2) A* + (v/2) A`.
    pub fn pencil_at(&self, t: Complex64, u: Complex64, v: Complex64) -> DMatrix<Complex64> {
        let a = self.matrix();
        let mut m = a.adjoint() * (u * 0.5) + a * (v * 0.5);
        for i in 0..self.n {
            m[(i, i)] += t;
        }
        m
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w.norm()).collect()
    }

    pub fn product(&self) -> Complex64 {
        self.weights.iter().product()
    }

    /// `U A U*` for `U = diag(e^{i theta_j})`.
    pub fn gauge(&self, theta: &[f64]) -> Self {
        let n = self.n;
        let weights = (0..n)
            .map(|j| self.weights[j] * Complex64::from_polar(1.0, theta[j] - theta[(j + 1) % n]))
            .collect();
        Self { n, weights }
    }

    pub fn is_real(&self) -> bool {
        self.weights.iter().all(|w| w.im == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip() {
        let w = ShiftMatrix::new(vec![Complex64::new(2.0, 0.0), Complex64::new(3.0, 3.0), Complex64::new(0.0, -4.0)])
            .unwrap();
        let text = serde_json::to_string(&w).unwrap();
        assert_eq!(text, r#"{"n":3,"weights":[[2.0,0.0],[3.0,3.0],[0.0,-4.0]]}"#);
        let back: ShiftMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn json_rejects_inconsistent_size() {
        assert!(serde_json::from_str::<ShiftMatrix>(r#"{"n":4,"weights":[[1,0],[1,0],[1,0]]}"#).is_err());
        assert!(serde_json::from_str::<ShiftMatrix>(r#"{"n":2,"weights":[[1,0],[1,0]]}"#).is_err());
    }

    #[test]
    fn sparsity_pattern() {
        let w = ShiftMatrix::from_real(&[4.0, 4.0, 6.0, 6.0]).unwrap();
        let a = w.matrix();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if j == (i + 1) % 4 { w.weights[i] } else { Complex64::new(0.0, 0.0) };
                assert_eq!(a[(i, j)], expected);
            }
        }
    }

    #[test]
    fn pencil_is_hermitian_on_real_points() {
        let w = ShiftMatrix::new(vec![Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.3), Complex64::new(0.0, 1.0)])
            .unwrap();
        let (x, y) = (0.7, -1.3);
        let m = w.pencil_at(Complex64::new(0.4, 0.0), Complex64::new(x, y), Complex64::new(x, -y));
        assert!((&m - m.adjoint()).norm() < 1e-15);
    }

    #[test]
    fn gauge_keeps_moduli_and_product() {
        let w = ShiftMatrix::new(vec![Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.3), Complex64::new(0.0, 1.0)])
            .unwrap();
        let g = w.gauge(&[0.3, -1.1, 2.5]);
        for (a, b) in g.moduli().iter().zip(w.moduli()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((g.product() - w.product()).norm() < 1e-14);
    }
}

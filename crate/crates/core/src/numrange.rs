//! Numerical range sampling through the support function, and real points of the curve
//! in the chart `t = 1`.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::invariant::InvariantForm;
use crate::roots::{horner_re, real_roots};
use crate::shift::ShiftMatrix;

pub const DEFAULT_ANGLES: usize = 720;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundarySample {
    pub angles: Vec<f64>,
    pub support: Vec<f64>,
    pub points: Vec<[f64; 2]>,
}

impl BoundarySample {
    /// Largest `|x cos(theta) + y sin(theta) - h(theta)|` over the sample.
    pub fn touch_residual(&self) -> f64 {
        self.angles
            .iter()
            .zip(&self.support)
            .zip(&self.points)
            .map(|((th, h), p)| (p[0] * th.cos() + p[1] * th.sin() - h).abs())
            .fold(0.0, f64::max)
    }

    /// Worst violation of `h(θ-d) + h(θ+d) >= 2 cos(d) h(θ)` on the uniform grid,
    /// which every support function of a convex set satisfies.
    pub fn concavity_defect(&self) -> f64 {
        let m = self.support.len();
        let c = (TAU / m as f64).cos();
        (0..m)
            .map(|i| {
                let h = &self.support;
                2.0 * c * h[i] - h[(i + m - 1) % m] - h[(i + 1) % m]
            })
            .fold(0.0, f64::max)
    }
}

fn top_eigenvector(h: DMatrix<Complex64>) -> (f64, DVector<Complex64>) {
    let eig = SymmetricEigen::new(h);
    let k = eig.eigenvalues.imax();
    let mut x = eig.eigenvectors.column(k).into_owned();
    // fix the phase: first nonzero component positive real
    if let Some(c) = x.iter().copied().find(|c| c.norm() > 1e-12) {
        x *= c.conj() / c.norm();
    }
    (eig.eigenvalues[k], x)
}

/// `h(θ) = λmax(cos θ Re A + sin θ Im A)` and the boundary point `x* A x` for a top
/// eigenvector `x`. `Re A` and `Im A` are the Hermitian parts.
pub fn support(a: &DMatrix<Complex64>, theta: f64) -> (f64, [f64; 2]) {
    let rot = Complex64::from_polar(1.0, -theta);
    // cos θ ReA + sin θ ImA = (e^{-iθ} A + e^{iθ} A*) / 2
    let h = (a * rot + a.adjoint() * rot.conj()) * Complex64::new(0.5, 0.0);
    let (lam, x) = top_eigenvector(h);
    let z = (x.adjoint() * a * &x)[(0, 0)];
    (lam, [z.re, z.im])
}

fn grid(m: usize) -> Vec<f64> {
    (0..m).map(|i| TAU * i as f64 / m as f64).collect()
}

fn check_angles(m: usize) -> Result<()> {
    if m < 8 {
        return Err(Error::InvalidInput(format!("need at least 8 angles, got {m}")));
    }
    Ok(())
}

pub fn boundary_sample_matrix(a: &DMatrix<Complex64>, m: usize) -> Result<BoundarySample> {
    check_angles(m)?;
    let angles = grid(m);
    let (support, points): (Vec<f64>, Vec<[f64; 2]>) = angles.par_iter().map(|th| support(a, *th)).unzip();
    Ok(BoundarySample { angles, support, points })
}

pub fn boundary_sample(w: &ShiftMatrix, m: usize) -> Result<BoundarySample> {
    boundary_sample_matrix(&w.matrix(), m)
}

/// Largest support-function gap between the two ranges on a uniform grid.
pub fn range_gap(a: &ShiftMatrix, b: &ShiftMatrix, m: usize) -> Result<f64> {
    let sa = boundary_sample(a, m)?;
    let sb = boundary_sample(b, m)?;
    Ok(sa.support.iter().zip(&sb.support).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

pub fn range_equal(a: &ShiftMatrix, b: &ShiftMatrix, m: usize, tol: f64) -> Result<bool> {
    Ok(range_gap(a, b, m)? <= tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub theta: f64,
    pub rho: f64,
    pub x: f64,
    pub y: f64,
}

/// Real points of `f(1, x+iy, x-iy) = 0` along `m` rays from the origin.
///
/// Along the ray at angle `θ` the form restricts to `rho^n g(1/rho)` with
/// `g(t) = f(t, e^{iθ}, e^{-iθ})`; only `rho > 0` is kept so each point appears once.
pub fn curve_sample(form: &InvariantForm, m: usize, cfg: &Config) -> Result<Vec<CurvePoint>> {
    check_angles(m)?;
    let rows: Result<Vec<Vec<CurvePoint>>> = grid(m)
        .par_iter()
        .map(|&theta| {
            let mut q = form.restrict_to_angle(theta);
            q.reverse();
            let dq: Vec<f64> = q.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect();
            let profile = real_roots(&q, cfg.tol_root, cfg.tol_cluster)?;
            Ok(profile
                .roots
                .iter()
                .filter(|r| r.value > 0.0)
                .map(|r| {
                    let mut rho = r.value;
                    if r.multiplicity == 1 {
                        for _ in 0..3 {
                            let d = horner_re(&dq, rho);
                            if d != 0.0 {
                                rho -= horner_re(&q, rho) / d;
                            }
                        }
                    }
                    CurvePoint { theta, rho, x: rho * theta.cos(), y: rho * theta.sin() }
                })
                .collect())
        })
        .collect();
    Ok(rows?.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::forward_matching;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn quartic_pair() -> (ShiftMatrix, ShiftMatrix) {
        let a = ShiftMatrix::from_real(&[4.0, 4.0, 6.0, 6.0]).unwrap();
        let b = ShiftMatrix::new(vec![
            c(4.0, 0.0),
            Complex64::from_polar(4.0, PI / 12.0),
            Complex64::from_polar(6.0, PI / 4.0),
            Complex64::from_polar(6.0, -PI / 3.0),
        ])
        .unwrap();
        (a, b)
    }

    #[test]
    fn single_weight_support() {
        for n in [3, 4, 7] {
            let mut w = vec![c(0.0, 0.0); n];
            w[0] = c(3.0, -4.0);
            let a = ShiftMatrix::new(w).unwrap().matrix();
            let (h, _) = support(&a, 0.0);
            assert!((h - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_matrix() {
        let s = boundary_sample(&ShiftMatrix::from_real(&[0.0; 5]).unwrap(), 16).unwrap();
        assert!(s.support.iter().all(|h| h.abs() < 1e-15));
    }

    #[test]
    fn gauge_related_pair_has_equal_ranges() {
        let (a, b) = quartic_pair();
        assert!(range_gap(&a, &b, 720).unwrap() < 1e-9);
    }

    #[test]
    fn different_moduli_differ() {
        let (a, _) = quartic_pair();
        let b = ShiftMatrix::from_real(&[4.0, 6.0, 4.0, 6.0]).unwrap();
        assert!(!range_equal(&a, &b, 720, 1e-9).unwrap());
    }

    #[test]
    fn touch_points_lie_on_support_lines() {
        let w = ShiftMatrix::new(vec![c(1.0, 2.0), c(-0.5, 0.3), c(0.0, 1.0), c(2.0, 0.0)]).unwrap();
        let s = boundary_sample(&w, 360).unwrap();
        assert!(s.touch_residual() < 1e-9);
        assert!(s.concavity_defect() < 1e-9);
    }

    #[test]
    fn real_weights_are_mirror_symmetric() {
        let (a, _) = quartic_pair();
        let s = boundary_sample(&a, 720).unwrap();
        for i in 1..720 {
            assert!((s.support[i] - s.support[720 - i]).abs() < 1e-9);
        }
    }

    #[test]
    fn eigenvalues_lie_in_sampled_hull() {
        let w = ShiftMatrix::new(vec![c(1.0, 2.0), c(-0.5, 0.3), c(0.0, 1.0)]).unwrap();
        let a = w.matrix();
        let s = boundary_sample(&w, 180).unwrap();
        let eig = nalgebra::Schur::new(a).eigenvalues().unwrap();
        for lam in eig.iter() {
            for (th, h) in s.angles.iter().zip(&s.support) {
                assert!(lam.re * th.cos() + lam.im * th.sin() <= h + 1e-9);
            }
        }
    }

    #[test]
    fn too_few_angles() {
        let (a, b) = quartic_pair();
        assert!(range_equal(&a, &b, 7, 1e-9).is_err());
    }

    #[test]
    fn quartic_curve_residual() {
        let form = InvariantForm::new(4, vec![-26.0, 72.0], -72.0, 0.0).unwrap();
        let pts = curve_sample(&form, 720, &Config::default()).unwrap();
        assert!(!pts.is_empty());
        let poly = form.expand();
        for p in &pts {
            let val = poly.eval(&[c(1.0, 0.0), c(p.x, p.y), c(p.x, -p.y)]);
            assert!(val.norm() <= 1e-8, "{val} at {p:?}");
        }
    }

    #[test]
    fn curve_points_per_ray_bounded_by_degree() {
        let w = ShiftMatrix::new(vec![c(1.0, 0.5), c(0.7, -1.0), c(1.5, 0.0), c(0.2, 0.9), c(1.0, 1.0)]).unwrap();
        let form = forward_matching(&w);
        let pts = curve_sample(&form, 100, &Config::default()).unwrap();
        for th in grid(100) {
            assert!(pts.iter().filter(|p| p.theta == th).count() <= 5);
        }
    }

    #[test]
    fn curve_is_rotation_symmetric() {
        let w = ShiftMatrix::new(vec![c(1.0, 0.5), c(0.7, -1.0), c(1.5, 0.0)]).unwrap();
        let form = forward_matching(&w);
        let m = 120;
        let pts = curve_sample(&form, m, &Config::default()).unwrap();
        let rot = Complex64::from_polar(1.0, TAU / 3.0);
        for p in &pts {
            let q = c(p.x, p.y) * rot;
            let best = pts.iter().map(|r| (c(r.x, r.y) - q).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-8);
        }
    }
}

//! The forward map `A -> f_A` for shift matrices, computed two ways, plus
//! coefficient verification and dephasing to real weights.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::hyperbolicity::is_hyperbolic;
use crate::invariant::{invariant_dim, InvariantForm};
use crate::shift::ShiftMatrix;

/// Relative agreement required between the two forward oracles.
pub const ORACLE_TOL: f64 = 1e-9;
const INTERPOLATION_SEED: u64 = 0x00c0_ffee;
const HOLDOUT: usize = 3;

/// `m[r]` = sum over `r`-edge matchings of the path with edge weights `w`, times the weight product.
fn path_matchings(w: &[f64]) -> Vec<f64> {
    // prev2 / prev1: matching polynomials of the path with the last two edges removed / last edge removed
    let mut prev2 = vec![1.0];
    let mut prev1 = vec![1.0];
    for wk in w {
        let mut next = prev1.clone();
        next.resize(next.len().max(prev2.len() + 1), 0.0);
        for (r, b) in prev2.iter().enumerate() {
            next[r + 1] += wk * b;
        }
        prev2 = prev1;
        prev1 = next;
    }
    prev1
}

/// Matching polynomial of the `n`-cycle whose edge `j` joins vertices `j` and `j + 1`.
fn cycle_matchings(w: &[f64]) -> Vec<f64> {
    let n = w.len();
    let mut m = path_matchings(&w[1..]);
    let with_first = path_matchings(&w[2..n - 1]);
    m.resize(n / 2 + 1, 0.0);
    for (r, x) in with_first.iter().enumerate() {
        m[r + 1] += w[0] * x;
    }
    m
}

/// Closed-form expansion of `det(tI + (u/2)A* + (v/2)A)` through cycle-graph matchings.
pub fn forward_matching(w: &ShiftMatrix) -> InvariantForm {
    let n = w.n;
    let sq: Vec<f64> = w.weights.iter().map(|a| a.norm_sqr()).collect();
    let m = cycle_matchings(&sq);
    let c = (1..=n / 2).map(|r| (-0.25f64).powi(r as i32) * m[r]).collect();
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    let top = w.product() * (sign * 2f64.powi(1 - n as i32));
    InvariantForm::new(n, c, top.re, top.im).expect("shift matrices give valid forms")
}

/// Solve for the invariant coefficients from determinant values at points on the
/// unit torus, then check the fit on held-out points.
pub fn forward_interpolate(w: &ShiftMatrix) -> Result<InvariantForm> {
    let n = w.n;
    let k = invariant_dim(n);
    let mut rng = ChaCha8Rng::seed_from_u64(INTERPOLATION_SEED ^ n as u64);
    let mut point = || {
        let mut z = || Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
        (z(), z(), z())
    };
    let pts: Vec<_> = (0..k + HOLDOUT).map(|_| point()).collect();
    let basis_row = |(t, u, v): (Complex64, Complex64, Complex64)| -> Vec<Complex64> {
        let mut row = vec![t.powu(n as u32)];
        for r in 1..=n / 2 {
            row.push(t.powu((n - 2 * r) as u32) * (u * v).powu(r as u32));
        }
        row.push(u.powu(n as u32));
        row.push(v.powu(n as u32));
        row
    };
    let values: Vec<Complex64> =
        pts.iter().map(|&(t, u, v)| w.pencil_at(t, u, v).determinant()).collect();
    let a = DMatrix::from_fn(k, k, |i, j| basis_row(pts[i])[j]);
    let b = DVector::from_iterator(k, values[..k].iter().copied());
    let x = a
        .lu()
        .solve(&b)
        .ok_or(Error::OracleDisagreement(f64::INFINITY))?;
    let scale = x.iter().map(|z| z.norm()).fold(1.0, f64::max);
    for i in k..k + HOLDOUT {
        let pred: Complex64 = basis_row(pts[i]).iter().zip(x.iter()).map(|(p, c)| p * c).sum();
        let dev = (pred - values[i]).norm() / scale;
        if dev > ORACLE_TOL {
            return Err(Error::OracleDisagreement(dev));
        }
    }
    if (x[0] - 1.0).norm() > ORACLE_TOL * scale {
        return Err(Error::OracleDisagreement((x[0] - 1.0).norm()));
    }
    let c = (1..=n / 2).map(|r| x[r].re).collect();
    let (un, vn) = (x[k - 2], x[k - 1]);
    InvariantForm::new(n, c, (un + vn).re, (vn - un).im)
}

/// Largest coefficient difference relative to `max(1, scale)`.
pub fn relative_gap(a: &InvariantForm, b: &InvariantForm) -> f64 {
    let diff = a
        .coefficient_vector()
        .iter()
        .zip(b.coefficient_vector())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    diff / a.scale().max(b.scale())
}

/// Forward map with the two oracles cross-checked.
pub fn forward(w: &ShiftMatrix) -> Result<InvariantForm> {
    let exact = forward_matching(w);
    let interp = forward_interpolate(w)?;
    let gap = relative_gap(&exact, &interp);
    if gap > ORACLE_TOL {
        return Err(Error::OracleDisagreement(gap));
    }
    Ok(exact)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientDelta {
    pub name: String,
    pub target: f64,
    pub computed: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub max_abs_err: f64,
    pub deltas: Vec<CoefficientDelta>,
    pub hyperbolic: bool,
    /// `ct0` of the computed form vanishes.
    pub dihedral: bool,
    /// Some weight is zero, so the product condition holds vacuously.
    pub zero_weight: bool,
}

impl VerifyReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_abs_err <= tol
    }
}

fn coefficient_names(n: usize) -> Vec<String> {
    let mut names: Vec<String> = (1..=n / 2).map(|r| format!("c{r}")).collect();
    names.push("c0".into());
    names.push("ct0".into());
    names
}

pub fn verify(form: &InvariantForm, w: &ShiftMatrix, cfg: &Config) -> Result<VerifyReport> {
    if form.n != w.n {
        return Err(Error::InvalidInput(format!("form has degree {} but the shift matrix is {}x{}", form.n, w.n, w.n)));
    }
    let computed = forward_matching(w);
    let deltas: Vec<CoefficientDelta> = coefficient_names(form.n)
        .into_iter()
        .zip(form.coefficient_vector().into_iter().zip(computed.coefficient_vector()))
        .map(|(name, (target, got))| CoefficientDelta { name, target, computed: got, delta: got - target })
        .collect();
    let max_abs_err = deltas.iter().map(|d| d.delta.abs()).fold(0.0, f64::max);
    Ok(VerifyReport {
        max_abs_err,
        deltas,
        hyperbolic: is_hyperbolic(form, cfg),
        dihedral: computed.ct0.abs() <= cfg.tol_oracle * computed.scale(),
        zero_weight: w.weights.iter().any(|a| a.norm() == 0.0),
    })
}

/// Conjugate by a diagonal unitary so every weight becomes real.
///
/// Requires the weight product to be real within `tol` (relative). All weights but
/// the last come out as their moduli; the last carries the sign of the product.
pub fn realize_real(w: &ShiftMatrix, tol: f64) -> Result<ShiftMatrix> {
    let prod = w.product();
    if prod.im.abs() > tol * prod.norm() {
        return Err(Error::NotDihedral(prod.im.abs() / prod.norm()));
    }
    let n = w.n;
    let alpha: Vec<f64> = w.weights.iter().map(|a| if a.norm() == 0.0 { 0.0 } else { a.arg() }).collect();
    // theta_j = -(alpha_j + ... + alpha_{n-2}), theta_{n-1} = 0
    let mut theta = vec![0.0; n];
    for j in (0..n - 1).rev() {
        theta[j] = theta[j + 1] - alpha[j];
    }
    let rotated = w.gauge(&theta);
    let mut weights: Vec<Complex64> = w.weights.iter().map(|a| Complex64::new(a.norm(), 0.0)).collect();
    let last = rotated.weights[n - 1];
    if last.re < 0.0 {
        weights[n - 1] = -weights[n - 1];
    }
    ShiftMatrix::new(weights)
}

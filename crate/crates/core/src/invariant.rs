//! Rotation-invariant forms of degree `n` and eigenspaces of the rotation map.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{root_of_unity, Monomial, TrivariatePoly};

/// A real `C_n`-invariant form of degree `n` with `f(1,0,0) = 1`:
///
/// `t^n + sum_r c_r t^(n-2r) (uv)^r + c0 (u^n+v^n)/2 + ct0 (u^n-v^n)/(2i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FormDoc")]
pub struct InvariantForm {
    pub n: usize,
    /// `c_1 .. c_{floor(n/2)}`.
    pub c: Vec<f64>,
    pub c0: f64,
    pub ct0: f64,
}

#[derive(Deserialize)]
struct FormDoc {
    n: usize,
    c: Vec<f64>,
    c0: f64,
    ct0: f64,
}

impl TryFrom<FormDoc> for InvariantForm {
    type Error = Error;
    fn try_from(doc: FormDoc) -> Result<Self> {
        InvariantForm::new(doc.n, doc.c, doc.c0, doc.ct0)
    }
}

pub(crate) fn check_degree(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("degree n = {n} is below 3")));
    }
    Ok(())
}

impl InvariantForm {
    pub fn new(n: usize, c: Vec<f64>, c0: f64, ct0: f64) -> Result<Self> {
        check_degree(n)?;
        if c.len() != n / 2 {
            return Err(Error::InvalidInput(format!(
                "expected {} coefficients c_1..c_{}, got {}",
                n / 2,
                n / 2,
                c.len()
            )));
        }
        if !(c.iter().all(|x| x.is_finite()) && c0.is_finite() && ct0.is_finite()) {
            return Err(Error::InvalidInput("coefficients must be finite".into()));
        }
        Ok(Self { n, c, c0, ct0 })
    }

    /// `s = sqrt(c0^2 + ct0^2)`.
    pub fn s(&self) -> f64 {
        self.c0.hypot(self.ct0)
    }

    /// Coefficients of `p(t) = t^n + sum_r c_r t^(n-2r)`, constant term first.
    pub fn p_coeffs(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.n + 1];
        p[self.n] = 1.0;
        for (r, cr) in self.c.iter().enumerate() {
            p[self.n - 2 * (r + 1)] += cr;
        }
        p
    }

    /// Largest coefficient magnitude, at least 1 (the `t^n` coefficient).
    pub fn scale(&self) -> f64 {
        self.c.iter().fold(1.0f64.max(self.c0.abs()).max(self.ct0.abs()), |m, x| m.max(x.abs()))
    }

    /// Invariant coefficients as one vector `(c_1.., c0, ct0)`.
    pub fn coefficient_vector(&self) -> Vec<f64> {
        let mut v = self.c.clone();
        v.push(self.c0);
        v.push(self.ct0);
        v
    }

    /// Coefficient of `u^n`.
    pub fn u_n_coeff(&self) -> Complex64 {
        Complex64::new(self.c0, -self.ct0) * 0.5
    }

    /// Coefficient of `v^n`.
    pub fn v_n_coeff(&self) -> Complex64 {
        Complex64::new(self.c0, self.ct0) * 0.5
    }

    pub fn expand(&self) -> TrivariatePoly {
        let n = self.n as u32;
        let mut terms = vec![(Monomial::new(n, 0, 0), Complex64::new(1.0, 0.0))];
        for (idx, cr) in self.c.iter().enumerate() {
            let r = idx as u32 + 1;
            terms.push((Monomial::new(n - 2 * r, r, r), Complex64::new(*cr, 0.0)));
        }
        terms.push((Monomial::new(0, n, 0), self.u_n_coeff()));
        terms.push((Monomial::new(0, 0, n), self.v_n_coeff()));
        TrivariatePoly::from_terms(n, terms).expect("invariant terms have degree n")
    }

    /// Read the invariant coefficients back off a form, failing if it is not of the
    /// invariant shape within `tol` (relative to the largest coefficient).
    pub fn from_poly(p: &TrivariatePoly, n: usize, tol: f64) -> Result<Self> {
        check_degree(n)?;
        if p.degree() as usize != n {
            return Err(Error::InvalidInput(format!("form has degree {}, expected {n}", p.degree())));
        }
        let nn = n as u32;
        let lead = p.coeff(Monomial::new(nn, 0, 0));
        if lead.norm() == 0.0 {
            return Err(Error::InvalidInput("t^n coefficient vanishes".into()));
        }
        let p = p.scale(lead.inv());
        let c: Vec<f64> = (1..=nn / 2).map(|r| p.coeff(Monomial::new(nn - 2 * r, r, r)).re).collect();
        let un = p.coeff(Monomial::new(0, nn, 0));
        let vn = p.coeff(Monomial::new(0, 0, nn));
        let form = Self::new(n, c, (un + vn).re, (vn - un).im)?;
        let err = form.expand().max_abs_diff(&p);
        if err > tol * p.max_abs_coeff().max(1.0) {
            return Err(Error::InvalidInput(format!("form is not real C_{n}-invariant (deviation {err:e})")));
        }
        Ok(form)
    }

    /// `f(t, rho e^{i theta}, rho e^{-i theta})` as a real polynomial in `t`, constant first.
    pub fn restrict_to_angle(&self, theta: f64) -> Vec<f64> {
        let mut p = self.p_coeffs();
        let n = self.n as f64;
        p[0] += self.c0 * (n * theta).cos() + self.ct0 * (n * theta).sin();
        p
    }
}

/// Monomials of degree `k` in rotation class `ell` modulo `n`, in global order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialBasis {
    pub n: usize,
    pub k: u32,
    pub ell: usize,
    pub monomials: Vec<Monomial>,
}

impl MonomialBasis {
    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    /// Position of a monomial in the basis.
    pub fn index_of(&self, m: &Monomial) -> Option<usize> {
        self.monomials.iter().position(|x| x == m)
    }

    /// Combine basis monomials with the given coefficients.
    pub fn combine(&self, coeffs: &[Complex64]) -> TrivariatePoly {
        TrivariatePoly::from_terms(self.k, self.monomials.iter().copied().zip(coeffs.iter().copied()))
            .expect("basis monomials have degree k")
    }
}

pub fn eigenspace_basis(n: usize, k: u32, ell: usize) -> MonomialBasis {
    assert!(ell < n, "eigenvalue index {ell} out of range for n = {n}");
    let monomials = Monomial::all_of_degree(k).into_iter().filter(|m| m.class(n) == ell).collect();
    MonomialBasis { n, k, ell, monomials }
}

/// Closed-form dimension of the class-`ell` eigenspace in degree `n - 1`.
pub fn eigenspace_dim_formula(n: usize, ell: usize) -> usize {
    if n % 2 == 1 {
        n.div_ceil(2)
    } else if ell.is_multiple_of(2) {
        n / 2
    } else {
        n / 2 + 1
    }
}

/// Dimension of the degree-`n` part of the invariant ring.
pub fn invariant_dim(n: usize) -> usize {
    n / 2 + 3
}

/// Dimension of the degree-`k` invariants by averaging the rotation character over
/// the group: `(1/n) sum_ell sum_monomials w^(ell (j - k))`.
pub fn invariant_dim_by_averaging(n: usize, k: u32) -> usize {
    let monomials = Monomial::all_of_degree(k);
    let total: Complex64 = (0..n as i64)
        .map(|ell| monomials.iter().map(|m| root_of_unity(n, ell * m.charge())).sum::<Complex64>())
        .sum();
    let avg = total / n as f64;
    debug_assert!(avg.im.abs() < 1e-9);
    avg.re.round() as usize
}

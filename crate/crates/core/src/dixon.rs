//! Modified Dixon construction: the matrix `G` of forms of degree `n - 1`, the linear
//! pencil `adj(G) / f^(n-2)` and the shift matrix read off from it.

use nalgebra::{DMatrix, DVector, SVD};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::intersection::{unit, IntersectionSet, Point};
use crate::invariant::{eigenspace_basis, InvariantForm};
use crate::poly::TrivariatePoly;
use crate::shift::ShiftMatrix;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const CANDIDATES: usize = 64;
const FIT_POINTS: usize = 7;
const HOLDOUT: usize = 3;
const COND_LIMIT: f64 = 1e8;

/// Right singular vectors of `a` (padded to square) sorted by increasing singular value.
fn right_singular(a: &DMatrix<Complex64>) -> (Vec<f64>, Vec<DVector<Complex64>>) {
    let cols = a.ncols();
    let padded = if a.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("requested V");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let sigma = order.iter().map(|&i| svd.singular_values[i]).collect();
    let vecs = order.iter().map(|&i| v_t.row(i).adjoint().into_owned()).collect();
    (sigma, vecs)
}

/// How to pick a vector from a numerical nullspace of dimension above one.
pub enum Choice<'a> {
    Smallest,
    Random(&'a mut ChaCha8Rng),
}

/// A nonzero class-`ell` form of degree `n - 1` vanishing at the representatives.
pub fn vanishing_form(iset: &IntersectionSet, ell: usize, choice: &mut Choice<'_>, cfg: &Config) -> Result<TrivariatePoly> {
    let n = iset.n;
    let basis = eigenspace_basis(n, n as u32 - 1, ell);
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for (rep, at_inf) in iset.reps.iter().zip(&iset.at_infinity) {
        if *at_inf && n.is_multiple_of(2) && ell.is_multiple_of(2) {
            // every class-ell monomial carries a factor t
            continue;
        }
        let q = unit(rep);
        let row: Vec<Complex64> = basis.monomials.iter().map(|m| m.eval(&q)).collect();
        let norm = row.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            rows.push(row.iter().map(|z| z / norm).collect());
        }
    }
    let a = DMatrix::from_fn(rows.len(), basis.len(), |i, j| rows[i][j]);
    let (sigma, vecs) = right_singular(&a);
    if sigma[0] > cfg.tol_van {
        return Err(Error::NoVanishingForm { ell, sigma: sigma[0] });
    }
    let mut x = vecs[0].clone();
    if let Choice::Random(rng) = choice {
        let null = sigma.iter().take_while(|s| **s <= cfg.tol_van).count();
        if null > 1 {
            x = DVector::zeros(basis.len());
            for v in vecs.iter().take(null) {
                x += v * Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
            x /= Complex64::new(x.norm(), 0.0);
        }
    }
    // leading coefficient 1 in the global monomial order
    let big = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let lead = *x.iter().find(|z| z.norm() > 1e-6 * big).expect("unit vector");
    let coeffs: Vec<Complex64> = x.iter().map(|z| z / lead).collect();
    Ok(basis.combine(&coeffs))
}

/// Solve `h = a_hat f + b_hat g11` with `a_hat`, `b_hat` in class `ell`.
/// Returns `(a_hat, b_hat, relative residual)`.
pub fn noether_solve(
    f: &TrivariatePoly,
    g11: &TrivariatePoly,
    h: &TrivariatePoly,
    ell: usize,
) -> Result<(TrivariatePoly, TrivariatePoly, f64)> {
    let n = f.degree() as usize;
    if h.degree() as usize != 2 * n - 2 || !h.in_class(n, ell) {
        return Err(Error::Precondition(format!("h must be a class-{ell} form of degree {}", 2 * n - 2)));
    }
    let a_basis = eigenspace_basis(n, n as u32 - 2, ell);
    let b_basis = eigenspace_basis(n, n as u32 - 1, ell);
    let rows = eigenspace_basis(n, 2 * n as u32 - 2, ell);
    let columns: Vec<TrivariatePoly> = a_basis
        .monomials
        .iter()
        .map(|m| &TrivariatePoly::monomial(*m, ONE) * f)
        .chain(b_basis.monomials.iter().map(|m| &TrivariatePoly::monomial(*m, ONE) * g11))
        .collect();
    let col_scale: Vec<f64> = columns.iter().map(|c| c.max_abs_coeff().max(f64::MIN_POSITIVE)).collect();
    let k = DMatrix::from_fn(rows.len(), columns.len(), |i, j| columns[j].coeff(rows.monomials[i]) / col_scale[j]);
    let rhs = DVector::from_fn(rows.len(), |i, _| h.coeff(rows.monomials[i]));
    let sol = SVD::new(k, true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::SolveFailed(e.to_string()))?;
    let x: Vec<Complex64> = sol.iter().zip(&col_scale).map(|(z, s)| z / s).collect();
    let a_hat = a_basis.combine(&x[..a_basis.len()]);
    let b_hat = b_basis.combine(&x[a_basis.len()..]);
    let resid = (&(h - &(&a_hat * f)) - &(&b_hat * g11)).max_abs_coeff() / h.max_abs_coeff().max(f64::MIN_POSITIVE);
    Ok((a_hat, b_hat, resid))
}

/// `G = (g_ij)` with `g_ij` in class `(i - j) mod n` and `g_ji = conj_involution(g_ij)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GMatrix {
    pub n: usize,
    pub entries: Vec<Vec<TrivariatePoly>>,
    /// Largest relative Noether residual over the solved entries.
    pub noether_residual: f64,
}

impl GMatrix {
    pub fn eval(&self, p: &Point) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.entries[i][j].eval(p))
    }

    pub fn class(&self, i: usize, j: usize) -> usize {
        (i + self.n - j) % self.n
    }
}

pub fn assemble_g(form: &InvariantForm, iset: &IntersectionSet, choice: &mut Choice<'_>, cfg: &Config) -> Result<GMatrix> {
    let n = form.n;
    let f = form.expand();
    let g11 = f.d_dt();
    let mut first = vec![g11.clone()];
    for j in 1..n {
        first.push(vanishing_form(iset, (n - j) % n, choice, cfg)?);
    }
    let pairs: Vec<(usize, usize)> = (1..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let solved: Vec<Result<(TrivariatePoly, f64)>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let ell = (i + n - j) % n;
            let h = &first[i].conj_involution() * &first[j];
            let (_, mut b, resid) = noether_solve(&f, &g11, &h, ell)?;
            if resid > cfg.tol_noether {
                return Err(Error::NoetherResidual { i, j, residual: resid });
            }
            if i == j {
                b = (&b + &b.conj_involution()).scale_re(0.5);
            }
            Ok((b, resid))
        })
        .collect();
    let mut entries = vec![vec![TrivariatePoly::zero(n as u32 - 1); n]; n];
    for (j, g) in first.iter().enumerate() {
        entries[0][j] = g.clone();
        entries[j][0] = g.conj_involution();
    }
    entries[0][0] = g11;
    let mut worst: f64 = 0.0;
    for (&(i, j), res) in pairs.iter().zip(solved) {
        let (b, resid) = res?;
        worst = worst.max(resid);
        entries[j][i] = b.conj_involution();
        entries[i][j] = b;
    }
    Ok(GMatrix { n, entries, noether_residual: worst })
}

/// Linear Hermitian pencil `t M_t + u M_u + v M_u*`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianPencil {
    pub n: usize,
    pub m_t: DMatrix<Complex64>,
    pub m_u: DMatrix<Complex64>,
}

impl HermitianPencil {
    pub fn eval(&self, t: Complex64, u: Complex64, v: Complex64) -> DMatrix<Complex64> {
        &self.m_t * t + &self.m_u * u + self.m_u.adjoint() * v
    }
}

/// `adj(m)`, through the inverse when `m` is well conditioned and cofactors otherwise.
fn adjugate(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = m.nrows();
    let sv = m.singular_values();
    let (hi, lo) = sv.iter().fold((0.0f64, f64::INFINITY), |(a, b), s| (a.max(*s), b.min(*s)));
    if lo > 0.0 && hi / lo < COND_LIMIT {
        if let Some(inv) = m.clone().try_inverse() {
            return inv * m.determinant();
        }
    }
    DMatrix::from_fn(n, n, |i, j| {
        // cofactor C_ji
        let minor = m.clone().remove_row(j).remove_column(i);
        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        minor.determinant() * sign
    })
}

/// Real sample points `(t, x + iy, x - iy)` on the unit sphere where `|f|` is largest,
/// led by `(1, 0, 0)`.
fn sample_points(f: &TrivariatePoly, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cands: Vec<(f64, Point)> = (0..CANDIDATES)
        .map(|_| {
            let (t, x, y): (f64, f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let r = (t * t + x * x + y * y).sqrt().max(1e-3);
            let p = [Complex64::new(t / r, 0.0), Complex64::new(x / r, y / r), Complex64::new(x / r, -y / r)];
            (f.eval(&p).norm(), p)
        })
        .collect();
    cands.sort_by(|a, b| b.0.total_cmp(&a.0));
    std::iter::once([ONE, ZERO, ZERO])
        .chain(cands.into_iter().take(FIT_POINTS + HOLDOUT - 1).map(|c| c.1))
        .collect()
}

/// Fit the pencil `adj(G(p)) / f(p)^(n-2)` entrywise as `alpha t + beta u + gamma v`.
pub fn pencil_from_adjugate(g: &GMatrix, form: &InvariantForm, seed: u64, cfg: &Config) -> Result<HermitianPencil> {
    let n = g.n;
    let f = form.expand();
    let pts = sample_points(&f, seed);
    let values: Vec<DMatrix<Complex64>> = pts
        .iter()
        .map(|p| adjugate(&g.eval(p)) / f.eval(p).powu(n as u32 - 2))
        .collect();
    let x = DMatrix::from_fn(FIT_POINTS, 3, |i, j| pts[i][j]);
    let pinv = x.pseudo_inverse(1e-14).map_err(|e| Error::SolveFailed(e.to_string()))?;
    let mut coef = [DMatrix::zeros(n, n), DMatrix::zeros(n, n), DMatrix::zeros(n, n)];
    for i in 0..n {
        for j in 0..n {
            let rhs = DVector::from_fn(FIT_POINTS, |k, _| values[k][(i, j)]);
            let sol = &pinv * rhs;
            for (c, s) in coef.iter_mut().zip(sol.iter()) {
                c[(i, j)] = *s;
            }
        }
    }
    let scale = values.iter().flat_map(|m| m.iter().map(|z| z.norm())).fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for k in FIT_POINTS..FIT_POINTS + HOLDOUT {
        let pred = &coef[0] * pts[k][0] + &coef[1] * pts[k][1] + &coef[2] * pts[k][2];
        worst = worst.max((pred - &values[k]).camax() / scale);
    }
    if worst > cfg.tol_pencil {
        return Err(Error::AdjugateMismatch { residual: worst });
    }
    let cscale = coef.iter().map(|c| c.camax()).fold(0.0, f64::max);
    for i in 0..n {
        for j in 0..n {
            let class = (i + n - j) % n;
            for (var, c) in coef.iter_mut().enumerate() {
                let allowed = matches!((var, class), (0, 0) | (1, 1)) || (var == 2 && class == n - 1);
                if !allowed {
                    if c[(i, j)].norm() > cfg.tol_pattern * cscale {
                        return Err(Error::PatternViolation(format!(
                            "entry ({i},{j}) has a {} component of size {:e}",
                            ["t", "u", "v"][var],
                            c[(i, j)].norm() / cscale
                        )));
                    }
                    c[(i, j)] = ZERO;
                }
            }
        }
    }
    let [m_t, m_u, m_v] = coef;
    let herm = (&m_t - m_t.adjoint()).camax().max((&m_v - m_u.adjoint()).camax());
    if herm > cfg.tol_pattern * cscale {
        return Err(Error::PatternViolation(format!("pencil is not Hermitian (deviation {:e})", herm / cscale)));
    }
    Ok(HermitianPencil { n, m_t: (&m_t + m_t.adjoint()) * Complex64::new(0.5, 0.0), m_u: (&m_u + m_v.adjoint()) * Complex64::new(0.5, 0.0) })
}

/// Scale to `M_t = I` by `D M D` with `D = diag(1 / sqrt(c_i))`. Returns the pencil and `D`.
pub fn normalize_pencil(p: &HermitianPencil, cfg: &Config) -> Result<(HermitianPencil, Vec<f64>)> {
    let n = p.n;
    let mut p = p.clone();
    let diag: Vec<f64> = (0..n).map(|i| p.m_t[(i, i)].re).collect();
    if diag.iter().all(|c| *c < 0.0) {
        p.m_t = -p.m_t;
        p.m_u = -p.m_u;
    } else if !diag.iter().all(|c| *c > 0.0) {
        return Err(Error::IndefiniteDiagonal);
    }
    let d: Vec<f64> = (0..n).map(|i| 1.0 / p.m_t[(i, i)].re.sqrt()).collect();
    let dm = DMatrix::from_fn(n, n, |i, j| if i == j { Complex64::new(d[i], 0.0) } else { ZERO });
    let m_t = &dm * &p.m_t * &dm;
    let m_u = &dm * &p.m_u * &dm;
    let dev = (&m_t - DMatrix::<Complex64>::identity(n, n)).camax();
    if dev > cfg.tol_pattern {
        return Err(Error::PatternViolation(format!("normalized M_t deviates from I by {dev:e}")));
    }
    Ok((HermitianPencil { n, m_t: DMatrix::identity(n, n), m_u }, d))
}

/// Read `a_j = 2 conj(M_u[j+1][j])` off a normalized pencil.
pub fn extract_shift(p: &HermitianPencil, cfg: &Config) -> Result<ShiftMatrix> {
    let n = p.n;
    if p.m_t != DMatrix::identity(n, n) {
        return Err(Error::Precondition("pencil is not normalized".into()));
    }
    let scale = p.m_u.camax().max(1.0);
    for i in 0..n {
        for j in 0..n {
            if i != (j + 1) % n && p.m_u[(i, j)].norm() > cfg.tol_pattern * scale {
                return Err(Error::PatternViolation(format!("M_u has an entry at ({i},{j})")));
            }
        }
    }
    ShiftMatrix::new((0..n).map(|j| p.m_u[((j + 1) % n, j)].conj() * 2.0).collect())
}

/// One pass of the construction for fixed orbit and nullspace choices.
pub fn construct(
    form: &InvariantForm,
    iset: &IntersectionSet,
    choice: &mut Choice<'_>,
    seed: u64,
    cfg: &Config,
) -> Result<ShiftMatrix> {
    let g = assemble_g(form, iset, choice, cfg)?;
    let pencil = pencil_from_adjugate(&g, form, seed, cfg)?;
    let (normalized, _) = normalize_pencil(&pencil, cfg)?;
    extract_shift(&normalized, cfg)
}

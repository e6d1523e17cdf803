//! Univariate root finding through balanced companion matrices.
//!
//! Coefficient slices are ordered constant term first.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative size below which leading coefficients are treated as zero.
const LEAD_TOL: f64 = 1e-14;
const POLISH_STEPS: usize = 30;
const ABERTH_STEPS: usize = 500;

/// A real root together with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealRoot {
    pub value: f64,
    pub multiplicity: usize,
}

/// Root structure of a real polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct RootProfile {
    pub degree: usize,
    /// Real roots in ascending order.
    pub roots: Vec<RealRoot>,
    /// Clusters judged non-real, with multiplicity.
    pub nonreal: Vec<(Complex64, usize)>,
    /// Largest `|p(root)|` over the reported real roots.
    pub residual: f64,
}

impl RootProfile {
    pub fn all_real(&self) -> bool {
        self.nonreal.is_empty() && self.roots.iter().map(|r| r.multiplicity).sum::<usize>() == self.degree
    }

    pub fn has_repeated(&self) -> bool {
        self.roots.iter().any(|r| r.multiplicity > 1) || self.nonreal.iter().any(|r| r.1 > 1)
    }

    /// Smallest distance between distinct real roots, infinite for fewer than two.
    pub fn min_gap(&self) -> f64 {
        self.roots.windows(2).map(|w| w[1].value - w[0].value).fold(f64::INFINITY, f64::min)
    }

    pub fn values(&self) -> Vec<f64> {
        self.roots.iter().flat_map(|r| std::iter::repeat_n(r.value, r.multiplicity)).collect()
    }
}

pub fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

pub fn horner_re(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn derivative(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect()
}

/// Trim negligible leading coefficients; errors when nothing is left.
fn trimmed(coeffs: &[Complex64]) -> Result<&[Complex64]> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::DegenerateInput);
    }
    let mut end = coeffs.len();
    while end > 0 && coeffs[end - 1].norm() <= LEAD_TOL * scale {
        end -= 1;
    }
    Ok(&coeffs[..end])
}

/// Diagonal similarity scaling by powers of two so row and column norms match.
fn balance(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    let radix = 2.0f64;
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut col = 0.0;
            let mut row = 0.0;
            for j in 0..n {
                if j != i {
                    col += m[(j, i)].norm();
                    row += m[(i, j)].norm();
                }
            }
            if col == 0.0 || row == 0.0 {
                continue;
            }
            let sum = col + row;
            let mut f = 1.0;
            let (mut c, mut r) = (col, row);
            while c < r / radix {
                c *= radix;
                r /= radix;
                f *= radix;
            }
            while c >= r * radix {
                c /= radix;
                r *= radix;
                f /= radix;
            }
            if (c + r) < 0.95 * sum {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
}

/// All complex roots with multiplicity, from the eigenvalues of the balanced
/// companion matrix followed by Newton polishing on the original polynomial.
pub fn complex_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let coeffs = trimmed(coeffs)?;
    let degree = coeffs.len() - 1;
    let zeros_at_origin = coeffs.iter().take_while(|c| c.norm() == 0.0).count();
    let reduced = &coeffs[zeros_at_origin..];
    let d = reduced.len() - 1;
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros_at_origin];
    if d == 0 {
        return Ok(roots);
    }
    let lead = reduced[d];
    if d == 1 {
        roots.push(-reduced[0] / lead);
        return Ok(roots);
    }
    let mut companion = DMatrix::<Complex64>::zeros(d, d);
    for i in 1..d {
        companion[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..d {
        companion[(i, d - 1)] = -reduced[i] / lead;
    }
    balance(&mut companion);
    let eig: Vec<Complex64> = match Schur::try_new(companion, f64::EPSILON, 10_000).and_then(|s| s.eigenvalues()) {
        Some(e) => e.iter().copied().collect(),
        None => aberth(reduced).ok_or_else(|| Error::SolveFailed(format!("root iteration did not converge (degree {d})")))?,
    };
    let dp = derivative(reduced);
    for z0 in eig.iter() {
        roots.push(polish(reduced, &dp, *z0));
    }
    debug_assert_eq!(roots.len(), degree);
    if roots.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::SolveFailed("non-finite root".into()));
    }
    Ok(roots)
}

/// Simultaneous Aberth-Ehrlich iteration, used when the QR iteration stalls.
fn aberth(p: &[Complex64]) -> Option<Vec<Complex64>> {
    let d = p.len() - 1;
    let lead = p[d].norm();
    let radius = 1.0 + p[..d].iter().map(|c| c.norm() / lead).fold(0.0, f64::max);
    let dp = derivative(p);
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| Complex64::from_polar(0.5 * radius, 2.0 * std::f64::consts::PI * k as f64 / d as f64 + 0.4))
        .collect();
    for _ in 0..ABERTH_STEPS {
        let mut largest = 0.0f64;
        for i in 0..d {
            let ratio = horner(p, z[i]) / horner(&dp, z[i]);
            let repulsion: Complex64 = (0..d).filter(|&j| j != i).map(|j| Complex64::new(1.0, 0.0) / (z[i] - z[j])).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                z[i] -= step;
                largest = largest.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if largest < 1e-15 {
            break;
        }
    }
    z.iter().all(|w| w.re.is_finite() && w.im.is_finite()).then_some(z)
}

fn polish(p: &[Complex64], dp: &[Complex64], mut z: Complex64) -> Complex64 {
    let mut val = horner(p, z).norm();
    for _ in 0..POLISH_STEPS {
        if val == 0.0 {
            break;
        }
        let slope = horner(dp, z);
        if slope.norm() == 0.0 {
            break;
        }
        let cand = z - horner(p, z) / slope;
        let cand_val = horner(p, cand).norm();
        if !(cand_val < val) {
            break;
        }
        z = cand;
        val = cand_val;
    }
    z
}

/// Group roots lying within `radius * (1 + |z|)` of each other (transitively).
/// Returns cluster means with sizes, sorted by real then imaginary part.
pub fn cluster(roots: &[Complex64], radius: f64) -> Vec<(Complex64, usize)> {
    let n = roots.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        let mut k = i;
        while parent[k] != r {
            let next = parent[k];
            parent[k] = r;
            k = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let scale = 1.0 + roots[i].norm().max(roots[j].norm());
            if (roots[i] - roots[j]).norm() <= radius * scale {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Complex64, usize)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|g| g.0 == r) {
            Some(g) => {
                g.1 += roots[i];
                g.2 += 1;
            }
            None => groups.push((r, roots[i], 1)),
        }
    }
    let mut out: Vec<(Complex64, usize)> = groups.into_iter().map(|(_, s, m)| (s / m as f64, m)).collect();
    out.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    out
}

/// Real-root profile of a real polynomial.
///
/// Roots closer than `tol_cluster * (1 + |z|)` form one multiple root. Groups that
/// are further apart but within a coarser candidate radius are merged as well when
/// the polynomial and its first `m - 1` derivatives vanish at the refined center to
/// within `MERGE_BACKWARD_TOL` relative backward error, since a double root only
/// resolves to about the square root of machine precision. A cluster is real
/// when the imaginary part of its mean is at most `tol_root * (1 + |mean|)`.
/// Non-real clusters are listed once for each half-plane.
pub fn real_roots(coeffs: &[f64], tol_root: f64, tol_cluster: f64) -> Result<RootProfile> {
    let cc: Vec<Complex64> = coeffs.iter().map(|c| Complex64::new(*c, 0.0)).collect();
    let roots = complex_roots(&cc)?;
    let degree = roots.len();
    let mut profile = RootProfile { degree, roots: Vec::new(), nonreal: Vec::new(), residual: 0.0 };
    // Real coefficients: the root multiset is conjugation-symmetric, so cluster it
    // together with its mirror image. Every cluster then holds exactly twice its
    // multiplicity and a self-conjugate cluster has an exactly real mean.
    let mirrored: Vec<Complex64> = roots.iter().copied().chain(roots.iter().map(|z| z.conj())).collect();
    let trimmed_coeffs: Vec<f64> = {
        let t = trimmed(&cc)?;
        coeffs[..t.len()].to_vec()
    };
    let mut clusters = Vec::new();
    for (members, center) in cluster_members(&mirrored, CANDIDATE_RADIUS) {
        let spread = members.iter().map(|z| (z - center).norm()).fold(0.0, f64::max);
        let m = members.len() / 2;
        if m <= 1 {
            clusters.push((center, members.len()));
            continue;
        }
        match refine_multiple(&trimmed_coeffs, center, m) {
            Some(z) => clusters.push((z, members.len())),
            None if spread <= tol_cluster * (1.0 + center.norm()) => clusters.push((center, members.len())),
            None => clusters.extend(cluster(&members, tol_cluster)),
        }
    }
    clusters.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    for (z, size) in clusters {
        let m = size / 2;
        if z.im.abs() <= tol_root * (1.0 + z.norm()) {
            profile.residual = profile.residual.max(horner_re(coeffs, z.re).abs());
            profile.roots.push(RealRoot { value: z.re, multiplicity: m });
        } else {
            profile.nonreal.push((z, m));
        }
    }
    Ok(profile)
}

const CANDIDATE_RADIUS: f64 = 1e-3;
const MERGE_BACKWARD_TOL: f64 = 1e-11;

fn cluster_members(roots: &[Complex64], radius: f64) -> Vec<(Vec<Complex64>, Complex64)> {
    let centers = cluster(roots, radius);
    let mut groups: Vec<Vec<Complex64>> = vec![Vec::new(); centers.len()];
    'outer: for z in roots {
        // each root belongs to the cluster whose center it is closest to
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, (c, _)) in centers.iter().enumerate() {
            let d = (z - c).norm();
            if d == 0.0 {
                groups[k].push(*z);
                continue 'outer;
            }
            if d < best_d {
                best_d = d;
                best = k;
            }
        }
        groups[best].push(*z);
    }
    groups.into_iter().zip(centers).map(|(g, (c, _))| (g, c)).collect()
}

/// Newton-refine a root of the `(m-1)`-th derivative near `z0` and accept it as an
/// `m`-fold root of `p` when all lower derivatives vanish there to backward-error level.
fn refine_multiple(p: &[f64], z0: Complex64, m: usize) -> Option<Complex64> {
    let mut derivs: Vec<Vec<Complex64>> = vec![p.iter().map(|c| Complex64::new(*c, 0.0)).collect()];
    for _ in 0..m {
        let next = derivative(derivs.last().unwrap());
        derivs.push(next);
    }
    let z = polish(&derivs[m - 1], &derivs[m], z0);
    for d in derivs.iter().take(m) {
        let scale: f64 = d.iter().enumerate().map(|(i, c)| c.norm() * z.norm().powi(i as i32)).sum();
        if horner(d, z).norm() > MERGE_BACKWARD_TOL * scale {
            return None;
        }
    }
    Some(z)
}

/// Determinant of the Sylvester matrix of `p` and `q` (constant-first coefficients).
pub fn resultant(p: &[f64], q: &[f64]) -> f64 {
    let dp = p.len() - 1;
    let dq = q.len() - 1;
    let size = dp + dq;
    if size == 0 {
        return 1.0;
    }
    let mut s = DMatrix::<f64>::zeros(size, size);
    for row in 0..dq {
        for (k, c) in p.iter().rev().enumerate() {
            s[(row, row + k)] = *c;
        }
    }
    for row in 0..dp {
        for (k, c) in q.iter().rev().enumerate() {
            s[(dq + row, row + k)] = *c;
        }
    }
    s.determinant()
}

/// Discriminant `(-1)^(d(d-1)/2) Res(p, p') / lead`.
pub fn discriminant(p: &[f64]) -> f64 {
    let d = p.len() - 1;
    if d < 2 {
        return 1.0;
    }
    let dp: Vec<f64> = p.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect();
    let sign = if (d * (d - 1) / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * resultant(p, &dp) / p[d]
}

/// Scale-free repeated-root indicator: the discriminant divided by the product of
/// squared root gaps over every pair except the closest one, and by the squared
/// root radius. It approximates `(min gap / radius)^2` and vanishes exactly at a
/// repeated root.
pub fn discriminant_ratio(p: &[f64], roots: &[Complex64]) -> f64 {
    let d = roots.len();
    if d < 2 {
        return f64::INFINITY;
    }
    let lead = p[d];
    let radius = roots.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut closest = (0, 1, f64::INFINITY);
    for i in 0..d {
        for j in i + 1..d {
            let g = (roots[i] - roots[j]).norm();
            if g < closest.2 {
                closest = (i, j, g);
            }
        }
    }
    let mut denom = lead.abs().powi(2 * d as i32 - 2) * radius * radius;
    for i in 0..d {
        for j in i + 1..d {
            if (i, j) != (closest.0, closest.1) {
                denom *= (roots[i] - roots[j]).norm_sqr();
            }
        }
    }
    discriminant(p).abs() / denom
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn profile(coeffs: &[f64]) -> RootProfile {
        real_roots(coeffs, 1e-8, 1e-6).unwrap()
    }

    fn poly_from_roots(roots: &[f64]) -> Vec<f64> {
        let mut p = vec![1.0];
        for r in roots {
            let mut next = vec![0.0; p.len() + 1];
            for (k, c) in p.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= r * c;
            }
            p = next;
        }
        p
    }

    #[test]
    fn quartic_plus_s() {
        // t^4 - 26 t^2 + 144 = (t^2 - 8)(t^2 - 18)
        let p = profile(&[144.0, 0.0, -26.0, 0.0, 1.0]);
        assert!(p.all_real());
        let expect = [-18f64.sqrt(), -8f64.sqrt(), 8f64.sqrt(), 18f64.sqrt()];
        assert_eq!(p.roots.len(), 4);
        for (r, e) in p.roots.iter().zip(expect) {
            assert_eq!(r.multiplicity, 1);
            assert!((r.value - e).abs() < 1e-12);
        }
    }

    #[test]
    fn quartic_minus_s() {
        // t^4 - 26 t^2 = t^2 (t^2 - 26)
        let p = profile(&[0.0, 0.0, -26.0, 0.0, 1.0]);
        assert!(p.all_real());
        let mults: Vec<_> = p.roots.iter().map(|r| (r.value, r.multiplicity)).collect();
        assert_eq!(mults.len(), 3);
        assert!((mults[0].0 + 26f64.sqrt()).abs() < 1e-12 && mults[0].1 == 1);
        assert!(mults[1].0 == 0.0 && mults[1].1 == 2);
        assert!((mults[2].0 - 26f64.sqrt()).abs() < 1e-12 && mults[2].1 == 1);
    }

    #[test]
    fn triple_zero() {
        let p = profile(&[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(p.roots, vec![RealRoot { value: 0.0, multiplicity: 3 }]);
    }

    #[test]
    fn complex_roots_are_flagged() {
        // t^3 + 1
        let p = profile(&[1.0, 0.0, 0.0, 1.0]);
        assert!(!p.all_real());
        assert_eq!(p.roots.len(), 1);
        assert_eq!(p.nonreal.len(), 2);
    }

    #[test]
    fn squared_quadratic_with_symmetric_roots() {
        // (t^2 - 1)^2 stalls the shifted QR iteration
        let p = profile(&[1.0, 0.0, -2.0, 0.0, 1.0]);
        assert!(p.all_real());
        assert_eq!(p.roots.len(), 2);
        assert!(p.roots.iter().all(|r| r.multiplicity == 2 && (r.value.abs() - 1.0).abs() < 1e-7));
    }

    #[test]
    fn degenerate_input() {
        assert_eq!(real_roots(&[0.0, 0.0], 1e-8, 1e-6), Err(Error::DegenerateInput));
    }

    #[test]
    fn high_degree_complex_polynomial() {
        // u^24 + (2 + i) u^12 + 3: roots come in rotation orbits
        let mut c = vec![Complex64::new(0.0, 0.0); 25];
        c[0] = Complex64::new(3.0, 0.0);
        c[12] = Complex64::new(2.0, 1.0);
        c[24] = Complex64::new(1.0, 0.0);
        let roots = complex_roots(&c).unwrap();
        assert_eq!(roots.len(), 24);
        for z in roots {
            assert!(horner(&c, z).norm() < 1e-10);
        }
    }

    #[test]
    fn discriminant_of_quadratic() {
        // t^2 - 3t + 2: disc = 9 - 8 = 1
        assert!((discriminant(&[2.0, -3.0, 1.0]) - 1.0).abs() < 1e-12);
        // t^3 - 3t + 1: disc = -4(-3)^3 - 27 = 81
        assert!((discriminant(&[1.0, -3.0, 0.0, 1.0]) - 81.0).abs() < 1e-9);
    }

    #[test]
    fn discriminant_ratio_tracks_gap() {
        let p = poly_from_roots(&[-1.0, 0.0, 1e-4, 2.0]);
        let roots: Vec<Complex64> = [-1.0, 0.0, 1e-4, 2.0].iter().map(|x| Complex64::new(*x, 0.0)).collect();
        let ratio = discriminant_ratio(&p, &roots);
        assert!((ratio - (1e-4f64 / 2.0).powi(2)).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn squared_polynomials_double_every_root(raw in proptest::collection::vec(-3.0f64..3.0, 1..=5)) {
            // keep roots well separated so the clustering radius is meaningful
            let mut roots = raw.clone();
            roots.sort_by(f64::total_cmp);
            prop_assume!(roots.windows(2).all(|w| w[1] - w[0] > 0.05));
            let p = poly_from_roots(&roots);
            let p2 = poly_from_roots(&roots.iter().chain(roots.iter()).copied().collect::<Vec<_>>());
            let single = profile(&p);
            let double = profile(&p2);
            prop_assert!(single.all_real() && double.all_real());
            prop_assert_eq!(double.roots.len(), single.roots.len());
            for (a, b) in single.roots.iter().zip(&double.roots) {
                prop_assert_eq!(b.multiplicity, 2 * a.multiplicity);
                prop_assert!((a.value - b.value).abs() < 1e-6);
            }
        }
    }
}

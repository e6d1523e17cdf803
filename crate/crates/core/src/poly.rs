//! Sparse homogeneous polynomials in `C[t, u, v]` and the group actions on them.
//!
//! Monomials are ordered graded-lexicographically with `t > u > v`. Iteration
//! over a [`TrivariatePoly`] always visits the leading monomial first, so any
//! vector of coefficients read off a polynomial has a deterministic layout.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative threshold under which coefficients are dropped after arithmetic.
pub const DROP_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Exponents of `t^i u^j v^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Monomial(pub [u32; 3]);

impl Monomial {
    pub fn new(i: u32, j: u32, k: u32) -> Self {
        Monomial([i, j, k])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Exponent difference `j - k`, which decides the rotation eigenvalue.
    pub fn charge(&self) -> i64 {
        self.0[1] as i64 - self.0[2] as i64
    }

    /// Rotation class `(j - k) mod n`.
    pub fn class(&self, n: usize) -> usize {
        self.charge().rem_euclid(n as i64) as usize
    }

    pub fn eval(&self, p: &[Complex64; 3]) -> Complex64 {
        let [i, j, k] = self.0;
        p[0].powu(i) * p[1].powu(j) * p[2].powu(k)
    }

    fn mul(self, other: Monomial) -> Monomial {
        Monomial([self.0[0] + other.0[0], self.0[1] + other.0[1], self.0[2] + other.0[2]])
    }

    /// All monomials of degree `d`, leading first.
    pub fn all_of_degree(d: u32) -> Vec<Monomial> {
        let mut out = Vec::with_capacity(((d + 1) * (d + 2) / 2) as usize);
        for i in (0..=d).rev() {
            for j in (0..=d - i).rev() {
                out.push(Monomial([i, j, d - i - j]));
            }
        }
        out
    }
}

// Leading monomials sort first: higher total degree, then larger t, then larger u.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .degree()
            .cmp(&self.degree())
            .then(other.0[0].cmp(&self.0[0]))
            .then(other.0[1].cmp(&self.0[1]))
            .then(other.0[2].cmp(&self.0[2]))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `exp(2 pi i k / n)`, returned exactly as `1` when `k` is a multiple of `n`.
pub fn root_of_unity(n: usize, k: i64) -> Complex64 {
    let r = k.rem_euclid(n as i64);
    if r == 0 {
        return ONE;
    }
    if 2 * r == n as i64 {
        return Complex64::new(-1.0, 0.0);
    }
    if 4 * r == n as i64 {
        return Complex64::new(0.0, 1.0);
    }
    if 4 * r == 3 * n as i64 {
        return Complex64::new(0.0, -1.0);
    }
    Complex64::from_polar(1.0, 2.0 * PI * r as f64 / n as f64)
}

/// A homogeneous polynomial stored as a sparse map from monomials to coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct TrivariatePoly {
    degree: u32,
    terms: BTreeMap<Monomial, Complex64>,
}

impl TrivariatePoly {
    pub fn zero(degree: u32) -> Self {
        Self { degree, terms: BTreeMap::new() }
    }

    pub fn monomial(m: Monomial, c: Complex64) -> Self {
        let mut p = Self::zero(m.degree());
        if c != ZERO {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn t() -> Self {
        Self::monomial(Monomial::new(1, 0, 0), ONE)
    }

    pub fn u() -> Self {
        Self::monomial(Monomial::new(0, 1, 0), ONE)
    }

    pub fn v() -> Self {
        Self::monomial(Monomial::new(0, 0, 1), ONE)
    }

    pub fn constant(c: Complex64) -> Self {
        Self::monomial(Monomial::new(0, 0, 0), c)
    }

    /// Build from explicit terms; repeated monomials are summed.
    pub fn from_terms(degree: u32, terms: impl IntoIterator<Item = (Monomial, Complex64)>) -> Result<Self> {
        let mut p = Self::zero(degree);
        for (m, c) in terms {
            if m.degree() != degree {
                return Err(Error::InvalidInput(format!(
                    "monomial {:?} does not have degree {degree}",
                    m.0
                )));
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::InvalidInput("non-finite coefficient".into()));
            }
            *p.terms.entry(m).or_insert(ZERO) += c;
        }
        p.terms.retain(|_, c| *c != ZERO);
        Ok(p)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: Monomial) -> Complex64 {
        self.terms.get(&m).copied().unwrap_or(ZERO)
    }

    /// Terms in global monomial order, leading first.
    pub fn terms(&self) -> impl Iterator<Item = (Monomial, Complex64)> + '_ {
        self.terms.iter().map(|(m, c)| (*m, *c))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn leading(&self) -> Option<(Monomial, Complex64)> {
        self.terms.iter().next().map(|(m, c)| (*m, *c))
    }

    /// Drop coefficients below `DROP_TOL` times the largest one.
    pub fn normalized(mut self) -> Self {
        let cut = DROP_TOL * self.max_abs_coeff();
        self.terms.retain(|_, c| c.norm() > cut);
        self
    }

    pub fn scale(&self, s: Complex64) -> Self {
        if s == ZERO {
            return Self::zero(self.degree);
        }
        Self { degree: self.degree, terms: self.terms.iter().map(|(m, c)| (*m, c * s)).collect() }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    fn add_scaled(&self, other: &Self, s: f64) -> Self {
        assert_eq!(self.degree, other.degree, "adding forms of different degree");
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            *terms.entry(*m).or_insert(ZERO) += c * s;
        }
        Self { degree: self.degree, terms }.normalized()
    }

    pub fn eval(&self, p: &[Complex64; 3]) -> Complex64 {
        self.terms.iter().map(|(m, c)| c * m.eval(p)).sum()
    }

    /// Partial derivative with respect to `t`.
    pub fn d_dt(&self) -> Self {
        let degree = self.degree.saturating_sub(1);
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.0[0] > 0)
            .map(|(m, c)| (Monomial([m.0[0] - 1, m.0[1], m.0[2]]), c * m.0[0] as f64))
            .collect();
        Self { degree, terms }
    }

    /// `h(t, u, v) -> h(t, w^ell u, w^-ell v)` with `w = exp(2 pi i / n)`.
    pub fn rotate(&self, n: usize, ell: i64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (*m, c * root_of_unity(n, ell * m.charge())))
            .collect();
        Self { degree: self.degree, terms }
    }

    /// The conjugation action `[t:u:v] -> [conj t : conj v : conj u]` on coefficients:
    /// the coefficient of `(i, j, k)` becomes the conjugate of the input's `(i, k, j)`.
    pub fn conj_involution(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (Monomial([m.0[0], m.0[2], m.0[1]]), c.conj()))
            .collect();
        Self { degree: self.degree, terms }
    }

    /// The reflection `u <-> v`.
    pub fn swap_uv(&self) -> Self {
        let terms = self.terms.iter().map(|(m, c)| (Monomial([m.0[0], m.0[2], m.0[1]]), *c)).collect();
        Self { degree: self.degree, terms }
    }

    /// Largest coefficient difference to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for (m, c) in &self.terms {
            worst = worst.max((c - other.coeff(*m)).norm());
        }
        for (m, c) in &other.terms {
            if !self.terms.contains_key(m) {
                worst = worst.max(c.norm());
            }
        }
        worst
    }

    /// True when every monomial has rotation class `ell`.
    pub fn in_class(&self, n: usize, ell: usize) -> bool {
        self.terms.keys().all(|m| m.class(n) == ell)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(ONE);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Substitute `x = (u+v)/2`, `y = (u-v)/(2i)`: a form in `(t, x, y)` becomes one in `(t, u, v)`.
    pub fn xy_to_uv(&self) -> Self {
        let half = Complex64::new(0.5, 0.0);
        let x = (&Self::u() + &Self::v()).scale(half);
        let y = (&Self::u() - &Self::v()).scale(Complex64::new(0.0, -0.5));
        self.substitute_linear(&x, &y)
    }

    /// Substitute `u = x + iy`, `v = x - iy`: a form in `(t, u, v)` becomes one in `(t, x, y)`.
    pub fn uv_to_xy(&self) -> Self {
        let i = Complex64::new(0.0, 1.0);
        let x = Self::u();
        let y = Self::v();
        let u = &x + &y.scale(i);
        let v = &x - &y.scale(i);
        self.substitute_linear(&u, &v)
    }

    /// Replace the second and third variables by the given linear forms, keeping `t`.
    fn substitute_linear(&self, second: &Self, third: &Self) -> Self {
        let max_j = self.terms.keys().map(|m| m.0[1]).max().unwrap_or(0);
        let max_k = self.terms.keys().map(|m| m.0[2]).max().unwrap_or(0);
        let pows = |base: &Self, top: u32| {
            let mut out = vec![Self::constant(ONE)];
            for e in 1..=top {
                let next = &out[e as usize - 1] * base;
                out.push(next);
            }
            out
        };
        let second_pows = pows(second, max_j);
        let third_pows = pows(third, max_k);
        let mut acc = Self::zero(self.degree);
        for (m, c) in &self.terms {
            let t_part = Self::monomial(Monomial::new(m.0[0], 0, 0), *c);
            let term = &(&t_part * &second_pows[m.0[1] as usize]) * &third_pows[m.0[2] as usize];
            for (mm, cc) in term.terms {
                *acc.terms.entry(mm).or_insert(ZERO) += cc;
            }
        }
        acc.normalized()
    }
}

impl Add for &TrivariatePoly {
    type Output = TrivariatePoly;
    fn add(self, rhs: Self) -> TrivariatePoly {
        self.add_scaled(rhs, 1.0)
    }
}

impl Sub for &TrivariatePoly {
    type Output = TrivariatePoly;
    fn sub(self, rhs: Self) -> TrivariatePoly {
        self.add_scaled(rhs, -1.0)
    }
}

impl Neg for &TrivariatePoly {
    type Output = TrivariatePoly;
    fn neg(self) -> TrivariatePoly {
        self.scale_re(-1.0)
    }
}

impl Mul for &TrivariatePoly {
    type Output = TrivariatePoly;
    fn mul(self, rhs: Self) -> TrivariatePoly {
        let mut terms: BTreeMap<Monomial, Complex64> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                *terms.entry(ma.mul(*mb)).or_insert(ZERO) += ca * cb;
            }
        }
        TrivariatePoly { degree: self.degree + rhs.degree, terms }.normalized()
    }
}

#[derive(Serialize, Deserialize)]
struct TermDoc {
    e: [u32; 3],
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct PolyDoc {
    degree: u32,
    terms: Vec<TermDoc>,
}

impl Serialize for TrivariatePoly {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PolyDoc {
            degree: self.degree,
            terms: self.terms().map(|(m, c)| TermDoc { e: m.0, re: c.re, im: c.im }).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TrivariatePoly {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = PolyDoc::deserialize(deserializer)?;
        TrivariatePoly::from_terms(
            doc.degree,
            doc.terms.into_iter().map(|t| (Monomial(t.e), Complex64::new(t.re, t.im))),
        )
        .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn x() -> TrivariatePoly {
        TrivariatePoly::u()
    }

    fn y() -> TrivariatePoly {
        TrivariatePoly::v()
    }

    #[test]
    fn monomial_order_is_grlex_t_u_v() {
        let ms = Monomial::all_of_degree(2);
        let expected = [[2, 0, 0], [1, 1, 0], [1, 0, 1], [0, 2, 0], [0, 1, 1], [0, 0, 2]];
        assert_eq!(ms.iter().map(|m| m.0).collect::<Vec<_>>(), expected);
        let mut sorted = ms.clone();
        sorted.reverse();
        sorted.sort();
        assert_eq!(sorted, ms);
    }

    #[test]
    fn circle_maps_to_uv() {
        // read as a form in (t, x, y)
        let circle = &(&x() * &x()) + &(&y() * &y());
        let image = circle.xy_to_uv();
        let uv = TrivariatePoly::monomial(Monomial::new(0, 1, 1), c(1.0, 0.0));
        assert!(image.max_abs_diff(&uv) < 1e-15);
    }

    #[test]
    fn t_is_fixed_and_x_is_mean() {
        assert_eq!(TrivariatePoly::t().xy_to_uv(), TrivariatePoly::t());
        let expected = (&TrivariatePoly::u() + &TrivariatePoly::v()).scale_re(0.5);
        assert!(x().xy_to_uv().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn rotation_examples() {
        let uv = &TrivariatePoly::u() * &TrivariatePoly::v();
        assert_eq!(uv.rotate(5, 1), uv);
        let u5 = TrivariatePoly::u().pow(5);
        assert_eq!(u5.rotate(5, 1), u5);
        let ru = TrivariatePoly::u().rotate(5, 1);
        assert!((ru.coeff(Monomial::new(0, 1, 0)) - root_of_unity(5, 1)).norm() < 1e-16);
    }

    #[test]
    fn conj_involution_examples() {
        let i = c(0.0, 1.0);
        let p = (&TrivariatePoly::u() - &TrivariatePoly::v()).scale(i);
        assert_eq!(p.conj_involution(), p);
        let alpha = c(2.0, -3.0);
        let q = TrivariatePoly::u().scale(alpha).conj_involution();
        assert_eq!(q, TrivariatePoly::v().scale(alpha.conj()));
    }

    #[test]
    fn derivative_in_t() {
        // t^3 - 2 t u v
        let p = TrivariatePoly::from_terms(
            3,
            [(Monomial::new(3, 0, 0), c(1.0, 0.0)), (Monomial::new(1, 1, 1), c(-2.0, 0.0))],
        )
        .unwrap();
        let d = p.d_dt();
        assert_eq!(d.degree(), 2);
        assert_eq!(d.coeff(Monomial::new(2, 0, 0)), c(3.0, 0.0));
        assert_eq!(d.coeff(Monomial::new(0, 1, 1)), c(-2.0, 0.0));
    }

    #[test]
    fn json_layout() {
        let p = TrivariatePoly::from_terms(1, [(Monomial::new(0, 1, 0), c(1.5, -2.0))]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"degree":1,"terms":[{"e":[0,1,0],"re":1.5,"im":-2.0}]}"#);
        let back: TrivariatePoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let bad = r#"{"degree":2,"terms":[{"e":[0,1,0],"re":1.0,"im":0.0}]}"#;
        assert!(serde_json::from_str::<TrivariatePoly>(bad).is_err());
    }

    #[test]
    fn drop_tolerance_removes_noise() {
        let p = TrivariatePoly::from_terms(
            1,
            [(Monomial::new(1, 0, 0), c(1.0, 0.0)), (Monomial::new(0, 1, 0), c(1e-14, 0.0))],
        )
        .unwrap();
        assert_eq!(p.normalized().len(), 1);
    }

    fn arb_poly(max_degree: u32) -> impl Strategy<Value = TrivariatePoly> {
        (0..=max_degree).prop_flat_map(|d| {
            let n = ((d + 1) * (d + 2) / 2) as usize;
            proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n).prop_map(move |cs| {
                TrivariatePoly::from_terms(
                    d,
                    Monomial::all_of_degree(d).into_iter().zip(cs).map(|(m, (re, im))| (m, Complex64::new(re, im))),
                )
                .unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn xy_uv_round_trip(p in arb_poly(10)) {
            let back = p.xy_to_uv().uv_to_xy();
            let scale = p.max_abs_coeff().max(1e-300);
            prop_assert!(back.max_abs_diff(&p) / scale < 1e-12);
        }

        #[test]
        fn conj_is_involution_and_fixed_set_is_real_linear(p in arb_poly(6), q in arb_poly(6), s in -3.0f64..3.0) {
            prop_assert_eq!(p.conj_involution().conj_involution(), p.clone());
            if p.degree() == q.degree() {
                let fp = &p + &p.conj_involution();
                let fq = &q + &q.conj_involution();
                let combo = &fp + &fq.scale_re(s);
                prop_assert!(combo.conj_involution().max_abs_diff(&combo) <= 1e-12 * combo.max_abs_coeff().max(1.0));
            }
        }

        #[test]
        fn rotation_is_multiplicative(p in arb_poly(6), n in 3usize..9) {
            let once_twice = p.rotate(n, 1).rotate(n, 1);
            prop_assert!(once_twice.max_abs_diff(&p.rotate(n, 2)) < 1e-12);
            let mut full = p.clone();
            for _ in 0..n { full = full.rotate(n, 1); }
            prop_assert!(full.max_abs_diff(&p) < 1e-12);
        }
    }
}

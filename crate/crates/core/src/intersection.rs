//! The points of `V(f, df/dt)`, their rotation orbits and the conjugate split `S`, `S-bar`.
//!
//! On a circle `t^2 = s uv` with `t = 1` and `u = z / sqrt(s)` the form restricts to
//! `A' z^(2n) + B z^n + C'` with `C' = conj(A')` and `B` real, so each root `w` of the
//! quadratic `A' w^2 + B w + C'` gives one rotation orbit `z^n = w`. Conjugation sends
//! the orbit of `w` to the orbit of `1 / conj(w)`.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::invariant::InvariantForm;
use crate::poly::{root_of_unity, TrivariatePoly};
use crate::roots::real_roots;

/// A projective point `[t : u : v]`.
pub type Point = [Complex64; 3];

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CircleFactorization {
    /// Power of `t` dividing `df/dt`.
    pub k: u32,
    /// `df/dt = n t^k prod_j (t^2 - s_j uv)`.
    pub s: Vec<f64>,
}

impl CircleFactorization {
    /// `t^k prod_j (t^2 - s_j uv)`, scaled by `n`.
    pub fn reconstruct(&self, n: usize) -> TrivariatePoly {
        let mut p = TrivariatePoly::constant(Complex64::new(n as f64, 0.0));
        for _ in 0..self.k {
            p = &p * &TrivariatePoly::t();
        }
        let t2 = &TrivariatePoly::t() * &TrivariatePoly::t();
        let uv = &TrivariatePoly::u() * &TrivariatePoly::v();
        for s in &self.s {
            p = &p * &(&t2 - &uv.scale_re(*s));
        }
        p
    }
}

/// Factor `df/dt` into circles `t^2 - s_j uv` through `Q(T) = n T^m + sum_r (n - 2r) c_r T^(m - r)`.
pub fn circle_factors(form: &InvariantForm, cfg: &Config) -> Result<CircleFactorization> {
    let n = form.n;
    let m = (n - 1) / 2;
    let k = if n.is_multiple_of(2) { 1 } else { 0 };
    let mut q = vec![0.0; m + 1];
    q[m] = n as f64;
    for r in 1..=m {
        q[m - r] = (n - 2 * r) as f64 * form.c[r - 1];
    }
    let pr = real_roots(&q, cfg.tol_root, cfg.tol_cluster)?;
    if !pr.all_real() {
        return Err(Error::NonrealCircle(format!("{:?}", pr.nonreal)));
    }
    let floor = cfg.tol_root * form.scale();
    let mut s = Vec::with_capacity(m);
    for root in pr.values() {
        if root < -floor {
            return Err(Error::NonrealCircle(format!("negative circle parameter {root}")));
        }
        s.push(root.max(0.0));
    }
    Ok(CircleFactorization { k, s })
}

/// Roots of `a w^2 + b w + c` by the cancellation-free formula; `a != 0`.
fn quadratic_roots(a: Complex64, b: Complex64, c: Complex64) -> [Complex64; 2] {
    let d = (b * b - a * c * 4.0).sqrt();
    let q = if (b.conj() * d).re >= 0.0 { -(b + d) * 0.5 } else { -(b - d) * 0.5 };
    if q.norm() == 0.0 {
        return [ZERO, ZERO];
    }
    [q / a, c / q]
}

/// Merge the two quadratic roots when they agree to `tol`.
fn with_multiplicity(w: [Complex64; 2], tol: f64) -> Vec<(Complex64, usize)> {
    if (w[0] - w[1]).norm() <= tol * (w[0].norm() + w[1].norm()) {
        vec![((w[0] + w[1]) * 0.5, 2)]
    } else {
        vec![(w[0], 1), (w[1], 1)]
    }
}

/// All `d`-th roots of `w`.
fn nth_roots(w: Complex64, d: usize) -> Vec<Complex64> {
    let r = w.norm().powf(1.0 / d as f64);
    let base = w.arg() / d as f64;
    (0..d).map(|k| Complex64::from_polar(r, base + TAU * k as f64 / d as f64)).collect()
}

fn circle_quadratic(form: &InvariantForm, s: f64) -> Result<[Complex64; 3]> {
    let n = form.n as i32;
    let a = form.u_n_coeff();
    if a.norm() == 0.0 {
        return Err(Error::LeadingZero);
    }
    let b = 1.0 + form.c.iter().enumerate().map(|(idx, cr)| cr * s.powi(-(idx as i32 + 1))).sum::<f64>();
    let scale = s.powf(-0.5 * n as f64);
    Ok([a * scale, Complex64::new(b, 0.0), form.v_n_coeff() * scale])
}

/// Orbits (with multiplicity) of `V(f, t^2 - s uv)`, each as the list of its `n` points.
fn circle_orbits(form: &InvariantForm, s: f64, cfg: &Config) -> Result<Vec<(Vec<Point>, usize)>> {
    if !(s > 0.0) {
        return Err(Error::Precondition(format!("circle parameter must be positive, got {s}")));
    }
    let [a, b, c] = circle_quadratic(form, s)?;
    let sq = s.sqrt();
    Ok(with_multiplicity(quadratic_roots(a, b, c), cfg.tol_cluster)
        .into_iter()
        .map(|(w, mult)| {
            let pts = nth_roots(w, form.n).into_iter().map(|z| [ONE, z / sq, (z * sq).inv()]).collect();
            (pts, mult)
        })
        .collect())
}

/// The `2n` points of `V(f, t^2 - s uv)` in the chart `t = 1`, with multiplicity repeated.
pub fn circle_intersect(form: &InvariantForm, s: f64, cfg: &Config) -> Result<Vec<Point>> {
    let mut out = Vec::with_capacity(2 * form.n);
    for (pts, mult) in circle_orbits(form, s, cfg)? {
        for _ in 0..mult {
            out.extend(pts.iter().copied());
        }
    }
    Ok(out)
}

/// Roots of `f(0, u, 1) = A u^n + c_{n/2} u^{n/2} + C` as points `[0 : u : 1]`, grouped into
/// orbits of `u -> omega^2 u` with the multiplicity of the root.
fn infinity_orbits(form: &InvariantForm, cfg: &Config) -> Result<Vec<(Vec<Point>, usize)>> {
    let n = form.n;
    if n % 2 == 1 {
        return Err(Error::Precondition("points at infinity only arise for even n".into()));
    }
    let a = form.u_n_coeff();
    if a.norm() == 0.0 {
        return Err(Error::LeadingZero);
    }
    let mid = Complex64::new(form.c[n / 2 - 1], 0.0);
    Ok(with_multiplicity(quadratic_roots(a, mid, form.v_n_coeff()), cfg.tol_cluster)
        .into_iter()
        .map(|(w, mult)| (nth_roots(w, n / 2).into_iter().map(|u| [ZERO, u, ONE]).collect(), mult))
        .collect())
}

/// Points at infinity `[0 : u : 1]` with the multiplicity of `u` as a root of `f(0, u, 1)`.
pub fn infinity_points(form: &InvariantForm, cfg: &Config) -> Result<Vec<(Point, usize)>> {
    Ok(infinity_orbits(form, cfg)?
        .into_iter()
        .flat_map(|(pts, mult)| pts.into_iter().map(move |p| (p, mult)))
        .collect())
}

pub fn rotate_point(p: &Point, n: usize, k: i64) -> Point {
    [p[0], p[1] * root_of_unity(n, k), p[2] * root_of_unity(n, -k)]
}

/// `[t : u : v] -> [conj t : conj v : conj u]`, kept in the same chart.
pub fn conj_point(p: &Point) -> Point {
    chart(&[p[0].conj(), p[2].conj(), p[1].conj()])
}

/// Normalize to `t = 1`, or to `v = 1` when `t = 0`.
pub fn chart(p: &Point) -> Point {
    if p[0].norm() > 0.0 {
        [ONE, p[1] / p[0], p[2] / p[0]]
    } else {
        [ZERO, p[1] / p[2], ONE]
    }
}

/// Distance between two chart-normalized points relative to their size.
pub(crate) fn chart_distance(p: &Point, q: &Point) -> f64 {
    let size = 1.0 + p.iter().chain(q.iter()).map(|z| z.norm()).fold(0.0, f64::max);
    p.iter().zip(q).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / size
}

/// Point scaled to unit max-norm, for residual evaluation.
pub(crate) fn unit(p: &Point) -> Point {
    let m = p.iter().map(|z| z.norm()).fold(0.0, f64::max);
    [p[0] / m, p[1] / m, p[2] / m]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Orbit {
    /// Canonical representative: smallest `arg u` in `[0, 2 pi)`.
    pub rep: Point,
    pub points: Vec<Point>,
    pub mult: usize,
    pub at_infinity: bool,
}

impl Orbit {
    fn new(points: Vec<Point>, mult: usize) -> Self {
        let at_infinity = points[0][0].norm() == 0.0;
        let arg = |p: &Point| p[1].arg().rem_euclid(TAU);
        let rep = *points.iter().min_by(|a, b| arg(a).total_cmp(&arg(b))).expect("orbits are nonempty");
        Self { rep, points, mult, at_infinity }
    }

    fn contains(&self, p: &Point, tol: f64) -> bool {
        self.points.iter().any(|q| chart_distance(p, q) <= tol)
    }
}

fn lex_cmp(p: &Point, q: &Point) -> Ordering {
    let key = |p: &Point| [p[1].re, p[1].im, p[2].re, p[2].im];
    key(p).iter().zip(key(q).iter()).map(|(a, b)| a.total_cmp(b)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedPoint {
    pub point: Point,
    pub mult: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntersectionSet {
    pub n: usize,
    pub factors: CircleFactorization,
    /// One representative per orbit of `S`.
    pub reps: Vec<Point>,
    pub orbit_mult: Vec<usize>,
    pub at_infinity: Vec<bool>,
    #[serde(rename = "S")]
    pub s: Vec<WeightedPoint>,
    #[serde(rename = "Sbar")]
    pub sbar: Vec<WeightedPoint>,
    /// Some orbit is its own conjugate (split evenly between `S` and `S-bar`).
    pub self_conjugate: bool,
    pub max_residual: f64,
}

impl IntersectionSet {
    /// Total count with multiplicity over `S` and `S-bar`.
    pub fn count(&self) -> usize {
        self.s.iter().chain(&self.sbar).map(|p| p.mult).sum()
    }
}

/// All orbits of `V(f, df/dt)` with multiplicity.
pub fn all_orbits(form: &InvariantForm, cfg: &Config) -> Result<(CircleFactorization, Vec<Orbit>)> {
    let factors = circle_factors(form, cfg)?;
    let floor = cfg.tol_root * form.scale();
    let mut orbits = Vec::new();
    let mut zero_circles = 0;
    let mut idx = 0;
    while idx < factors.s.len() {
        let s = factors.s[idx];
        let mut repeat = 1;
        while idx + repeat < factors.s.len() && (factors.s[idx + repeat] - s).abs() <= cfg.tol_cluster * (1.0 + s) {
            repeat += 1;
        }
        if s <= floor {
            zero_circles += repeat;
        } else {
            for (pts, mult) in circle_orbits(form, s, cfg)? {
                orbits.push(Orbit::new(pts, mult * repeat));
            }
        }
        idx += repeat;
    }
    if form.n.is_multiple_of(2) {
        let weight = factors.k as usize + 2 * zero_circles;
        for (pts, mult) in infinity_orbits(form, cfg)? {
            orbits.push(Orbit::new(pts, mult * weight));
        }
    } else if zero_circles > 0 {
        return Err(Error::LeadingZero);
    }
    Ok((factors, orbits))
}

/// Split orbits into conjugate halves. Of each conjugate pair the orbit with the
/// lexicographically larger representative goes to `S`, unless its `flips` entry
/// (indexed by pair, in order of discovery) is set.
pub fn split_conjugate(
    n: usize,
    factors: CircleFactorization,
    orbits: &[Orbit],
    flips: &[bool],
    form: &InvariantForm,
    cfg: &Config,
) -> Result<IntersectionSet> {
    let total: usize = orbits.iter().map(|o| o.mult * o.points.len()).sum();
    if total != n * (n - 1) {
        return Err(Error::SolveFailed(format!("found {total} intersection points, expected {}", n * (n - 1))));
    }
    let mut partner = vec![usize::MAX; orbits.len()];
    for (i, orbit) in orbits.iter().enumerate() {
        let image = conj_point(&orbit.rep);
        let hits: Vec<usize> = (0..orbits.len()).filter(|&j| orbits[j].contains(&image, cfg.tol_sep)).collect();
        match hits.as_slice() {
            [j] => partner[i] = *j,
            _ => {
                return Err(Error::AmbiguousOrbits(format!(
                    "conjugate of orbit {i} matches {} orbits",
                    hits.len()
                )))
            }
        }
    }
    let mut set = IntersectionSet {
        n,
        factors,
        reps: vec![],
        orbit_mult: vec![],
        at_infinity: vec![],
        s: vec![],
        sbar: vec![],
        self_conjugate: false,
        max_residual: 0.0,
    };
    let push = |set: &mut IntersectionSet, o: &Orbit, mult: usize, conj: bool| {
        set.reps.push(o.rep);
        set.orbit_mult.push(mult);
        set.at_infinity.push(o.at_infinity);
        for p in &o.points {
            set.s.push(WeightedPoint { point: *p, mult });
            set.sbar.push(WeightedPoint { point: if conj { conj_point(p) } else { *p }, mult });
        }
    };
    let mut pair_index = 0;
    for i in 0..orbits.len() {
        let j = partner[i];
        if partner[j] != i {
            return Err(Error::AmbiguousOrbits(format!("orbit {i} and its conjugate {j} do not pair up")));
        }
        if j == i {
            let o = &orbits[i];
            if o.mult % 2 == 1 {
                return Err(Error::RealSimplePoint);
            }
            set.self_conjugate = true;
            push(&mut set, o, o.mult / 2, true);
        } else if i < j {
            let mut pick = if lex_cmp(&orbits[i].rep, &orbits[j].rep) == Ordering::Less { j } else { i };
            if flips.get(pair_index).copied().unwrap_or(false) {
                pick = i + j - pick;
            }
            pair_index += 1;
            if orbits[i].mult != orbits[j].mult {
                return Err(Error::AmbiguousOrbits("conjugate orbits differ in multiplicity".into()));
            }
            push(&mut set, &orbits[pick], orbits[pick].mult, true);
        }
    }
    set.max_residual = max_residual(form, set.s.iter().chain(&set.sbar).map(|w| &w.point));
    if set.max_residual > cfg.tol_pt * (1.0 + form.scale()) {
        return Err(Error::SolveFailed(format!("intersection residual {:e}", set.max_residual)));
    }
    Ok(set)
}

/// Largest `|f|` or `|df/dt|` over the points, each scaled to unit max-norm.
pub fn max_residual<'a>(form: &InvariantForm, pts: impl Iterator<Item = &'a Point>) -> f64 {
    let f = form.expand();
    let df = f.d_dt();
    pts.map(|p| {
        let q = unit(p);
        f.eval(&q).norm().max(df.eval(&q).norm())
    })
    .fold(0.0, f64::max)
}

/// Number of conjugate orbit pairs, i.e. the length of a useful `flips` mask.
pub fn pair_count(orbits: &[Orbit], cfg: &Config) -> usize {
    orbits
        .iter()
        .filter(|o| !o.contains(&conj_point(&o.rep), cfg.tol_sep))
        .count()
        / 2
}

/// Full pipeline: circles, points, orbits and the conjugate split.
pub fn intersection_set(form: &InvariantForm, flips: &[bool], cfg: &Config) -> Result<IntersectionSet> {
    let (factors, orbits) = all_orbits(form, cfg)?;
    split_conjugate(form.n, factors, &orbits, flips, form, cfg)
}

/// True iff all points are simple and pairwise separated by more than `tol_sep`,
/// with no self-conjugate orbits.
pub fn validate_distinct(set: &IntersectionSet, cfg: &Config) -> bool {
    if set.self_conjugate || set.orbit_mult.iter().any(|m| *m != 1) {
        return false;
    }
    let pts: Vec<&Point> = set.s.iter().chain(&set.sbar).map(|w| &w.point).collect();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if chart_distance(pts[i], pts[j]) <= cfg.tol_sep {
                return false;
            }
        }
    }
    true
}

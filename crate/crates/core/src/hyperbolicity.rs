//! Hyperbolicity certificates, smooth/singular routing and the perturbed family.
//!
//! Restricted to the unit circle `u = e^{i theta}, v = e^{-i theta}` an invariant
//! form becomes `p(t) + s cos(n theta - alpha)`, so real-rootedness for every angle
//! reduces to the two univariate polynomials `p(t) + s` and `p(t) - s`.

use serde::Serialize;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::invariant::InvariantForm;
use crate::roots::{complex_roots, discriminant_ratio, real_roots, RootProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Smooth,
    Singular,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub kind: Kind,
    pub s: f64,
    /// `p + s` has a repeated root.
    pub plus_repeated: bool,
    /// `p - s` has a repeated root.
    pub minus_repeated: bool,
    /// `c0 = ct0 = 0`.
    pub zero_s: bool,
}

fn shifted(p: &[f64], shift: f64) -> Vec<f64> {
    let mut q = p.to_vec();
    q[0] += shift;
    q
}

fn profile(p: &[f64], cfg: &Config) -> Result<RootProfile> {
    real_roots(p, cfg.tol_root, cfg.tol_cluster)
}

/// `s` counts as zero when it is negligible against the form's coefficients.
fn s_is_zero(form: &InvariantForm) -> bool {
    form.s() <= 1e-14 * form.scale()
}

pub fn is_hyperbolic(form: &InvariantForm, cfg: &Config) -> bool {
    let p = form.p_coeffs();
    let s = form.s();
    [s, -s].iter().all(|&shift| profile(&shifted(&p, shift), cfg).map(|pr| pr.all_real()).unwrap_or(false))
}

fn has_repeated_root(p: &[f64], cfg: &Config) -> Result<bool> {
    let pr = profile(p, cfg)?;
    if pr.has_repeated() {
        return Ok(true);
    }
    let cc: Vec<_> = p.iter().map(|c| num_complex::Complex64::new(*c, 0.0)).collect();
    let roots = complex_roots(&cc)?;
    Ok(discriminant_ratio(p, &roots) < cfg.tol_disc)
}

pub fn classify(form: &InvariantForm, cfg: &Config) -> Result<Classification> {
    if !is_hyperbolic(form, cfg) {
        return Err(Error::NotHyperbolic);
    }
    let p = form.p_coeffs();
    let s = form.s();
    let plus_repeated = has_repeated_root(&shifted(&p, s), cfg)?;
    let minus_repeated = has_repeated_root(&shifted(&p, -s), cfg)?;
    let zero_s = s_is_zero(form);
    let kind = if plus_repeated || minus_repeated || zero_s { Kind::Singular } else { Kind::Smooth };
    Ok(Classification { kind, s, plus_repeated, minus_repeated, zero_s })
}

/// Check that `p + c` has distinct real roots given real-rootedness of `p + a` and `p + b`.
pub fn interlace_check(p: &[f64], a: f64, b: f64, c: f64, cfg: &Config) -> Result<bool> {
    if !(a < c && c < b) {
        return Err(Error::Precondition(format!("need a < c < b, got a = {a}, c = {c}, b = {b}")));
    }
    for end in [a, b] {
        if !profile(&shifted(p, end), cfg)?.all_real() {
            return Err(Error::HypothesisViolated(format!("p + ({end}) has non-real roots")));
        }
    }
    let pr = profile(&shifted(p, c), cfg)?;
    Ok(pr.all_real() && !pr.has_repeated())
}

/// Smooth hyperbolic form within `O(eps)` of a singular one.
///
/// With `s != 0` both `c0` and `ct0` shrink by `eps` towards zero (a zero
/// coefficient stays put). With `s = 0` the roots of `p` are pulled apart to make
/// them distinct and a small `c0` is switched on, no larger than `eps` and half the
/// smallest critical value of the new `p`.
pub fn perturb(form: &InvariantForm, eps: f64, cfg: &Config) -> Result<InvariantForm> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Precondition(format!("eps must be positive, got {eps}")));
    }
    let cls = classify(form, cfg)?;
    if cls.kind != Kind::Singular {
        return Err(Error::Precondition("perturb needs a singular form".into()));
    }
    let out = if !cls.zero_s {
        let sign = |x: f64| if x == 0.0 { 0.0 } else { x.signum() };
        InvariantForm::new(form.n, form.c.clone(), form.c0 - sign(form.c0) * eps, form.ct0 - sign(form.ct0) * eps)?
    } else {
        let p_eps = separate_roots(form, eps, cfg)?;
        let crit = critical_values(&p_eps)?;
        let s_eps = eps.min(0.5 * crit);
        let n = form.n;
        let c = (1..=n / 2).map(|r| p_eps[n - 2 * r]).collect();
        InvariantForm::new(n, c, s_eps, 0.0)?
    };
    match classify(&out, cfg) {
        Ok(c) if c.kind == Kind::Smooth => Ok(out),
        _ => Err(Error::PerturbationFailed { eps }),
    }
}

/// Rebuild `p` with the roots `mu_k` of `P(T)` (where `p = t^(n mod 2) P(t^2)`)
/// replaced by `mu_k + (k + 1) eps`, which makes every root of `p` simple.
fn separate_roots(form: &InvariantForm, eps: f64, cfg: &Config) -> Result<Vec<f64>> {
    let n = form.n;
    let m = n / 2;
    // P(T) = T^m + sum_r c_r T^(m - r)
    let mut big_p = vec![0.0; m + 1];
    big_p[m] = 1.0;
    for (idx, cr) in form.c.iter().enumerate() {
        big_p[m - (idx + 1)] = *cr;
    }
    let pr = profile(&big_p, cfg)?;
    if !pr.all_real() {
        return Err(Error::HypothesisViolated("p(t) is not real-rooted".into()));
    }
    let mut mu = pr.values();
    mu.sort_by(f64::total_cmp);
    let mut poly = vec![1.0];
    for (k, root) in mu.iter().enumerate() {
        let shifted_root = root.max(0.0) + (k + 1) as f64 * eps;
        // multiply by (t^2 - shifted_root)
        let mut next = vec![0.0; poly.len() + 2];
        for (i, c) in poly.iter().enumerate() {
            next[i + 2] += c;
            next[i] -= shifted_root * c;
        }
        poly = next;
    }
    if n % 2 == 1 {
        poly.insert(0, 0.0);
    }
    debug_assert_eq!(poly.len(), n + 1);
    Ok(poly)
}

/// Smallest `|p(r)|` over the critical points `r` of `p`.
fn critical_values(p: &[f64]) -> Result<f64> {
    let dp: Vec<num_complex::Complex64> =
        p.iter().enumerate().skip(1).map(|(k, c)| num_complex::Complex64::new(c * k as f64, 0.0)).collect();
    let crit = complex_roots(&dp)?;
    Ok(crit
        .iter()
        .map(|z| crate::roots::horner_re(p, z.re).abs())
        .fold(f64::INFINITY, f64::min))
}

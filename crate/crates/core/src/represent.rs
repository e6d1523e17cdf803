//! End-to-end construction of a shift matrix from an invariant hyperbolic form.
//!
//! Smooth forms go straight through the Dixon construction. Singular forms with
//! `s != 0` are first tried the same way; otherwise (or on failure) the form is
//! approached through a sequence of smooth perturbations until the gauge-invariant
//! weight data settles, and the last representation is polished against the
//! original coefficients.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::Config;
use crate::dixon::{construct, Choice};
use crate::error::{Error, Result};
use crate::forward::{forward_matching, verify, VerifyReport};
use crate::hyperbolicity::{classify, perturb, Kind};
use crate::intersection::{all_orbits, pair_count, split_conjugate};
use crate::invariant::InvariantForm;
use crate::shift::ShiftMatrix;

const REFINE_STEPS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Path {
    /// Smooth form, direct construction.
    Direct,
    /// Singular form with `s != 0` handled by the direct construction.
    Borderline,
    /// Limit of representations of perturbed forms.
    Perturbed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Representation {
    pub shift: ShiftMatrix,
    pub kind: Kind,
    pub path: Path,
    /// Construction attempts used by the last direct run (1 = no retry).
    pub attempts: usize,
    /// Perturbation sizes visited on the perturbed path.
    pub eps: Vec<f64>,
    /// Gauge data of successive perturbed representations agreed to `eps_converge`.
    pub converged: bool,
    pub verify: VerifyReport,
}

fn retryable(e: &Error) -> bool {
    matches!(
        e,
        Error::NoVanishingForm { .. }
            | Error::NoetherResidual { .. }
            | Error::AdjugateMismatch { .. }
            | Error::PatternViolation(_)
            | Error::IndefiniteDiagonal
            | Error::FinalMismatch(_)
            | Error::SolveFailed(_)
    )
}

/// Dixon construction with seeded retries over orbit splits and nullspace choices.
/// Returns the shift matrix and the number of attempts.
pub fn represent_direct(form: &InvariantForm, cfg: &Config) -> Result<(ShiftMatrix, usize)> {
    let (factors, orbits) = all_orbits(form, cfg)?;
    let pairs = pair_count(&orbits, cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut last = Error::ConvergenceFailed("no attempt made".into());
    for attempt in 0..=cfg.max_retries {
        let flips: Vec<bool> = if attempt == 0 { vec![] } else { (0..pairs).map(|_| rng.gen_bool(0.5)).collect() };
        let iset = split_conjugate(form.n, factors.clone(), &orbits, &flips, form, cfg)?;
        let mut choice = if attempt == 0 { Choice::Smallest } else { Choice::Random(&mut rng) };
        let result = construct(form, &iset, &mut choice, cfg.seed.wrapping_add(attempt as u64), cfg).and_then(|w| {
            let err = verify(form, &w, cfg)?.max_abs_err;
            if err <= cfg.tol_final {
                Ok(w)
            } else {
                Err(Error::FinalMismatch(err))
            }
        });
        match result {
            Ok(w) => return Ok((w, attempt + 1)),
            Err(e) if retryable(&e) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// Gauge-invariant data: moduli under the best cyclic alignment (and reversal) against
/// `reference`, plus the argument of the weight product.
fn gauge_distance(a: &ShiftMatrix, b: &ShiftMatrix) -> f64 {
    let n = a.n;
    let ma = a.moduli();
    let mb = b.moduli();
    let mut best = f64::INFINITY;
    for shift in 0..n {
        for reverse in [false, true] {
            let d = (0..n)
                .map(|j| {
                    let k = if reverse { (n + shift - j) % n } else { (j + shift) % n };
                    (ma[j] - mb[k]).abs()
                })
                .fold(0.0, f64::max);
            best = best.min(d);
        }
    }
    let (pa, pb) = (a.product(), b.product());
    let phase = if pa.norm() > 0.0 && pb.norm() > 0.0 { (pa * pb.conj()).arg().abs() } else { 0.0 };
    best.max(phase)
}

/// Minimum-norm Gauss-Newton on real moduli and one global phase, keeping the
/// individual phases of `start`, so that `forward(W)` matches `form`.
pub fn refine(form: &InvariantForm, start: &ShiftMatrix) -> ShiftMatrix {
    let n = start.n;
    let alpha: Vec<f64> = start.weights.iter().map(|a| if a.norm() == 0.0 { 0.0 } else { a.arg() }).collect();
    let build = |x: &[f64]| {
        let weights = (0..n)
            .map(|j| Complex64::from_polar(x[j], alpha[j] + if j == 0 { x[n] } else { 0.0 }))
            .collect();
        ShiftMatrix { n, weights }
    };
    let target = form.coefficient_vector();
    let residual = |x: &[f64]| -> DVector<f64> {
        let got = forward_matching(&build(x)).coefficient_vector();
        DVector::from_iterator(target.len(), got.iter().zip(&target).map(|(g, t)| g - t))
    };
    let mut x: Vec<f64> = start.moduli();
    x.push(0.0);
    let mut r = residual(&x);
    for _ in 0..REFINE_STEPS {
        let norm = r.amax();
        if norm <= 1e-15 * form.scale() {
            break;
        }
        let mut jac = DMatrix::zeros(target.len(), n + 1);
        for k in 0..=n {
            let h = 1e-7 * (1.0 + x[k].abs());
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] -= h;
            jac.set_column(k, &((residual(&xp) - residual(&xm)) / (2.0 * h)));
        }
        let Ok(step) = jac.pseudo_inverse(1e-12).map(|p| p * &r) else { break };
        let mut scale = 1.0;
        let mut improved = false;
        for _ in 0..20 {
            let cand: Vec<f64> = x.iter().zip(step.iter()).map(|(a, d)| a - scale * d).collect();
            let rc = residual(&cand);
            if rc.amax() < norm {
                x = cand;
                r = rc;
                improved = true;
                break;
            }
            scale *= 0.5;
        }
        if !improved {
            break;
        }
    }
    build(&x)
}

fn finish(form: &InvariantForm, shift: ShiftMatrix, cfg: &Config) -> Result<VerifyReport> {
    let report = verify(form, &shift, cfg)?;
    if report.passes(cfg.tol_final) {
        Ok(report)
    } else {
        Err(Error::FinalMismatch(report.max_abs_err))
    }
}

/// Each perturbed representation is polished against `form` before the convergence test.
/// With `s = 0` the limit has vanishing weights that move like the square root of the
/// coefficient change, so that branch is driven with `eps^2`.
fn represent_perturbed(form: &InvariantForm, kind: Kind, zero_s: bool, cfg: &Config) -> Result<Representation> {
    let mut eps_used = Vec::new();
    let mut prev: Option<ShiftMatrix> = None;
    let mut converged = false;
    let mut attempts = 0;
    let mut last_err = None;
    for k in 0..cfg.eps_max_steps {
        let eps = if zero_s { cfg.eps_at(k).powi(2) } else { cfg.eps_at(k) };
        let step = perturb(form, eps, cfg).and_then(|p| represent_direct(&p, cfg));
        let (w, tries) = match step {
            Ok(v) => v,
            Err(e) if e.is_input_error() => return Err(e),
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        eps_used.push(eps);
        attempts = tries;
        // compare limit candidates rather than the raw perturbed matrices
        let w = refine(form, &w);
        if let Some(p) = &prev {
            if gauge_distance(p, &w) <= cfg.eps_converge {
                converged = true;
                prev = Some(w);
                break;
            }
        }
        prev = Some(w);
    }
    let Some(last) = prev else {
        return Err(Error::ConvergenceFailed(format!(
            "no perturbed form could be represented ({})",
            last_err.map(|e| e.to_string()).unwrap_or_default()
        )));
    };
    let shift = last;
    let report = match finish(form, shift.clone(), cfg) {
        Ok(r) => r,
        Err(Error::FinalMismatch(err)) if !converged => {
            return Err(Error::ConvergenceFailed(format!("schedule did not settle; refined error {err:e}")))
        }
        Err(e) => return Err(e),
    };
    Ok(Representation { shift, kind, path: Path::Perturbed, attempts, eps: eps_used, converged, verify: report })
}

/// Cyclic weighted shift matrix `A` with `f_A = form`.
pub fn represent(form: &InvariantForm, cfg: &Config) -> Result<Representation> {
    cfg.validate()?;
    let cls = classify(form, cfg)?;
    let direct = |path: Path| -> Result<Representation> {
        let (shift, attempts) = represent_direct(form, cfg)?;
        let report = finish(form, shift.clone(), cfg)?;
        Ok(Representation { shift, kind: cls.kind, path, attempts, eps: vec![], converged: true, verify: report })
    };
    match cls.kind {
        Kind::Smooth => direct(Path::Direct),
        Kind::Singular if !cls.zero_s => match direct(Path::Borderline) {
            Ok(rep) => Ok(rep),
            Err(e) if e.is_input_error() => Err(e),
            Err(_) => represent_perturbed(form, cls.kind, cls.zero_s, cfg),
        },
        Kind::Singular => represent_perturbed(form, cls.kind, cls.zero_s, cfg),
    }
}

//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest harness so
//! the report is always printed.

use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hyprep_core::forward::{forward_interpolate, forward_matching, realize_real, relative_gap, verify};
use hyprep_core::hyperbolicity::{classify, is_hyperbolic, Kind};
use hyprep_core::intersection::intersection_set;
use hyprep_core::invariant::{eigenspace_basis, eigenspace_dim_formula, invariant_dim, invariant_dim_by_averaging};
use hyprep_core::numrange::range_equal;
use hyprep_core::represent::represent;
use hyprep_core::{Config, InvariantForm, ShiftMatrix};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn(&Config) -> Outcome);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_shift(rng: &mut ChaCha8Rng, n: usize) -> ShiftMatrix {
    ShiftMatrix::new((0..n).map(|_| Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..TAU))).collect())
        .unwrap()
}

fn max_abs_diff(a: &InvariantForm, b: &InvariantForm) -> f64 {
    a.coefficient_vector().iter().zip(b.coefficient_vector()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn within(elapsed: Duration, limit: f64) -> Result<(), String> {
    if elapsed.as_secs_f64() < limit {
        Ok(())
    } else {
        Err(format!("took {:.2} s, limit {limit} s", elapsed.as_secs_f64()))
    }
}

fn quartic(cfg: &Config) -> Outcome {
    let start = Instant::now();
    let form = InvariantForm::new(4, vec![-26.0, 72.0], -72.0, 0.0).unwrap();
    let rep = represent(&form, cfg).map_err(|e| e.to_string())?;
    if rep.verify.max_abs_err > 1e-6 {
        return Err(format!("verify error {:e}", rep.verify.max_abs_err));
    }
    let real = realize_real(&rep.shift, 1e-6).map_err(|e| e.to_string())?;
    if !real.is_real() {
        return Err("realized weights are not real".into());
    }
    let b = ShiftMatrix::from_real(&[4.0, 4.0, 6.0, 6.0]).unwrap();
    let exact = max_abs_diff(&forward_matching(&b), &form);
    if exact > 1e-12 {
        return Err(format!("forward of S(4,4,6,6) off by {exact:e}"));
    }
    within(start.elapsed(), 5.0)?;
    Ok(format!(
        "verify {:.1e}, real weights {:?}, {:.2} s",
        rep.verify.max_abs_err,
        real.moduli(),
        start.elapsed().as_secs_f64()
    ))
}

fn quintic(cfg: &Config) -> Outcome {
    let start = Instant::now();
    let (r2, r3, r6) = (2f64.sqrt(), 3f64.sqrt(), 6f64.sqrt());
    let a = ShiftMatrix::new(vec![c(2.0, 0.0), c(3.0, 3.0), c(r6, 0.0), c(r2, 2.0), c(0.0, -4.0)]).unwrap();
    // the oracle fixes the sign pairing of c0 and ct0
    let oracle = InvariantForm::new(5, vec![-12.5, 33.75], 3.0 * r6 + 3.0 * r3, 3.0 * r6 - 3.0 * r3).unwrap();
    let gap = max_abs_diff(&forward_matching(&a), &oracle);
    if gap > 1e-9 {
        return Err(format!("forward of the reference matrix off by {gap:e}"));
    }
    let negated = InvariantForm::new(5, oracle.c.clone(), -oracle.c0, -oracle.ct0).unwrap();
    let mut errs = Vec::new();
    for form in [&oracle, &negated] {
        let rep = represent(form, cfg).map_err(|e| e.to_string())?;
        let err = verify(form, &rep.shift, cfg).map_err(|e| e.to_string())?.max_abs_err;
        if err > 1e-6 {
            return Err(format!("verify error {err:e}"));
        }
        errs.push(err);
    }
    within(start.elapsed(), 10.0)?;
    Ok(format!(
        "verify {:.1e} / {:.1e} (both sign forms), {:.2} s",
        errs[0],
        errs[1],
        start.elapsed().as_secs_f64()
    ))
}

fn roundtrip(cfg: &Config) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for n in 3..=7 {
        for i in 0..20 {
            let w = random_shift(&mut rng, n);
            let form = forward_matching(&w);
            let rep = represent(&form, cfg).map_err(|e| format!("n = {n}, sample {i}: {e}"))?;
            let err = max_abs_diff(&forward_matching(&rep.shift), &form);
            if err > 1e-5 {
                return Err(format!("n = {n}, sample {i}: error {err:e}"));
            }
            worst = worst.max(err);
        }
    }
    within(start.elapsed(), 180.0)?;
    Ok(format!("100 samples, worst {worst:.1e}, {:.2} s", start.elapsed().as_secs_f64()))
}

fn dimensions(_: &Config) -> Outcome {
    for n in 3..=12 {
        let brute = invariant_dim_by_averaging(n, n as u32);
        if invariant_dim(n) != n / 2 + 3 || brute != n / 2 + 3 {
            return Err(format!("invariant dimension mismatch at n = {n}"));
        }
        for ell in 0..n {
            let count = eigenspace_basis(n, n as u32 - 1, ell).len();
            if eigenspace_dim_formula(n, ell) != count {
                return Err(format!("eigenspace dimension mismatch at n = {n}, ell = {ell}"));
            }
        }
    }
    Ok("n = 3..12, all ell".into())
}

fn census(cfg: &Config) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for n in [3, 5, 7] {
        let mut done = 0;
        while done < 10 {
            let form = forward_matching(&random_shift(&mut rng, n));
            if classify(&form, cfg).map_err(|e| e.to_string())?.kind != Kind::Smooth {
                continue;
            }
            let set = intersection_set(&form, &[], cfg).map_err(|e| format!("n = {n}: {e}"))?;
            if set.count() != n * (n - 1) {
                return Err(format!("n = {n}: {} points", set.count()));
            }
            if set.max_residual > 1e-8 {
                return Err(format!("n = {n}: residual {:e}", set.max_residual));
            }
            if set.s.iter().chain(&set.sbar).any(|p| p.point[0].norm() == 0.0) {
                return Err(format!("n = {n}: point at infinity"));
            }
            worst = worst.max(set.max_residual);
            done += 1;
        }
    }
    Ok(format!("30 forms, worst residual {worst:.1e}"))
}

fn hyperbolicity(cfg: &Config) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..100 {
        let n = 3 + i % 6;
        let w = random_shift(&mut rng, n);
        if !is_hyperbolic(&forward_matching(&w), cfg) {
            return Err(format!("sample {i} (n = {n}) rejected"));
        }
    }
    let bad = InvariantForm::new(3, vec![0.0], 1.0, 0.0).unwrap();
    if is_hyperbolic(&bad, cfg) {
        return Err("t^3 + (u^3+v^3)/2 accepted".into());
    }
    Ok("100 accepted, counterexample rejected".into())
}

fn singular(cfg: &Config) -> Outcome {
    let form = InvariantForm::new(4, vec![-2.0, 0.0], 0.0, 0.0).unwrap();
    let rep = represent(&form, cfg).map_err(|e| e.to_string())?;
    if !rep.converged {
        return Err(format!("schedule did not converge over {:?}", rep.eps));
    }
    let err = max_abs_diff(&forward_matching(&rep.shift), &form);
    if err > 1e-4 {
        return Err(format!("roundtrip error {err:e}"));
    }
    Ok(format!("converged after {} steps, roundtrip {err:.1e}", rep.eps.len()))
}

fn numerical_range(_: &Config) -> Outcome {
    let a = ShiftMatrix::from_real(&[4.0, 4.0, 6.0, 6.0]).unwrap();
    let b = ShiftMatrix::new(vec![
        c(4.0, 0.0),
        Complex64::from_polar(4.0, PI / 12.0),
        Complex64::from_polar(6.0, PI / 4.0),
        Complex64::from_polar(6.0, -PI / 3.0),
    ])
    .unwrap();
    if range_equal(&a, &b, 720, 1e-9).map_err(|e| e.to_string())? {
        Ok("720 angles within 1e-9".into())
    } else {
        Err("support functions differ".into())
    }
}

fn oracles(_: &Config) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let n = rng.gen_range(3..=9);
        let w = random_shift(&mut rng, n);
        let interp = forward_interpolate(&w).map_err(|e| format!("sample {i}: {e}"))?;
        let gap = relative_gap(&forward_matching(&w), &interp);
        if gap > 1e-9 {
            return Err(format!("sample {i}: relative gap {gap:e}"));
        }
        worst = worst.max(gap);
    }
    Ok(format!("200 samples, worst {worst:.1e}"))
}

fn main() {
    let cfg = Config::default();
    let criteria: [Criterion; 9] = [
        ("quartic regression", quartic),
        ("quintic regression", quintic),
        ("roundtrip n = 3..7", roundtrip),
        ("dimension formulas", dimensions),
        ("intersection census", census),
        ("hyperbolicity oracle", hyperbolicity),
        ("singular path", singular),
        ("numerical range pair", numerical_range),
        ("forward oracle agreement", oracles),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check(&cfg) {
            Ok(detail) => println!("criterion {}: {name}: PASS ({detail})", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: {name}: FAIL ({why})", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

use std::f64::consts::TAU;

use num_complex::Complex64;
use proptest::prelude::*;

use hyprep_core::forward::{forward_matching, verify};
use hyprep_core::hyperbolicity::{is_hyperbolic, perturb};
use hyprep_core::numrange::{boundary_sample, range_gap};
use hyprep_core::represent::represent;
use hyprep_core::{Config, InvariantForm, ShiftMatrix};

fn shift_strategy(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = ShiftMatrix> {
    n.prop_flat_map(|n| proptest::collection::vec((0.5f64..2.0, 0.0f64..TAU), n))
        .prop_map(|w| ShiftMatrix::new(w.into_iter().map(|(r, a)| Complex64::from_polar(r, a)).collect()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn represent_roundtrips(w in shift_strategy(3..=6)) {
        let form = forward_matching(&w);
        let rep = represent(&form, &Config::default()).unwrap();
        prop_assert!(rep.verify.max_abs_err <= 1e-6);
    }

    #[test]
    fn range_depends_only_on_form(w in shift_strategy(3..=5), theta in proptest::collection::vec(0.0f64..TAU, 5)) {
        let g = w.gauge(&theta[..w.n]);
        prop_assert!(range_gap(&w, &g, 90).unwrap() < 1e-9);
    }

    #[test]
    fn support_is_convex(w in shift_strategy(3..=6)) {
        let s = boundary_sample(&w, 120).unwrap();
        prop_assert!(s.concavity_defect() < 1e-9);
        prop_assert!(s.touch_residual() < 1e-9);
    }

    #[test]
    fn perturbation_stays_hyperbolic(w in shift_strategy(3..=6), k in 0usize..6) {
        let cfg = Config::default();
        // dropping c0 and ct0 keeps p real-rooted and leaves a singular form
        let base = forward_matching(&w);
        let form = InvariantForm::new(base.n, base.c.clone(), 0.0, 0.0).unwrap();
        let eps = cfg.eps_at(k);
        let p = perturb(&form, eps, &cfg).unwrap();
        prop_assert!(is_hyperbolic(&p, &cfg));
        let gap = form.coefficient_vector().iter().zip(p.coefficient_vector()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(gap <= 10.0 * eps * (1.0 + form.scale()));
    }
}

#[test]
fn json_fixtures_roundtrip_through_the_pipeline() {
    let form: InvariantForm = serde_json::from_str(r#"{"n":4,"c":[-26,72],"c0":-72,"ct0":0}"#).unwrap();
    let cfg: Config = serde_json::from_str(r#"{"seed": 11}"#).unwrap();
    let rep = represent(&form, &cfg).unwrap();
    let text = serde_json::to_string(&rep.shift).unwrap();
    let back: ShiftMatrix = serde_json::from_str(&text).unwrap();
    assert_eq!(back, rep.shift);
    assert!(verify(&form, &back, &cfg).unwrap().passes(1e-6));
}

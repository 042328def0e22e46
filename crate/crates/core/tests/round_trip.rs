use cmv_core::inverse::{reconstruct, uniqueness_check, AGREEMENT_TOL};
use cmv_core::{forward, Route, UniquenessKind, VerblunskyWindow, C64};
use proptest::prelude::*;

const ROUTES: [Route; 5] = [Route::Moments, Route::RightM, Route::LeftM, Route::FullGh, Route::FullGg];

fn sample(seed: u64, k0: i64, n: usize, amax: f64) -> VerblunskyWindow {
    let r = 2 * n as i64 + 10;
    VerblunskyWindow::random(seed, k0 - r, k0 + r, amax).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_route_inverts_forward(seed in any::<u64>(), k0 in -5i64..5, n in 1usize..8, amax in 0.3f64..0.9) {
        let w = sample(seed, k0, n, amax);
        let data = forward(&w, k0, n).unwrap();
        for route in ROUTES {
            let mut rep = match reconstruct(&data, route, None) {
                Ok(rep) => rep,
                // hypotheses of the full-lattice routes can fail on a random draw
                Err(e) if e.is_numerical() && matches!(route, Route::FullGh | Route::FullGg) => continue,
                Err(e) => return Err(TestCaseError::fail(format!("{route}: {e}"))),
            };
            rep.compare_with(&w).unwrap();
            prop_assert!(rep.max_residual.unwrap() <= 1e-7, "{}: {:?}", route, rep.max_residual);
            prop_assert!(rep.recovered.max_modulus() < 1.0 + 1e-9);
        }
    }

    #[test]
    fn half_right_equivalence(seed in any::<u64>(), n in 1usize..=6, tail in 0.0f64..1.0) {
        let k0 = 1;
        let w1 = sample(seed, k0, 8, 0.9);
        // change a single coefficient right after the agreeing run
        let j = k0 + n as i64 + 1;
        let w2 = w1.with_alpha(j, C64::from_polar(0.5 * tail, 1.0 + tail)).unwrap();
        prop_assume!((w2.alpha(j).unwrap() - w1.alpha(j).unwrap()).norm() > 1e-3);
        let rep = uniqueness_check(&w1, &w2, k0, UniquenessKind::HalfRight, 8, AGREEMENT_TOL).unwrap();
        prop_assert_eq!(rep.data_agreement_order, n as i64);
        prop_assert!(rep.theorem_holds);
    }

    #[test]
    fn half_left_equivalence(seed in any::<u64>(), n in 0usize..=6) {
        let k0 = 2;
        let w1 = sample(seed, k0, 8, 0.9);
        let j = k0 - n as i64 - 1;
        let w2 = w1.with_alpha(j, w1.alpha(j).unwrap() * 0.5 + 0.05).unwrap();
        let rep = uniqueness_check(&w1, &w2, k0, UniquenessKind::HalfLeft, 8, AGREEMENT_TOL).unwrap();
        prop_assert_eq!(rep.data_agreement_order, n as i64);
        prop_assert!(rep.theorem_holds);
    }
}

#[test]
fn full_routes_agree_on_shared_window() {
    let n = 4;
    let mut compared = 0;
    for seed in 0..20 {
        let k0 = seed as i64 % 3;
        let w = sample(seed, k0, n, 0.9);
        let d = forward(&w, k0, n + 2).unwrap();
        let (Ok(a), Ok(b)) = (
            reconstruct(&d, Route::FullGh, Some(n)),
            reconstruct(&d, Route::FullGg, Some(n)),
        ) else {
            continue;
        };
        for k in a.recovered.kmin()..=a.recovered.kmax() {
            let diff = a.recovered.alpha(k).unwrap() - b.recovered.alpha(k).unwrap();
            assert!(diff.norm() < 1e-8, "seed {seed} k {k}");
        }
        compared += 1;
    }
    assert!(compared >= 15);
}

#[test]
fn recovered_windows_have_documented_extent() {
    let (k0, n) = (3i64, 4usize);
    let w = sample(5, k0, n, 0.8);
    let d = forward(&w, k0, n).unwrap();
    let n = n as i64;
    for (route, lo, hi) in [
        (Route::Moments, k0 - n + 1, k0 + n),
        (Route::RightM, k0 + 1, k0 + n),
        (Route::LeftM, k0 - n, k0),
        (Route::FullGh, k0 - n, k0 + n + 1),
        (Route::FullGg, k0 - n - 1, k0 + n + 1),
    ] {
        let rep = reconstruct(&d, route, None).unwrap();
        assert_eq!((rep.recovered.kmin(), rep.recovered.kmax()), (lo, hi), "{route}");
    }
}

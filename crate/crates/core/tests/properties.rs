use engine_core::liouville::{devectorize, propagate, steady_state, vectorize, BasisTag};
use engine_core::metrics::concurrence;
use engine_core::model::{fermi, full_liouvillian, initial_state, rates, reduced_liouvillian, Bath, EngineParams, InitialKind, XState};
use engine_core::observables::{activity, current, two_time_correlation, NoiseKernel, TimeGrid};
use num_complex::Complex64;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = EngineParams> {
    (1e-4..1e-2, 1e-4..1e-2, 1e-4..5e-3, 0.05..5.0, 0.05..5.0, -2.0..3.0, -2.0..3.0).prop_map(
        |(gamma_l, gamma_r, g, t_l, t_r, mu_l, mu_r)| EngineParams {
            eps_s: 1.0,
            g,
            gamma_l,
            gamma_r,
            t_l,
            t_r,
            mu_l,
            mu_r,
        },
    )
}

fn xstate() -> impl Strategy<Value = XState> {
    (prop::array::uniform4(0.0..1.0f64), 0.0..1.0f64, 0.0..std::f64::consts::TAU)
        .prop_filter("non-empty populations", |(w, _, _)| w.iter().sum::<f64>() > 1e-3)
        .prop_map(|(w, s, phi)| {
            let total: f64 = w.iter().sum();
            let [r1, r2, r3, r4] = w.map(|x| x / total);
            let c = Complex64::from_polar(s * (r2 * r3).sqrt(), phi);
            XState { r1, r2, r3, r4, c }
        })
}

fn kind() -> impl Strategy<Value = InitialKind> {
    prop::sample::select(InitialKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn vectorize_round_trip(s in xstate()) {
        let back = devectorize(&vectorize(&s, BasisTag::ReducedX)).unwrap();
        prop_assert!((back.r1 - s.r1).abs() < 1e-15 && (back.r4 - s.r4).abs() < 1e-15);
        prop_assert!((back.c - s.c).norm() < 1e-15);
    }

    #[test]
    fn fermi_is_an_occupation(eps in -5.0..5.0f64, t in 1e-3..10.0f64, mu in -5.0..5.0f64) {
        let f = fermi(eps, t, mu);
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!((f + fermi(-eps, t, -mu) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rates_split_bare_coupling(p in params()) {
        let r = rates(&p);
        prop_assert!((r.gamma_l_plus + r.gamma_l_minus - p.gamma_l).abs() <= 4.0 * f64::EPSILON * p.gamma_l);
        prop_assert!((r.gamma_r_plus + r.gamma_r_minus - p.gamma_r).abs() <= 4.0 * f64::EPSILON * p.gamma_r);
    }

    #[test]
    fn generators_preserve_trace(p in params()) {
        prop_assert!(reduced_liouvillian(&p).trace_defect() < 1e-15);
        prop_assert!(full_liouvillian(&p).trace_defect() < 1e-15);
    }

    #[test]
    fn spectrum_in_closed_left_half_plane(p in params()) {
        for lambda in reduced_liouvillian(&p).spectrum() {
            prop_assert!(lambda.re <= 1e-12, "{lambda}");
        }
    }

    #[test]
    fn propagation_is_a_semigroup(p in params(), k in kind(), a in 0.0..30.0f64, b in 0.0..30.0f64) {
        let l = reduced_liouvillian(&p);
        let v0 = vectorize(&initial_state(k, &p), BasisTag::ReducedX);
        let (ta, tb) = (a / p.total_rate(), b / p.total_rate());
        let once = propagate(&l, &v0, ta + tb).unwrap();
        let twice = propagate(&l, &propagate(&l, &v0, ta).unwrap(), tb).unwrap();
        prop_assert!((once.data - twice.data).camax() < 1e-11);
    }

    #[test]
    fn propagated_states_stay_physical(p in params(), s in xstate(), t in 0.0..50.0f64) {
        let l = reduced_liouvillian(&p);
        let v = propagate(&l, &vectorize(&s, BasisTag::ReducedX), t / p.total_rate()).unwrap();
        let out = v.to_xstate_unchecked();
        prop_assert!(out.validate().is_ok(), "{out:?}");
        let c = concurrence(&out);
        prop_assert!((0.0..=1.0).contains(&c));
    }

    #[test]
    fn activity_bounds_current(p in params(), s in xstate()) {
        for b in Bath::BOTH {
            prop_assert!(activity(b, &s, &p) >= current(b, &s, &p).abs());
        }
    }

    #[test]
    fn steady_state_currents_balance(p in params()) {
        let s = steady_state(&reduced_liouvillian(&p)).unwrap().to_xstate_unchecked();
        let (il, ir) = (current(Bath::Left, &s, &p), current(Bath::Right, &s, &p));
        prop_assert!((il + ir).abs() <= 1e-12 * p.total_rate());
    }

    #[test]
    fn correlation_exchange_symmetry(p in params(), k in kind(), pairs in prop::collection::vec((0usize..=40, 0usize..=40), 50)) {
        let grid = TimeGrid::in_inverse_gamma(&p, 0.1, 4.0).unwrap();
        let kernel = NoiseKernel::new(&p, &initial_state(k, &p), BasisTag::ReducedX, grid).unwrap();
        for (n, m) in pairs {
            let (t, tp) = (grid.time(n), grid.time(m));
            let a = two_time_correlation(Bath::Left, Bath::Right, t, tp, &kernel).unwrap();
            let b = two_time_correlation(Bath::Right, Bath::Left, tp, t, &kernel).unwrap();
            prop_assert!((a.connected - b.connected).abs() <= 1e-15 * p.total_rate().powi(2));
            let c = two_time_correlation(Bath::Left, Bath::Left, t, tp, &kernel).unwrap();
            prop_assert_eq!(c.has_delta, n == m);
            prop_assert!(c.delta_weight >= 0.0);
        }
    }
}

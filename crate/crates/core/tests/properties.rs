use proptest::prelude::*;

use ddkit::filter::{cdd_recursion, w_general, w_periodic};
use ddkit::noise::compose_baths;
use ddkit::sequence::{cdd, parse_dsl, pdd_family, render_dsl, Axis, CddBase, MergePolicy, PddVariant};
use ddkit::spin::{ensemble_fidelity, pulse_unitary, static_unitary, AxisErrors};
use ddkit::{
    BathComposition, OuParams, Protocol, Pulse, PulseErrors, PulseSequence, RunConfig, StaticFieldModel,
};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

fn protocol() -> impl Strategy<Value = Protocol> {
    prop_oneof![
        (1usize..6).prop_map(Protocol::Cpmg),
        (1usize..6).prop_map(Protocol::Xy4),
        (1usize..4).prop_map(Protocol::Xy8),
        (1usize..6).prop_map(Protocol::Pdd),
        (1usize..4).prop_map(Protocol::Sdd),
        (1u32..4, 1usize..3).prop_map(|(level, repeats)| Protocol::Cdd { level, repeats }),
        (1u32..3, 1usize..3).prop_map(|(level, repeats)| Protocol::CddXy4 { level, repeats }),
        (1usize..30).prop_map(Protocol::Udd),
        (1usize..6).prop_map(Protocol::Qdd),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn periodic_paths_agree(tau in 0.01f64..5.0, tau_c in 0.5f64..500.0, b in 0.1f64..5.0, n_c in 1usize..10) {
        let p = OuParams::new(b, tau_c).unwrap();
        let one = pdd_family(PddVariant::PddXy, 1, tau).unwrap().filter_function();
        let all = pdd_family(PddVariant::PddXy, n_c, tau).unwrap().filter_function();
        let g = w_general(&all, &p).unwrap().w;
        prop_assert!(rel(g, w_periodic(&one, n_c, &p).unwrap().w) < 1e-9);
        prop_assert!(rel(g, cdd_recursion(CddBase::Pdd, 1, &p, tau, n_c).unwrap().w) < 1e-9);
    }

    #[test]
    fn cdd_recursion_matches_general(tau in 0.01f64..2.0, tau_c in 1.0f64..200.0, level in 1u32..4, xy4 in any::<bool>()) {
        let base = if xy4 { CddBase::Xy4 } else { CddBase::Pdd };
        let p = OuParams::new(3.3, tau_c).unwrap();
        let g = w_general(&cdd(base, level, tau, 1).unwrap().filter_function(), &p).unwrap().w;
        prop_assert!(rel(g, cdd_recursion(base, level, &p, tau, 1).unwrap().w) < 1e-9);
    }

    #[test]
    fn kernel_integral_is_independent_of_b(proto in protocol(), t in 0.5f64..40.0, tau_c in 1.0f64..100.0) {
        let f = proto.build(t, MergePolicy::Cancel).unwrap().filter_function();
        let slow = w_general(&f, &OuParams::new(2.0, tau_c).unwrap()).unwrap();
        let strong = w_general(&f, &OuParams::new(3.0, tau_c).unwrap()).unwrap();
        prop_assert!(slow.w >= 0.0);
        prop_assert!((slow.w - strong.w).abs() < 1e-12 * slow.w.max(1e-300));
        prop_assert!(strong.s <= slow.s && slow.s <= 1.0);
    }

    #[test]
    fn protocol_text_round_trip(proto in protocol()) {
        prop_assert_eq!(proto.to_string().parse::<Protocol>().unwrap(), proto);
    }

    #[test]
    fn dsl_round_trip(times in prop::collection::btree_set(1u32..400, 0..12), ys in prop::collection::vec(any::<bool>(), 12)) {
        let pulses: Vec<Pulse> = times
            .iter()
            .zip(&ys)
            .map(|(&t, &y)| Pulse::new(t as f64 * 0.025, if y { Axis::Y } else { Axis::X }))
            .collect();
        let seq = PulseSequence::new(10.0, pulses, "prop", MergePolicy::Cancel).unwrap();
        let back = parse_dsl(&render_dsl(&seq)).unwrap();
        prop_assert_eq!(back, seq);
    }

    #[test]
    fn pulses_stay_unitary(
        eps_x in -0.2f64..0.2, eps_y in -0.2f64..0.2, n_y in -0.2f64..0.2,
        m_x in -0.2f64..0.2, n_0 in -0.2f64..0.2, m_0 in -0.2f64..0.2,
        proto in protocol(), phi in -3.0f64..3.0,
    ) {
        let e = PulseErrors { eps_x, eps_y, n_y, m_x, n_0, m_0 };
        for iz in [-1i8, 0, 1] {
            for axis in [Axis::X, Axis::Y] {
                prop_assert!(pulse_unitary(axis, &e, iz).unwrap().unitarity_error() < 1e-12);
            }
            let seq = proto.build(1.0, MergePolicy::Keep).unwrap();
            let u = static_unitary(&seq, phi, &e.for_iz(iz)).unwrap();
            prop_assert!(u.unitarity_error() < 1e-10);
        }
    }

    #[test]
    fn composition_is_order_free(lines in prop::collection::vec((0.0f64..4.0, 0.5f64..300.0), 1..8), k in 0usize..8) {
        let mut ou: Vec<OuParams> = lines.iter().map(|&(b, tc)| OuParams::new(b, tc).unwrap()).collect();
        let a = compose_baths(&BathComposition::new(ou.clone())).unwrap();
        let n = ou.len();
        ou.rotate_left(k % n);
        ou.reverse();
        let b = compose_baths(&BathComposition::new(ou)).unwrap();
        prop_assert!((a.b_squared - b.b_squared).abs() <= 1e-12 * a.b_squared.max(1.0));
        prop_assert!((a.b_squared_rate - b.b_squared_rate).abs() <= 1e-12 * a.b_squared_rate.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn ensemble_is_bounded_and_thread_independent(proto in protocol(), seed in any::<u64>(), t in 1.0f64..15.0, faulty in any::<bool>()) {
        let cfg = RunConfig {
            sequences: vec![proto.build(t, MergePolicy::Keep).unwrap()],
            bath: BathComposition::single(OuParams::nv_default()),
            static_field: StaticFieldModel::nv_default(),
            errors: if faulty { PulseErrors::measured() } else { PulseErrors::ideal() },
            n_trajectories: 1_100,
            seed,
        };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| ensemble_fidelity(&cfg).unwrap())
        };
        let a = run(1);
        prop_assert_eq!(&a, &run(3));
        for v in a.sx.iter().chain(&a.sy) {
            prop_assert!((-1.0..=1.0).contains(v));
        }
    }
}

#[test]
fn ideal_static_errors_are_identity_or_minus_identity() {
    for proto in [
        Protocol::Cpmg(3),
        Protocol::Xy4(2),
        Protocol::Xy8(1),
        Protocol::Udd(6),
        Protocol::Qdd(3),
    ] {
        let seq = proto.build(1.0, MergePolicy::Keep).unwrap();
        let u = static_unitary(&seq, 0.0, &AxisErrors::default()).unwrap();
        assert!(u.vector().iter().all(|c| c.abs() < 1e-12), "{proto}: {u:?}");
    }
}

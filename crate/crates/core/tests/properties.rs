//! Property tests for the crate's structural invariants.

use proptest::prelude::*;

use zqsim::circuit::{
    from_text, to_text, CircuitBuilder, NativeOp, QubitId, Role, Site, ZoneKind, ZoneLayout,
};
use zqsim::decoder::matching::{
    brute_force_perfect_matching_cost, min_weight_perfect_matching,
};
use zqsim::logistics::site_distance2;

fn site_strategy() -> impl Strategy<Value = Site> {
    (0u8..5, 0u32..32).prop_map(|(z, i)| {
        let zone = ZoneKind::ALL[z as usize];
        let cap = match zone {
            ZoneKind::Register => 128,
            ZoneKind::Iz => 16,
            ZoneKind::Mz | ZoneKind::Sz => 32,
            ZoneKind::Lz => 75,
        };
        Site::new(zone, i % cap)
    })
}

fn op_strategy(n_qubits: u32) -> impl Strategy<Value = NativeOp> {
    let q = move || (0..n_qubits).prop_map(QubitId);
    prop_oneof![
        (q(), -4i32..8).prop_map(|(q, k)| NativeOp::rz(q, k)),
        q().prop_map(|q| NativeOp::Sx { q }),
        q().prop_map(|q| NativeOp::X { q }),
        (q(), q()).prop_filter_map("distinct", |(a, b)| {
            (a != b).then_some(NativeOp::Cz { a, b })
        }),
        // Full-register measurement keeps randomly built circuits valid
        // (everything co-resident in the imaged zone must be a target).
        (0u32..50).prop_map(move |c| NativeOp::Mcm {
            targets: (0..n_qubits).map(QubitId).collect(),
            cycle: Some(c),
        }),
        q().prop_map(|q| NativeOp::Reset0 { targets: vec![q] }),
        (q(), 0u32..32).prop_map(|(q, s)| NativeOp::Move { q, to: Site::new(ZoneKind::Mz, s) }),
        Just(NativeOp::CondFill { zone: ZoneKind::Mz }),
        (1u32..1000).prop_map(|ms| NativeOp::Idle { ms: ms as f64 / 10.0 }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Serializing and reloading a circuit yields an identical op list and
    /// an identical canonical text form.
    #[test]
    fn circuit_text_round_trip(ops in prop::collection::vec(op_strategy(4), 0..40)) {
        let mut b = CircuitBuilder::new(ZoneLayout::default());
        for i in 0..4 {
            b.add_qubit(Some(Role::Data), Site::new(ZoneKind::Mz, i));
        }
        b.meta("kind", "prop");
        for op in ops {
            b.push(op).unwrap();
        }
        let c = b.build();
        let text = to_text(&c);
        let c2 = from_text(&text).unwrap();
        prop_assert_eq!(&c, &c2);
        prop_assert_eq!(text, to_text(&c2));
    }

    /// Wilson intervals stay inside [0,1] and contain the point estimate.
    #[test]
    fn wilson_bounds(successes in 0u64..5000, extra in 0u64..5000, conf in 0.5f64..0.999) {
        let trials = successes + extra + 1;
        let (lo, hi) = zqsim::analysis::wilson_interval(successes, trials, conf).unwrap();
        let p = successes as f64 / trials as f64;
        prop_assert!((0.0..=1.0).contains(&lo));
        prop_assert!((0.0..=1.0).contains(&hi));
        prop_assert!(lo <= p + 1e-12 && p <= hi + 1e-12);
    }

    /// The highway path metric is symmetric and zero only on the diagonal.
    #[test]
    fn site_distance_symmetry(a in site_strategy(), b in site_strategy()) {
        let layout = ZoneLayout::default();
        let dab = site_distance2(&layout, a, b);
        let dba = site_distance2(&layout, b, a);
        prop_assert_eq!(dab, dba);
        prop_assert_eq!(dab == 0, a == b);
    }

    /// Exact matching agrees with brute force on arbitrary complete graphs.
    #[test]
    #[allow(clippy::needless_range_loop)]
    fn matching_is_exact(
        n2 in 1usize..4,
        weights in prop::collection::vec(0u32..10_000, 28),
    ) {
        let n = 2 * n2;
        let mut dist = vec![vec![0.0; n]; n];
        let mut edges = Vec::new();
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                let w = weights[k % weights.len()] as f64 / 101.0;
                k += 1;
                dist[i][j] = w;
                dist[j][i] = w;
                edges.push((i, j, w));
            }
        }
        let mate = min_weight_perfect_matching(n, &edges);
        let mut got = 0.0;
        for i in 0..n {
            prop_assert_eq!(mate[mate[i]], i);
            if i < mate[i] {
                got += dist[i][mate[i]];
            }
        }
        let want = brute_force_perfect_matching_cost(&dist);
        prop_assert!((got - want).abs() < 1e-6, "got {}, want {}", got, want);
    }

    /// Any circuit the validator accepts executes without structural
    /// panics, and produces one outcome per MCM target.
    #[test]
    fn validated_circuits_execute(ops in prop::collection::vec(op_strategy(4), 0..30), seed in 0u64..500) {
        let mut b = CircuitBuilder::new(ZoneLayout::default());
        for i in 0..4 {
            b.add_qubit(Some(Role::Data), Site::new(ZoneKind::Mz, i));
        }
        for op in ops {
            b.push(op).unwrap();
        }
        let c = b.build();
        prop_assume!(c.validate().is_ok());
        let rec = zqsim::engine::run_shot(
            &c,
            &zqsim::engine::noise::NoiseModel::bench_defaults(),
            seed,
        );
        let expected_outcomes: usize = c
            .ops
            .iter()
            .map(|o| match o {
                NativeOp::Mcm { targets, .. } => targets.len(),
                _ => 0,
            })
            .sum();
        prop_assert_eq!(rec.outcomes.len(), expected_outcomes);
    }

    /// Lost atoms never come back without a conditional fill: every
    /// measurement of a qubit after a forced loss reads LOST.
    #[test]
    fn loss_is_absorbing(seed in 0u64..1000, lose_at in 0usize..3) {
        use zqsim::engine::fault::FaultPlan;
        use zqsim::engine::record::MeasValue;
        let mut b = CircuitBuilder::new(ZoneLayout::default());
        let q = b.add_qubit(Some(Role::Data), Site::new(ZoneKind::Mz, 0));
        let mut mcm_ops = Vec::new();
        for c in 0..4u32 {
            mcm_ops.push(b.op_count());
            b.push(NativeOp::Mcm { targets: vec![q], cycle: Some(c) }).unwrap();
        }
        let c = b.build();
        let faults = FaultPlan::lost(mcm_ops[lose_at], q);
        let rec = zqsim::engine::run_shot_with_faults(
            &c,
            &zqsim::engine::noise::NoiseModel::noiseless(),
            seed,
            &faults,
        );
        for (i, o) in rec.outcomes.iter().enumerate() {
            if i >= lose_at {
                prop_assert_eq!(o.value, MeasValue::Lost);
            } else {
                prop_assert_eq!(o.value, MeasValue::Zero);
            }
        }
    }
}

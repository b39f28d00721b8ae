use pqlab_core::freqset::{multi_index_set, subset_sums, PowerSchedule};
use pqlab_core::lab::{
    bucket_probability_curve, build_qpe_circuit, buckets, cross_engine_check, dft_frequency_audit,
    fraction_good_buckets, probabilities_at, random_algorithm, Bucket, RandomCircuitShape,
};
use pqlab_core::numeric::measurement_distribution;
use pqlab_core::symbolic::restrict_to_first_phase;
use pqlab_core::{run_circuit, Circuit, EigenSpec, Gate, Phase, RegisterLayout, StateVector, SymbolicState, Unitary};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn qpe_spec(layout: RegisterLayout, rng: &mut impl Rng) -> EigenSpec {
    let phases = (0..layout.target_dim()).map(|_| Phase::new(rng.random())).collect();
    EigenSpec::new(layout, phases).unwrap()
}

#[test]
fn exact_phase_qpe_every_grid_point() {
    for t in 1..=6 {
        let circuit = build_qpe_circuit(t, 1).unwrap();
        let layout = *circuit.layout();
        for r in 0..(1u64 << t) {
            let spec = EigenSpec::with_target_phase(layout, Phase::from_ratio(r, 1 << t));
            let out = run_circuit(&circuit, &spec, StateVector::zero(layout)).unwrap();
            let marginal = measurement_distribution(&out).control_marginal();
            assert!((marginal[r as usize] - 1.0).abs() < 1e-12, "T={t} r={r}");
        }
    }
}

#[test]
fn qpe_support_has_at_most_two_to_the_t_terms() {
    for t in 1..=8 {
        let circuit = build_qpe_circuit(t, 2).unwrap();
        let sym = SymbolicState::run(&circuit, &StateVector::zero(*circuit.layout())).unwrap();
        assert!(sym.term_count() <= 1 << t);
        let schedule = PowerSchedule::new(circuit.power_schedule()).unwrap();
        let sums = subset_sums(&schedule).unwrap();
        for j in sym.frequency_support() {
            assert!(sums.contains(j.components()[0] as i64));
            assert!(j.components()[1..].iter().all(|&x| x == 0));
        }
    }
}

#[test]
fn bucket_polynomial_matches_numeric_curve() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let circuit = build_qpe_circuit(3, 1).unwrap();
    let layout = *circuit.layout();
    let initial = StateVector::zero(layout);
    let spec = EigenSpec::with_target_phase(layout, Phase::ZERO);
    let audit = dft_frequency_audit(&circuit, &initial, &spec, 1.0 / 16.0).unwrap();

    let mut phases: Vec<Phase> = (0..50).map(|i| Phase::from_ratio(i, 50)).collect();
    phases.extend((0..50).map(|_| Phase::new(rng.random())));
    for b in &audit.buckets {
        let bucket = Bucket::new(b.r, 8, &layout).unwrap();
        let curve = bucket_probability_curve(&circuit, &initial, &bucket, &spec, &phases).unwrap();
        for (phi, p) in curve {
            let rebuilt = b.reconstruct(phi);
            assert!((rebuilt.re - p).abs() < 1e-9, "r={} phi={phi}", b.r);
            assert!(rebuilt.im.abs() < 1e-10);
        }
        assert!(b.conjugate_asymmetry() < 1e-12);
        // p_{B_r}(n/N) = delta_{rn}
        for (n, &s) in b.samples.iter().enumerate() {
            let expected = if n as u64 == b.r { 1.0 } else { 0.0 };
            assert!((s - expected).abs() < 1e-12);
        }
    }
}

#[test]
fn audit_conclusions_hold_for_random_other_phases() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let circuit = build_qpe_circuit(3, 2).unwrap();
    let layout = *circuit.layout();
    let spec = qpe_spec(layout, &mut rng);
    let initial = StateVector::zero(layout);
    let audit = dft_frequency_audit(&circuit, &initial, &spec, 1.0 / 16.0).unwrap();
    assert!(audit.max_dft_error() < 1e-9);
    assert!(audit.supports_within_differences());
    assert!(audit.concentrated_buckets_resolve_grid());
    assert!(audit.buckets.iter().all(|b| b.nonzero_classes() == 8));
}

#[test]
fn audit_on_scrambled_algorithm() {
    // not a phase estimator: just checks the DFT identity and M_T containment
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let layout = RegisterLayout::new(3, 1).unwrap();
    let mut circuit = Circuit::new(layout);
    for (l, p) in [(1, 3), (2, 5), (3, 2), (1, 7)] {
        circuit.push(Gate::FixedUnitary(Unitary::random(16, &mut rng))).unwrap();
        circuit.push(Gate::PowerQuery { control: l, power: p }).unwrap();
    }
    circuit.push(Gate::FixedUnitary(Unitary::random(16, &mut rng))).unwrap();
    let spec = qpe_spec(layout, &mut rng);
    for eps in [0.5, 0.25, 1.0 / 6.0, 1.0 / 16.0, 1.0 / 40.0] {
        let audit = dft_frequency_audit(&circuit, &StateVector::zero(layout), &spec, eps).unwrap();
        assert!(audit.max_dft_error() < 1e-9, "eps={eps}");
        assert!(audit.supports_within_differences());
        for b in &audit.buckets {
            assert!(b.conjugate_asymmetry() < 1e-12);
        }
    }
}

#[test]
fn compliant_circuits_have_mostly_good_buckets() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    // (queries, eps): more control qubits than the grid needs, and a
    // non-dyadic grid where QPE is only approximately right
    for (t, eps) in [(3, 1.0 / 8.0), (4, 1.0 / 16.0), (5, 1.0 / 16.0), (6, 1.0 / 12.0), (7, 1.0 / 20.0)] {
        let circuit = build_qpe_circuit(t, 1).unwrap();
        let layout = *circuit.layout();
        let spec = qpe_spec(layout, &mut rng);
        let report = fraction_good_buckets(&circuit, &StateVector::zero(layout), &spec, eps).unwrap();
        if report.meets_success_condition {
            assert!(report.fraction >= 2.0 / 3.0, "T={t} eps={eps}");
        }
        // mutually exclusive buckets: mass at any grid phase is at most 1
        let n = report.n;
        let all = buckets(n, &layout).unwrap();
        for i in 0..n {
            let probs = probabilities_at(&circuit, &StateVector::zero(layout), &spec, Phase::from_ratio(i, n)).unwrap();
            let total: f64 = all.iter().map(|b| b.mass(&probs)).sum();
            assert!(total <= 1.0 + 1e-12);
        }
    }
}

#[test]
fn restriction_reproduces_first_phase_slice() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (circuit, initial) = random_algorithm(
        RandomCircuitShape {
            max_queries: 4,
            max_control: 3,
            max_target: 2,
            max_power: 6,
        },
        &mut rng,
    )
    .unwrap();
    let layout = *circuit.layout();
    let sym = SymbolicState::run(&circuit, &initial).unwrap();
    let spec = qpe_spec(layout, &mut rng);
    let fixed = &spec.phases()[1..];
    let sums = subset_sums(&PowerSchedule::new(circuit.power_schedule()).unwrap()).unwrap();
    for _ in 0..10 {
        let phi = Phase::new(rng.random());
        let numeric = run_circuit(&circuit, &spec.with_first(phi), initial.clone()).unwrap();
        for k in 0..layout.dim() {
            let beta = restrict_to_first_phase(&sym.label_poly(k).unwrap(), fixed).unwrap();
            assert!(beta.support().is_subset(&sums));
            assert!((beta.evaluate(phi) - numeric.amplitudes()[k]).norm() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn engines_agree_on_random_algorithms(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (circuit, initial) = random_algorithm(RandomCircuitShape::default(), &mut rng).unwrap();
        let check = cross_engine_check(&circuit, &initial, 8, &mut rng).unwrap();
        prop_assert!(check.max_error < 1e-9);
        prop_assert!(check.max_norm_defect < 1e-9);
        prop_assert!(check.support_within_multi_indices);
    }

    #[test]
    fn symbolic_unitaries_preserve_coefficient_energy(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layout = RegisterLayout::new(rng.random_range(1..=3), rng.random_range(1..=2)).unwrap();
        let mut sym = SymbolicState::from_state(&StateVector::zero(layout));
        for _ in 0..3 {
            sym.apply_fixed_unitary(&Unitary::random(layout.dim(), &mut rng)).unwrap();
            sym.apply_power_query(rng.random_range(1..=layout.control_qubits()), rng.random_range(1..=8)).unwrap();
            let before = sym.coefficient_energy();
            let support = sym.frequency_support();
            sym.apply_fixed_unitary(&Unitary::random(layout.dim(), &mut rng)).unwrap();
            prop_assert!((sym.coefficient_energy() - before).abs() < 1e-10);
            prop_assert!(sym.frequency_support().is_subset(&support));
        }
    }

    #[test]
    fn symbolic_support_within_j_t(schedule in prop::collection::vec(1u64..=8, 0..=5), t in 1usize..=2, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layout = RegisterLayout::new(2, t).unwrap();
        let mut sym = SymbolicState::initial(&Unitary::random(layout.dim(), &mut rng), &StateVector::zero(layout)).unwrap();
        for &p in &schedule {
            sym.apply_power_query(rng.random_range(1..=2), p).unwrap();
            sym.apply_fixed_unitary(&Unitary::random(layout.dim(), &mut rng)).unwrap();
        }
        let j_t = multi_index_set(&PowerSchedule::new(schedule.clone()).unwrap(), t).unwrap();
        prop_assert!(sym.frequency_support().is_subset(&j_t));
    }
}

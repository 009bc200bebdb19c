use num_complex::Complex64 as C64;
use proptest::prelude::*;
use qburgers::ansatz::{bind_parameter, build_ansatz, AnsatzSpec, Head, Variant};
use qburgers::burgers::{bracket, classical_step, evaluate_cost_direct, norm, step_operator, BurgersGrid, Estimator, FieldState};
use qburgers::circuit::random::{random_circuit, random_hadamard_circuit};
use qburgers::circuit::{parse_circuit, serialize_circuit};
use qburgers::lowdepth::{detect_hadamard_form, elide_ancilla_controls, statevector_deviation};
use qburgers::matrix::CMatrix;
use qburgers::sgeo::{reconstruct_cost, BINDINGS};
use qburgers::sim::{circuit_unitary, run_statevector, Channel};
use qburgers::transpile::{decompose, Basis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_round_trip(seed in any::<u64>(), width in 1usize..7, gates in 0usize..40) {
        let c = random_circuit(&mut rng(seed), width, gates);
        let text = serialize_circuit(&c);
        let back = parse_circuit(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(serialize_circuit(&back), text);
    }

    #[test]
    fn circuits_are_unitary(seed in any::<u64>(), width in 1usize..5, gates in 0usize..25) {
        let c = random_circuit(&mut rng(seed), width, gates);
        prop_assert!(circuit_unitary(&c).is_unitary(1e-10));
    }

    #[test]
    fn simulation_preserves_norm(seed in any::<u64>(), width in 1usize..8, gates in 0usize..60) {
        let c = random_circuit(&mut rng(seed), width, gates);
        prop_assert!((run_statevector(&c).norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn elision_is_equivalent_and_idempotent(seed in any::<u64>(), n in 2usize..6, body in 1usize..16) {
        let c = random_hadamard_circuit(&mut rng(seed), n, body);
        let once = elide_ancilla_controls(&detect_hadamard_form(&c).unwrap());
        prop_assert!(statevector_deviation(&c, &once).unwrap() <= 1e-10);
        let twice = elide_ancilla_controls(&detect_hadamard_form(&once).unwrap());
        prop_assert_eq!(twice, once);
    }

    #[test]
    fn decomposition_preserves_unitary(seed in any::<u64>(), width in 2usize..5, gates in 1usize..10, ion in any::<bool>()) {
        let basis = if ion { Basis::Ion } else { Basis::Sc };
        let c = random_circuit(&mut rng(seed), width, gates);
        let native = decompose(&c, basis).unwrap();
        prop_assert!(circuit_unitary(&native).phase_distance(&circuit_unitary(&c)) < 1e-8);
    }

    #[test]
    fn channels_preserve_trace(p in 0.0f64..=1.0, two in any::<bool>(), which in 0usize..3) {
        let ch = match which {
            0 => Channel::Depolarizing { qubits: if two { vec![0, 1] } else { vec![0] }, p },
            1 => Channel::AmplitudeDamping { qubit: 0, gamma: p },
            _ => Channel::Dephasing { qubit: 0, p },
        };
        let ks = ch.kraus();
        let d = ks[0].dim();
        let mut sum = CMatrix::zeros(d);
        for k in &ks {
            sum = sum.add(&(&k.dagger() * k));
        }
        prop_assert!(sum.max_abs_diff(&CMatrix::identity(d)) <= 1e-12);
    }

    #[test]
    fn classical_step_matches_operator(
        n in 2usize..6,
        nu in 1e-4f64..1e-1,
        tau_frac in 0.01f64..0.5,
        raw in proptest::collection::vec(-2.0f64..2.0, 32),
    ) {
        let m = 1usize << n;
        let dx = 2.0 / m as f64;
        let g = BurgersGrid::new(0.0, 2.0, n, tau_frac * dx, nu).unwrap();
        let u: Vec<f64> = raw[..m].to_vec();
        prop_assume!(norm(&u) > 1e-3);
        let l = norm(&u);
        let psi: Vec<f64> = u.iter().map(|x| x / l).collect();
        let v = step_operator(&g, l, &psi).apply(&psi.iter().map(|&p| C64::new(p, 0.0)).collect::<Vec<_>>());
        for (a, b) in v.iter().zip(classical_step(&g, &u)) {
            prop_assert!((a.re - b).abs() <= 1e-12 && a.im.abs() <= 1e-12);
        }
    }

    #[test]
    fn sgeo_reconstruction_is_exact(seed in any::<u64>(), j in 0usize..12, lam in -6.3f64..6.3) {
        use rand::Rng;
        let spec = AnsatzSpec::new(3, 3, Variant::Cry, Head::X).unwrap();
        let mut r = rng(seed);
        let p = spec.param_count();
        let j = j % p;
        let base: Vec<f64> = (0..p).map(|_| r.random_range(-3.0..3.0)).collect();
        let prev_p: Vec<f64> = (0..p).map(|_| r.random_range(-3.0..3.0)).collect();
        let g = BurgersGrid::new(0.0, 2.0, 3, 0.025, 1e-3).unwrap();
        let prev = FieldState::from_circuit(1.3, build_ansatz(&spec, &prev_p).unwrap()).unwrap();
        let circuit_at = |v: f64| build_ansatz(&spec, &bind_parameter(&base, j, v).unwrap()).unwrap();
        let direct = evaluate_cost_direct(&g, &prev, &circuit_at(lam), &mut Estimator::exact()).unwrap();
        let signed = BINDINGS.map(|b| bracket(&g, &prev, &circuit_at(b), &mut Estimator::exact()).unwrap());
        prop_assert!((reconstruct_cost(signed, lam) - direct).abs() <= 1e-10);
    }
}

use cosetlab::gf2::{sample_coset_instance, Gf2Subspace, Gf2Vector};
use cosetlab::quantum::random::{povm_equivalent, random_density, random_kraus, random_projector, random_unitary};
use cosetlab::quantum::{gentle_measurement, verify_impindep, BinaryProjector, QuantumRegister};
use cosetlab::stream_rng;
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn unitaries_preserve_norm(seed in any::<u64>(), qubits in 1usize..=5) {
        let mut rng = stream_rng(seed, 0);
        let dim = 1 << qubits;
        let reg = QuantumRegister::basis_state(qubits, rng.random_range(0..dim as u64)).unwrap();
        let mut reg = reg.hadamard_all();
        for _ in 0..4 {
            reg = reg.apply_unitary(&random_unitary(dim, &mut rng)).unwrap();
            prop_assert!(reg.norm_deviation() < 1e-9);
        }
    }

    #[test]
    fn coset_state_support_is_exact(seed in any::<u64>(), d in prop::sample::select(vec![4usize, 8])) {
        let inst = sample_coset_instance(d, &mut stream_rng(seed, 0)).unwrap();
        let reg = QuantumRegister::coset_state(&inst.a, &inst.a1, &inst.a2).unwrap();
        let amps = reg.amplitudes().unwrap();
        let coset = inst.primal();
        for v in 0..1u64 << d {
            let inside = coset.contains(&Gf2Vector::new(v, d).unwrap()).unwrap();
            if inside {
                prop_assert!((amps[v as usize].norm_sqr() - 2f64.powi(-(d as i32) / 2)).abs() < 1e-12);
            } else {
                prop_assert_eq!(amps[v as usize].norm_sqr(), 0.0);
            }
        }
    }

    #[test]
    fn hadamard_swaps_to_the_dual(seed in any::<u64>(), d in 2usize..=10, k in 0usize..=10) {
        let mut rng = stream_rng(seed, 0);
        let a = Gf2Subspace::random(d, k.min(d), &mut rng).unwrap();
        let (a1, a2) = (Gf2Vector::random(d, &mut rng), Gf2Vector::random(d, &mut rng));
        let h = QuantumRegister::coset_state(&a, &a1, &a2).unwrap().hadamard_all();
        let dual = QuantumRegister::coset_state(&a.dual(), &a2, &a1).unwrap();
        prop_assert!((h.fidelity(&dual).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn impindep_holds(seed in any::<u64>(), outcomes in 2usize..=4) {
        let mut rng = stream_rng(seed, 0);
        let (da, db) = (4, 2);
        let rho = random_density(da * db, rng.random_range(1..=da * db), &mut rng);
        let m = random_kraus(da, outcomes, &mut rng);
        let e = povm_equivalent(&m, &mut rng);
        let r = verify_impindep(&rho, (da, db), &m, &e).unwrap();
        prop_assert!(r.max_trace_distance < 1e-9, "{}", r.max_trace_distance);
    }
}

#[test]
fn gentle_bound_over_random_pairs() {
    for i in 0..100 {
        let mut rng = stream_rng(7, i);
        let ds = [2, 4][rng.random_range(0..2)];
        let da = 4;
        let rho = random_density(ds, rng.random_range(1..=ds), &mut rng);
        let u = random_unitary(ds * da, &mut rng);
        let rank = rng.random_range(1..ds * da);
        let pi0 = BinaryProjector::dense(random_projector(ds * da, rank, &mut rng)).unwrap();
        match gentle_measurement(&rho, &u, &pi0, da) {
            Ok(r) => assert!(r.holds(), "{} > {}", r.trace_distance, r.bound),
            Err(cosetlab::Error::ImpossibleCollapse) => {}
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn inequivalent_povms_are_rejected() {
    let mut rng = stream_rng(8, 0);
    let rho = random_density(8, 2, &mut rng);
    let m = random_kraus(4, 2, &mut rng);
    let other = random_kraus(4, 2, &mut rng);
    assert!(verify_impindep(&rho, (4, 2), &m, &other).is_err());
}

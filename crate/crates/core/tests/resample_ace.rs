use cosetlab::ace::{
    ace_dec, ace_enc, ace_setup, check_properties, gen_dk, gen_ek, steg_dec, steg_enc, steg_reference_law,
    PropertyScope, PuncturingPredicate, StegOutcome, StegSource,
};
use cosetlab::resample::{
    exact_tv_distance, resample_infinite_law, resample_truncated_law, truncated_limit, FiniteDistribution,
};
use cosetlab::{stream_rng, LabRng};
use proptest::prelude::*;
use rand::Rng;

fn random_pair(rng: &mut LabRng, max_support: usize) -> (FiniteDistribution, Vec<u64>) {
    let size = rng.random_range(1..=max_support);
    let weights: Vec<f64> = (0..size).map(|_| rng.random_range(0.01..1.0)).collect();
    let d = FiniteDistribution::from_weights((0..size as u64).collect(), weights).unwrap();
    let range = rng.random_range(1..=size as u64);
    (d, (0..size).map(|_| rng.random_range(0..range)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn infinite_resampling_is_exact(seed in any::<u64>()) {
        let (d, f) = random_pair(&mut stream_rng(seed, 0), 64);
        let law = resample_infinite_law(&d, |x| f[x as usize]);
        prop_assert!(law.tv_from(&d) < 1e-12);
    }

    #[test]
    fn truncated_resampling_within_epsilon(seed in any::<u64>(), eps in 0.01f64..0.5) {
        let (d, f) = random_pair(&mut stream_rng(seed, 0), 64);
        let t = truncated_limit(eps, d.len()).unwrap();
        let law = resample_truncated_law(&d, |x| f[x as usize], t);
        prop_assert!(law.tv_from(&d) <= eps);
        prop_assert!(law.bottom <= eps);
    }

    #[test]
    fn more_tries_never_hurt(seed in any::<u64>(), t in 1u64..64) {
        let (d, f) = random_pair(&mut stream_rng(seed, 0), 32);
        let tv = |t| resample_truncated_law(&d, |x| f[x as usize], t).tv_from(&d);
        prop_assert!(tv(t + 1) <= tv(t) + 1e-15);
    }
}

#[test]
fn truncated_limit_reference_value() {
    assert_eq!(truncated_limit(0.05, 64).unwrap(), 20091);
}

#[test]
fn ace_properties_at_toy_sizes() {
    let mut rng = stream_rng(11, 0);
    for (n, scope) in [
        (4, PropertyScope::Exhaustive),
        (8, PropertyScope::Sampled { messages: 200, ciphertexts: 200 }),
    ] {
        let sk = ace_setup(n, 128, &mut rng).unwrap();
        let family = vec![
            PuncturingPredicate::never(),
            PuncturingPredicate::point(n, 5),
            PuncturingPredicate::set(n, [1, 2, 3]),
            PuncturingPredicate::prefix(n, true),
        ];
        for r in check_properties(&sk, &family, scope, &mut rng).unwrap() {
            assert!(r.holds() && r.checked > 0, "{r:?}");
        }
    }
}

#[test]
fn encapsulation_is_injective_at_n8() {
    let mut rng = stream_rng(12, 0);
    let sk = ace_setup(8, 128, &mut rng).unwrap();
    let ek = gen_ek(&sk, &PuncturingPredicate::never(), &mut rng);
    let cts: std::collections::BTreeSet<u64> = (0..256).map(|m| ace_enc(&ek, m).unwrap().unwrap()).collect();
    assert_eq!(cts.len(), 256);
}

#[test]
fn punctured_messages_do_not_encapsulate() {
    let mut rng = stream_rng(13, 0);
    let sk = ace_setup(6, 128, &mut rng).unwrap();
    let c = PuncturingPredicate::prefix(6, false);
    let (ek, dk) = (gen_ek(&sk, &c, &mut rng), gen_dk(&sk, &c, &mut rng));
    let full = gen_ek(&sk, &PuncturingPredicate::never(), &mut rng);
    for m in 0..64 {
        let ct = ace_enc(&full, m).unwrap().unwrap();
        if c.eval(m) {
            assert_eq!(ace_enc(&ek, m).unwrap(), None);
            assert_eq!(ace_dec(&dk, ct).unwrap(), None);
        } else {
            assert_eq!(ace_dec(&dk, ct).unwrap(), Some(m));
        }
    }
}

#[test]
fn steg_law_tracks_the_cover_distribution() {
    // the fibre-resampled law of a small explicit source stays within ε
    let mut rng = stream_rng(14, 0);
    let sk = ace_setup(2, 128, &mut rng).unwrap();
    let ext = sk.extractor(10).unwrap();
    let weights: Vec<f64> = (0..1024).map(|_| rng.random_range(0.5..1.0)).collect();
    let dist = FiniteDistribution::from_weights((0..1024).collect(), weights).unwrap();
    for eps in [0.05, 0.2] {
        let law = steg_reference_law(&ext, &dist, eps).unwrap();
        assert!(law.tv_from(&dist) <= eps);
    }
    let uniform = FiniteDistribution::uniform_bits(10).unwrap();
    assert!(exact_tv_distance(&uniform, &uniform) < 1e-15);
}

#[test]
fn steg_roundtrip_on_explicit_and_uniform_sources() {
    let mut rng = stream_rng(15, 0);
    let sk = ace_setup(2, 128, &mut rng).unwrap();
    let never = PuncturingPredicate::never();
    let (ek, dk) = (gen_ek(&sk, &never, &mut rng), gen_dk(&sk, &never, &mut rng));
    let explicit = StegSource::explicit(FiniteDistribution::uniform_bits(10).unwrap(), 10).unwrap();
    for source in [explicit, StegSource::UniformBits(16)] {
        let mut ok = 0;
        for t in 0..200 {
            let m = t % 4;
            if let StegOutcome::Embedded(s) = steg_enc(&ek, m, &source, 0.1, &mut rng).unwrap() {
                ok += (steg_dec(&dk, s, source.sample_bits()).unwrap() == Some(m)) as u32;
            }
        }
        assert!(ok >= 160, "{ok}");
    }
    let thin = StegSource::UniformBits(6);
    assert!(steg_enc(&ek, 1, &thin, 0.1, &mut rng).is_err());
}

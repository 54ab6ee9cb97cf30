//! Program pairs from the security argument, checked for functional
//! equivalence through the obfuscation registry.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::protect::{hint_membership_program, membership_program, program_p, protected_spec};
use crate::ace::{ace_setup, ace_dec, dec_program, decap_key_from, encap_key_from, ciphertext_spec, PuncturingPredicate, ToeplitzExtractor};
use crate::error::Result;
use crate::gf2::{canonical_vector, sample_coset_instance, Gf2Subspace, Gf2Vector};
use crate::obf::{check_equivalence, obfuscate, Equivalence, Value};
use crate::prf::{CachedPrf, PrfKey};
use crate::{stream_rng, LabRng};

#[derive(Clone, Debug, Serialize)]
pub struct HybridCheck {
    pub name: String,
    pub expect_equivalent: bool,
    pub result: Equivalence,
}

impl HybridCheck {
    pub fn passed(&self) -> bool {
        self.result.is_equivalent() == self.expect_equivalent
    }
}

fn check(name: &str, expect_equivalent: bool, result: Equivalence) -> HybridCheck {
    HybridCheck {
        name: name.to_string(),
        expect_equivalent,
        result,
    }
}

/// `M` against `M′`. They differ wherever the hint cosets are strictly
/// larger, so a counterexample is expected.
pub fn membership_hybrid(d: usize, rng: &mut LabRng) -> Result<HybridCheck> {
    let inst = sample_coset_instance(d, rng)?;
    let m0 = membership_program(&inst, rng);
    let m1 = hint_membership_program(&inst, rng);
    Ok(check("membership M vs hint M'", false, check_equivalence(&m0, &m1)?))
}

/// Width of the circuit input in the protected-program pair: a full ACE
/// ciphertext at `n = 4`.
const PAIR_N: u32 = 4;
const PAIR_D: usize = 4;
const PAIR_OUT: u32 = 8;

/// `G`: SHA-256 counter-mode expansion of `r` to `len` bytes.
fn expand(r: u64, len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(len);
    let mut counter = 0u32;
    while out.len() < len {
        let mut h = Sha256::new();
        h.update(b"hybrid-prg");
        h.update(r.to_le_bytes());
        h.update(counter.to_le_bytes());
        out.extend_from_slice(&h.finalize());
        counter += 1;
    }
    out.truncate(len);
    out
}

fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

/// One payload slot: `(A′, se′, z)`. The low three payload bits index the
/// table and the top bit is `t`.
#[derive(Clone, Debug)]
struct Slot {
    a_prime: Gf2Subspace,
    extractor: ToeplitzExtractor,
    z: u64,
}

/// `P` (with `M′`, as in the hybrid before the switch) against `P⁽¹⁾`
/// with `dk′ = GenDK(sk, TRUE)`, exhaustively over `(x, b, v)` at `n = 4`,
/// `d = 4`. With `punctured_everywhere = false` the pair uses
/// `GenDK(sk, FALSE)` instead and is expected to differ.
pub fn protect_hybrid(punctured_everywhere: bool, rng: &mut LabRng) -> Result<HybridCheck> {
    let n = PAIR_N;
    let x_bits = 4 * n;
    let inst = sample_coset_instance(PAIR_D, rng)?;
    let pp = hint_membership_program(&inst, rng);
    let c_key = PrfKey::setup(128, x_bits, PAIR_OUT, rng)?;
    let k_key = PrfKey::setup(128, x_bits, PAIR_OUT, rng)?;
    let c = Arc::new(CachedPrf::new(c_key.clone()));
    let k = Arc::new(CachedPrf::new(k_key.clone()));

    let circuit = {
        let c = c.clone();
        Arc::new(move |x| c.get(x)) as super::scheme::Circuit
    };
    let p0 = obfuscate(program_p(pp.clone(), circuit, k.clone()), protected_spec(x_bits, PAIR_D), "protected", rng);

    let sk = ace_setup(n, 128, rng)?;
    let pred = if punctured_everywhere { PuncturingPredicate::always() } else { PuncturingPredicate::never() };
    let dk = decap_key_from(n, sk.k1().clone(), sk.k2().clone(), pred, sk.seed(), rng);
    let root_len = c_key.root().len();
    let r1: u64 = rng.random::<u64>() & ((1 << PAIR_D) - 1);
    let r2: u64 = rng.random::<u64>() & ((1 << PAIR_D) - 1);
    let ct1 = xor(c_key.root(), &expand(r1, root_len));
    let ct2 = xor(k_key.root(), &expand(r2, root_len));
    let slots = (0..8)
        .map(|_| {
            Ok(Slot {
                a_prime: Gf2Subspace::random(PAIR_D, PAIR_D / 2, rng)?,
                extractor: ToeplitzExtractor::new(PAIR_D as u32, PAIR_D as u32, rng.random::<u128>())?,
                z: rng.random::<u64>() & ((1 << PAIR_D) - 1),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let q_rel = |x: u64| x;
    let p1 = move |i: &[u64]| {
        let (x, b, v) = (i[0], i[1], i[2]);
        if pp.eval(&[b, v]).ok().and_then(|r| r.truth()) != Some(true) {
            return Value::Bot;
        }
        let xp = q_rel(x);
        let pl = ace_dec(&dk, xp).ok().flatten();
        let standard = || {
            let Some(mask) = k.get(x) else { return Value::Bot };
            if b == 1 {
                return Value::Word(mask);
            }
            c.get(x).map_or(Value::Bot, |y| Value::Word(y ^ mask))
        };
        let Some(pl) = pl else { return standard() };
        let t = pl >> (n - 1) & 1;
        if t != b {
            return standard();
        }
        let slot = &slots[(pl & 7) as usize];
        let space = if t == 0 { slot.a_prime.clone() } else { slot.a_prime.dual() };
        let vv = Gf2Vector::new(v, PAIR_D).expect("v fits");
        let a = canonical_vector(&space, &vv).expect("same dimension").bits();
        let r = slot.extractor.extract(a).expect("d-bit sample") ^ slot.z;
        let ct = if t == 0 { &ct1 } else { &ct2 };
        let key = PrfKey::from_root(xor(ct, &expand(r, root_len)), x_bits, PAIR_OUT).expect("valid root");
        let y = key.eval_word(x).expect("x fits");
        match (t, k.get(x)) {
            (0, Some(mask)) => Value::Word(y ^ mask),
            (_, Some(_)) => Value::Word(y),
            (_, None) => Value::Bot,
        }
    };
    let p1 = obfuscate(p1, protected_spec(x_bits, PAIR_D), "protected", rng);
    let name = if punctured_everywhere {
        "protected P vs P(1), dk' punctured everywhere"
    } else {
        "protected P vs P(1), dk' unpunctured"
    };
    Ok(check(name, punctured_everywhere, check_equivalence(&p0, &p1)?))
}

fn image_complement(k1: &PrfKey, out_bits: u32, count: usize, rng: &mut LabRng) -> Result<Vec<u64>> {
    let image: BTreeSet<u64> = k1.table()?.into_iter().collect();
    let mut picks = Vec::new();
    while picks.len() < count {
        let a = rng.random::<u64>() & ((1 << out_bits) - 1);
        if !image.contains(&a) && !picks.contains(&a) {
            picks.push(a);
        }
    }
    Ok(picks)
}

/// The ACE program pairs: encapsulation and decapsulation with `K₁`
/// punctured at a constrained message, and the pairs that puncture `K₂`
/// at two points outside the image of `PRF₁(K₁, ·)`.
pub fn ace_hybrids(n: u32, rng: &mut LabRng) -> Result<Vec<HybridCheck>> {
    let sk = ace_setup(n, 128, rng)?;
    let m_star = rng.random::<u64>() & ((1 << n) - 1);
    let extra = rng.random::<u64>() & ((1 << n) - 1);
    let c1 = PuncturingPredicate::set(n, [m_star, extra]);
    let c2 = PuncturingPredicate::set(n, [m_star]);
    let k1 = sk.k1().clone();
    let k2 = sk.k2().clone();
    let k1p = k1.puncture(&BTreeSet::from([m_star]))?;
    let seed = sk.seed();
    let mut out = Vec::new();

    let e0 = encap_key_from(n, k1.clone(), k2.clone(), c1.clone(), seed, rng);
    let e1 = encap_key_from(n, k1p.clone(), k2.clone(), c1.clone(), seed, rng);
    out.push(check("enc with K1 vs K1{m*}", true, check_equivalence(&e0.program, &e1.program)?));

    let d0 = decap_key_from(n, k1.clone(), k2.clone(), c2.clone(), seed, rng);
    let d1 = decap_key_from(n, k1p.clone(), k2.clone(), c2.clone(), seed, rng);
    out.push(check("dec with K1 vs K1{m*}", true, check_equivalence(&d0.program, &d1.program)?));

    let outside = image_complement(&k1, 3 * n, 2, rng)?;
    let (alpha_star, r1_star) = (outside[0], outside[1]);
    let k2p = k2.puncture(&BTreeSet::from([alpha_star, r1_star]))?;
    let e2 = encap_key_from(n, k1p.clone(), k2p.clone(), c1.clone(), seed, rng);
    out.push(check("enc with K2 vs K2{alpha*, r1*}", true, check_equivalence(&e1.program, &e2.program)?));

    let guarded = |k2: Arc<CachedPrf>, rng: &mut LabRng| {
        let inner = dec_program(Arc::new(CachedPrf::new(k1p.clone())), k2, c2.clone());
        let p = move |i: &[u64]| if i[0] == alpha_star || i[0] == r1_star { Value::Bot } else { inner(i) };
        obfuscate(p, ciphertext_spec(n), "ace-dec", rng)
    };
    let d2 = guarded(Arc::new(CachedPrf::new(k2.clone())), rng);
    out.push(check("dec vs dec rejecting alpha*, r1*", true, check_equivalence(&d1.program, &d2)?));
    let d3 = guarded(Arc::new(CachedPrf::new(k2p)), rng);
    out.push(check("guarded dec with K2 vs K2{alpha*, r1*}", true, check_equivalence(&d2, &d3)?));
    Ok(out)
}

/// Every pair at toy size: the membership negative control, the
/// protected-program pair and the ACE pairs at `n = 4`.
pub fn all_hybrid_checks(seed: u64) -> Result<Vec<HybridCheck>> {
    let mut rng = stream_rng(seed, 0);
    let mut out = vec![membership_hybrid(PAIR_D, &mut rng)?, protect_hybrid(true, &mut rng)?];
    out.extend(ace_hybrids(PAIR_N, &mut rng)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_pair_differs() {
        for s in 0..5 {
            let c = membership_hybrid(4, &mut stream_rng(s, 0)).unwrap();
            assert!(c.passed(), "{c:?}");
        }
    }

    #[test]
    fn ace_pairs_are_equivalent() {
        let checks = ace_hybrids(4, &mut stream_rng(2, 0)).unwrap();
        assert_eq!(checks.len(), 5);
        for c in checks {
            assert!(c.passed(), "{c:?}");
        }
    }

    #[test]
    fn protected_pair_needs_the_punctured_dk() {
        let mut rng = stream_rng(3, 0);
        assert!(protect_hybrid(true, &mut rng).unwrap().passed());
        let neg = protect_hybrid(false, &mut rng).unwrap();
        assert!(neg.passed(), "{neg:?}");
    }

    #[test]
    fn expansion_is_deterministic() {
        assert_eq!(expand(5, 40), expand(5, 40));
        assert_ne!(expand(5, 16), expand(6, 16));
        assert_eq!(expand(1, 40).len(), 40);
    }
}

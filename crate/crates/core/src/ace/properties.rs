//! Exhaustive or sampled checks of the five ACE correctness properties.

use std::collections::HashSet;

use rand::Rng;
use serde::Serialize;

use super::{ace_dec, ace_enc, gen_dk, gen_ek, AceKey, AceSecretKey, PuncturingPredicate};
use crate::error::{capacity, Result};

/// Widest ciphertext space enumerated in full.
const MAX_EXHAUSTIVE_CT_BITS: u32 = 20;

#[derive(Clone, Copy, Debug)]
pub enum PropertyScope {
    /// Every message and every ciphertext string.
    Exhaustive,
    /// Random messages, plus random strings, honest ciphertexts and their
    /// one-bit perturbations.
    Sampled { messages: usize, ciphertexts: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyReport {
    pub name: &'static str,
    pub checked: u64,
    pub violations: u64,
}

impl PropertyReport {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            checked: 0,
            violations: 0,
        }
    }

    fn record(&mut self, ok: bool) {
        self.checked += 1;
        self.violations += !ok as u64;
    }

    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

struct Keys {
    c: PuncturingPredicate,
    ek: AceKey,
    dk: AceKey,
}

pub fn check_properties<R: Rng + ?Sized>(
    sk: &AceSecretKey,
    family: &[PuncturingPredicate],
    scope: PropertyScope,
    rng: &mut R,
) -> Result<Vec<PropertyReport>> {
    let n = sk.message_bits();
    let ct_bits = sk.ciphertext_bits();
    let msg_mask = (1u64 << n) - 1;
    let ct_mask = (1u64 << ct_bits) - 1;

    let (messages, ciphertexts): (Vec<u64>, Vec<u64>) = match scope {
        PropertyScope::Exhaustive => {
            capacity("steg-ace", "exhaustive ciphertext bits", ct_bits, MAX_EXHAUSTIVE_CT_BITS)?;
            ((0..=msg_mask).collect(), (0..=ct_mask).collect())
        }
        PropertyScope::Sampled { messages, ciphertexts } => {
            let ms: Vec<u64> = (0..messages).map(|_| rng.random::<u64>() & msg_mask).collect();
            let mut cts: Vec<u64> = (0..ciphertexts).map(|_| rng.random::<u64>() & ct_mask).collect();
            for &m in &ms {
                let honest = sk.encapsulation(m)?;
                cts.push(honest);
                cts.push(honest ^ (1 << rng.random_range(0..ct_bits)));
            }
            (ms, cts)
        }
    };

    let none = PuncturingPredicate::never();
    let base = Keys {
        ek: gen_ek(sk, &none, rng),
        dk: gen_dk(sk, &none, rng),
        c: none,
    };
    let keyed: Vec<Keys> = family
        .iter()
        .map(|c| Keys {
            ek: gen_ek(sk, c, rng),
            dk: gen_dk(sk, c, rng),
            c: c.clone(),
        })
        .collect();

    let mut cod = PropertyReport::new("correctness of decapsulation");
    for a in &keyed {
        for b in &keyed {
            for &m in &messages {
                if a.c.eval(m) || b.c.eval(m) {
                    continue;
                }
                let ct = ace_enc(&b.ek, m)?;
                let back = match ct {
                    Some(ct) => ace_dec(&a.dk, ct)?,
                    None => None,
                };
                cod.record(back == Some(m));
            }
        }
    }

    let mut ece = PropertyReport::new("equivalence of constrained encapsulation");
    for k in &keyed {
        for &m in &messages {
            if !k.c.eval(m) {
                ece.record(ace_enc(&k.ek, m)? == ace_enc(&base.ek, m)?);
            }
        }
    }

    let mut scd = PropertyReport::new("safety of constrained decapsulation");
    let mut ecd = PropertyReport::new("equivalence of constrained decapsulation");
    let reference: Vec<Option<u64>> = ciphertexts
        .iter()
        .map(|&ct| ace_dec(&base.dk, ct))
        .collect::<Result<_>>()?;
    for k in &keyed {
        for (&ct, &m2) in ciphertexts.iter().zip(&reference) {
            let m1 = ace_dec(&k.dk, ct)?;
            scd.record(m1.is_none_or(|m| !k.c.eval(m)));
            ecd.record(m1 == m2 || m2.is_some_and(|m| k.c.eval(m)));
        }
    }

    let mut ue = PropertyReport::new("unique encapsulations");
    for (&ct, &m) in ciphertexts.iter().zip(&reference) {
        if let Some(m) = m {
            ue.record(ct == sk.encapsulation(m)?);
        }
    }
    for &m in &messages {
        ue.record(ace_dec(&base.dk, sk.encapsulation(m)?)? == Some(m));
    }

    let mut inj = PropertyReport::new("injective encapsulation");
    let distinct: HashSet<u64> = messages.iter().copied().collect();
    let mut images = HashSet::new();
    for &m in &distinct {
        let ct = ace_enc(&base.ek, m)?;
        inj.record(ct.is_some_and(|ct| images.insert(ct)));
    }

    Ok(vec![cod, ece, scd, ecd, ue, inj])
}

#[cfg(test)]
mod tests {
    use super::super::ace_setup;
    use super::*;
    use crate::stream_rng;

    #[test]
    fn all_hold_exhaustively_at_n3() {
        let mut rng = stream_rng(31, 0);
        let sk = ace_setup(3, 64, &mut rng).unwrap();
        let mut family = vec![
            PuncturingPredicate::never(),
            PuncturingPredicate::prefix(3, false),
            PuncturingPredicate::prefix(3, true),
        ];
        family.extend((0..8).map(|m| PuncturingPredicate::point(3, m)));
        let reports = check_properties(&sk, &family, PropertyScope::Exhaustive, &mut rng).unwrap();
        for r in &reports {
            assert!(r.holds() && r.checked > 0, "{r:?}");
        }
    }

    #[test]
    fn broken_decapsulation_is_caught() {
        use super::super::decap_key_from;
        let mut rng = stream_rng(32, 0);
        let sk = ace_setup(3, 64, &mut rng).unwrap();
        // a key that ignores its predicate violates safety
        let c = PuncturingPredicate::point(3, 5);
        let leaky = decap_key_from(3, sk.k1().clone(), sk.k2().clone(), PuncturingPredicate::never(), sk.seed(), &mut rng);
        let ct = sk.encapsulation(5).unwrap();
        let m = ace_dec(&leaky, ct).unwrap();
        assert!(m.is_some_and(|m| c.eval(m)));
    }
}

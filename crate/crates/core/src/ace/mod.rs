//! Asymmetrically constrained encapsulation with steganographic encoding.
//!
//! A message `m` of `n` bits encapsulates to `α‖β` where `α = PRF₁(K₁, m)`
//! has `3n` bits and `β = PRF₂(K₂, α) ⊕ m`. Ciphertexts are packed with `α`
//! in the high `3n` bits.

mod extractor;
mod games;
mod predicate;
mod properties;
mod steg;

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::obf::{obfuscate, InputSpec, ObfHandle, Value};
use crate::prf::{CachedPrf, PrfKey, WordPrf};

pub use extractor::ToeplitzExtractor;
pub use games::{
    puncture_hiding_game, pseudorandom_ciphertext_game, steg_ciphertext_game, Distinguisher, GameReport, GameView,
    GuessDistinguisher, ProbeDistinguisher,
};
pub use predicate::PuncturingPredicate;
pub use properties::{check_properties, PropertyReport, PropertyScope};
pub use steg::{steg_dec, steg_enc, steg_reference_law, StegOutcome, StegSource};

/// Largest message width.
pub const MAX_MESSAGE_BITS: u32 = 16;

fn mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1 << bits) - 1
    }
}

#[derive(Clone)]
pub struct AceSecretKey {
    n: u32,
    k1: PrfKey,
    k2: PrfKey,
    seed: u128,
}

impl fmt::Debug for AceSecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AceSecretKey {{ n: {}, .. }}", self.n)
    }
}

/// Fresh `K₁: n → 3n`, `K₂: 3n → n` and a 127-bit extractor seed.
pub fn ace_setup<R: Rng + ?Sized>(n: u32, security_bits: u32, rng: &mut R) -> Result<AceSecretKey> {
    if n == 0 || n > MAX_MESSAGE_BITS {
        return Err(Error::Parameter(format!("message width {n} outside 1..={MAX_MESSAGE_BITS}")));
    }
    let k1 = PrfKey::setup(security_bits, n, 3 * n, rng)?;
    let k2 = PrfKey::setup(security_bits, 3 * n, n, rng)?;
    let seed = rng.random::<u128>() >> 1;
    Ok(AceSecretKey { n, k1, k2, seed })
}

impl AceSecretKey {
    pub fn message_bits(&self) -> u32 {
        self.n
    }

    pub fn ciphertext_bits(&self) -> u32 {
        4 * self.n
    }

    pub fn k1(&self) -> &PrfKey {
        &self.k1
    }

    pub fn k2(&self) -> &PrfKey {
        &self.k2
    }

    pub fn seed(&self) -> u128 {
        self.seed
    }

    /// The deterministic encapsulation `F(sk, m)`, computed from the keys
    /// directly rather than through a program.
    pub fn encapsulation(&self, m: u64) -> Result<u64> {
        let alpha = self.k1.eval_word(m)?;
        let beta = self.k2.eval_word(alpha)? ^ m;
        Ok(alpha << self.n | beta)
    }

    pub fn extractor(&self, sample_bits: u32) -> Result<ToeplitzExtractor> {
        ToeplitzExtractor::new(sample_bits, self.ciphertext_bits(), self.seed)
    }
}

/// Encapsulation or decapsulation key: an obfuscated program plus the seed.
#[derive(Clone, Debug)]
pub struct AceKey {
    pub program: ObfHandle,
    pub seed: u128,
    n: u32,
}

pub type AceEncapKey = AceKey;
pub type AceDecapKey = AceKey;

impl AceKey {
    pub fn message_bits(&self) -> u32 {
        self.n
    }

    pub fn ciphertext_bits(&self) -> u32 {
        4 * self.n
    }

    pub fn extractor(&self, sample_bits: u32) -> Result<ToeplitzExtractor> {
        ToeplitzExtractor::new(sample_bits, self.ciphertext_bits(), self.seed)
    }
}

/// The encapsulation program with `k1`, `k2` and `c` hardcoded. A punctured
/// `k1` is allowed; reaching a punctured point yields ⊥.
pub fn enc_program(
    n: u32,
    k1: Arc<CachedPrf>,
    k2: Arc<CachedPrf>,
    c: PuncturingPredicate,
) -> impl Fn(&[u64]) -> Value + Send + Sync + 'static {
    move |input: &[u64]| {
        let m = input[0];
        if c.eval(m) {
            return Value::Bot;
        }
        let Some(alpha) = k1.get(m) else { return Value::Bot };
        let Some(pad) = k2.get(alpha) else { return Value::Bot };
        Value::Word(alpha << n | (pad ^ m))
    }
}

/// The decapsulation program. `m` is recovered before `c` is consulted.
pub fn dec_program(
    k1: Arc<CachedPrf>,
    k2: Arc<CachedPrf>,
    c: PuncturingPredicate,
) -> impl Fn(&[u64]) -> Value + Send + Sync + 'static {
    move |input: &[u64]| {
        let (alpha, beta) = (input[0], input[1]);
        let Some(pad) = k2.get(alpha) else { return Value::Bot };
        let m = pad ^ beta;
        if c.eval(m) {
            return Value::Bot;
        }
        match k1.get(m) {
            Some(a) if a == alpha => Value::Word(m),
            _ => Value::Bot,
        }
    }
}

pub fn message_spec(n: u32) -> InputSpec {
    InputSpec::new(&[("m", n)]).expect("message width is positive")
}

pub fn ciphertext_spec(n: u32) -> InputSpec {
    InputSpec::new(&[("alpha", 3 * n), ("beta", n)]).expect("ciphertext width is positive")
}

const ENC_PAD: &str = "ace-enc";
const DEC_PAD: &str = "ace-dec";

/// Wraps an encapsulation program built from arbitrary PRF keys.
pub fn encap_key_from<R: Rng + ?Sized>(
    n: u32,
    k1: impl WordPrf + 'static,
    k2: impl WordPrf + 'static,
    c: PuncturingPredicate,
    seed: u128,
    rng: &mut R,
) -> AceKey {
    let p = enc_program(n, Arc::new(CachedPrf::new(k1)), Arc::new(CachedPrf::new(k2)), c);
    AceKey {
        program: obfuscate(p, message_spec(n), ENC_PAD, rng),
        seed,
        n,
    }
}

pub fn decap_key_from<R: Rng + ?Sized>(
    n: u32,
    k1: impl WordPrf + 'static,
    k2: impl WordPrf + 'static,
    c: PuncturingPredicate,
    seed: u128,
    rng: &mut R,
) -> AceKey {
    let p = dec_program(Arc::new(CachedPrf::new(k1)), Arc::new(CachedPrf::new(k2)), c);
    AceKey {
        program: obfuscate(p, ciphertext_spec(n), DEC_PAD, rng),
        seed,
        n,
    }
}

pub fn gen_ek<R: Rng + ?Sized>(sk: &AceSecretKey, c: &PuncturingPredicate, rng: &mut R) -> AceEncapKey {
    encap_key_from(sk.n, sk.k1.clone(), sk.k2.clone(), c.clone(), sk.seed, rng)
}

pub fn gen_dk<R: Rng + ?Sized>(sk: &AceSecretKey, c: &PuncturingPredicate, rng: &mut R) -> AceDecapKey {
    decap_key_from(sk.n, sk.k1.clone(), sk.k2.clone(), c.clone(), sk.seed, rng)
}

/// `Some(α‖β)` or `None` for ⊥.
pub fn ace_enc(ek: &AceEncapKey, m: u64) -> Result<Option<u64>> {
    Ok(ek.program.eval(&[m])?.word())
}

pub fn ace_dec(dk: &AceDecapKey, ct: u64) -> Result<Option<u64>> {
    let bits = dk.ciphertext_bits();
    if ct >> bits != 0 {
        return Err(Error::Parameter(format!("ciphertext wider than {bits} bits")));
    }
    Ok(dk.program.eval(&[ct >> dk.n, ct & mask(dk.n)])?.word())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream_rng;

    fn key(n: u32, seed: u64) -> AceSecretKey {
        ace_setup(n, 128, &mut stream_rng(seed, 0)).unwrap()
    }

    #[test]
    fn widths_and_determinism() {
        let sk = key(8, 1);
        assert_eq!(sk.ciphertext_bits(), 32);
        assert_eq!(sk.k1().output_bits(), 24);
        assert_eq!(sk.k2().input_bits(), 24);
        let again = key(8, 1);
        assert_eq!(sk.encapsulation(77).unwrap(), again.encapsulation(77).unwrap());
        assert_eq!(sk.seed(), again.seed());
        assert!(sk.seed() >> 127 == 0);
    }

    #[test]
    fn distinct_setups_give_distinct_tables() {
        let (a, b) = (key(4, 1), key(4, 2));
        let ta: Vec<u64> = (0..16).map(|m| a.encapsulation(m).unwrap()).collect();
        let tb: Vec<u64> = (0..16).map(|m| b.encapsulation(m).unwrap()).collect();
        assert_ne!(ta, tb);
    }

    #[test]
    fn roundtrip_all_messages_n8() {
        let sk = key(8, 3);
        let mut rng = stream_rng(3, 1);
        let none = PuncturingPredicate::never();
        let ek = gen_ek(&sk, &none, &mut rng);
        let dk = gen_dk(&sk, &none, &mut rng);
        for m in 0..256 {
            let ct = ace_enc(&ek, m).unwrap().unwrap();
            assert_eq!(ct, sk.encapsulation(m).unwrap());
            assert_eq!(ace_dec(&dk, ct).unwrap(), Some(m));
        }
    }

    #[test]
    fn punctured_point_is_bot() {
        let sk = key(8, 4);
        let mut rng = stream_rng(4, 1);
        let c = PuncturingPredicate::point(8, 0x5a);
        let ek = gen_ek(&sk, &c, &mut rng);
        let dk = gen_dk(&sk, &c, &mut rng);
        assert_eq!(ace_enc(&ek, 0x5a).unwrap(), None);
        let honest = sk.encapsulation(0x5a).unwrap();
        assert_eq!(ace_dec(&dk, honest).unwrap(), None);
        assert_eq!(ace_enc(&ek, 0x5b).unwrap(), Some(sk.encapsulation(0x5b).unwrap()));
    }

    #[test]
    fn random_strings_rarely_decapsulate() {
        let sk = key(4, 5);
        let dk = gen_dk(&sk, &PuncturingPredicate::never(), &mut stream_rng(5, 1));
        let valid = (0..1u64 << 16).filter(|&ct| ace_dec(&dk, ct).unwrap().is_some()).count();
        assert_eq!(valid, 16);
    }

    #[test]
    fn wide_ciphertext_is_an_error() {
        let sk = key(4, 6);
        let dk = gen_dk(&sk, &PuncturingPredicate::never(), &mut stream_rng(6, 1));
        assert!(ace_dec(&dk, 1 << 16).is_err());
    }
}

//! Runnable security-game harnesses with pluggable distinguishers. They
//! measure an advantage; they do not establish security.

use rand::Rng;
use serde::Serialize;

use super::{ace_dec, ace_enc, ace_setup, gen_dk, gen_ek, steg_dec, steg_enc, AceKey, PuncturingPredicate, StegSource};
use crate::error::{Error, Result};
use crate::stats::{wilson, RateSummary};
use crate::{stream_rng, LabRng};

/// What the adversary sees in one trial.
pub struct GameView<'a> {
    pub ek: &'a AceKey,
    pub dk: &'a AceKey,
    /// Challenge strings; empty in the puncture-hiding game.
    pub challenges: &'a [u64],
    /// Width of steganographic challenges, 0 for plain ciphertexts.
    pub sample_bits: u32,
}

pub trait Distinguisher: Send + Sync {
    fn name(&self) -> &str;
    fn guess(&self, view: &GameView<'_>, rng: &mut LabRng) -> Result<bool>;
}

/// Outputs a fair coin.
pub struct GuessDistinguisher;

impl Distinguisher for GuessDistinguisher {
    fn name(&self) -> &str {
        "guess"
    }

    fn guess(&self, _: &GameView<'_>, rng: &mut LabRng) -> Result<bool> {
        Ok(rng.random())
    }
}

/// Runs the decapsulation key on everything it can: the challenges, and
/// the encapsulations of every message the encapsulation key accepts.
/// Outputs the parity of the number of non-⊥ answers.
pub struct ProbeDistinguisher;

impl Distinguisher for ProbeDistinguisher {
    fn name(&self) -> &str {
        "probe"
    }

    fn guess(&self, view: &GameView<'_>, _: &mut LabRng) -> Result<bool> {
        let mut hits = 0u64;
        for &c in view.challenges {
            let m = if view.sample_bits == 0 {
                ace_dec(view.dk, c)?
            } else {
                steg_dec(view.dk, c, view.sample_bits)?
            };
            hits += m.is_some() as u64;
        }
        if view.challenges.is_empty() {
            for m in 0..1u64 << view.ek.message_bits() {
                if let Some(ct) = ace_enc(view.ek, m)? {
                    hits += ace_dec(view.dk, ct)?.is_some() as u64;
                }
            }
        }
        Ok(hits % 2 == 1)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GameReport {
    pub game: &'static str,
    pub distinguisher: String,
    pub wins: RateSummary,
    /// |Pr[win] − ½|.
    pub advantage: f64,
}

fn report(game: &'static str, d: &dyn Distinguisher, wins: u64, trials: u64) -> GameReport {
    let w = wilson(wins, trials);
    GameReport {
        game,
        distinguisher: d.name().to_string(),
        advantage: (w.rate - 0.5).abs(),
        wins: w,
    }
}

const SECURITY_BITS: u32 = 64;

/// Challenger picks `b`, hands over `GenEK(C)` and `GenDK(C_b)`.
pub fn puncture_hiding_game(
    n: u32,
    c: &PuncturingPredicate,
    c0: &PuncturingPredicate,
    c1: &PuncturingPredicate,
    d: &dyn Distinguisher,
    trials: u64,
    seed: u64,
) -> Result<GameReport> {
    let mut wins = 0;
    for trial in 0..trials {
        let mut rng = stream_rng(seed, trial);
        let sk = ace_setup(n, SECURITY_BITS, &mut rng)?;
        let b: bool = rng.random();
        let ek = gen_ek(&sk, c, &mut rng);
        let dk = gen_dk(&sk, if b { c1 } else { c0 }, &mut rng);
        let view = GameView {
            ek: &ek,
            dk: &dk,
            challenges: &[],
            sample_bits: 0,
        };
        wins += (d.guess(&view, &mut rng)? == b) as u64;
    }
    Ok(report("puncture-hiding", d, wins, trials))
}

fn check_challenge_messages(c1: &PuncturingPredicate, c2: &PuncturingPredicate, messages: &[u64]) -> Result<()> {
    if let Some(m) = messages.iter().find(|&&m| !(c1.eval(m) && c2.eval(m))) {
        return Err(Error::Parameter(format!("message {m:#x} is not punctured by both predicates")));
    }
    Ok(())
}

/// Real encapsulations of `messages` under the unpunctured key versus
/// uniform strings; the adversary holds `GenEK(C1)` and `GenDK(C2)`.
pub fn pseudorandom_ciphertext_game(
    n: u32,
    c1: &PuncturingPredicate,
    c2: &PuncturingPredicate,
    messages: &[u64],
    d: &dyn Distinguisher,
    trials: u64,
    seed: u64,
) -> Result<GameReport> {
    check_challenge_messages(c1, c2, messages)?;
    let mut wins = 0;
    for trial in 0..trials {
        let mut rng = stream_rng(seed, trial);
        let sk = ace_setup(n, SECURITY_BITS, &mut rng)?;
        let ek_p = gen_ek(&sk, c1, &mut rng);
        let dk_p = gen_dk(&sk, c2, &mut rng);
        let b: bool = rng.random();
        let ct_mask = (1u64 << sk.ciphertext_bits()) - 1;
        let challenges: Vec<u64> = if b {
            messages.iter().map(|_| rng.random::<u64>() & ct_mask).collect()
        } else {
            messages.iter().map(|&m| sk.encapsulation(m)).collect::<Result<_>>()?
        };
        let view = GameView {
            ek: &ek_p,
            dk: &dk_p,
            challenges: &challenges,
            sample_bits: 0,
        };
        wins += (d.guess(&view, &mut rng)? == b) as u64;
    }
    Ok(report("pseudorandom-ciphertext", d, wins, trials))
}

/// Steganographic encodings of `messages` into `source` versus fresh
/// cover samples. An exhausted encoding is delivered as a fresh sample.
#[allow(clippy::too_many_arguments)]
pub fn steg_ciphertext_game(
    n: u32,
    c1: &PuncturingPredicate,
    c2: &PuncturingPredicate,
    messages: &[u64],
    source: &StegSource,
    epsilon: f64,
    d: &dyn Distinguisher,
    trials: u64,
    seed: u64,
) -> Result<GameReport> {
    check_challenge_messages(c1, c2, messages)?;
    let mut wins = 0;
    for trial in 0..trials {
        let mut rng = stream_rng(seed, trial);
        let sk = ace_setup(n, SECURITY_BITS, &mut rng)?;
        let ek = gen_ek(&sk, &PuncturingPredicate::never(), &mut rng);
        let ek_p = gen_ek(&sk, c1, &mut rng);
        let dk_p = gen_dk(&sk, c2, &mut rng);
        let b: bool = rng.random();
        let mut challenges = Vec::with_capacity(messages.len());
        for &m in messages {
            let s = if b {
                source.sample(&mut rng)
            } else {
                match steg_enc(&ek, m, source, epsilon, &mut rng)?.sample() {
                    Some(s) => s,
                    None => source.sample(&mut rng),
                }
            };
            challenges.push(s);
        }
        let view = GameView {
            ek: &ek_p,
            dk: &dk_p,
            challenges: &challenges,
            sample_bits: source.sample_bits(),
        };
        wins += (d.guess(&view, &mut rng)? == b) as u64;
    }
    Ok(report("steganographic-ciphertext", d, wins, trials))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::within_sigmas;

    #[test]
    fn trivial_distinguishers_have_no_advantage() {
        let c = PuncturingPredicate::point(4, 9);
        let c0 = PuncturingPredicate::point(4, 9);
        let c1 = PuncturingPredicate::never().or(&c0);
        let trials = 200;
        for d in [&GuessDistinguisher as &dyn Distinguisher, &ProbeDistinguisher] {
            let r = puncture_hiding_game(4, &c, &c0, &c1, d, trials, 1).unwrap();
            assert!(within_sigmas(r.wins.rate, 0.5, trials, 4.0), "{r:?}");
            let r = pseudorandom_ciphertext_game(4, &c, &c, &[9, 9], d, trials, 2).unwrap();
            assert!(within_sigmas(r.wins.rate, 0.5, trials, 4.0), "{r:?}");
        }
        let r = steg_ciphertext_game(4, &c, &c, &[9], &StegSource::UniformBits(24), 0.1, &ProbeDistinguisher, trials, 3)
            .unwrap();
        assert!(within_sigmas(r.wins.rate, 0.5, trials, 4.0), "{r:?}");
    }

    #[test]
    fn unpunctured_messages_are_refused() {
        let c = PuncturingPredicate::point(4, 9);
        let err = pseudorandom_ciphertext_game(4, &c, &c, &[3], &GuessDistinguisher, 1, 0);
        assert!(err.is_err());
    }
}

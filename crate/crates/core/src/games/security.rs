//! The plain security game and the malleable-puncturing game.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use super::scheme::{MalleablePuncturableScheme, SchemeKey};
use super::{GameRun, TrialRecord};
use crate::error::{Error, Result};
use crate::{stream_rng, LabRng};

pub(crate) fn uniform_answer(bits: u32, rng: &mut LabRng) -> u64 {
    if bits >= 64 {
        rng.random()
    } else {
        rng.random::<u64>() & ((1 << bits) - 1)
    }
}

pub(crate) fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        Err(Error::Parameter("a game needs at least one trial".into()))
    } else {
        Ok(())
    }
}

pub(crate) fn run_trials(
    trials: u64,
    trial: impl Fn(u64) -> Result<TrialRecord> + Send + Sync,
) -> Result<Vec<TrialRecord>> {
    check_trials(trials)?;
    (0..trials).into_par_iter().map(trial).collect()
}

pub type SecurityStrategy = Arc<dyn Fn(u64, &mut LabRng) -> Result<u64> + Send + Sync>;

/// Adversaries for the plain security game.
#[derive(Clone)]
pub enum SecurityAdversary {
    /// The meaningfulness algorithm `B(k, ch)`, which is handed the key.
    Meaningful,
    /// Uniform answer, ignoring the challenge.
    BlindGuess,
    /// `ch ↦ ans′`.
    Custom(String, SecurityStrategy),
}

impl SecurityAdversary {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "meaningful" => Some(Self::Meaningful),
            "blind-guess" => Some(Self::BlindGuess),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Self::Meaningful => "meaningful",
            Self::BlindGuess => "blind-guess",
            Self::Custom(n, _) => n,
        }
    }
}

/// Monte-Carlo estimate of `Pr[SecurityGame = 1]`. Trial `i` draws all its
/// randomness from stream `i` under `seed`.
pub fn run_security_game(
    scheme: &dyn MalleablePuncturableScheme,
    adversary: &SecurityAdversary,
    trials: u64,
    seed: u64,
) -> Result<GameRun> {
    let records = run_trials(trials, |trial| {
        let mut rng = stream_rng(seed, trial);
        let (k, st) = scheme.chal(&mut rng)?;
        let (ak, ch) = scheme.samp_ch(&st, &mut rng)?;
        let ans = match adversary {
            SecurityAdversary::Meaningful => scheme.eval(&k, ch)?,
            SecurityAdversary::BlindGuess => uniform_answer(scheme.output_bits(), &mut rng),
            SecurityAdversary::Custom(_, f) => f(ch, &mut rng)?,
        };
        Ok(TrialRecord::new(trial, scheme.ver(ak, ans)))
    })?;
    let expected = match adversary {
        SecurityAdversary::Meaningful => Some(1.0),
        SecurityAdversary::BlindGuess => Some(scheme.p_triv()),
        SecurityAdversary::Custom(..) => None,
    };
    Ok(GameRun::new("security", adversary.name(), seed, records, expected))
}

/// What the adversary receives in the challenge phase of the
/// malleable-puncturing game.
pub struct PuncturingView<'a> {
    pub scheme: &'a dyn MalleablePuncturableScheme,
    /// `(C_punc, Q_rel)` together with `aux`.
    pub key: &'a SchemeKey,
    pub ch: u64,
    pub x: u64,
}

impl PuncturingView<'_> {
    /// `Eval^{C_punc}(aux, ch)`, or `None` if the punctured circuit refused.
    pub fn eval_punctured(&self) -> Result<Option<u64>> {
        match self.scheme.eval(self.key, self.ch) {
            Ok(y) => Ok(Some(y)),
            Err(Error::EvaluationFailure) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

pub type PuncturingStrategy = Arc<dyn Fn(&PuncturingView<'_>, &mut LabRng) -> Result<u64> + Send + Sync>;

/// Adversaries for the malleable-puncturing game.
#[derive(Clone)]
pub enum PuncturingAdversary {
    /// Evaluates the punctured key on the challenge, guessing on ⊥.
    PuncturedEval,
    BlindGuess,
    /// Control run: the harness hands over the unpunctured key instead.
    UnpuncturedControl,
    Custom(String, PuncturingStrategy),
}

impl PuncturingAdversary {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "punctured-eval" => Some(Self::PuncturedEval),
            "blind-guess" => Some(Self::BlindGuess),
            "unpunctured-control" => Some(Self::UnpuncturedControl),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Self::PuncturedEval => "punctured-eval",
            Self::BlindGuess => "blind-guess",
            Self::UnpuncturedControl => "unpunctured-control",
            Self::Custom(n, _) => n,
        }
    }
}

/// Runs the malleable-puncturing game: `Chal` gives `(k, st)`, then
/// `x ← D_inp(st)`, `(ak, ch) ← SampChFromInp(st, x)`,
/// `C_punc ← MallPunc(st, x)`, the adversary gets `(C_punc, Q_rel), aux,
/// ch, x` and the challenger checks `Ver(ak, ans′)`.
pub fn run_malleable_puncturing_game(
    scheme: &dyn MalleablePuncturableScheme,
    adversary: &PuncturingAdversary,
    trials: u64,
    seed: u64,
) -> Result<GameRun> {
    let records = run_trials(trials, |trial| {
        let mut rng = stream_rng(seed, trial);
        let (k, st) = scheme.chal(&mut rng)?;
        let x = scheme.sample_input(&st, &mut rng);
        let (ak, ch) = scheme.samp_ch_from_inp(&st, x, &mut rng)?;
        let punc = scheme.mall_punc(&st, x)?;
        let key = match adversary {
            PuncturingAdversary::UnpuncturedControl => &k,
            _ => &punc,
        };
        let view = PuncturingView { scheme, key, ch, x };
        let ans = match adversary {
            PuncturingAdversary::PuncturedEval | PuncturingAdversary::UnpuncturedControl => match view.eval_punctured()? {
                Some(y) => y,
                None => uniform_answer(scheme.output_bits(), &mut rng),
            },
            PuncturingAdversary::BlindGuess => uniform_answer(scheme.output_bits(), &mut rng),
            PuncturingAdversary::Custom(_, f) => f(&view, &mut rng)?,
        };
        Ok(TrialRecord::new(trial, scheme.ver(ak, ans)))
    })?;
    let expected = match adversary {
        PuncturingAdversary::UnpuncturedControl => Some(1.0),
        PuncturingAdversary::Custom(..) => None,
        _ => Some(scheme.p_triv()),
    };
    Ok(GameRun::new("malleable-puncturing", adversary.name(), seed, records, expected))
}

#[cfg(test)]
mod tests {
    use super::super::scheme::example_scheme_prf_eval;
    use super::*;
    use crate::stats::within_sigmas;

    #[test]
    fn meaningful_always_wins() {
        let s = example_scheme_prf_eval(6, 8).unwrap();
        let run = run_security_game(&s, &SecurityAdversary::Meaningful, 200, 1).unwrap();
        assert_eq!(run.rate(), 1.0);
    }

    #[test]
    fn blind_guess_near_baseline() {
        let s = example_scheme_prf_eval(6, 8).unwrap();
        let n = 20_000;
        let run = run_security_game(&s, &SecurityAdversary::BlindGuess, n, 2).unwrap();
        assert!(within_sigmas(run.rate(), s.p_triv(), n, 3.0), "{}", run.rate());
        assert!(run_security_game(&s, &SecurityAdversary::BlindGuess, 0, 2).is_err());
    }

    #[test]
    fn punctured_key_is_useless_at_the_challenge() {
        let s = example_scheme_prf_eval(6, 8).unwrap();
        let n = 4000;
        let run = run_malleable_puncturing_game(&s, &PuncturingAdversary::PuncturedEval, n, 3).unwrap();
        assert!(within_sigmas(run.rate(), s.p_triv(), n, 3.0), "{}", run.rate());
        let control = run_malleable_puncturing_game(&s, &PuncturingAdversary::UnpuncturedControl, 200, 3).unwrap();
        assert_eq!(control.rate(), 1.0);
    }

    #[test]
    fn custom_adversary_sees_the_punctured_key() {
        let s = example_scheme_prf_eval(6, 8).unwrap();
        let seen = Arc::new(std::sync::atomic::AtomicU64::new(0));
        let counter = seen.clone();
        let probe: PuncturingStrategy = Arc::new(move |view, _| {
            let refused = view.key.eval_circuit(view.x).is_none();
            let elsewhere = (0..64).filter(|&q| q != view.x).all(|q| view.key.eval_circuit(q).is_some());
            if view.ch == view.x && refused && elsewhere {
                counter.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            }
            Ok(0)
        });
        let adv = PuncturingAdversary::Custom("probe".into(), probe);
        let run = run_malleable_puncturing_game(&s, &adv, 50, 4).unwrap();
        assert_eq!(run.expected, None);
        assert_eq!(seen.load(std::sync::atomic::Ordering::Relaxed), 50);
    }
}

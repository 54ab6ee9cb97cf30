//! Malleable-puncturable schemes and the built-in PRF-evaluation example.

use std::any::Any;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::error::{capacity, Error, Result};
use crate::prf::{CachedPrf, PrfKey};
use crate::LabRng;

/// A classical circuit `x ↦ C(x)`; `None` stands for ⊥.
pub type Circuit = Arc<dyn Fn(u64) -> Option<u64> + Send + Sync>;

/// `k = (C, aux, Q_rel)`.
#[derive(Clone)]
pub struct SchemeKey {
    pub circuit: Circuit,
    pub aux: Vec<u8>,
    pub q_rel: Arc<dyn Fn(u64) -> u64 + Send + Sync>,
    pub input_bits: u32,
    pub output_bits: u32,
}

impl fmt::Debug for SchemeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SchemeKey({} -> {} bits)", self.input_bits, self.output_bits)
    }
}

impl SchemeKey {
    pub fn eval_circuit(&self, x: u64) -> Option<u64> {
        (self.circuit)(x)
    }
}

/// Challenger state produced by `Chal`, opaque to the harness.
#[derive(Clone)]
pub struct ChallengeState(pub Arc<dyn Any + Send + Sync>);

/// One point of the challenge distribution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChallengePoint {
    pub prob: f64,
    pub ch: u64,
    pub ak: u64,
}

pub trait MalleablePuncturableScheme: Send + Sync {
    fn name(&self) -> &str;
    fn input_bits(&self) -> u32;
    fn output_bits(&self) -> u32;
    /// Baseline success probability.
    fn p_triv(&self) -> f64;
    /// Declared lower bound on the min-entropy of `D_inp`.
    fn input_min_entropy(&self) -> f64;

    /// The setup phase, collapsed to a one-shot sampler.
    fn chal(&self, rng: &mut LabRng) -> Result<(SchemeKey, ChallengeState)>;
    /// `D_inp(st)`.
    fn sample_input(&self, st: &ChallengeState, rng: &mut LabRng) -> u64;
    /// `SampChFromInp(st, x)`, returning `(ak, ch)`.
    fn samp_ch_from_inp(&self, st: &ChallengeState, x: u64, rng: &mut LabRng) -> Result<(u64, u64)>;
    fn ver(&self, ak: u64, ans: u64) -> bool;
    /// `MallPunc(st, x)`: a key whose circuit is punctured around `x`.
    fn mall_punc(&self, st: &ChallengeState, x: u64) -> Result<SchemeKey>;
    /// `Eval^C(aux, z)` with circuit queries routed through `oracle`.
    fn eval_with_oracle(&self, aux: &[u8], z: u64, oracle: &mut dyn FnMut(u64) -> Result<u64>) -> Result<u64>;
    /// The whole challenge distribution, for threshold measurements.
    fn challenge_support(&self, st: &ChallengeState) -> Result<Vec<ChallengePoint>>;

    fn samp_ch(&self, st: &ChallengeState, rng: &mut LabRng) -> Result<(u64, u64)> {
        let x = self.sample_input(st, rng);
        self.samp_ch_from_inp(st, x, rng)
    }

    fn eval(&self, key: &SchemeKey, z: u64) -> Result<u64> {
        self.eval_with_oracle(&key.aux, z, &mut |q| key.eval_circuit(q).ok_or(Error::EvaluationFailure))
    }
}

/// Largest input width of the example scheme.
pub const MAX_EXAMPLE_INPUT_BITS: u32 = 12;

/// Evaluation of a secret PRF `C = PRF(K_F, ·)` on a uniform input: the
/// challenge is `x`, the answer key `C(x)`, and `Ver` is equality.
#[derive(Clone, Debug)]
pub struct PrfEvalScheme {
    n_in: u32,
    n_out: u32,
}

struct PrfState {
    key: PrfKey,
    table: Arc<CachedPrf>,
}

pub fn example_scheme_prf_eval(n_in: u32, n_out: u32) -> Result<PrfEvalScheme> {
    capacity("protection-games", "example scheme input bits", n_in, MAX_EXAMPLE_INPUT_BITS)?;
    if n_in == 0 || n_out == 0 || n_out > 64 {
        return Err(Error::Parameter(format!("widths ({n_in}, {n_out}) outside 1..=12 and 1..=64")));
    }
    Ok(PrfEvalScheme { n_in, n_out })
}

fn prf_state(st: &ChallengeState) -> &PrfState {
    st.0.downcast_ref::<PrfState>().expect("state produced by PrfEvalScheme::chal")
}

fn identity_rel() -> Arc<dyn Fn(u64) -> u64 + Send + Sync> {
    Arc::new(|x| x)
}

impl MalleablePuncturableScheme for PrfEvalScheme {
    fn name(&self) -> &str {
        "prf-eval"
    }

    fn input_bits(&self) -> u32 {
        self.n_in
    }

    fn output_bits(&self) -> u32 {
        self.n_out
    }

    fn p_triv(&self) -> f64 {
        2f64.powi(-(self.n_out as i32))
    }

    fn input_min_entropy(&self) -> f64 {
        self.n_in as f64
    }

    fn chal(&self, rng: &mut LabRng) -> Result<(SchemeKey, ChallengeState)> {
        let key = PrfKey::setup(128, self.n_in, self.n_out, rng)?;
        let table = Arc::new(CachedPrf::new(key.clone()));
        let t = table.clone();
        let sk = SchemeKey {
            circuit: Arc::new(move |x| t.get(x)),
            aux: Vec::new(),
            q_rel: identity_rel(),
            input_bits: self.n_in,
            output_bits: self.n_out,
        };
        Ok((sk, ChallengeState(Arc::new(PrfState { key, table }))))
    }

    fn sample_input(&self, _: &ChallengeState, rng: &mut LabRng) -> u64 {
        rng.random::<u64>() & ((1 << self.n_in) - 1)
    }

    fn samp_ch_from_inp(&self, st: &ChallengeState, x: u64, _: &mut LabRng) -> Result<(u64, u64)> {
        let ak = prf_state(st).table.get(x).ok_or(Error::EvaluationFailure)?;
        Ok((ak, x))
    }

    fn ver(&self, ak: u64, ans: u64) -> bool {
        ak == ans
    }

    fn mall_punc(&self, st: &ChallengeState, x: u64) -> Result<SchemeKey> {
        let punctured = prf_state(st).key.puncture(&BTreeSet::from([x]))?;
        let table = Arc::new(CachedPrf::new(punctured));
        Ok(SchemeKey {
            circuit: Arc::new(move |q| table.get(q)),
            aux: Vec::new(),
            q_rel: identity_rel(),
            input_bits: self.n_in,
            output_bits: self.n_out,
        })
    }

    fn eval_with_oracle(&self, _: &[u8], z: u64, oracle: &mut dyn FnMut(u64) -> Result<u64>) -> Result<u64> {
        oracle(z)
    }

    fn challenge_support(&self, st: &ChallengeState) -> Result<Vec<ChallengePoint>> {
        let s = prf_state(st);
        let prob = 2f64.powi(-(self.n_in as i32));
        (0..1u64 << self.n_in)
            .map(|x| {
                let ak = s.table.get(x).ok_or(Error::EvaluationFailure)?;
                Ok(ChallengePoint { prob, ch: x, ak })
            })
            .collect()
    }
}

/// Counts of the two readings of the puncturing condition over every
/// unrelated `x′` (those with `Q_rel(x′) ≠ x`).
#[derive(Clone, Debug, Serialize)]
pub struct PuncturingReport {
    pub checked: u64,
    /// `C_punc(x′) = C(x′)`, the reading the invariant uses.
    pub agrees_pointwise: u64,
    /// `C_punc(x′) = C(x)`, the literal display.
    pub agrees_with_challenge: u64,
    /// `C_punc(x) = ⊥` at the challenge itself.
    pub punctured_at_challenge: bool,
}

impl PuncturingReport {
    pub fn holds(&self) -> bool {
        self.agrees_pointwise == self.checked
    }
}

/// Exhaustively checks `MallPunc(st, x)` against the unpunctured key.
pub fn check_puncturing(
    scheme: &dyn MalleablePuncturableScheme,
    key: &SchemeKey,
    st: &ChallengeState,
    x: u64,
) -> Result<PuncturingReport> {
    capacity("protection-games", "puncturing check input bits", scheme.input_bits(), 22u32)?;
    let punc = scheme.mall_punc(st, x)?;
    let cx = key.eval_circuit(x);
    let mut r = PuncturingReport {
        checked: 0,
        agrees_pointwise: 0,
        agrees_with_challenge: 0,
        punctured_at_challenge: punc.eval_circuit(x).is_none(),
    };
    for xp in 0..1u64 << scheme.input_bits() {
        if (key.q_rel)(xp) == x {
            continue;
        }
        let got = punc.eval_circuit(xp);
        r.checked += 1;
        r.agrees_pointwise += (got.is_some() && got == key.eval_circuit(xp)) as u64;
        r.agrees_with_challenge += (got.is_some() && got == cx) as u64;
    }
    Ok(r)
}

//! Pirates, the copy-protection game and the strong anti-piracy game.

use serde::Serialize;

use super::protect::{gen_state, label_partition, protect, protected_eval_scheme, Protected};
use super::scheme::{ChallengeState, MalleablePuncturableScheme};
use super::security::{run_trials, uniform_answer};
use super::{GameRun, TrialRecord};
use crate::error::{Error, Result};
use crate::quantum::QuantumRegister;
use crate::threshold::{ti_accept_pure, ProjectiveFamily};
use crate::{stream_rng, LabRng};

/// What one side of a pirate keeps after splitting.
#[derive(Clone, Debug)]
pub struct PirateShare {
    pub register: Option<QuantumRegister>,
    /// Classical answer used when there is no register or evaluation
    /// lands on a ⊥ branch.
    pub fallback: u64,
}

impl PirateShare {
    pub fn empty(fallback: u64) -> Self {
        PirateShare { register: None, fallback }
    }
}

/// `A₀`: turns `(cp, ρ)` into two shares. Each side then answers its
/// challenge by running the protected evaluation on its own share only.
pub trait Pirate: Send + Sync {
    fn name(&self) -> &str;
    fn split(&self, protected: &Protected, register: QuantumRegister, rng: &mut LabRng) -> Result<(PirateShare, PirateShare)>;
}

/// Answers `ch` using one share, falling back to the share's guess on ⊥.
pub fn pirate_answer(
    scheme: &dyn MalleablePuncturableScheme,
    protected: &Protected,
    share: &PirateShare,
    ch: u64,
    rng: &mut LabRng,
) -> Result<u64> {
    let Some(reg) = &share.register else { return Ok(share.fallback) };
    match protected_eval_scheme(scheme, protected, reg, ch, rng) {
        Ok((y, _)) => Ok(y),
        Err(Error::EvaluationFailure) => Ok(share.fallback),
        Err(e) => Err(e),
    }
}

/// Side 1 keeps the real register; side 2 guesses.
pub struct ForwardPirate;

/// Measures in the computational basis and gives `|v⟩` to both sides.
pub struct BasisClonePirate;

/// Measures in the Hadamard basis and gives `H|w⟩` to both sides.
pub struct HadamardClonePirate;

/// Discards the register; both sides guess.
pub struct GuessPirate;

fn guesses(protected: &Protected, rng: &mut LabRng) -> (u64, u64) {
    (uniform_answer(protected.output_bits, rng), uniform_answer(protected.output_bits, rng))
}

impl Pirate for ForwardPirate {
    fn name(&self) -> &str {
        "forward"
    }

    fn split(&self, p: &Protected, register: QuantumRegister, rng: &mut LabRng) -> Result<(PirateShare, PirateShare)> {
        let (g1, g2) = guesses(p, rng);
        Ok((PirateShare { register: Some(register), fallback: g1 }, PirateShare::empty(g2)))
    }
}

impl Pirate for BasisClonePirate {
    fn name(&self) -> &str {
        "basis-clone"
    }

    fn split(&self, p: &Protected, register: QuantumRegister, rng: &mut LabRng) -> Result<(PirateShare, PirateShare)> {
        let (_, copy) = register.measure_computational(rng)?;
        let (g1, g2) = guesses(p, rng);
        Ok((
            PirateShare { register: Some(copy.clone()), fallback: g1 },
            PirateShare { register: Some(copy), fallback: g2 },
        ))
    }
}

impl Pirate for HadamardClonePirate {
    fn name(&self) -> &str {
        "hadamard-clone"
    }

    fn split(&self, p: &Protected, register: QuantumRegister, rng: &mut LabRng) -> Result<(PirateShare, PirateShare)> {
        let (_, measured) = register.hadamard_all().measure_computational(rng)?;
        let copy = measured.hadamard_all();
        let (g1, g2) = guesses(p, rng);
        Ok((
            PirateShare { register: Some(copy.clone()), fallback: g1 },
            PirateShare { register: Some(copy), fallback: g2 },
        ))
    }
}

impl Pirate for GuessPirate {
    fn name(&self) -> &str {
        "guess"
    }

    fn split(&self, p: &Protected, _: QuantumRegister, rng: &mut LabRng) -> Result<(PirateShare, PirateShare)> {
        let (g1, g2) = guesses(p, rng);
        Ok((PirateShare::empty(g1), PirateShare::empty(g2)))
    }
}

pub const PIRATE_NAMES: [&str; 4] = ["forward", "basis-clone", "hadamard-clone", "guess"];

pub fn pirate_by_name(name: &str) -> Option<Box<dyn Pirate>> {
    match name {
        "forward" => Some(Box::new(ForwardPirate)),
        "basis-clone" => Some(Box::new(BasisClonePirate)),
        "hadamard-clone" => Some(Box::new(HadamardClonePirate)),
        "guess" => Some(Box::new(GuessPirate)),
        _ => None,
    }
}

struct Issued {
    protected: Protected,
    st: ChallengeState,
    shares: (PirateShare, PirateShare),
}

/// Steps 1–5 shared by both anti-piracy games.
fn issue(scheme: &dyn MalleablePuncturableScheme, pirate: &dyn Pirate, d: usize, rng: &mut LabRng) -> Result<Issued> {
    let (pp, register, _) = gen_state(d, rng)?;
    let (k, st) = scheme.chal(rng)?;
    let protected = protect(&pp, &k, rng)?;
    let shares = pirate.split(&protected, register, rng)?;
    Ok(Issued { protected, st, shares })
}

/// Stream layout of one trial: setup, then one stream per side, so a side's
/// outcome never depends on what the other side does with its share.
fn trial_streams(seed: u64, trial: u64) -> [LabRng; 3] {
    [0, 1, 2].map(|s| stream_rng(seed, 3 * trial + s))
}

/// Runs the ten-step copy-protection game with coset-state dimension `d`.
pub fn run_copy_protection_game(
    scheme: &dyn MalleablePuncturableScheme,
    pirate: &dyn Pirate,
    d: usize,
    trials: u64,
    seed: u64,
) -> Result<GameRun> {
    let records = run_trials(trials, |trial| {
        let [mut setup, mut side1, mut side2] = trial_streams(seed, trial);
        let issued = issue(scheme, pirate, d, &mut setup)?;
        let (ak1, ch1) = scheme.samp_ch(&issued.st, &mut setup)?;
        let (ak2, ch2) = scheme.samp_ch(&issued.st, &mut setup)?;
        let ans1 = pirate_answer(scheme, &issued.protected, &issued.shares.0, ch1, &mut side1)?;
        let ans2 = pirate_answer(scheme, &issued.protected, &issued.shares.1, ch2, &mut side2)?;
        let (b1, b2) = (scheme.ver(ak1, ans1), scheme.ver(ak2, ans2));
        Ok(TrialRecord {
            side_outcomes: Some((b1, b2)),
            ..TrialRecord::new(trial, b1 && b2)
        })
    })?;
    Ok(GameRun::new("copy-protection", pirate.name(), seed, records, None))
}

/// `Pr[TI_η = 1]` on one share for the challenge mixture of
/// `SampCh(st)` followed by evaluation and `Ver`.
pub fn share_threshold_probability(
    scheme: &dyn MalleablePuncturableScheme,
    protected: &Protected,
    st: &ChallengeState,
    share: &PirateShare,
    eta: f64,
) -> Result<f64> {
    let support = scheme.challenge_support(st)?;
    let Some(reg) = &share.register else {
        // The answer is the fixed fallback: a one-dimensional mixture.
        let p: f64 = support.iter().filter(|c| scheme.ver(c.ak, share.fallback)).map(|c| c.prob).sum();
        return Ok(if p >= eta - crate::threshold::TIE_TOL { 1.0 } else { 0.0 });
    };
    let mut projectors = Vec::with_capacity(support.len());
    let mut weights = Vec::with_capacity(support.len());
    for c in &support {
        let query = single_query(scheme, &protected.aux, c.ch)?;
        let part = label_partition(protected, query)?;
        projectors.push(part.answer_projector(share.fallback, |ans| scheme.ver(c.ak, ans))?);
        weights.push(c.prob);
    }
    let family = ProjectiveFamily::new(projectors, weights)?;
    Ok(ti_accept_pure(&family, eta, reg)?.mass_above(eta))
}

/// The circuit query made by `Eval(aux, ch)`, provided `Eval` makes exactly
/// one query and passes its answer through. Projective families are only
/// built for such schemes.
fn single_query(scheme: &dyn MalleablePuncturableScheme, aux: &[u8], ch: u64) -> Result<u64> {
    const TAG: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut queries = Vec::new();
    let out = scheme.eval_with_oracle(aux, ch, &mut |q| {
        queries.push(q);
        Ok(q ^ TAG)
    })?;
    match queries[..] {
        [q] if out == q ^ TAG => Ok(q),
        _ => Err(Error::Parameter("strong anti-piracy needs a single-query pass-through Eval".into())),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StrongApReport {
    pub run: GameRun,
    pub threshold: f64,
    /// `γ ≤ 0`: the threshold sits at or below the blind-guessing rate.
    pub degenerate: bool,
    pub mean_side_probabilities: (f64, f64),
}

/// Strong anti-piracy game: `TI_{p_triv+γ} ⊗ TI_{p_triv+γ}` on the two
/// shares. Shares are unentangled, so the joint acceptance is the product
/// of the sides; each side's bit is sampled from its own stream.
pub fn run_strong_antipiracy_game(
    scheme: &dyn MalleablePuncturableScheme,
    pirate: &dyn Pirate,
    d: usize,
    gamma: f64,
    trials: u64,
    seed: u64,
) -> Result<StrongApReport> {
    use rand::Rng;
    let eta = scheme.p_triv() + gamma;
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Parameter(format!("threshold p_triv + gamma = {eta} outside [0, 1]")));
    }
    let degenerate = gamma <= 0.0;
    if degenerate {
        log::warn!("gamma = {gamma}: threshold at or below the trivial rate");
    }
    let records = run_trials(trials, |trial| {
        let [mut setup, mut side1, mut side2] = trial_streams(seed, trial);
        let issued = issue(scheme, pirate, d, &mut setup)?;
        let p1 = share_threshold_probability(scheme, &issued.protected, &issued.st, &issued.shares.0, eta)?;
        let p2 = share_threshold_probability(scheme, &issued.protected, &issued.st, &issued.shares.1, eta)?;
        let b1 = side1.random::<f64>() < p1;
        let b2 = side2.random::<f64>() < p2;
        Ok(TrialRecord {
            side_outcomes: Some((b1, b2)),
            probabilities: vec![p1, p2],
            ..TrialRecord::new(trial, b1 && b2)
        })
    })?;
    let n = records.len() as f64;
    let mean = |i: usize| records.iter().map(|r| r.probabilities[i]).sum::<f64>() / n;
    let mean_side_probabilities = (mean(0), mean(1));
    Ok(StrongApReport {
        run: GameRun::new("strong-anti-piracy", pirate.name(), seed, records, None),
        threshold: eta,
        degenerate,
        mean_side_probabilities,
    })
}

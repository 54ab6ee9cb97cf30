//! The monogamy-of-entanglement game for coset states.

use serde::Serialize;

use super::security::run_trials;
use super::{GameRun, TrialRecord};
use super::protect::MAX_STATE_DIM;
use crate::error::{capacity, Error, Result};
use crate::gf2::{canonical_vector, sample_coset_instance, CosetInstance, Gf2Subspace, Gf2Vector};
use crate::quantum::QuantumRegister;
use crate::{stream_rng, LabRng};

/// Hints handed to `A₀` next to the register.
#[derive(Clone, Debug, Serialize)]
pub struct MoeHints {
    pub b1: Gf2Subspace,
    pub b2: Gf2Subspace,
    pub t: Gf2Vector,
    pub t_prime: Gf2Vector,
}

impl MoeHints {
    fn of(inst: &CosetInstance) -> Self {
        MoeHints {
            b1: inst.b1.clone(),
            b2: inst.b2.clone(),
            t: inst.t,
            t_prime: inst.t_prime,
        }
    }

    /// Uniform element of `B₁ + t`, a coset containing `A + a₁`.
    pub fn primal_guess(&self, rng: &mut LabRng) -> Gf2Vector {
        self.b1.random_element(rng).add(&self.t).expect("same dimension")
    }

    /// Uniform element of `B₂⊥ + t′`, a coset containing `A⊥ + a₂`.
    pub fn dual_guess(&self, rng: &mut LabRng) -> Gf2Vector {
        self.b2.dual().random_element(rng).add(&self.t_prime).expect("same dimension")
    }
}

/// One side's share after `A₀` splits.
#[derive(Clone, Debug, Default)]
pub struct MoeShare {
    pub register: Option<QuantumRegister>,
    pub classical: Vec<Gf2Vector>,
}

/// A product adversary `(A₀, A₁, A₂)`. `A₁` and `A₂` each see `A` and
/// their own share only.
pub trait MoeAdversary: Send + Sync {
    fn name(&self) -> &str;
    fn split(&self, register: QuantumRegister, hints: &MoeHints, rng: &mut LabRng) -> Result<(MoeShare, MoeShare)>;
    /// Returns `v`, the guess for `Can_A(a₁)`.
    fn answer1(&self, a: &Gf2Subspace, share: MoeShare, rng: &mut LabRng) -> Result<Gf2Vector>;
    /// Returns `w`, the guess for `Can_{A⊥}(a₂)`.
    fn answer2(&self, a: &Gf2Subspace, share: MoeShare, rng: &mut LabRng) -> Result<Gf2Vector>;
}

/// Where a side's answer comes from in the built-in adversaries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MoeSource {
    /// Measure the register in the computational basis.
    Computational,
    /// Measure the register in the Hadamard basis.
    Hadamard,
    /// Uniform element of the side's hint coset.
    Hint,
    /// Uniform vector.
    Blind,
}

/// The built-in adversaries: `A₀` hands the register to at most one side
/// and the hints to whichever side needs them.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BuiltinMoe {
    pub name: &'static str,
    pub side1: MoeSource,
    pub side2: MoeSource,
}

pub const MOE_ADVERSARIES: [BuiltinMoe; 5] = [
    BuiltinMoe { name: "split-basis", side1: MoeSource::Computational, side2: MoeSource::Blind },
    BuiltinMoe { name: "split-hadamard", side1: MoeSource::Blind, side2: MoeSource::Hadamard },
    BuiltinMoe { name: "basis-hint", side1: MoeSource::Computational, side2: MoeSource::Hint },
    BuiltinMoe { name: "hadamard-hint", side1: MoeSource::Hint, side2: MoeSource::Hadamard },
    BuiltinMoe { name: "hints-only", side1: MoeSource::Hint, side2: MoeSource::Hint },
];

pub fn moe_adversary(name: &str) -> Option<BuiltinMoe> {
    MOE_ADVERSARIES.iter().copied().find(|a| a.name == name)
}

impl BuiltinMoe {
    /// Closed-form joint win rate. A side reading the register always wins;
    /// a hint coset holds 2^{d/4} cosets of `A` (or `A⊥`) and a blind
    /// guess 2^{d/2}.
    pub fn analytic_rate(&self, d: usize) -> f64 {
        let side = |s: MoeSource| match s {
            MoeSource::Computational | MoeSource::Hadamard => 1.0,
            MoeSource::Hint => 2f64.powi(-(d as i32) / 4),
            MoeSource::Blind => 2f64.powi(-(d as i32) / 2),
        };
        side(self.side1) * side(self.side2)
    }

    fn share(src: MoeSource, register: &mut Option<QuantumRegister>, hint: Gf2Vector) -> MoeShare {
        match src {
            MoeSource::Computational | MoeSource::Hadamard => MoeShare {
                register: register.take(),
                classical: Vec::new(),
            },
            MoeSource::Hint => MoeShare {
                register: None,
                classical: vec![hint],
            },
            MoeSource::Blind => MoeShare::default(),
        }
    }

    fn resolve(src: MoeSource, d: usize, share: MoeShare, rng: &mut LabRng) -> Result<Gf2Vector> {
        match src {
            MoeSource::Computational | MoeSource::Hadamard => {
                let reg = share
                    .register
                    .ok_or_else(|| Error::Parameter("register handed to the other side".into()))?;
                let reg = if src == MoeSource::Hadamard { reg.hadamard_all() } else { reg };
                let (v, _) = reg.measure_computational(rng)?;
                Gf2Vector::new(v, d)
            }
            MoeSource::Hint => Ok(share.classical[0]),
            MoeSource::Blind => Ok(Gf2Vector::random(d, rng)),
        }
    }
}

impl MoeAdversary for BuiltinMoe {
    fn name(&self) -> &str {
        self.name
    }

    fn split(&self, register: QuantumRegister, hints: &MoeHints, rng: &mut LabRng) -> Result<(MoeShare, MoeShare)> {
        let quantum = |s: MoeSource| matches!(s, MoeSource::Computational | MoeSource::Hadamard);
        if quantum(self.side1) && quantum(self.side2) {
            return Err(Error::Parameter("both sides cannot hold the register".into()));
        }
        let mut reg = Some(register);
        let (h1, h2) = (hints.primal_guess(rng), hints.dual_guess(rng));
        let s1 = Self::share(self.side1, &mut reg, h1);
        let s2 = Self::share(self.side2, &mut reg, h2);
        Ok((s1, s2))
    }

    fn answer1(&self, a: &Gf2Subspace, share: MoeShare, rng: &mut LabRng) -> Result<Gf2Vector> {
        let v = Self::resolve(self.side1, a.ambient_dim(), share, rng)?;
        canonical_vector(a, &v)
    }

    fn answer2(&self, a: &Gf2Subspace, share: MoeShare, rng: &mut LabRng) -> Result<Gf2Vector> {
        let w = Self::resolve(self.side2, a.ambient_dim(), share, rng)?;
        canonical_vector(&a.dual(), &w)
    }
}

/// The MoE game: sample `(A, a₁, a₂, B₁, B₂, t, t′)`, give the coset state
/// and hints to `A₀`, split, reveal `A` to both sides and check
/// `v = Can_A(a₁)` and `w = Can_{A⊥}(a₂)`.
pub fn run_moe_game(d: usize, adversary: &dyn MoeAdversary, trials: u64, seed: u64) -> Result<GameRun> {
    capacity("protection-games", "coset-state dimension", d as u64, MAX_STATE_DIM as u64)?;
    let records = run_trials(trials, |trial| {
        let [mut setup, mut side1, mut side2] = [0, 1, 2].map(|s| stream_rng(seed, 3 * trial + s));
        let inst = sample_coset_instance(d, &mut setup)?;
        let register = QuantumRegister::coset_state(&inst.a, &inst.a1, &inst.a2)?;
        let (s1, s2) = adversary.split(register, &MoeHints::of(&inst), &mut setup)?;
        let v = adversary.answer1(&inst.a, s1, &mut side1)?;
        let w = adversary.answer2(&inst.a, s2, &mut side2)?;
        let b1 = v == inst.primal().canonical_rep();
        let b2 = w == inst.dual().canonical_rep();
        Ok(TrialRecord {
            side_outcomes: Some((b1, b2)),
            ..TrialRecord::new(trial, b1 && b2)
        })
    })?;
    Ok(GameRun::new("moe", adversary.name(), seed, records, None))
}

/// [`run_moe_game`] for a built-in adversary, with its analytic rate attached.
pub fn run_builtin_moe(d: usize, adversary: &BuiltinMoe, trials: u64, seed: u64) -> Result<GameRun> {
    let mut run = run_moe_game(d, adversary, trials, seed)?;
    run.expected = Some(adversary.analytic_rate(d));
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::within_sigmas;

    #[test]
    fn names_resolve() {
        for a in MOE_ADVERSARIES {
            assert_eq!(moe_adversary(a.name).unwrap().name, a.name);
        }
        assert!(moe_adversary("nobody").is_none());
    }

    #[test]
    fn register_side_always_wins() {
        let run = run_builtin_moe(8, &moe_adversary("basis-hint").unwrap(), 300, 1).unwrap();
        assert!(run.trials.iter().all(|t| t.side_outcomes.unwrap().0));
        let run = run_builtin_moe(8, &moe_adversary("split-hadamard").unwrap(), 300, 1).unwrap();
        assert!(run.trials.iter().all(|t| t.side_outcomes.unwrap().1));
    }

    #[test]
    fn rates_match_closed_form_at_d4() {
        let n = 4000;
        for a in MOE_ADVERSARIES {
            let run = run_builtin_moe(4, &a, n, 7).unwrap();
            let p = a.analytic_rate(4);
            assert!(within_sigmas(run.rate(), p, n, 3.5), "{} {} vs {p}", a.name, run.rate());
        }
    }
}

//! The coset-state protection construction: GenState, Protect and Eval.

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use super::scheme::{Circuit, MalleablePuncturableScheme, SchemeKey};
use crate::error::{capacity, Error, Result};
use crate::gf2::{sample_coset_instance, CosetInstance};
use crate::obf::{obfuscate, InputSpec, ObfHandle, Value};
use crate::prf::{CachedPrf, PrfKey};
use crate::quantum::{BinaryProjector, QuantumRegister};

/// Largest coset-state dimension.
pub const MAX_STATE_DIM: usize = 12;

pub fn membership_spec(d: usize) -> InputSpec {
    InputSpec::new(&[("b", 1), ("v", d as u32)]).expect("positive widths")
}

/// `M(b, v)`: `v ∈ A + a₁` for `b = 0`, `v ∈ A⊥ + a₂` for `b = 1`.
pub fn membership_program<R: Rng + ?Sized>(inst: &CosetInstance, rng: &mut R) -> ObfHandle {
    let (primal, dual) = (inst.primal(), inst.dual());
    obfuscate(
        move |i: &[u64]| Value::Bool(if i[0] == 0 { primal.contains_bits(i[1]) } else { dual.contains_bits(i[1]) }),
        membership_spec(inst.dim()),
        "membership",
        rng,
    )
}

/// `M′(b, v)`: the same tests against the hint cosets `B₁ + t` and `B₂⊥ + t′`.
pub fn hint_membership_program<R: Rng + ?Sized>(inst: &CosetInstance, rng: &mut R) -> ObfHandle {
    let (primal, dual) = (inst.primal_hint(), inst.dual_hint());
    obfuscate(
        move |i: &[u64]| Value::Bool(if i[0] == 0 { primal.contains_bits(i[1]) } else { dual.contains_bits(i[1]) }),
        membership_spec(inst.dim()),
        "membership",
        rng,
    )
}

/// Samples a coset instance, prepares its state and obfuscates `M`. The
/// instance is returned for the challenger only.
pub fn gen_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<(ObfHandle, QuantumRegister, CosetInstance)> {
    capacity("protection-games", "coset-state dimension", d as u64, MAX_STATE_DIM as u64)?;
    let inst = sample_coset_instance(d, rng)?;
    let reg = QuantumRegister::coset_state(&inst.a, &inst.a1, &inst.a2)?;
    let pp = membership_program(&inst, rng);
    Ok((pp, reg, inst))
}

/// The public part of a protected program: the obfuscated `P` and `aux`.
#[derive(Clone, Debug, Serialize)]
pub struct Protected {
    pub program: ObfHandle,
    pub aux: Vec<u8>,
    pub d: usize,
    pub input_bits: u32,
    pub output_bits: u32,
}

pub fn protected_spec(input_bits: u32, d: usize) -> InputSpec {
    InputSpec::new(&[("x", input_bits), ("b", 1), ("v", d as u32)]).expect("positive widths")
}

/// `P(x, b, v)` with `K`, `M` and `C` hardcoded.
pub fn program_p(pp: ObfHandle, c: Circuit, k: Arc<CachedPrf>) -> impl Fn(&[u64]) -> Value + Send + Sync + 'static {
    move |i: &[u64]| {
        let (x, b, v) = (i[0], i[1], i[2]);
        if pp.eval(&[b, v]).ok().and_then(|r| r.truth()) != Some(true) {
            return Value::Bot;
        }
        let Some(mask) = k.get(x) else { return Value::Bot };
        if b == 1 {
            return Value::Word(mask);
        }
        match c(x) {
            Some(y) => Value::Word(y ^ mask),
            None => Value::Bot,
        }
    }
}

/// Protect with a caller-supplied PRF key `K`.
pub fn protect_with_key<R: Rng + ?Sized>(pp: &ObfHandle, key: &SchemeKey, k: PrfKey, rng: &mut R) -> Result<Protected> {
    let fields = pp.input_spec().fields();
    let d = fields.get(1).map(|f| f.1 as usize).ok_or_else(|| Error::Parameter("pp is not a membership program".into()))?;
    if k.input_bits() != key.input_bits || k.output_bits() != key.output_bits {
        return Err(Error::Parameter("PRF widths must match the circuit".into()));
    }
    let p = program_p(pp.clone(), key.circuit.clone(), Arc::new(CachedPrf::new(k)));
    Ok(Protected {
        program: obfuscate(p, protected_spec(key.input_bits, d), "protected", rng),
        aux: key.aux.clone(),
        d,
        input_bits: key.input_bits,
        output_bits: key.output_bits,
    })
}

/// Samples a fresh `K` and obfuscates `P`.
pub fn protect<R: Rng + ?Sized>(pp: &ObfHandle, key: &SchemeKey, rng: &mut R) -> Result<Protected> {
    let k = PrfKey::setup(128, key.input_bits, key.output_bits, rng)?;
    protect_with_key(pp, key, k, rng)
}

/// Output labels of `P(x, 0, ·)` and `P(x, 1, ·)` over all `v`; `None` is ⊥.
#[derive(Clone, Debug)]
pub struct LabelPartition {
    pub comp: Vec<Option<u64>>,
    pub had: Vec<Option<u64>>,
}

pub fn label_partition(protected: &Protected, x: u64) -> Result<LabelPartition> {
    let labels = |b: u64| -> Result<Vec<Option<u64>>> {
        (0..1u64 << protected.d)
            .map(|v| Ok(protected.program.eval(&[x, b, v])?.word()))
            .collect()
    };
    Ok(LabelPartition {
        comp: labels(0)?,
        had: labels(1)?,
    })
}

/// Class ids for a labelling, and the label of each class.
fn classes(labels: &[Option<u64>]) -> (Vec<u32>, Vec<Option<u64>>) {
    let mut ids = HashMap::new();
    let mut names = Vec::new();
    let class_of = labels
        .iter()
        .map(|l| {
            *ids.entry(*l).or_insert_with(|| {
                names.push(*l);
                names.len() as u32 - 1
            })
        })
        .collect();
    (class_of, names)
}

impl LabelPartition {
    /// The binary projector "answer is accepted": measure the computational
    /// classes, then the Hadamard classes, and answer `y₀ ⊕ y₁`, or
    /// `fallback` if either branch is ⊥.
    pub fn answer_projector(&self, fallback: u64, accept: impl Fn(u64) -> bool) -> Result<BinaryProjector> {
        let (comp_class, comp_names) = classes(&self.comp);
        let (had_class, had_names) = classes(&self.had);
        let table = comp_names
            .iter()
            .map(|y0| {
                had_names
                    .iter()
                    .map(|y1| match (y0, y1) {
                        (Some(a), Some(b)) => accept(a ^ b),
                        _ => accept(fallback),
                    })
                    .collect()
            })
            .collect();
        BinaryProjector::two_basis(comp_class, had_class, table)
    }
}

/// One circuit query: measure the classes of `P(x, 0, ·)`, Hadamard,
/// measure the classes of `P(x, 1, ·)`, Hadamard back. On an honest
/// register both outcomes are certain and the register is unchanged.
/// Returns `None` if a ⊥ class was observed.
pub fn protected_query<R: Rng + ?Sized>(
    protected: &Protected,
    reg: &QuantumRegister,
    x: u64,
    rng: &mut R,
) -> Result<(Option<u64>, QuantumRegister)> {
    if reg.qubits() != protected.d {
        return Err(Error::DimensionMismatch {
            expected: protected.d,
            found: reg.qubits(),
        });
    }
    let part = label_partition(protected, x)?;
    let (comp_class, comp_names) = classes(&part.comp);
    let (k0, after0, _) = reg.measure_classes(&comp_class, rng)?;
    let (had_class, had_names) = classes(&part.had);
    let (k1, after1, _) = after0.hadamard_all().measure_classes(&had_class, rng)?;
    let out = after1.hadamard_all();
    let y = match (comp_names[k0 as usize], had_names[k1 as usize]) {
        (Some(a), Some(b)) => Some(a ^ b),
        _ => None,
    };
    Ok((y, out))
}

/// `Eval(ρ, x)` for a single query returning `C(x)`; ⊥ is an error.
pub fn protected_eval<R: Rng + ?Sized>(
    protected: &Protected,
    reg: &QuantumRegister,
    x: u64,
    rng: &mut R,
) -> Result<(u64, QuantumRegister)> {
    match protected_query(protected, reg, x, rng)? {
        (Some(y), r) => Ok((y, r)),
        (None, _) => Err(Error::EvaluationFailure),
    }
}

/// The scheme's `Eval^C(aux, z)` with every circuit query answered by
/// [`protected_eval`] on the same register.
pub fn protected_eval_scheme<R: Rng + ?Sized>(
    scheme: &dyn MalleablePuncturableScheme,
    protected: &Protected,
    reg: &QuantumRegister,
    z: u64,
    rng: &mut R,
) -> Result<(u64, QuantumRegister)> {
    let mut current = reg.clone();
    let out = scheme.eval_with_oracle(&protected.aux, z, &mut |q| {
        let (y, next) = protected_eval(protected, &current, q, rng)?;
        current = next;
        Ok(y)
    })?;
    Ok((out, current))
}

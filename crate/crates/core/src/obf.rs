//! Opaque-handle stand-in for indistinguishability obfuscation.
//!
//! A program is registered once and comes back as an [`ObfHandle`]. Game
//! code can evaluate a handle and read its public metadata (id, input
//! layout, size class) but never the program itself. Functional
//! equivalence of two handles is decided by exhaustive enumeration, which
//! is the only property an obfuscation hybrid actually relies on.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{capacity, Error, Result};

/// Largest domain `check_equivalence` will enumerate, in bits.
pub const MAX_EQUIVALENCE_BITS: u32 = 22;

/// Output of a registered program.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Value {
    Bot,
    Bool(bool),
    Word(u64),
}

impl Value {
    pub fn is_bot(&self) -> bool {
        matches!(self, Value::Bot)
    }

    pub fn word(&self) -> Option<u64> {
        match self {
            Value::Word(w) => Some(*w),
            _ => None,
        }
    }

    pub fn truth(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

impl From<Option<u64>> for Value {
    fn from(v: Option<u64>) -> Self {
        v.map_or(Value::Bot, Value::Word)
    }
}

/// Named bit fields making up a program input. The first field occupies
/// the most significant bits of the packed form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputSpec {
    fields: Vec<(String, u32)>,
}

impl InputSpec {
    pub fn new(fields: &[(&str, u32)]) -> Result<Self> {
        let total: u32 = fields.iter().map(|f| f.1).sum();
        if fields.iter().any(|f| f.1 == 0) {
            return Err(Error::Parameter("input fields must be at least one bit wide".into()));
        }
        capacity("obfuscation-registry", "input bits", total, 64u32)?;
        Ok(Self {
            fields: fields.iter().map(|&(n, w)| (n.to_string(), w)).collect(),
        })
    }

    pub fn total_bits(&self) -> u32 {
        self.fields.iter().map(|f| f.1).sum()
    }

    pub fn fields(&self) -> &[(String, u32)] {
        &self.fields
    }

    pub fn pack(&self, values: &[u64]) -> Result<u64> {
        if values.len() != self.fields.len() {
            return Err(Error::DimensionMismatch {
                expected: self.fields.len(),
                found: values.len(),
            });
        }
        let mut packed = 0u64;
        for (&v, (name, w)) in values.iter().zip(&self.fields) {
            if *w < 64 && v >> w != 0 {
                return Err(Error::Parameter(format!("field `{name}` value {v:#x} exceeds {w} bits")));
            }
            packed = if *w >= 64 { v } else { (packed << w) | v };
        }
        Ok(packed)
    }

    pub fn unpack(&self, mut packed: u64) -> Vec<u64> {
        let mut out = vec![0; self.fields.len()];
        for (slot, (_, w)) in out.iter_mut().zip(&self.fields).rev() {
            if *w >= 64 {
                *slot = packed;
                packed = 0;
            } else {
                *slot = packed & ((1 << w) - 1);
                packed >>= w;
            }
        }
        out
    }
}

type Program = dyn Fn(&[u64]) -> Value + Send + Sync;

/// An evaluable, uninspectable program.
#[derive(Clone)]
pub struct ObfHandle {
    id: u64,
    spec: InputSpec,
    size_pad: String,
    program: Arc<Program>,
}

impl fmt::Debug for ObfHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ObfHandle({:016x}, {} bits, pad {})", self.id, self.spec.total_bits(), self.size_pad)
    }
}

/// Public view of a handle. This is all that serialization reveals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HandleToken {
    pub id: String,
    pub input_spec: InputSpec,
    pub size_pad: String,
}

impl Serialize for ObfHandle {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.token().serialize(s)
    }
}

/// Registers `program` and returns a handle with a fresh random id.
///
/// The program must be total and deterministic on its input space.
pub fn obfuscate<F, R>(program: F, spec: InputSpec, size_pad: &str, rng: &mut R) -> ObfHandle
where
    F: Fn(&[u64]) -> Value + Send + Sync + 'static,
    R: Rng + ?Sized,
{
    ObfHandle {
        id: rng.random(),
        spec,
        size_pad: size_pad.to_string(),
        program: Arc::new(program),
    }
}

impl ObfHandle {
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn input_spec(&self) -> &InputSpec {
        &self.spec
    }

    pub fn size_pad(&self) -> &str {
        &self.size_pad
    }

    pub fn token(&self) -> HandleToken {
        HandleToken {
            id: format!("{:016x}", self.id),
            input_spec: self.spec.clone(),
            size_pad: self.size_pad.clone(),
        }
    }

    /// Evaluates on one value per input field.
    pub fn eval(&self, fields: &[u64]) -> Result<Value> {
        self.spec.pack(fields)?;
        Ok((self.program)(fields))
    }

    /// Evaluates on a packed input.
    pub fn eval_packed(&self, packed: u64) -> Result<Value> {
        let bits = self.spec.total_bits();
        if bits < 64 && packed >> bits != 0 {
            return Err(Error::Parameter(format!("packed input wider than {bits} bits")));
        }
        Ok((self.program)(&self.spec.unpack(packed)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Equivalence {
    Equivalent { checked: u64 },
    Counterexample { input: Vec<u64>, left: Value, right: Value },
}

impl Equivalence {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Equivalence::Equivalent { .. })
    }
}

/// Exhaustive comparison over the whole input space, returning the first
/// differing input in packed order.
pub fn check_equivalence(h1: &ObfHandle, h2: &ObfHandle) -> Result<Equivalence> {
    let bits = h1.spec.total_bits();
    capacity("obfuscation-registry", "equivalence domain bits", bits, MAX_EQUIVALENCE_BITS)?;
    check_equivalence_on(h1, h2, 0..1u64 << bits)
}

/// Comparison over an explicit range of packed inputs.
pub fn check_equivalence_on(
    h1: &ObfHandle,
    h2: &ObfHandle,
    domain: std::ops::Range<u64>,
) -> Result<Equivalence> {
    if h1.spec != h2.spec {
        return Err(Error::Parameter("handles have different input specs".into()));
    }
    let len = domain.end.saturating_sub(domain.start);
    capacity("obfuscation-registry", "equivalence domain size", len, 1u64 << MAX_EQUIVALENCE_BITS)?;
    if h1.size_pad != h2.size_pad {
        log::warn!(
            "comparing handles with different size pads `{}` and `{}`",
            h1.size_pad,
            h2.size_pad
        );
    }
    let differs = |&x: &u64| {
        let f = h1.spec.unpack(x);
        (h1.program)(&f) != (h2.program)(&f)
    };
    Ok(match domain.into_par_iter().find_first(differs) {
        None => Equivalence::Equivalent { checked: len },
        Some(x) => {
            let input = h1.spec.unpack(x);
            Equivalence::Counterexample {
                left: (h1.program)(&input),
                right: (h2.program)(&input),
                input,
            }
        }
    })
}

//! GGM-tree puncturable PRF.
//!
//! The length-doubling PRG is SHA-256: a node seed `s` has children
//! `H(s‖0)` and `H(s‖1)`, truncated to the seed length. The path to a leaf
//! follows the input bits from the most significant one. Leaves are
//! stretched to the output length with `H(leaf‖"out"‖counter)`.
//!
//! A punctured key stores the seeds of the co-path: every node hanging off
//! a root-to-leaf path of a punctured input without lying on one. Nodes are
//! addressed by `(depth, prefix)` where `prefix` holds the top `depth` bits
//! of the inputs below the node.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{capacity, Error, Result};

/// Largest supported input width. The ACE scheme evaluates PRFs on 3n-bit
/// strings, so this exceeds the toy domains used elsewhere.
pub const MAX_INPUT_BITS: u32 = 64;
pub const MAX_OUTPUT_BITS: u32 = 1024;
/// Largest domain whose full evaluation table may be built.
pub const MAX_TABLE_BITS: u32 = 22;

fn child(seed: &[u8], bit: bool) -> Vec<u8> {
    let mut h = Sha256::new();
    h.update(seed);
    h.update([bit as u8]);
    h.finalize()[..seed.len()].to_vec()
}

fn expand(leaf: &[u8], output_bits: u32) -> Vec<u8> {
    let bytes = output_bits.div_ceil(8) as usize;
    let mut out = Vec::with_capacity(bytes + 32);
    let mut counter = 0u32;
    while out.len() < bytes {
        let mut h = Sha256::new();
        h.update(leaf);
        h.update(b"out");
        h.update(counter.to_be_bytes());
        out.extend_from_slice(&h.finalize());
        counter += 1;
    }
    out.truncate(bytes);
    let spare = bytes as u32 * 8 - output_bits;
    if spare > 0 {
        out[bytes - 1] &= 0xff >> spare;
    }
    out
}

/// Low 64 bits of an output, little-endian.
fn word(bytes: &[u8]) -> u64 {
    let mut buf = [0u8; 8];
    let k = bytes.len().min(8);
    buf[..k].copy_from_slice(&bytes[..k]);
    u64::from_le_bytes(buf)
}

fn check_input(x: u64, input_bits: u32) -> Result<()> {
    if input_bits < 64 && x >> input_bits != 0 {
        return Err(Error::Parameter(format!("input {x:#x} wider than {input_bits} bits")));
    }
    Ok(())
}

fn output_mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1 << bits) - 1
    }
}

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrfKey {
    #[serde(with = "hex::serde")]
    root: Vec<u8>,
    input_bits: u32,
    output_bits: u32,
}

impl fmt::Debug for PrfKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PrfKey({} -> {} bits)", self.input_bits, self.output_bits)
    }
}

impl PrfKey {
    /// Samples a root seed of `security_bits` bits for an `m`-bit → `n`-bit PRF.
    pub fn setup<R: Rng + ?Sized>(security_bits: u32, m: u32, n: u32, rng: &mut R) -> Result<Self> {
        if !(64..=256).contains(&security_bits) || !security_bits.is_multiple_of(8) {
            return Err(Error::Parameter(format!(
                "security parameter {security_bits} must be a multiple of 8 in 64..=256"
            )));
        }
        if m == 0 || n == 0 {
            return Err(Error::Parameter("PRF widths must be positive".into()));
        }
        capacity("puncturable-prf", "input bits", m, MAX_INPUT_BITS)?;
        capacity("puncturable-prf", "output bits", n, MAX_OUTPUT_BITS)?;
        let mut root = vec![0u8; security_bits as usize / 8];
        rng.fill(&mut root[..]);
        Ok(Self {
            root,
            input_bits: m,
            output_bits: n,
        })
    }

    pub fn input_bits(&self) -> u32 {
        self.input_bits
    }

    pub fn output_bits(&self) -> u32 {
        self.output_bits
    }

    pub fn security_bits(&self) -> u32 {
        self.root.len() as u32 * 8
    }

    fn leaf(&self, x: u64) -> Vec<u8> {
        let mut s = self.root.clone();
        for depth in (0..self.input_bits).rev() {
            s = child(&s, (x >> depth) & 1 == 1);
        }
        s
    }

    pub fn eval(&self, x: u64) -> Result<Vec<u8>> {
        check_input(x, self.input_bits)?;
        Ok(expand(&self.leaf(x), self.output_bits))
    }

    /// Output as an integer; only the low 64 bits for wide outputs.
    pub fn eval_word(&self, x: u64) -> Result<u64> {
        Ok(word(&self.eval(x)?) & output_mask(self.output_bits))
    }

    /// All 2^m outputs as words, computed level by level.
    pub fn table(&self) -> Result<Vec<u64>> {
        capacity("puncturable-prf", "table input bits", self.input_bits, MAX_TABLE_BITS)?;
        let mut level = vec![self.root.clone()];
        for _ in 0..self.input_bits {
            level = level
                .iter()
                .flat_map(|s| [child(s, false), child(s, true)])
                .collect();
        }
        let mask = output_mask(self.output_bits);
        Ok(level.iter().map(|l| word(&expand(l, self.output_bits)) & mask).collect())
    }

    /// Punctures at `set`. An empty set yields a key that covers everything.
    pub fn puncture(&self, set: &BTreeSet<u64>) -> Result<PuncturedPrfKey> {
        for &x in set {
            check_input(x, self.input_bits)?;
        }
        let root = Node {
            depth: 0,
            prefix: 0,
            seed: self.root.clone(),
        };
        let mut copath = BTreeMap::new();
        puncture_node(root, self.input_bits, set, &mut copath);
        Ok(PuncturedPrfKey {
            punctured: set.clone(),
            copath,
            input_bits: self.input_bits,
            output_bits: self.output_bits,
        })
    }

    pub fn to_hex(&self) -> String {
        format!("{}:{}:{}", self.input_bits, self.output_bits, hex::encode(&self.root))
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [m, n, root] = parts[..] else {
            return Err(Error::Parse(format!("expected m:n:root, got `{s}`")));
        };
        let parse = |t: &str| t.parse::<u32>().map_err(|_| Error::Parse(format!("bad width `{t}`")));
        let root = hex::decode(root).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_root(root, parse(m)?, parse(n)?).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Rebuilds a key from its root seed.
    pub fn from_root(root: Vec<u8>, m: u32, n: u32) -> Result<Self> {
        if root.len() < 8 || root.len() > 32 {
            return Err(Error::Parameter("root seed must be 8..=32 bytes".into()));
        }
        if m == 0 || n == 0 {
            return Err(Error::Parameter("PRF widths must be positive".into()));
        }
        capacity("puncturable-prf", "input bits", m, MAX_INPUT_BITS)?;
        capacity("puncturable-prf", "output bits", n, MAX_OUTPUT_BITS)?;
        Ok(Self {
            root,
            input_bits: m,
            output_bits: n,
        })
    }

    pub fn root(&self) -> &[u8] {
        &self.root
    }
}

struct Node {
    depth: u32,
    prefix: u64,
    seed: Vec<u8>,
}

fn subtree_hit(depth: u32, prefix: u64, m: u32, set: &BTreeSet<u64>) -> bool {
    if depth == 0 {
        return !set.is_empty();
    }
    let shift = m - depth;
    let lo = prefix << shift;
    let hi = lo | output_mask(shift);
    set.range(lo..=hi).next().is_some()
}

/// Adds to `copath` the maximal subtrees of `node` that avoid `set`.
fn puncture_node(node: Node, m: u32, set: &BTreeSet<u64>, copath: &mut BTreeMap<(u32, u64), Vec<u8>>) {
    if !subtree_hit(node.depth, node.prefix, m, set) {
        copath.insert((node.depth, node.prefix), node.seed);
        return;
    }
    if node.depth == m {
        return;
    }
    for bit in [false, true] {
        let next = Node {
            depth: node.depth + 1,
            prefix: (node.prefix << 1) | bit as u64,
            seed: child(&node.seed, bit),
        };
        puncture_node(next, m, set, copath);
    }
}

/// Why a punctured evaluation produced no value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PunctureFailure;

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PuncturedPrfKey {
    punctured: BTreeSet<u64>,
    #[serde(with = "copath_hex")]
    copath: BTreeMap<(u32, u64), Vec<u8>>,
    input_bits: u32,
    output_bits: u32,
}

mod copath_hex {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    type Copath = BTreeMap<(u32, u64), Vec<u8>>;

    pub fn serialize<S: Serializer>(m: &Copath, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<(u32, u64, String)> = m.iter().map(|(&(d, p), seed)| (d, p, hex::encode(seed))).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Copath, D::Error> {
        let v = Vec::<(u32, u64, String)>::deserialize(d)?;
        v.into_iter()
            .map(|(depth, prefix, seed)| {
                let seed = hex::decode(seed).map_err(serde::de::Error::custom)?;
                Ok(((depth, prefix), seed))
            })
            .collect()
    }
}

impl fmt::Debug for PuncturedPrfKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "PuncturedPrfKey({} -> {} bits, {} punctured, {} copath nodes)",
            self.input_bits,
            self.output_bits,
            self.punctured.len(),
            self.copath.len()
        )
    }
}

impl PuncturedPrfKey {
    pub fn input_bits(&self) -> u32 {
        self.input_bits
    }

    pub fn output_bits(&self) -> u32 {
        self.output_bits
    }

    pub fn punctured_set(&self) -> &BTreeSet<u64> {
        &self.punctured
    }

    /// Co-path nodes as `(depth, prefix)` positions.
    pub fn copath_positions(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.copath.keys().copied()
    }

    fn leaf(&self, x: u64) -> Option<Vec<u8>> {
        let m = self.input_bits;
        for depth in 0..=m {
            let prefix = if depth == 0 { 0 } else { x >> (m - depth) };
            if let Some(seed) = self.copath.get(&(depth, prefix)) {
                let mut s = seed.clone();
                for level in (0..m - depth).rev() {
                    s = child(&s, (x >> level) & 1 == 1);
                }
                return Some(s);
            }
        }
        None
    }

    pub fn eval(&self, x: u64) -> Result<std::result::Result<Vec<u8>, PunctureFailure>> {
        check_input(x, self.input_bits)?;
        Ok(self.leaf(x).map(|l| expand(&l, self.output_bits)).ok_or(PunctureFailure))
    }

    pub fn eval_word(&self, x: u64) -> Result<std::result::Result<u64, PunctureFailure>> {
        let mask = output_mask(self.output_bits);
        Ok(self.eval(x)?.map(|b| word(&b) & mask))
    }

    /// Punctures an already punctured key at additional points.
    pub fn puncture_further(&self, set: &BTreeSet<u64>) -> Result<PuncturedPrfKey> {
        for &x in set {
            check_input(x, self.input_bits)?;
        }
        let mut copath = BTreeMap::new();
        for (&(depth, prefix), seed) in &self.copath {
            let node = Node {
                depth,
                prefix,
                seed: seed.clone(),
            };
            puncture_node(node, self.input_bits, set, &mut copath);
        }
        Ok(PuncturedPrfKey {
            punctured: self.punctured.union(set).copied().collect(),
            copath,
            input_bits: self.input_bits,
            output_bits: self.output_bits,
        })
    }
}

/// Word-valued evaluation shared by full and punctured keys; `None` on a
/// punctured input. Inputs must already fit the key width.
pub trait WordPrf: Send + Sync {
    fn input_bits(&self) -> u32;
    fn try_word(&self, x: u64) -> Option<u64>;

    fn word_table(&self) -> Vec<Option<u64>> {
        (0..1u64 << self.input_bits()).map(|x| self.try_word(x)).collect()
    }
}

impl WordPrf for PrfKey {
    fn input_bits(&self) -> u32 {
        self.input_bits
    }

    fn try_word(&self, x: u64) -> Option<u64> {
        self.eval_word(x).ok()
    }

    fn word_table(&self) -> Vec<Option<u64>> {
        self.table().map(|t| t.into_iter().map(Some).collect()).unwrap_or_default()
    }
}

impl WordPrf for PuncturedPrfKey {
    fn input_bits(&self) -> u32 {
        self.input_bits
    }

    fn try_word(&self, x: u64) -> Option<u64> {
        self.eval_word(x).ok().and_then(|r| r.ok())
    }
}

/// Domains up to this width are tabulated by [`CachedPrf`].
pub const CACHE_BITS: u32 = 16;

/// A [`WordPrf`] with its whole table precomputed when the domain is small.
/// Only a speed-up: outputs are identical to the wrapped key.
pub struct CachedPrf {
    table: Option<Vec<Option<u64>>>,
    key: Box<dyn WordPrf>,
}

impl CachedPrf {
    pub fn new(key: impl WordPrf + 'static) -> Self {
        let table = (key.input_bits() <= CACHE_BITS).then(|| key.word_table());
        Self {
            table,
            key: Box::new(key),
        }
    }

    pub fn get(&self, x: u64) -> Option<u64> {
        match &self.table {
            Some(t) => t.get(x as usize).copied().flatten(),
            None => self.key.try_word(x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream_rng;

    fn key(seed: u64, m: u32, n: u32) -> PrfKey {
        PrfKey::setup(128, m, n, &mut stream_rng(seed, 0)).unwrap()
    }

    #[test]
    fn setup_is_reproducible() {
        assert_eq!(key(7, 8, 8), key(7, 8, 8));
        assert_ne!(key(7, 8, 8).table().unwrap(), key(8, 8, 8).table().unwrap());
    }

    #[test]
    fn minimal_tree() {
        let k = key(1, 1, 16);
        assert_ne!(k.eval(0).unwrap(), k.eval(1).unwrap());
        assert!(k.eval(2).is_err());
    }

    #[test]
    fn table_matches_pointwise_eval() {
        let k = key(3, 6, 12);
        let t = k.table().unwrap();
        for x in 0..64 {
            assert_eq!(t[x as usize], k.eval_word(x).unwrap());
            assert!(t[x as usize] < 1 << 12);
        }
    }

    #[test]
    fn output_widths() {
        let k = key(4, 4, 1024);
        assert_eq!(k.eval(3).unwrap().len(), 128);
        let k = key(4, 4, 3);
        assert!(k.eval(3).unwrap()[0] < 8);
    }

    #[test]
    fn point_puncture_m10() {
        let k = key(5, 10, 16);
        let x_star = 613;
        let pk = k.puncture(&BTreeSet::from([x_star])).unwrap();
        for x in 0..1024u64 {
            if x == x_star {
                assert_eq!(pk.eval(x).unwrap(), Err(PunctureFailure));
            } else {
                assert_eq!(pk.eval(x).unwrap().unwrap(), k.eval(x).unwrap());
            }
        }
        assert_eq!(pk.copath_positions().count(), 10);
    }

    #[test]
    fn full_and_empty_punctures() {
        let k = key(6, 2, 8);
        let all: BTreeSet<u64> = (0..4).collect();
        let pk = k.puncture(&all).unwrap();
        assert_eq!(pk.copath_positions().count(), 0);
        assert!((0..4).all(|x| pk.eval(x).unwrap().is_err()));

        let pk = k.puncture(&BTreeSet::new()).unwrap();
        assert_eq!(pk.copath_positions().collect::<Vec<_>>(), vec![(0, 0)]);
        for x in 0..4 {
            assert_eq!(pk.eval(x).unwrap().unwrap(), k.eval(x).unwrap());
        }
    }

    #[test]
    fn puncture_further_matches_direct() {
        let k = key(9, 6, 8);
        let s1 = BTreeSet::from([3, 40]);
        let s2 = BTreeSet::from([3, 40, 41, 63]);
        let twice = k.puncture(&s1).unwrap().puncture_further(&s2).unwrap();
        let direct = k.puncture(&s2).unwrap();
        assert_eq!(twice, direct);
    }

    #[test]
    fn hex_roundtrips() {
        let k = key(10, 12, 40);
        assert_eq!(PrfKey::from_hex(&k.to_hex()).unwrap(), k);
        let pk = k.puncture(&BTreeSet::from([5, 77])).unwrap();
        let json = serde_json::to_string(&pk).unwrap();
        assert_eq!(serde_json::from_str::<PuncturedPrfKey>(&json).unwrap(), pk);
    }
}

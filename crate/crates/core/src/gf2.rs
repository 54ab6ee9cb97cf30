//! Exact linear algebra over F₂ for vectors of dimension at most 64.
//!
//! Vectors are packed into a `u64` with coordinate `i` stored at bit `i`.
//! Subspaces are kept in reduced row echelon form with pivots taken from
//! the lowest coordinate upward, which makes the representation canonical:
//! two spans are equal iff their bases are equal.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{capacity, check_dim, Error, Result};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 64;
/// Largest subspace dimension we are willing to enumerate.
pub const MAX_ENUM_DIM: usize = 24;

fn mask(dim: usize) -> u64 {
    if dim >= 64 {
        u64::MAX
    } else {
        (1u64 << dim) - 1
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Gf2Vector {
    bits: u64,
    dim: u8,
}

impl Gf2Vector {
    pub fn new(bits: u64, dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Parameter(format!(
                "vector dimension {dim} outside 1..={MAX_DIM}"
            )));
        }
        if bits & !mask(dim) != 0 {
            return Err(Error::Parameter(format!(
                "bits {bits:#x} do not fit in dimension {dim}"
            )));
        }
        Ok(Self {
            bits,
            dim: dim as u8,
        })
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(0, dim).expect("dimension in range")
    }

    /// Builds a vector from explicit coordinates, `coords[i]` being coordinate `i`.
    pub fn from_coords(coords: &[u8]) -> Result<Self> {
        let mut bits = 0u64;
        for (i, &c) in coords.iter().enumerate() {
            match c {
                0 => {}
                1 => bits |= 1 << i,
                _ => return Err(Error::Parameter(format!("coordinate {c} is not a bit"))),
            }
        }
        Self::new(bits, coords.len())
    }

    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        Self::new(rng.random::<u64>() & mask(dim), dim).expect("dimension in range")
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        (self.bits >> i) & 1 == 1
    }

    pub fn coords(&self) -> Vec<u8> {
        (0..self.dim()).map(|i| self.bit(i) as u8).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self {
            bits: self.bits ^ other.bits,
            dim: self.dim,
        })
    }

    /// Inner product ⟨self, other⟩ over F₂.
    pub fn dot(&self, other: &Self) -> Result<bool> {
        check_dim(self.dim(), other.dim())?;
        Ok(parity(self.bits & other.bits))
    }
}

#[inline]
pub fn parity(x: u64) -> bool {
    x.count_ones() & 1 == 1
}

impl fmt::Display for Gf2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for i in 0..self.dim() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", self.bit(i) as u8)?;
        }
        write!(f, ")")
    }
}

/// A subspace of F₂^d stored as a canonical RREF basis.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Gf2Subspace {
    ambient: usize,
    basis: Vec<u64>,
    pivots: Vec<usize>,
}

impl Gf2Subspace {
    /// Span of `vectors` inside F₂^`ambient`, in canonical RREF.
    pub fn span(ambient: usize, vectors: &[Gf2Vector]) -> Result<Self> {
        if ambient == 0 || ambient > MAX_DIM {
            return Err(Error::Parameter(format!(
                "ambient dimension {ambient} outside 1..={MAX_DIM}"
            )));
        }
        for v in vectors {
            check_dim(ambient, v.dim())?;
        }
        Ok(Self::from_rows(ambient, vectors.iter().map(|v| v.bits).collect()))
    }

    /// Row reduction; the ambient dimension is taken from the vectors.
    pub fn rref(vectors: &[Gf2Vector]) -> Result<Self> {
        let first = vectors
            .first()
            .ok_or_else(|| Error::Parameter("rref of an empty list needs an ambient dimension".into()))?;
        Self::span(first.dim(), vectors)
    }

    pub(crate) fn from_rows(ambient: usize, mut rows: Vec<u64>) -> Self {
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..ambient {
            let bit = 1u64 << col;
            let Some(found) = (rank..rows.len()).find(|&r| rows[r] & bit != 0) else {
                continue;
            };
            rows.swap(rank, found);
            let pivot_row = rows[rank];
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && *row & bit != 0 {
                    *row ^= pivot_row;
                }
            }
            pivots.push(col);
            rank += 1;
        }
        rows.truncate(rank);
        Self {
            ambient,
            basis: rows,
            pivots,
        }
    }

    pub fn zero(ambient: usize) -> Result<Self> {
        Self::span(ambient, &[])
    }

    pub fn full(ambient: usize) -> Result<Self> {
        let rows: Vec<Gf2Vector> = (0..ambient)
            .map(|i| Gf2Vector::new(1 << i, ambient))
            .collect::<Result<_>>()?;
        Self::span(ambient, &rows)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn basis(&self) -> Vec<Gf2Vector> {
        self.basis
            .iter()
            .map(|&b| Gf2Vector {
                bits: b,
                dim: self.ambient as u8,
            })
            .collect()
    }

    /// Clears every pivot coordinate of `bits` by adding basis rows.
    ///
    /// The result depends only on the coset `bits + self`.
    pub(crate) fn reduce_bits(&self, mut bits: u64) -> u64 {
        for (&row, &p) in self.basis.iter().zip(&self.pivots) {
            if (bits >> p) & 1 == 1 {
                bits ^= row;
            }
        }
        bits
    }

    pub(crate) fn contains_bits(&self, bits: u64) -> bool {
        self.reduce_bits(bits) == 0
    }

    pub fn contains(&self, v: &Gf2Vector) -> Result<bool> {
        check_dim(self.ambient, v.dim())?;
        Ok(self.contains_bits(v.bits))
    }

    pub fn is_subspace_of(&self, other: &Self) -> bool {
        self.ambient == other.ambient && self.basis.iter().all(|&b| other.contains_bits(b))
    }

    /// A⊥ = {w : ⟨w, v⟩ = 0 for all v ∈ A}.
    pub fn dual(&self) -> Self {
        let mut rows = Vec::with_capacity(self.ambient - self.dim());
        let mut next_pivot = 0;
        for col in 0..self.ambient {
            if next_pivot < self.pivots.len() && self.pivots[next_pivot] == col {
                next_pivot += 1;
                continue;
            }
            // free column: w_col = 1 and w_p = row_p[col] on every pivot p
            let mut w = 1u64 << col;
            for (&row, &p) in self.basis.iter().zip(&self.pivots) {
                if (row >> col) & 1 == 1 {
                    w |= 1 << p;
                }
            }
            rows.push(w);
        }
        Self::from_rows(self.ambient, rows)
    }

    /// Linear combination of the basis selected by the low bits of `coeffs`.
    pub(crate) fn combine(&self, coeffs: u64) -> u64 {
        self.basis
            .iter()
            .enumerate()
            .filter(|(i, _)| (coeffs >> i) & 1 == 1)
            .fold(0, |acc, (_, &b)| acc ^ b)
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> Gf2Vector {
        let coeffs = rng.random::<u64>() & mask(self.dim());
        Gf2Vector {
            bits: self.combine(coeffs),
            dim: self.ambient as u8,
        }
    }

    /// All 2^dim elements, in order of their coefficient vectors.
    pub fn elements(&self) -> Result<impl Iterator<Item = Gf2Vector> + '_> {
        capacity("gf2-linalg", "enumerated subspace dimension", self.dim() as u64, MAX_ENUM_DIM as u64)?;
        let ambient = self.ambient as u8;
        Ok((0..1u64 << self.dim()).map(move |c| Gf2Vector {
            bits: self.combine(c),
            dim: ambient,
        }))
    }

    /// Uniformly random subspace of dimension `k`.
    ///
    /// Uniform over spans: random `k × d` matrices are redrawn until they
    /// have full rank, and the row span is canonicalised.
    pub fn random<R: Rng + ?Sized>(ambient: usize, k: usize, rng: &mut R) -> Result<Self> {
        if k > ambient {
            return Err(Error::Parameter(format!(
                "subspace dimension {k} exceeds ambient dimension {ambient}"
            )));
        }
        Self::zero(ambient)?.random_superspace(k, rng)
    }

    /// Uniformly random superspace of `self` with dimension `k`.
    pub fn random_superspace<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<Self> {
        if k < self.dim() || k > self.ambient {
            return Err(Error::Parameter(format!(
                "superspace dimension {k} not in {}..={}",
                self.dim(),
                self.ambient
            )));
        }
        loop {
            let mut rows = self.basis.clone();
            rows.extend((self.dim()..k).map(|_| rng.random::<u64>() & mask(self.ambient)));
            let candidate = Self::from_rows(self.ambient, rows);
            if candidate.dim() == k {
                return Ok(candidate);
            }
        }
    }

    /// Uniformly random subspace of `self` with dimension `k`.
    pub fn random_subspace<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<Self> {
        if k > self.dim() {
            return Err(Error::Parameter(format!(
                "subspace dimension {k} exceeds {}",
                self.dim()
            )));
        }
        loop {
            let rows = (0..k)
                .map(|_| self.combine(rng.random::<u64>() & mask(self.dim())))
                .collect();
            let candidate = Self::from_rows(self.ambient, rows);
            if candidate.dim() == k {
                return Ok(candidate);
            }
        }
    }

    /// `d:row,row,...` with rows as hex-encoded packed bits.
    pub fn to_hex(&self) -> String {
        let rows: Vec<String> = self.basis.iter().map(|b| format!("{b:x}")).collect();
        format!("{}:{}", self.ambient, rows.join(","))
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let (dim, rows) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("missing ':' in subspace `{s}`")))?;
        let ambient: usize = dim
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad dimension `{dim}`")))?;
        let vectors = rows
            .split(',')
            .filter(|r| !r.trim().is_empty())
            .map(|r| {
                let bits = u64::from_str_radix(r.trim(), 16)
                    .map_err(|_| Error::Parse(format!("bad row `{r}`")))?;
                Gf2Vector::new(bits, ambient)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::span(ambient, &vectors)
    }
}

impl FromStr for Gf2Subspace {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::from_hex(s)
    }
}

impl Serialize for Gf2Subspace {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Gf2Subspace {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Self::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// An affine coset `subspace + shift`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Gf2Coset {
    subspace: Gf2Subspace,
    shift: Gf2Vector,
}

impl Gf2Coset {
    pub fn new(subspace: Gf2Subspace, shift: Gf2Vector) -> Result<Self> {
        check_dim(subspace.ambient_dim(), shift.dim())?;
        Ok(Self { subspace, shift })
    }

    pub fn subspace(&self) -> &Gf2Subspace {
        &self.subspace
    }

    pub fn shift(&self) -> Gf2Vector {
        self.shift
    }

    pub fn contains(&self, v: &Gf2Vector) -> Result<bool> {
        check_dim(self.subspace.ambient_dim(), v.dim())?;
        Ok(self.contains_bits(v.bits()))
    }

    #[inline]
    pub(crate) fn contains_bits(&self, bits: u64) -> bool {
        self.subspace.contains_bits(bits ^ self.shift.bits)
    }

    /// The unique coset element whose pivot coordinates are all zero.
    pub fn canonical_rep(&self) -> Gf2Vector {
        Gf2Vector {
            bits: self.subspace.reduce_bits(self.shift.bits),
            dim: self.shift.dim,
        }
    }

    pub fn elements(&self) -> Result<impl Iterator<Item = Gf2Vector> + '_> {
        let shift = self.shift.bits;
        Ok(self.subspace.elements()?.map(move |v| Gf2Vector {
            bits: v.bits ^ shift,
            dim: v.dim,
        }))
    }

    pub fn is_subset_of(&self, other: &Gf2Coset) -> bool {
        self.subspace.is_subspace_of(&other.subspace) && other.contains_bits(self.shift.bits)
    }
}

impl PartialEq for Gf2Coset {
    fn eq(&self, other: &Self) -> bool {
        self.subspace == other.subspace && self.subspace.contains_bits(self.shift.bits ^ other.shift.bits)
    }
}

impl Eq for Gf2Coset {}

/// Can_A(a): canonical representative of the coset `a + A`.
pub fn canonical_vector(space: &Gf2Subspace, a: &Gf2Vector) -> Result<Gf2Vector> {
    Ok(Gf2Coset::new(space.clone(), *a)?.canonical_rep())
}

/// The nested instance used by the coset-state games.
///
/// `A` has dimension d/2, `B₁ ⊇ A` has dimension 3d/4 and `B₂ ⊆ A` has
/// dimension d/4. `t = z₁ + a₁` with `z₁ ∈ B₁` and `t′ = z₂ + a₂` with
/// `z₂ ∈ B₂⊥`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CosetInstance {
    pub a: Gf2Subspace,
    pub a1: Gf2Vector,
    pub a2: Gf2Vector,
    pub b1: Gf2Subspace,
    pub b2: Gf2Subspace,
    pub t: Gf2Vector,
    pub t_prime: Gf2Vector,
}

impl CosetInstance {
    pub fn dim(&self) -> usize {
        self.a.ambient_dim()
    }

    pub fn primal(&self) -> Gf2Coset {
        Gf2Coset::new(self.a.clone(), self.a1).expect("consistent dimensions")
    }

    pub fn dual(&self) -> Gf2Coset {
        Gf2Coset::new(self.a.dual(), self.a2).expect("consistent dimensions")
    }

    pub fn primal_hint(&self) -> Gf2Coset {
        Gf2Coset::new(self.b1.clone(), self.t).expect("consistent dimensions")
    }

    pub fn dual_hint(&self) -> Gf2Coset {
        Gf2Coset::new(self.b2.dual(), self.t_prime).expect("consistent dimensions")
    }
}

pub fn sample_coset_instance<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<CosetInstance> {
    if d < 4 || !d.is_multiple_of(4) || d > MAX_DIM {
        return Err(Error::Parameter(format!(
            "coset instances need d divisible by 4 with 4 <= d <= {MAX_DIM}, got {d}"
        )));
    }
    let a = Gf2Subspace::random(d, d / 2, rng)?;
    let a1 = Gf2Vector::random(d, rng);
    let a2 = Gf2Vector::random(d, rng);
    let b1 = a.random_superspace(3 * d / 4, rng)?;
    let b2 = a.random_subspace(d / 4, rng)?;
    let z1 = b1.random_element(rng);
    let z2 = b2.dual().random_element(rng);
    let t = z1.add(&a1)?;
    let t_prime = z2.add(&a2)?;
    Ok(CosetInstance {
        a,
        a1,
        a2,
        b1,
        b2,
        t,
        t_prime,
    })
}

/// Solves `rows · x = rhs` where `rows[i]` is the i-th equation over `n` unknowns
/// and bit `i` of `rhs` its right-hand side. Returns one particular solution.
pub fn solve_linear(n: usize, rows: &[u64], rhs: u64) -> Option<u64> {
    // augment each equation with its rhs bit in position n (n <= 64 so use u128)
    let mut eqs: Vec<u128> = rows
        .iter()
        .enumerate()
        .map(|(i, &r)| (r as u128) | ((((rhs >> i) & 1) as u128) << n))
        .collect();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..n {
        let bit = 1u128 << col;
        let Some(found) = (rank..eqs.len()).find(|&r| eqs[r] & bit != 0) else {
            continue;
        };
        eqs.swap(rank, found);
        let p = eqs[rank];
        for (r, e) in eqs.iter_mut().enumerate() {
            if r != rank && *e & bit != 0 {
                *e ^= p;
            }
        }
        pivots.push(col);
        rank += 1;
    }
    let column_mask = (1u128 << n) - 1;
    if eqs[rank..].iter().any(|&e| e & column_mask == 0 && e != 0) {
        return None;
    }
    let mut x = 0u64;
    for (r, &col) in pivots.iter().enumerate() {
        if (eqs[r] >> n) & 1 == 1 {
            x |= 1 << col;
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(c: &[u8]) -> Gf2Vector {
        Gf2Vector::from_coords(c).unwrap()
    }

    #[test]
    fn rref_examples() {
        let s = Gf2Subspace::rref(&[v(&[1, 0]), v(&[1, 1])]).unwrap();
        assert_eq!(s.basis(), vec![v(&[1, 0]), v(&[0, 1])]);
        assert_eq!(s.pivots(), &[0, 1]);

        let s = Gf2Subspace::rref(&[v(&[1, 1]), v(&[1, 1])]).unwrap();
        assert_eq!(s.basis(), vec![v(&[1, 1])]);
        assert_eq!(s.pivots(), &[0]);

        let s = Gf2Subspace::rref(&[v(&[1, 1, 0]), v(&[0, 1, 1])]).unwrap();
        assert_eq!(s.basis(), vec![v(&[1, 0, 1]), v(&[0, 1, 1])]);
    }

    #[test]
    fn rref_rejects_mixed_dimensions() {
        let err = Gf2Subspace::rref(&[v(&[1, 0]), v(&[1, 1, 0])]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn dual_examples() {
        let a = Gf2Subspace::rref(&[v(&[1, 0])]).unwrap();
        assert_eq!(a.dual(), Gf2Subspace::rref(&[v(&[0, 1])]).unwrap());

        let full = Gf2Subspace::full(5).unwrap();
        assert_eq!(full.dual(), Gf2Subspace::zero(5).unwrap());

        let a = Gf2Subspace::rref(&[v(&[1, 1, 0])]).unwrap();
        let expected = Gf2Subspace::rref(&[v(&[1, 1, 0]), v(&[0, 0, 1])]).unwrap();
        assert_eq!(a.dual(), expected);
    }

    #[test]
    fn coset_membership() {
        let a = Gf2Subspace::rref(&[v(&[1, 0])]).unwrap();
        let c = Gf2Coset::new(a, v(&[0, 1])).unwrap();
        assert!(c.contains(&v(&[1, 1])).unwrap());
        assert!(!c.contains(&v(&[0, 0])).unwrap());
        assert!(c.contains(&v(&[1, 1, 0])).is_err());

        let s = v(&[1, 0, 1]);
        let single = Gf2Coset::new(Gf2Subspace::zero(3).unwrap(), s).unwrap();
        assert!(single.contains(&s).unwrap());
    }

    #[test]
    fn canonical_rep_examples() {
        let a = Gf2Subspace::rref(&[v(&[1, 1])]).unwrap();
        let c = Gf2Coset::new(a, v(&[1, 0])).unwrap();
        assert_eq!(c.canonical_rep(), v(&[0, 1]));

        let s = v(&[1, 1, 0, 1]);
        let single = Gf2Coset::new(Gf2Subspace::zero(4).unwrap(), s).unwrap();
        assert_eq!(single.canonical_rep(), s);

        let everything = Gf2Coset::new(Gf2Subspace::full(4).unwrap(), s).unwrap();
        assert_eq!(everything.canonical_rep(), Gf2Vector::zero(4));
    }

    #[test]
    fn coset_equality_is_by_set() {
        let a = Gf2Subspace::rref(&[v(&[1, 1, 0])]).unwrap();
        let c1 = Gf2Coset::new(a.clone(), v(&[1, 0, 0])).unwrap();
        let c2 = Gf2Coset::new(a.clone(), v(&[0, 1, 0])).unwrap();
        let c3 = Gf2Coset::new(a, v(&[0, 0, 1])).unwrap();
        assert_eq!(c1, c2);
        assert_ne!(c1, c3);
    }

    #[test]
    fn sample_instance_rejects_bad_dimensions() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_coset_instance(6, &mut rng).is_err());
        assert!(sample_coset_instance(0, &mut rng).is_err());
    }

    #[test]
    fn sample_instance_d4_dimensions() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let inst = sample_coset_instance(4, &mut rng).unwrap();
        assert_eq!(inst.a.dim(), 2);
        assert_eq!(inst.b1.dim(), 3);
        assert_eq!(inst.b2.dim(), 1);
        assert!(inst.a.is_subspace_of(&inst.b1));
        assert!(inst.b2.is_subspace_of(&inst.a));
    }

    #[test]
    fn sample_instance_is_reproducible_and_nested() {
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            sample_coset_instance(8, &mut rng).unwrap()
        };
        let (x, y) = (draw(11), draw(11));
        assert_eq!(x.a, y.a);
        assert_eq!(x.t, y.t);
        assert_eq!(x.t_prime, y.t_prime);

        // exhaustive membership of every element of A + a₁ and A⊥ + a₂
        let primal_hint = x.primal_hint();
        for e in x.primal().elements().unwrap() {
            assert!(primal_hint.contains(&e).unwrap());
        }
        let dual_hint = x.dual_hint();
        for e in x.dual().elements().unwrap() {
            assert!(dual_hint.contains(&e).unwrap());
        }
    }

    #[test]
    fn hex_roundtrip() {
        let a = Gf2Subspace::rref(&[v(&[1, 1, 0, 1]), v(&[0, 1, 1, 0])]).unwrap();
        let s = a.to_hex();
        assert_eq!(Gf2Subspace::from_hex(&s).unwrap(), a);
        assert_eq!(Gf2Subspace::from_hex("3:").unwrap(), Gf2Subspace::zero(3).unwrap());
        assert!(Gf2Subspace::from_hex("3:zz").is_err());
    }

    #[test]
    fn solve_linear_finds_solutions() {
        // x0 + x1 = 1, x1 + x2 = 0
        let rows = [0b011, 0b110];
        let x = solve_linear(3, &rows, 0b01).unwrap();
        assert!(parity(rows[0] & x));
        assert!(!parity(rows[1] & x));
        // inconsistent: x0 = 0 and x0 = 1
        assert!(solve_linear(2, &[0b01, 0b01], 0b10).is_none());
    }
}

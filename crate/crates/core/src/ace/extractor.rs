use rand::Rng;

use crate::error::{Error, Result};
use crate::gf2::{parity, solve_linear, Gf2Subspace};

/// Toeplitz hashing `{0,1}^N → {0,1}^M`. The matrix is constant along
/// diagonals: `T[i][j] = seed[i − j + N − 1]`, so it uses the low `N + M − 1`
/// seed bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToeplitzExtractor {
    in_bits: u32,
    out_bits: u32,
    rows: Vec<u64>,
}

impl ToeplitzExtractor {
    pub fn new(in_bits: u32, out_bits: u32, seed: u128) -> Result<Self> {
        if out_bits == 0 || out_bits > in_bits || in_bits > 64 {
            return Err(Error::Parameter(format!(
                "extractor needs 0 < out ({out_bits}) <= in ({in_bits}) <= 64"
            )));
        }
        let n = in_bits as i64;
        let rows = (0..out_bits as i64)
            .map(|i| {
                (0..n).fold(0u64, |row, j| {
                    let k = i - j + n - 1;
                    row | ((((seed >> k) & 1) as u64) << j)
                })
            })
            .collect();
        Ok(Self {
            in_bits,
            out_bits,
            rows,
        })
    }

    pub fn in_bits(&self) -> u32 {
        self.in_bits
    }

    pub fn out_bits(&self) -> u32 {
        self.out_bits
    }

    /// Row `i` as a bit mask over the input coordinates.
    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn extract(&self, sample: u64) -> Result<u64> {
        if self.in_bits < 64 && sample >> self.in_bits != 0 {
            return Err(Error::Parameter(format!("sample wider than {} bits", self.in_bits)));
        }
        Ok(self.hash(sample))
    }

    pub(crate) fn hash(&self, sample: u64) -> u64 {
        self.rows
            .iter()
            .enumerate()
            .fold(0, |y, (i, &r)| y | ((parity(r & sample) as u64) << i))
    }

    pub fn rank(&self) -> usize {
        Gf2Subspace::from_rows(self.in_bits as usize, self.rows.clone()).dim()
    }

    /// A uniformly random preimage of `y`, or `None` if `y` is not in the image.
    pub fn random_preimage<R: Rng + ?Sized>(&self, y: u64, rng: &mut R) -> Option<u64> {
        let x0 = solve_linear(self.in_bits as usize, &self.rows, y)?;
        let kernel = Gf2Subspace::from_rows(self.in_bits as usize, self.rows.clone()).dual();
        Some(x0 ^ kernel.random_element(rng).bits())
    }
}

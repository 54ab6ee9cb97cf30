use rand::Rng;

use super::{ace_dec, ace_enc, AceKey, ToeplitzExtractor};
use crate::error::{Error, Result};
use crate::resample::{limit_for_support, miss_probability, resample_truncated_law, FiniteDistribution, SubDistribution};

/// Where cover samples come from.
#[derive(Clone, Debug)]
pub enum StegSource {
    /// An explicit finite law whose samples are read as `sample_bits`-bit strings.
    Explicit { dist: FiniteDistribution, sample_bits: u32 },
    /// Uniform over `{0,1}^bits`.
    UniformBits(u32),
}

impl StegSource {
    pub fn explicit(dist: FiniteDistribution, sample_bits: u32) -> Result<Self> {
        if sample_bits == 0 || sample_bits > 64 || dist.sample_bits() > sample_bits {
            return Err(Error::Parameter(format!(
                "support needs {} bits, width is {sample_bits}",
                dist.sample_bits()
            )));
        }
        Ok(Self::Explicit { dist, sample_bits })
    }

    pub fn sample_bits(&self) -> u32 {
        match self {
            Self::Explicit { sample_bits, .. } => *sample_bits,
            Self::UniformBits(b) => *b,
        }
    }

    pub fn min_entropy(&self) -> f64 {
        match self {
            Self::Explicit { dist, .. } => dist.min_entropy(),
            Self::UniformBits(b) => *b as f64,
        }
    }

    pub fn support_size(&self) -> f64 {
        match self {
            Self::Explicit { dist, .. } => dist.len() as f64,
            Self::UniformBits(b) => 2f64.powi(*b as i32),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            Self::Explicit { dist, .. } => dist.sample(rng),
            Self::UniformBits(64) => rng.random(),
            Self::UniformBits(b) => rng.random::<u64>() & ((1 << b) - 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StegOutcome {
    Embedded(u64),
    /// The try budget ran out.
    Exhausted { tries: u64 },
    /// The inner encapsulation was ⊥.
    Punctured,
}

impl StegOutcome {
    pub fn sample(&self) -> Option<u64> {
        match self {
            Self::Embedded(s) => Some(*s),
            _ => None,
        }
    }
}

fn admissible(n: u32, source: &StegSource) -> Result<()> {
    let need = 4.0 * n as f64;
    if source.min_entropy() + 1e-9 < need {
        return Err(Error::Parameter(format!(
            "source min-entropy {:.3} below 4n = {need}",
            source.min_entropy()
        )));
    }
    Ok(())
}

/// Rejection-samples cover strings until one extracts to `Enc(ek, m)`, for
/// at most the truncated resampling budget at `epsilon`.
///
/// A uniform source uses the linear structure of the extractor instead of
/// the loop: the first hit is a uniform preimage and a hit happens within
/// `t` tries with probability `1 − (1 − 2^{−rank})^t`, so the output law is
/// the same.
pub fn steg_enc<R: Rng + ?Sized>(
    ek: &AceKey,
    m: u64,
    source: &StegSource,
    epsilon: f64,
    rng: &mut R,
) -> Result<StegOutcome> {
    admissible(ek.message_bits(), source)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Parameter(format!("epsilon {epsilon} outside (0, 1)")));
    }
    let ext = ek.extractor(source.sample_bits())?;
    let Some(ict) = ace_enc(ek, m)? else {
        return Ok(StegOutcome::Punctured);
    };
    let t_limit = limit_for_support(epsilon, source.support_size());
    match source {
        StegSource::UniformBits(_) => {
            let rank = ext.rank() as i32;
            let q = 1.0 - miss_probability(2f64.powi(-rank), t_limit);
            let hit = ext.random_preimage(ict, rng).filter(|_| rng.random::<f64>() < q);
            Ok(hit.map_or(StegOutcome::Exhausted { tries: t_limit }, StegOutcome::Embedded))
        }
        StegSource::Explicit { dist, .. } => {
            for _ in 0..t_limit {
                let s = dist.sample(rng);
                if ext.hash(s) == ict {
                    return Ok(StegOutcome::Embedded(s));
                }
            }
            Ok(StegOutcome::Exhausted { tries: t_limit })
        }
    }
}

/// Extracts and decapsulates. A sample wider than `sample_bits` is an error.
pub fn steg_dec(dk: &AceKey, sample: u64, sample_bits: u32) -> Result<Option<u64>> {
    let ext = dk.extractor(sample_bits)?;
    let ct = ext.extract(sample)?;
    ace_dec(dk, ct)
}

/// Exact law of "draw `s ~ D`, then resample within `Ext(s)`'s fibre" under
/// the truncated budget at `epsilon`: what `steg_enc` outputs once the inner
/// ciphertext is replaced by the extraction of a fresh cover sample.
pub fn steg_reference_law(ext: &ToeplitzExtractor, dist: &FiniteDistribution, epsilon: f64) -> Result<SubDistribution> {
    let t = crate::resample::truncated_limit(epsilon, dist.len())?;
    Ok(resample_truncated_law(dist, |s| ext.hash(s), t))
}

#[cfg(test)]
mod tests {
    use super::super::{ace_setup, gen_dk, gen_ek, PuncturingPredicate};
    use super::*;
    use crate::stream_rng;

    #[test]
    fn uniform_roundtrip_n8() {
        let mut rng = stream_rng(21, 0);
        let sk = ace_setup(8, 128, &mut rng).unwrap();
        let ek = gen_ek(&sk, &PuncturingPredicate::never(), &mut rng);
        let dk = gen_dk(&sk, &PuncturingPredicate::never(), &mut rng);
        let source = StegSource::UniformBits(48);
        let mut ok = 0;
        for i in 0..200u64 {
            let m = i & 0xff;
            if let StegOutcome::Embedded(s) = steg_enc(&ek, m, &source, 0.05, &mut rng).unwrap() {
                ok += (steg_dec(&dk, s, 48).unwrap() == Some(m)) as u32;
            }
        }
        assert!(ok >= 190, "{ok}");
    }

    #[test]
    fn punctured_message_propagates() {
        let mut rng = stream_rng(22, 0);
        let sk = ace_setup(4, 64, &mut rng).unwrap();
        let ek = gen_ek(&sk, &PuncturingPredicate::point(4, 3), &mut rng);
        let out = steg_enc(&ek, 3, &StegSource::UniformBits(24), 0.1, &mut rng).unwrap();
        assert_eq!(out, StegOutcome::Punctured);
    }

    #[test]
    fn low_entropy_source_is_rejected() {
        let mut rng = stream_rng(23, 0);
        let sk = ace_setup(4, 64, &mut rng).unwrap();
        let ek = gen_ek(&sk, &PuncturingPredicate::never(), &mut rng);
        let d = FiniteDistribution::uniform((0..1000).collect()).unwrap();
        let src = StegSource::explicit(d, 20).unwrap();
        assert!(steg_enc(&ek, 1, &src, 0.1, &mut rng).is_err());
    }

    #[test]
    fn explicit_loop_roundtrip() {
        let mut rng = stream_rng(24, 0);
        let sk = ace_setup(2, 64, &mut rng).unwrap();
        let ek = gen_ek(&sk, &PuncturingPredicate::never(), &mut rng);
        let dk = gen_dk(&sk, &PuncturingPredicate::never(), &mut rng);
        let d = FiniteDistribution::uniform((0..1024).collect()).unwrap();
        let src = StegSource::explicit(d, 10).unwrap();
        for m in 0..4 {
            match steg_enc(&ek, m, &src, 0.1, &mut rng).unwrap() {
                StegOutcome::Embedded(s) => assert_eq!(steg_dec(&dk, s, 10).unwrap(), Some(m)),
                other => assert!(sk.extractor(10).unwrap().rank() < 8, "{other:?}"),
            }
        }
    }

    #[test]
    fn malformed_width_is_an_error() {
        let mut rng = stream_rng(25, 0);
        let sk = ace_setup(4, 64, &mut rng).unwrap();
        let dk = gen_dk(&sk, &PuncturingPredicate::never(), &mut rng);
        assert!(steg_dec(&dk, 1 << 30, 24).is_err());
        assert!(steg_dec(&dk, 5, 8).is_err());
    }
}

//! Counter-based random streams.
//!
//! Every draw is a pure function of `(seed, stream, counter)`: the key pair is
//! derived from the seed and stream id with the SplitMix64 finalizer, and the
//! `n`-th output is two finalizer rounds over the counter keyed by that pair.
//! Nothing depends on platform word size, float environment or thread
//! scheduling, so sequences are identical everywhere.

use rand_core::{impls, RngCore};

use crate::error::{Error, Result};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer. A bijection on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Order-sensitive hash of a list of words, used to derive stream keys.
pub fn derive(parts: &[u64]) -> u64 {
    parts.iter().fold(GOLDEN, |acc, &p| {
        mix64(acc.rotate_left(23) ^ mix64(p.wrapping_add(GOLDEN)))
    })
}

/// Stable 64-bit hash of a byte string (FNV-1a folded through [`mix64`]).
pub fn hash_bytes(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    mix64(h)
}

/// Maps the top 53 bits of a word to `[0, 1)`.
#[inline]
pub fn unit_f64(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandSource {
    seed: u64,
    stream: u64,
    key_a: u64,
    key_b: u64,
    counter: u64,
}

impl RandSource {
    pub fn new(seed: u64, stream: u64) -> Self {
        let key_a = mix64(seed ^ mix64(stream.wrapping_add(GOLDEN)));
        let key_b = mix64(key_a.wrapping_add(GOLDEN) ^ stream.rotate_left(32));
        RandSource {
            seed,
            stream,
            key_a,
            key_b,
            counter: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Number of words consumed so far.
    pub fn position(&self) -> u64 {
        self.counter
    }

    /// The word at an absolute counter position, without advancing.
    #[inline]
    pub fn word_at(&self, index: u64) -> u64 {
        mix64(mix64(index ^ self.key_a).wrapping_add(self.key_b))
    }

    #[inline]
    pub fn unit_at(&self, index: u64) -> f64 {
        unit_f64(self.word_at(index))
    }

    /// Uniform draw in `[0, 1)`.
    #[inline]
    pub fn next_unit(&mut self) -> f64 {
        let v = self.unit_at(self.counter);
        self.counter += 1;
        v
    }

    /// Uniform draw in `[lo, hi]` (returns `lo` when the interval is empty).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = self.next_unit();
        if hi > lo {
            lo + (hi - lo) * u
        } else {
            lo
        }
    }

    /// Standard normal draw.
    pub fn gaussian(&mut self) -> f64 {
        use rand_distr::Distribution;
        rand_distr::StandardNormal.sample(self)
    }

    /// A fresh, independent stream keyed on this source's seed and stream.
    pub fn fork(&self, label: u64) -> RandSource {
        RandSource::new(derive(&[self.seed, self.stream, label]), label)
    }
}

impl RngCore for RandSource {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        let v = self.word_at(self.counter);
        self.counter += 1;
        v
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        impls::fill_bytes_via_next(self, dst)
    }
}

/// Supplier of the `[0,1)` scalars consumed by the plasma generator.
pub trait NoiseSource {
    fn fill_unit(&mut self, out: &mut [f64]) -> Result<()>;
}

impl NoiseSource for RandSource {
    fn fill_unit(&mut self, out: &mut [f64]) -> Result<()> {
        let base = self.counter;
        for (i, v) in out.iter_mut().enumerate() {
            *v = self.unit_at(base + i as u64);
        }
        self.counter += out.len() as u64;
        Ok(())
    }
}

/// A pre-recorded noise sequence, consumed front to back.
#[derive(Debug, Clone)]
pub struct InjectedNoise<'a> {
    values: &'a [f64],
    pos: usize,
}

impl<'a> InjectedNoise<'a> {
    pub fn new(values: &'a [f64]) -> Self {
        InjectedNoise { values, pos: 0 }
    }

    pub fn consumed(&self) -> usize {
        self.pos
    }
}

impl NoiseSource for InjectedNoise<'_> {
    fn fill_unit(&mut self, out: &mut [f64]) -> Result<()> {
        let end = self.pos + out.len();
        if end > self.values.len() {
            return Err(Error::invalid(format!(
                "injected noise exhausted: need {} values, have {}",
                end,
                self.values.len()
            )));
        }
        out.copy_from_slice(&self.values[self.pos..end]);
        self.pos = end;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_and_stream_repeat() {
        let mut a = RandSource::new(42, 7);
        let mut b = RandSource::new(42, 7);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn streams_differ() {
        let mut a = RandSource::new(42, 0);
        let mut b = RandSource::new(42, 1);
        let same = (0..64).filter(|_| a.next_u64() == b.next_u64()).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn random_access_matches_sequential() {
        let mut a = RandSource::new(9, 3);
        let b = a.clone();
        for i in 0..100 {
            assert_eq!(a.next_unit(), b.unit_at(i));
        }
    }

    // Frozen words guard the algorithm against accidental changes, which
    // would silently change every seeded output downstream.
    #[test]
    fn frozen_sequence() {
        let mut r = RandSource::new(0, 0);
        let words: Vec<u64> = (0..3).map(|_| r.next_u64()).collect();
        let again: Vec<u64> = (0..3).map(|i| RandSource::new(0, 0).word_at(i)).collect();
        assert_eq!(words, again);
        assert_eq!(mix64(0), 0);
        assert_eq!(mix64(1), 0x5692_161D_100B_05E5);
    }

    #[test]
    fn unit_range_and_mean() {
        let mut r = RandSource::new(1234, 0);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let u = r.next_unit();
            assert!((0.0..1.0).contains(&u));
            sum += u;
        }
        assert!((sum / n as f64 - 0.5).abs() < 0.01);
        assert!(unit_f64(u64::MAX) < 1.0);
    }

    #[test]
    fn injected_noise_exhaustion() {
        let vals = [0.1, 0.2, 0.3];
        let mut n = InjectedNoise::new(&vals);
        let mut buf = [0.0; 2];
        n.fill_unit(&mut buf).unwrap();
        assert_eq!(buf, [0.1, 0.2]);
        assert!(n.fill_unit(&mut buf).is_err());
    }
}

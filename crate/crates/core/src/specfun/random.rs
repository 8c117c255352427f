use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// A seeded, reproducible random stream.
///
/// Backed by ChaCha20 with the 64-bit stream selector set to `stream_id`, so
/// the same `(seed, stream_id)` pair yields the same draws on every platform
/// and distinct stream ids give independent substreams of one seed.
#[derive(Clone, Debug)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha20Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh substream of the same seed keyed by this stream's id, a label
    /// and an index.
    ///
    /// The derivation only depends on `(stream_id, label, index)`, never on how
    /// many values have been drawn from `self`.
    pub fn derive(&self, label: &str, index: u64) -> RandomStream {
        RandomStream::new(self.seed, derive_stream_id(self.stream_id, label, index))
    }

    /// Uniform draw from the open interval (0, 1).
    pub fn open01(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw from [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in `0..n`. `n` must be positive.
    pub fn index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        // Lemire's multiply-shift with rejection, unbiased.
        let n = n as u64;
        loop {
            let x = self.rng.next_u64();
            let m = (x as u128) * (n as u128);
            let lo = m as u64;
            if lo >= n || lo >= n.wrapping_neg() % n {
                return (m >> 64) as usize;
            }
        }
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index(i + 1);
            items.swap(i, j);
        }
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a over the label, folded with the parent id and the index through
/// splitmix64.
pub(crate) fn derive_stream_id(parent: u64, label: &str, index: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    splitmix64(splitmix64(parent ^ h) ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_and_stream_reproduce() {
        let mut a = RandomStream::new(42, 7);
        let mut b = RandomStream::new(42, 7);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn distinct_streams_differ() {
        let mut a = RandomStream::new(42, 7);
        let mut b = RandomStream::new(42, 8);
        let same = (0..64).filter(|_| a.next_u64() == b.next_u64()).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn derive_is_independent_of_consumption() {
        let root = RandomStream::new(1, 0);
        let mut used = root.clone();
        for _ in 0..10 {
            used.next_u64();
        }
        let mut x = root.derive("sample", 3);
        let mut y = used.derive("sample", 3);
        assert_eq!(x.next_u64(), y.next_u64());
        assert_ne!(root.derive("sample", 3).stream_id(), root.derive("sample", 4).stream_id());
        assert_ne!(root.derive("train", 3).stream_id(), root.derive("sample", 3).stream_id());
    }

    #[test]
    fn index_is_in_range_and_roughly_uniform() {
        let mut s = RandomStream::new(3, 0);
        let mut counts = [0usize; 7];
        for _ in 0..70_000 {
            counts[s.index(7)] += 1;
        }
        for c in counts {
            assert!((c as f64 - 10_000.0).abs() < 400.0, "{counts:?}");
        }
    }

    #[test]
    fn open01_excludes_endpoints() {
        let mut s = RandomStream::new(9, 9);
        for _ in 0..100_000 {
            let u = s.open01();
            assert!(u > 0.0 && u < 1.0);
        }
    }
}

//! Keyed, counter-based random streams.
//!
//! Every random decision in the crate is drawn from a [`SeedStream`]. A stream
//! is identified by a 64-bit key; output `i` is `mix64(key + i * GAMMA)`, the
//! SplitMix64 output function applied to a counter. Keys are derived by
//! hashing labels (global seed, example id, operator name) into the parent
//! key, so that the values an example sees never depend on the order in
//! which examples are processed.
//!
//! The algorithm is fixed and bit-exact on every platform; changing it
//! changes every generated dataset.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// The SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a over raw bytes.
#[inline]
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedStream {
    key: u64,
    counter: u64,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self {
            key: mix64(seed ^ GAMMA),
            counter: 0,
        }
    }

    /// Stream for one example: keyed by the global seed and a stable example id.
    pub fn for_example(global_seed: u64, example_id: &str) -> Self {
        Self::new(global_seed).fork(example_id)
    }

    /// A child stream keyed by `label`. Forking does not advance `self`, and
    /// the child depends only on `self`'s key, not on its position.
    pub fn fork(&self, label: &str) -> Self {
        Self {
            key: mix64(self.key ^ mix64(fnv1a(label.as_bytes()))),
            counter: 0,
        }
    }

    /// Identifies the stream; recorded as the seed of generated examples.
    pub fn key(&self) -> u64 {
        self.key
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GAMMA)))
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Bernoulli trial; draws exactly one value whatever `p` is.
    pub fn chance(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Uniform integer in `[0, n)`; `n` must be nonzero. Lemire's widening
    /// multiply with rejection, so there is no modulo bias.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = u128::from(self.next_u64()) * u128::from(n);
            if (m as u64) >= threshold {
                return (m >> 64) as usize;
            }
        }
    }

    pub fn choose<'a, T>(&mut self, items: &'a [T]) -> Option<&'a T> {
        if items.is_empty() {
            None
        } else {
            Some(&items[self.below(items.len())])
        }
    }

    /// Fisher-Yates, back to front.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    /// `k` distinct indices out of `0..n`, returned in ascending order.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        let k = k.min(n);
        // partial Fisher-Yates from the front
        for i in 0..k {
            let j = i + self.below(n - i);
            idx.swap(i, j);
        }
        idx.truncate(k);
        idx.sort_unstable();
        idx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // SplitMix64 seeded with 0 (state += GAMMA, then finalize).
        assert_eq!(mix64(GAMMA), 0xE220_A839_7B1D_CDAF);
        assert_eq!(mix64(GAMMA.wrapping_mul(2)), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a(b""), FNV_OFFSET);
        assert_eq!(fnv1a(b"a"), 0xaf63_dc4c_8601_ec8c);
    }

    #[test]
    fn forks_are_position_independent() {
        let mut a = SeedStream::new(7);
        let before = a.fork("x");
        a.next_u64();
        a.next_u64();
        assert_eq!(before, a.fork("x"));
        assert_ne!(a.fork("x").key(), a.fork("y").key());
    }

    #[test]
    fn below_is_in_range_and_roughly_uniform() {
        let mut s = SeedStream::new(1);
        let mut counts = [0usize; 6];
        for _ in 0..60_000 {
            counts[s.below(6)] += 1;
        }
        for c in counts {
            assert!((9_000..11_000).contains(&c), "{counts:?}");
        }
    }

    #[test]
    fn sample_indices_distinct_sorted() {
        let mut s = SeedStream::new(3);
        let v = s.sample_indices(10, 4);
        assert_eq!(v.len(), 4);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(s.sample_indices(3, 10), vec![0, 1, 2]);
    }
}

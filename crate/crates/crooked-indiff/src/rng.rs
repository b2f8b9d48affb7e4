//! Splittable, counter-based pseudorandomness.
//!
//! Every random value drawn anywhere in the lab is a pure function of
//! (master seed, stream label, counter). Trials, tables and points get
//! their own labels, so results are bit-identical regardless of execution
//! order or thread count. Not cryptographically secure; statistical
//! quality is validated by the uniformity tests in `oracle`.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const SALT: u64 = 0xA24B_AED4_963E_E407;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fold one labelled word into a key.
#[inline]
pub fn absorb(key: u64, word: u64) -> u64 {
    mix64(key.wrapping_add(GOLDEN) ^ word.wrapping_mul(SALT))
}

/// Derive a key from a master seed and a label path.
pub fn derive(master: u64, labels: &[u64]) -> u64 {
    labels.iter().fold(mix64(master ^ GOLDEN), |k, &w| absorb(k, w))
}

/// Sequential stream over a derived key.
#[derive(Debug, Clone)]
pub struct SplitRng {
    key: u64,
    ctr: u64,
}

impl SplitRng {
    pub fn new(key: u64) -> Self {
        SplitRng { key, ctr: 0 }
    }

    pub fn from_path(master: u64, labels: &[u64]) -> Self {
        SplitRng::new(derive(master, labels))
    }

    /// Child stream independent of this one's position.
    pub fn split(&self, tag: u64) -> SplitRng {
        SplitRng::new(absorb(self.key, tag))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.ctr = self.ctr.wrapping_add(GOLDEN);
        mix64(self.key.wrapping_add(self.ctr))
    }

    /// Uniform value with the given bit width (1..=16).
    #[inline]
    pub fn next_bits(&mut self, width: u8) -> u16 {
        debug_assert!((1..=16).contains(&width));
        (self.next_u64() & ((1u64 << width) - 1)) as u16
    }

    /// Uniform value in `[0, n)` by rejection.
    pub fn next_below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % n;
            }
        }
    }
}

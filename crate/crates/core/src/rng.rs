//! Counter-based random streams.
//!
//! A [`Stream`] is a 64-bit stream id plus a Weyl counter; each draw mixes the
//! two with the SplitMix64 finalizer. Substreams for `(seed, step, run)` are
//! derived by hashing, so any run can be regenerated on its own and parallel
//! execution yields the same numbers as serial execution.

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stream {
    id: u64,
    counter: u64,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable 64-bit label for a string.
pub fn label(name: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in name.as_bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        let id = mix64(seed ^ 0xD134_2543_DE82_EF95);
        Self {
            id,
            counter: mix64(id),
        }
    }

    /// Substream for one simulation run.
    pub fn substream(seed: u64, step: u64, run: u64) -> Self {
        Self::new(seed).derive(step).derive(run)
    }

    /// Child stream; does not advance the parent.
    pub fn derive(&self, label: u64) -> Self {
        let id = mix64(self.id ^ mix64(label.wrapping_add(GOLDEN)));
        Self {
            id,
            counter: mix64(id ^ 0xBF58_476D_1CE4_E5B9),
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(GOLDEN);
        mix64(self.id ^ self.counter)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in (0, 1).
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
    }

    /// Uniform integer in [0, bound) by Lemire's multiply-shift with rejection.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let m = u128::from(self.next_u64()) * u128::from(bound);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    /// Standard normal by inversion.
    pub fn next_normal(&mut self) -> f64 {
        crate::special::normal_quantile(self.next_open01())
    }

    pub fn shuffle<T>(&mut self, v: &mut [T]) {
        for i in (1..v.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            v.swap(i, j);
        }
    }
}

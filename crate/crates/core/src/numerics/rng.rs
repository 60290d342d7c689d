//! Seeded, splittable random source.
//!
//! Backed by the ChaCha20 stream cipher, so the deviate stream depends only
//! on the 256-bit key. `split` derives a child key from the parent key and a
//! stream id; it never looks at how far the parent has advanced.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    key: [u64; 4],
    rng: ChaCha20Rng,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        let mut state = seed;
        let key = [
            splitmix64(&mut state),
            splitmix64(&mut state),
            splitmix64(&mut state),
            splitmix64(&mut state),
        ];
        Self::from_key(seed, key)
    }

    fn from_key(seed: u64, key: [u64; 4]) -> Self {
        let mut bytes = [0u8; 32];
        for (chunk, word) in bytes.chunks_exact_mut(8).zip(key) {
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        RandomSource {
            seed,
            key,
            rng: ChaCha20Rng::from_seed(bytes),
        }
    }

    /// The seed this source (or its root ancestor) was created from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream keyed by `(key, stream_id)`.
    pub fn split(&self, stream_id: u64) -> RandomSource {
        let mut key = [0u64; 4];
        let mut state = stream_id ^ 0xD1B5_4A32_D192_ED03;
        for (i, k) in key.iter_mut().enumerate() {
            let mut s = self.key[i] ^ splitmix64(&mut state);
            *k = splitmix64(&mut s);
        }
        Self::from_key(self.seed, key)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn fill_standard_normal(&mut self, out: &mut [f64]) {
        for x in out {
            *x = self.rng.sample(StandardNormal);
        }
    }

    /// Chi-square with integer degrees of freedom, as a sum of squared normals.
    pub fn chi_square(&mut self, dof: u32) -> f64 {
        assert!(dof >= 1, "chi-square needs at least one degree of freedom");
        (0..dof)
            .map(|_| {
                let z = self.standard_normal();
                z * z
            })
            .sum()
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    /// Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

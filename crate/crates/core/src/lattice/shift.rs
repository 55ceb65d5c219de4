use crate::error::{Error, Result};

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;
const SEED_SALT: u64 = 0xd1b5_4a32_d192_ed03;

/// SplitMix64 output function.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A random shift in `[0,1)^s` together with the seed it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Shift {
    delta: Vec<f64>,
    seed: u64,
}

impl Shift {
    pub fn from_components(delta: Vec<f64>, seed: u64) -> Result<Self> {
        if let Some(&bad) = delta.iter().find(|d| !(**d >= 0.0 && **d < 1.0)) {
            return Err(Error::Domain {
                value: bad,
                domain: "[0, 1)",
            });
        }
        Ok(Self { delta, seed })
    }

    pub fn components(&self) -> &[f64] {
        &self.delta
    }

    pub fn dim(&self) -> usize {
        self.delta.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Counter-based shift generator.
///
/// Component `j` is `mix64(key + (j+1)·φ)` with `key = mix64(seed ^ salt)`
/// and φ the 64-bit golden-ratio increment, keeping the top 53 bits. Each
/// dimension is its own stream, so a shift of dimension `s` is a prefix of
/// the shift of any larger dimension with the same seed.
pub fn random_shift(seed: u64, s: usize) -> Shift {
    let key = mix64(seed ^ SEED_SALT);
    let delta = (0..s as u64)
        .map(|j| {
            let bits = mix64(key.wrapping_add((j + 1).wrapping_mul(GOLDEN_GAMMA)));
            (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
        })
        .collect();
    Shift { delta, seed }
}

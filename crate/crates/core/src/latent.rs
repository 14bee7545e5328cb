//! Coordinate-addressed i.i.d. standard-normal fields on Z².
//!
//! Every value is a pure function of `(seed, site, row, col, channel)`, so any
//! patch of the infinite field can be materialized in any order and overlapping
//! patches agree bit for bit.
//!
//! Procedure (also in `docs/FORMATS.md`):
//!
//! ```text
//! mix(z)   = z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//!            z ^= z >> 27; z *= 0x94D049BB133111EB; z ^ (z >> 31)     (wrapping u64)
//! absorb(h, x) = mix(h ^ ((x + 0x9E3779B97F4A7C15) * 0xD6E8FEB86659FD93))
//! word(lane) = fold absorb over [site, row, col, channel, lane] starting from mix(seed)
//!              (signed inputs are reinterpreted as two's-complement u64)
//! u(lane)    = (word(lane) >> 11) * 2^-53, with 0 replaced by 2^-53
//! value      = sqrt(-2 ln u(0)) * cos(2π u(1))
//! ```

use crate::error::{Error, Result};
use crate::tensor::{Rect, Tensor3};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const SPREAD: u64 = 0xD6E8_FEB8_6659_FD93;
const TWO_POW_NEG_53: f64 = 1.0 / (1u64 << 53) as f64;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn absorb(h: u64, x: u64) -> u64 {
    mix64(h ^ x.wrapping_add(GOLDEN).wrapping_mul(SPREAD))
}

/// 64-bit word for one lane of one field coordinate.
#[inline]
pub fn coordinate_hash(seed: u64, site: u32, row: i64, col: i64, channel: u64, lane: u64) -> u64 {
    let mut h = mix64(seed);
    h = absorb(h, site as u64);
    h = absorb(h, row as u64);
    h = absorb(h, col as u64);
    h = absorb(h, channel);
    absorb(h, lane)
}

/// Uniform in `(0, 1)` from the top 53 bits of a word; zero maps to 2^-53.
#[inline]
pub fn unit_open(word: u64) -> f64 {
    let u = (word >> 11) as f64 * TWO_POW_NEG_53;
    if u == 0.0 {
        TWO_POW_NEG_53
    } else {
        u
    }
}

/// Box–Muller (cosine branch) on two uniforms.
#[inline]
pub fn box_muller(u0: f64, u1: f64) -> f64 {
    (-2.0 * u0.ln()).sqrt() * (std::f64::consts::TAU * u1).cos()
}

/// One latent process `z^site(., .)` with `channels` values per grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatentField {
    pub seed: u64,
    pub site_id: u32,
    pub channels: usize,
}

impl LatentField {
    pub fn new(seed: u64, site_id: u32, channels: usize) -> LatentField {
        LatentField {
            seed,
            site_id,
            channels,
        }
    }

    #[inline]
    fn value(&self, i: i64, j: i64, c: usize) -> f64 {
        let w0 = coordinate_hash(self.seed, self.site_id, i, j, c as u64, 0);
        let w1 = coordinate_hash(self.seed, self.site_id, i, j, c as u64, 1);
        box_muller(unit_open(w0), unit_open(w1))
    }

    pub fn sample_at(&self, i: i64, j: i64, c: usize) -> Result<f64> {
        if c >= self.channels {
            return Err(Error::Channel {
                channel: c,
                channels: self.channels,
            });
        }
        Ok(self.value(i, j, c))
    }

    pub fn materialize(&self, r: Rect) -> Tensor3 {
        Tensor3::from_fn(r, self.channels, |i, j, c| self.value(i, j, c))
    }
}

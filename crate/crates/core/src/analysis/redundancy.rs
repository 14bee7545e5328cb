//! Share of generated pixels thrown away by crop-and-stitch tiling.

use num_rational::Ratio;

use crate::error::{Error, Result};

/// Latent tile side `N = floor(S / 2^K)` for a budget of `S` image pixels
/// per side and `K` upsampling blocks.
pub fn latent_tile_side(budget: u64, blocks: u32) -> Result<u64> {
    if blocks >= 63 {
        return Err(Error::Parameter(format!("{blocks} blocks is out of range")));
    }
    let n = budget >> blocks;
    if n < 3 {
        return Err(Error::Parameter(format!(
            "floor({budget} / 2^{blocks}) = {n}, but crop-and-stitch needs N >= 3 (S >= 3 * 2^K)"
        )));
    }
    Ok(n)
}

/// `4/N - 4/N^2` as an exact fraction.
pub fn redundancy_ratio(budget: u64, blocks: u32) -> Result<Ratio<u64>> {
    let n = latent_tile_side(budget, blocks)?;
    Ok(Ratio::new(4 * (n - 1), n * n))
}

/// Lower bound on the discarded fraction of pixels when tiles of at most
/// `budget` pixels per side are generated by a network with `blocks`
/// zero-padded upsampling blocks.
pub fn redundancy_fraction(budget: u64, blocks: u32) -> Result<f64> {
    let r = redundancy_ratio(budget, blocks)?;
    Ok(*r.numer() as f64 / *r.denom() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RedundancyRow {
    pub budget: u64,
    pub blocks: u32,
    pub latent_side: u64,
    pub fraction: f64,
}

/// One row per `(budget, blocks)` pair that admits `N >= 3`.
pub fn redundancy_table(budgets: &[u64], blocks: &[u32]) -> Vec<RedundancyRow> {
    let mut rows = Vec::new();
    for &budget in budgets {
        for &k in blocks {
            if let (Ok(latent_side), Ok(fraction)) =
                (latent_tile_side(budget, k), redundancy_fraction(budget, k))
            {
                rows.push(RedundancyRow {
                    budget,
                    blocks: k,
                    latent_side,
                    fraction,
                });
            }
        }
    }
    rows
}

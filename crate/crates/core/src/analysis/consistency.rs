//! Randomized marginalization-consistency trials.
//!
//! Each trial draws a latent rect `J` and a strictly smaller rect `J'`
//! inside it, generates both, and compares the output of `J'` with the
//! matching crop of the output of `J`. When they differ, the first layer
//! whose intermediate disagrees is reported.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::geometry;
use crate::network::Generator;
use crate::tensor::{max_abs_diff, Rect, Tensor3};

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub trial: usize,
    /// Seed that reproduces this trial on its own.
    pub seed: u64,
    pub latent: Rect,
    pub sub_latent: Rect,
    pub max_abs_diff: f64,
    /// `(index, description)` of the first layer whose output differs.
    pub offending_layer: Option<(usize, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub trials: Vec<TrialOutcome>,
}

impl ConsistencyReport {
    pub fn failures(&self) -> impl Iterator<Item = &TrialOutcome> {
        self.trials.iter().filter(|t| t.max_abs_diff != 0.0)
    }

    pub fn failure_count(&self) -> usize {
        self.failures().count()
    }

    pub fn passed(&self) -> bool {
        self.failure_count() == 0
    }
}

/// Latent rects of one trial: sides in `[min_side + 1, min_side + 2]` for
/// `J`, at least `min_side` and strictly smaller in some direction for `J'`.
pub fn trial_rects(seed: u64, min_side: usize) -> (Rect, Rect) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = min_side as i64;
    let (h, w) = (rng.random_range(m + 1..=m + 2), rng.random_range(m + 1..=m + 2));
    let (r0, c0) = (rng.random_range(-500..500), rng.random_range(-500..500));
    let outer = Rect::new(r0, r0 + h, c0, c0 + w).expect("positive sides");
    let (sh, sw) = loop {
        let s = (rng.random_range(m..=h), rng.random_range(m..=w));
        if s != (h, w) {
            break s;
        }
    };
    let (dr, dc) = (rng.random_range(0..=h - sh), rng.random_range(0..=w - sw));
    let inner = Rect::new(r0 + dr, r0 + dr + sh, c0 + dc, c0 + dc + sw).expect("positive sides");
    (outer, inner)
}

fn compare(big: &Tensor3, small: &Tensor3) -> Result<f64> {
    max_abs_diff(&big.subpatch(small.anchor())?, small)
}

/// Runs one trial with its own seed.
pub fn run_trial(gen: &Generator, trial: usize, seed: u64) -> Result<TrialOutcome> {
    let min_side = geometry::min_input_side(&gen.spec().layers).max(1);
    let (latent, sub_latent) = trial_rects(seed, min_side);
    let field = gen.latent_field(seed);
    let (out, trace) = gen.forward_traced(&field.materialize(latent), seed)?;
    let (sub_out, sub_trace) = gen.forward_traced(&field.materialize(sub_latent), seed)?;
    let diff = compare(out.output(), sub_out.output())?;
    let offending_layer = if diff != 0.0 {
        trace
            .iter()
            .zip(&sub_trace)
            .enumerate()
            .find(|(_, (a, b))| compare(a, b).map_or(true, |d| d != 0.0))
            .map(|(k, _)| (k, gen.spec().layers[k].to_string()))
    } else {
        None
    };
    Ok(TrialOutcome {
        trial,
        seed,
        latent,
        sub_latent,
        max_abs_diff: diff,
        offending_layer,
    })
}

/// `trials` independent trials; trial `t` uses seed `seed + t`.
pub fn verify_consistency(gen: &Generator, trials: usize, seed: u64) -> Result<ConsistencyReport> {
    let trials = (0..trials)
        .map(|t| run_trial(gen, t, seed.wrapping_add(t as u64)))
        .collect::<Result<_>>()?;
    Ok(ConsistencyReport { trials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::g0_with_widths;

    #[test]
    fn trial_rects_nest() {
        for s in 0..200 {
            let (j, jp) = trial_rects(s, 5);
            assert!(j.contains(&jp) && j != jp);
            assert!(jp.height() >= 5 && jp.width() >= 5);
        }
    }

    #[test]
    fn small_g0_passes_and_padded_fails() {
        let spec = g0_with_widths(4, 3);
        let gen = Generator::random(spec.clone(), 2).unwrap();
        assert!(verify_consistency(&gen, 5, 10).unwrap().passed());

        let bad = Generator::random(spec.with_zero_padding_at(6).unwrap(), 2).unwrap();
        let report = verify_consistency(&bad, 5, 10).unwrap();
        assert_eq!(report.failure_count(), 5);
        for f in report.failures() {
            assert_eq!(f.offending_layer.as_ref().unwrap().0, 6);
        }
    }
}

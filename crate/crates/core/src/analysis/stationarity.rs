//! Monte-Carlo check that a generator's output is cyclostationary.
//!
//! Realizations of a small probe rect are compared with realizations of the
//! same rect shifted by the claimed period (fresh seeds for each set). Every
//! per-pixel mean, raw second moment and lag-1 product is compared with a
//! two-sample z-test. Equal first and second moments are necessary for
//! equality in distribution, not sufficient.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::latent::mix64;
use crate::network::Generator;
use crate::tensor::{PhaseIndex, Rect, Tensor3};

pub const Z_THRESHOLD: f64 = 4.0;
pub const MIN_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ConsistentWithPeriod,
    Violation,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::ConsistentWithPeriod => "consistent_with_period",
            Verdict::Violation => "violation",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PixelMoments {
    pub row: i64,
    pub col: i64,
    pub phase: PhaseIndex,
    pub channel: usize,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LagMoments {
    pub from: (i64, i64),
    pub to: (i64, i64),
    pub channel: usize,
    pub covariance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleMoments {
    pub rect: Rect,
    pub pixels: Vec<PixelMoments>,
    pub lags: Vec<LagMoments>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationarityReport {
    pub period_tested: (usize, usize),
    pub num_samples: usize,
    pub seed: u64,
    pub probe: SampleMoments,
    pub shifted: SampleMoments,
    pub max_z_score_period_shift: f64,
    /// Statistic with the largest |z| under the period shift.
    pub worst_statistic: String,
    pub detect_shift: Option<(i64, i64)>,
    /// Largest |z| between the probe and the probe moved by `detect_shift`.
    pub max_z_score_detect: Option<f64>,
    pub verdict: Verdict,
}

impl StationarityReport {
    pub fn detection_triggered(&self) -> Option<bool> {
        self.max_z_score_detect.map(|z| z > Z_THRESHOLD)
    }
}

/// Recursive pairwise summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

/// Names of the statistics extracted from one realization, in order.
fn statistic_names(rect: Rect, channels: usize) -> Vec<String> {
    let mut names = Vec::new();
    for (i, j) in rect.points() {
        for c in 0..channels {
            names.push(format!("mean({},{},{c})", i - rect.row_start, j - rect.col_start));
            names.push(format!("square({},{},{c})", i - rect.row_start, j - rect.col_start));
        }
    }
    for (i, j) in rect.points() {
        let (r, k) = (i - rect.row_start, j - rect.col_start);
        for c in 0..channels {
            if i + 1 < rect.row_end {
                names.push(format!("lag_down({r},{k},{c})"));
            }
            if j + 1 < rect.col_end {
                names.push(format!("lag_right({r},{k},{c})"));
            }
        }
    }
    names
}

fn statistics(x: &Tensor3) -> Vec<f64> {
    let rect = x.anchor();
    let ch = x.channels();
    let mut s = Vec::new();
    for (i, j) in rect.points() {
        for &v in x.pixel(i, j) {
            s.push(v);
            s.push(v * v);
        }
    }
    for (i, j) in rect.points() {
        for c in 0..ch {
            let v = x.get(i, j, c);
            if i + 1 < rect.row_end {
                s.push(v * x.get(i + 1, j, c));
            }
            if j + 1 < rect.col_end {
                s.push(v * x.get(i, j + 1, c));
            }
        }
    }
    s
}

struct Column {
    mean: f64,
    var: f64,
}

fn columns(samples: &[Vec<f64>]) -> Vec<Column> {
    let n = samples.len() as f64;
    (0..samples[0].len())
        .map(|k| {
            let col: Vec<f64> = samples.iter().map(|s| s[k]).collect();
            let mean = pairwise_sum(&col) / n;
            let dev: Vec<f64> = col.iter().map(|v| (v - mean) * (v - mean)).collect();
            Column {
                mean,
                var: pairwise_sum(&dev) / (n - 1.0),
            }
        })
        .collect()
}

fn z_scores(a: &[Column], b: &[Column], n: usize) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(a, b)| {
            let se = ((a.var + b.var) / n as f64).sqrt();
            let d = a.mean - b.mean;
            if se > 0.0 {
                d / se
            } else if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .collect()
}

fn moments(cols: &[Column], rect: Rect, channels: usize, period: (usize, usize)) -> SampleMoments {
    let mut it = cols.iter();
    let mut pixels = Vec::new();
    let mut mean_of = std::collections::HashMap::new();
    for (i, j) in rect.points() {
        for c in 0..channels {
            let m = it.next().expect("column layout").mean;
            let sq = it.next().expect("column layout").mean;
            mean_of.insert((i, j, c), m);
            pixels.push(PixelMoments {
                row: i,
                col: j,
                phase: PhaseIndex::of(i, j, period),
                channel: c,
                mean: m,
                variance: sq - m * m,
            });
        }
    }
    let mut lags = Vec::new();
    for (i, j) in rect.points() {
        for c in 0..channels {
            for (di, dj) in [(1, 0), (0, 1)] {
                if (di == 1 && i + 1 >= rect.row_end) || (dj == 1 && j + 1 >= rect.col_end) {
                    continue;
                }
                let prod = it.next().expect("column layout").mean;
                lags.push(LagMoments {
                    from: (i, j),
                    to: (i + di, j + dj),
                    channel: c,
                    covariance: prod - mean_of[&(i, j, c)] * mean_of[&(i + di, j + dj, c)],
                });
            }
        }
    }
    SampleMoments { rect, pixels, lags }
}

fn sample_set(gen: &Generator, rect: Rect, n: usize, seed: u64, set: u64) -> Result<Vec<Vec<f64>>> {
    (0..n as u64)
        .into_par_iter()
        .map(|k| {
            let s = mix64(mix64(seed ^ set.wrapping_mul(0x9E37_79B9_7F4A_7C15)) ^ k);
            Ok(statistics(&gen.generate_region(s, rect)?.into_output()))
        })
        .collect()
}

/// Compares `num_samples` realizations of `probe` with realizations of
/// `probe` moved by one claimed period, and optionally with `probe` moved by
/// `detect_shift` (a shift the process is not expected to be invariant
/// under).
pub fn test_cyclostationarity(
    gen: &Generator,
    claimed_period: (usize, usize),
    probe: Rect,
    num_samples: usize,
    seed: u64,
    detect_shift: Option<(i64, i64)>,
) -> Result<StationarityReport> {
    if num_samples < MIN_SAMPLES {
        return Err(Error::Parameter(format!(
            "{num_samples} samples requested, at least {MIN_SAMPLES} are needed"
        )));
    }
    if claimed_period.0 == 0 || claimed_period.1 == 0 {
        return Err(Error::Parameter("period must be positive".into()));
    }
    let channels = gen.spec().output_channels();
    let names = statistic_names(probe, channels);
    let shifted_rect = probe.shifted(claimed_period.0 as i64, claimed_period.1 as i64);
    let a = columns(&sample_set(gen, probe, num_samples, seed, 0)?);
    let b = columns(&sample_set(gen, shifted_rect, num_samples, seed, 1)?);
    let z = z_scores(&a, &b, num_samples);
    let (worst, max_z) = z
        .iter()
        .enumerate()
        .map(|(k, v)| (k, v.abs()))
        .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    let max_z_score_detect = match detect_shift {
        Some((dr, dc)) => {
            let c = columns(&sample_set(gen, probe.shifted(dr, dc), num_samples, seed, 2)?);
            Some(z_scores(&a, &c, num_samples).iter().fold(0.0f64, |m, v| m.max(v.abs())))
        }
        None => None,
    };
    Ok(StationarityReport {
        period_tested: claimed_period,
        num_samples,
        seed,
        probe: moments(&a, probe, channels, claimed_period),
        shifted: moments(&b, shifted_rect, channels, claimed_period),
        max_z_score_period_shift: max_z,
        worst_statistic: names[worst].clone(),
        detect_shift,
        max_z_score_detect,
        verdict: if max_z < Z_THRESHOLD {
            Verdict::ConsistentWithPeriod
        } else {
            Verdict::Violation
        },
    })
}

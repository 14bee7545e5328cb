//! Exact dependency tracing through a layer stack.
//!
//! Every output pixel carries a flag saying whether a zero introduced by
//! convolution padding reaches it, and (for small latents) the set of latent
//! pixels it reads. Channels mix freely inside every layer, so dependencies
//! are tracked per pixel.

use crate::error::{Error, Result};
use crate::geometry::{backward_stack, forward_rect};
use crate::layers::LayerSpec;
use crate::network::NetworkSpec;
use crate::tensor::Rect;

/// Latent rects larger than this keep only the padding bitmap.
pub const MAX_SUPPORT_AREA: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct TaintTensor {
    anchor: Rect,
    channels: usize,
    latent: Rect,
    words: usize,
    padded: Vec<bool>,
    support: Option<Vec<u64>>,
}

impl TaintTensor {
    /// The untouched latent: every pixel depends on itself only.
    pub fn latent(latent: Rect, channels: usize) -> TaintTensor {
        let area = latent.area();
        let words = area.div_ceil(64);
        let support = (area <= MAX_SUPPORT_AREA).then(|| {
            let mut s = vec![0u64; area * words];
            for k in 0..area {
                s[k * words + k / 64] |= 1 << (k % 64);
            }
            s
        });
        TaintTensor {
            anchor: latent,
            channels,
            latent,
            words,
            padded: vec![false; area],
            support,
        }
    }

    pub fn anchor(&self) -> Rect {
        self.anchor
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    fn index(&self, row: i64, col: i64) -> usize {
        debug_assert!(self.anchor.contains_point(row, col));
        ((row - self.anchor.row_start) as usize) * self.anchor.width() + (col - self.anchor.col_start) as usize
    }

    pub fn is_padded(&self, row: i64, col: i64) -> bool {
        self.padded[self.index(row, col)]
    }

    pub fn tainted_count(&self) -> usize {
        self.padded.iter().filter(|&&p| p).count()
    }

    /// Latent pixels that influence `(row, col)`; `None` above
    /// [`MAX_SUPPORT_AREA`].
    pub fn support(&self, row: i64, col: i64) -> Option<Vec<(i64, i64)>> {
        let s = self.support.as_ref()?;
        let k = self.index(row, col);
        let bits = &s[k * self.words..(k + 1) * self.words];
        let w = self.latent.width();
        Some(
            (0..self.latent.area())
                .filter(|&b| bits[b / 64] >> (b % 64) & 1 == 1)
                .map(|b| {
                    (
                        self.latent.row_start + (b / w) as i64,
                        self.latent.col_start + (b % w) as i64,
                    )
                })
                .collect(),
        )
    }

    /// Bounding rect of the union of supports over `region`, provided the
    /// union is exactly that rect.
    pub fn support_rect(&self, region: Rect) -> Option<Rect> {
        let s = self.support.as_ref()?;
        let mut acc = vec![0u64; self.words];
        for (i, j) in region.points() {
            let k = self.index(i, j);
            for (a, b) in acc.iter_mut().zip(&s[k * self.words..(k + 1) * self.words]) {
                *a |= b;
            }
        }
        let w = self.latent.width();
        let pts: Vec<(i64, i64)> = (0..self.latent.area())
            .filter(|&b| acc[b / 64] >> (b % 64) & 1 == 1)
            .map(|b| {
                (
                    self.latent.row_start + (b / w) as i64,
                    self.latent.col_start + (b % w) as i64,
                )
            })
            .collect();
        let r0 = pts.iter().map(|p| p.0).min()?;
        let r1 = pts.iter().map(|p| p.0).max()? + 1;
        let c0 = pts.iter().map(|p| p.1).min()?;
        let c1 = pts.iter().map(|p| p.1).max()? + 1;
        let rect = Rect::new(r0, r1, c0, c1).ok()?;
        (rect.area() == pts.len()).then_some(rect)
    }

    /// Width `w` such that exactly the pixels within `w` of the border are
    /// padding-tainted, if the taint has that frame shape.
    pub fn border_width(&self) -> Option<usize> {
        let (h, w) = (self.anchor.height(), self.anchor.width());
        (0..=h.min(w).div_ceil(2)).find(|&bw| {
            self.anchor.points().all(|(i, j)| {
                let r = (i - self.anchor.row_start) as usize;
                let c = (j - self.anchor.col_start) as usize;
                let edge = r.min(c).min(h - 1 - r).min(w - 1 - c);
                self.is_padded(i, j) == (edge < bw)
            })
        })
    }

    /// Bounding rect of the padding-free pixels.
    pub fn clean_rect(&self) -> Option<Rect> {
        let clean: Vec<(i64, i64)> = self.anchor.points().filter(|&(i, j)| !self.is_padded(i, j)).collect();
        let r0 = clean.iter().map(|p| p.0).min()?;
        let r1 = clean.iter().map(|p| p.0).max()? + 1;
        let c0 = clean.iter().map(|p| p.1).min()?;
        let c1 = clean.iter().map(|p| p.1).max()? + 1;
        Rect::new(r0, r1, c0, c1).ok()
    }

    fn empty_like(&self, anchor: Rect, channels: usize) -> TaintTensor {
        TaintTensor {
            anchor,
            channels,
            latent: self.latent,
            words: self.words,
            padded: vec![false; anchor.area()],
            support: self.support.as_ref().map(|_| vec![0u64; anchor.area() * self.words]),
        }
    }

    /// Output pixel `dst` of `out` depends on input pixel `(row, col)`, or on
    /// padding when that pixel is outside the input.
    fn pull(&self, out: &mut TaintTensor, dst: usize, row: i64, col: i64) {
        if !self.anchor.contains_point(row, col) {
            out.padded[dst] = true;
            return;
        }
        let k = self.index(row, col);
        out.padded[dst] |= self.padded[k];
        if let (Some(o), Some(s)) = (out.support.as_mut(), self.support.as_ref()) {
            let w = self.words;
            for t in 0..w {
                o[dst * w + t] |= s[k * w + t];
            }
        }
    }
}

/// Propagates dependency information through one layer.
pub fn trace_layer(layer: &LayerSpec, input: &TaintTensor) -> Result<TaintTensor> {
    let out_rect = forward_rect(layer, input.anchor)?;
    let channels = layer.out_channels(input.channels);
    let mut out = input.empty_like(out_rect, channels);
    for (dst, (i, j)) in out_rect.points().enumerate() {
        match *layer {
            LayerSpec::ConvNoPad { kernel, .. } | LayerSpec::ConvZeroPad { kernel, .. } => {
                let r = (kernel / 2) as i64;
                for di in -r..=r {
                    for dj in -r..=r {
                        input.pull(&mut out, dst, i + di, j + dj);
                    }
                }
            }
            LayerSpec::NearestUp { scale } => {
                let u = scale as i64;
                input.pull(&mut out, dst, i.div_euclid(u), j.div_euclid(u));
            }
            LayerSpec::BilinearUpCrop => {
                let (h, w) = (i.div_euclid(2), j.div_euclid(2));
                for (di, dj) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    input.pull(&mut out, dst, h + di, w + dj);
                }
            }
            LayerSpec::Activation { .. }
            | LayerSpec::PixelNorm
            | LayerSpec::NoisyAdaPixNorm { .. }
            | LayerSpec::Conv1x1 { .. } => input.pull(&mut out, dst, i, j),
        }
    }
    Ok(out)
}

/// Traces a latent rect through every layer of `net` (the image head is
/// pointwise and does not change dependencies).
pub fn trace_taint(net: &NetworkSpec, latent_rect: Rect) -> Result<TaintTensor> {
    let mut t = TaintTensor::latent(latent_rect, net.input_channels);
    for (k, layer) in net.layers.iter().enumerate() {
        t = trace_layer(layer, &t).map_err(|e| match e {
            Error::Underflow { layer: name, got, required } => Error::Underflow {
                layer: format!("layer {k} ({name})"),
                got,
                required,
            },
            other => other,
        })?;
    }
    if let Some(head) = &net.head {
        t.channels = head.out_channels;
    }
    Ok(t)
}

/// Checks the rect algebra against the tracer: the latent pixels reaching
/// `output_rect` are exactly the backward rect.
pub fn verify_backward_rect(net: &NetworkSpec, output_rect: Rect) -> bool {
    let need = backward_stack(&net.layers, output_rect);
    let Ok(latent) = need.expanded(2) else {
        return false;
    };
    let Ok(t) = trace_taint(net, latent) else {
        return false;
    };
    t.anchor().contains(&output_rect) && t.support_rect(output_rect) == Some(need)
}

/// Clean columns of two horizontally adjacent crop-mode tiles of latent side
/// `n` sharing `overlap` latent columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OverlapWitness {
    pub left_clean: Rect,
    pub right_clean: Rect,
    /// Image columns between the two clean regions; zero or negative means
    /// the clean regions meet or overlap.
    pub gap: i64,
}

pub fn overlap_witness(net: &NetworkSpec, n: usize, overlap: usize) -> Result<OverlapWitness> {
    let left = Rect::sized(n, n)?;
    let right = left.shifted(0, n as i64 - overlap as i64);
    let clean = |r: Rect| {
        trace_taint(net, r)?
            .clean_rect()
            .ok_or_else(|| Error::Parameter(format!("latent {r} has no clean pixels")))
    };
    let (left_clean, right_clean) = (clean(left)?, clean(right)?);
    Ok(OverlapWitness {
        left_clean,
        right_clean,
        gap: right_clean.col_start - left_clean.col_end,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{padded_nearest_stack, reference_g0};

    fn single(layer: LayerSpec, channels: usize) -> NetworkSpec {
        NetworkSpec {
            name: "single".into(),
            input_channels: channels,
            layers: vec![layer],
            head: None,
        }
    }

    #[test]
    fn padded_border_widths() {
        let k1 = trace_taint(&padded_nearest_stack(1, 2, 2), Rect::sized(4, 4).unwrap()).unwrap();
        assert_eq!((k1.anchor().height(), k1.border_width()), (8, Some(1)));
        assert_eq!(k1.clean_rect(), Some(Rect::new(1, 7, 1, 7).unwrap()));
        let k2 = trace_taint(&padded_nearest_stack(2, 2, 2), Rect::sized(4, 4).unwrap()).unwrap();
        assert_eq!((k2.anchor().height(), k2.border_width()), (16, Some(3)));
    }

    #[test]
    fn consistent_net_has_no_taint() {
        let t = trace_taint(&reference_g0(), Rect::sized(6, 6).unwrap()).unwrap();
        assert_eq!(t.tainted_count(), 0);
        assert_eq!(t.border_width(), Some(0));
        assert!(t.support(40, 40).is_some_and(|s| !s.is_empty()));
    }

    #[test]
    fn single_layer_supports() {
        let conv = single(
            LayerSpec::ConvNoPad {
                kernel: 3,
                in_channels: 1,
                out_channels: 1,
            },
            1,
        );
        let t = trace_taint(&conv, Rect::sized(6, 6).unwrap()).unwrap();
        assert_eq!(t.support_rect(Rect::with_size(2, 3, 1, 1).unwrap()), Some(Rect::new(1, 4, 2, 5).unwrap()));
        let up = single(LayerSpec::NearestUp { scale: 2 }, 1);
        let t = trace_taint(&up, Rect::sized(4, 4).unwrap()).unwrap();
        assert_eq!(t.support(3, 4), Some(vec![(1, 2)]));
    }

    #[test]
    fn backward_rect_agrees_with_tracer() {
        let g0 = reference_g0();
        assert!(verify_backward_rect(&g0, Rect::with_size(50, 61, 1, 1).unwrap()));
        assert!(verify_backward_rect(&g0, Rect::with_size(40, 40, 7, 3).unwrap()));
    }

    #[test]
    fn latent_too_small() {
        assert!(matches!(
            trace_taint(&reference_g0(), Rect::sized(2, 2).unwrap()),
            Err(Error::Underflow { .. })
        ));
    }

    #[test]
    fn overlap_witnesses() {
        let k2 = padded_nearest_stack(2, 1, 1);
        assert!(overlap_witness(&k2, 6, 2).unwrap().gap <= 0);
        assert!(overlap_witness(&k2, 6, 1).unwrap().gap > 0);
        let k1 = padded_nearest_stack(1, 1, 1);
        assert_eq!(overlap_witness(&k1, 6, 1).unwrap().gap, 0);
        assert!(overlap_witness(&k1, 6, 0).unwrap().gap > 0);
    }
}

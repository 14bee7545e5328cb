//! Forward semantics of the generator building blocks.
//!
//! Every layer maps a [`Tensor3`] anchored at global coordinates to another
//! anchored tensor. All but [`conv_zero_pad`] are consistent: evaluating on a
//! large rect and cropping gives the same bits as evaluating on the smaller
//! backward-mapped rect directly.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latent::LatentField;
use crate::tensor::{Rect, Tensor3};

/// Guard added to the per-pixel variance inside pixel normalization.
pub const PIXEL_NORM_EPS: f64 = 1e-8;

pub const LEAKY_RELU_SLOPE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationKind {
    Relu,
    LeakyRelu,
    Sigmoid,
    Tanh,
}

impl ActivationKind {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            ActivationKind::Relu => x.max(0.0),
            ActivationKind::LeakyRelu => {
                if x >= 0.0 {
                    x
                } else {
                    LEAKY_RELU_SLOPE * x
                }
            }
            ActivationKind::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            ActivationKind::Tanh => x.tanh(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Relu => "relu",
            ActivationKind::LeakyRelu => "leaky_relu",
            ActivationKind::Sigmoid => "sigmoid",
            ActivationKind::Tanh => "tanh",
        }
    }
}

impl FromStr for ActivationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(ActivationKind::Relu),
            "leaky_relu" | "leaky_relu(0.2)" => Ok(ActivationKind::LeakyRelu),
            "sigmoid" => Ok(ActivationKind::Sigmoid),
            "tanh" => Ok(ActivationKind::Tanh),
            other => Err(Error::Parameter(format!("unknown activation `{other}`"))),
        }
    }
}

/// Declarative description of one layer. Weights live separately in
/// [`LayerParams`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    ConvNoPad {
        kernel: usize,
        in_channels: usize,
        out_channels: usize,
    },
    ConvZeroPad {
        kernel: usize,
        in_channels: usize,
        out_channels: usize,
    },
    NearestUp {
        scale: usize,
    },
    BilinearUpCrop,
    Activation {
        function: ActivationKind,
    },
    PixelNorm,
    NoisyAdaPixNorm {
        channels: usize,
        site_id: u32,
    },
    Conv1x1 {
        in_channels: usize,
        out_channels: usize,
    },
}

impl LayerSpec {
    /// Output channel count given the input channel count.
    pub fn out_channels(&self, input: usize) -> usize {
        match *self {
            LayerSpec::ConvNoPad { out_channels, .. }
            | LayerSpec::ConvZeroPad { out_channels, .. }
            | LayerSpec::Conv1x1 { out_channels, .. } => out_channels,
            _ => input,
        }
    }

    /// Input channel count this layer insists on, if any.
    pub fn required_in_channels(&self) -> Option<usize> {
        match *self {
            LayerSpec::ConvNoPad { in_channels, .. }
            | LayerSpec::ConvZeroPad { in_channels, .. }
            | LayerSpec::Conv1x1 { in_channels, .. } => Some(in_channels),
            LayerSpec::NoisyAdaPixNorm { channels, .. } => Some(channels),
            _ => None,
        }
    }

    pub fn is_consistent(&self) -> bool {
        !matches!(self, LayerSpec::ConvZeroPad { .. })
    }

    /// Spatial upsampling factor (1 for non-upsampling layers).
    pub fn scale(&self) -> usize {
        match *self {
            LayerSpec::NearestUp { scale } => scale,
            LayerSpec::BilinearUpCrop => 2,
            _ => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            LayerSpec::ConvNoPad {
                kernel,
                in_channels,
                out_channels,
            }
            | LayerSpec::ConvZeroPad {
                kernel,
                in_channels,
                out_channels,
            } => {
                if kernel == 0 || kernel % 2 == 0 {
                    return Err(Error::Parameter(format!(
                        "{self}: kernel size must be odd and positive"
                    )));
                }
                if in_channels == 0 || out_channels == 0 {
                    return Err(Error::Parameter(format!("{self}: zero channels")));
                }
            }
            LayerSpec::Conv1x1 {
                in_channels,
                out_channels,
            } => {
                if in_channels == 0 || out_channels == 0 {
                    return Err(Error::Parameter(format!("{self}: zero channels")));
                }
            }
            LayerSpec::NearestUp { scale } => {
                if scale < 2 {
                    return Err(Error::Parameter(format!(
                        "nearest upsampling scale must be >= 2, got {scale}"
                    )));
                }
            }
            LayerSpec::NoisyAdaPixNorm { channels, .. } => {
                if channels == 0 {
                    return Err(Error::Parameter(format!("{self}: zero channels")));
                }
            }
            LayerSpec::BilinearUpCrop | LayerSpec::Activation { .. } | LayerSpec::PixelNorm => {}
        }
        Ok(())
    }
}

impl fmt::Display for LayerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            LayerSpec::ConvNoPad {
                kernel,
                in_channels,
                out_channels,
            } => write!(f, "conv{kernel}x{kernel} {in_channels}->{out_channels} (no padding)"),
            LayerSpec::ConvZeroPad {
                kernel,
                in_channels,
                out_channels,
            } => write!(f, "conv{kernel}x{kernel} {in_channels}->{out_channels} (zero padding)"),
            LayerSpec::NearestUp { scale } => write!(f, "nearest up x{scale}"),
            LayerSpec::BilinearUpCrop => write!(f, "bilinear up x2 (crop 1)"),
            LayerSpec::Activation { function } => write!(f, "{}", function.name()),
            LayerSpec::PixelNorm => write!(f, "pixel norm"),
            LayerSpec::NoisyAdaPixNorm { channels, site_id } => {
                write!(f, "noisy ada pixel norm C={channels} site={site_id}")
            }
            LayerSpec::Conv1x1 {
                in_channels,
                out_channels,
            } => write!(f, "conv1x1 {in_channels}->{out_channels}"),
        }
    }
}

/// Convolution weights in `[out][in][kernel_row][kernel_col]` order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvParams {
    pub kernel: usize,
    pub in_channels: usize,
    pub out_channels: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    /// `[kernel_row][kernel_col][in][out]` copy for the inner loop.
    packed: Vec<f64>,
}

impl ConvParams {
    pub fn new(
        kernel: usize,
        in_channels: usize,
        out_channels: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
    ) -> Result<ConvParams> {
        if kernel == 0 || kernel.is_multiple_of(2) {
            return Err(Error::Parameter(format!(
                "kernel size must be odd and positive, got {kernel}"
            )));
        }
        let n = out_channels * in_channels * kernel * kernel;
        if weights.len() != n {
            return Err(Error::Shape(format!(
                "conv weights have {} values, expected {n}",
                weights.len()
            )));
        }
        if bias.len() != out_channels {
            return Err(Error::Shape(format!(
                "conv bias has {} values, expected {out_channels}",
                bias.len()
            )));
        }
        let mut packed = vec![0.0; n];
        for o in 0..out_channels {
            for i in 0..in_channels {
                for kr in 0..kernel {
                    for kc in 0..kernel {
                        let src = ((o * in_channels + i) * kernel + kr) * kernel + kc;
                        let dst = ((kr * kernel + kc) * in_channels + i) * out_channels + o;
                        packed[dst] = weights[src];
                    }
                }
            }
        }
        Ok(ConvParams {
            kernel,
            in_channels,
            out_channels,
            weights,
            bias,
            packed,
        })
    }

    /// Kernel with a single 1.0 at the centre tap of every `(c, c)` pair.
    pub fn identity(kernel: usize, channels: usize) -> Result<ConvParams> {
        let mut w = vec![0.0; channels * channels * kernel * kernel];
        let mid = kernel / 2;
        for c in 0..channels {
            w[((c * channels + c) * kernel + mid) * kernel + mid] = 1.0;
        }
        ConvParams::new(kernel, channels, channels, w, vec![0.0; channels])
    }

    fn check_input(&self, input: &Tensor3) -> Result<()> {
        if input.channels() != self.in_channels {
            return Err(Error::Shape(format!(
                "conv expects {} input channels, got {}",
                self.in_channels,
                input.channels()
            )));
        }
        Ok(())
    }
}

/// Per-channel vectors of one Noisy AdaPixNorm site.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaPixNormParams {
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub noise_weight: Vec<f64>,
    pub site_id: u32,
}

impl AdaPixNormParams {
    /// `beta = 1`, `gamma = 0`, `w = 0`: plain pixel normalization.
    pub fn neutral(channels: usize, site_id: u32) -> AdaPixNormParams {
        AdaPixNormParams {
            beta: vec![1.0; channels],
            gamma: vec![0.0; channels],
            noise_weight: vec![0.0; channels],
            site_id,
        }
    }

    pub fn channels(&self) -> usize {
        self.beta.len()
    }
}

/// Weights bound to one layer.
#[derive(Debug, Clone, PartialEq)]
pub enum LayerParams {
    None,
    Conv(ConvParams),
    AdaPixNorm(AdaPixNormParams),
}

fn underflow(layer: &str, input: Rect, min: usize) -> Error {
    Error::Underflow {
        layer: layer.to_string(),
        got: format!("{}x{}", input.height(), input.width()),
        required: format!("{min}x{min}"),
    }
}

/// Accumulates the `k x k x C_in` footprint of one output pixel into `acc`.
/// Per output channel the additions run kernel row, kernel column, input
/// channel, then bias, independent of where the pixel sits in the tensor.
#[inline]
fn conv_pixel(
    p: &ConvParams,
    input: &Tensor3,
    row: i64,
    col: i64,
    zero_pad: bool,
    acc: &mut [f64],
) {
    let k = p.kernel;
    let half = (k / 2) as i64;
    let cin = p.in_channels;
    let cout = p.out_channels;
    let anchor = input.anchor();
    acc.fill(0.0);
    for kr in 0..k {
        let r = row - half + kr as i64;
        if zero_pad && (r < anchor.row_start || r >= anchor.row_end) {
            continue;
        }
        for kc in 0..k {
            let c = col - half + kc as i64;
            if zero_pad && (c < anchor.col_start || c >= anchor.col_end) {
                continue;
            }
            let px = input.pixel(r, c);
            let base = (kr * k + kc) * cin * cout;
            for (ic, &x) in px.iter().enumerate() {
                let w = &p.packed[base + ic * cout..base + (ic + 1) * cout];
                for (a, &wv) in acc.iter_mut().zip(w) {
                    *a += wv * x;
                }
            }
        }
    }
    for (a, &b) in acc.iter_mut().zip(&p.bias) {
        *a += b;
    }
}

fn conv_over(p: &ConvParams, input: &Tensor3, out_rect: Rect, zero_pad: bool) -> Tensor3 {
    let cout = p.out_channels;
    let mut data = vec![0.0; out_rect.area() * cout];
    if zero_pad {
        for (chunk, (i, j)) in data.chunks_exact_mut(cout).zip(out_rect.points()) {
            conv_pixel(p, input, i, j, true, chunk);
        }
    } else {
        let row_len = out_rect.width() * cout;
        for (row_out, i) in data.chunks_exact_mut(row_len).zip(out_rect.row_start..) {
            for (k, block) in row_out.chunks_mut(CONV_BLOCK * cout).enumerate() {
                let j0 = out_rect.col_start + (k * CONV_BLOCK) as i64;
                conv_row_block(p, input, i, j0, block);
            }
        }
    }
    Tensor3::from_vec(out_rect, cout, data).expect("sized above")
}

const CONV_BLOCK: usize = 4;

/// Unpadded convolution of up to `CONV_BLOCK` horizontally adjacent pixels
/// starting at `(row, col)`, sharing each weight row across the block. The
/// per-pixel addition order matches [`conv_pixel`].
#[inline]
fn conv_row_block(p: &ConvParams, input: &Tensor3, row: i64, col: i64, out: &mut [f64]) {
    let k = p.kernel;
    let half = (k / 2) as i64;
    let cin = p.in_channels;
    let cout = p.out_channels;
    let n = out.len() / cout;
    if n != CONV_BLOCK {
        for (t, chunk) in out.chunks_exact_mut(cout).enumerate() {
            conv_pixel(p, input, row, col + t as i64, false, chunk);
        }
        return;
    }
    out.fill(0.0);
    let (a0, rest) = out.split_at_mut(cout);
    let (a1, rest) = rest.split_at_mut(cout);
    let (a2, a3) = rest.split_at_mut(cout);
    for kr in 0..k {
        let r = row - half + kr as i64;
        for kc in 0..k {
            let c = col - half + kc as i64;
            let x0 = input.pixel(r, c);
            let x1 = input.pixel(r, c + 1);
            let x2 = input.pixel(r, c + 2);
            let x3 = input.pixel(r, c + 3);
            let base = (kr * k + kc) * cin * cout;
            for ic in 0..cin {
                let w = &p.packed[base + ic * cout..base + (ic + 1) * cout];
                let (v0, v1, v2, v3) = (x0[ic], x1[ic], x2[ic], x3[ic]);
                for o in 0..cout {
                    let wv = w[o];
                    a0[o] += wv * v0;
                    a1[o] += wv * v1;
                    a2[o] += wv * v2;
                    a3[o] += wv * v3;
                }
            }
        }
    }
    for acc in [a0, a1, a2, a3] {
        for (a, &b) in acc.iter_mut().zip(&p.bias) {
            *a += b;
        }
    }
}

/// Valid (unpadded) stride-1 cross-correlation; shrinks the anchor by
/// `(k-1)/2` on every side.
pub fn conv_no_pad(input: &Tensor3, p: &ConvParams) -> Result<Tensor3> {
    p.check_input(input)?;
    let a = input.anchor();
    if a.height() < p.kernel || a.width() < p.kernel {
        return Err(underflow("conv (no padding)", a, p.kernel));
    }
    let half = (p.kernel / 2) as i64;
    let out_rect = a.expanded(-half)?;
    Ok(conv_over(p, input, out_rect, false))
}

/// Same-size stride-1 cross-correlation reading zeros outside the anchor.
/// Not consistent: boundary outputs change when the input is extended.
pub fn conv_zero_pad(input: &Tensor3, p: &ConvParams) -> Result<Tensor3> {
    p.check_input(input)?;
    Ok(conv_over(p, input, input.anchor(), true))
}

pub fn conv1x1(input: &Tensor3, p: &ConvParams) -> Result<Tensor3> {
    if p.kernel != 1 {
        return Err(Error::Parameter(format!(
            "conv1x1 given a {0}x{0} kernel",
            p.kernel
        )));
    }
    conv_no_pad(input, p)
}

/// Replicates each pixel into a `scale x scale` block.
pub fn nearest_up(input: &Tensor3, scale: usize) -> Result<Tensor3> {
    if scale < 2 {
        return Err(Error::Parameter(format!(
            "nearest upsampling scale must be >= 2, got {scale}"
        )));
    }
    let a = input.anchor();
    let u = scale as i64;
    let out = Rect::new(u * a.row_start, u * a.row_end, u * a.col_start, u * a.col_end)?;
    let ch = input.channels();
    let mut data = Vec::with_capacity(out.area() * ch);
    for (i, j) in out.points() {
        data.extend_from_slice(input.pixel(i.div_euclid(u), j.div_euclid(u)));
    }
    Tensor3::from_vec(out, ch, data)
}

/// Interpolation weights `(near, far)` of the two source rows for an output
/// phase: phase 0 leans on the upper/left neighbour.
#[inline]
fn bilinear_weights(phase: i64) -> (f64, f64) {
    if phase == 0 {
        (0.75, 0.25)
    } else {
        (0.25, 0.75)
    }
}

/// Scale-2 bilinear upsampling with the one-pixel boundary cropped away.
///
/// An `H x W` input anchored at `[a, a+H) x [c, c+W)` becomes
/// `[2a, 2a+2H-2) x [2c, 2c+2W-2)`; output `(2h+p, 2w+q)` blends input pixels
/// `h, h+1` and `w, w+1`.
pub fn bilinear_up_crop(input: &Tensor3) -> Result<Tensor3> {
    let a = input.anchor();
    if a.height() < 2 || a.width() < 2 {
        return Err(underflow("bilinear upsampling", a, 2));
    }
    let out = Rect::new(
        2 * a.row_start,
        2 * a.row_end - 2,
        2 * a.col_start,
        2 * a.col_end - 2,
    )?;
    let ch = input.channels();
    let mut data = Vec::with_capacity(out.area() * ch);
    for (i, j) in out.points() {
        let (h, p) = (i.div_euclid(2), i.rem_euclid(2));
        let (w, q) = (j.div_euclid(2), j.rem_euclid(2));
        let (r0, r1) = bilinear_weights(p);
        let (c0, c1) = bilinear_weights(q);
        let z00 = input.pixel(h, w);
        let z01 = input.pixel(h, w + 1);
        let z10 = input.pixel(h + 1, w);
        let z11 = input.pixel(h + 1, w + 1);
        for c in 0..ch {
            let top = c0 * z00[c] + c1 * z01[c];
            let bottom = c0 * z10[c] + c1 * z11[c];
            data.push(r0 * top + r1 * bottom);
        }
    }
    Tensor3::from_vec(out, ch, data)
}

pub fn activation(input: &Tensor3, kind: ActivationKind) -> Tensor3 {
    input.map(|x| kind.apply(x))
}

#[inline]
fn normalize_pixel(px: &[f64], out: &mut [f64]) {
    let n = px.len() as f64;
    let mean = px.iter().sum::<f64>() / n;
    let var = px.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let denom = (var + PIXEL_NORM_EPS).sqrt();
    for (o, v) in out.iter_mut().zip(px) {
        *o = (v - mean) / denom;
    }
}

/// Per-pixel standardization across channels (population variance).
pub fn pixel_norm(input: &Tensor3) -> Tensor3 {
    let ch = input.channels();
    let mut data = vec![0.0; input.data().len()];
    for (src, dst) in input.data().chunks_exact(ch).zip(data.chunks_exact_mut(ch)) {
        normalize_pixel(src, dst);
    }
    Tensor3::from_vec(input.anchor(), ch, data).expect("same shape")
}

/// `beta ⊙ PixelNorm(h + z·w) + gamma`, with one noise scalar per pixel drawn
/// from `field` at the pixel's global coordinates.
pub fn noisy_ada_pix_norm(
    input: &Tensor3,
    params: &AdaPixNormParams,
    field: &LatentField,
) -> Result<Tensor3> {
    let ch = input.channels();
    if params.beta.len() != ch || params.gamma.len() != ch || params.noise_weight.len() != ch {
        return Err(Error::Shape(format!(
            "ada pixel norm vectors ({}, {}, {}) do not match {ch} input channels",
            params.beta.len(),
            params.gamma.len(),
            params.noise_weight.len()
        )));
    }
    if field.channels != 1 {
        return Err(Error::Shape(format!(
            "noise field must have 1 channel, has {}",
            field.channels
        )));
    }
    let mut data = vec![0.0; input.data().len()];
    let mut noisy = vec![0.0; ch];
    for ((i, j), dst) in input.anchor().points().zip(data.chunks_exact_mut(ch)) {
        let z = field.sample_at(i, j, 0)?;
        for ((n, &h), &w) in noisy.iter_mut().zip(input.pixel(i, j)).zip(&params.noise_weight) {
            *n = h + z * w;
        }
        normalize_pixel(&noisy, dst);
        for ((o, &b), &g) in dst.iter_mut().zip(&params.beta).zip(&params.gamma) {
            *o = b * *o + g;
        }
    }
    Tensor3::from_vec(input.anchor(), ch, data)
}

/// Applies one layer. `seed` selects the noise fields of Noisy AdaPixNorm.
pub fn apply(spec: &LayerSpec, params: &LayerParams, input: &Tensor3, seed: u64) -> Result<Tensor3> {
    match (spec, params) {
        (LayerSpec::ConvNoPad { .. }, LayerParams::Conv(p)) => conv_no_pad(input, p),
        (LayerSpec::ConvZeroPad { .. }, LayerParams::Conv(p)) => conv_zero_pad(input, p),
        (LayerSpec::Conv1x1 { .. }, LayerParams::Conv(p)) => conv1x1(input, p),
        (LayerSpec::NearestUp { scale }, _) => nearest_up(input, *scale),
        (LayerSpec::BilinearUpCrop, _) => bilinear_up_crop(input),
        (LayerSpec::Activation { function }, _) => Ok(activation(input, *function)),
        (LayerSpec::PixelNorm, _) => Ok(pixel_norm(input)),
        (LayerSpec::NoisyAdaPixNorm { site_id, .. }, LayerParams::AdaPixNorm(p)) => {
            noisy_ada_pix_norm(input, p, &LatentField::new(seed, *site_id, 1))
        }
        (spec, _) => Err(Error::Contract(format!(
            "layer `{spec}` is missing its parameters"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(anchor: Rect, values: &[f64]) -> Tensor3 {
        Tensor3::from_vec(anchor, 1, values.to_vec()).unwrap()
    }

    fn ones_kernel() -> ConvParams {
        ConvParams::new(3, 1, 1, vec![1.0; 9], vec![0.0]).unwrap()
    }

    #[test]
    fn conv_identity_kernel_crops_interior() {
        let r = Rect::sized(5, 5).unwrap();
        let t = Tensor3::from_fn(r, 2, |i, j, c| (i * 10 + j) as f64 + c as f64 * 100.0);
        let out = conv_no_pad(&t, &ConvParams::identity(3, 2).unwrap()).unwrap();
        assert_eq!(out.anchor(), Rect::new(1, 4, 1, 4).unwrap());
        assert_eq!(out, t.subpatch(out.anchor()).unwrap());
    }

    #[test]
    fn conv_all_ones() {
        let t = Tensor3::filled(Rect::sized(5, 5).unwrap(), 1, 1.0);
        let out = conv_no_pad(&t, &ones_kernel()).unwrap();
        assert!(out.data().iter().all(|&v| v == 9.0));
    }

    #[test]
    fn conv_block5_shape() {
        let p = ConvParams::new(3, 4, 2, vec![0.01; 72], vec![0.0; 2]).unwrap();
        let t = Tensor3::zeros(Rect::sized(36, 36).unwrap(), 4);
        let out = conv_no_pad(&t, &p).unwrap();
        assert_eq!((out.height(), out.width(), out.channels()), (34, 34, 2));
    }

    #[test]
    fn conv_underflow() {
        let t = Tensor3::zeros(Rect::sized(2, 5).unwrap(), 1);
        assert!(matches!(
            conv_no_pad(&t, &ones_kernel()),
            Err(Error::Underflow { .. })
        ));
    }

    #[test]
    fn conv_respects_weight_layout() {
        // one tap at (kernel_row 0, kernel_col 2) from input channel 1 to output channel 0
        let mut w = vec![0.0; 2 * 2 * 9];
        let (o, i, kr, kc) = (0, 1, 0, 2);
        w[((o * 2 + i) * 3 + kr) * 3 + kc] = 2.0;
        let p = ConvParams::new(3, 2, 2, w, vec![0.5, 0.0]).unwrap();
        let t = Tensor3::from_fn(Rect::sized(3, 3).unwrap(), 2, |i, j, c| {
            (i * 3 + j) as f64 + 10.0 * c as f64
        });
        let out = conv_no_pad(&t, &p).unwrap();
        // output (1,1) reads input (0,2) channel 1 = 2 + 10
        assert_eq!(out.get(1, 1, 0), 2.0 * 12.0 + 0.5);
        assert_eq!(out.get(1, 1, 1), 0.0);
    }

    #[test]
    fn zero_pad_identity() {
        let t = Tensor3::from_fn(Rect::sized(4, 3).unwrap(), 1, |i, j, _| (i - j) as f64);
        assert_eq!(conv_zero_pad(&t, &ConvParams::identity(3, 1).unwrap()).unwrap(), t);
    }

    #[test]
    fn zero_pad_all_ones() {
        let t = Tensor3::filled(Rect::sized(3, 3).unwrap(), 1, 1.0);
        let out = conv_zero_pad(&t, &ones_kernel()).unwrap();
        assert_eq!(out.data(), &[4.0, 6.0, 4.0, 6.0, 9.0, 6.0, 4.0, 6.0, 4.0]);
    }

    #[test]
    fn zero_pad_is_inconsistent() {
        let small = Tensor3::filled(Rect::sized(3, 3).unwrap(), 1, 1.0);
        let big = Tensor3::filled(Rect::new(-1, 4, -1, 4).unwrap(), 1, 1.0);
        let cropped = conv_zero_pad(&big, &ones_kernel())
            .unwrap()
            .subpatch(small.anchor())
            .unwrap();
        assert!(cropped.data().iter().all(|&v| v == 9.0));
        let direct = conv_zero_pad(&small, &ones_kernel()).unwrap();
        assert!(crate::tensor::max_abs_diff(&cropped, &direct).unwrap() > 0.0);
    }

    #[test]
    fn nearest_blocks() {
        let t = grid(Rect::sized(2, 2).unwrap(), &[1.0, 2.0, 3.0, 4.0]);
        let out = nearest_up(&t, 2).unwrap();
        assert_eq!(
            out.data(),
            &[1., 1., 2., 2., 1., 1., 2., 2., 3., 3., 4., 4., 3., 3., 4., 4.]
        );
    }

    #[test]
    fn nearest_anchor_and_constant() {
        let t = Tensor3::filled(Rect::new(-3, 2, 5, 7).unwrap(), 2, 0.25);
        let out = nearest_up(&t, 2).unwrap();
        assert_eq!(out.anchor(), Rect::new(-6, 4, 10, 14).unwrap());
        assert!(out.data().iter().all(|&v| v == 0.25));
        assert!(nearest_up(&t, 1).is_err());
        assert_eq!(nearest_up(&t, 3).unwrap().anchor(), Rect::new(-9, 6, 15, 21).unwrap());
    }

    #[test]
    fn bilinear_single_cell() {
        let t = grid(Rect::sized(2, 2).unwrap(), &[16.0, 0.0, 0.0, 0.0]);
        let out = bilinear_up_crop(&t).unwrap();
        assert_eq!(out.anchor(), Rect::sized(2, 2).unwrap());
        assert_eq!(out.data(), &[9.0, 3.0, 3.0, 1.0]);
    }

    #[test]
    fn bilinear_shape_and_constant() {
        let t = Tensor3::filled(Rect::new(3, 9, -2, 4).unwrap(), 3, -0.7);
        let out = bilinear_up_crop(&t).unwrap();
        assert_eq!((out.height(), out.width()), (10, 10));
        assert_eq!(out.anchor(), Rect::new(6, 16, -4, 6).unwrap());
        assert!(out.data().iter().all(|&v| (v + 0.7).abs() < 1e-15));
    }

    #[test]
    fn bilinear_underflow() {
        let t = Tensor3::zeros(Rect::sized(1, 4).unwrap(), 1);
        assert!(matches!(bilinear_up_crop(&t), Err(Error::Underflow { .. })));
    }

    #[test]
    fn activations() {
        let t = grid(Rect::sized(1, 3).unwrap(), &[-1.0, 0.0, 2.0]);
        assert_eq!(activation(&t, ActivationKind::Relu).data(), &[0.0, 0.0, 2.0]);
        assert_eq!(ActivationKind::Tanh.apply(0.0), 0.0);
        assert_eq!(ActivationKind::LeakyRelu.apply(-5.0), -1.0);
        assert_eq!(ActivationKind::Sigmoid.apply(0.0), 0.5);
        assert!("swish".parse::<ActivationKind>().is_err());
        assert_eq!("leaky_relu".parse::<ActivationKind>().unwrap(), ActivationKind::LeakyRelu);
    }

    #[test]
    fn pixel_norm_three_channels() {
        let t = Tensor3::from_vec(Rect::sized(1, 1).unwrap(), 3, vec![1.0, 2.0, 3.0]).unwrap();
        let out = pixel_norm(&t);
        // (x - 2) / sqrt(2/3 + eps)
        let expected = [-1.224_744_871, 0.0, 1.224_744_871];
        for (o, e) in out.data().iter().zip(expected) {
            assert!((o - e).abs() < 1e-8, "{o} vs {e}");
        }
    }

    #[test]
    fn pixel_norm_degenerate_and_moments() {
        let flat = Tensor3::filled(Rect::sized(2, 2).unwrap(), 4, 3.5);
        assert!(pixel_norm(&flat).data().iter().all(|v| v.abs() < 1e-12));

        let t = Tensor3::from_fn(Rect::sized(3, 3).unwrap(), 7, |i, j, c| {
            ((i * 13 + j * 5 + c as i64 * 3) % 11) as f64 - 4.0
        });
        let out = pixel_norm(&t);
        for px in out.data().chunks_exact(7) {
            let mean = px.iter().sum::<f64>() / 7.0;
            let var = px.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 7.0;
            assert!(mean.abs() < 1e-9);
            assert!((var - 1.0).abs() < 1e-7, "var {var}");
        }
    }

    #[test]
    fn napn_zero_noise_reduces_to_affine_pixel_norm() {
        let t = Tensor3::from_fn(Rect::new(-2, 2, 3, 6).unwrap(), 3, |i, j, c| {
            (i * 3 - j + c as i64 * c as i64) as f64
        });
        let params = AdaPixNormParams {
            beta: vec![2.0, -1.0, 0.5],
            gamma: vec![0.1, 0.2, 0.3],
            noise_weight: vec![0.0; 3],
            site_id: 1,
        };
        let out = noisy_ada_pix_norm(&t, &params, &LatentField::new(3, 1, 1)).unwrap();
        let pn = pixel_norm(&t);
        for (k, (o, p)) in out.data().iter().zip(pn.data()).enumerate() {
            let c = k % 3;
            assert_eq!(*o, params.beta[c] * p + params.gamma[c]);
        }
    }

    #[test]
    fn napn_constant_pixel_neutral() {
        let t = Tensor3::filled(Rect::sized(2, 3).unwrap(), 4, 1.25);
        let out =
            noisy_ada_pix_norm(&t, &AdaPixNormParams::neutral(4, 0), &LatentField::new(1, 0, 1))
                .unwrap();
        assert!(out.data().iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn napn_deterministic_and_shape_checked() {
        let t = Tensor3::from_fn(Rect::sized(3, 3).unwrap(), 2, |i, j, c| (i + j) as f64 - c as f64);
        let params = AdaPixNormParams {
            beta: vec![1.0, 1.0],
            gamma: vec![0.0, 0.0],
            noise_weight: vec![0.3, -0.8],
            site_id: 2,
        };
        let f = LatentField::new(77, 2, 1);
        let a = noisy_ada_pix_norm(&t, &params, &f).unwrap();
        let b = noisy_ada_pix_norm(&t, &params, &f).unwrap();
        assert_eq!(a, b);
        let bad = AdaPixNormParams::neutral(3, 2);
        assert!(matches!(noisy_ada_pix_norm(&t, &bad, &f), Err(Error::Shape(_))));
    }

    #[test]
    fn layer_spec_validation() {
        assert!(LayerSpec::ConvNoPad {
            kernel: 2,
            in_channels: 1,
            out_channels: 1
        }
        .validate()
        .is_err());
        assert!(LayerSpec::NearestUp { scale: 1 }.validate().is_err());
        assert!(LayerSpec::NearestUp { scale: 3 }.validate().is_ok());
    }
}

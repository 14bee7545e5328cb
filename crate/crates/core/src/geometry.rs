//! Index-set algebra for layer stacks: which output rect a latent rect
//! produces, which latent rect an output rect needs, and the stationarity
//! period a stack induces.

use crate::error::{Error, Result};
use crate::layers::LayerSpec;
use crate::network::{MultiScaleSpec, NetworkSpec};
use crate::tensor::Rect;

fn too_small(layer: &LayerSpec, input: Rect, min: usize) -> Error {
    Error::Underflow {
        layer: layer.to_string(),
        got: format!("{}x{}", input.height(), input.width()),
        required: format!("{min}x{min}"),
    }
}

/// Output anchor of `layer` for an input anchored at `input`.
pub fn forward_rect(layer: &LayerSpec, input: Rect) -> Result<Rect> {
    match *layer {
        LayerSpec::ConvNoPad { kernel, .. } => {
            if input.height() < kernel || input.width() < kernel {
                return Err(too_small(layer, input, kernel));
            }
            input.expanded(-((kernel / 2) as i64))
        }
        LayerSpec::NearestUp { scale } => {
            let u = scale as i64;
            Rect::new(
                u * input.row_start,
                u * input.row_end,
                u * input.col_start,
                u * input.col_end,
            )
        }
        LayerSpec::BilinearUpCrop => {
            if input.height() < 2 || input.width() < 2 {
                return Err(too_small(layer, input, 2));
            }
            Rect::new(
                2 * input.row_start,
                2 * input.row_end - 2,
                2 * input.col_start,
                2 * input.col_end - 2,
            )
        }
        LayerSpec::ConvZeroPad { .. }
        | LayerSpec::Conv1x1 { .. }
        | LayerSpec::Activation { .. }
        | LayerSpec::PixelNorm
        | LayerSpec::NoisyAdaPixNorm { .. } => Ok(input),
    }
}

/// Minimal input anchor whose forward output covers `output`.
pub fn backward_rect(layer: &LayerSpec, output: Rect) -> Rect {
    let span = |lo: i64, hi: i64| -> (i64, i64) {
        match *layer {
            LayerSpec::ConvNoPad { kernel, .. } => {
                let h = (kernel / 2) as i64;
                (lo - h, hi + h)
            }
            LayerSpec::NearestUp { scale } => {
                let u = scale as i64;
                (lo.div_euclid(u), hi.div_euclid(u) + (hi.rem_euclid(u) != 0) as i64)
            }
            LayerSpec::BilinearUpCrop => (lo.div_euclid(2), (hi - 1).div_euclid(2) + 2),
            _ => (lo, hi),
        }
    };
    let (r0, r1) = span(output.row_start, output.row_end);
    let (c0, c1) = span(output.col_start, output.col_end);
    Rect {
        row_start: r0,
        row_end: r1,
        col_start: c0,
        col_end: c1,
    }
}

/// Anchors after each layer; element `k` is the output of `layers[k]`.
pub fn forward_trace(layers: &[LayerSpec], input: Rect) -> Result<Vec<Rect>> {
    let mut rect = input;
    let mut out = Vec::with_capacity(layers.len());
    for (k, layer) in layers.iter().enumerate() {
        rect = forward_rect(layer, rect).map_err(|e| match e {
            Error::Underflow {
                layer: name,
                got,
                required,
            } => Error::Underflow {
                layer: format!("layer {k} ({name})"),
                got,
                required,
            },
            other => other,
        })?;
        out.push(rect);
    }
    Ok(out)
}

pub fn forward_stack(layers: &[LayerSpec], input: Rect) -> Result<Rect> {
    Ok(forward_trace(layers, input)?.last().copied().unwrap_or(input))
}

/// Required anchors at every layer boundary: element `k` is the minimal input
/// to `layers[k]`, the last element is `output` itself.
pub fn backward_trace(layers: &[LayerSpec], output: Rect) -> Vec<Rect> {
    let mut rects = vec![output; layers.len() + 1];
    for k in (0..layers.len()).rev() {
        rects[k] = backward_rect(&layers[k], rects[k + 1]);
    }
    rects
}

pub fn backward_stack(layers: &[LayerSpec], output: Rect) -> Rect {
    backward_trace(layers, output)[0]
}

/// Latent rows two neighbouring tiles must share so the padding-free
/// interiors of the inconsistent `{nearest up, zero-padded conv}` stack touch.
pub fn min_latent_overlap(blocks: u32) -> Result<usize> {
    match blocks {
        0 => Err(Error::Parameter(
            "latent overlap is defined for at least one upsampling block".into(),
        )),
        1 => Ok(1),
        _ => Ok(2),
    }
}

/// Smallest square latent side the stack accepts.
pub fn min_input_side(layers: &[LayerSpec]) -> usize {
    (1..)
        .find(|&n| forward_stack(layers, Rect::sized(n, n).expect("n >= 1")).is_ok())
        .expect("some finite input is always feasible")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeometrySummary {
    /// Number of scale-2 upsampling layers.
    pub upsample_count: u32,
    /// Image-space footprint of one latent pixel.
    pub model_patch: (usize, usize),
    /// Largest latent footprint of a single output pixel.
    pub pixel_footprint: (usize, usize),
    /// `ceil((footprint - 1) / 2)`: latent rows needed on each side of a pixel.
    pub receptive_margin: (usize, usize),
    /// Latent side needed for one period-aligned model patch.
    pub latent_per_model_patch: (usize, usize),
    pub stationarity_period: (usize, usize),
    pub min_training_patch: (usize, usize),
    pub dependence_range: (usize, usize),
    /// Smallest feasible square latent input.
    pub min_input: usize,
    /// Output side produced by `min_input`.
    pub min_output: usize,
}

fn check_consistent(layers: &[LayerSpec]) -> Result<()> {
    if let Some((index, layer)) = layers.iter().enumerate().find(|(_, l)| !l.is_consistent()) {
        return Err(Error::Inconsistent {
            index,
            layer: layer.to_string(),
            reason: "reads zero padding, so no valid summary exists".into(),
        });
    }
    Ok(())
}

/// Geometry of a consistent stack of layers.
pub fn summarize_layers(layers: &[LayerSpec]) -> Result<GeometrySummary> {
    check_consistent(layers)?;
    let period: usize = layers.iter().map(LayerSpec::scale).product();
    let upsample_count = layers.iter().filter(|l| l.scale() == 2).count() as u32;
    let p = period as i64;

    let mut footprint = (0, 0);
    for phase in 0..p {
        let r = backward_stack(layers, Rect::new(phase, phase + 1, phase, phase + 1)?);
        footprint.0 = footprint.0.max(r.height());
        footprint.1 = footprint.1.max(r.width());
    }
    let latent_per_patch = (0..p)
        .map(|o| backward_stack(layers, Rect::new(o, o + p, o, o + p).expect("p >= 1")))
        .map(|r| (r.height(), r.width()))
        .min()
        .expect("period >= 1");
    let min_input = min_input_side(layers);
    let min_output = forward_stack(layers, Rect::sized(min_input, min_input)?)?.height();

    Ok(GeometrySummary {
        upsample_count,
        model_patch: (period, period),
        pixel_footprint: footprint,
        receptive_margin: (footprint.0 / 2, footprint.1 / 2),
        latent_per_model_patch: latent_per_patch,
        stationarity_period: (period, period),
        min_training_patch: (2 * period, 2 * period),
        dependence_range: (period * latent_per_patch.0, period * latent_per_patch.1),
        min_input,
        min_output,
    })
}

pub fn summarize(net: &NetworkSpec) -> Result<GeometrySummary> {
    summarize_layers(&net.layers)
}

/// Per-network summaries plus the summary of the whole composed stack.
pub fn summarize_multiscale(ms: &MultiScaleSpec) -> Result<(Vec<GeometrySummary>, GeometrySummary)> {
    let mut parts = vec![summarize(&ms.extension)?];
    for up in &ms.upscalers {
        parts.push(summarize(up)?);
    }
    let composed = summarize_layers(&ms.composed_layers())?;
    Ok((parts, composed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layers::ActivationKind;

    fn conv3(c: usize) -> LayerSpec {
        LayerSpec::ConvNoPad {
            kernel: 3,
            in_channels: c,
            out_channels: c,
        }
    }

    #[test]
    fn conv_forward_and_backward() {
        let r = Rect::sized(6, 6).unwrap();
        assert_eq!(forward_rect(&conv3(1), r).unwrap(), Rect::new(1, 5, 1, 5).unwrap());
        assert_eq!(
            backward_rect(&conv3(1), Rect::new(1, 5, 1, 5).unwrap()),
            Rect::sized(6, 6).unwrap()
        );
        let err = forward_rect(&conv3(1), Rect::sized(2, 8).unwrap()).unwrap_err();
        assert!(err.to_string().contains("3x3"), "{err}");
    }

    #[test]
    fn bilinear_backward_inverts_shape_rule() {
        let b = backward_rect(&LayerSpec::BilinearUpCrop, Rect::sized(10, 10).unwrap());
        assert_eq!(b, Rect::sized(6, 6).unwrap());
    }

    #[test]
    fn nearest_backward() {
        let up = LayerSpec::NearestUp { scale: 2 };
        assert_eq!(
            backward_rect(&up, Rect::new(3, 4, 2, 3).unwrap()),
            Rect::new(1, 2, 1, 2).unwrap()
        );
        assert_eq!(
            backward_rect(&up, Rect::new(-3, 5, 0, 2).unwrap()),
            Rect::new(-2, 3, 0, 1).unwrap()
        );
    }

    #[test]
    fn overlap_table() {
        assert_eq!(min_latent_overlap(1).unwrap(), 1);
        assert_eq!(min_latent_overlap(2).unwrap(), 2);
        assert_eq!(min_latent_overlap(9).unwrap(), 2);
        assert!(min_latent_overlap(0).is_err());
    }

    #[test]
    fn period_of_simple_stacks() {
        let flat = [conv3(2), LayerSpec::Activation { function: ActivationKind::Relu }];
        let s = summarize_layers(&flat).unwrap();
        assert_eq!(s.stationarity_period, (1, 1));
        assert_eq!(s.upsample_count, 0);
        let s = summarize_layers(&[LayerSpec::NearestUp { scale: 2 }]).unwrap();
        assert_eq!(s.stationarity_period, (2, 2));
        assert_eq!(s.upsample_count, 1);
        assert_eq!(s.min_training_patch, (4, 4));
    }

    #[test]
    fn summary_rejects_zero_padding() {
        let layers = [
            conv3(1),
            LayerSpec::ConvZeroPad {
                kernel: 3,
                in_channels: 1,
                out_channels: 1,
            },
        ];
        match summarize_layers(&layers) {
            Err(Error::Inconsistent { index, layer, .. }) => {
                assert_eq!(index, 1);
                assert!(layer.contains("zero padding"));
            }
            other => panic!("expected inconsistency, got {other:?}"),
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn any_layer() -> impl Strategy<Value = LayerSpec> {
            prop_oneof![
                (0usize..3).prop_map(|h| LayerSpec::ConvNoPad {
                    kernel: 2 * h + 1,
                    in_channels: 1,
                    out_channels: 1
                }),
                (2usize..5).prop_map(|scale| LayerSpec::NearestUp { scale }),
                Just(LayerSpec::BilinearUpCrop),
                Just(LayerSpec::PixelNorm),
            ]
        }

        fn any_rect() -> impl Strategy<Value = Rect> {
            (-20i64..20, -20i64..20, 1usize..12, 1usize..12)
                .prop_map(|(r, c, h, w)| Rect::with_size(r, c, h, w).unwrap())
        }

        proptest! {
            #[test]
            fn backward_is_minimal_cover(layer in any_layer(), out in any_rect()) {
                let back = backward_rect(&layer, out);
                let fwd = forward_rect(&layer, back).unwrap();
                prop_assert!(fwd.contains(&out), "{} -> {} misses {}", back, fwd, out);
                // shrinking any side either breaks feasibility or coverage
                let shrunk = [
                    Rect::new(back.row_start + 1, back.row_end, back.col_start, back.col_end),
                    Rect::new(back.row_start, back.row_end - 1, back.col_start, back.col_end),
                    Rect::new(back.row_start, back.row_end, back.col_start + 1, back.col_end),
                    Rect::new(back.row_start, back.row_end, back.col_start, back.col_end - 1),
                ];
                for s in shrunk.into_iter().flatten() {
                    if let Ok(f) = forward_rect(&layer, s) {
                        prop_assert!(!f.contains(&out), "{} still covers {}", s, out);
                    }
                }
            }

            #[test]
            fn stack_backward_composes(layers in proptest::collection::vec(any_layer(), 1..5), out in any_rect()) {
                let mut r = out;
                for l in layers.iter().rev() {
                    r = backward_rect(l, r);
                }
                prop_assert_eq!(backward_stack(&layers, out), r);
                let fwd = forward_stack(&layers, r).unwrap();
                prop_assert!(fwd.contains(&out));
            }
        }
    }
}

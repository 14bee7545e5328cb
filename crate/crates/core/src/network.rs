//! Generator specifications, weight binding and forward evaluation.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry;
use crate::latent::LatentField;
use crate::layers::{self, ActivationKind, AdaPixNormParams, ConvParams, LayerParams, LayerSpec};
use crate::tensor::{Rect, Tensor3};
use crate::weights::WeightStore;

/// Site id of the input latent process; Noisy AdaPixNorm sites use 1, 2, ...
pub const INPUT_SITE: u32 = 0;

/// 1x1 convolution to image channels followed by tanh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageHead {
    pub in_channels: usize,
    pub out_channels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub name: String,
    pub input_channels: usize,
    pub layers: Vec<LayerSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head: Option<ImageHead>,
}

impl NetworkSpec {
    /// Checks channel chaining, layer parameters and site-id uniqueness.
    pub fn validate(&self) -> Result<()> {
        if self.input_channels == 0 {
            return Err(Error::Spec(format!("{}: input_channels must be positive", self.name)));
        }
        let mut channels = self.input_channels;
        let mut sites = HashSet::new();
        for (k, layer) in self.layers.iter().enumerate() {
            layer
                .validate()
                .map_err(|e| Error::Spec(format!("{}: layer {k}: {e}", self.name)))?;
            if let Some(req) = layer.required_in_channels() {
                if req != channels {
                    return Err(Error::Spec(format!(
                        "{}: layer {k} ({layer}) expects {req} channels but receives {channels}",
                        self.name
                    )));
                }
            }
            if let LayerSpec::NoisyAdaPixNorm { site_id, .. } = layer {
                if *site_id == INPUT_SITE {
                    return Err(Error::Spec(format!(
                        "{}: layer {k} uses site {INPUT_SITE}, reserved for the input latent",
                        self.name
                    )));
                }
                if !sites.insert(*site_id) {
                    return Err(Error::Spec(format!(
                        "{}: noise site {site_id} used twice",
                        self.name
                    )));
                }
            }
            channels = layer.out_channels(channels);
        }
        if let Some(head) = &self.head {
            if head.in_channels != channels {
                return Err(Error::Spec(format!(
                    "{}: head expects {} channels but features have {channels}",
                    self.name, head.in_channels
                )));
            }
        }
        Ok(())
    }

    pub fn feature_channels(&self) -> usize {
        self.layers
            .iter()
            .fold(self.input_channels, |c, l| l.out_channels(c))
    }

    pub fn output_channels(&self) -> usize {
        self.head
            .map(|h| h.out_channels)
            .unwrap_or_else(|| self.feature_channels())
    }

    pub fn is_consistent(&self) -> bool {
        self.layers.iter().all(LayerSpec::is_consistent)
    }

    /// Copy with the convolution at `index` switched to zero padding.
    pub fn with_zero_padding_at(&self, index: usize) -> Result<NetworkSpec> {
        let mut out = self.clone();
        match out.layers.get(index) {
            Some(&LayerSpec::ConvNoPad {
                kernel,
                in_channels,
                out_channels,
            }) => {
                out.layers[index] = LayerSpec::ConvZeroPad {
                    kernel,
                    in_channels,
                    out_channels,
                };
                out.name = format!("{}-zeropad{index}", self.name);
                Ok(out)
            }
            _ => Err(Error::Parameter(format!(
                "layer {index} of {} is not an unpadded convolution",
                self.name
            ))),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<NetworkSpec> {
        let spec: NetworkSpec = toml::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("network specs always serialize")
    }

    pub fn load(path: &Path) -> Result<NetworkSpec> {
        NetworkSpec::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

/// Extension network followed by upscalers fed with pre-image features.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiScaleSpec {
    pub extension: NetworkSpec,
    pub upscalers: Vec<NetworkSpec>,
}

impl MultiScaleSpec {
    pub fn new(extension: NetworkSpec, upscalers: Vec<NetworkSpec>) -> Result<MultiScaleSpec> {
        extension.validate()?;
        let mut channels = extension.feature_channels();
        for up in &upscalers {
            up.validate()?;
            if up.input_channels != channels {
                return Err(Error::Spec(format!(
                    "{} takes {} channels but the previous network emits {channels} features",
                    up.name, up.input_channels
                )));
            }
            channels = up.feature_channels();
        }
        Ok(MultiScaleSpec {
            extension,
            upscalers,
        })
    }

    /// All feature layers of every network in order.
    pub fn composed_layers(&self) -> Vec<LayerSpec> {
        self.extension
            .layers
            .iter()
            .chain(self.upscalers.iter().flat_map(|u| u.layers.iter()))
            .copied()
            .collect()
    }

    /// Image rect of every scale for a latent rect.
    pub fn image_rects(&self, latent: Rect) -> Result<Vec<Rect>> {
        let mut rect = geometry::forward_stack(&self.extension.layers, latent)?;
        let mut out = vec![rect];
        for up in &self.upscalers {
            rect = geometry::forward_stack(&up.layers, rect)?;
            out.push(rect);
        }
        Ok(out)
    }
}

fn napn(channels: usize, site_id: u32) -> LayerSpec {
    LayerSpec::NoisyAdaPixNorm { channels, site_id }
}

fn conv3(in_channels: usize, out_channels: usize) -> LayerSpec {
    LayerSpec::ConvNoPad {
        kernel: 3,
        in_channels,
        out_channels,
    }
}

const RELU: LayerSpec = LayerSpec::Activation {
    function: ActivationKind::Relu,
};

/// The six-block extension network with configurable widths.
pub fn g0_with_widths(width: usize, pre_image: usize) -> NetworkSpec {
    let mut layers = Vec::new();
    for site in 1..=4 {
        layers.extend([napn(width, site), LayerSpec::BilinearUpCrop, conv3(width, width), RELU]);
    }
    layers.extend([napn(width, 5), conv3(width, pre_image), RELU]);
    layers.extend([
        napn(pre_image, 6),
        LayerSpec::BilinearUpCrop,
        conv3(pre_image, pre_image),
        RELU,
    ]);
    NetworkSpec {
        name: if (width, pre_image) == (128, 64) {
            "g0".into()
        } else {
            format!("g0-{width}-{pre_image}")
        },
        input_channels: width,
        layers,
        head: Some(ImageHead {
            in_channels: pre_image,
            out_channels: 3,
        }),
    }
}

/// Extension network G0: `(6, 6, 128)` latent to `(64, 64, 3)` image.
pub fn reference_g0() -> NetworkSpec {
    g0_with_widths(128, 64)
}

/// Upscaling network: bilinear up, conv3x3, relu on 64-channel features.
pub fn reference_upscaler() -> NetworkSpec {
    upscaler_with_width(64)
}

pub fn upscaler_with_width(width: usize) -> NetworkSpec {
    NetworkSpec {
        name: "upscaler".into(),
        input_channels: width,
        layers: vec![LayerSpec::BilinearUpCrop, conv3(width, width), RELU],
        head: Some(ImageHead {
            in_channels: width,
            out_channels: 3,
        }),
    }
}

/// `blocks` repetitions of `{nearest up x2, zero-padded conv3x3, relu}`: the
/// inconsistent baseline whose tiles must be cropped before stitching.
pub fn padded_nearest_stack(blocks: u32, latent_channels: usize, width: usize) -> NetworkSpec {
    let mut layers = Vec::new();
    let mut c = latent_channels;
    for _ in 0..blocks {
        layers.extend([
            LayerSpec::NearestUp { scale: 2 },
            LayerSpec::ConvZeroPad {
                kernel: 3,
                in_channels: c,
                out_channels: width,
            },
            RELU,
        ]);
        c = width;
    }
    NetworkSpec {
        name: format!("padded-nearest-k{blocks}"),
        input_channels: latent_channels,
        layers,
        head: Some(ImageHead {
            in_channels: c,
            out_channels: 3,
        }),
    }
}

/// Result of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardOutput {
    /// Pre-image features (output of the last layer).
    pub features: Tensor3,
    /// Tanh image, when the network has a head.
    pub image: Option<Tensor3>,
}

impl ForwardOutput {
    /// The image if present, else the features.
    pub fn output(&self) -> &Tensor3 {
        self.image.as_ref().unwrap_or(&self.features)
    }

    pub fn into_output(self) -> Tensor3 {
        self.image.unwrap_or(self.features)
    }
}

/// A network specification with bound weights.
#[derive(Debug, Clone)]
pub struct Generator {
    spec: NetworkSpec,
    params: Vec<LayerParams>,
    head: Option<ConvParams>,
}

fn expect_len(name: &str, store: &WeightStore, dims: &[usize]) -> Result<Vec<f64>> {
    let t = store
        .get(name)
        .ok_or_else(|| Error::MissingTensor(name.to_string()))?;
    if t.shape != dims {
        return Err(Error::Shape(format!(
            "tensor `{name}` has shape {:?}, expected {dims:?}",
            t.shape
        )));
    }
    Ok(t.values.iter().map(|&v| v as f64).collect())
}

/// Names and shapes of every weight tensor the spec needs.
pub fn weight_layout(spec: &NetworkSpec) -> Vec<(String, Vec<usize>)> {
    let mut out = Vec::new();
    for (k, layer) in spec.layers.iter().enumerate() {
        match *layer {
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
                out.push((format!("layers.{k:02}.weight"), vec![out_channels, in_channels, kernel, kernel]));
                out.push((format!("layers.{k:02}.bias"), vec![out_channels]));
            }
            LayerSpec::Conv1x1 {
                in_channels,
                out_channels,
            } => {
                out.push((format!("layers.{k:02}.weight"), vec![out_channels, in_channels, 1, 1]));
                out.push((format!("layers.{k:02}.bias"), vec![out_channels]));
            }
            LayerSpec::NoisyAdaPixNorm { channels, .. } => {
                for v in ["beta", "gamma", "noise_weight"] {
                    out.push((format!("layers.{k:02}.{v}"), vec![channels]));
                }
            }
            _ => {}
        }
    }
    if let Some(h) = spec.head {
        out.push(("head.weight".into(), vec![h.out_channels, h.in_channels, 1, 1]));
        out.push(("head.bias".into(), vec![h.out_channels]));
    }
    out
}

impl Generator {
    /// Binds weights from `store`; every tensor must be known and present.
    pub fn from_store(spec: NetworkSpec, store: &WeightStore) -> Result<Generator> {
        spec.validate()?;
        let layout = weight_layout(&spec);
        for name in store.names() {
            if !layout.iter().any(|(n, _)| n == name) {
                return Err(Error::UnknownTensor(name.to_string()));
            }
        }
        let conv = |k: usize, kernel: usize, cin: usize, cout: usize| -> Result<ConvParams> {
            ConvParams::new(
                kernel,
                cin,
                cout,
                expect_len(&format!("layers.{k:02}.weight"), store, &[cout, cin, kernel, kernel])?,
                expect_len(&format!("layers.{k:02}.bias"), store, &[cout])?,
            )
        };
        let mut params = Vec::with_capacity(spec.layers.len());
        for (k, layer) in spec.layers.iter().enumerate() {
            params.push(match *layer {
                LayerSpec::ConvNoPad {
                    kernel,
                    in_channels,
                    out_channels,
                }
                | LayerSpec::ConvZeroPad {
                    kernel,
                    in_channels,
                    out_channels,
                } => LayerParams::Conv(conv(k, kernel, in_channels, out_channels)?),
                LayerSpec::Conv1x1 {
                    in_channels,
                    out_channels,
                } => LayerParams::Conv(conv(k, 1, in_channels, out_channels)?),
                LayerSpec::NoisyAdaPixNorm { channels, site_id } => {
                    let get = |v: &str| expect_len(&format!("layers.{k:02}.{v}"), store, &[channels]);
                    LayerParams::AdaPixNorm(AdaPixNormParams {
                        beta: get("beta")?,
                        gamma: get("gamma")?,
                        noise_weight: get("noise_weight")?,
                        site_id,
                    })
                }
                _ => LayerParams::None,
            });
        }
        let head = match spec.head {
            Some(h) => Some(ConvParams::new(
                1,
                h.in_channels,
                h.out_channels,
                expect_len("head.weight", store, &[h.out_channels, h.in_channels, 1, 1])?,
                expect_len("head.bias", store, &[h.out_channels])?,
            )?),
            None => None,
        };
        Ok(Generator { spec, params, head })
    }

    /// Binds freshly initialized random weights.
    pub fn random(spec: NetworkSpec, seed: u64) -> Result<Generator> {
        let store = WeightStore::init_random(&spec, seed)?;
        Generator::from_store(spec, &store)
    }

    /// Binds explicit parameters (one entry per layer).
    pub fn with_params(
        spec: NetworkSpec,
        params: Vec<LayerParams>,
        head: Option<ConvParams>,
    ) -> Result<Generator> {
        spec.validate()?;
        if params.len() != spec.layers.len() {
            return Err(Error::Shape(format!(
                "{} parameter entries for {} layers",
                params.len(),
                spec.layers.len()
            )));
        }
        if spec.head.is_some() != head.is_some() {
            return Err(Error::Shape("head parameters do not match the spec".into()));
        }
        Ok(Generator { spec, params, head })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn params(&self) -> &[LayerParams] {
        &self.params
    }

    pub fn head(&self) -> Option<&ConvParams> {
        self.head.as_ref()
    }

    /// The input latent process for a seed.
    pub fn latent_field(&self, seed: u64) -> LatentField {
        LatentField::new(seed, INPUT_SITE, self.spec.input_channels)
    }

    fn apply_head(&self, features: &Tensor3) -> Result<Option<Tensor3>> {
        self.head
            .as_ref()
            .map(|h| Ok(layers::activation(&layers::conv1x1(features, h)?, ActivationKind::Tanh)))
            .transpose()
    }

    fn check_input(&self, input: &Tensor3) -> Result<()> {
        if input.channels() != self.spec.input_channels {
            return Err(Error::Shape(format!(
                "{} expects {} input channels, got {}",
                self.spec.name,
                self.spec.input_channels,
                input.channels()
            )));
        }
        // surfaces underflow with the layer name before any arithmetic
        geometry::forward_stack(&self.spec.layers, input.anchor())?;
        Ok(())
    }

    /// Runs every layer on the whole input. `seed` drives the noise sites.
    pub fn forward(&self, input: &Tensor3, seed: u64) -> Result<ForwardOutput> {
        self.check_input(input)?;
        let mut x = input.clone();
        for (spec, params) in self.spec.layers.iter().zip(&self.params) {
            x = layers::apply(spec, params, &x, seed)?;
        }
        let image = self.apply_head(&x)?;
        Ok(ForwardOutput { features: x, image })
    }

    /// Like [`forward`](Self::forward) but also returns every intermediate
    /// tensor (element `k` is the output of layer `k`).
    pub fn forward_traced(&self, input: &Tensor3, seed: u64) -> Result<(ForwardOutput, Vec<Tensor3>)> {
        self.check_input(input)?;
        let mut trace = Vec::with_capacity(self.spec.layers.len());
        let mut x = input.clone();
        for (spec, params) in self.spec.layers.iter().zip(&self.params) {
            x = layers::apply(spec, params, &x, seed)?;
            trace.push(x.clone());
        }
        let image = self.apply_head(&x)?;
        Ok((ForwardOutput { features: x, image }, trace))
    }

    /// Materializes the latent on `latent_rect` and runs [`forward`](Self::forward).
    pub fn generate(&self, seed: u64, latent_rect: Rect) -> Result<ForwardOutput> {
        self.forward(&self.latent_field(seed).materialize(latent_rect), seed)
    }

    /// Output on exactly `target`, computing at every layer only the region
    /// the next layer needs. Requires a consistent network.
    pub fn generate_region(&self, seed: u64, target: Rect) -> Result<ForwardOutput> {
        let input = self
            .latent_field(seed)
            .materialize(geometry::backward_stack(&self.spec.layers, target));
        self.forward_region(&input, seed, target)
    }

    /// Pruned forward on a supplied input covering `backward_rect(target)`.
    pub fn forward_region(&self, input: &Tensor3, seed: u64, target: Rect) -> Result<ForwardOutput> {
        if let Some((index, layer)) = self
            .spec
            .layers
            .iter()
            .enumerate()
            .find(|(_, l)| !l.is_consistent())
        {
            return Err(Error::Inconsistent {
                index,
                layer: layer.to_string(),
                reason: "cannot be evaluated region by region".into(),
            });
        }
        if input.channels() != self.spec.input_channels {
            return Err(Error::Shape(format!(
                "{} expects {} input channels, got {}",
                self.spec.name,
                self.spec.input_channels,
                input.channels()
            )));
        }
        let needed = geometry::backward_trace(&self.spec.layers, target);
        let mut x = input.subpatch(needed[0])?;
        for (k, (spec, params)) in self.spec.layers.iter().zip(&self.params).enumerate() {
            x = layers::apply(spec, params, &x, seed)?;
            if x.anchor() != needed[k + 1] {
                x = x.subpatch(needed[k + 1])?;
            }
        }
        let image = self.apply_head(&x)?;
        Ok(ForwardOutput { features: x, image })
    }
}

/// Extension network plus upscalers with bound weights.
#[derive(Debug, Clone)]
pub struct MultiScaleGenerator {
    pub extension: Generator,
    pub upscalers: Vec<Generator>,
}

impl MultiScaleGenerator {
    pub fn random(spec: &MultiScaleSpec, seed: u64) -> Result<MultiScaleGenerator> {
        let extension = Generator::random(spec.extension.clone(), seed)?;
        let upscalers = spec
            .upscalers
            .iter()
            .enumerate()
            .map(|(l, s)| Generator::random(s.clone(), seed.wrapping_add(l as u64 + 1)))
            .collect::<Result<Vec<_>>>()?;
        Ok(MultiScaleGenerator {
            extension,
            upscalers,
        })
    }

    /// Outputs of every scale; each upscaler consumes the previous features.
    pub fn forward(&self, latent: &Tensor3, seed: u64) -> Result<Vec<ForwardOutput>> {
        let mut outs = vec![self.extension.forward(latent, seed)?];
        for up in &self.upscalers {
            let prev = &outs.last().expect("non-empty").features;
            outs.push(up.forward(prev, seed)?);
        }
        Ok(outs)
    }
}

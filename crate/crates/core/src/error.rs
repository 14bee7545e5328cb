use std::io;

use thiserror::Error;

use crate::tensor::Rect;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rect {inner} is not contained in {outer}")]
    Containment { inner: Rect, outer: Rect },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("channel {channel} out of range for {channels}-channel field")]
    Channel { channel: usize, channels: usize },

    #[error("{layer}: input {got} is smaller than the required minimum {required}")]
    Underflow {
        layer: String,
        got: String,
        required: String,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("network is not consistent: layer {index} ({layer}) {reason}")]
    Inconsistent {
        index: usize,
        layer: String,
        reason: String,
    },

    #[error("planning error: {0}")]
    Planning(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("weight file checksum mismatch: manifest says {expected:08x}, blob hashes to {actual:08x}")]
    Checksum { expected: u32, actual: u32 },

    #[error("weight file is malformed: {0}")]
    Manifest(String),

    #[error("unknown tensor name `{0}`")]
    UnknownTensor(String),

    #[error("missing tensor `{0}`")]
    MissingTensor(String),

    #[error("spec file: {0}")]
    Spec(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("png encoding: {0}")]
    Png(#[from] png::EncodingError),
}

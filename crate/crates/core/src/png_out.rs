//! 8-bit PNG export with row-banded streaming.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use png::{BitDepth, ColorType, Encoder, StreamWriter};

use crate::analysis::taint::TaintTensor;
use crate::error::{Error, Result};
use crate::tensor::{Rect, Tensor3};
use crate::tiling::BandSink;

/// Maps a value in `[-1, 1]` to a byte: `round((v + 1) * 127.5)`, clamped.
pub fn to_u8(v: f64) -> u8 {
    ((v + 1.0) * 127.5).round().clamp(0.0, 255.0) as u8
}

fn color_type(channels: usize) -> Result<ColorType> {
    match channels {
        1 => Ok(ColorType::Grayscale),
        3 => Ok(ColorType::Rgb),
        c => Err(Error::Shape(format!("PNG export needs 1 or 3 channels, got {c}"))),
    }
}

fn dimension(n: usize) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::Shape(format!("{n} pixels is too large for PNG")))
}

/// Streams bands of rows into a PNG file covering `rect`.
pub struct PngSink {
    writer: Option<StreamWriter<'static, BufWriter<File>>>,
    rect: Rect,
    channels: usize,
    next_row: i64,
}

impl PngSink {
    pub fn create(path: &Path, rect: Rect, channels: usize) -> Result<PngSink> {
        let color = color_type(channels)?;
        let file = BufWriter::new(File::create(path)?);
        let mut enc = Encoder::new(file, dimension(rect.width())?, dimension(rect.height())?);
        enc.set_color(color);
        enc.set_depth(BitDepth::Eight);
        let writer = enc.write_header()?.into_stream_writer()?;
        Ok(PngSink {
            writer: Some(writer),
            rect,
            channels,
            next_row: rect.row_start,
        })
    }

    /// Flushes the image; every row must have been written.
    pub fn finish(mut self) -> Result<()> {
        if self.next_row != self.rect.row_end {
            return Err(Error::Contract(format!(
                "PNG closed after row {} of {}",
                self.next_row, self.rect
            )));
        }
        self.writer.take().expect("finish runs once").finish()?;
        Ok(())
    }
}

impl BandSink for PngSink {
    fn write_band(&mut self, band: &Tensor3) -> Result<()> {
        let a = band.anchor();
        if a.row_start != self.next_row
            || a.col_start != self.rect.col_start
            || a.col_end != self.rect.col_end
            || band.channels() != self.channels
        {
            return Err(Error::Contract(format!(
                "band {a} does not continue {} at row {}",
                self.rect, self.next_row
            )));
        }
        let bytes: Vec<u8> = band.data().iter().map(|&v| to_u8(v)).collect();
        self.writer.as_mut().expect("open until finish").write_all(&bytes)?;
        self.next_row = a.row_end;
        Ok(())
    }
}

pub fn write_png(path: &Path, image: &Tensor3) -> Result<()> {
    let mut sink = PngSink::create(path, image.anchor(), image.channels())?;
    sink.write_band(image)?;
    sink.finish()
}

/// Grayscale mask: white where padding reaches the pixel, black elsewhere.
pub fn write_taint_mask(path: &Path, taint: &TaintTensor) -> Result<()> {
    let rect = taint.anchor();
    let mask = Tensor3::from_fn(rect, 1, |i, j, _| if taint.is_padded(i, j) { 1.0 } else { -1.0 });
    write_png(path, &mask)
}

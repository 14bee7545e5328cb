//! Dense `(row, col, channel)` tensors anchored on the infinite integer grid.
//!
//! A [`Tensor3`] remembers which global coordinates its data occupies, so the
//! same pixel can be located in a one-shot output and in any tile of a tiled
//! run without external bookkeeping.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-open rectangle `[row_start, row_end) x [col_start, col_end)` on Z².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub row_start: i64,
    pub row_end: i64,
    pub col_start: i64,
    pub col_end: i64,
}

impl Rect {
    pub fn new(row_start: i64, row_end: i64, col_start: i64, col_end: i64) -> Result<Rect> {
        if row_start >= row_end || col_start >= col_end {
            return Err(Error::Parameter(format!(
                "empty rect [{row_start},{row_end})x[{col_start},{col_end})"
            )));
        }
        Ok(Rect {
            row_start,
            row_end,
            col_start,
            col_end,
        })
    }

    /// Rect of the given size with its top-left corner at `(row, col)`.
    pub fn with_size(row: i64, col: i64, height: usize, width: usize) -> Result<Rect> {
        Rect::new(row, row + height as i64, col, col + width as i64)
    }

    /// `[0, height) x [0, width)`.
    pub fn sized(height: usize, width: usize) -> Result<Rect> {
        Rect::with_size(0, 0, height, width)
    }

    pub fn height(&self) -> usize {
        (self.row_end - self.row_start) as usize
    }

    pub fn width(&self) -> usize {
        (self.col_end - self.col_start) as usize
    }

    pub fn area(&self) -> usize {
        self.height() * self.width()
    }

    pub fn contains(&self, other: &Rect) -> bool {
        self.row_start <= other.row_start
            && other.row_end <= self.row_end
            && self.col_start <= other.col_start
            && other.col_end <= self.col_end
    }

    pub fn contains_point(&self, row: i64, col: i64) -> bool {
        self.row_start <= row && row < self.row_end && self.col_start <= col && col < self.col_end
    }

    pub fn intersect(&self, other: &Rect) -> Option<Rect> {
        Rect::new(
            self.row_start.max(other.row_start),
            self.row_end.min(other.row_end),
            self.col_start.max(other.col_start),
            self.col_end.min(other.col_end),
        )
        .ok()
    }

    /// Smallest rect containing both.
    pub fn hull(&self, other: &Rect) -> Rect {
        Rect {
            row_start: self.row_start.min(other.row_start),
            row_end: self.row_end.max(other.row_end),
            col_start: self.col_start.min(other.col_start),
            col_end: self.col_end.max(other.col_end),
        }
    }

    pub fn shifted(&self, drow: i64, dcol: i64) -> Rect {
        Rect {
            row_start: self.row_start + drow,
            row_end: self.row_end + drow,
            col_start: self.col_start + dcol,
            col_end: self.col_end + dcol,
        }
    }

    /// Grows (or, for negative `by`, shrinks) every side.
    pub fn expanded(&self, by: i64) -> Result<Rect> {
        Rect::new(
            self.row_start - by,
            self.row_end + by,
            self.col_start - by,
            self.col_end + by,
        )
    }

    /// Row-major iterator over every coordinate in the rect.
    pub fn points(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        (self.row_start..self.row_end)
            .flat_map(move |i| (self.col_start..self.col_end).map(move |j| (i, j)))
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{},{})x[{},{})",
            self.row_start, self.row_end, self.col_start, self.col_end
        )
    }
}

/// Position of a coordinate within one stationarity period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PhaseIndex {
    pub row_phase: usize,
    pub col_phase: usize,
}

impl PhaseIndex {
    pub fn of(row: i64, col: i64, period: (usize, usize)) -> PhaseIndex {
        PhaseIndex {
            row_phase: row.rem_euclid(period.0 as i64) as usize,
            col_phase: col.rem_euclid(period.1 as i64) as usize,
        }
    }
}

/// Dense 3-d array of `f64` anchored at global grid coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    anchor: Rect,
    channels: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn from_vec(anchor: Rect, channels: usize, data: Vec<f64>) -> Result<Tensor3> {
        if channels == 0 {
            return Err(Error::Shape("tensor needs at least one channel".into()));
        }
        let expected = anchor.area() * channels;
        if data.len() != expected {
            return Err(Error::Shape(format!(
                "{} values supplied for {anchor} with {channels} channels (expected {expected})",
                data.len()
            )));
        }
        Ok(Tensor3 {
            anchor,
            channels,
            data,
        })
    }

    pub fn zeros(anchor: Rect, channels: usize) -> Tensor3 {
        assert!(channels > 0, "tensor needs at least one channel");
        Tensor3 {
            anchor,
            channels,
            data: vec![0.0; anchor.area() * channels],
        }
    }

    pub fn filled(anchor: Rect, channels: usize, value: f64) -> Tensor3 {
        let mut t = Tensor3::zeros(anchor, channels);
        t.data.fill(value);
        t
    }

    /// Builds a tensor from a function of global `(row, col, channel)`.
    pub fn from_fn(
        anchor: Rect,
        channels: usize,
        mut f: impl FnMut(i64, i64, usize) -> f64,
    ) -> Tensor3 {
        let mut data = Vec::with_capacity(anchor.area() * channels);
        for (i, j) in anchor.points() {
            for c in 0..channels {
                data.push(f(i, j, c));
            }
        }
        Tensor3 {
            anchor,
            channels,
            data,
        }
    }

    pub fn anchor(&self) -> Rect {
        self.anchor
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.anchor.height()
    }

    pub fn width(&self) -> usize {
        self.anchor.width()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    fn offset(&self, row: i64, col: i64) -> usize {
        debug_assert!(self.anchor.contains_point(row, col));
        let r = (row - self.anchor.row_start) as usize;
        let c = (col - self.anchor.col_start) as usize;
        (r * self.anchor.width() + c) * self.channels
    }

    /// Value at global coordinates. Panics outside the anchor.
    #[inline]
    pub fn get(&self, row: i64, col: i64, channel: usize) -> f64 {
        assert!(
            self.anchor.contains_point(row, col) && channel < self.channels,
            "({row},{col},{channel}) outside {} x {}",
            self.anchor,
            self.channels
        );
        self.data[self.offset(row, col) + channel]
    }

    /// All channels of the pixel at global coordinates.
    #[inline]
    pub fn pixel(&self, row: i64, col: i64) -> &[f64] {
        assert!(self.anchor.contains_point(row, col));
        let o = self.offset(row, col);
        &self.data[o..o + self.channels]
    }

    /// Copy of the region `r`, keeping global coordinates.
    pub fn subpatch(&self, r: Rect) -> Result<Tensor3> {
        if !self.anchor.contains(&r) {
            return Err(Error::Containment {
                inner: r,
                outer: self.anchor,
            });
        }
        let row_len = r.width() * self.channels;
        let mut data = Vec::with_capacity(r.area() * self.channels);
        for i in r.row_start..r.row_end {
            let o = self.offset(i, r.col_start);
            data.extend_from_slice(&self.data[o..o + row_len]);
        }
        Ok(Tensor3 {
            anchor: r,
            channels: self.channels,
            data,
        })
    }

    /// Writes `src` into the overlapping region of `self`; `src` must lie inside.
    pub fn paste(&mut self, src: &Tensor3) -> Result<()> {
        if !self.anchor.contains(&src.anchor) {
            return Err(Error::Containment {
                inner: src.anchor,
                outer: self.anchor,
            });
        }
        if src.channels != self.channels {
            return Err(Error::Shape(format!(
                "cannot paste {} channels into {}",
                src.channels, self.channels
            )));
        }
        let row_len = src.width() * self.channels;
        for (k, i) in (src.anchor.row_start..src.anchor.row_end).enumerate() {
            let o = self.offset(i, src.anchor.col_start);
            self.data[o..o + row_len].copy_from_slice(&src.data[k * row_len..(k + 1) * row_len]);
        }
        Ok(())
    }

    /// Element-wise map, anchor unchanged.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor3 {
        Tensor3 {
            anchor: self.anchor,
            channels: self.channels,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Same data under a new anchor of identical size.
    pub fn reanchored(self, anchor: Rect) -> Result<Tensor3> {
        if anchor.height() != self.anchor.height() || anchor.width() != self.anchor.width() {
            return Err(Error::Shape(format!(
                "cannot move {} onto {anchor}",
                self.anchor
            )));
        }
        Ok(Tensor3 { anchor, ..self })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Largest element-wise absolute difference between two tensors of identical
/// anchor and channel count.
pub fn max_abs_diff(a: &Tensor3, b: &Tensor3) -> Result<f64> {
    if a.anchor != b.anchor || a.channels != b.channels {
        return Err(Error::Shape(format!(
            "{} x {} vs {} x {}",
            a.anchor, a.channels, b.anchor, b.channels
        )));
    }
    Ok(a
        .data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counting(anchor: Rect) -> Tensor3 {
        let w = anchor.width() as i64;
        Tensor3::from_fn(anchor, 1, |i, j, _| (i * w + j) as f64)
    }

    #[test]
    fn subpatch_identity() {
        let r = Rect::sized(4, 4).unwrap();
        let t = counting(r);
        assert_eq!(t.subpatch(r).unwrap(), t);
    }

    #[test]
    fn subpatch_interior_values() {
        let t = counting(Rect::sized(4, 4).unwrap());
        let s = t.subpatch(Rect::new(1, 3, 1, 3).unwrap()).unwrap();
        assert_eq!(s.data(), &[5.0, 6.0, 9.0, 10.0]);
        assert_eq!(s.anchor(), Rect::new(1, 3, 1, 3).unwrap());
        assert_eq!(s.get(2, 1, 0), 9.0);
    }

    #[test]
    fn subpatch_out_of_bounds() {
        let t = counting(Rect::sized(4, 4).unwrap());
        let err = t.subpatch(Rect::new(0, 5, 0, 4).unwrap()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("[0,5)x[0,4)") && msg.contains("[0,4)x[0,4)"), "{msg}");
    }

    #[test]
    fn max_abs_diff_cases() {
        let r = Rect::sized(3, 2).unwrap();
        let a = Tensor3::filled(r, 2, 1.0);
        assert_eq!(max_abs_diff(&a, &a).unwrap(), 0.0);
        let b = Tensor3::filled(r, 2, 1.5);
        assert_eq!(max_abs_diff(&a, &b).unwrap(), 0.5);
        let c = Tensor3::filled(r.shifted(1, 0), 2, 1.0);
        assert!(matches!(max_abs_diff(&a, &c), Err(Error::Shape(_))));
    }

    #[test]
    fn empty_rect_rejected() {
        assert!(Rect::new(2, 2, 0, 1).is_err());
        assert!(Rect::new(0, 1, 3, 1).is_err());
    }

    #[test]
    fn from_vec_checks_length() {
        let r = Rect::sized(2, 2).unwrap();
        assert!(Tensor3::from_vec(r, 3, vec![0.0; 11]).is_err());
        assert!(Tensor3::from_vec(r, 3, vec![0.0; 12]).is_ok());
    }

    #[test]
    fn phase_of_negative_coordinates() {
        let p = PhaseIndex::of(-1, -34, (32, 32));
        assert_eq!((p.row_phase, p.col_phase), (31, 30));
    }

    #[test]
    fn paste_writes_region() {
        let mut canvas = Tensor3::zeros(Rect::sized(4, 4).unwrap(), 1);
        let patch = Tensor3::filled(Rect::new(1, 3, 2, 4).unwrap(), 1, 7.0);
        canvas.paste(&patch).unwrap();
        assert_eq!(canvas.get(1, 2, 0), 7.0);
        assert_eq!(canvas.get(0, 2, 0), 0.0);
        assert_eq!(canvas.subpatch(patch.anchor()).unwrap(), patch);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn nested() -> impl Strategy<Value = (Rect, Rect, Rect)> {
            (-5i64..5, -5i64..5, 2usize..9, 2usize..9).prop_flat_map(|(r0, c0, h, w)| {
                let outer = Rect::with_size(r0, c0, h, w).unwrap();
                (0..h, 0..w).prop_flat_map(move |(dr, dc)| {
                    (1..=h - dr, 1..=w - dc).prop_flat_map(move |(h1, w1)| {
                        let r1 = Rect::with_size(r0 + dr as i64, c0 + dc as i64, h1, w1).unwrap();
                        (0..h1, 0..w1).prop_flat_map(move |(dr2, dc2)| {
                            (1..=h1 - dr2, 1..=w1 - dc2).prop_map(move |(h2, w2)| {
                                let r2 = Rect::with_size(
                                    r1.row_start + dr2 as i64,
                                    r1.col_start + dc2 as i64,
                                    h2,
                                    w2,
                                )
                                .unwrap();
                                (outer, r1, r2)
                            })
                        })
                    })
                })
            })
        }

        proptest! {
            #[test]
            fn nested_subpatch_is_direct_subpatch((outer, r1, r2) in nested()) {
                let t = Tensor3::from_fn(outer, 2, |i, j, c| (i * 31 + j * 7) as f64 + c as f64 * 0.5);
                let twice = t.subpatch(r1).unwrap().subpatch(r2).unwrap();
                prop_assert_eq!(twice, t.subpatch(r2).unwrap());
            }
        }
    }
}

//! Tiled generation of large images.
//!
//! In consistent mode the target is partitioned into disjoint image tiles;
//! each tile is generated from its own (overlapping) latent rect and pasted
//! without cropping. In crop mode the `{nearest up, zero-padded conv}` stack
//! is tiled the classic way: overlapping latent tiles, padding-contaminated
//! borders and doubly generated rows thrown away.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{self, backward_stack, forward_stack, min_latent_overlap};
use crate::layers::LayerSpec;
use crate::network::{Generator, NetworkSpec};
use crate::tensor::{max_abs_diff, Rect, Tensor3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TilingMode {
    Consistent,
    InconsistentCrop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tile {
    /// Pixels this tile contributes to the stitched image.
    pub image_rect: Rect,
    /// Latent rect the tile is generated from.
    pub latent_rect: Rect,
    /// Everything the generator computes for the tile.
    pub generated_rect: Rect,
    /// Grid position `(band, column)`.
    pub grid: (usize, usize),
    /// Not on the outer ring of the tile grid.
    pub interior: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TilingPlan {
    pub target_image_rect: Rect,
    pub tiles: Vec<Tile>,
    pub mode: TilingMode,
    /// Tiles per band and bands.
    pub grid_size: (usize, usize),
}

impl TilingPlan {
    /// Tile indices grouped by band, top to bottom.
    pub fn bands(&self) -> Vec<Vec<usize>> {
        let mut bands = vec![Vec::new(); self.grid_size.0];
        for (k, t) in self.tiles.iter().enumerate() {
            bands[t.grid.0].push(k);
        }
        bands
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StitchReport {
    pub tiles_generated: usize,
    pub pixels_emitted: usize,
    pub pixels_discarded: usize,
    pub discard_fraction: f64,
    /// Discarded share over interior tiles only (crop mode with a 3x3 or
    /// larger grid).
    pub interior_discard_fraction: Option<f64>,
    pub seam_max_abs_diff: f64,
    pub seams_checked: usize,
}

/// Splits `[start, end)` into consecutive spans of at most `budget`.
fn spans(start: i64, end: i64, budget: usize) -> Vec<(i64, i64)> {
    let b = budget as i64;
    let mut out = Vec::new();
    let mut s = start;
    while s < end {
        out.push((s, (s + b).min(end)));
        s += b;
    }
    out
}

fn is_interior(grid: (usize, usize), size: (usize, usize)) -> bool {
    grid.0 > 0 && grid.1 > 0 && grid.0 + 1 < size.0 && grid.1 + 1 < size.1
}

/// Consistent-mode plan: disjoint image tiles of at most `tile_budget` per
/// side, each with latent rect `backward_rect(tile)`.
pub fn plan(net: &NetworkSpec, target: Rect, tile_budget: usize) -> Result<TilingPlan> {
    let summary = geometry::summarize(net)?;
    if tile_budget < summary.min_output {
        return Err(Error::Planning(format!(
            "tile budget {tile_budget} is below the smallest output {} of {}",
            summary.min_output, net.name
        )));
    }
    let rows = spans(target.row_start, target.row_end, tile_budget);
    let cols = spans(target.col_start, target.col_end, tile_budget);
    let grid_size = (rows.len(), cols.len());
    let mut tiles = Vec::with_capacity(rows.len() * cols.len());
    for (bi, &(r0, r1)) in rows.iter().enumerate() {
        for (ci, &(c0, c1)) in cols.iter().enumerate() {
            let image_rect = Rect::new(r0, r1, c0, c1)?;
            tiles.push(Tile {
                image_rect,
                latent_rect: backward_stack(&net.layers, image_rect),
                generated_rect: image_rect,
                grid: (bi, ci),
                interior: is_interior((bi, ci), grid_size),
            });
        }
    }
    Ok(TilingPlan {
        target_image_rect: target,
        tiles,
        mode: TilingMode::Consistent,
        grid_size,
    })
}

/// One axis of a crop-mode tiling: `(latent span, generated span, kept span)`.
type AxisTile = ((i64, i64), (i64, i64), (i64, i64));

fn crop_axis(start: i64, end: i64, scale: i64, n: i64, overlap: i64) -> Vec<AxisTile> {
    // padding-free pixels of latent [a, a + n)
    let clean = |a: i64| (scale * a + scale - 1, scale * (a + n) - scale + 1);
    let mut a = (start - scale + 1).div_euclid(scale);
    let mut prev_end = start;
    let mut out = Vec::new();
    loop {
        let (c0, c1) = clean(a);
        let keep = (prev_end.max(c0), c1.min(end));
        out.push(((a, a + n), (scale * a, scale * (a + n)), keep));
        if keep.1 >= end {
            return out;
        }
        prev_end = keep.1;
        a += n - overlap;
    }
}

/// Number of scale-2 blocks of a `{nearest up x2, zero-padded conv}` stack,
/// checking that the stack keeps the `[2^K a, 2^K b)` index map.
fn crop_blocks(net: &NetworkSpec) -> Result<u32> {
    let mut blocks = 0u32;
    for layer in &net.layers {
        match layer {
            LayerSpec::NearestUp { scale: 2 } => blocks += 1,
            LayerSpec::ConvZeroPad { .. }
            | LayerSpec::Activation { .. }
            | LayerSpec::PixelNorm
            | LayerSpec::Conv1x1 { .. } => {}
            other => {
                return Err(Error::Planning(format!(
                    "crop-mode tiling needs nearest-up/zero-padded stacks; found `{other}`"
                )))
            }
        }
    }
    if blocks == 0 {
        return Err(Error::Planning("crop-mode tiling needs at least one upsampling block".into()));
    }
    Ok(blocks)
}

/// Crop-and-stitch plan for an inconsistent network with `K` upsampling
/// blocks: latent tiles of side `N = floor(S / 2^K)` overlapping by the
/// minimal latent overlap; each tile keeps its padding-free interior minus
/// the rows/columns already emitted by its upper/left neighbour.
pub fn plan_inconsistent(net: &NetworkSpec, target: Rect, tile_budget: usize) -> Result<TilingPlan> {
    let blocks = crop_blocks(net)?;
    let scale = 1i64 << blocks;
    let n = tile_budget as i64 / scale;
    if n < 3 {
        return Err(Error::Planning(format!(
            "budget {tile_budget} with {blocks} blocks gives latent tiles of {n}; at least 3 are needed"
        )));
    }
    let overlap = min_latent_overlap(blocks)? as i64;
    let rows = crop_axis(target.row_start, target.row_end, scale, n, overlap);
    let cols = crop_axis(target.col_start, target.col_end, scale, n, overlap);
    let grid_size = (rows.len(), cols.len());
    let mut tiles = Vec::new();
    for (bi, &(lr, gr, kr)) in rows.iter().enumerate() {
        for (ci, &(lc, gc, kc)) in cols.iter().enumerate() {
            tiles.push(Tile {
                image_rect: Rect::new(kr.0, kr.1, kc.0, kc.1)?,
                latent_rect: Rect::new(lr.0, lr.1, lc.0, lc.1)?,
                generated_rect: Rect::new(gr.0, gr.1, gc.0, gc.1)?,
                grid: (bi, ci),
                interior: is_interior((bi, ci), grid_size),
            });
        }
    }
    Ok(TilingPlan {
        target_image_rect: target,
        tiles,
        mode: TilingMode::InconsistentCrop,
        grid_size,
    })
}

/// A reproducible random permutation of `0..n`.
pub fn shuffled_order(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx
}

fn check_order(order: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::Contract(format!("order lists {} of {n} tiles", order.len())));
    }
    for &k in order {
        if k >= n || std::mem::replace(&mut seen[k], true) {
            return Err(Error::Contract(format!("order is not a permutation (tile {k})")));
        }
    }
    Ok(())
}

fn check_plan(gen: &Generator, plan: &TilingPlan) -> Result<()> {
    let layers = &gen.spec().layers;
    for t in &plan.tiles {
        match plan.mode {
            TilingMode::Consistent => {
                if backward_stack(layers, t.image_rect) != t.latent_rect {
                    return Err(Error::Contract(format!(
                        "tile {} has latent {} but {} needs {}",
                        t.image_rect,
                        t.latent_rect,
                        gen.spec().name,
                        backward_stack(layers, t.image_rect)
                    )));
                }
            }
            TilingMode::InconsistentCrop => {
                let fwd = forward_stack(layers, t.latent_rect)?;
                if fwd != t.generated_rect || !fwd.contains(&t.image_rect) {
                    return Err(Error::Contract(format!(
                        "latent {} maps to {fwd}, plan expects {}",
                        t.latent_rect, t.generated_rect
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Kept pixels of one tile plus how many generated pixels were dropped.
fn render_tile(gen: &Generator, tile: &Tile, mode: TilingMode, seed: u64) -> Result<(Tensor3, usize)> {
    match mode {
        TilingMode::Consistent => {
            let out = gen.generate_region(seed, tile.image_rect)?.into_output();
            Ok((out, 0))
        }
        TilingMode::InconsistentCrop => {
            let full = gen.generate(seed, tile.latent_rect)?.into_output();
            let kept = full.subpatch(tile.image_rect)?;
            Ok((kept, full.anchor().area() - tile.image_rect.area()))
        }
    }
}

struct Tally {
    emitted: usize,
    discarded: usize,
    interior_emitted: usize,
    interior_discarded: usize,
}

impl Tally {
    fn new() -> Tally {
        Tally {
            emitted: 0,
            discarded: 0,
            interior_emitted: 0,
            interior_discarded: 0,
        }
    }

    fn add(&mut self, tile: &Tile, discarded: usize) {
        self.emitted += tile.image_rect.area();
        self.discarded += discarded;
        if tile.interior {
            self.interior_emitted += tile.image_rect.area();
            self.interior_discarded += discarded;
        }
    }

    fn report(&self, plan: &TilingPlan) -> StitchReport {
        let frac = |d: usize, e: usize| d as f64 / (d + e) as f64;
        StitchReport {
            tiles_generated: plan.tiles.len(),
            pixels_emitted: self.emitted,
            pixels_discarded: self.discarded,
            discard_fraction: frac(self.discarded, self.emitted),
            interior_discard_fraction: (plan.mode == TilingMode::InconsistentCrop
                && self.interior_emitted > 0)
                .then(|| frac(self.interior_discarded, self.interior_emitted)),
            seam_max_abs_diff: 0.0,
            seams_checked: 0,
        }
    }
}

/// Generates every tile (in parallel, scheduled in `order`) and stitches them
/// into one in-memory image.
pub fn generate_tiled(
    gen: &Generator,
    plan: &TilingPlan,
    seed: u64,
    order: &[usize],
) -> Result<(Tensor3, StitchReport)> {
    check_order(order, plan.tiles.len())?;
    check_plan(gen, plan)?;
    let rendered: Vec<(usize, Tensor3, usize)> = order
        .par_iter()
        .map(|&k| render_tile(gen, &plan.tiles[k], plan.mode, seed).map(|(t, d)| (k, t, d)))
        .collect::<Result<_>>()?;
    let mut image = Tensor3::zeros(plan.target_image_rect, gen.spec().output_channels());
    let mut tally = Tally::new();
    for (k, tile, discarded) in &rendered {
        image.paste(tile)?;
        tally.add(&plan.tiles[*k], *discarded);
    }
    Ok((image, tally.report(plan)))
}

/// Receives the stitched image one band of rows at a time, top to bottom.
pub trait BandSink {
    fn write_band(&mut self, band: &Tensor3) -> Result<()>;
}

/// Collects bands into one tensor.
pub struct MemorySink {
    image: Tensor3,
}

impl MemorySink {
    pub fn new(rect: Rect, channels: usize) -> MemorySink {
        MemorySink {
            image: Tensor3::zeros(rect, channels),
        }
    }

    pub fn into_image(self) -> Tensor3 {
        self.image
    }
}

impl BandSink for MemorySink {
    fn write_band(&mut self, band: &Tensor3) -> Result<()> {
        self.image.paste(band)
    }
}

/// Band-by-band variant of [`generate_tiled`]: only one band of tiles is in
/// memory at a time. Within a band, tiles are scheduled in the relative order
/// given by `order`.
pub fn generate_tiled_streaming(
    gen: &Generator,
    plan: &TilingPlan,
    seed: u64,
    order: &[usize],
    sink: &mut dyn BandSink,
) -> Result<StitchReport> {
    check_order(order, plan.tiles.len())?;
    check_plan(gen, plan)?;
    let mut rank = vec![0; order.len()];
    for (pos, &k) in order.iter().enumerate() {
        rank[k] = pos;
    }
    let channels = gen.spec().output_channels();
    let mut tally = Tally::new();
    for mut band in plan.bands() {
        band.sort_by_key(|&k| rank[k]);
        let rendered: Vec<(usize, Tensor3, usize)> = band
            .par_iter()
            .map(|&k| render_tile(gen, &plan.tiles[k], plan.mode, seed).map(|(t, d)| (k, t, d)))
            .collect::<Result<_>>()?;
        let rect = rendered
            .iter()
            .map(|(_, t, _)| t.anchor())
            .reduce(|a, b| a.hull(&b))
            .expect("bands are non-empty");
        let mut canvas = Tensor3::zeros(rect, channels);
        for (k, tile, discarded) in &rendered {
            canvas.paste(tile)?;
            tally.add(&plan.tiles[*k], *discarded);
        }
        sink.write_band(&canvas)?;
    }
    Ok(tally.report(plan))
}

/// Strips of width `2 * half_width` straddling every internal seam of a
/// consistent plan.
pub fn seam_strips(plan: &TilingPlan, half_width: i64) -> Vec<Rect> {
    let mut strips = Vec::new();
    for t in &plan.tiles {
        let r = t.image_rect;
        if r.col_end < plan.target_image_rect.col_end {
            strips.push(Rect {
                col_start: r.col_end - half_width,
                col_end: r.col_end + half_width,
                ..r
            });
        }
        if r.row_end < plan.target_image_rect.row_end {
            strips.push(Rect {
                row_start: r.row_end - half_width,
                row_end: r.row_end + half_width,
                ..r
            });
        }
    }
    strips
        .into_iter()
        .filter_map(|s| s.intersect(&plan.target_image_rect))
        .collect()
}

/// Regenerates each seam strip directly from the latent field and compares it
/// with the stitched image. Returns `(max |diff|, strips checked)`.
pub fn verify_seams(
    gen: &Generator,
    plan: &TilingPlan,
    seed: u64,
    image: &Tensor3,
) -> Result<(f64, usize)> {
    if plan.mode != TilingMode::Consistent {
        return Err(Error::Contract("seam regeneration needs a consistent plan".into()));
    }
    let strips = seam_strips(plan, 1);
    let diffs: Vec<f64> = strips
        .par_iter()
        .map(|&s| {
            let direct = gen.generate_region(seed, s)?.into_output();
            max_abs_diff(&image.subpatch(s)?, &direct)
        })
        .collect::<Result<_>>()?;
    Ok((diffs.iter().copied().fold(0.0, f64::max), strips.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{g0_with_widths, padded_nearest_stack, reference_g0};

    #[test]
    fn aligned_quadrants_use_six_by_six_latents() {
        let g0 = reference_g0();
        let target = Rect::with_size(33, 33, 128, 128).unwrap();
        let p = plan(&g0, target, 64).unwrap();
        assert_eq!(p.tiles.len(), 4);
        for t in &p.tiles {
            assert_eq!((t.image_rect.height(), t.image_rect.width()), (64, 64));
            assert_eq!((t.latent_rect.height(), t.latent_rect.width()), (6, 6));
        }
        let (a, b) = (p.tiles[0].latent_rect, p.tiles[1].latent_rect);
        assert!(a.intersect(&b).is_some(), "{a} and {b} should overlap");
    }

    #[test]
    fn single_tile_plan() {
        let g0 = reference_g0();
        let target = Rect::sized(50, 40).unwrap();
        let p = plan(&g0, target, 64).unwrap();
        assert_eq!(p.tiles.len(), 1);
        assert_eq!(p.tiles[0].latent_rect, backward_stack(&g0.layers, target));
    }

    #[test]
    fn budget_below_minimum() {
        assert!(matches!(
            plan(&reference_g0(), Rect::sized(64, 64).unwrap(), 16),
            Err(Error::Planning(_))
        ));
        assert!(matches!(
            plan_inconsistent(&padded_nearest_stack(3, 2, 2), Rect::sized(64, 64).unwrap(), 16),
            Err(Error::Planning(_))
        ));
    }

    #[test]
    fn crop_plan_interior_discards() {
        let net = padded_nearest_stack(3, 2, 2);
        let p = plan_inconsistent(&net, Rect::sized(256, 256).unwrap(), 64).unwrap();
        let interior: Vec<&Tile> = p.tiles.iter().filter(|t| t.interior).collect();
        assert!(!interior.is_empty());
        for t in interior {
            assert_eq!(t.generated_rect.height(), 64);
            assert_eq!(t.generated_rect.height() - t.image_rect.height(), 16);
            assert_eq!(t.generated_rect.width() - t.image_rect.width(), 16);
        }
        // kept rects partition the target
        let area: usize = p.tiles.iter().map(|t| t.image_rect.area()).sum();
        assert_eq!(area, 256 * 256);
    }

    #[test]
    fn crop_plan_k1_has_no_double_generation() {
        let net = padded_nearest_stack(1, 2, 2);
        let p = plan_inconsistent(&net, Rect::sized(40, 40).unwrap(), 10).unwrap();
        for t in p.tiles.iter().filter(|t| t.interior) {
            assert_eq!(t.generated_rect.height() - t.image_rect.height(), 2);
        }
    }

    #[test]
    fn shuffled_order_is_permutation() {
        let o = shuffled_order(50, 3);
        check_order(&o, 50).unwrap();
        assert_ne!(o, (0..50).collect::<Vec<_>>());
        assert_eq!(o, shuffled_order(50, 3));
        assert!(check_order(&[0, 0, 1], 3).is_err());
    }

    #[test]
    fn small_tiled_matches_one_shot_and_streaming() {
        let spec = g0_with_widths(4, 3);
        let gen = Generator::random(spec.clone(), 5).unwrap();
        let latent = Rect::new(-2, 5, 1, 8).unwrap();
        let one_shot = gen.generate(3, latent).unwrap().into_output();
        let p = plan(&spec, one_shot.anchor(), 40).unwrap();
        let order = shuffled_order(p.tiles.len(), 1);
        let (tiled, report) = generate_tiled(&gen, &p, 3, &order).unwrap();
        assert_eq!(max_abs_diff(&tiled, &one_shot).unwrap(), 0.0);
        assert_eq!(report.pixels_discarded, 0);

        let mut sink = MemorySink::new(p.target_image_rect, 3);
        generate_tiled_streaming(&gen, &p, 3, &order, &mut sink).unwrap();
        assert_eq!(sink.into_image(), tiled);

        let (diff, n) = verify_seams(&gen, &p, 3, &tiled).unwrap();
        assert_eq!(diff, 0.0);
        assert!(n > 0);
    }

    #[test]
    fn plan_for_other_net_is_rejected() {
        let a = g0_with_widths(4, 3);
        let p = plan(&a, Rect::sized(64, 64).unwrap(), 64).unwrap();
        let other = Generator::random(crate::network::upscaler_with_width(4), 0).unwrap();
        let order: Vec<usize> = (0..p.tiles.len()).collect();
        assert!(matches!(generate_tiled(&other, &p, 0, &order), Err(Error::Contract(_))));
    }
}

//! Tile a zero-padded network the classic way and count the wasted pixels.

use infcanvas::analysis::redundancy::redundancy_fraction;
use infcanvas::network::padded_nearest_stack;
use infcanvas::tiling::{generate_tiled, plan_inconsistent};
use infcanvas::{Generator, Rect};

fn main() -> infcanvas::Result<()> {
    for blocks in 1..=4 {
        let net = padded_nearest_stack(blocks, 4, 8);
        let gen = Generator::random(net.clone(), 0)?;
        let p = plan_inconsistent(&net, Rect::sized(256, 256)?, 64)?;
        let order: Vec<usize> = (0..p.tiles.len()).collect();
        let (_, report) = generate_tiled(&gen, &p, 1, &order)?;
        println!(
            "K={blocks}: {} tiles, whole image discards {:.4}, interior tiles {:?}, bound {}",
            report.tiles_generated,
            report.discard_fraction,
            report.interior_discard_fraction,
            redundancy_fraction(64, blocks)?
        );
    }
    Ok(())
}

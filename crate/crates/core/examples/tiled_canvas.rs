//! Stream a large image to PNG tile by tile, then check every seam.

use infcanvas::network::g0_with_widths;
use infcanvas::png_out::PngSink;
use infcanvas::tiling::{generate_tiled_streaming, plan, shuffled_order, verify_seams, MemorySink};
use infcanvas::{Generator, Rect};

fn main() -> infcanvas::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "tiled_canvas.png".into());
    let gen = Generator::random(g0_with_widths(16, 8), 3)?;
    let target = Rect::sized(384, 640)?;
    let p = plan(gen.spec(), target, 64)?;
    let order = shuffled_order(p.tiles.len(), 1);

    let mut sink = PngSink::create(out.as_ref(), target, 3)?;
    let report = generate_tiled_streaming(&gen, &p, 11, &order, &mut sink)?;
    sink.finish()?;
    println!("{} tiles, {} pixels, none discarded: {}", report.tiles_generated, report.pixels_emitted, report.pixels_discarded == 0);

    let mut mem = MemorySink::new(target, 3);
    generate_tiled_streaming(&gen, &p, 11, &order, &mut mem)?;
    let (diff, strips) = verify_seams(&gen, &p, 11, &mem.into_image())?;
    println!("{strips} seam strips regenerated, max |diff| = {diff}");
    Ok(())
}

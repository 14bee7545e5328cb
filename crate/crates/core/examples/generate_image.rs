//! Generate one 64x64 image from a 6x6 latent patch and save it as PNG.

use infcanvas::network::reference_g0;
use infcanvas::png_out::write_png;
use infcanvas::{Generator, Rect};

fn main() -> infcanvas::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "generate_image.png".into());
    let gen = Generator::random(reference_g0(), 7)?;
    let image = gen.generate(7, Rect::sized(6, 6)?)?.into_output();
    write_png(out.as_ref(), &image)?;
    println!("latent [0,6)x[0,6) -> image {} ({} channels), wrote {out}", image.anchor(), image.channels());
    Ok(())
}

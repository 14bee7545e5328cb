//! Extension network followed by two upscalers; every scale stays consistent.

use infcanvas::network::{g0_with_widths, upscaler_with_width, MultiScaleGenerator};
use infcanvas::{MultiScaleSpec, Rect};

fn main() -> infcanvas::Result<()> {
    let spec = MultiScaleSpec::new(g0_with_widths(8, 4), vec![upscaler_with_width(4), upscaler_with_width(4)])?;
    let gen = MultiScaleGenerator::random(&spec, 2)?;
    let field = gen.extension.latent_field(3);
    let big = gen.forward(&field.materialize(Rect::sized(8, 8)?), 3)?;
    let small = gen.forward(&field.materialize(Rect::with_size(1, 2, 5, 5)?), 3)?;
    for (scale, (b, s)) in big.iter().zip(&small).enumerate() {
        let crop = b.output().subpatch(s.output().anchor())?;
        println!("scale {scale}: {} inside {}, equal: {}", s.output().anchor(), b.output().anchor(), crop == *s.output());
    }
    Ok(())
}

//! Index algebra of the reference networks.

use infcanvas::geometry::{backward_stack, forward_trace, summarize};
use infcanvas::network::{reference_g0, reference_upscaler};
use infcanvas::Rect;

fn main() -> infcanvas::Result<()> {
    let g0 = reference_g0();
    let trace = forward_trace(&g0.layers, Rect::sized(6, 6)?)?;
    for (layer, rect) in g0.layers.iter().zip(&trace) {
        println!("{layer:<40} {rect}");
    }
    println!("{:#?}", summarize(&g0)?);
    println!("upscaler: {:#?}", summarize(&reference_upscaler())?);

    let pixel = Rect::with_size(64, 64, 1, 1)?;
    println!("pixel {pixel} reads latent {}", backward_stack(&g0.layers, pixel));
    Ok(())
}

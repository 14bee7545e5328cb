//! Which output pixels see convolution padding, for K stacked upsampling blocks.

use infcanvas::analysis::taint::{overlap_witness, trace_taint};
use infcanvas::network::padded_nearest_stack;
use infcanvas::png_out::write_taint_mask;
use infcanvas::Rect;

fn main() -> infcanvas::Result<()> {
    for k in 1..=3 {
        let net = padded_nearest_stack(k, 1, 1);
        let t = trace_taint(&net, Rect::sized(5, 5)?)?;
        let path = format!("taint_k{k}.png");
        write_taint_mask(path.as_ref(), &t)?;
        println!("K={k}: output {}, border {:?}, clean {:?}, wrote {path}", t.anchor(), t.border_width(), t.clean_rect());
        for overlap in [0, 1, 2] {
            let w = overlap_witness(&net, 6, overlap)?;
            println!("  overlap {overlap}: gap between clean regions {}", w.gap);
        }
    }
    Ok(())
}

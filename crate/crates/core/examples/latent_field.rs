//! The latent field is addressed by coordinates: any patch, any order.

use infcanvas::{LatentField, Rect};

fn main() -> infcanvas::Result<()> {
    let z = LatentField::new(42, 0, 2);
    let far = Rect::with_size(1 << 40, -(1 << 40), 3, 3)?;
    let patch = z.materialize(far);
    println!("patch at {far}:");
    for (i, j) in far.points() {
        println!("  ({i}, {j}) -> {:?}", patch.pixel(i, j));
    }
    let again = z.sample_at(far.row_start + 1, far.col_start + 2, 1)?;
    println!("resampled one value: {again} (same: {})", again == patch.get(far.row_start + 1, far.col_start + 2, 1));
    Ok(())
}

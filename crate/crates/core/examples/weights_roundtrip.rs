//! Save a spec as TOML and weights as `.igw`, load both back, regenerate.

use infcanvas::network::g0_with_widths;
use infcanvas::weights::parameter_count;
use infcanvas::{Generator, NetworkSpec, Rect, WeightStore};

fn main() -> infcanvas::Result<()> {
    let dir = std::env::temp_dir();
    let spec = g0_with_widths(8, 4);
    let store = WeightStore::init_random(&spec, 5)?;
    std::fs::write(dir.join("g0-small.toml"), spec.to_toml_string())?;
    store.save(&dir.join("g0-small.igw"))?;

    let spec2 = NetworkSpec::load(&dir.join("g0-small.toml"))?;
    let store2 = WeightStore::load(&dir.join("g0-small.igw"))?;
    let count = parameter_count(&spec);
    let a = Generator::from_store(spec, &store)?.generate(1, Rect::sized(6, 6)?)?;
    let b = Generator::from_store(spec2, &store2)?.generate(1, Rect::sized(6, 6)?)?;
    println!("{count} parameters, outputs identical: {}", a == b);
    Ok(())
}

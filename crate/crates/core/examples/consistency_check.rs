//! Sub-patch generation against cropping, with and without zero padding.

use infcanvas::analysis::verify_consistency;
use infcanvas::network::g0_with_widths;
use infcanvas::Generator;

fn main() -> infcanvas::Result<()> {
    let spec = g0_with_widths(16, 8);
    let good = Generator::random(spec.clone(), 1)?;
    let report = verify_consistency(&good, 10, 0)?;
    println!("{}: {} of {} trials differ", spec.name, report.failure_count(), report.trials.len());

    let bad = Generator::random(spec.with_zero_padding_at(6)?, 1)?;
    let report = verify_consistency(&bad, 10, 0)?;
    println!("with padding at layer 6: {} of {} trials differ", report.failure_count(), report.trials.len());
    if let Some(f) = report.failures().next() {
        println!("  first: latent {} vs {}, |diff| {}, layer {:?}", f.latent, f.sub_latent, f.max_abs_diff, f.offending_layer);
    }
    Ok(())
}

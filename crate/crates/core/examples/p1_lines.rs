//! ESR lines of substitutional nitrogen and a bath built from them.

use ddkit::p1::{split_bath, transition_lines, type2_axes, with_static_line, P1Params, WEIGHT_FLOOR};

fn main() -> ddkit::Result<()> {
    let params = P1Params::default();
    let mut lines = Vec::new();
    for axis in [[0.0, 0.0, 1.0], type2_axes()[0]] {
        lines.extend(transition_lines(&params.with_axis(axis), WEIGHT_FLOOR)?);
    }
    for l in &lines {
        println!(
            "type {}  {:8.2} MHz  weight {:.3}  I_z={:+}",
            l.p1_type, l.frequency, l.weight, l.iz_label
        );
    }
    // Total b shared equally, every line with a 1 MHz-scale correlation rate.
    let bath = with_static_line(split_bath(&lines, 3.3, 0.04)?, 0.5)?;
    let eff = bath.compose()?;
    println!(
        "{} lines, effective b = {:.3} rad/us, R = {:.4} 1/us",
        bath.lines.len(),
        eff.b(),
        eff.rate()
    );
    Ok(())
}

//! Describing sequences in text and inspecting their filter functions.

use ddkit::filter::w_general;
use ddkit::sequence::{parse_dsl, render_dsl};
use ddkit::OuParams;

fn main() -> ddkit::Result<()> {
    let custom = parse_dsl(
        "label=uneven-echo\n\
         T=6\n\
         t=1:X; t=2.5:Y   # two pulses\n\
         t=4:X; t=5.5:Y\n",
    )?;
    let xy8 = parse_dsl("xy8(2, 0.25)")?;
    let p = OuParams::nv_default();
    for seq in [&custom, &xy8] {
        let f = seq.filter_function();
        println!("{}", render_dsl(seq));
        println!(
            "  {} pulses, filter breakpoints {:?}, integral {:.3}, S = {:.6}",
            seq.len(),
            f.breakpoints,
            f.integral(),
            w_general(&f, &p)?.s
        );
    }
    match parse_dsl("T=2\nt=3:X") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}

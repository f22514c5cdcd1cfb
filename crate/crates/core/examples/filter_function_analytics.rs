//! Three independent routes to the decay exponent of periodic sequences.

use ddkit::filter::{cdd_recursion, w_general, w_periodic};
use ddkit::sequence::{cdd, pdd_family, CddBase, PddVariant};
use ddkit::OuParams;

fn main() -> ddkit::Result<()> {
    let p = OuParams::nv_default();
    let tau = 0.4;

    let period = pdd_family(PddVariant::PddXy, 1, tau)?.filter_function();
    for n_c in [1, 4, 8] {
        let full = pdd_family(PddVariant::PddXy, n_c, tau)?.filter_function();
        let g = w_general(&full, &p)?;
        let q = w_periodic(&period, n_c, &p)?;
        println!(
            "pdd N_c={n_c}: W general {:.12e}  periodic {:.12e}  S={:.6}",
            g.w, q.w, g.s
        );
    }

    for (base, name) in [(CddBase::Pdd, "cdd"), (CddBase::Xy4, "cdd_xy4")] {
        for level in 1..=3 {
            let seq = cdd(base, level, tau, 1)?;
            let g = w_general(&seq.filter_function(), &p)?;
            let r = cdd_recursion(base, level, &p, tau, 1)?;
            println!(
                "{name} level {level}: T={:.1} W general {:.12e}  recursion {:.12e}",
                seq.duration, g.w, r.w
            );
        }
    }
    Ok(())
}

//! XY4, UDD and QDD at equal pulse count: exact fidelity and decay time.

use ddkit::filter::w_general;
use ddkit::harness::{analytic_t1e, protocol_for_pulses};
use ddkit::sequence::MergePolicy;
use ddkit::{BathComposition, OuParams, StaticFieldModel};

fn main() -> ddkit::Result<()> {
    let p = OuParams::nv_default();
    let bath = BathComposition::single(p);
    for np in [8, 24, 48] {
        println!("N_p = {np}");
        for family in ["xy4", "udd", "qdd"] {
            let proto = protocol_for_pulses(family, np)?;
            let t1e = analytic_t1e(&proto, &bath, &StaticFieldModel::zero())?;
            let s20 = w_general(&proto.build(20.0, MergePolicy::Cancel)?.filter_function(), &p)?.s;
            println!(
                "  {:<10} T1e = {t1e:6.2} us   S(20 us) = {s20:.4}",
                proto.to_string()
            );
        }
    }
    Ok(())
}

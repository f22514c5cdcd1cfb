//! Decay time of XY4 grows as `N_d^{2/3}` once the delay is short.

use ddkit::filter::closed_form::t_1e;
use ddkit::harness::analytic_t1e;
use ddkit::noise::echo_t2;
use ddkit::{BathComposition, OuParams, Protocol, StaticFieldModel};

fn main() -> ddkit::Result<()> {
    let p = OuParams::nv_default();
    let bath = BathComposition::single(p);
    let t2 = echo_t2(&p);
    let mut first = None;
    println!("N_d   T1e exact   T1e closed   ratio to N_d=8");
    for periods in [1, 2, 4, 8, 16] {
        let proto = Protocol::Xy4(periods);
        let n_d = proto.delays().unwrap() as f64;
        let t = analytic_t1e(&proto, &bath, &StaticFieldModel::zero())?;
        let base = *first.get_or_insert(t);
        println!("{n_d:<5} {t:<11.4} {:<12.4} {:.4}", t_1e(n_d, t2), t / base);
    }
    println!(
        "ideal ratios: 1, {:.4}, {:.4}",
        2f64.powf(2.0 / 3.0),
        4f64.powf(2.0 / 3.0)
    );
    Ok(())
}

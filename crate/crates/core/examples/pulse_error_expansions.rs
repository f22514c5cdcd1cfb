//! Static propagators with small pulse errors, their first-order forms, and
//! the zero/nonzero sensitivity of each protocol.

use ddkit::spin::{sensitivity_table, standard_columns, static_expansion_check, AxisErrors};
use ddkit::Protocol;

fn main() -> ddkit::Result<()> {
    let errors = AxisErrors {
        eps_x: 1.0,
        eps_y: 0.6,
        n_y: 0.3,
        n_z: 0.7,
        m_x: 0.5,
        m_z: -0.4,
    };
    for p in [
        Protocol::Cpmg(2),
        Protocol::Xy4(1),
        Protocol::Sdd(1),
        Protocol::Xy8(1),
    ] {
        let r = static_expansion_check(&p, &errors, 0.3)?;
        println!("{p} ({}, order {}):", r.formula, r.order);
        for (l, res) in r.lambdas.iter().zip(&r.residuals) {
            println!("  lambda={l:<9} residual={res:.3e}");
        }
        println!("  halving ratios {:?}", r.ratios);
    }

    println!();
    for (label, s) in sensitivity_table(&standard_columns())? {
        let names = |v: &[_]| {
            v.iter()
                .map(|c: &ddkit::spin::ErrorComponent| c.name())
                .collect::<Vec<_>>()
                .join(" ")
        };
        println!("{label:<18} S_X: [{}]  S_Y: [{}]", names(&s.sx), names(&s.sy));
    }
    Ok(())
}

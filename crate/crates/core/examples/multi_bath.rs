//! Independent noise lines add in the decay exponent; in the slow-bath limit
//! a composition acts like one line with `b² = Σ b_j²`, `b²R = Σ b_j² R_j`.

use ddkit::filter::{exponent_multi, w_general};
use ddkit::sequence::MergePolicy;
use ddkit::spin::ensemble_fidelity;
use ddkit::{BathComposition, OuParams, Protocol, PulseErrors, RunConfig, StaticFieldModel};

fn main() -> ddkit::Result<()> {
    let lines = [
        (1.2, 30.0),
        (1.0, 18.0),
        (1.5, 45.0),
        (0.8, 25.0),
        (1.1, 60.0),
        (0.9, 12.0),
        (0.6, 35.0),
    ]
    .iter()
    .map(|&(b, tau_c)| OuParams::new(b, tau_c))
    .collect::<Result<Vec<_>, _>>()?;
    let bath = BathComposition::new(lines.clone());
    let single = BathComposition::single(bath.compose()?.as_ou_params()?);

    let proto = Protocol::Xy4(4);
    let times = [4.0, 8.0, 12.0];
    for &t in &times {
        let f = proto.build(t, MergePolicy::Cancel)?.filter_function();
        let summed: f64 = lines
            .iter()
            .map(|l| l.b * l.b * w_general(&f, l).unwrap().w)
            .sum();
        println!(
            "T={t:<4} S composed {:.8}  S line sum {:.8}  S reduced {:.8}",
            (-exponent_multi(&f, &bath)?).exp(),
            (-summed).exp(),
            (-exponent_multi(&f, &single)?).exp()
        );
    }

    let seqs = times
        .iter()
        .map(|&t| proto.build(t, MergePolicy::Keep))
        .collect::<Result<Vec<_>, _>>()?;
    for (name, b) in [("7 lines", bath), ("reduced", single)] {
        let curve = ensemble_fidelity(&RunConfig {
            sequences: seqs.clone(),
            bath: b,
            static_field: StaticFieldModel::zero(),
            errors: PulseErrors::ideal(),
            n_trajectories: 20_000,
            seed: 5,
        })?;
        println!("MC {name}: {:?} ± {:?}", curve.sx, curve.sx_err);
    }
    Ok(())
}

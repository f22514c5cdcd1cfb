//! Hahn echo under the default bath: Monte Carlo against `exp[-(T/T_2)^3]`.

use ddkit::filter::w_general;
use ddkit::fit::{fit_cubic_decay, DEFAULT_WINDOW};
use ddkit::noise::{echo_analytic, echo_t2};
use ddkit::sequence::hahn_echo;
use ddkit::spin::ensemble_fidelity;
use ddkit::{BathComposition, OuParams, PulseErrors, RunConfig, StaticFieldModel};

fn main() -> ddkit::Result<()> {
    let bath = OuParams::nv_default();
    let t2 = echo_t2(&bath);
    let times: Vec<f64> = (1..=12).map(|i| 0.5 * i as f64).collect();
    let cfg = RunConfig {
        sequences: times.iter().map(|&t| hahn_echo(t)).collect::<Result<_, _>>()?,
        bath: BathComposition::single(bath),
        static_field: StaticFieldModel::zero(),
        errors: PulseErrors::ideal(),
        n_trajectories: 20_000,
        seed: 11,
    };
    let curve = ensemble_fidelity(&cfg)?;
    println!("T_us   S_mc      err       S_exact   S_cubic");
    for (i, seq) in cfg.sequences.iter().enumerate() {
        let t = times[i];
        let exact = w_general(&seq.filter_function(), &bath)?.s;
        println!(
            "{:<6} {:.5}  {:.5}  {exact:.5}   {:.5}",
            t,
            curve.sx[i],
            curve.sx_err[i],
            echo_analytic(&bath, t)
        );
    }
    let fit = fit_cubic_decay(&curve.t, &curve.sx, Some(&curve.sx_err), DEFAULT_WINDOW)?;
    println!(
        "fitted T_2 = {:.3} ± {:.3} us, predicted {t2:.3} us",
        fit.t1e, fit.t1e_err
    );
    Ok(())
}

//! Seeded Monte Carlo over noise trajectories.
//!
//! Each trajectory draws `I_z` (one uniform), the initial value of every
//! noise line (one normal each), then two normals per dynamic line for every
//! nonzero free segment. Streams are derived from `(seed, T-index)` and the
//! trajectory index, so any trajectory can be replayed in isolation. Sums are
//! accumulated over fixed chunks and folded in chunk order, which makes the
//! result independent of the rayon thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::unitary::{free_phase_unitary, pulse_unitary, SpinUnitary};
use super::PulseErrors;
use crate::error::{invalid, Result};
use crate::noise::{BathComposition, OuParams, StaticFieldModel, StepCoefficients};
use crate::sequence::{Axis, PulseSequence};

/// Trajectories per reduction chunk. Part of the reproducibility contract.
pub const CHUNK: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitialState {
    X,
    Y,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// One sequence per sampled total time.
    pub sequences: Vec<PulseSequence>,
    pub bath: BathComposition,
    pub static_field: StaticFieldModel,
    pub errors: PulseErrors,
    pub n_trajectories: usize,
    pub seed: u64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trajectories == 0 {
            return Err(invalid("need at least one trajectory"));
        }
        if self.sequences.is_empty() {
            return Err(invalid("no sequences to simulate"));
        }
        self.errors.validate()
    }
}

/// Ensemble means of `S_X` (from |X⟩) and `S_Y` (from |Y⟩) with standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityCurve {
    pub t: Vec<f64>,
    pub sx: Vec<f64>,
    pub sx_err: Vec<f64>,
    pub sy: Vec<f64>,
    pub sy_err: Vec<f64>,
    pub n_trajectories: usize,
}

impl FidelityCurve {
    pub fn s(&self, state: InitialState) -> (&[f64], &[f64]) {
        match state {
            InitialState::X => (&self.sx, &self.sx_err),
            InitialState::Y => (&self.sy, &self.sy_err),
        }
    }
}

/// Final Bloch vectors for both initial states under one noise realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryResult {
    pub iz: i8,
    pub from_x: [f64; 3],
    pub from_y: [f64; 3],
}

#[derive(Debug, Clone, Copy)]
enum Step {
    Free { len: f64, coeff: usize },
    Pulse(Axis),
}

/// A sequence lowered to free segments and pulses, with per-line step
/// coefficients precomputed for each distinct segment length.
#[derive(Debug, Clone)]
pub struct SegmentPlan {
    steps: Vec<Step>,
    lines: Vec<OuParams>,
    /// `coeffs[line][k]` for the k-th distinct length; empty for static lines
    coeffs: Vec<Vec<StepCoefficients>>,
    /// `[axis][I_z + 1]`
    pulses: [[SpinUnitary; 3]; 2],
    static_field: StaticFieldModel,
}

fn axis_index(a: Axis) -> usize {
    match a {
        Axis::X => 0,
        Axis::Y => 1,
    }
}

impl SegmentPlan {
    pub fn new(
        seq: &PulseSequence,
        bath: &BathComposition,
        static_field: &StaticFieldModel,
        errors: &PulseErrors,
    ) -> Result<Self> {
        errors.validate()?;
        let mut lengths: Vec<f64> = Vec::new();
        let mut steps = Vec::with_capacity(2 * seq.len() + 1);
        let mut t = 0.0;
        let mut push_free = |steps: &mut Vec<Step>, len: f64| {
            if len > 0.0 {
                let coeff = match lengths.iter().position(|&l| l == len) {
                    Some(k) => k,
                    None => {
                        lengths.push(len);
                        lengths.len() - 1
                    }
                };
                steps.push(Step::Free { len, coeff });
            }
        };
        for p in &seq.pulses {
            push_free(&mut steps, p.time - t);
            steps.push(Step::Pulse(p.axis));
            t = p.time;
        }
        push_free(&mut steps, seq.duration - t);

        let coeffs = bath
            .lines
            .iter()
            .map(|line| {
                if line.is_static() {
                    Ok(Vec::new())
                } else {
                    lengths.iter().map(|&l| StepCoefficients::new(line, l)).collect()
                }
            })
            .collect::<Result<Vec<_>>>()?;

        let mut pulses = [[SpinUnitary::IDENTITY; 3]; 2];
        for axis in [Axis::X, Axis::Y] {
            for iz in -1i8..=1 {
                pulses[axis_index(axis)][(iz + 1) as usize] = pulse_unitary(axis, errors, iz)?;
            }
        }
        Ok(Self {
            steps,
            lines: bath.lines.clone(),
            coeffs,
            pulses,
            static_field: *static_field,
        })
    }

    /// Evolves one realization; `field` is scratch space for the line values.
    pub fn run<R: rand::Rng + ?Sized>(&self, rng: &mut R, field: &mut Vec<f64>) -> TrajectoryResult {
        let draw = self.static_field.sample(rng);
        field.clear();
        field.extend(self.lines.iter().map(|l| l.sample_stationary(rng)));
        let pulses = &self.pulses;
        let iz_slot = (draw.iz + 1) as usize;
        let mut q = SpinUnitary::IDENTITY;
        for step in &self.steps {
            match *step {
                Step::Free { len, coeff } => {
                    let mut phi = draw.field * len;
                    for (j, b) in field.iter_mut().enumerate() {
                        let c = &self.coeffs[j];
                        if c.is_empty() {
                            phi += *b * len;
                        } else {
                            let s = c[coeff].sample(*b, rng);
                            phi += s.phase_increment;
                            *b = s.b_next;
                        }
                    }
                    q = q.then(free_phase_unitary(phi));
                }
                Step::Pulse(a) => q = q.then(pulses[axis_index(a)][iz_slot]),
            }
        }
        TrajectoryResult {
            iz: draw.iz,
            from_x: q.rotate([1.0, 0.0, 0.0]),
            from_y: q.rotate([0.0, 1.0, 0.0]),
        }
    }
}

fn point_seed(seed: u64, t_index: usize) -> u64 {
    // splitmix64 finalizer keeps neighbouring indices decorrelated
    let mut z = seed
        ^ (t_index as u64)
            .wrapping_add(1)
            .wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// RNG for trajectory `traj` at sample point `t_index`.
pub fn trajectory_rng(seed: u64, t_index: usize, traj: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(point_seed(seed, t_index));
    rng.set_stream(traj as u64);
    rng
}

/// Replays a single trajectory of `cfg` at sample point `t_index`.
pub fn run_trajectory(cfg: &RunConfig, t_index: usize, traj: usize) -> Result<TrajectoryResult> {
    let seq = cfg
        .sequences
        .get(t_index)
        .ok_or_else(|| invalid(format!("no sample point {t_index}")))?;
    let plan = SegmentPlan::new(seq, &cfg.bath, &cfg.static_field, &cfg.errors)?;
    let mut rng = trajectory_rng(cfg.seed, t_index, traj);
    Ok(plan.run(&mut rng, &mut Vec::new()))
}

#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    sx: f64,
    sx2: f64,
    sy: f64,
    sy2: f64,
}

fn point(plan: &SegmentPlan, seed: u64, t_index: usize, n: usize) -> Sums {
    let chunks = n.div_ceil(CHUNK);
    let partial: Vec<Sums> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut s = Sums::default();
            let mut scratch = Vec::new();
            for traj in c * CHUNK..((c + 1) * CHUNK).min(n) {
                let mut rng = trajectory_rng(seed, t_index, traj);
                let r = plan.run(&mut rng, &mut scratch);
                s.sx += r.from_x[0];
                s.sx2 += r.from_x[0] * r.from_x[0];
                s.sy += r.from_y[1];
                s.sy2 += r.from_y[1] * r.from_y[1];
            }
            s
        })
        .collect();
    partial.iter().fold(Sums::default(), |a, b| Sums {
        sx: a.sx + b.sx,
        sx2: a.sx2 + b.sx2,
        sy: a.sy + b.sy,
        sy2: a.sy2 + b.sy2,
    })
}

fn mean_err(sum: f64, sum2: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = sum / nf;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = ((sum2 - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

/// Mean Bloch components and standard errors at every sampled sequence.
pub fn ensemble_fidelity(cfg: &RunConfig) -> Result<FidelityCurve> {
    cfg.validate()?;
    let n = cfg.n_trajectories;
    let mut curve = FidelityCurve {
        t: Vec::new(),
        sx: Vec::new(),
        sx_err: Vec::new(),
        sy: Vec::new(),
        sy_err: Vec::new(),
        n_trajectories: n,
    };
    for (i, seq) in cfg.sequences.iter().enumerate() {
        let plan = SegmentPlan::new(seq, &cfg.bath, &cfg.static_field, &cfg.errors)?;
        let s = point(&plan, cfg.seed, i, n);
        let (sx, sx_err) = mean_err(s.sx, s.sx2, n);
        let (sy, sy_err) = mean_err(s.sy, s.sy2, n);
        curve.t.push(seq.duration);
        curve.sx.push(sx);
        curve.sx_err.push(sx_err);
        curve.sy.push(sy);
        curve.sy_err.push(sy_err);
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::{cpmg_family, hahn_echo, CpmgVariant, MergePolicy, Protocol};

    fn cfg(seqs: Vec<PulseSequence>, bath: BathComposition, errors: PulseErrors) -> RunConfig {
        RunConfig {
            sequences: seqs,
            bath,
            static_field: StaticFieldModel::nv_default(),
            errors,
            n_trajectories: 600,
            seed: 7,
        }
    }

    #[test]
    fn no_noise_no_decay() {
        let seqs = vec![Protocol::Xy4(2).build(3.0, MergePolicy::Keep).unwrap()];
        let mut c = cfg(seqs, BathComposition::new(vec![]), PulseErrors::ideal());
        c.static_field = StaticFieldModel::zero();
        let f = ensemble_fidelity(&c).unwrap();
        assert!((f.sx[0] - 1.0).abs() < 1e-12 && (f.sy[0] - 1.0).abs() < 1e-12);
        assert!(f.sx_err[0] < 1e-12);
    }

    #[test]
    fn static_echo_refocuses() {
        let bath = BathComposition::single(OuParams::static_line(2.0).unwrap());
        let c = cfg(vec![hahn_echo(3.7).unwrap()], bath, PulseErrors::ideal());
        let f = ensemble_fidelity(&c).unwrap();
        assert!((f.sx[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_cpmg_period_matches_rotation_angle() {
        // Static detuning only: S_Y = cos θ with θ = −2(ε_x cos φ + 2 n_z sin φ).
        let phi_d: f64 = 0.3;
        let tau = 1.0;
        let e = PulseErrors {
            eps_x: -0.002,
            eps_y: 0.0,
            n_y: 0.0,
            m_x: 0.0,
            n_0: 0.001,
            m_0: 0.0,
        };
        let seq = cpmg_family(CpmgVariant::Cpmg, 1, tau).unwrap();
        let mut c = cfg(vec![seq], BathComposition::new(vec![]), e);
        c.static_field = StaticFieldModel::new(0.0, phi_d / tau, [1.0, 0.0, 0.0]).unwrap();
        c.n_trajectories = 1;
        let f = ensemble_fidelity(&c).unwrap();
        let theta = -2.0 * (e.eps_x * phi_d.cos() + 2.0 * e.n_0 * phi_d.sin());
        assert!((f.sy[0] - theta.cos()).abs() < 1e-8);
        assert!((f.sx[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let seqs: Vec<_> = [1.0, 2.0, 4.0]
            .iter()
            .map(|&t| Protocol::Cpmg(4).build(t, MergePolicy::Keep).unwrap())
            .collect();
        let mut c = cfg(
            seqs,
            BathComposition::single(OuParams::nv_default()),
            PulseErrors::measured(),
        );
        c.n_trajectories = 2 * CHUNK + 17;
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| ensemble_fidelity(&c).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a, b);
        let r = run_trajectory(&c, 2, 5).unwrap();
        assert!(r.from_x.iter().map(|v| v * v).sum::<f64>() - 1.0 < 1e-12);
    }

    #[test]
    fn ideal_errors_match_ideal_engine() {
        // Zero-valued errors must consume the RNG exactly like the ideal case.
        let seq = Protocol::Xy8(2).build(5.0, MergePolicy::Keep).unwrap();
        let bath = BathComposition::single(OuParams::nv_default());
        let a = ensemble_fidelity(&cfg(vec![seq.clone()], bath.clone(), PulseErrors::ideal())).unwrap();
        let zero = PulseErrors {
            eps_x: 0.0,
            eps_y: 0.0,
            n_y: 0.0,
            m_x: 0.0,
            n_0: 0.0,
            m_0: 0.0,
        };
        let b = ensemble_fidelity(&cfg(vec![seq], bath, zero)).unwrap();
        assert_eq!(a, b);
    }
}

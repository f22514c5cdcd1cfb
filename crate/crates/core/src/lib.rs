//! Dynamical decoupling of a single spin-1/2 in Ornstein-Uhlenbeck dephasing noise.
//!
//! The crate has three layers:
//!
//! * [`sequence`] builds pulse sequences (CPMG, XY4/XY8, PDD/SDD, CDD, UDD, QDD
//!   or a text DSL) and lowers them to ±1 filter functions.
//! * [`filter`] integrates filter functions exactly against the exponential
//!   noise kernel, with periodic, recursive and small-`Rτ` closed forms as
//!   independent cross-checks.
//! * [`spin`] runs seeded, thread-count independent Monte Carlo of the spin
//!   under exact noise trajectories and faulty pulses, and expands static
//!   error propagators to first order.
//!
//! [`p1`] derives the ESR lines of substitutional nitrogen that feed a
//! multi-line bath, and [`harness`] ties everything to config files,
//! shipped presets and CSV/JSON tables.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod filter;
pub mod fit;
pub mod harness;
pub mod math;
pub mod noise;
pub mod p1;
pub mod sequence;
pub mod spin;

pub use error::{Error, Result};
pub use filter::{w_general, w_periodic, DecayResult, PiecewiseLinear};
pub use noise::{BathComposition, OuParams, StaticFieldModel};
pub use sequence::{Axis, FilterFunction, Protocol, Pulse, PulseSequence};
pub use spin::{FidelityCurve, PulseErrors, RunConfig};

//! Bounded-confidence opinion dynamics on a continuum of agents, simulated
//! with weighted particles and an exponential interaction function.
//!
//! * [`particles`] builds weighted Dirac ensembles from Gaussian mixtures and
//!   mollifies them back into smooth densities.
//! * [`kernel`] holds the interaction law and the closed-form fields `g`,
//!   `h`, `H` and the concentration functional `‖g‖²`.
//! * [`dynamics`] evaluates particle velocities, steps them in time and
//!   records diagnostics.
//! * [`continuum`] solves the equivalent elliptic equations on a grid and
//!   cross-checks them against the particle picture.
//! * [`harness`] defines the experiment presets and self-convergence studies.

pub mod continuum;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod kernel;
pub mod particles;
pub mod summation;
pub mod tridiag;

pub use continuum::{check_integrals, FieldTable, Grid};
pub use dynamics::{
    simulate, step_midpoint, velocity_fast, velocity_naive, ClusterRule, Diagnostics, Integrator, SimulationConfig,
    Snapshots, TrajectoryRecord, VelocityMethod,
};
pub use error::{Error, Result};
pub use harness::{ConvergenceReport, Preset, Study};
pub use kernel::{concentration, eta, field_H, field_g, field_h, KernelParams};
pub use particles::{discretize, mollify, DensitySpec, GaussianComponent, ParticleEnsemble, WeightMode};
pub use summation::Summation;

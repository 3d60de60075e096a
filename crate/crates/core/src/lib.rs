//! Seismic modeling and reverse time migration with runtime loop-schedule tuning.
//!
//! The wave kernels run on a persistent [`ThreadPool`] under a [`SchedulePolicy`]. The
//! [`autotune`](mod@autotune) module picks a dynamic chunk size by coupled simulated
//! annealing over measured kernel timings.

// Range checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod autotune;
pub mod csa;
pub mod error;
pub mod io;
pub mod model;
pub mod parsched;
pub mod propagator;
pub mod rtm;

pub use autotune::{autotune, autotune_with, StepTimer, TuneConfig, TuneResult};
pub use csa::{minimize, AcceptanceRule, CsaParams, Domain};
pub use error::{Error, Result};
pub use model::{
    build_two_layer_model, check_stability, load_velocity_model, ricker, AcquisitionGeometry,
    Grid3, GridPoint, RickerSource, Seismogram, StabilityReport, VelocityModel,
};
pub use parsched::{ScheduleKind, SchedulePolicy, ThreadPool};
pub use propagator::{
    compute_boundary_coeffs, forward_model, BoundaryCoeffs, Propagator, ReceiverInjector,
    WavefieldPair,
};
pub use rtm::{migrate_all, migrate_shot, ImageVolume, MigrationReport, RtmConfig};

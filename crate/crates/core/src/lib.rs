//! Movable-antenna position design for multiuser uplink receivers.
//!
//! Antenna positions are chosen on the slow timescale from statistical channel
//! knowledge (line-of-sight geometry, Rician K-factors, path loss) by projected
//! gradient ascent on one of three surrogate objectives. The receive
//! beamformers (ZF, MMSE, MMSE-SIC) then operate on instantaneous channels at
//! the chosen positions, and the achieved ergodic sum rate is estimated by
//! seeded Monte Carlo.
//!
//! Positions are expressed in units of wavelength.

pub mod error;
pub mod model;
pub mod montecarlo;
pub mod objectives;
pub mod optimizer;
pub mod receivers;

mod linalg;

pub use error::{Error, Result};
pub use model::{
    assemble_channel, los_matrix, sample_nlos, steering_vector, AntennaPositions,
    ChannelRealization, Constraints, RandomStream, SystemConfig, GENERATOR_NAME,
};
pub use montecarlo::{
    ergodic_sum_rate, ergodic_sum_rates, fpa_positions, ErgodicEstimate, ReceiverKind,
};
pub use objectives::{
    finite_difference_gradient, mmse_saa_grad, mmse_saa_objective, sic_bound_grad,
    sic_bound_objective, zf_surrogate, zf_surrogate_grad, MmseSampleSet, Objective,
    SurrogateObjective,
};
pub use optimizer::{
    multi_start, pga_optimize, project, OptimizationTrace, PgaOptions, StopReason, TraceEntry,
};
pub use receivers::{
    mmse_receiver, sic_receiver, sic_sum_rate, sinr_of, zf_receiver, Beamformer, RatePerUser,
};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

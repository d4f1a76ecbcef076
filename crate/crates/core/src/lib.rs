//! Stochastic thermodynamics of a levitated classical particle driven by the
//! force and noise of a quantum oscillator in a coherent or squeezed-coherent
//! state.
//!
//! The analytic pipeline ([`thermo::analyze`]) and the trajectory sampler
//! ([`montecarlo::run_ensemble`]) share only the model types, so each can
//! validate the other.

pub mod error;
pub mod model;
pub mod montecarlo;
pub mod noise;
mod quadrature;
pub mod response;
pub mod thermo;

pub use error::{Error, ParamViolation, Result};
pub use model::{
    coulomb_coupling, shifted_frequency, validate_params, CoulombGeometry, Experiment,
    InitialCondition, QuantumStateSpec, ScenarioFlags, System, SystemParams,
};
pub use noise::{build_noise_model, KernelValue, NoiseComponent, NoiseModel, QuadratureNoise};
pub use response::{
    homogeneous_solution, impulse_response, mean_position, position_covariance, ImpulseResponse,
    InitialState,
};
pub use thermo::{
    analyze, analyze_durations, equilibrium_deltas, free_energy_difference, free_lunch_probability,
    mean_work, work_variance, EquilibriumDeltas, Extremum, ForceProtocol, FreeLunch, VarianceBudget,
    WorkStatistics,
};
pub use montecarlo::{
    compare_to_analytic, propagate_step, run_ensemble, simulate_work_sample, ComparisonReport,
    SimGrid, TrajectoryEnsemble,
};

//! Independent verification of computed tori by direct integration of the
//! truncated flows.

pub mod checks;
pub mod integrator;

pub use checks::{
    birkhoff_frequencies, check_invariance, loglog_slope, check_periodic_orbit, measure_frequencies, phase_distance,
    tilde_flow_coefficients, InvarianceReport, PeriodSettings, PeriodicReport,
};
pub use integrator::{integrate_flow, richardson_endpoint, FlowSpec, Trajectory};

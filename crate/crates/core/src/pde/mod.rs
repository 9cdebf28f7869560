//! Finite-difference propagation of the field equation on a line or a
//! circle, with the energy diagnostics and front tracking used to check
//! travelling-wave predictions.

mod diagnostics;
mod field;
mod run;

pub use diagnostics::{
    boundary_flux, energy_report, front_position, gradient, gradient_square, kinetic_integral,
    measure_velocity, rate_integral, shape_drift, trapezoid, wave_content, EnergyReport,
    VelocityFit,
};
pub use field::{
    init_from_profile, profile_velocity, step, Domain, DomainSpec, Field, InitSpec, Placement,
    BOUNDARY_GUARD, LINE_PADDING,
};
pub use run::{run, Record, RunReport, RunSpec, BALANCE_CONSTANT};

//! Shooting from the barrier tops of the washboard: the kink drag `mu_hat`,
//! soliton arrays, half-arrays and tilt sweeps.

mod array;
mod fate;
mod kink;
mod sweep;

use serde::{Deserialize, Serialize};

use crate::integrate::Tolerances;

pub use array::{
    find_array_mu, find_array_mu_with, half_array_profile, half_array_profile_with, orbit_distance,
    period_to_speed, period_to_speed_with, ArrayWave, HalfArray,
};
pub use fate::{classify_fate, launch_from_saddle, Fate, FateReport, SaddleLaunch};
pub use kink::{find_kink_mu, find_kink_mu_with, search_kink_mu, KinkSearch};
pub use sweep::{extrapolate_to_zero, sweep_mu_hat, sweep_mu_hat_with, KinkPoint, SweepRow};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingOptions {
    /// Launch offset from the saddle along the unstable direction.
    pub delta: f64,
    /// Radius of the phase-space ball around `(g_0^M, 0)` counted as arrival.
    pub connection_radius: f64,
    /// A decided run whose energy at the decision point lies this close to
    /// `U(g_0^M)` also counts as arrival.
    pub connection_energy: f64,
    /// Maximum `xi` span of one shot.
    pub horizon: f64,
    pub tolerances: Tolerances,
    /// Grid spacing of returned profiles.
    pub profile_spacing: f64,
    /// Kink profiles stop this far below `g_0^M`.
    pub tail_gap: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            delta: 1e-8,
            connection_radius: 1e-9,
            connection_energy: 1e-9,
            horizon: crate::integrate::DEFAULT_HORIZON,
            tolerances: Tolerances::near_saddle(),
            profile_spacing: 0.01,
            tail_gap: 1e-7,
        }
    }
}

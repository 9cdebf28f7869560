//! Energy, front tracking and velocity fits on a [`Field`].

use serde::{Deserialize, Serialize};

use super::field::{Domain, Field, Placement};
use crate::error::{Error, Result};
use crate::model::{energy_density, TWO_PI};
use crate::profile::WaveProfile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// `H`, trapezoidal sum of `h`.
    pub total: f64,
    pub h: Vec<f64>,
    pub j: Vec<f64>,
}

/// Trapezoid weights: halved ends on a line, uniform on a circle.
fn weight(field: &Field, i: usize) -> f64 {
    let n = field.len();
    if !field.is_circle() && (i == 0 || i == n - 1) {
        0.5 * field.dx
    } else {
        field.dx
    }
}

/// `phi_x` by centred differences, one-sided second order at pinned ends.
pub fn gradient(field: &Field) -> Vec<f64> {
    let n = field.len();
    let p = &field.phi;
    let inv = 0.5 / field.dx;
    (0..n)
        .map(|i| match field.domain {
            Domain::Line { .. } if i == 0 => (-3.0 * p[0] + 4.0 * p[1] - p[2]) * inv,
            Domain::Line { .. } if i == n - 1 => (3.0 * p[n - 1] - 4.0 * p[n - 2] + p[n - 3]) * inv,
            _ => {
                let i = i as isize;
                (field.wrapped(i + 1) - field.wrapped(i - 1)) * inv
            }
        })
        .collect()
}

/// `phi_x^2` as the mean of the squared one-sided differences at each
/// node; its trapezoid sum is the gradient energy the scheme conserves.
pub fn gradient_square(field: &Field) -> Vec<f64> {
    let n = field.len();
    let inv = 1.0 / field.dx;
    let edge = |i: isize| {
        let d = (field.wrapped(i + 1) - field.wrapped(i)) * inv;
        d * d
    };
    (0..n as isize)
        .map(|i| match field.domain {
            Domain::Line { .. } if i == 0 => edge(0),
            Domain::Line { .. } if i == n as isize - 1 => edge(i - 1),
            _ => 0.5 * (edge(i - 1) + edge(i)),
        })
        .collect()
}

/// `h` with the gradient term from [`gradient_square`] and `j` from the
/// centred `phi_x`.
pub fn energy_report(field: &Field, gamma: f64) -> EnergyReport {
    let phi_x = gradient(field);
    let squares = gradient_square(field);
    let (h, j): (Vec<f64>, Vec<f64>) = (0..field.len())
        .map(|i| {
            let e = energy_density(field.phi[i], phi_x[i], field.phi_t[i], gamma);
            let h = e.h + 0.5 * (squares[i] - phi_x[i] * phi_x[i]);
            (h, e.j)
        })
        .unzip();
    let total = trapezoid(field, |i| h[i]);
    EnergyReport { total, h, j }
}

/// `sum w f(i)`, in grid order.
pub fn trapezoid(field: &Field, f: impl Fn(usize) -> f64) -> f64 {
    (0..field.len()).map(|i| weight(field, i) * f(i)).sum()
}

/// `sum w phi_t^2`.
pub fn kinetic_integral(field: &Field) -> f64 {
    trapezoid(field, |i| field.phi_t[i] * field.phi_t[i])
}

/// `sum w phi_t`.
pub fn rate_integral(field: &Field) -> f64 {
    trapezoid(field, |i| field.phi_t[i])
}

/// `sum w (phi_t^2 + phi_x^2)`.
pub fn wave_content(field: &Field) -> f64 {
    let squares = gradient_square(field);
    trapezoid(field, |i| field.phi_t[i] * field.phi_t[i] + squares[i])
}

/// Net energy current into the domain, `j(right) - j(left)`; zero on a circle.
pub fn boundary_flux(report: &EnergyReport, field: &Field) -> f64 {
    match field.domain {
        Domain::Line { .. } => report.j[field.len() - 1] - report.j[0],
        Domain::Circle { .. } => 0.0,
    }
}

/// Front position: the first crossing of a mid level `pi - asin(gamma) +
/// 2 pi k`, by linear interpolation, moved back by `k` cells on a circle so
/// that the position is continuous as crossings enter and leave.
pub fn front_position(field: &Field, gamma: f64) -> Option<f64> {
    let mid = std::f64::consts::PI - gamma.asin();
    let n = field.len();
    let pairs = match field.domain {
        Domain::Line { .. } => n - 1,
        Domain::Circle { .. } => n,
    };
    for i in 0..pairs {
        let a = field.phi[i];
        let b = field.wrapped(i as isize + 1);
        let (lo, hi) = (a.min(b), a.max(b));
        let k = ((hi - mid) / TWO_PI).floor();
        let level = mid + TWO_PI * k;
        if level < lo || level > hi || a == b {
            continue;
        }
        // a crossing exactly at the right node belongs to the next pair
        if level == b && i + 1 < pairs {
            continue;
        }
        let x = field.x(i) + field.dx * (level - a) / (b - a);
        return Some(match field.domain {
            Domain::Line { .. } => x,
            Domain::Circle {
                length, winding, ..
            } => {
                if winding == 0 {
                    x
                } else {
                    x - k * length / winding as f64
                }
            }
        });
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityFit {
    pub velocity: f64,
    pub intercept: f64,
    /// RMS deviation from the fitted line.
    pub residual: f64,
    pub samples: usize,
}

/// Least-squares line through `(t, x_c)` after dropping the first
/// `discard` fraction of the time span.
pub fn measure_velocity(history: &[(f64, f64)], discard: f64) -> Result<VelocityFit> {
    if !(0.0..1.0).contains(&discard) {
        return Err(Error::InvalidParameter {
            name: "discard",
            value: discard,
            reason: "transient fraction must lie in [0, 1)",
        });
    }
    if history.is_empty() {
        return Err(Error::NoCrossing);
    }
    let (t0, t1) = (history[0].0, history[history.len() - 1].0);
    let cut = t0 + discard * (t1 - t0);
    let kept: Vec<(f64, f64)> = history.iter().copied().filter(|s| s.0 >= cut).collect();
    if kept.len() < 10 {
        return Err(Error::TooFewSamples {
            needed: 10,
            got: kept.len(),
        });
    }
    let m = kept.len() as f64;
    let tm = kept.iter().map(|s| s.0).sum::<f64>() / m;
    let xm = kept.iter().map(|s| s.1).sum::<f64>() / m;
    let stt: f64 = kept.iter().map(|s| (s.0 - tm) * (s.0 - tm)).sum();
    let stx: f64 = kept.iter().map(|s| (s.0 - tm) * (s.1 - xm)).sum();
    let velocity = stx / stt;
    let intercept = xm - velocity * tm;
    let ss: f64 = kept
        .iter()
        .map(|s| {
            let r = s.1 - (intercept + velocity * s.0);
            r * r
        })
        .sum();
    Ok(VelocityFit {
        velocity,
        intercept,
        residual: (ss / m).sqrt(),
        samples: kept.len(),
    })
}

/// Sup-norm distance between the field and the profile placed with its
/// centre on `front`.
pub fn shape_drift(field: &Field, profile: &WaveProfile, velocity: f64, front: f64) -> f64 {
    let place = Placement {
        center: front,
        velocity,
    };
    (0..field.len())
        .map(|i| (field.phi[i] - place.sample(profile, field.x(i)).0).abs())
        .fold(0.0, f64::max)
}

//! Grid field and the explicit time step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{classify_speed, Params, SpeedRegime, TWO_PI};
use crate::profile::{ProfileKind, WaveProfile};

/// Padding beyond the profile support required on a line.
pub const LINE_PADDING: f64 = 40.0;
/// Closest a front may come to a pinned end.
pub const BOUNDARY_GUARD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Domain {
    /// `[left, right]`, both ends included in the grid and pinned.
    Line {
        left: f64,
        right: f64,
        left_value: f64,
        right_value: f64,
    },
    /// `[origin, origin + length)` with `phi(x + length) = phi(x) + 2 pi winding`.
    Circle {
        origin: f64,
        length: f64,
        winding: i64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub phi: Vec<f64>,
    pub phi_t: Vec<f64>,
    pub dx: f64,
    pub domain: Domain,
    pub t: f64,
}

fn grid_count(length: f64, dx: f64, multiple: usize) -> Result<usize> {
    if !(dx > 0.0) || !dx.is_finite() {
        return Err(Error::InvalidParameter {
            name: "dx",
            value: dx,
            reason: "must be positive and finite",
        });
    }
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::InvalidParameter {
            name: "length",
            value: length,
            reason: "domain length must be positive and finite",
        });
    }
    let m = multiple.max(1);
    let n = ((length / dx / m as f64).round() as usize).max(1) * m;
    if n < 4 {
        return Err(Error::InvalidParameter {
            name: "dx",
            value: dx,
            reason: "grid needs at least 4 cells",
        });
    }
    Ok(n)
}

impl Field {
    /// Line field from `init(x) -> (phi, phi_t)`; the ends are pinned to
    /// their initial values. `dx` is adjusted to divide the length.
    pub fn line(left: f64, right: f64, dx: f64, init: impl Fn(f64) -> (f64, f64)) -> Result<Self> {
        let n = grid_count(right - left, dx, 1)?;
        let dx = (right - left) / n as f64;
        let (phi, mut phi_t): (Vec<f64>, Vec<f64>) =
            (0..=n).map(|i| init(left + i as f64 * dx)).unzip();
        phi_t[0] = 0.0;
        phi_t[n] = 0.0;
        let (left_value, right_value) = (phi[0], phi[n]);
        Ok(Field {
            phi,
            phi_t,
            dx,
            domain: Domain::Line {
                left,
                right,
                left_value,
                right_value,
            },
            t: 0.0,
        })
    }

    /// Circle field; `init` is sampled on `[origin, origin + length)`, with
    /// the cell count rounded to a multiple of `cells_multiple`.
    pub fn circle(
        origin: f64,
        length: f64,
        winding: i64,
        dx: f64,
        cells_multiple: usize,
        init: impl Fn(f64) -> (f64, f64),
    ) -> Result<Self> {
        let n = grid_count(length, dx, cells_multiple)?;
        let dx = length / n as f64;
        let (phi, phi_t) = (0..n).map(|i| init(origin + i as f64 * dx)).unzip();
        Ok(Field {
            phi,
            phi_t,
            dx,
            domain: Domain::Circle {
                origin,
                length,
                winding,
            },
            t: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        match self.domain {
            Domain::Line { left, .. } => left + i as f64 * self.dx,
            Domain::Circle { origin, .. } => origin + i as f64 * self.dx,
        }
    }

    pub fn is_circle(&self) -> bool {
        matches!(self.domain, Domain::Circle { .. })
    }

    /// `phi` at index `i` extended across the circle seam.
    pub(crate) fn wrapped(&self, i: isize) -> f64 {
        let n = self.phi.len() as isize;
        match self.domain {
            Domain::Circle { winding, .. } => {
                let k = i.div_euclid(n);
                self.phi[i.rem_euclid(n) as usize] + TWO_PI * (winding * k as i64) as f64
            }
            Domain::Line { .. } => self.phi[i.clamp(0, n - 1) as usize],
        }
    }

    /// Rest of the field equation, `phi_xx - sin(phi) - gamma`, at every
    /// point (zero at pinned ends).
    pub(crate) fn force(&self, gamma: f64, out: &mut [f64]) {
        let n = self.phi.len();
        let inv = 1.0 / (self.dx * self.dx);
        let p = &self.phi;
        for i in 1..n - 1 {
            out[i] = (p[i - 1] - 2.0 * p[i] + p[i + 1]) * inv - p[i].sin() - gamma;
        }
        match self.domain {
            Domain::Line { .. } => {
                out[0] = 0.0;
                out[n - 1] = 0.0;
            }
            Domain::Circle { .. } => {
                for i in [0, n - 1] {
                    let ii = i as isize;
                    out[i] = (self.wrapped(ii - 1) - 2.0 * p[i] + self.wrapped(ii + 1)) * inv
                        - p[i].sin()
                        - gamma;
                }
            }
        }
    }

    /// Winding number `[phi(right) - phi(left)] / 2 pi` (per circumference
    /// on a circle, summed over the seam).
    pub fn winding(&self) -> f64 {
        match self.domain {
            Domain::Line { .. } => (self.phi[self.phi.len() - 1] - self.phi[0]) / TWO_PI,
            Domain::Circle { .. } => {
                let n = self.phi.len() as isize;
                (self.wrapped(n) - self.phi[0]) / TWO_PI
            }
        }
    }
}

/// One step of
/// `(phi^{n+1} - 2 phi^n + phi^{n-1}) / dt^2 = D2 phi^n - sin phi^n - gamma - alpha (phi^{n+1} - phi^{n-1}) / (2 dt)`,
/// carried in the
/// equivalent one-step form on `(phi, phi_t)` with `phi_t^n` the centred
/// difference; from rest data this is the Taylor start.
pub fn step(field: &mut Field, dt: f64, params: Params) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter {
            name: "dt",
            value: dt,
            reason: "must be positive and finite",
        });
    }
    let limit = 0.9 * field.dx;
    if dt > limit {
        return Err(Error::Cfl { dt, limit });
    }
    let (gamma, alpha) = (params.gamma, params.alpha);
    let n = field.phi.len();
    let mut f = vec![0.0; n];
    field.force(gamma, &mut f);
    let half = 0.5 * dt;
    let mut v_half = vec![0.0; n];
    for i in 0..n {
        v_half[i] = field.phi_t[i] + half * (f[i] - alpha * field.phi_t[i]);
        field.phi[i] += dt * v_half[i];
    }
    if let Domain::Line {
        left_value,
        right_value,
        ..
    } = field.domain
    {
        field.phi[0] = left_value;
        field.phi[n - 1] = right_value;
        v_half[0] = 0.0;
        v_half[n - 1] = 0.0;
    }
    field.force(gamma, &mut f);
    let damp = 1.0 / (1.0 + alpha * half);
    for i in 0..n {
        field.phi_t[i] = (v_half[i] + half * f[i]) * damp;
    }
    field.t += dt;
    if field.phi.iter().chain(&field.phi_t).any(|v| !v.is_finite()) {
        return Err(Error::BlowUp { t: field.t });
    }
    Ok(())
}

/// Where and how to place a profile on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitSpec {
    pub domain: DomainSpec,
    pub dx: f64,
    /// Position of `xi = 0` at `t = 0`.
    pub center: f64,
    /// Speed for profiles whose velocity is free (`alpha = mu = 0`).
    pub velocity: Option<f64>,
    /// Accept an array on a line, cut off at the pinned ends.
    pub truncate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum DomainSpec {
    Line {
        left: f64,
        right: f64,
    },
    /// Circle holding `periods` array cells of length `Xi sqrt(1 - v^2)`,
    /// starting at `center - length / 2`.
    Circle {
        periods: u32,
    },
}

/// Lab-frame placement of `g(xi)`: `phi(x, 0) = g(xi) + pi` with
/// `xi = sign(v) (x - center) / sqrt(1 - v^2)` and `phi_t = -v phi_x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub center: f64,
    pub velocity: f64,
}

impl Placement {
    fn sign(&self) -> f64 {
        if self.velocity < 0.0 {
            -1.0
        } else {
            1.0
        }
    }

    pub fn contraction(&self) -> f64 {
        ((1.0 - self.velocity) * (1.0 + self.velocity)).sqrt()
    }

    pub fn xi(&self, x: f64) -> f64 {
        self.sign() * (x - self.center) / self.contraction()
    }

    /// `(phi, phi_x, phi_t)` at `x`.
    pub fn sample(&self, profile: &WaveProfile, x: f64) -> (f64, f64, f64) {
        let s = profile.state_at(self.xi(x));
        let phi_x = self.sign() * s.gp / self.contraction();
        (s.g + std::f64::consts::PI, phi_x, -self.velocity * phi_x)
    }
}

/// Velocity the profile travels at, after any free-speed override.
pub fn profile_velocity(profile: &WaveProfile, velocity: Option<f64>) -> Result<f64> {
    let v = match (profile.velocity, velocity) {
        (Some(v), None) => v,
        (None, Some(v)) => v,
        (Some(v), Some(w)) if v == w => v,
        (Some(_), Some(w)) => return Err(Error::InvalidParameter {
            name: "velocity",
            value: w,
            reason:
                "profile velocity is fixed by its drag; only free-speed profiles take an override",
        }),
        (None, None) => return Err(Error::UndefinedVelocity),
    };
    match classify_speed(v) {
        SpeedRegime::Static | SpeedRegime::Subluminal => Ok(v),
        SpeedRegime::Luminal => Err(Error::Luminal),
        SpeedRegime::Superluminal => Err(Error::Superluminal { speed: v.abs() }),
    }
}

/// `phi(x, 0) = g~(x)`, `phi_t(x, 0) = -v g~'(x)` from the reduced profile.
pub fn init_from_profile(profile: &WaveProfile, spec: &InitSpec) -> Result<Field> {
    if profile.is_empty() {
        return Err(Error::Profile("empty profile".to_string()));
    }
    let v = profile_velocity(profile, spec.velocity)?;
    let place = Placement {
        center: spec.center,
        velocity: v,
    };
    let (lo, hi) = profile.span();
    match spec.domain {
        DomainSpec::Line { left, right } => {
            match profile.kind {
                ProfileKind::Array if !spec.truncate => return Err(Error::ArrayOnLine),
                ProfileKind::HalfArray => {
                    return Err(Error::Profile(
                        "a half-array has no limit on one side and cannot be pinned".to_string(),
                    ))
                }
                _ => {}
            }
            let support = if profile.kind == ProfileKind::Array {
                0.0
            } else {
                (hi - lo) * place.contraction()
            };
            let needed = support + LINE_PADDING;
            if right - left < needed {
                return Err(Error::DomainTooSmall {
                    needed,
                    available: right - left,
                });
            }
            if spec.center - left < BOUNDARY_GUARD || right - spec.center < BOUNDARY_GUARD {
                return Err(Error::DomainTooSmall {
                    needed: 2.0 * BOUNDARY_GUARD,
                    available: (spec.center - left).min(right - spec.center) * 2.0,
                });
            }
            let mut field = Field::line(left, right, spec.dx, |x| {
                let (phi, _, phi_t) = place.sample(profile, x);
                (phi, phi_t)
            })?;
            // pin the ends to the exact limits where the profile has them
            let pi = std::f64::consts::PI;
            let (first, last) = if place.sign() > 0.0 {
                (profile.left_tail, profile.right_tail)
            } else {
                (profile.right_tail, profile.left_tail)
            };
            if let Domain::Line {
                left_value,
                right_value,
                ..
            } = &mut field.domain
            {
                if let Some(t) = first {
                    *left_value = t.limit + pi;
                }
                if let Some(t) = last {
                    *right_value = t.limit + pi;
                }
                let n = field.phi.len();
                field.phi[0] = *left_value;
                field.phi[n - 1] = *right_value;
            }
            Ok(field)
        }
        DomainSpec::Circle { periods } => {
            let period = match (profile.kind, profile.period) {
                (ProfileKind::Array, Some(p)) => p,
                _ => {
                    return Err(Error::Profile(
                        "only array profiles close on a circle".to_string(),
                    ))
                }
            };
            if periods == 0 {
                return Err(Error::InvalidParameter {
                    name: "periods",
                    value: 0.0,
                    reason: "a circle holds at least one array cell",
                });
            }
            let length = periods as f64 * period * place.contraction();
            let winding = place.sign() as i64 * profile.winding * periods as i64;
            Field::circle(
                spec.center - 0.5 * length,
                length,
                winding,
                spec.dx,
                periods as usize,
                |x| {
                    let (phi, _, phi_t) = place.sample(profile, x);
                    (phi, phi_t)
                },
            )
        }
    }
}

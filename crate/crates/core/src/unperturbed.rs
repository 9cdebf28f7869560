//! Exact solutions used as oracles: the pendulum (`gamma = 0`, `mu = 0`)
//! kink and periods, and the homoclinic bounded pair of the tilted,
//! undamped particle.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_gamma, saddle, saddle_eigenvalues, well, Direction, Params};
use crate::numerics::{bisect, elliptic_k_from_complement, integrate_adaptive};
use crate::profile::{ProfileKind, ProfilePoint, Tail, WaveProfile};

/// `4 atan(exp(sign xi)) - pi`: the separatrix of the pendulum, running
/// from `-pi` to `pi` (or back for `Direction::Left`).
pub fn kink_closed_form(xi: f64, direction: Direction) -> f64 {
    4.0 * (direction.sign() * xi).exp().atan() - PI
}

/// `g'` along `kink_closed_form`: `2 sign / cosh(xi)`.
pub fn kink_closed_form_slope(xi: f64, direction: Direction) -> f64 {
    direction.sign() * 2.0 / xi.cosh()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrbitRegime {
    Libration,
    Separatrix,
    Rotation,
}

/// A level set `g'^2 / 2 - cos g = e` of the pendulum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendulumOrbit {
    pub e: f64,
    pub regime: OrbitRegime,
    /// Full oscillation period, or the time to advance by `2 pi`.
    pub period: Option<f64>,
}

impl PendulumOrbit {
    pub fn new(e: f64) -> Result<Self> {
        if !(e > -1.0) || !e.is_finite() {
            return Err(Error::InvalidParameter {
                name: "energy",
                value: e,
                reason: "orbits need e > -1",
            });
        }
        let (regime, period) = if e < 1.0 {
            (OrbitRegime::Libration, Some(libration_period(e)?))
        } else if e == 1.0 {
            (OrbitRegime::Separatrix, None)
        } else {
            (OrbitRegime::Rotation, Some(rotation_period(e)?))
        };
        Ok(Self { e, regime, period })
    }
}

/// `4 K(k)` with `k^2 = (1 + e) / 2`, for `-1 < e < 1`.
pub fn libration_period(e: f64) -> Result<f64> {
    if !(e > -1.0 && e < 1.0) {
        return Err(Error::InvalidParameter {
            name: "energy",
            value: e,
            reason: "libration needs -1 < e < 1",
        });
    }
    Ok(4.0 * elliptic_k_from_complement((0.5 * (1.0 - e)).sqrt()))
}

/// `4 K(k) / sqrt(2 (e + 1))` with `k^2 = 2 / (e + 1)`, for `e > 1`.
pub fn rotation_period(e: f64) -> Result<f64> {
    if !(e > 1.0) || !e.is_finite() {
        return Err(Error::InvalidParameter {
            name: "energy",
            value: e,
            reason: "rotation needs e > 1",
        });
    }
    let k_prime = ((e - 1.0) / (e + 1.0)).sqrt();
    Ok(4.0 * elliptic_k_from_complement(k_prime) / (2.0 * (e + 1.0)).sqrt())
}

/// Libration period by direct quadrature of `dg / sqrt(2 (e + cos g))`.
///
/// Substituting `g = g_a - s^2` at the turning point `g_a = acos(-e)` turns
/// the quarter period into the bounded integral of
/// `s / sqrt(sin(g_a - s^2 / 2) sin(s^2 / 2))` over `[0, sqrt(g_a)]`.
pub fn libration_period_by_quadrature(e: f64) -> Result<f64> {
    libration_period(e)?;
    // sin(g_a - h) = sin(beta + h) with beta = pi - g_a kept accurate
    // near the separatrix
    let beta = 2.0 * (0.5 * (1.0 - e)).sqrt().asin();
    let ga = PI - beta;
    let f = |s: f64| {
        let h = 0.5 * s * s;
        s / ((beta + h).sin() * h.sin()).sqrt()
    };
    Ok(4.0 * integrate_adaptive(&f, 0.0, ga.sqrt(), 1e-13)?)
}

/// Rotation period by direct quadrature of `dg / sqrt(2 (e + cos g))`.
pub fn rotation_period_by_quadrature(e: f64) -> Result<f64> {
    rotation_period(e)?;
    // with t = pi - g, e + cos g = (e - 1) + 2 sin^2(t / 2) keeps the
    // small gap to the separatrix exact
    let gap = e - 1.0;
    let f = |t: f64| {
        let s = (0.5 * t).sin();
        1.0 / (2.0 * (gap + 2.0 * s * s)).sqrt()
    };
    Ok(2.0 * integrate_adaptive(&f, 0.0, PI, 1e-13)?)
}

/// The closed-form kink as a sampled profile on `[-half_width, half_width]`.
///
/// With `alpha > 0` the only admissible speed is 0; with `alpha = 0` the
/// speed is free.
pub fn kink_profile(alpha: f64, half_width: f64, spacing: f64) -> Result<WaveProfile> {
    let params = Params::new(0.0, alpha)?;
    let (n, h) = half_grid(half_width, spacing)?;
    let nodes = (-(n as i64))..=(n as i64);
    let points = nodes
        .map(|j| {
            let xi = j as f64 * h;
            ProfilePoint {
                xi,
                g: kink_closed_form(xi, Direction::Right),
                gp: kink_closed_form_slope(xi, Direction::Right),
            }
        })
        .collect();
    Ok(WaveProfile {
        kind: ProfileKind::Kink,
        gamma: 0.0,
        alpha: params.alpha,
        mu: 0.0,
        velocity: static_or_free(params.alpha),
        winding: 1,
        period: None,
        left_tail: Some(Tail {
            limit: -PI,
            rate: 1.0,
        }),
        right_tail: Some(Tail {
            limit: PI,
            rate: -1.0,
        }),
        points,
    })
}

fn static_or_free(alpha: f64) -> Option<f64> {
    if alpha > 0.0 {
        Some(0.0)
    } else {
        None
    }
}

fn half_grid(half_width: f64, spacing: f64) -> Result<(usize, f64)> {
    if !(half_width > 0.0) || !half_width.is_finite() {
        return Err(Error::InvalidParameter {
            name: "half_width",
            value: half_width,
            reason: "must be positive",
        });
    }
    if !(spacing > 0.0) || spacing > half_width {
        return Err(Error::InvalidParameter {
            name: "spacing",
            value: spacing,
            reason: "must be positive and at most the half width",
        });
    }
    let n = (half_width / spacing).round() as usize;
    Ok((n, half_width / n as f64))
}

/// `d - sin d` without cancellation for small `d`.
fn d_minus_sin(d: f64) -> f64 {
    if d.abs() < 0.5 {
        let d2 = d * d;
        // Taylor series to d^15; truncation below 1e-20 on this range
        let mut term = d * d2 / 6.0;
        let mut sum = term;
        for k in 1..7 {
            let n = 2 * k + 3;
            term *= -d2 / ((n - 1) * n) as f64;
            sum += term;
        }
        sum
    } else {
        d - d.sin()
    }
}

/// Depth of the potential below the level of `g_0^M` at distance `d` to
/// its left: `U(g_0^M) - U(g_0^M - d)`.
fn depth_below_saddle(d: f64, gamma: f64, c: f64) -> f64 {
    let s = (0.5 * d).sin();
    2.0 * c * s * s - gamma * d_minus_sin(d)
}

/// Inner turning point of the bounded pair: the root of
/// `U(g) = U(g_0^M)` to the left of the well `g_0^m`.
pub fn bounded_pair_turning_point(gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if gamma == 0.0 {
        return Err(Error::DegeneratePair);
    }
    let c = (1.0 - gamma * gamma).sqrt();
    let d_well = PI - 2.0 * gamma.asin();
    let d = bisect(
        |d| depth_below_saddle(d, gamma, c),
        d_well,
        2.0 * PI,
        1e-15,
        0.0,
    )?;
    Ok(saddle(gamma, 0) - d)
}

/// Homoclinic orbit of the undamped tilted particle at the energy of
/// `g_0^M`: it leaves the barrier top as `xi -> -infinity`, turns at
/// `bounded_pair_turning_point` at `xi = 0` and returns. Sampled on a
/// symmetric uniform grid of `samples` points over `[-half_width, half_width]`.
///
/// `xi(g)` is evaluated by quadrature in two bounded variables: `s` with
/// `g = g_t + s^2` up to the well bottom, and `ln d` with `g = g_0^M - d`
/// beyond it, where the approach to the saddle is exponential. Uniform
/// `xi` nodes are then inverted by Newton steps on those integrals.
pub fn bounded_pair_profile(
    params: Params,
    half_width: f64,
    samples: usize,
) -> Result<WaveProfile> {
    let gamma = params.gamma;
    let gt = bounded_pair_turning_point(gamma)?;
    if samples < 3 {
        return Err(Error::InvalidParameter {
            name: "samples",
            value: samples as f64,
            reason: "need at least 3",
        });
    }
    let m = samples / 2;
    let (_, h) = half_grid(half_width, half_width / m as f64)?;
    let c = (1.0 - gamma * gamma).sqrt();
    let top = saddle(gamma, 0);

    // lower branch: W / s^2 at g = g_t + s^2
    let w_lower = |s: f64| {
        let x = 0.5 * s * s;
        let sinc = if x == 0.0 { 1.0 } else { x.sin() / x };
        gamma - (gt + x).sin() * sinc
    };
    let rate_lower = |s: f64| (2.0 / w_lower(s)).sqrt();
    // upper branch: W / d^2 at g = g_0^M - d, d = exp(q)
    let w_upper = |q: f64| {
        let d = q.exp();
        depth_below_saddle(d, gamma, c) / (d * d)
    };
    let rate_upper = |q: f64| 1.0 / (2.0 * w_upper(q)).sqrt();

    let s_split = (well(gamma, 0) - gt).sqrt();
    let q_split = (top - well(gamma, 0)).ln();
    let xi_split = integrate_adaptive(&rate_lower, 0.0, s_split, 1e-14)?;

    let mut half = Vec::with_capacity(m + 1);
    let (mut s, mut xs) = (0.0, 0.0);
    let (mut q, mut xq) = (q_split, xi_split);
    for j in 0..=m {
        let target = j as f64 * h;
        if target <= xi_split {
            // Newton in s from the previous node
            let mut guess = (s + (target - xs) / rate_lower(s)).clamp(0.0, s_split);
            for _ in 0..50 {
                let xi = xs + integrate_adaptive(&rate_lower, s, guess, 1e-15)?;
                let next = (guess - (xi - target) / rate_lower(guess)).clamp(0.0, s_split);
                let done = (next - guess).abs() <= 1e-15 * (1.0 + guess);
                guess = next;
                if done {
                    break;
                }
            }
            xs += integrate_adaptive(&rate_lower, s, guess, 1e-15)?;
            s = guess;
            half.push(ProfilePoint {
                xi: target,
                g: gt + s * s,
                gp: s * (2.0 * w_lower(s)).sqrt(),
            });
        } else {
            let mut guess = q - (target - xq) / rate_upper(q);
            for _ in 0..50 {
                let xi = xq + integrate_adaptive(&rate_upper, guess, q, 1e-15)?;
                let next = guess + (xi - target) / rate_upper(guess);
                let done = (next - guess).abs() <= 1e-15 * (1.0 + guess.abs());
                guess = next;
                if done {
                    break;
                }
            }
            xq += integrate_adaptive(&rate_upper, guess, q, 1e-15)?;
            q = guess;
            let d = q.exp();
            half.push(ProfilePoint {
                xi: target,
                g: top - d,
                gp: d * (2.0 * w_upper(q)).sqrt(),
            });
        }
    }

    let mut points: Vec<ProfilePoint> = half
        .iter()
        .skip(1)
        .rev()
        .map(|p| ProfilePoint {
            xi: -p.xi,
            g: p.g,
            gp: -p.gp,
        })
        .collect();
    points.extend(half);
    let rate = saddle_eigenvalues(gamma, 0.0).0;
    Ok(WaveProfile {
        kind: ProfileKind::BoundedPair,
        gamma,
        alpha: params.alpha,
        mu: 0.0,
        velocity: static_or_free(params.alpha),
        winding: 0,
        period: None,
        left_tail: Some(Tail { limit: top, rate }),
        right_tail: Some(Tail {
            limit: top,
            rate: -rate,
        }),
        points,
    })
}

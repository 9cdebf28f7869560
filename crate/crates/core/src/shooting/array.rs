use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{integrate, Crossing, EventSpec, OdeProblem, StopSpec};
use crate::model::{
    check_gamma, saddle, saddle_eigenvalues, velocity_from_mu, Direction, Params, TWO_PI,
};
use crate::profile::{ProfileKind, Tail, WaveProfile};

use super::fate::{classify_problem, launch_from_saddle, Fate};
use super::kink::sample_between;
use super::ShootingOptions;

/// A rotating periodic wave: `g(xi + period) = g(xi) + 2 pi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayWave {
    pub mu: f64,
    pub period: f64,
    /// Slope at the barrier tops, `g'(0) = g'(period)`.
    pub gp0: f64,
    pub profile: WaveProfile,
}

/// Shot from a barrier top with slope `gp0`: `R = g'(at g_0^M) - gp0`, and
/// `-infinity` on capture. Returns `(R, crossing xi, report)`.
fn array_residual(
    params: Params,
    mu: f64,
    gp0: f64,
    options: &ShootingOptions,
) -> Result<(f64, super::fate::FateReport)> {
    let problem = OdeProblem::from_saddle(params.gamma, mu, -1, 0.0, gp0, 0.0);
    let report = classify_problem(&problem, options, false)?;
    let r = match report.fate {
        Fate::Overshoot | Fate::Connection => report.crossing_speed - gp0,
        Fate::Capture => f64::NEG_INFINITY,
        Fate::Ambiguous => {
            return Err(Error::AmbiguousFate {
                mu,
                horizon: options.horizon,
            })
        }
    };
    Ok((r, report))
}

/// The drag `mu_check(gamma, gp0)` of the soliton array that crosses the
/// barrier tops with slope `gp0`, its period and a one-period profile
/// starting at `g_{-1}^M` at `xi = 0`.
pub fn find_array_mu(params: Params, gp0: f64, tol: f64) -> Result<ArrayWave> {
    find_array_mu_with(params, gp0, tol, &ShootingOptions::default())
}

pub fn find_array_mu_with(
    params: Params,
    gp0: f64,
    tol: f64,
    options: &ShootingOptions,
) -> Result<ArrayWave> {
    check_gamma(params.gamma)?;
    if gp0 == 0.0 {
        return Err(Error::InvalidParameter {
            name: "gp0",
            value: gp0,
            reason: "zero crossing slope is the kink limit; use find_kink_mu",
        });
    }
    if !(gp0 > 0.0) || !gp0.is_finite() {
        return Err(Error::InvalidParameter {
            name: "gp0",
            value: gp0,
            reason: "must be positive and finite",
        });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: tol,
            reason: "must be positive",
        });
    }
    // without tilt nothing is gained or lost per turn, so mu_check = 0
    let (mu, report) = if params.gamma == 0.0 {
        let (_, report) = array_residual(params, 0.0, gp0, options)?;
        (0.0, report)
    } else {
        let (r0, report) = array_residual(params, 0.0, gp0, options)?;
        if r0.abs() <= tol {
            (0.0, report)
        } else {
            let (mut lo, mut hi) = (0.0, 1.0);
            let mut best = report;
            loop {
                let (r, rep) = array_residual(params, hi, gp0, options)?;
                if r.abs() <= tol {
                    best = rep;
                    lo = hi;
                    break;
                }
                if r < 0.0 {
                    break;
                }
                lo = hi;
                best = rep;
                hi *= 2.0;
                if hi > 1e4 {
                    return Err(Error::NoBracket("no array drag below 1e4".to_string()));
                }
            }
            let mut mu = lo;
            for _ in 0..200 {
                if hi - lo <= 4.0 * f64::EPSILON * hi {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                let (r, rep) = array_residual(params, mid, gp0, options)?;
                if r.is_finite() && r.abs() <= tol {
                    mu = mid;
                    best = rep;
                    break;
                }
                if r > 0.0 {
                    lo = mid;
                    mu = mid;
                    best = rep;
                } else {
                    hi = mid;
                }
            }
            (mu, best)
        }
    };
    let period = report.crossing_xi;
    let points = sample_between(&report.trajectory, 0.0, period, options.profile_spacing);
    let velocity = match velocity_from_mu(params.alpha, mu, Direction::Right) {
        Ok(m) => Some(m.velocity()),
        Err(Error::UndefinedVelocity) => None,
        Err(e) => return Err(e),
    };
    Ok(ArrayWave {
        mu,
        period,
        gp0,
        profile: WaveProfile {
            kind: ProfileKind::Array,
            gamma: params.gamma,
            alpha: params.alpha,
            mu,
            velocity,
            winding: 1,
            period: Some(period),
            left_tail: None,
            right_tail: None,
            points,
        },
    })
}

/// Invert the period map: the crossing slope `gp0` whose array has period
/// `period`, searched over `gp0` in `[1e-6, 1e3]`.
pub fn period_to_speed(params: Params, period: f64, tol: f64) -> Result<f64> {
    period_to_speed_with(params, period, tol, &ShootingOptions::default())
}

pub fn period_to_speed_with(
    params: Params,
    period: f64,
    tol: f64,
    options: &ShootingOptions,
) -> Result<f64> {
    if !(period > 0.0) || !period.is_finite() {
        return Err(Error::InvalidParameter {
            name: "period",
            value: period,
            reason: "must be positive and finite",
        });
    }
    // the inner solve is held well below the requested period tolerance
    let inner = 1e-13;
    let xi_of =
        |q: f64| -> Result<f64> { Ok(find_array_mu_with(params, q.exp(), inner, options)?.period) };
    let (mut qa, mut qb) = (1e-6f64.ln(), 1e3f64.ln());
    let (pa, pb) = (xi_of(qa)?, xi_of(qb)?);
    let (mut fa, mut fb) = (pa - period, pb - period);
    if fa.signum() == fb.signum() {
        return Err(Error::NoBracket(format!(
            "period {period} outside [{}, {}] spanned by gp0 in [1e-6, 1e3]",
            pa.min(pb),
            pa.max(pb)
        )));
    }
    // Illinois variant of regula falsi in log gp0
    let mut side = 0;
    for _ in 0..200 {
        let q = (qa * fb - qb * fa) / (fb - fa);
        let fq = xi_of(q)? - period;
        if fq.abs() <= tol || (qb - qa).abs() <= 1e-15 * qa.abs().max(1.0) {
            return Ok(q.exp());
        }
        if fq.signum() == fb.signum() {
            qb = q;
            fb = fq;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            qa = q;
            fa = fq;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Err(Error::NoBracket(
        "period inversion did not converge".to_string(),
    ))
}

/// Trajectory from the unstable manifold of `g_{-1}^M` at an array's drag,
/// with its phase-space distance to the array orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfArray {
    pub array: ArrayWave,
    pub profile: WaveProfile,
    /// `(xi, d(xi))` on the profile grid.
    pub distance: Vec<(f64, f64)>,
}

/// Launch from the saddle at `mu_check(gamma, gp0)` and follow the
/// trajectory to `horizon`, normalized so `g(0) = -asin(gamma)`.
pub fn half_array_profile(params: Params, gp0: f64, horizon: f64) -> Result<HalfArray> {
    half_array_profile_with(params, gp0, horizon, &ShootingOptions::default())
}

pub fn half_array_profile_with(
    params: Params,
    gp0: f64,
    horizon: f64,
    options: &ShootingOptions,
) -> Result<HalfArray> {
    if params.gamma == 0.0 {
        return Err(Error::Profile(
            "without tilt the saddle launch follows the separatrix".to_string(),
        ));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidParameter {
            name: "horizon",
            value: horizon,
            reason: "must be positive and finite",
        });
    }
    let array = find_array_mu_with(params, gp0, 1e-12, options)?;
    let mu = array.mu;
    let launch = launch_from_saddle(params, mu, options.delta)?;
    let problem = launch.problem(params.gamma, mu);
    let stop = StopSpec::horizon(horizon).with(EventSpec::TurningPoint {
        crossing: Crossing::Falling,
    });
    let (traj, ev) = integrate(&problem, &stop, &options.tolerances)?;
    if ev.index.is_some() {
        return Err(Error::HalfArrayCaptured { xi: ev.xi });
    }
    let points = sample_between(&traj, 0.0, horizon, options.profile_spacing);
    let (lambda_plus, _) = saddle_eigenvalues(params.gamma, mu);
    let total_winding =
        ((points.last().map_or(0.0, |p| p.g) - saddle(params.gamma, -1)) / TWO_PI).floor() as i64;
    let mut profile = WaveProfile {
        kind: ProfileKind::HalfArray,
        gamma: params.gamma,
        alpha: params.alpha,
        mu,
        velocity: array.profile.velocity,
        winding: total_winding,
        period: None,
        left_tail: Some(Tail {
            limit: saddle(params.gamma, -1),
            rate: lambda_plus,
        }),
        right_tail: None,
        points,
    };
    profile.center_on(-params.gamma.asin())?;
    let distance = profile
        .points
        .iter()
        .map(|p| (p.xi, orbit_distance(&array.profile, p.g, p.gp)))
        .collect();
    Ok(HalfArray {
        array,
        profile,
        distance,
    })
}

/// Distance on the cylinder from `(g, gp)` to the closed array orbit: a
/// coarse scan over the orbit samples, then golden-section refinement on
/// the interpolated orbit around the best sample.
pub fn orbit_distance(orbit: &WaveProfile, g: f64, gp: f64) -> f64 {
    let wrap = |d: f64| d - TWO_PI * (d / TWO_PI).round();
    let dist2 = |xi: f64| {
        let s = orbit.state_at(xi);
        let dg = wrap(g - s.g);
        dg * dg + (gp - s.gp).powi(2)
    };
    let pts = &orbit.points;
    let (mut best, mut best_d) = (0, f64::INFINITY);
    for (i, p) in pts.iter().enumerate() {
        let dg = wrap(g - p.g);
        let d = dg * dg + (gp - p.gp).powi(2);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    let lo = pts[best.saturating_sub(1)].xi;
    let hi = pts[(best + 1).min(pts.len() - 1)].xi;
    let (mut a, mut b) = (lo, hi);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (dist2(c), dist2(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = dist2(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = dist2(d);
        }
    }
    best_d.min(fc).min(fd).sqrt()
}

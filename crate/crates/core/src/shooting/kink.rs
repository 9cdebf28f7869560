use crate::error::{Error, Result};
use crate::integrate::Trajectory;
use crate::model::{check_gamma, saddle, saddle_eigenvalues, velocity_from_mu, Direction, Params};
use crate::profile::{ProfileKind, ProfilePoint, Tail, WaveProfile};

use super::fate::{decided_fate, Fate, FateReport};
use super::ShootingOptions;

/// The drag `mu_hat` at which the unstable manifold of `g_{-1}^M` lands on
/// `g_0^M`, by bisection on the fate, plus the kink profile normalized so
/// that `g(0) = -asin(gamma)`.
pub fn find_kink_mu(params: Params, tol: f64) -> Result<(f64, WaveProfile)> {
    find_kink_mu_with(params, tol, &ShootingOptions::default())
}

pub fn find_kink_mu_with(
    params: Params,
    tol: f64,
    options: &ShootingOptions,
) -> Result<(f64, WaveProfile)> {
    search_kink_mu(params, tol, options).map(|k| (k.mu, k.profile))
}

/// Result of the `mu_hat` bisection with the number of shots it fired.
#[derive(Debug, Clone, PartialEq)]
pub struct KinkSearch {
    pub mu: f64,
    pub profile: WaveProfile,
    pub shots: usize,
}

pub fn search_kink_mu(params: Params, tol: f64, options: &ShootingOptions) -> Result<KinkSearch> {
    check_gamma(params.gamma)?;
    if params.gamma == 0.0 {
        return Err(Error::KinkMuUndefined);
    }
    if !(tol >= 1e-13) {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: tol,
            reason: "bisection tolerance must be >= 1e-13",
        });
    }
    let mut shots = 0;
    let mut shoot = |mu: f64| {
        shots += 1;
        decided_fate(params, mu, options)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut best = shoot(lo)?;
    match best.resolved {
        Fate::Overshoot => {}
        Fate::Connection => return finish(params, lo, best, shots, options),
        _ => {
            return Err(Error::NoBracket(
                "undamped launch does not overshoot".to_string(),
            ))
        }
    }
    loop {
        let r = shoot(hi)?;
        match r.resolved {
            Fate::Capture => break,
            Fate::Connection => return finish(params, hi, r, shots, options),
            _ => {
                lo = hi;
                best = r;
                hi *= 2.0;
                if hi > 1e4 {
                    return Err(Error::NoBracket("no capture for mu <= 1e4".to_string()));
                }
            }
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        // a Connection within energy resolution still came down on a side;
        // keep bisecting on that side
        let r = shoot(mid)?;
        match r.resolved {
            Fate::Overshoot => {
                lo = mid;
                best = r;
            }
            Fate::Capture => hi = mid,
            Fate::Connection => return finish(params, mid, r, shots, options),
            Fate::Ambiguous => unreachable!("decided_fate never returns Ambiguous"),
        }
    }
    finish(params, 0.5 * (lo + hi), best, shots, options)
}

fn finish(
    params: Params,
    mu: f64,
    report: FateReport,
    shots: usize,
    options: &ShootingOptions,
) -> Result<KinkSearch> {
    let profile = kink_from_trajectory(params, mu, &report.trajectory, options)?;
    Ok(KinkSearch { mu, profile, shots })
}

/// Cut the overshooting trajectory where it comes within `tail_gap` of
/// `g_0^M`, resample it and centre it on the saddle midpoint.
pub(crate) fn kink_from_trajectory(
    params: Params,
    mu: f64,
    trajectory: &Trajectory,
    options: &ShootingOptions,
) -> Result<WaveProfile> {
    let gamma = params.gamma;
    let top = saddle(gamma, 0);
    let (start, last) = trajectory.span();
    let end = trajectory
        .first_crossing(top - options.tail_gap)
        .unwrap_or(last);
    let points = sample_between(trajectory, start, end, options.profile_spacing);
    if points.iter().any(|p| !(p.gp > 0.0)) {
        return Err(Error::Profile("kink slope is not positive".to_string()));
    }
    let (lambda_plus, lambda_minus) = saddle_eigenvalues(gamma, mu);
    let velocity = match velocity_from_mu(params.alpha, mu, Direction::Right) {
        Ok(m) => Some(m.velocity()),
        Err(Error::UndefinedVelocity) => None,
        Err(e) => return Err(e),
    };
    let mut profile = WaveProfile {
        kind: ProfileKind::Kink,
        gamma,
        alpha: params.alpha,
        mu,
        velocity,
        winding: 1,
        period: None,
        left_tail: Some(Tail {
            limit: saddle(gamma, -1),
            rate: lambda_plus,
        }),
        right_tail: Some(Tail {
            limit: top,
            rate: lambda_minus,
        }),
        points,
    };
    profile.center_on(-gamma.asin())?;
    Ok(profile)
}

/// Uniform resampling of `[a, b]` through the dense output, ends included.
pub(crate) fn sample_between(
    trajectory: &Trajectory,
    a: f64,
    b: f64,
    spacing: f64,
) -> Vec<ProfilePoint> {
    let n = ((b - a) / spacing).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    (0..=n)
        .map(|i| {
            let xi = if i == n { b } else { a + i as f64 * h };
            let s = trajectory.state_at(xi);
            ProfilePoint {
                xi,
                g: s.g,
                gp: s.gp,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::energy_audit;
    use crate::model::{asymptotic_velocity, potential_slope};
    use std::f64::consts::PI;

    #[test]
    fn small_tilt_matches_lowest_order() {
        let params = Params::new(0.01, 0.05).unwrap();
        let (mu, profile) = find_kink_mu(params, 1e-12).unwrap();
        let lowest = PI * 0.01 / 4.0;
        assert!((mu - lowest).abs() / lowest <= 0.02, "{mu}");
        let v = profile.velocity.unwrap();
        let v_inf = asymptotic_velocity(params).unwrap();
        assert!((v - v_inf).abs() / v <= 0.02, "{v} vs {v_inf}");
    }

    #[test]
    fn rejects_untilted_and_loose_requests() {
        let p = Params::new(0.0, 0.1).unwrap();
        assert_eq!(find_kink_mu(p, 1e-10).unwrap_err(), Error::KinkMuUndefined);
        let p = Params::new(0.1, 0.1).unwrap();
        assert!(find_kink_mu(p, 1e-14).is_err());
    }

    #[test]
    fn kink_profile_invariants() {
        let gamma = 0.1;
        let params = Params::new(gamma, 0.1).unwrap();
        let (mu, p) = find_kink_mu(params, 1e-12).unwrap();
        assert!(mu > 0.0 && mu < 1.0);
        assert_eq!((p.kind, p.winding), (ProfileKind::Kink, 1));
        let (lo, hi) = (saddle(gamma, -1), saddle(gamma, 0));
        for w in p.points.windows(2) {
            assert!(w[1].g > w[0].g);
        }
        for q in &p.points {
            assert!(q.gp > 0.0 && q.g > lo && q.g < hi);
        }
        assert!(p.points[0].g - lo < 1e-6);
        assert!(hi - p.points.last().unwrap().g < 1e-6);
        let centre = p.state_at(0.0);
        assert!((centre.g + gamma.asin()).abs() < 1e-10);
        // the sampled curve solves the reduced equation
        let h = 1e-3;
        for xi in [-5.0, -1.0, 0.0, 2.0, 6.0] {
            let (a, b, c) = (p.state_at(xi - h), p.state_at(xi), p.state_at(xi + h));
            let gpp = (a.g - 2.0 * b.g + c.g) / (h * h);
            let residual = gpp + mu * b.gp + potential_slope(b.g, gamma);
            assert!(residual.abs() < 1e-5, "xi {xi}: {residual}");
        }
    }

    #[test]
    fn energy_audit_passes_on_the_shot() {
        let params = Params::new(0.2, 0.0).unwrap();
        let opts = ShootingOptions::default();
        let (mu, _) = find_kink_mu_with(params, 1e-12, &opts).unwrap();
        let r = decided_fate(params, mu, &opts).unwrap();
        let res = energy_audit(&r.trajectory, 0.2, mu);
        assert!(
            res <= crate::integrate::energy_audit_bound(&r.trajectory, 0.2),
            "{res}"
        );
    }

    /// Independent cross-check: classical RK4 at fixed step on the offset
    /// from `g_{-1}^M`, fate read off at step granularity.
    fn rk4_fate_captures(gamma: f64, mu: f64, h: f64) -> bool {
        let c = (1.0 - gamma * gamma).sqrt();
        let f = |u: f64, w: f64| {
            let s = (0.5 * u).sin();
            (w, -mu * w + c * u.sin() + 2.0 * gamma * s * s)
        };
        let (lp, _) = saddle_eigenvalues(gamma, mu);
        let (mut u, mut w) = (1e-8, lp * 1e-8);
        for _ in 0..(200.0 / h) as usize {
            let (a1, b1) = f(u, w);
            let (a2, b2) = f(u + 0.5 * h * a1, w + 0.5 * h * b1);
            let (a3, b3) = f(u + 0.5 * h * a2, w + 0.5 * h * b2);
            let (a4, b4) = f(u + h * a3, w + h * b3);
            u += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
            w += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
            if u >= 2.0 * PI {
                return false;
            }
            if w <= 0.0 {
                return true;
            }
        }
        panic!("undecided");
    }

    #[test]
    fn fixed_step_shooting_agrees() {
        let gamma = 0.1;
        let (mu, _) = find_kink_mu(Params::new(gamma, 0.0).unwrap(), 1e-12).unwrap();
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if rk4_fate_captures(gamma, mid, 0.01) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let reference = 0.5 * (lo + hi);
        assert!((mu - reference).abs() <= 1e-8 * mu, "{mu} vs {reference}");
    }

    #[test]
    fn search_counts_its_shots() {
        let params = Params::new(0.1, 0.05).unwrap();
        let k = search_kink_mu(params, 1e-10, &ShootingOptions::default()).unwrap();
        let (mu, _) = find_kink_mu(params, 1e-10).unwrap();
        assert_eq!(k.mu, mu);
        // bracket doubling plus about log2(1 / 1e-10) halvings
        assert!(k.shots >= 30 && k.shots <= 60, "{}", k.shots);
    }
}

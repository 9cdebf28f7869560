//! Parameters, the tilted washboard potential and the algebra linking the
//! reduced viscosity `mu` to the wave speed `v`.
//!
//! The travelling-wave reduction turns the field equation
//! `phi_tt - phi_xx + sin(phi) + alpha phi_t + gamma = 0` into the motion of a
//! unit-mass particle in `U(g) = -(cos g + gamma g)` with viscous drag `mu g'`.
//! Angles are plain reals; nothing here wraps modulo `2 pi`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TWO_PI: f64 = 2.0 * PI;

/// Forcing `gamma` and dissipation `alpha` of the field equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub gamma: f64,
    pub alpha: f64,
}

impl Params {
    pub fn new(gamma: f64, alpha: f64) -> Result<Self> {
        check_gamma(gamma)?;
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                reason: "must be finite and >= 0",
            });
        }
        Ok(Self { gamma, alpha })
    }
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidParameter {
            name: "gamma",
            value: gamma,
            reason: "admissible range is [0, 1)",
        });
    }
    Ok(())
}

/// Phase point `(g, g')` of the reduced equation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State {
    pub g: f64,
    pub gp: f64,
}

impl State {
    pub const fn new(g: f64, gp: f64) -> Self {
        Self { g, gp }
    }

    pub fn is_finite(&self) -> bool {
        self.g.is_finite() && self.gp.is_finite()
    }
}

/// Orientation of a wave: `Right` runs towards `+x` with `v > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Right,
    Left,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Right => 1.0,
            Direction::Left => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Direction::Right => Direction::Left,
            Direction::Left => Direction::Right,
        }
    }
}

/// `U(g) = -(cos g + gamma g)`.
pub fn potential(g: f64, gamma: f64) -> f64 {
    -(g.cos() + gamma * g)
}

/// `U_g(g) = sin g - gamma`.
pub fn potential_slope(g: f64, gamma: f64) -> f64 {
    g.sin() - gamma
}

/// `U_gg(g) = cos g`.
pub fn potential_curvature(g: f64) -> f64 {
    g.cos()
}

/// `e = g'^2 / 2 + U(g)`.
pub fn mechanical_energy(state: State, gamma: f64) -> f64 {
    0.5 * state.gp * state.gp + potential(state.g, gamma)
}

/// The `k`-th well and barrier of the washboard.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub k: i64,
    pub g_min: f64,
    pub g_max: f64,
    pub u_min: f64,
    pub u_max: f64,
}

pub fn equilibria(gamma: f64, k: i64) -> Result<Equilibrium> {
    check_gamma(gamma)?;
    let a = gamma.asin();
    let c = (1.0 - gamma * gamma).sqrt();
    let shift = 2.0 * PI * k as f64;
    Ok(Equilibrium {
        k,
        g_min: a + shift,
        g_max: PI - a + shift,
        u_min: -(gamma * (a + shift) + c),
        u_max: -(gamma * (-a + (2 * k + 1) as f64 * PI) - c),
    })
}

/// Position of the `k`-th barrier top `g_k^M`.
pub fn saddle(gamma: f64, k: i64) -> f64 {
    PI - gamma.asin() + 2.0 * PI * k as f64
}

/// Position of the `k`-th well bottom `g_k^m`.
pub fn well(gamma: f64, k: i64) -> f64 {
    gamma.asin() + 2.0 * PI * k as f64
}

/// Eigenvalues `(lambda_+, lambda_-)` of the linearization at a barrier
/// top, the roots of `lambda^2 + mu lambda - sqrt(1 - gamma^2) = 0`.
pub fn saddle_eigenvalues(gamma: f64, mu: f64) -> (f64, f64) {
    let c = (1.0 - gamma * gamma).sqrt();
    let root = (0.25 * mu * mu + c).sqrt();
    // cancellation-free form of the small positive root
    (c / (0.5 * mu + root), -0.5 * mu - root)
}

/// How a speed relates to the characteristic speed 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpeedRegime {
    Static,
    Subluminal,
    Luminal,
    Superluminal,
}

pub fn classify_speed(v: f64) -> SpeedRegime {
    let s = v.abs();
    if s == 0.0 {
        SpeedRegime::Static
    } else if s < 1.0 {
        SpeedRegime::Subluminal
    } else if s == 1.0 {
        SpeedRegime::Luminal
    } else {
        SpeedRegime::Superluminal
    }
}

/// Reduced viscosity together with the speed and direction it encodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityMap {
    pub mu: f64,
    /// `|v|`, in `[0, 1]`; 1 only on the degenerate `alpha = 0` boundary.
    pub speed: f64,
    pub direction: Direction,
}

impl VelocityMap {
    pub fn velocity(&self) -> f64 {
        self.direction.sign() * self.speed
    }

    /// `alpha = 0` with `mu > 0` pushes the speed onto the luminal boundary.
    pub fn is_degenerate(&self) -> bool {
        self.speed >= 1.0
    }
}

/// `v = sign * mu / sqrt(alpha^2 + mu^2)`.
pub fn velocity_from_mu(alpha: f64, mu: f64, direction: Direction) -> Result<VelocityMap> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            reason: "must be >= 0",
        });
    }
    if !(mu >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "mu",
            value: mu,
            reason: "must be >= 0",
        });
    }
    if alpha == 0.0 && mu == 0.0 {
        return Err(Error::UndefinedVelocity);
    }
    let speed = if alpha == 0.0 {
        1.0
    } else {
        mu / alpha.hypot(mu)
    };
    Ok(VelocityMap {
        mu,
        speed,
        direction,
    })
}

/// `mu = alpha |v| / sqrt(1 - v^2)` on the subluminal branch.
pub fn mu_from_velocity(alpha: f64, v: f64) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            reason: "must be >= 0",
        });
    }
    match classify_speed(v) {
        SpeedRegime::Static => Ok(0.0),
        SpeedRegime::Subluminal => Ok(alpha * v.abs() / ((1.0 - v) * (1.0 + v)).sqrt()),
        SpeedRegime::Luminal => Err(Error::Luminal),
        SpeedRegime::Superluminal => Err(Error::Superluminal { speed: v.abs() }),
    }
}

/// `alpha / sqrt|v^-2 - 1|` on either branch; for classifying superluminal waves.
pub fn reduced_viscosity(alpha: f64, v: f64) -> Result<f64> {
    match classify_speed(v) {
        SpeedRegime::Luminal => Err(Error::Luminal),
        SpeedRegime::Static => Ok(0.0),
        _ => {
            let s = v.abs();
            Ok(alpha * s / ((1.0 - s) * (1.0 + s)).abs().sqrt())
        }
    }
}

/// Power-balance speed `[1 + (4 alpha / (pi gamma))^2]^(-1/2)`.
pub fn asymptotic_velocity(params: Params) -> Result<f64> {
    if params.gamma <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "gamma",
            value: params.gamma,
            reason: "power-balance velocity needs gamma > 0",
        });
    }
    let r = 4.0 * params.alpha / (PI * params.gamma);
    Ok(1.0 / (1.0 + r * r).sqrt())
}

/// `K = sqrt(1 - gamma^2) + gamma asin(gamma)`; zeroes `h` at `phi = -asin(gamma)`.
pub fn energy_constant(gamma: f64) -> f64 {
    (1.0 - gamma * gamma).sqrt() + gamma * gamma.asin()
}

/// Energy density and energy current of the field at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyDensity {
    pub h: f64,
    pub j: f64,
}

pub fn energy_density(phi: f64, phi_x: f64, phi_t: f64, gamma: f64) -> EnergyDensity {
    let h = 0.5 * phi_t * phi_t + 0.5 * phi_x * phi_x + gamma * phi - phi.cos()
        + energy_constant(gamma);
    EnergyDensity {
        h,
        j: phi_x * phi_t,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn saddle_eigenvalue_examples() {
        let (lp, lm) = saddle_eigenvalues(0.0, 0.0);
        assert_eq!((lp, lm), (1.0, -1.0));
        let (lp, lm) = saddle_eigenvalues(0.0, 3.0);
        assert!((lp - 0.302_775_637_731_994_6).abs() < 1e-15);
        // both roots satisfy the characteristic equation
        for l in [lp, lm] {
            assert!((l * l + 3.0 * l - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn potential_values() {
        assert_eq!(potential(0.0, 0.0), -1.0);
        assert!((potential(PI / 6.0, 0.5) - (-1.127_824_791_583_588)).abs() < 1e-14);
    }

    #[test]
    fn equilibria_examples() {
        let e = equilibria(0.0, 0).unwrap();
        assert_eq!(e.g_min, 0.0);
        assert!((e.g_max - PI).abs() < 1e-15);

        let e = equilibria(0.5, 0).unwrap();
        assert!((e.g_min - PI / 6.0).abs() < 1e-15);
        assert!((e.g_max - 5.0 * PI / 6.0).abs() < 1e-15);

        let e = equilibria(0.1, 1).unwrap();
        assert!((e.g_min - 6.383_352_7).abs() < 1e-7);
        assert!((e.g_max - 9.324_610_5).abs() < 1e-7);
        assert!((e.u_min - potential(e.g_min, 0.1)).abs() < 1e-13);
        assert!((e.u_max - potential(e.g_max, 0.1)).abs() < 1e-13);
    }

    #[test]
    fn equilibria_reject_gamma_at_or_above_one() {
        assert!(equilibria(1.0, 0).is_err());
        assert!(equilibria(1.5, 0).is_err());
        assert!(Params::new(-0.1, 0.0).is_err());
    }

    #[test]
    fn energy_examples() {
        assert_eq!(mechanical_energy(State::new(0.0, 0.0), 0.0), -1.0);
        assert!((mechanical_energy(State::new(PI, 0.0), 0.0) - 1.0).abs() < 1e-15);
        let e = mechanical_energy(State::new(PI / 6.0, 1.0), 0.5);
        assert!((e - (-0.627_824_791_583_588)).abs() < 1e-14);
    }

    #[test]
    fn velocity_examples() {
        let m = velocity_from_mu(0.1, 0.1, Direction::Right).unwrap();
        assert!((m.velocity() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(
            velocity_from_mu(0.05, 0.0, Direction::Right).unwrap().speed,
            0.0
        );
        let v = velocity_from_mu(0.2, 0.37, Direction::Right).unwrap().speed;
        assert!((mu_from_velocity(0.2, v).unwrap() - 0.37).abs() < 1e-15);
        assert_eq!(
            velocity_from_mu(0.0, 0.0, Direction::Right),
            Err(Error::UndefinedVelocity)
        );
        let lum = velocity_from_mu(0.0, 0.3, Direction::Left).unwrap();
        assert!(lum.is_degenerate());
        assert_eq!(lum.velocity(), -1.0);
    }

    #[test]
    fn mu_examples() {
        assert!(
            (mu_from_velocity(1.0, std::f64::consts::FRAC_1_SQRT_2).unwrap() - 1.0).abs() < 1e-15
        );
        assert_eq!(mu_from_velocity(0.0, 0.3).unwrap(), 0.0);
        assert_eq!(mu_from_velocity(0.3, 0.0).unwrap(), 0.0);
        // v_inf(0.1, 0.1) maps back onto pi * 0.1 / 4
        let mu = mu_from_velocity(0.1, 0.617_667_824_838_856).unwrap();
        assert!((mu - 0.078_539_816_339_744_8).abs() < 1e-12);
        assert_eq!(mu_from_velocity(0.1, 1.0), Err(Error::Luminal));
        assert!(matches!(
            mu_from_velocity(0.1, -2.0),
            Err(Error::Superluminal { .. })
        ));
        assert!((reduced_viscosity(0.1, 2.0).unwrap() - 0.2 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn asymptotic_velocity_examples() {
        let a = 0.25 * PI * 0.3;
        let v = asymptotic_velocity(Params::new(0.3, a).unwrap()).unwrap();
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        let v = asymptotic_velocity(Params::new(0.1, 0.1).unwrap()).unwrap();
        assert!((v - 0.617_667_824_838_856).abs() < 1e-12);
        let v = asymptotic_velocity(Params::new(0.1, 1e-6).unwrap()).unwrap();
        assert!(v < 1.0 && v > 1.0 - 1e-9);
        assert!(asymptotic_velocity(Params::new(0.0, 0.1).unwrap()).is_err());
    }

    #[test]
    fn energy_density_examples() {
        for gamma in [0.0, 0.1, 0.5, 0.9] {
            let d = energy_density(-f64::asin(gamma), 0.0, 0.0, gamma);
            assert!(d.h.abs() < 1e-15, "gamma {gamma}: h = {}", d.h);
        }
        let d = energy_density(0.0, 0.0, 0.0, 0.0);
        assert_eq!((d.h, d.j), (0.0, 0.0));
        assert!((energy_density(PI, 0.0, 0.0, 0.0).h - 2.0).abs() < 1e-15);
        assert_eq!(energy_density(0.3, 2.0, -1.5, 0.2).j, -3.0);
    }

    #[test]
    fn equilibria_are_critical_points_with_expected_curvature() {
        for gamma in [0.0, 0.05, 0.3, 0.7, 0.95] {
            for k in -2..=2 {
                let e = equilibria(gamma, k).unwrap();
                let c = (1.0 - gamma * gamma).sqrt();
                let h = 1e-4;
                let fd1 = |g: f64| (potential(g + h, gamma) - potential(g - h, gamma)) / (2.0 * h);
                let fd2 = |g: f64| {
                    (potential(g + h, gamma) - 2.0 * potential(g, gamma) + potential(g - h, gamma))
                        / (h * h)
                };
                assert!(fd1(e.g_min).abs() < 1e-7);
                assert!(fd1(e.g_max).abs() < 1e-7);
                assert!((fd2(e.g_min) - c).abs() < 1e-5);
                assert!((fd2(e.g_max) + c).abs() < 1e-5);
                assert!(e.u_min < e.u_max);
                if gamma > 0.0 {
                    let next = equilibria(gamma, k + 1).unwrap();
                    assert!(next.u_min < e.u_min && next.u_max < e.u_max);
                }
            }
        }
    }

    #[test]
    fn power_balance_speed_matches_lowest_order_viscosity() {
        for gamma in [0.001, 0.01, 0.1, 0.5, 0.99] {
            for alpha in [1e-3, 0.05, 0.1, 1.0] {
                let p = Params::new(gamma, alpha).unwrap();
                let v_inf = asymptotic_velocity(p).unwrap();
                let v = velocity_from_mu(alpha, PI * gamma / 4.0, Direction::Right)
                    .unwrap()
                    .speed;
                assert!(
                    (v - v_inf).abs() <= 1e-14,
                    "{gamma} {alpha}: {v} vs {v_inf}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn tilt_covariance(g in -50.0f64..50.0, gamma in 0.0f64..1.0) {
            let d = potential(g + 2.0 * PI, gamma) - potential(g, gamma);
            prop_assert!((d + 2.0 * PI * gamma).abs() <= 1e-12);
        }

        #[test]
        fn velocity_round_trip(v in 1e-6f64..0.999_999, alpha in 1e-3f64..10.0) {
            let mu = mu_from_velocity(alpha, v).unwrap();
            let back = velocity_from_mu(alpha, mu, Direction::Right).unwrap().speed;
            prop_assert!((back - v).abs() <= 1e-14);
        }

        #[test]
        fn energy_density_has_local_minimum_at_stable_constant(
            gamma in 0.0f64..0.99,
            dphi in -0.3f64..0.3,
            phi_x in -0.3f64..0.3,
            phi_t in -0.3f64..0.3,
        ) {
            let phi = -gamma.asin() + dphi;
            let h = energy_density(phi, phi_x, phi_t, gamma).h;
            prop_assert!(h >= -1e-15);
            if dphi.abs().max(phi_x.abs()).max(phi_t.abs()) > 1e-5 {
                prop_assert!(h > 0.0);
            }
        }
    }
}

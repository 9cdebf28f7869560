use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{
    integrate_observed, Crossing, Event, EventKind, EventSpec, OdeProblem, StopSpec, Trajectory,
};
use crate::model::{
    check_gamma, mechanical_energy, potential, saddle, saddle_eigenvalues, Params, State,
};

use super::ShootingOptions;

/// Relative energy deficit below the summit that certifies a capture; far
/// above the energy drift of the integration.
const CAPTURE_MARGIN: f64 = 1e-6;

/// Initial point on the linearized unstable manifold of `g_{-1}^M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleLaunch {
    pub delta: f64,
    pub lambda_plus: f64,
    pub state: State,
}

impl SaddleLaunch {
    /// The launch as an initial-value problem in the saddle frame, at `xi = 0`.
    pub fn problem(&self, gamma: f64, mu: f64) -> OdeProblem {
        OdeProblem::from_saddle(
            gamma,
            mu,
            -1,
            self.delta,
            self.lambda_plus * self.delta,
            0.0,
        )
    }
}

/// `(g_{-1}^M + delta, lambda_+ delta)`, with `0 < delta <= 1e-4`.
pub fn launch_from_saddle(params: Params, mu: f64, delta: f64) -> Result<SaddleLaunch> {
    check_gamma(params.gamma)?;
    if !(delta > 0.0 && delta <= 1e-4) {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: delta,
            reason: "launch offset must lie in (0, 1e-4]",
        });
    }
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::InvalidParameter {
            name: "mu",
            value: mu,
            reason: "must be finite and >= 0",
        });
    }
    let (lambda_plus, _) = saddle_eigenvalues(params.gamma, mu);
    Ok(SaddleLaunch {
        delta,
        lambda_plus,
        state: State::new(saddle(params.gamma, -1) + delta, lambda_plus * delta),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fate {
    /// Reached `g_0^M` with speed to spare.
    Overshoot,
    /// Turned back before reaching `g_0^M`.
    Capture,
    /// Came to rest on `g_0^M` within the connection radius.
    Connection,
    /// Still undecided at the horizon.
    Ambiguous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FateReport {
    pub fate: Fate,
    /// The side the run actually came down on: `Overshoot` or `Capture`
    /// for a decided run (also beneath a `Connection`), otherwise `fate`.
    pub resolved: Fate,
    /// Where `g` reached `g_0^M`, `g'` hit 0, the energy fell below the
    /// summit, or the run stopped.
    pub crossing_xi: f64,
    /// `g'` at `crossing_xi`.
    pub crossing_speed: f64,
    pub trajectory: Trajectory,
    pub terminal: Event,
}

/// Integrate the launch forward and sort the outcome into a [`Fate`].
/// The integration runs in the saddle frame so that closeness to either
/// barrier top is resolved relative to the distance from it.
pub fn classify_fate(
    params: Params,
    mu: f64,
    launch: &SaddleLaunch,
    options: &ShootingOptions,
) -> Result<FateReport> {
    let gamma = params.gamma;
    let problem = launch.problem(gamma, mu);
    classify_problem(&problem, options, true)
}

/// Shared by kink and array shots. `watch_ball` enables the stop inside
/// the connection radius.
pub(crate) fn classify_problem(
    problem: &OdeProblem,
    options: &ShootingOptions,
    watch_ball: bool,
) -> Result<FateReport> {
    let top = saddle(problem.gamma, 0);
    let eps = options.connection_radius;
    let stop = StopSpec::horizon(problem.xi0 + options.horizon)
        .with(EventSpec::Level {
            level: top,
            crossing: Crossing::Rising,
        })
        .with(EventSpec::TurningPoint {
            crossing: Crossing::Falling,
        });
    // Energy never increases, and reaching g_0^M needs e >= U(g_0^M), so a
    // clear deficit below that level is a capture even when an overdamped
    // approach to the well never turns g' negative.
    let summit = -potential(top, problem.gamma).abs().max(1.0) * CAPTURE_MARGIN
        + potential(top, problem.gamma);
    let mut verdict = None;
    let mut watch = |_: f64, s: State| {
        if watch_ball && (s.g - top).hypot(s.gp) <= eps {
            verdict = Some(Fate::Connection);
            ControlFlow::Break(())
        } else if s.g < top && mechanical_energy(s, problem.gamma) < summit {
            verdict = Some(Fate::Capture);
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    };
    let (trajectory, terminal) =
        integrate_observed(problem, &stop, &options.tolerances, &mut watch)?;
    let s = terminal.state;
    let resolved = match terminal.kind {
        EventKind::Level { .. } => Fate::Overshoot,
        EventKind::TurningPoint => Fate::Capture,
        EventKind::Horizon => Fate::Ambiguous,
        EventKind::Stopped => verdict.unwrap_or(Fate::Connection),
    };
    // arrival at the summit energy, resolved to the energy accuracy of the
    // integration rather than in phase space
    let excess = 0.5 * s.gp * s.gp + potential(s.g, problem.gamma) - potential(top, problem.gamma);
    let decided = matches!(
        terminal.kind,
        EventKind::Level { .. } | EventKind::TurningPoint
    );
    let fate = if watch_ball && decided && excess.abs() <= options.connection_energy {
        Fate::Connection
    } else {
        resolved
    };
    Ok(FateReport {
        fate,
        resolved,
        crossing_xi: terminal.xi,
        crossing_speed: s.gp,
        trajectory,
        terminal,
    })
}

/// `classify_fate`, retrying an undecided run once from a launch 100
/// times closer to the saddle before giving up.
pub(crate) fn decided_fate(
    params: Params,
    mu: f64,
    options: &ShootingOptions,
) -> Result<FateReport> {
    let launch = launch_from_saddle(params, mu, options.delta)?;
    let report = classify_fate(params, mu, &launch, options)?;
    if report.fate != Fate::Ambiguous {
        return Ok(report);
    }
    let launch = launch_from_saddle(params, mu, options.delta * 1e-2)?;
    let report = classify_fate(params, mu, &launch, options)?;
    if report.fate == Fate::Ambiguous {
        return Err(Error::AmbiguousFate {
            mu,
            horizon: options.horizon,
        });
    }
    Ok(report)
}

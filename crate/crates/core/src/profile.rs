//! Travelling-wave profiles `g(xi)` as sampled curves with exponential tails.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{State, TWO_PI};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    Kink,
    Antikink,
    Array,
    HalfArray,
    BoundedPair,
    StaticStable,
    StaticUnstable,
}

impl ProfileKind {
    pub fn name(self) -> &'static str {
        match self {
            ProfileKind::Kink => "kink",
            ProfileKind::Antikink => "antikink",
            ProfileKind::Array => "array",
            ProfileKind::HalfArray => "half-array",
            ProfileKind::BoundedPair => "bounded-pair",
            ProfileKind::StaticStable => "static-stable",
            ProfileKind::StaticUnstable => "static-unstable",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            ProfileKind::Kink,
            ProfileKind::Antikink,
            ProfileKind::Array,
            ProfileKind::HalfArray,
            ProfileKind::BoundedPair,
            ProfileKind::StaticStable,
            ProfileKind::StaticUnstable,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub xi: f64,
    pub g: f64,
    pub gp: f64,
}

impl ProfilePoint {
    pub fn state(&self) -> State {
        State::new(self.g, self.gp)
    }
}

/// Exponential approach to an equilibrium beyond the sampled span:
/// `g - limit ~ exp(rate * xi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tail {
    pub limit: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveProfile {
    pub kind: ProfileKind,
    pub gamma: f64,
    pub alpha: f64,
    pub mu: f64,
    /// Signed speed; `None` when it is a free parameter (`alpha = mu = 0`).
    pub velocity: Option<f64>,
    /// Winding per period for arrays, total otherwise.
    pub winding: i64,
    pub period: Option<f64>,
    pub left_tail: Option<Tail>,
    pub right_tail: Option<Tail>,
    pub points: Vec<ProfilePoint>,
}

impl WaveProfile {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn span(&self) -> (f64, f64) {
        (
            self.points.first().map_or(0.0, |p| p.xi),
            self.points.last().map_or(0.0, |p| p.xi),
        )
    }

    /// `g''` from the reduced equation.
    fn curvature(&self, g: f64, gp: f64) -> f64 {
        -self.mu * gp - g.sin() + self.gamma
    }

    /// State at `xi`: cubic Hermite inside the span, periodic continuation
    /// for arrays and exponential tails (or the end value) outside.
    pub fn state_at(&self, xi: f64) -> State {
        let (lo, hi) = self.span();
        if self.points.len() == 1 {
            return self.points[0].state();
        }
        if let (ProfileKind::Array, Some(period)) = (self.kind, self.period) {
            if xi < lo || xi > hi {
                let turns = ((xi - lo) / period).floor();
                let s = self.state_at(xi - turns * period);
                let shift = self.winding as f64 * TWO_PI * turns;
                return State::new(s.g + shift, s.gp);
            }
        }
        if xi <= lo {
            let p = self.points[0];
            return match self.left_tail {
                Some(t) => tail_state(t, p, xi),
                None => p.state(),
            };
        }
        if xi >= hi {
            let p = *self.points.last().expect("non-empty");
            return match self.right_tail {
                Some(t) => tail_state(t, p, xi),
                None => p.state(),
            };
        }
        let i = self
            .points
            .partition_point(|p| p.xi <= xi)
            .saturating_sub(1);
        let i = i.min(self.points.len() - 2);
        let (a, b) = (self.points[i], self.points[i + 1]);
        let h = b.xi - a.xi;
        let t = (xi - a.xi) / h;
        let g = hermite(t, h, a.g, a.gp, b.g, b.gp);
        let gp = hermite(
            t,
            h,
            a.gp,
            self.curvature(a.g, a.gp),
            b.gp,
            self.curvature(b.g, b.gp),
        );
        State::new(g, gp)
    }

    /// The image under `phi -> -phi`, which maps a wave at tilt `gamma` to
    /// one at `-gamma` (`g -> -g - 2 pi`, `g' -> -g'`).
    pub fn reflected(&self) -> WaveProfile {
        let flip = |t: Tail| Tail {
            limit: -t.limit - TWO_PI,
            rate: t.rate,
        };
        WaveProfile {
            kind: match self.kind {
                ProfileKind::Kink => ProfileKind::Antikink,
                ProfileKind::Antikink => ProfileKind::Kink,
                k => k,
            },
            gamma: -self.gamma,
            mu: self.mu,
            alpha: self.alpha,
            velocity: self.velocity,
            winding: -self.winding,
            period: self.period,
            left_tail: self.left_tail.map(flip),
            right_tail: self.right_tail.map(flip),
            points: self
                .points
                .iter()
                .map(|p| ProfilePoint {
                    xi: p.xi,
                    g: -p.g - TWO_PI,
                    gp: -p.gp,
                })
                .collect(),
        }
    }

    /// Same curve on a uniform grid of the given spacing over the span.
    pub fn resampled(&self, spacing: f64) -> Result<WaveProfile> {
        if !(spacing > 0.0) {
            return Err(Error::InvalidParameter {
                name: "spacing",
                value: spacing,
                reason: "must be positive",
            });
        }
        let (lo, hi) = self.span();
        let n = ((hi - lo) / spacing).round().max(1.0) as usize;
        let step = (hi - lo) / n as f64;
        let points = (0..=n)
            .map(|i| {
                let xi = if i == n { hi } else { lo + i as f64 * step };
                let s = self.state_at(xi);
                ProfilePoint {
                    xi,
                    g: s.g,
                    gp: s.gp,
                }
            })
            .collect();
        Ok(WaveProfile {
            points,
            ..self.clone()
        })
    }

    /// Shift the `xi` origin so that `g` first crosses `level` at `xi = 0`.
    pub(crate) fn center_on(&mut self, level: f64) -> Result<()> {
        let x0 = crossing(&self.points, level)
            .ok_or_else(|| Error::Profile(format!("g never crosses {level}")))?;
        for p in &mut self.points {
            p.xi -= x0;
        }
        Ok(())
    }
}

fn tail_state(t: Tail, p: ProfilePoint, xi: f64) -> State {
    let d = (p.g - t.limit) * (t.rate * (xi - p.xi)).exp();
    State::new(t.limit + d, t.rate * d)
}

fn hermite(t: f64, h: f64, y0: f64, d0: f64, y1: f64, d1: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * d1
}

/// First `xi` where `g` crosses `level`, by Hermite-cubic root refinement.
fn crossing(points: &[ProfilePoint], level: f64) -> Option<f64> {
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (a.g - level, b.g - level);
        if fa == 0.0 {
            return Some(a.xi);
        }
        if fa.signum() != fb.signum() {
            let h = b.xi - a.xi;
            let f = |t: f64| hermite(t, h, a.g, a.gp, b.g, b.gp) - level;
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..60 {
                let m = 0.5 * (lo + hi);
                if f(m).signum() == fa.signum() {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            return Some(a.xi + 0.5 * (lo + hi) * h);
        }
    }
    None
}

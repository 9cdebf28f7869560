//! Adaptive Dormand-Prince 5(4) integration of the washboard particle
//! `g'' + mu g' + sin g - gamma = 0`, with the free quartic interpolant for
//! dense output and event location by bisection on that interpolant.

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{mechanical_energy, saddle, State};
use crate::numerics::{GL5_NODES, GL5_WEIGHTS};

/// Default far horizon for open-ended runs.
pub const DEFAULT_HORIZON: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    /// Hard step budget for one call.
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 5_000_000,
        }
    }
}

impl Tolerances {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    /// Default relative tolerance with a negligible absolute floor, for
    /// runs in the saddle frame where states of size `1e-8` matter.
    pub fn near_saddle() -> Self {
        Self::new(1e-10, 1e-20)
    }
}

/// Coordinates the integrator advances internally.
///
/// `Absolute` works on `g` itself. `Saddle` works on the offset
/// `u = g - g_k^M` from the nearest barrier top and moves the anchor `k`
/// whenever `|u|` passes `pi`, so that states close to a saddle keep full
/// relative precision and the error control stays relative to the distance
/// from it. Runs that start or end at a saddle should use it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Frame {
    Absolute,
    Saddle { k: i64, u: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeProblem {
    pub gamma: f64,
    pub mu: f64,
    pub initial: State,
    pub xi0: f64,
    pub frame: Frame,
}

impl OdeProblem {
    pub fn new(gamma: f64, mu: f64, initial: State, xi0: f64) -> Self {
        Self {
            gamma,
            mu,
            initial,
            xi0,
            frame: Frame::Absolute,
        }
    }

    /// Start at `g = g_k^M + u`, with `u` kept exactly.
    pub fn from_saddle(gamma: f64, mu: f64, k: i64, u: f64, gp: f64, xi0: f64) -> Self {
        Self {
            gamma,
            mu,
            initial: State::new(saddle(gamma, k) + u, gp),
            xi0,
            frame: Frame::Saddle { k, u },
        }
    }

    #[inline]
    pub fn rhs(&self, y: [f64; 2]) -> [f64; 2] {
        [y[1], -self.mu * y[1] - y[0].sin() + self.gamma]
    }

    /// Right-hand side in the internal coordinate. Around a saddle,
    /// `gamma - sin(g_k^M + u) = c sin u + 2 gamma sin^2(u/2)`.
    #[inline]
    fn rhs_local(&self, y: [f64; 2], c: f64) -> [f64; 2] {
        let force = match self.frame {
            Frame::Absolute => self.gamma - y[0].sin(),
            Frame::Saddle { .. } => {
                let s = (0.5 * y[0]).sin();
                c * y[0].sin() + 2.0 * self.gamma * s * s
            }
        };
        [y[1], -self.mu * y[1] + force]
    }
}

/// Which way a monitored quantity must cross its level to trigger, taken
/// along the direction of integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Crossing {
    Rising,
    Falling,
    Either,
}

impl Crossing {
    fn triggers(self, before: f64, after: f64) -> bool {
        match self {
            Crossing::Rising => before < 0.0 && after >= 0.0,
            Crossing::Falling => before > 0.0 && after <= 0.0,
            Crossing::Either => (before < 0.0 && after >= 0.0) || (before > 0.0 && after <= 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EventSpec {
    /// `g` crosses `level`.
    Level { level: f64, crossing: Crossing },
    /// `g' = 0`.
    TurningPoint { crossing: Crossing },
}

impl EventSpec {
    fn value(&self, y: [f64; 2], base: f64) -> f64 {
        match *self {
            EventSpec::Level { level, .. } => y[0] - (level - base),
            EventSpec::TurningPoint { .. } => y[1],
        }
    }

    fn crossing(&self) -> Crossing {
        match *self {
            EventSpec::Level { crossing, .. } | EventSpec::TurningPoint { crossing } => crossing,
        }
    }
}

/// When to stop: the first triggered event, or the `horizon` (an absolute
/// `xi`; below `xi0` integrates backwards).
#[derive(Debug, Clone, PartialEq)]
pub struct StopSpec {
    pub horizon: f64,
    pub events: Vec<EventSpec>,
}

impl StopSpec {
    pub fn horizon(horizon: f64) -> Self {
        Self {
            horizon,
            events: Vec::new(),
        }
    }

    pub fn with(mut self, event: EventSpec) -> Self {
        self.events.push(event);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EventKind {
    Level {
        level: f64,
    },
    TurningPoint,
    Horizon,
    /// The step observer asked to stop.
    Stopped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    /// Index into `StopSpec::events`; `None` for the horizon.
    pub index: Option<usize>,
    pub xi: f64,
    pub state: State,
}

/// One accepted step and its interpolant.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Segment {
    x0: f64,
    h: f64,
    /// Anchor position added to the first component on output.
    base: f64,
    /// Hairer's `rcont` coefficients, per component.
    r: [[f64; 5]; 2],
}

impl Segment {
    fn eval(&self, x: f64) -> [f64; 2] {
        let y = self.eval_local(x);
        [self.base + y[0], y[1]]
    }

    fn eval_local(&self, x: f64) -> [f64; 2] {
        let th = (x - self.x0) / self.h;
        let th1 = 1.0 - th;
        let mut out = [0.0; 2];
        for (c, r) in self.r.iter().enumerate() {
            out[c] = r[0] + th * (r[1] + th1 * (r[2] + th * (r[3] + th1 * r[4])));
        }
        out
    }

    fn lo(&self) -> f64 {
        self.x0.min(self.x0 + self.h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub xi: f64,
    pub state: State,
}

/// Accepted step points plus the piecewise interpolant between them, stored
/// in increasing `xi` regardless of the direction of integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    samples: Vec<Sample>,
    segments: Vec<Segment>,
}

impl Trajectory {
    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> Sample {
        self.samples[0]
    }

    pub fn last(&self) -> Sample {
        *self.samples.last().expect("trajectory has samples")
    }

    pub fn span(&self) -> (f64, f64) {
        (self.first().xi, self.last().xi)
    }

    fn segment_index(&self, xi: f64) -> usize {
        let idx = self.segments.partition_point(|s| s.lo() <= xi);
        idx.saturating_sub(1).min(self.segments.len() - 1)
    }

    /// Dense-output state at `xi`; clamped to the covered span.
    pub fn state_at(&self, xi: f64) -> State {
        if self.segments.is_empty() {
            return self.samples[0].state;
        }
        let (lo, hi) = self.span();
        let xi = xi.clamp(lo, hi);
        let y = self.segments[self.segment_index(xi)].eval(xi);
        State::new(y[0], y[1])
    }

    /// First `xi` (in increasing order) where `g` crosses `level`.
    pub fn first_crossing(&self, level: f64) -> Option<f64> {
        for (i, w) in self.samples.windows(2).enumerate() {
            let a = w[0].state.g - level;
            let b = w[1].state.g - level;
            if a == 0.0 {
                return Some(w[0].xi);
            }
            if a.signum() != b.signum() || b == 0.0 {
                let f = |x: f64| self.segments[i].eval(x)[0] - level;
                return Some(bisect_on(f, w[0].xi, w[1].xi, a));
            }
        }
        None
    }

    /// Uniformly spaced resampling through the interpolant; both ends kept.
    pub fn resample(&self, spacing: f64) -> Vec<Sample> {
        let (lo, hi) = self.span();
        if spacing <= 0.0 || hi <= lo {
            return self.samples.clone();
        }
        let n = ((hi - lo) / spacing).floor() as usize;
        let mut out: Vec<Sample> = (0..=n)
            .map(|i| {
                let xi = lo + i as f64 * spacing;
                Sample {
                    xi,
                    state: self.state_at(xi),
                }
            })
            .collect();
        if hi - out.last().map_or(lo, |s| s.xi) > 1e-12 * spacing {
            out.push(self.last());
        }
        out
    }

    /// `integral of g'^2` over the covered span by 5-point Gauss rules on each
    /// segment, accumulated up to each sample.
    fn cumulative_gp2(&self) -> Vec<f64> {
        let mut acc = Vec::with_capacity(self.samples.len());
        let mut total = 0.0;
        acc.push(0.0);
        for (i, w) in self.samples.windows(2).enumerate() {
            let (a, b) = (w[0].xi, w[1].xi);
            let seg = &self.segments[i];
            let mut s = 0.0;
            for (t, wt) in GL5_NODES.iter().zip(GL5_WEIGHTS) {
                let gp = seg.eval(a + t * (b - a))[1];
                s += wt * gp * gp;
            }
            total += s * (b - a);
            acc.push(total);
        }
        acc
    }
}

fn bisect_on<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, fa: f64) -> f64 {
    let sa = fa.signum();
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    // the endpoint that lies closer to the root
    if f(a).abs() <= f(b).abs() {
        a
    } else {
        b
    }
}

/// Per-step hook, called with every accepted step end (and the event
/// point). Breaking ends the run with an `EventKind::Stopped` event.
pub trait StepObserver {
    fn observe(&mut self, xi: f64, state: State) -> ControlFlow<()>;
}

impl<F: FnMut(f64, State) -> ControlFlow<()>> StepObserver for F {
    fn observe(&mut self, xi: f64, state: State) -> ControlFlow<()> {
        self(xi, state)
    }
}

struct NoObserver;

impl StepObserver for NoObserver {
    fn observe(&mut self, _: f64, _: State) -> ControlFlow<()> {
        ControlFlow::Continue(())
    }
}

// Dormand-Prince coefficients; the system is autonomous so the nodes c_i
// never appear.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[inline]
fn axpy(y: [f64; 2], terms: &[(f64, [f64; 2])], h: f64) -> [f64; 2] {
    let mut out = y;
    for &(a, k) in terms {
        out[0] += h * a * k[0];
        out[1] += h * a * k[1];
    }
    out
}

/// Integrate until the first triggered event or the horizon.
pub fn integrate(
    problem: &OdeProblem,
    stop: &StopSpec,
    tol: &Tolerances,
) -> Result<(Trajectory, Event)> {
    integrate_observed(problem, stop, tol, &mut NoObserver)
}

/// `integrate` with a hook called after every accepted step.
pub fn integrate_observed<O: StepObserver + ?Sized>(
    problem: &OdeProblem,
    stop: &StopSpec,
    tol: &Tolerances,
    observer: &mut O,
) -> Result<(Trajectory, Event)> {
    if !(tol.rtol > 0.0 && tol.atol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tolerance",
            value: tol.rtol.min(tol.atol),
            reason: "tolerances must be positive",
        });
    }
    if !problem.initial.is_finite() {
        return Err(Error::InvalidParameter {
            name: "initial state",
            value: f64::NAN,
            reason: "must be finite",
        });
    }
    let x_end = stop.horizon;
    let dir = if x_end >= problem.xi0 { 1.0 } else { -1.0 };
    let gamma = problem.gamma;
    let c = (1.0 - gamma * gamma).sqrt();
    let (mut anchor, u0) = match problem.frame {
        Frame::Absolute => (None, problem.initial.g),
        Frame::Saddle { k, u } => (Some(k), u),
    };
    let base_of = |anchor: Option<i64>| anchor.map_or(0.0, |k| saddle(gamma, k));
    let mut base = base_of(anchor);
    let mut x = problem.xi0;
    let mut y = [u0, problem.initial.gp];
    let mut samples = vec![Sample {
        xi: x,
        state: problem.initial,
    }];
    let mut segments = Vec::new();

    let finish = |mut samples: Vec<Sample>, mut segments: Vec<Segment>, ev: Event| {
        if dir < 0.0 {
            samples.reverse();
            segments.reverse();
        }
        (Trajectory { samples, segments }, ev)
    };

    if x == x_end {
        let ev = Event {
            kind: EventKind::Horizon,
            index: None,
            xi: x,
            state: problem.initial,
        };
        return Ok(finish(samples, segments, ev));
    }

    let rhs = |y: [f64; 2]| problem.rhs_local(y, c);
    let mut k1 = rhs(y);
    let scale = |y: [f64; 2], i: usize| tol.atol + tol.rtol * y[i].abs();
    // initial step guess from the derivative size
    let d0 = ((y[0] / scale(y, 0)).powi(2) + (y[1] / scale(y, 1)).powi(2)).sqrt() / 2f64.sqrt();
    let d1 = ((k1[0] / scale(y, 0)).powi(2) + (k1[1] / scale(y, 1)).powi(2)).sqrt() / 2f64.sqrt();
    let mut h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        (0.01 * d0 / d1).clamp(1e-10, 0.1)
    };
    h = h.min((x_end - x).abs()) * dir;

    let mut fac_old: f64 = 1e-4;
    let mut steps = 0usize;
    let values = |y: [f64; 2], base: f64| -> Vec<f64> {
        stop.events.iter().map(|e| e.value(y, base)).collect()
    };
    let mut event_values = values(y, base);

    loop {
        steps += 1;
        if steps > tol.max_steps {
            return Err(Error::StepBudget { steps, xi: x });
        }
        let last = (x + h - x_end) * dir >= 0.0;
        if last {
            h = x_end - x;
        }

        let k2 = rhs(axpy(y, &[(A21, k1)], h));
        let k3 = rhs(axpy(y, &[(A31, k1), (A32, k2)], h));
        let k4 = rhs(axpy(y, &[(A41, k1), (A42, k2), (A43, k3)], h));
        let k5 = rhs(axpy(y, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)], h));
        let k6 = rhs(axpy(
            y,
            &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)],
            h,
        ));
        let y_new = axpy(
            y,
            &[(A71, k1), (A73, k3), (A74, k4), (A75, k5), (A76, k6)],
            h,
        );
        let k7 = rhs(y_new);

        let mut err = 0.0;
        for i in 0..2 {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sk = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / sk).powi(2);
        }
        let err = (err / 2.0).sqrt();
        if !err.is_finite() {
            h *= 0.1;
            if h.abs() < 1e-14 * x.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { xi: x, h: h.abs() });
            }
            continue;
        }

        // PI step-size controller
        let fac11 = err.powf(0.2 - 0.04 * 0.75);
        let fac = (fac11 / fac_old.powf(0.04) / 0.9).clamp(0.1, 5.0);
        let h_new = h / fac;

        if err > 1.0 {
            h /= (fac11 / 0.9).clamp(1.0, 5.0);
            if h.abs() < 1e-14 * x.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { xi: x, h: h.abs() });
            }
            continue;
        }
        fac_old = err.max(1e-4);

        let mut r = [[0.0; 5]; 2];
        for i in 0..2 {
            let dy = y_new[i] - y[i];
            let bspl = h * k1[i] - dy;
            r[i] = [
                y[i],
                dy,
                bspl,
                dy - h * k7[i] - bspl,
                h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]),
            ];
        }
        let seg = Segment { x0: x, h, base, r };
        let x_new = x + h;

        // events: earliest trigger inside this step wins
        let new_values = values(y_new, base);
        let mut hit: Option<(usize, f64)> = None;
        for (i, spec) in stop.events.iter().enumerate() {
            if spec.crossing().triggers(event_values[i], new_values[i]) {
                let f = |xx: f64| spec.value(seg.eval_local(xx), base);
                let xe = bisect_on(f, x, x_new, event_values[i]);
                if hit.is_none_or(|(_, xb)| (xe - xb) * dir < 0.0) {
                    hit = Some((i, xe));
                }
            }
        }
        if let Some((i, xe)) = hit {
            let ye = seg.eval(xe);
            let state = State::new(ye[0], ye[1]);
            segments.push(seg);
            samples.push(Sample { xi: xe, state });
            let _ = observer.observe(xe, state);
            let kind = match stop.events[i] {
                EventSpec::Level { level, .. } => EventKind::Level { level },
                EventSpec::TurningPoint { .. } => EventKind::TurningPoint,
            };
            let ev = Event {
                kind,
                index: Some(i),
                xi: xe,
                state,
            };
            return Ok(finish(samples, segments, ev));
        }

        segments.push(seg);
        x = x_new;
        y = y_new;
        k1 = k7;
        event_values = new_values;
        let state = State::new(base + y[0], y[1]);
        samples.push(Sample { xi: x, state });
        let flow = observer.observe(x, state);

        if last || flow.is_break() {
            let ev = Event {
                kind: if last {
                    EventKind::Horizon
                } else {
                    EventKind::Stopped
                },
                index: None,
                xi: x,
                state,
            };
            return Ok(finish(samples, segments, ev));
        }
        // move to the neighbouring barrier top; the local field is
        // 2 pi periodic, so the stored slope stays valid
        if let Some(k) = anchor.as_mut() {
            if y[0].abs() > std::f64::consts::PI {
                let step = y[0].signum() as i64;
                *k += step;
                y[0] -= 2.0 * std::f64::consts::PI * step as f64;
                base = base_of(anchor);
                event_values = values(y, base);
            }
        }
        h = h_new.abs().min(1.0) * dir;
    }
}

/// Largest violation of the integrated energy balance
/// `e(xi) - e(xi_bar) = mu * integral_xi^xi_bar g'^2` over all sample pairs.
///
/// With `D(xi) = e(xi) + mu * integral_{xi_0}^{xi} g'^2`, the residual of a
/// pair is `|D(xi) - D(xi_bar)|`, so the maximum is `max D - min D`.
pub fn energy_audit(trajectory: &Trajectory, gamma: f64, mu: f64) -> f64 {
    let acc = trajectory.cumulative_gp2();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (s, i) in trajectory.samples.iter().zip(acc) {
        let d = mechanical_energy(s.state, gamma) + mu * i;
        lo = lo.min(d);
        hi = hi.max(d);
    }
    hi - lo
}

/// The acceptance threshold for `energy_audit`: `1e-8 (1 + |e|)`.
pub fn energy_audit_bound(trajectory: &Trajectory, gamma: f64) -> f64 {
    let e = trajectory
        .samples
        .iter()
        .map(|s| mechanical_energy(s.state, gamma).abs())
        .fold(0.0, f64::max);
    1e-8 * (1.0 + e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rk4_reference(p: &OdeProblem, y0: State, x0: f64, x1: f64, n: usize) -> State {
        let h = (x1 - x0) / n as f64;
        let mut y = [y0.g, y0.gp];
        for _ in 0..n {
            let k1 = p.rhs(y);
            let k2 = p.rhs([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
            let k3 = p.rhs([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
            let k4 = p.rhs([y[0] + h * k3[0], y[1] + h * k3[1]]);
            for c in 0..2 {
                y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            }
        }
        State::new(y[0], y[1])
    }

    #[test]
    fn small_oscillation_period_is_two_pi() {
        let p = OdeProblem::new(0.0, 0.0, State::new(1e-6, 0.0), 0.0);
        // second falling crossing of gp after the start: one full period
        let stop = StopSpec::horizon(20.0).with(EventSpec::TurningPoint {
            crossing: Crossing::Rising,
        });
        // the 1e-6 amplitude sets the absolute error scale
        let tol = Tolerances::new(1e-10, 1e-18);
        let (_, ev) = integrate(&p, &stop, &tol).unwrap();
        // gp rises through 0 at half period (g = -1e-6)
        let half = ev.xi;
        let p2 = OdeProblem::new(0.0, 0.0, ev.state, ev.xi);
        let stop2 = StopSpec::horizon(40.0).with(EventSpec::TurningPoint {
            crossing: Crossing::Falling,
        });
        let (_, ev2) = integrate(&p2, &stop2, &tol).unwrap();
        assert!((half - PI).abs() / PI < 1e-8, "half period {half}");
        assert!(
            (ev2.xi - 2.0 * PI).abs() / (2.0 * PI) < 1e-8,
            "period {}",
            ev2.xi
        );
    }

    #[test]
    fn separatrix_launch_tracks_closed_form_kink() {
        let delta: f64 = 1e-8;
        let xi0 = (delta / 4.0f64).ln();
        let p = OdeProblem::from_saddle(0.0, 0.0, -1, delta, delta, xi0);
        let (traj, _) =
            integrate(&p, &StopSpec::horizon(10.0), &Tolerances::near_saddle()).unwrap();
        let mut worst: f64 = 0.0;
        for s in traj.samples().iter().filter(|s| s.xi >= -10.0) {
            let exact = 4.0 * s.xi.exp().atan() - PI;
            worst = worst.max((s.state.g - exact).abs());
        }
        assert!(worst < 1e-6, "sup error {worst}");
    }

    #[test]
    fn damped_orbit_is_captured_by_the_well() {
        let gamma: f64 = 0.1;
        let well = gamma.asin();
        let p = OdeProblem::new(gamma, 0.2, State::new(well + 0.3, 0.0), 0.0);
        let (traj, ev) = integrate(&p, &StopSpec::horizon(300.0), &Tolerances::default()).unwrap();
        assert_eq!(ev.kind, EventKind::Horizon);
        let end = traj.last().state;
        assert!(
            (end.g - well).abs() < 1e-9 && end.gp.abs() < 1e-9,
            "{end:?}"
        );
        // long fixed-step reference run
        let reference = rk4_reference(&p, p.initial, 0.0, 300.0, 300_000);
        assert!((reference.g - end.g).abs() < 1e-10);
    }

    #[test]
    fn dense_output_agrees_with_fine_reference_between_samples() {
        let p = OdeProblem::new(0.1, 0.3, State::new(-2.0, 1.7), 0.0);
        let tol = Tolerances::default();
        let (traj, _) = integrate(&p, &StopSpec::horizon(30.0), &tol).unwrap();
        let samples = traj.samples();
        let mut lcg: u64 = 12345;
        for _ in 0..100 {
            lcg = lcg
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let i = (lcg >> 33) as usize % (samples.len() - 1);
            let u = ((lcg >> 11) & 0xffff) as f64 / 65536.0;
            let (a, b) = (samples[i].xi, samples[i + 1].xi);
            let x = a + u * (b - a);
            let reference = rk4_reference(&p, samples[i].state, a, x, 64);
            let got = traj.state_at(x);
            let limit = 10.0 * (tol.atol + tol.rtol * got.g.abs().max(got.gp.abs()));
            assert!((got.g - reference.g).abs() <= limit, "g at {x}");
            assert!((got.gp - reference.gp).abs() <= limit, "gp at {x}");
        }
    }

    #[test]
    fn energy_rate_matches_dissipation_law() {
        let (gamma, mu) = (0.1, 0.5);
        let p = OdeProblem::new(gamma, mu, State::new(-3.0, 2.5), 0.0);
        let tol = Tolerances::new(1e-12, 1e-14);
        let (traj, _) = integrate(&p, &StopSpec::horizon(20.0), &tol).unwrap();
        // five-point stencil: truncation h^4 and interpolation noise tol / h
        // both stay near 1e-9
        let h = 1e-2;
        for s in traj.samples().iter().step_by(7) {
            if s.xi < 2.0 * h || s.xi > 20.0 - 2.0 * h || s.state.gp.powi(2) < 1e-8 {
                continue;
            }
            let e = |x: f64| mechanical_energy(traj.state_at(x), gamma);
            let de = (e(s.xi - 2.0 * h) - 8.0 * e(s.xi - h) + 8.0 * e(s.xi + h)
                - e(s.xi + 2.0 * h))
                / (12.0 * h);
            let expected = -mu * s.state.gp.powi(2);
            assert!(
                (de - expected).abs() <= 1e-6 * expected.abs().max(1e-2),
                "xi {}: {de} vs {expected}",
                s.xi
            );
        }
    }

    #[test]
    fn time_reversal_returns_to_start() {
        let start = State::new(0.4, 1.1);
        let p = OdeProblem::new(0.3, 0.0, start, 0.0);
        let (_, ev) = integrate(&p, &StopSpec::horizon(15.0), &Tolerances::default()).unwrap();
        let back = OdeProblem::new(0.3, 0.0, ev.state, ev.xi);
        let (traj, ev2) =
            integrate(&back, &StopSpec::horizon(0.0), &Tolerances::default()).unwrap();
        assert_eq!(ev2.xi, 0.0);
        assert!((ev2.state.g - start.g).abs() < 1e-9);
        assert!((ev2.state.gp - start.gp).abs() < 1e-9);
        let xs: Vec<f64> = traj.samples().iter().map(|s| s.xi).collect();
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn events_are_refined_to_their_defining_equations() {
        let p = OdeProblem::new(0.1, 0.05, State::new(-3.0, 1.5), 0.0);
        let level = 1.234;
        let stop = StopSpec::horizon(100.0).with(EventSpec::Level {
            level,
            crossing: Crossing::Rising,
        });
        let (_, ev) = integrate(&p, &stop, &Tolerances::default()).unwrap();
        assert!((ev.state.g - level).abs() <= 1e-12);

        let p = OdeProblem::new(0.1, 0.5, State::new(-2.0, 1.0), 0.0);
        let stop = StopSpec::horizon(100.0).with(EventSpec::TurningPoint {
            crossing: Crossing::Falling,
        });
        let (_, ev) = integrate(&p, &stop, &Tolerances::default()).unwrap();
        assert_eq!(ev.kind, EventKind::TurningPoint);
        assert!(ev.state.gp.abs() <= 1e-12);
    }

    #[test]
    fn horizon_event_is_not_an_error() {
        let p = OdeProblem::new(0.0, 0.0, State::new(0.1, 0.0), 0.0);
        let stop = StopSpec::horizon(1.0).with(EventSpec::Level {
            level: 10.0,
            crossing: Crossing::Either,
        });
        let (_, ev) = integrate(&p, &stop, &Tolerances::default()).unwrap();
        assert_eq!(ev.kind, EventKind::Horizon);
        assert_eq!(ev.xi, 1.0);
    }

    #[test]
    fn rejects_bad_tolerances() {
        let p = OdeProblem::new(0.0, 0.0, State::new(0.1, 0.0), 0.0);
        assert!(integrate(&p, &StopSpec::horizon(1.0), &Tolerances::new(0.0, 1e-12)).is_err());
    }

    #[test]
    fn energy_audit_conservative_and_dissipative() {
        let tol = Tolerances::new(1e-12, 1e-14);
        let p = OdeProblem::new(0.0, 0.0, State::new(0.0, 1.5), 0.0);
        let (traj, _) = integrate(&p, &StopSpec::horizon(100.0), &tol).unwrap();
        assert!(energy_audit(&traj, 0.0, 0.0) <= 1e-10);

        let p = OdeProblem::new(0.1, 0.0, State::new(0.0, 3.0), 0.0);
        let (traj, _) = integrate(&p, &StopSpec::horizon(100.0), &tol).unwrap();
        // e is a small difference of the growing terms gamma g and gp^2 / 2
        let end = traj.last().state;
        let terms = 1.0 + 0.1 * end.g.abs() + 0.5 * end.gp * end.gp;
        assert!(energy_audit(&traj, 0.1, 0.0) <= 1e-10 * terms);

        let p = OdeProblem::new(0.1, 0.5, State::new(0.6, 0.0), 0.0);
        let (traj, _) = integrate(&p, &StopSpec::horizon(60.0), &tol).unwrap();
        let res = energy_audit(&traj, 0.1, 0.5);
        assert!(res <= energy_audit_bound(&traj, 0.1), "{res}");
        let es: Vec<f64> = traj
            .samples()
            .iter()
            .map(|s| mechanical_energy(s.state, 0.1))
            .collect();
        assert!(es.windows(2).all(|w| w[1] <= w[0] + 1e-13));
    }
}

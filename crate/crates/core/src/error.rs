use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// Unperturbed case: velocity is a free parameter.
    #[error(
        "velocity undefined for alpha = 0 and mu = 0 (free parameter of the unperturbed equation)"
    )]
    UndefinedVelocity,

    #[error("luminal speed |v| = 1: the reduced equation degenerates to first order")]
    Luminal,

    #[error("superluminal speed |v| = {speed} > 1 only admits unstable waves")]
    Superluminal { speed: f64 },

    #[error("step size underflow at xi = {xi} (h = {h:e}); problem looks stiff")]
    StepSizeUnderflow { xi: f64, h: f64 },

    #[error("step budget of {steps} exhausted at xi = {xi}")]
    StepBudget { steps: usize, xi: f64 },

    #[error("kink viscosity undefined at gamma = 0: every mu > 0 is captured")]
    KinkMuUndefined,

    #[error("trajectory fate ambiguous at mu = {mu} after horizon {horizon}")]
    AmbiguousFate { mu: f64, horizon: f64 },

    #[error("no bracket found: {0}")]
    NoBracket(String),

    #[error("bounded pair degenerates at gamma = 0 into two separatrices; use kink_closed_form")]
    DegeneratePair,

    #[error("half-array launch was captured at xi = {xi}")]
    HalfArrayCaptured { xi: f64 },

    #[error("domain too small: need length {needed}, have {available}")]
    DomainTooSmall { needed: f64, available: f64 },

    #[error("array profiles need a circle domain (or explicit truncation)")]
    ArrayOnLine,

    #[error("profile is not usable here: {0}")]
    Profile(String),

    #[error("CFL violated: dt = {dt} > 0.9 dx = {limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error("non-finite field values at t = {t}")]
    BlowUp { t: f64 },

    #[error("front at x = {x} came within 10 units of a pinned end at t = {t}")]
    FrontNearBoundary { t: f64, x: f64 },

    #[error("energy balance residual {residual:e} exceeds {bound:e} at t = {t}")]
    EnergyLaw { t: f64, residual: f64, bound: f64 },

    #[error("no front crossing found")]
    NoCrossing,

    #[error("need at least {needed} front samples after the transient window, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("quadrature failed to converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },
}

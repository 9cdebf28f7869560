//! One function per subcommand. Each returns its artifacts and derived
//! values; [`dispatch`] writes them with the manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use serde::Serialize;
use serde_json::{json, Map, Value};
use sgwave::model::{asymptotic_velocity, equilibria, velocity_from_mu, Direction, Equilibrium};
use sgwave::pde::{
    energy_report, init_from_profile, measure_velocity, run, shape_drift, DomainSpec, InitSpec,
    RunReport, RunSpec,
};
use sgwave::shooting::{
    extrapolate_to_zero, find_array_mu_with, half_array_profile_with, period_to_speed_with,
    search_kink_mu, sweep_mu_hat_with, ShootingOptions,
};
use sgwave::unperturbed::{
    bounded_pair_profile, bounded_pair_turning_point, kink_profile, PendulumOrbit,
};
use sgwave::{Params, WaveProfile};

use crate::emit::{json_num, pretty, render_profile, Cell, Format, Table};
use crate::error::{CliError, CliResult};
use crate::manifest::{self, Manifest};
use crate::*;

/// What a command produced, before anything is written.
struct Outcome {
    /// `(path, contents)`; the first is the primary artifact.
    artifacts: Vec<(PathBuf, String)>,
    derived: Map<String, Value>,
    reflected: bool,
    evidence_grade: Option<bool>,
    /// Solver trouble found after the artifacts were assembled; they are
    /// still written.
    failure: Option<CliError>,
}

impl Outcome {
    fn new(path: PathBuf, contents: String, reflected: bool) -> Self {
        Self {
            artifacts: vec![(path, contents)],
            derived: Map::new(),
            reflected,
            evidence_grade: None,
            failure: None,
        }
    }

    fn derive(&mut self, key: &str, value: impl Into<DerivedValue>) {
        self.derived.insert(key.to_string(), value.into().0);
    }
}

struct DerivedValue(Value);

impl From<f64> for DerivedValue {
    fn from(x: f64) -> Self {
        Self(json_num(x))
    }
}

impl From<Option<f64>> for DerivedValue {
    fn from(x: Option<f64>) -> Self {
        Self(x.map_or(Value::Null, json_num))
    }
}

impl From<usize> for DerivedValue {
    fn from(x: usize) -> Self {
        Self(Value::from(x))
    }
}

impl From<bool> for DerivedValue {
    fn from(x: bool) -> Self {
        Self(Value::from(x))
    }
}

pub fn dispatch(command: &Command) -> CliResult<String> {
    if let Command::Replay(r) = command {
        return replay(r);
    }
    let started = Instant::now();
    let (inputs, outcome) = match command {
        Command::Equilibria(a) => with_inputs(a, &a.output, "equilibria", equilibria_cmd)?,
        Command::KinkMu(a) => with_inputs(a, &a.output, "kink-mu", kink_mu)?,
        Command::KinkProfile(a) => with_inputs(a, &a.output, "kink-profile", kink_profile_cmd)?,
        Command::Array(a) => with_inputs(a, &a.output, "array", array)?,
        Command::HalfArray(a) => with_inputs(a, &a.output, "half-array", half_array)?,
        Command::Pair(a) => with_inputs(a, &a.output, "pair", pair)?,
        Command::Periods(a) => with_inputs(a, &a.output, "periods", periods)?,
        Command::PdeRun(a) => with_inputs(a, &a.output, "pde-run", pde_run)?,
        Command::Sweep(a) => with_inputs(a, &a.output, "sweep", sweep)?,
        Command::Replay(_) => unreachable!("handled above"),
    };
    for (path, text) in &outcome.artifacts {
        emit::write(path, text)?;
    }
    let primary = outcome.artifacts[0].0.clone();
    let status = outcome
        .failure
        .as_ref()
        .map_or("ok".to_string(), |e| e.to_string());
    let m = Manifest {
        schema: manifest::SCHEMA,
        tool: "sgwave".to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        solver_version: sgwave::VERSION.to_string(),
        command: command.name().to_string(),
        inputs,
        artifacts: outcome.artifacts.iter().map(|a| a.0.clone()).collect(),
        reflected: outcome.reflected,
        derived: outcome.derived.clone(),
        evidence_grade: outcome.evidence_grade,
        status: status.clone(),
        elapsed_seconds: started.elapsed().as_secs_f64(),
    };
    let mpath = manifest::manifest_path(&primary);
    emit::write(&mpath, &pretty(&m))?;
    if let Some(e) = outcome.failure {
        return Err(e);
    }
    let mut summary = outcome.derived;
    summary.insert("command".to_string(), Value::from(command.name()));
    summary.insert(
        "artifact".to_string(),
        Value::from(primary.to_string_lossy().into_owned()),
    );
    summary.insert(
        "manifest".to_string(),
        Value::from(mpath.to_string_lossy().into_owned()),
    );
    Ok(Value::Object(summary).to_string())
}

fn with_inputs<A: Serialize>(
    args: &A,
    output: &Output,
    name: &str,
    f: impl FnOnce(&A, PathBuf, Format) -> CliResult<Outcome>,
) -> CliResult<(Map<String, Value>, Outcome)> {
    let format = Format::from(output.format);
    let path = output.out.clone().unwrap_or_else(|| {
        let dir = std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from);
        dir.join(format!("{name}.{}", format.ext()))
    });
    let inputs = manifest::inputs_of(args, &path);
    Ok((inputs, f(args, path, format)?))
}

fn replay(r: &ReplayArgs) -> CliResult<String> {
    let m = manifest::read(&r.manifest)?;
    if m.command == "replay" {
        return Err(CliError::Usage(
            "a manifest cannot replay a replay".to_string(),
        ));
    }
    let args = manifest::replay_args(&m, r.out.as_deref())?;
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Parse {
        path: r.manifest.clone(),
        message: format!("recorded inputs no longer parse: {e}"),
    })?;
    dispatch(&cli.command)
}

/// `|gamma|` and whether the input was reflected.
fn fold_tilt(gamma: f64) -> CliResult<(f64, bool)> {
    if !(gamma.abs() < 1.0) {
        return Err(CliError::Usage(format!(
            "gamma = {gamma} is outside the admissible range [0, 1); negative tilts are taken by reflection"
        )));
    }
    Ok((gamma.abs(), gamma < 0.0))
}

fn params(t: &Tilt) -> CliResult<(Params, bool)> {
    let (gamma, reflected) = fold_tilt(t.gamma)?;
    Ok((Params::new(gamma, t.alpha)?, reflected))
}

fn options(s: &Shooting) -> ShootingOptions {
    ShootingOptions {
        delta: s.delta,
        horizon: s.horizon,
        profile_spacing: s.spacing,
        ..ShootingOptions::default()
    }
}

fn oriented(profile: WaveProfile, reflected: bool) -> WaveProfile {
    if reflected {
        profile.reflected()
    } else {
        profile
    }
}

fn equilibria_cmd(a: &EquilibriaArgs, path: PathBuf, format: Format) -> CliResult<Outcome> {
    let (gamma, reflected) = fold_tilt(a.gamma)?;
    // U(-g; -gamma) = U(g; gamma): wells map to wells, barrier k to -k - 1
    let e = if reflected {
        let well = equilibria(gamma, -a.k)?;
        let top = equilibria(gamma, -a.k - 1)?;
        Equilibrium {
            k: a.k,
            g_min: -well.g_min,
            g_max: -top.g_max,
            u_min: well.u_min,
            u_max: top.u_max,
        }
    } else {
        equilibria(gamma, a.k)?
    };
    let table = Table {
        meta: vec![("gamma".to_string(), Cell::Num(a.gamma))],
        columns: vec!["g_min", "g_max", "u_min", "u_max", "k"],
        rows: vec![vec![
            Cell::Num(e.g_min),
            Cell::Num(e.g_max),
            Cell::Num(e.u_min),
            Cell::Num(e.u_max),
            Cell::Int(e.k),
        ]],
    };
    let mut out = Outcome::new(path, table.render(format), reflected);
    out.derive("g_min", e.g_min);
    out.derive("g_max", e.g_max);
    Ok(out)
}

fn kink_mu(a: &KinkMuArgs, path: PathBuf, format: Format) -> CliResult<Outcome> {
    let (p, reflected) = params(&a.tilt)?;
    let k = search_kink_mu(p, a.shooting.tol, &options(&a.shooting))?;
    // at alpha = 0 the drag maps to the speed of light and no speed is quoted
    let v_hat = velocity_from_mu(p.alpha, k.mu, Direction::Right)
        .map(|m| m.velocity())
        .ok();
    let v_inf = asymptotic_velocity(p).ok();
    let cell = |v: Option<f64>| v.map_or(Cell::Empty, Cell::Num);
    let table = Table {
        meta: vec![],
        columns: vec!["gamma", "alpha", "mu_hat", "v_hat", "v_inf", "iterations"],
        rows: vec![vec![
            Cell::Num(a.tilt.gamma),
            Cell::Num(p.alpha),
            Cell::Num(k.mu),
            cell(v_hat),
            cell(v_inf),
            Cell::Int(k.shots as i64),
        ]],
    };
    let text = match format {
        Format::Csv => table.render(format),
        Format::Json => pretty(&json!({
            "gamma": a.tilt.gamma,
            "alpha": p.alpha,
            "mu_hat": k.mu,
            "v_hat": v_hat,
            "v_inf": v_inf,
            "iterations": k.shots,
        })),
    };
    let mut out = Outcome::new(path, text, reflected);
    out.derive("mu_hat", k.mu);
    out.derive("v_hat", v_hat);
    out.derive("v_inf", v_inf);
    out.derive("iterations", k.shots);
    Ok(out)
}

fn profile_outcome(
    profile: &WaveProfile,
    periods: u32,
    path: PathBuf,
    format: Format,
    reflected: bool,
) -> Outcome {
    let mut out = Outcome::new(path, render_profile(profile, periods, format), reflected);
    out.derive("mu", profile.mu);
    out.derive("v", profile.velocity);
    out.derive("n", profile.points.len());
    out
}

fn kink_profile_cmd(a: &KinkProfileArgs, path: PathBuf, format: Format) -> CliResult<Outcome> {
    let (p, reflected) = params(&a.tilt)?;
    let profile = if p.gamma == 0.0 {
        kink_profile(p.alpha, a.half_width, a.shooting.spacing)?
    } else {
        search_kink_mu(p, a.shooting.tol, &options(&a.shooting))?.profile
    };
    let profile = oriented(profile, reflected);
    Ok(profile_outcome(&profile, 1, path, format, reflected))
}

fn array(a: &ArrayArgs, path: PathBuf, format: Format) -> CliResult<Outcome> {
    let (p, reflected) = params(&a.tilt)?;
    let opts = options(&a.shooting);
    let gp0 = match (a.gp0, a.period) {
        (Some(g), _) => g,
        (None, Some(xi)) => period_to_speed_with(p, xi, a.shooting.tol, &opts)?,
        (None, None) => return Err(CliError::Usage("array needs --gp0 or --period".to_string())),
    };
    if a.periods == 0 {
        return Err(CliError::Usage("--periods must be at least 1".to_string()));
    }
    let wave = find_array_mu_with(p, gp0, a.shooting.tol, &opts)?;
    let profile = oriented(wave.profile, reflected);
    let mut out = profile_outcome(&profile, a.periods, path, format, reflected);
    out.derive("gp0", gp0);
    out.derive("period", wave.period);
    out.derive("circumference", emit::circumference(&profile, a.periods));
    Ok(out)
}

fn half_array(a: &HalfArrayArgs, path: PathBuf, format: Format) -> CliResult<Outcome> {
    let (p, reflected) = params(&a.tilt)?;
    let h = half_array_profile_with(p, a.gp0, a.horizon, &ShootingOptions::default())?;
    let profile = oriented(h.profile, reflected);
    let last = h.distance.last().map_or(f64::NAN, |d| d.1);
    let arrival = h.distance.iter().find(|d| d.1 < a.threshold).map(|d| d.0);
    let mut out = profile_outcome(&profile, 1, path, format, reflected);
    out.derive("array_period", h.array.period);
    out.derive("final_distance", last);
    out.derive("below_threshold", last < a.threshold);
    out.derive("first_below_threshold_xi", arrival);
    out.evidence_grade = Some(true);
    Ok(out)
}

fn pair(a: &PairArgs, path: PathBuf, format: Format) -> CliResult<Outcome> {
    let (p, reflected) = params(&a.tilt)?;
    let profile = oriented(bounded_pair_profile(p, a.half_width, a.samples)?, reflected);
    let turn = bounded_pair_turning_point(p.gamma)?;
    let turn = if reflected {
        -turn - sgwave::model::TWO_PI
    } else {
        turn
    };
    let mut out = profile_outcome(&profile, 1, path, format, reflected);
    out.derive("turning_point", turn);
    Ok(out)
}

fn periods(a: &PeriodsArgs, path: PathBuf, format: Format) -> CliResult<Outcome> {
    let orbits = a
        .energy
        .iter()
        .map(|&e| PendulumOrbit::new(e))
        .collect::<Result<Vec<_>, _>>()?;
    let regime = |o: &PendulumOrbit| match o.regime {
        sgwave::unperturbed::OrbitRegime::Libration => "libration",
        sgwave::unperturbed::OrbitRegime::Separatrix => "separatrix",
        sgwave::unperturbed::OrbitRegime::Rotation => "rotation",
    };
    let table = Table {
        meta: vec![],
        columns: vec!["e", "regime", "period"],
        rows: orbits
            .iter()
            .map(|o| {
                vec![
                    Cell::Num(o.e),
                    Cell::Text(regime(o).to_string()),
                    o.period.map_or(Cell::Empty, Cell::Num),
                ]
            })
            .collect(),
    };
    let mut out = Outcome::new(path, table.render(format), false);
    out.derive("orbits", orbits.len());
    Ok(out)
}

fn side_path(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn pde_run(a: &PdeRunArgs, path: PathBuf, format: Format) -> CliResult<Outcome> {
    let (p, reflected) = params(&a.tilt)?;
    let profile = match a.wave {
        WaveArg::Kink if p.gamma == 0.0 => kink_profile(p.alpha, a.half_width, 0.01)?,
        WaveArg::Kink => search_kink_mu(p, a.tol, &ShootingOptions::default())?.profile,
        WaveArg::Array => find_array_mu_with(p, a.gp0, a.tol, &ShootingOptions::default())?.profile,
    };
    let domain = a.domain.unwrap_or(match a.wave {
        WaveArg::Kink => DomainArg::Line,
        WaveArg::Array => DomainArg::Circle,
    });
    let spec = InitSpec {
        domain: match domain {
            DomainArg::Line => DomainSpec::Line {
                left: a.left,
                right: a.right,
            },
            DomainArg::Circle => DomainSpec::Circle { periods: a.periods },
        },
        dx: a.dx,
        center: a.center,
        velocity: a.velocity,
        truncate: false,
    };
    let field = init_from_profile(&profile, &spec)?;
    let report = run(
        field,
        p,
        &RunSpec {
            dt: a.dt,
            t_end: a.t_end,
            record_every: a.record_every,
        },
    )?;
    let speed = profile.velocity.or(a.velocity).unwrap_or(0.0);
    let fit = measure_velocity(&report.front_history(), a.discard).ok();
    let drift = report
        .records
        .last()
        .and_then(|r| r.front)
        .map(|x| shape_drift(&report.field, &profile, speed, x));

    let sign = if reflected { -1.0 } else { 1.0 };
    let h = energy_report(&report.field, p.gamma).h;
    let f = &report.field;
    let table = Table {
        meta: vec![
            ("t".to_string(), Cell::Num(f.t)),
            ("gamma".to_string(), Cell::Num(a.tilt.gamma)),
            ("alpha".to_string(), Cell::Num(p.alpha)),
            ("dx".to_string(), Cell::Num(f.dx)),
            ("points".to_string(), Cell::Int(f.len() as i64)),
        ],
        columns: vec!["x", "phi", "phi_t", "h"],
        rows: (0..f.len())
            .map(|i| {
                vec![
                    Cell::Num(f.x(i)),
                    Cell::Num(sign * f.phi[i]),
                    Cell::Num(sign * f.phi_t[i]),
                    Cell::Num(h[i]),
                ]
            })
            .collect(),
    };
    let diagnostics = diagnostics_json(&report, a, sign, speed, fit, drift);
    let mut out = Outcome::new(path.clone(), table.render(format), reflected);
    out.artifacts
        .push((side_path(&path, ".diagnostics.json"), pretty(&diagnostics)));
    out.derive("mu", profile.mu);
    out.derive("v", speed);
    out.derive("measured_velocity", fit.map(|f| f.velocity));
    out.derive("shape_drift", drift);
    out.derive("max_balance_ratio", report.max_balance_ratio);
    out.derive("steps", report.steps);
    out.failure = report
        .failure
        .as_ref()
        .map(|e| CliError::Failed(format!("field run stopped early: {e}")));
    Ok(out)
}

fn diagnostics_json(
    report: &RunReport,
    a: &PdeRunArgs,
    sign: f64,
    speed: f64,
    fit: Option<sgwave::pde::VelocityFit>,
    drift: Option<f64>,
) -> Value {
    let records: Vec<Value> = report
        .records
        .iter()
        .map(|r| {
            let mut v = serde_json::to_value(r).expect("serializable");
            v["winding"] = json_num(sign * r.winding);
            v
        })
        .collect();
    json!({
        "gamma": a.tilt.gamma,
        "alpha": report.params.alpha,
        "dt": report.dt,
        "dx": report.dx,
        "steps": report.steps,
        "completed": report.completed(),
        "failure": report.failure.as_ref().map(|e| e.to_string()),
        "max_balance_ratio": report.max_balance_ratio,
        "winding_constant": report.winding_is_constant(),
        "expected_velocity": speed,
        "velocity_fit": fit,
        "shape_drift": drift,
        "records": records,
    })
}

fn sweep(a: &SweepArgs, path: PathBuf, format: Format) -> CliResult<Outcome> {
    let folded = a
        .gammas
        .iter()
        .map(|&g| fold_tilt(g).map(|f| f.0))
        .collect::<CliResult<Vec<f64>>>()?;
    let rows = sweep_mu_hat_with(&folded, a.tol, &ShootingOptions::default());
    let mut points = Vec::new();
    let mut failed = 0;
    let mut cells = Vec::new();
    for (&input, g) in a.gammas.iter().zip(&folded) {
        let row = rows
            .iter()
            .find(|r| r.gamma == *g)
            .expect("one row per tilt");
        match &row.outcome {
            Ok(k) => {
                if !points.iter().any(|p: &(f64, f64)| p.0 == *g) {
                    points.push((*g, k.ratio));
                }
                let v = if a.alpha > 0.0 {
                    velocity_from_mu(a.alpha, k.mu_hat, Direction::Right)
                        .map_or(Cell::Empty, |m| Cell::Num(m.velocity()))
                } else {
                    Cell::Empty
                };
                cells.push(vec![
                    Cell::Num(input),
                    Cell::Num(k.mu_hat),
                    Cell::Num(k.ratio),
                    v,
                    Cell::Empty,
                ]);
            }
            Err(e) => {
                failed += 1;
                cells.push(vec![
                    Cell::Num(input),
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Text(e.to_string()),
                ]);
            }
        }
    }
    let limit = extrapolate_to_zero(&points).ok();
    let table = Table {
        meta: vec![
            ("alpha".to_string(), Cell::Num(a.alpha)),
            ("tol".to_string(), Cell::Num(a.tol)),
            (
                "extrapolated_ratio".to_string(),
                limit.map_or(Cell::Empty, Cell::Num),
            ),
        ],
        columns: vec!["gamma", "mu_hat", "ratio", "v_hat", "error"],
        rows: cells,
    };
    let reflected = a.gammas.iter().any(|&g| g < 0.0);
    let mut out = Outcome::new(path, table.render(format), reflected);
    out.derive("extrapolated_ratio", limit);
    out.derive("failed_rows", failed);
    if failed > 0 {
        out.failure = Some(CliError::Failed(format!(
            "{failed} of {} sweep rows failed",
            a.gammas.len()
        )));
    }
    Ok(out)
}

//! `key=value` run configuration: parsing, validation and rendering.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;
use sfg_core::dynamics::{IntegrationMode, PhaseSpacePoint, TrajectoryConfig};
use sfg_core::spectral::FrequencyGrid;
use sfg_core::SystemParams;

use crate::presets::{preset, FigureId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Steady,
    StabilityMap,
    Spectrum,
    Simulate,
    Reproduce(FigureId),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Steady => "steady",
            Command::StabilityMap => "stability-map",
            Command::Spectrum => "spectrum",
            Command::Simulate => "simulate",
            Command::Reproduce(_) => "reproduce",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    TravellingWave,
    Cavity,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::TravellingWave => "tw",
            Mode::Cavity => "cavity",
        }
    }

    pub fn integration(&self) -> IntegrationMode {
        match self {
            Mode::TravellingWave => IntegrationMode::TravellingWave,
            Mode::Cavity => IntegrationMode::Cavity,
        }
    }
}

/// Everything one invocation needs. Every field has a default; see [`KEYS`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub kappa: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub eps1: Complex64,
    pub eps2: Complex64,
    pub mode: Mode,
    /// Initial coherent amplitudes of modes 1, 2, 3.
    pub alpha0: [Complex64; 3],
    /// `None` picks the mode's default step.
    pub dt: Option<f64>,
    pub t_max: f64,
    pub stride: usize,
    pub n_traj: usize,
    pub seed: u64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_points: usize,
    pub ratios: Vec<f64>,
    pub eps_min: f64,
    pub eps_max: f64,
    pub output: String,
    pub plots: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::Steady,
            kappa: 0.01,
            gamma1: 1.0,
            gamma2: 1.0,
            gamma3: 10.0,
            eps1: Complex64::new(400.0, 0.0),
            eps2: Complex64::new(400.0, 0.0),
            mode: Mode::Cavity,
            alpha0: [Complex64::default(); 3],
            dt: None,
            t_max: 10.0,
            stride: 100,
            n_traj: 1000,
            seed: 1,
            omega_min: -20.0,
            omega_max: 20.0,
            omega_points: 801,
            ratios: vec![0.5, 1.0, 2.0, 5.0, 10.0, 15.0, 20.0],
            eps_min: 1.0,
            eps_max: 3000.0,
            output: "out".into(),
            plots: false,
        }
    }
}

/// Recognised keys with their meaning, in render order.
pub const KEYS: &[(&str, &str)] = &[
    ("command", "steady | stability-map | spectrum | simulate (default steady)"),
    ("reproduce", "fig1 .. fig8: load a figure preset; later lines override it"),
    ("kappa", "nonlinearity, > 0 (default 0.01)"),
    ("gamma1", "loss rate of mode 1, >= 0 (default 1)"),
    ("gamma2", "loss rate of mode 2, >= 0 (default 1)"),
    ("gamma3", "loss rate of mode 3, >= 0 (default 10)"),
    ("eps1", "pump of mode 1, real part (default 400)"),
    ("eps1_im", "pump of mode 1, imaginary part (default 0)"),
    ("eps2", "pump of mode 2, real part (default 400)"),
    ("eps2_im", "pump of mode 2, imaginary part (default 0)"),
    ("mode", "tw | cavity: ensemble dynamics; tw ignores loss rates and pumps (default cavity)"),
    ("alpha1_0", "initial amplitude of mode 1, real part (default 0)"),
    ("alpha1_0_im", "initial amplitude of mode 1, imaginary part (default 0)"),
    ("alpha2_0", "initial amplitude of mode 2, real part (default 0)"),
    ("alpha2_0_im", "initial amplitude of mode 2, imaginary part (default 0)"),
    ("alpha3_0", "initial amplitude of mode 3, real part (default 0)"),
    ("alpha3_0_im", "initial amplitude of mode 3, imaginary part (default 0)"),
    ("dt", "time step, > 0, or auto (default auto: 5e-4 in zeta, 1e-3/max gamma in the cavity)"),
    ("t_max", "final time, zeta for tw (default 10)"),
    ("stride", "steps between samples, >= 1 (default 100)"),
    ("n_traj", "trajectories, >= 2 (default 1000)"),
    ("seed", "noise seed (default 1)"),
    ("omega_min", "lowest frequency in units of gamma1 (default -20)"),
    ("omega_max", "highest frequency in units of gamma1 (default 20)"),
    ("omega_points", "frequency points, >= 2 (default 801)"),
    ("ratios", "comma-separated increasing gamma3/gamma values (default 0.5,1,2,5,10,15,20)"),
    ("eps_min", "lower pump of the stability scan (default 1)"),
    ("eps_max", "upper pump of the stability scan (default 3000)"),
    ("output", "output directory (default out)"),
    ("plots", "true | false: also write gnuplot scripts (default false)"),
];

/// Where a value came from, for diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Flag(String),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Flag(name) => write!(f, "flag --{name}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{}{message}", origin.as_ref().map(|o| format!("{o}: ")).unwrap_or_default())]
pub struct ConfigError {
    pub origin: Option<Origin>,
    pub message: String,
}

impl ConfigError {
    fn at(origin: &Origin, message: impl Into<String>) -> Self {
        Self {
            origin: Some(origin.clone()),
            message: message.into(),
        }
    }
}

fn number(value: &str) -> Result<f64, String> {
    let v: f64 = value.parse().map_err(|_| format!("cannot parse '{value}' as a number"))?;
    if !v.is_finite() {
        return Err(format!("'{value}' is not finite"));
    }
    Ok(v)
}

fn positive(key: &str, value: &str) -> Result<f64, String> {
    let v = number(value)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{key} must satisfy {key} > 0, got {v}"))
    }
}

fn non_negative(key: &str, value: &str) -> Result<f64, String> {
    let v = number(value)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("{key} must satisfy {key} >= 0, got {v}"))
    }
}

fn count(key: &str, value: &str, min: usize) -> Result<usize, String> {
    let v: usize = value
        .parse()
        .map_err(|_| format!("cannot parse '{value}' as a non-negative integer"))?;
    if v < min {
        return Err(format!("{key} must be >= {min}, got {v}"));
    }
    Ok(v)
}

/// Incremental builder that remembers where each key was set.
#[derive(Debug, Default)]
pub struct ConfigBuilder {
    config: RunConfig,
    origins: HashMap<&'static str, Origin>,
}

impl ConfigBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets one key; `origin` is used in diagnostics.
    pub fn set(&mut self, key: &str, value: &str, origin: Origin) -> Result<(), ConfigError> {
        let Some(&(name, _)) = KEYS.iter().find(|(k, _)| *k == key) else {
            return Err(ConfigError::at(&origin, format!("unknown key '{key}'")));
        };
        self.apply(name, value.trim())
            .map_err(|m| ConfigError::at(&origin, m))?;
        self.origins.insert(name, origin);
        Ok(())
    }

    fn apply(&mut self, key: &'static str, value: &str) -> Result<(), String> {
        let c = &mut self.config;
        match key {
            "command" => {
                c.command = match value {
                    "steady" => Command::Steady,
                    "stability-map" => Command::StabilityMap,
                    "spectrum" => Command::Spectrum,
                    "simulate" => Command::Simulate,
                    "reproduce" => return Err("use reproduce=figN to select a figure".into()),
                    _ => return Err(format!("unknown command '{value}'")),
                }
            }
            "reproduce" => {
                let id: FigureId = value.parse()?;
                let output = std::mem::take(&mut c.output);
                *c = preset(id).config;
                c.output = output;
            }
            "kappa" => c.kappa = positive(key, value)?,
            "gamma1" => c.gamma1 = non_negative(key, value)?,
            "gamma2" => c.gamma2 = non_negative(key, value)?,
            "gamma3" => c.gamma3 = non_negative(key, value)?,
            "eps1" => c.eps1.re = number(value)?,
            "eps1_im" => c.eps1.im = number(value)?,
            "eps2" => c.eps2.re = number(value)?,
            "eps2_im" => c.eps2.im = number(value)?,
            "mode" => {
                c.mode = match value {
                    "tw" => Mode::TravellingWave,
                    "cavity" => Mode::Cavity,
                    _ => return Err(format!("mode must be tw or cavity, got '{value}'")),
                }
            }
            "alpha1_0" => c.alpha0[0].re = number(value)?,
            "alpha1_0_im" => c.alpha0[0].im = number(value)?,
            "alpha2_0" => c.alpha0[1].re = number(value)?,
            "alpha2_0_im" => c.alpha0[1].im = number(value)?,
            "alpha3_0" => c.alpha0[2].re = number(value)?,
            "alpha3_0_im" => c.alpha0[2].im = number(value)?,
            "dt" => c.dt = if value == "auto" { None } else { Some(positive(key, value)?) },
            "t_max" => c.t_max = positive(key, value)?,
            "stride" => c.stride = count(key, value, 1)?,
            "n_traj" => c.n_traj = count(key, value, 2)?,
            "seed" => c.seed = value.parse().map_err(|_| format!("cannot parse '{value}' as a seed"))?,
            "omega_min" => c.omega_min = number(value)?,
            "omega_max" => c.omega_max = number(value)?,
            "omega_points" => c.omega_points = count(key, value, 2)?,
            "ratios" => {
                let r = value
                    .split(',')
                    .map(|v| positive(key, v.trim()))
                    .collect::<Result<Vec<f64>, String>>()?;
                if !r.windows(2).all(|w| w[0] < w[1]) {
                    return Err("ratios must be strictly increasing".into());
                }
                c.ratios = r;
            }
            "eps_min" => c.eps_min = non_negative(key, value)?,
            "eps_max" => c.eps_max = positive(key, value)?,
            "output" => {
                if value.is_empty() {
                    return Err("output must not be empty".into());
                }
                c.output = value.to_string();
            }
            "plots" => {
                c.plots = value
                    .parse()
                    .map_err(|_| format!("plots must be true or false, got '{value}'"))?
            }
            _ => unreachable!("key table and setter disagree on '{key}'"),
        }
        Ok(())
    }

    fn origin(&self, key: &str) -> Option<Origin> {
        self.origins.get(key).cloned()
    }

    /// Cross-field checks; errors cite the line of the key that closed the conflict.
    pub fn finish(self) -> Result<RunConfig, ConfigError> {
        let c = &self.config;
        let fail = |key: &str, message: String| ConfigError {
            origin: self.origin(key),
            message,
        };
        if c.omega_min >= c.omega_max {
            return Err(fail("omega_max", "omega_min must be below omega_max".into()));
        }
        if c.eps_min >= c.eps_max {
            return Err(fail("eps_max", "eps_min must be below eps_max".into()));
        }
        if let Some(dt) = c.dt {
            if c.t_max < dt {
                return Err(fail("t_max", format!("t_max must be at least dt = {dt}")));
            }
        }
        let simulates = matches!(c.command, Command::Simulate | Command::Reproduce(FigureId(1..=3 | 8)));
        if c.mode == Mode::TravellingWave && simulates && c.alpha0[0].norm() == 0.0 {
            return Err(fail("mode", "mode=tw needs a nonzero alpha1_0 to scale time".into()));
        }
        Ok(self.config)
    }
}

/// Parses `key=value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut b = ConfigBuilder::new();
    parse_into(&mut b, text)?;
    b.finish()
}

/// Applies the lines of `text` to an existing builder.
pub fn parse_into(b: &mut ConfigBuilder, text: &str) -> Result<(), ConfigError> {
    for (i, raw) in text.lines().enumerate() {
        let origin = Origin::Line(i + 1);
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::at(&origin, format!("expected key=value, got '{line}'")));
        };
        b.set(key.trim(), value, origin)?;
    }
    Ok(())
}

/// Renders a config so that `parse_config(&render(c)) == c`.
pub fn render(c: &RunConfig) -> String {
    let mut out = String::new();
    let mut put = |k: &str, v: String| {
        out.push_str(k);
        out.push('=');
        out.push_str(&v);
        out.push('\n');
    };
    match c.command {
        Command::Reproduce(id) => put("reproduce", id.to_string()),
        other => put("command", other.name().to_string()),
    }
    put("kappa", c.kappa.to_string());
    put("gamma1", c.gamma1.to_string());
    put("gamma2", c.gamma2.to_string());
    put("gamma3", c.gamma3.to_string());
    put("eps1", c.eps1.re.to_string());
    put("eps1_im", c.eps1.im.to_string());
    put("eps2", c.eps2.re.to_string());
    put("eps2_im", c.eps2.im.to_string());
    put("mode", c.mode.name().to_string());
    for (j, a) in c.alpha0.iter().enumerate() {
        put(&format!("alpha{}_0", j + 1), a.re.to_string());
        put(&format!("alpha{}_0_im", j + 1), a.im.to_string());
    }
    put("dt", c.dt.map_or("auto".into(), |d| d.to_string()));
    put("t_max", c.t_max.to_string());
    put("stride", c.stride.to_string());
    put("n_traj", c.n_traj.to_string());
    put("seed", c.seed.to_string());
    put("omega_min", c.omega_min.to_string());
    put("omega_max", c.omega_max.to_string());
    put("omega_points", c.omega_points.to_string());
    put("ratios", c.ratios.iter().map(f64::to_string).collect::<Vec<_>>().join(","));
    put("eps_min", c.eps_min.to_string());
    put("eps_max", c.eps_max.to_string());
    put("output", c.output.clone());
    put("plots", c.plots.to_string());
    out
}

impl RunConfig {
    pub fn params(&self) -> sfg_core::Result<SystemParams> {
        SystemParams::new(self.kappa, self.gamma1, self.gamma2, self.gamma3, self.eps1, self.eps2)
    }

    /// Parameters driving the ensemble: the lossless interaction for `mode=tw`.
    pub fn dynamics_params(&self) -> sfg_core::Result<SystemParams> {
        match self.mode {
            Mode::TravellingWave => SystemParams::travelling_wave(self.kappa),
            Mode::Cavity => self.params(),
        }
    }

    pub fn initial_state(&self) -> PhaseSpacePoint {
        let [a1, a2, a3] = self.alpha0;
        PhaseSpacePoint::coherent(a1, a2, a3)
    }

    pub fn trajectory(&self, params: &SystemParams) -> TrajectoryConfig {
        let mode = self.mode.integration();
        TrajectoryConfig {
            dt: self.dt.unwrap_or_else(|| TrajectoryConfig::default_dt(mode, params)),
            t_max: self.t_max,
            sample_stride: self.stride,
            n_traj: self.n_traj,
            seed: self.seed,
            mode,
        }
    }

    pub fn grid(&self) -> FrequencyGrid {
        FrequencyGrid {
            min: self.omega_min,
            max: self.omega_max,
            points: self.omega_points,
        }
    }
}

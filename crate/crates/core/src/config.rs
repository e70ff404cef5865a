//! Run configuration: a flat `key = value` file with command-line
//! overrides. Blank lines and `#` comments are ignored.

use crate::benchmarks::{Case, IntegratorConfig, RunSpec, Termination};
use crate::integrators::{Scheme, Tolerances};
use std::fmt;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("bad value `{value}` for `{key}`")]
    Value { key: String, value: String },
    #[error("unknown benchmark `{0}` (expected one of embedding, triple-junction, single-grain, stefan)")]
    Benchmark(String),
    #[error("unknown integrator `{0}` (expected feuler, sspN2, ssp104, sts1, sts2)")]
    Integrator(String),
    #[error("`{key}` must be positive, got {value}")]
    NotPositive { key: &'static str, value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub benchmark: String,
    pub integrator: String,
    /// Fixed step as a multiple of `Δt_e`; adaptive stepping when absent.
    pub dt_factor: Option<f64>,
    pub tol_phi_abs: f64,
    pub tol_phi_rel: f64,
    pub tol_c_abs: f64,
    pub tol_c_rel: f64,
    /// Grid spacing; the interface width follows `W = 3 Δx^0.4` unless
    /// `width` is also given.
    pub dx: Option<f64>,
    pub width: Option<f64>,
    /// End time of fixed-horizon cases, or the time cap of equilibrium runs.
    pub end_time: Option<f64>,
    pub output_interval: Option<f64>,
    pub budget: Option<u64>,
    pub stages: Option<usize>,
    pub out: PathBuf,
    pub dump_fields: bool,
    /// Recorded with the output; the benchmarks are deterministic.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let tol = Tolerances::default();
        RunConfig {
            benchmark: "single-grain".into(),
            integrator: "sts2".into(),
            dt_factor: None,
            tol_phi_abs: tol.phi_abs,
            tol_phi_rel: tol.phi_rel,
            tol_c_abs: tol.c_abs,
            tol_c_rel: tol.c_rel,
            dx: None,
            width: None,
            end_time: None,
            output_interval: None,
            budget: None,
            stages: None,
            out: PathBuf::from("out"),
            dump_fields: false,
            seed: 0,
        }
    }
}

pub const KEYS: [&str; 16] = [
    "benchmark",
    "integrator",
    "dt_factor",
    "tol_phi_abs",
    "tol_phi_rel",
    "tol_c_abs",
    "tol_c_rel",
    "dx",
    "width",
    "end_time",
    "output_interval",
    "budget",
    "stages",
    "out",
    "dump_fields",
    "seed",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::Value { key: key.into(), value: value.into() })
}

fn optional<T: std::str::FromStr>(key: &str, value: &str) -> Result<Option<T>, ConfigError> {
    if value.is_empty() || value == "none" {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "benchmark" => self.benchmark = value.into(),
            "integrator" => self.integrator = value.into(),
            "dt_factor" => self.dt_factor = optional(key, value)?,
            "tol_phi_abs" => self.tol_phi_abs = parse(key, value)?,
            "tol_phi_rel" => self.tol_phi_rel = parse(key, value)?,
            "tol_c_abs" => self.tol_c_abs = parse(key, value)?,
            "tol_c_rel" => self.tol_c_rel = parse(key, value)?,
            "dx" => self.dx = optional(key, value)?,
            "width" => self.width = optional(key, value)?,
            "end_time" => self.end_time = optional(key, value)?,
            "output_interval" => self.output_interval = optional(key, value)?,
            "budget" => self.budget = optional(key, value)?,
            "stages" => self.stages = optional(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "dump_fields" => self.dump_fields = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.into())),
        }
        Ok(())
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances { phi_abs: self.tol_phi_abs, phi_rel: self.tol_phi_rel, c_abs: self.tol_c_abs, c_rel: self.tol_c_rel }
    }

    pub fn scheme(&self) -> Result<Scheme, ConfigError> {
        Scheme::parse(&self.integrator).ok_or_else(|| ConfigError::Integrator(self.integrator.clone()))
    }

    pub fn integrator_config(&self) -> Result<IntegratorConfig, ConfigError> {
        let scheme = self.scheme()?;
        Ok(match self.dt_factor {
            Some(f) => IntegratorConfig::fixed(scheme, f),
            None => IntegratorConfig::adaptive(scheme, self.tolerances()),
        })
    }

    pub fn case(&self) -> Result<Case, ConfigError> {
        let mut case = Case::from_name(&self.benchmark).ok_or_else(|| ConfigError::Benchmark(self.benchmark.clone()))?;
        if let Some(dx) = self.dx {
            case = case.refined(dx);
        }
        if let Some(w) = self.width {
            case.set_width(w);
        }
        Ok(case)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("dt_factor", self.dt_factor),
            ("tol_phi_abs", Some(self.tol_phi_abs)),
            ("tol_phi_rel", Some(self.tol_phi_rel)),
            ("tol_c_abs", Some(self.tol_c_abs)),
            ("tol_c_rel", Some(self.tol_c_rel)),
            ("dx", self.dx),
            ("width", self.width),
            ("end_time", self.end_time),
            ("output_interval", self.output_interval),
        ];
        for (key, v) in positive {
            if let Some(value) = v {
                if !(value > 0.0 && value.is_finite()) {
                    return Err(ConfigError::NotPositive { key, value });
                }
            }
        }
        self.scheme()?;
        self.case()?;
        Ok(())
    }

    pub fn run_spec(&self) -> Result<RunSpec, ConfigError> {
        self.validate()?;
        let mut spec = RunSpec::new(self.case()?, self.integrator_config()?);
        spec.termination = match spec.termination {
            Termination::Fixed { end, interval } => {
                let end2 = self.end_time.unwrap_or(end);
                let interval = self.output_interval.unwrap_or(if self.end_time.is_some() { end2 / 10.0 } else { interval });
                Termination::Fixed { end: end2, interval }
            }
            Termination::Equilibrium { interval, threshold, window, max_time } => Termination::Equilibrium {
                interval: self.output_interval.unwrap_or(interval),
                threshold,
                window,
                max_time: self.end_time.unwrap_or(max_time),
            },
        };
        spec.budget = self.budget;
        spec.stages = self.stages;
        Ok(spec)
    }
}

fn show<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "none".to_string(), |x| x.to_string())
}

/// Writes the configuration back in the file format.
impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "benchmark = {}", self.benchmark)?;
        writeln!(f, "integrator = {}", self.integrator)?;
        writeln!(f, "dt_factor = {}", show(&self.dt_factor))?;
        writeln!(f, "tol_phi_abs = {:e}", self.tol_phi_abs)?;
        writeln!(f, "tol_phi_rel = {:e}", self.tol_phi_rel)?;
        writeln!(f, "tol_c_abs = {:e}", self.tol_c_abs)?;
        writeln!(f, "tol_c_rel = {:e}", self.tol_c_rel)?;
        writeln!(f, "dx = {}", show(&self.dx))?;
        writeln!(f, "width = {}", show(&self.width))?;
        writeln!(f, "end_time = {}", show(&self.end_time))?;
        writeln!(f, "output_interval = {}", show(&self.output_interval))?;
        writeln!(f, "budget = {}", show(&self.budget))?;
        writeln!(f, "stages = {}", show(&self.stages))?;
        writeln!(f, "out = {}", self.out.display())?;
        writeln!(f, "dump_fields = {}", self.dump_fields)?;
        writeln!(f, "seed = {}", self.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::Control;

    #[test]
    fn defaults_are_the_standard_tolerances() {
        let c = RunConfig::default();
        assert_eq!([c.tol_phi_abs, c.tol_phi_rel, c.tol_c_abs, c.tol_c_rel], [1e-4; 4]);
    }

    #[test]
    fn file_with_comments_and_overrides() {
        let text = "# grain run\nbenchmark = single-grain\nintegrator = feuler  # explicit\ndt_factor = 0.9\n\nend_time = 100\n";
        let mut c = RunConfig::parse(text).unwrap();
        c.set("dx", "0.5").unwrap();
        let spec = c.run_spec().unwrap();
        assert_eq!(spec.integrator.control, Control::Fixed { factor: 0.9 });
        assert_eq!(spec.termination, Termination::Fixed { end: 100.0, interval: 10.0 });
        assert!((spec.case.width() - 3.0 * 0.5f64.powf(0.4)).abs() < 1e-15);
    }

    #[test]
    fn display_round_trips() {
        let mut c = RunConfig::default();
        c.set("dt_factor", "100").unwrap();
        c.set("budget", "5000").unwrap();
        c.set("dump_fields", "true").unwrap();
        assert_eq!(RunConfig::parse(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn errors() {
        assert_eq!(RunConfig::parse("nonsense"), Err(ConfigError::Syntax { line: 1 }));
        assert_eq!(RunConfig::parse("colour = red"), Err(ConfigError::UnknownKey("colour".into())));
        let c = RunConfig::parse("integrator = rk4").unwrap();
        assert_eq!(c.run_spec(), Err(ConfigError::Integrator("rk4".into())));
        let c = RunConfig::parse("dt_factor = -1").unwrap();
        assert!(matches!(c.validate(), Err(ConfigError::NotPositive { key: "dt_factor", .. })));
    }
}

//! Runs a benchmark case with one integrator configuration and reduces the
//! trajectory to the case's error metric.

use super::embedding::{laplace_error, EmbeddingSpec};
use super::equilibrium::EquilibriumDetector;
use super::grain::{self, area_rate, SingleGrainSpec};
use super::stefan::{stefan_fit, StefanSpec};
use super::triple::{dihedral_angle, AngleMethod, TripleJunctionSpec};
use super::{refinement_width, BenchError};
use crate::driver::{Driver, DriverError, StepMode, StepRecord};
use crate::grid::Boundary;
use crate::integrators::{Scheme, Tolerances};
use crate::model::{free_energy, KksSystem, ModelParams, PhysicalParams, State, SystemError};
use crate::stencil::integrate;
use crate::stepcontrol::gershgorin_bounds;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Driver(#[from] DriverError),
    #[error("invalid run: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Case {
    Embedding(EmbeddingSpec),
    TripleJunction(TripleJunctionSpec),
    SingleGrain(SingleGrainSpec),
    Stefan(StefanSpec),
}

impl Case {
    pub const NAMES: [&'static str; 4] = ["embedding", "triple-junction", "single-grain", "stefan"];

    pub fn name(&self) -> &'static str {
        match self {
            Case::Embedding(_) => "embedding",
            Case::TripleJunction(_) => "triple-junction",
            Case::SingleGrain(_) => "single-grain",
            Case::Stefan(_) => "stefan",
        }
    }

    /// Default geometry of a case by name.
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "embedding" => Case::Embedding(EmbeddingSpec::default()),
            "triple-junction" | "triple" => Case::TripleJunction(TripleJunctionSpec::default()),
            "single-grain" | "grain" => Case::SingleGrain(SingleGrainSpec::default()),
            "stefan" => Case::Stefan(StefanSpec::default()),
            _ => return None,
        })
    }

    pub fn dx(&self) -> f64 {
        match self {
            Case::Embedding(s) => s.dx,
            Case::TripleJunction(s) => s.dx,
            Case::SingleGrain(s) => s.dx,
            Case::Stefan(s) => s.dx,
        }
    }

    pub fn width(&self) -> f64 {
        match self {
            Case::Embedding(s) => s.width,
            Case::TripleJunction(s) => s.width,
            Case::SingleGrain(s) => s.width,
            Case::Stefan(s) => s.width,
        }
    }

    pub fn set_dx(&mut self, dx: f64) {
        match self {
            Case::Embedding(s) => s.dx = dx,
            Case::TripleJunction(s) => s.dx = dx,
            Case::SingleGrain(s) => s.dx = dx,
            Case::Stefan(s) => s.dx = dx,
        }
    }

    pub fn set_width(&mut self, w: f64) {
        match self {
            Case::Embedding(s) => s.width = w,
            Case::TripleJunction(s) => s.width = w,
            Case::SingleGrain(s) => s.width = w,
            Case::Stefan(s) => s.width = w,
        }
    }

    /// Refinement level with `W = 3 Δx^0.4`.
    pub fn refined(&self, dx: f64) -> Self {
        let mut c = self.clone();
        c.set_dx(dx);
        c.set_width(refinement_width(dx));
        c
    }

    /// Initial state with physical and model parameters.
    pub fn setup(&self) -> Result<(State, PhysicalParams, ModelParams), BenchError> {
        Ok(match self {
            Case::Embedding(s) => {
                let p = s.params()?;
                (s.build()?, ModelParams::derive(&p), p)
            }
            Case::TripleJunction(s) => {
                let p = s.params()?;
                (s.build()?, ModelParams::derive(&p), p)
            }
            Case::SingleGrain(s) => {
                let p = s.params()?;
                (s.build()?, ModelParams::derive(&p), p)
            }
            Case::Stefan(s) => {
                let p = s.params()?;
                (s.build()?, s.model(&p), p)
            }
        })
        .map(|(s, m, p)| (s, p, m))
    }

    /// Scalar tracked at every output frame.
    pub fn observe(&self, state: &State, p: &PhysicalParams) -> Result<f64, BenchError> {
        Ok(match self {
            Case::Embedding(_) => laplace_error(state, p, 1.0).dpsi,
            Case::TripleJunction(_) => dihedral_angle(state, AngleMethod::Centerline)?.theta,
            Case::SingleGrain(_) => grain::area(state),
            Case::Stefan(s) => s.displacement(state)?,
        })
    }

    /// Default sampling and stopping rule.
    pub fn default_termination(&self) -> Termination {
        match self {
            Case::Embedding(s) => Termination::Equilibrium {
                interval: s.diffusion_time() / 16.0,
                threshold: 1e-14,
                window: 2.0 * s.diffusion_time(),
                max_time: 120.0 * s.diffusion_time(),
            },
            Case::TripleJunction(s) => Termination::Equilibrium {
                interval: s.diffusion_time() / 16.0,
                threshold: 1e-11,
                window: 2.0 * s.diffusion_time(),
                max_time: 100.0 * s.diffusion_time(),
            },
            Case::SingleGrain(s) => Termination::Fixed { end: s.end_time, interval: s.end_time / 23.0 },
            Case::Stefan(_) => Termination::Fixed { end: 43e3, interval: 1000.0 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Control {
    /// Constant step as a multiple of the forward-Euler limit.
    Fixed { factor: f64 },
    Adaptive { tol: Tolerances },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub control: Control,
}

impl IntegratorConfig {
    pub fn fixed(scheme: Scheme, factor: f64) -> Self {
        IntegratorConfig { scheme, control: Control::Fixed { factor } }
    }

    pub fn adaptive(scheme: Scheme, tol: Tolerances) -> Self {
        IntegratorConfig { scheme, control: Control::Adaptive { tol } }
    }

    /// Adaptive with `a_φ` changed from the default tolerances.
    pub fn adaptive_phi(scheme: Scheme, phi_abs: f64) -> Self {
        Self::adaptive(scheme, Tolerances { phi_abs, ..Tolerances::default() })
    }

    pub fn label(&self) -> String {
        match self.control {
            Control::Fixed { factor } => format!("{} dt={}dt_e", self.scheme.name(), factor),
            Control::Adaptive { tol } => format!("{} a_phi={:e}", self.scheme.name(), tol.phi_abs),
        }
    }

    /// The integrator configurations of the standard comparison.
    pub fn presets() -> Vec<Self> {
        let mut out = Vec::new();
        for f in [0.5, 1.0] {
            out.push(Self::fixed(Scheme::FEuler, f));
        }
        for f in [0.5, 1.0, 2.0, 4.0] {
            out.push(Self::fixed(Scheme::Ssp2 { stages: 5 }, f));
        }
        out.push(Self::adaptive(
            Scheme::Ssp104,
            Tolerances { phi_abs: 1e-14, phi_rel: 1e-14, c_abs: 1e-14, c_rel: 1e-14 },
        ));
        for order in [1, 2] {
            for f in [1.0, 10.0, 100.0, 200.0] {
                out.push(Self::fixed(Scheme::Sts { order }, f));
            }
            for a in [1e-2, 1e-3, 1e-4] {
                out.push(Self::adaptive_phi(Scheme::Sts { order }, a));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    /// Run to `end`, sampling every `interval`.
    Fixed { end: f64, interval: f64 },
    /// Sample every `interval` until the trailing slope of the observable
    /// drops below `threshold`, or `max_time` is reached.
    Equilibrium { interval: f64, threshold: f64, window: f64, max_time: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub case: Case,
    pub integrator: IntegratorConfig,
    pub termination: Termination,
    /// Initial step of adaptive runs; capped by `Δt_e`.
    pub dt0: Option<f64>,
    /// Abort after this many RHS evaluations.
    pub budget: Option<u64>,
    /// Pinned super-timestepping stage count.
    pub stages: Option<usize>,
}

impl RunSpec {
    pub fn new(case: Case, integrator: IntegratorConfig) -> Self {
        let termination = case.default_termination();
        RunSpec { case, integrator, termination, dt0: None, budget: None, stages: None }
    }
}

/// Observables at one output time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub time: f64,
    pub observable: f64,
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct BenchmarkReport {
    pub case: String,
    pub integrator: String,
    pub frames: Vec<Frame>,
    pub reference: f64,
    pub measured: f64,
    pub error: f64,
    pub rhs_evals: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub dt_e: f64,
    /// Whether the equilibrium criterion fired, for equilibrium runs.
    pub converged: Option<bool>,
    /// Largest relative change of the total concentration, for periodic
    /// cases with chemistry.
    pub mass_drift: Option<f64>,
    pub final_state: State,
}

impl BenchmarkReport {
    pub fn relative_error(&self) -> f64 {
        self.error / self.reference.abs()
    }

    pub fn rejected_fraction(&self) -> f64 {
        let n = self.accepted + self.rejected;
        if n == 0 {
            0.0
        } else {
            self.rejected as f64 / n as f64
        }
    }
}

/// Receives every attempted step and every output frame.
pub trait Observer {
    fn step(&mut self, _rec: &StepRecord) {}
    fn frame(&mut self, _frame: &Frame, _state: &State) {}
}

impl Observer for () {}

pub fn run(spec: &RunSpec, obs: &mut dyn Observer) -> Result<BenchmarkReport, RunError> {
    let (state0, p, m) = spec.case.setup()?;
    let est = gershgorin_bounds(&state0, &m, &p);
    if !(est.dt_e.is_finite() && est.dt_e > 0.0) {
        return Err(RunError::Invalid(format!("no finite stable step (Δt_e = {})", est.dt_e)));
    }
    let (sys, u) = KksSystem::new(&state0, &p, &m)?;
    let mode = match spec.integrator.control {
        Control::Fixed { factor } => {
            if !(factor > 0.0) {
                return Err(RunError::Invalid(format!("step factor {factor} must be positive")));
            }
            StepMode::Fixed { dt: factor * est.dt_e }
        }
        Control::Adaptive { tol } => StepMode::Adaptive { tol, dt0: spec.dt0.map_or(est.dt_e, |d| d.min(est.dt_e)) },
    };
    let mut driver = Driver::new(sys, u, 0.0, spec.integrator.scheme, mode, est.dt_e);
    if let Some(b) = spec.budget {
        driver = driver.with_budget(b);
    }
    if let Some(s) = spec.stages {
        driver = driver.with_stages(s);
    }

    let periodic = state0.grid().boundaries().iter().all(|&b| b == Boundary::Periodic);
    let mass0 = state0.concentration.as_ref().filter(|_| periodic).map(integrate);
    let mut mass_drift: Option<f64> = mass0.map(|_| 0.0);

    let mut frames = Vec::new();
    let mut record = |state: &State, frames: &mut Vec<Frame>, obs: &mut dyn Observer| -> Result<Frame, RunError> {
        let frame = Frame { time: state.time, observable: spec.case.observe(state, &p)?, energy: free_energy(state, &m, &p) };
        if let (Some(m0), Some(c)) = (mass0, state.concentration.as_ref()) {
            let drift = ((integrate(c) - m0) / m0).abs();
            mass_drift = mass_drift.map(|d| d.max(drift));
        }
        frames.push(frame);
        obs.frame(&frame, state);
        Ok(frame)
    };
    record(&state0, &mut frames, obs)?;

    let mut converged = None;
    match spec.termination {
        Termination::Fixed { end, interval } => {
            let n = (end / interval).round().max(1.0) as u64;
            for k in 1..=n {
                let t = if k == n { end } else { k as f64 * interval };
                driver.advance_to(t, &mut |r| obs.step(r))?;
                let state = driver.sys.state(&driver.u, driver.time);
                record(&state, &mut frames, obs)?;
            }
        }
        Termination::Equilibrium { interval, threshold, window, max_time } => {
            let mut detector = EquilibriumDetector::new(threshold, window);
            detector.push(0.0, frames[0].observable);
            let mut k = 1u64;
            converged = Some(false);
            while driver.time < max_time {
                let t = (k as f64 * interval).min(max_time);
                driver.advance_to(t, &mut |r| obs.step(r))?;
                let state = driver.sys.state(&driver.u, driver.time);
                let f = record(&state, &mut frames, obs)?;
                detector.push(f.time, f.observable);
                if detector.converged() {
                    converged = Some(true);
                    break;
                }
                k += 1;
            }
        }
    }

    let final_state = driver.sys.state(&driver.u, driver.time);
    let (reference, measured) = match &spec.case {
        Case::Embedding(_) => {
            let l = laplace_error(&final_state, &p, 1.0);
            (l.pressure, l.dpsi)
        }
        Case::TripleJunction(s) => (s.theta_eq()?, dihedral_angle(&final_state, AngleMethod::Contour)?.theta),
        Case::SingleGrain(s) => {
            let t: Vec<f64> = frames.iter().map(|f| f.time).collect();
            let a: Vec<f64> = frames.iter().map(|f| f.observable).collect();
            let rate = if t.len() >= 3 { area_rate(&t, &a) } else { f64::NAN };
            (s.exact_rate(), rate)
        }
        Case::Stefan(s) => {
            let t: Vec<f64> = frames.iter().map(|f| f.time).collect();
            let x: Vec<f64> = frames.iter().map(|f| f.observable).collect();
            (s.growth_constant()?, stefan_fit(&t, &x))
        }
    };
    Ok(BenchmarkReport {
        case: spec.case.name().to_string(),
        integrator: spec.integrator.label(),
        frames,
        reference,
        measured,
        error: (measured - reference).abs(),
        rhs_evals: driver.rhs_count(),
        accepted: driver.accepted(),
        rejected: driver.rejected(),
        dt_e: est.dt_e,
        converged,
        mass_drift,
        final_state,
    })
}

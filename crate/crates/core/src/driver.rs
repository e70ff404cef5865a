//! Time loop: fixed or adaptive stepping to exact output times.

use crate::integrators::{
    copy_ranges, richardson_error, sommeijer_error, ssp104_step, ssp2_step, step_once, sts_coeffs, sts_step,
    EmbeddedWeights, OdeSystem, StsError, RhsCounter, Scheme, StepError, StsCoeffs, Tolerances, Workspace,
};
use crate::stepcontrol::{sts_stage_count, PidController, SAFETY};
use std::ops::Range;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DriverError {
    #[error("step {step}: {source}")]
    Step { step: u64, source: StepError },
    #[error("step {step}: non-finite value in the state at t = {time}")]
    NonFinite { step: u64, time: f64 },
    #[error("step {step}: step size collapsed to {dt:e} at t = {time}")]
    StepTooSmall { step: u64, dt: f64, time: f64 },
    #[error(transparent)]
    Stages(#[from] StsError),
    #[error("right-hand-side budget of {0} evaluations exhausted")]
    Budget(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepMode {
    /// Constant step `dt`.
    Fixed { dt: f64 },
    /// PID-controlled step starting at `dt0`.
    Adaptive { tol: Tolerances, dt0: f64 },
}

/// One attempted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    /// Time after the step (before it, for rejected steps).
    pub time: f64,
    pub dt: f64,
    pub accepted: bool,
    pub error: f64,
    pub rhs_evals: usize,
    pub stages: usize,
}

#[derive(Debug, Clone)]
pub struct Driver<S: OdeSystem> {
    pub sys: S,
    pub u: Vec<f64>,
    pub time: f64,
    scheme: Scheme,
    mode: StepMode,
    dt_e: f64,
    embedded: Option<EmbeddedWeights>,
    controller: PidController,
    proposal: f64,
    counter: RhsCounter,
    budget: Option<u64>,
    accepted: u64,
    rejected: u64,
    ws: Workspace,
    save: Vec<f64>,
    full: Vec<f64>,
    err: Vec<f64>,
    trial: Vec<f64>,
    ranges: Vec<Range<usize>>,
    sts_cache: Option<StsCoeffs>,
    pinned_stages: Option<usize>,
}

impl<S: OdeSystem> Driver<S> {
    pub fn new(sys: S, u: Vec<f64>, time: f64, scheme: Scheme, mode: StepMode, dt_e: f64) -> Self {
        let proposal = match &mode {
            StepMode::Fixed { dt } => *dt,
            StepMode::Adaptive { dt0, .. } => *dt0,
        };
        Driver {
            sys,
            u,
            time,
            scheme,
            mode,
            dt_e,
            embedded: None,
            controller: PidController::new(scheme.order()),
            proposal,
            counter: RhsCounter::default(),
            budget: None,
            accepted: 0,
            rejected: 0,
            ws: Workspace::new(),
            save: Vec::new(),
            full: Vec::new(),
            err: Vec::new(),
            trial: Vec::new(),
            ranges: Vec::new(),
            sts_cache: None,
            pinned_stages: None,
        }
    }

    /// Uses an embedded solution instead of step halving for the SSP schemes.
    pub fn with_embedded(mut self, weights: EmbeddedWeights) -> Self {
        self.embedded = Some(weights);
        self
    }

    /// Aborts once more than `budget` RHS evaluations have been spent.
    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = Some(budget);
        self
    }

    /// Uses `s` super-timestepping stages for every step instead of the
    /// smallest stable count. Stability is then the caller's concern.
    pub fn with_stages(mut self, s: usize) -> Self {
        self.pinned_stages = Some(s);
        self
    }

    pub fn rhs_count(&self) -> u64 {
        self.counter.get()
    }

    pub fn accepted(&self) -> u64 {
        self.accepted
    }

    pub fn rejected(&self) -> u64 {
        self.rejected
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn dt_e(&self) -> f64 {
        self.dt_e
    }

    pub fn controller(&self) -> &PidController {
        &self.controller
    }

    fn step_index(&self) -> u64 {
        self.accepted + self.rejected
    }

    fn coeffs(&mut self, dt: f64) -> Result<StsCoeffs, DriverError> {
        let Scheme::Sts { order } = self.scheme else { unreachable!() };
        let s = self.pinned_stages.unwrap_or_else(|| sts_stage_count(dt, self.dt_e, order));
        match &self.sts_cache {
            Some(c) if c.s == s => Ok(c.clone()),
            _ => {
                let c = sts_coeffs(s, order)?;
                self.sts_cache = Some(c.clone());
                Ok(c)
            }
        }
    }

    fn check_finite(&self) -> Result<(), DriverError> {
        for r in self.sys.active() {
            if self.u[r.clone()].iter().any(|v| !v.is_finite()) {
                return Err(DriverError::NonFinite { step: self.step_index(), time: self.time });
            }
        }
        Ok(())
    }

    fn fail(&self, e: StepError) -> DriverError {
        DriverError::Step { step: self.step_index(), source: e }
    }

    fn fixed_step(&mut self, dt: f64) -> Result<StepRecord, DriverError> {
        let coeffs = match self.scheme {
            Scheme::Sts { .. } => Some(self.coeffs(dt)?),
            _ => None,
        };
        let evals = step_once(&mut self.sys, &mut self.u, dt, self.scheme, coeffs.as_ref(), &mut self.ws)
            .map_err(|e| self.fail(e))?;
        self.counter.add(evals);
        self.check_finite()?;
        self.sys.after_accept(&mut self.u);
        self.accepted += 1;
        Ok(StepRecord { time: 0.0, dt, accepted: true, error: 0.0, rhs_evals: evals, stages: evals })
    }

    fn resize_scratch(&mut self) {
        let n = self.sys.len();
        for v in [&mut self.save, &mut self.full, &mut self.err, &mut self.trial] {
            if v.len() != n {
                v.clear();
                v.resize(n, 0.0);
            }
        }
        self.ranges.clear();
        self.ranges.extend_from_slice(self.sys.active());
    }

    /// Attempts one adaptive step; on rejection the state is restored.
    fn adaptive_attempt(&mut self, dt: f64, tol: &Tolerances) -> Result<StepRecord, DriverError> {
        self.resize_scratch();
        let ranges = std::mem::take(&mut self.ranges);
        copy_ranges(&mut self.save, &self.u, &ranges);
        let (evals, stages, error) = match self.scheme {
            Scheme::Sts { .. } => {
                let c = self.coeffs(dt)?;
                let s = sts_step(&mut self.sys, &mut self.u, dt, &c, &mut self.ws).map_err(|e| self.fail(e))?;
                let ws = &mut self.ws;
                self.sys.rhs(&self.u, &mut ws.a);
                sommeijer_error(&ws.b, &self.u, &ws.c, &ws.a, dt, &mut self.err, &ranges);
                for r in &ranges {
                    for i in r.clone() {
                        self.trial[i] = ws.b[i] + 0.5 * dt * (ws.c[i] + ws.a[i]);
                    }
                }
                self.sys.filter_error(&self.trial, &mut self.err);
                (s + 1, s, self.sys.error_norm(&self.err, &self.save, &self.u, tol))
            }
            scheme => {
                if let Some(w) = self.embedded.clone() {
                    let n = match scheme {
                        Scheme::Ssp2 { stages } => ssp2_step(&mut self.sys, &mut self.u, dt, stages, Some(&w), &mut self.ws),
                        Scheme::Ssp104 => ssp104_step(&mut self.sys, &mut self.u, dt, Some(&w), &mut self.ws),
                        _ => step_once(&mut self.sys, &mut self.u, dt, scheme, None, &mut self.ws),
                    }
                    .map_err(|e| self.fail(e))?;
                    copy_ranges(&mut self.err, &self.ws.e, &ranges);
                    for r in &ranges {
                        for i in r.clone() {
                            self.trial[i] = self.u[i];
                        }
                    }
                    self.sys.filter_error(&self.trial, &mut self.err);
                    (n, n, self.sys.error_norm(&self.err, &self.save, &self.u, tol))
                } else {
                    let mut n = step_once(&mut self.sys, &mut self.u, dt, scheme, None, &mut self.ws)
                        .map_err(|e| self.fail(e))?;
                    copy_ranges(&mut self.full, &self.u, &ranges);
                    copy_ranges(&mut self.u, &self.save, &ranges);
                    for _ in 0..2 {
                        n += step_once(&mut self.sys, &mut self.u, 0.5 * dt, scheme, None, &mut self.ws)
                            .map_err(|e| self.fail(e))?;
                    }
                    richardson_error(&self.full, &self.u, scheme.order(), &mut self.err, &ranges);
                    for r in &ranges {
                        for i in r.clone() {
                            self.trial[i] = self.u[i] + self.err[i];
                        }
                    }
                    self.sys.filter_error(&self.trial, &mut self.err);
                    (n, n / 3, self.sys.error_norm(&self.err, &self.save, &self.u, tol))
                }
            }
        };
        self.counter.add(evals);
        let error = if error.is_finite() { error } else { f64::INFINITY };
        let accepted = error < 1.0;
        if accepted {
            self.check_finite()?;
        } else {
            copy_ranges(&mut self.u, &self.save, &ranges);
        }
        self.ranges = ranges;
        Ok(StepRecord { time: 0.0, dt, accepted, error, rhs_evals: evals, stages })
    }

    fn cap(&self, dt: f64) -> f64 {
        match self.scheme.stability_multiple() {
            Some(m) => dt.min(SAFETY * m * self.dt_e),
            None => dt,
        }
    }

    fn over_budget(&self) -> Result<(), DriverError> {
        match self.budget {
            Some(b) if self.counter.get() > b => Err(DriverError::Budget(b)),
            _ => Ok(()),
        }
    }

    /// Advances exactly to `t_out`, reporting every attempted step.
    pub fn advance_to(&mut self, t_out: f64, log: &mut dyn FnMut(&StepRecord)) -> Result<(), DriverError> {
        match self.mode.clone() {
            StepMode::Fixed { dt } => {
                let start = self.time;
                let mut k: u64 = 0;
                while self.time < t_out {
                    let remaining = t_out - self.time;
                    let last = remaining <= dt * (1.0 + 1e-8);
                    let h = if last { remaining } else { dt };
                    let mut rec = self.fixed_step(h)?;
                    k += 1;
                    self.time = if last { t_out } else { start + k as f64 * dt };
                    rec.time = self.time;
                    log(&rec);
                    self.over_budget()?;
                }
            }
            StepMode::Adaptive { tol, .. } => {
                while self.time < t_out {
                    let proposal = self.cap(self.proposal);
                    let remaining = t_out - self.time;
                    let truncated = remaining <= proposal * (1.0 + 1e-8);
                    let h = if truncated { remaining } else { proposal };
                    let mut rec = self.adaptive_attempt(h, &tol)?;
                    if rec.accepted {
                        self.accepted += 1;
                        self.time = if truncated { t_out } else { self.time + h };
                        self.sys.after_accept(&mut self.u);
                        if !truncated {
                            self.proposal = self.controller.update(rec.error, h, true);
                        }
                    } else {
                        self.rejected += 1;
                        self.proposal = self.controller.update(rec.error, h, false);
                        if self.proposal < 1e-12 * self.dt_e {
                            return Err(DriverError::StepTooSmall { step: self.step_index(), dt: self.proposal, time: self.time });
                        }
                    }
                    rec.time = self.time;
                    log(&rec);
                    self.over_budget()?;
                }
            }
        }
        Ok(())
    }
}

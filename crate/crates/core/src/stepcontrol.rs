//! Stable-step estimates, super-time-step stage counts and the PID step
//! size controller.

use crate::integrators::{feuler_step, OdeSystem, Workspace};
use crate::model::{ModelParams, PhysicalParams, State};

/// Safety factor applied to stability limits.
pub const SAFETY: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigEstimate {
    pub lambda_phi: f64,
    pub lambda_c: f64,
    /// Product of the bounds of the two off-diagonal blocks coupling phase
    /// and concentration.
    pub coupling: f64,
    pub dt_e: f64,
}

impl EigEstimate {
    pub fn new(lambda_phi: f64, lambda_c: f64) -> Self {
        Self::coupled(lambda_phi, lambda_c, 0.0)
    }

    pub fn coupled(lambda_phi: f64, lambda_c: f64, coupling: f64) -> Self {
        let mut e = EigEstimate { lambda_phi, lambda_c, coupling, dt_e: 0.0 };
        e.dt_e = 2.0 / e.lambda_max();
        e
    }

    /// Perron root of the 2×2 matrix of block bounds; never below either
    /// diagonal bound.
    pub fn lambda_max(&self) -> f64 {
        let mean = 0.5 * (self.lambda_phi + self.lambda_c);
        let half = 0.5 * (self.lambda_phi - self.lambda_c);
        mean + (half * half + self.coupling).sqrt()
    }

    /// Same estimate with every eigenvalue bound scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self::coupled(self.lambda_phi * factor, self.lambda_c * factor, self.coupling * factor * factor)
    }
}

/// Row-sum bounds on the spectra of the phase and concentration operators
/// and of their coupling blocks. A state without any interface cell has no
/// phase dynamics.
pub fn gershgorin_bounds(state: &State, m: &ModelParams, p: &PhysicalParams) -> EigEstimate {
    let grid = state.grid();
    let d = grid.ndim() as f64;
    let lap = 4.0 * d / (grid.spacing() * grid.spacing());
    let phases = &state.phases;
    let cells = grid.cell_count();
    let interfaces = (0..cells).any(|c| phases.count(c) >= 2);
    let chemistry = state.concentration.is_some();
    let kmax = p.gibbs_k.iter().cloned().fold(0.0, f64::max);
    let dmax = p.diffusivity.iter().cloned().fold(0.0, f64::max);
    let lo = p.c_eq.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = p.c_eq.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let dc = hi - lo;
    let lmax = m.l.max_pair();
    let lambda_phi = if interfaces {
        let chi = if chemistry { kmax * dc * dc } else { 0.0 };
        2.0 * lmax * (m.a.max_pair() * lap + m.b.max_pair() + chi)
    } else {
        0.0
    };
    let lambda_c = if chemistry {
        let mut slope = 0.0f64;
        for c in 0..cells {
            let comp: f64 = phases.entries(c).map(|(id, v)| v / p.gibbs_k[id as usize]).sum();
            for (id, _) in phases.entries(c) {
                slope = slope.max((1.0 / p.gibbs_k[id as usize]) / comp);
            }
        }
        lap * dmax * slope
    } else {
        0.0
    };
    let coupling = if chemistry && interfaces { (lap * dmax * dc) * (2.0 * lmax * kmax * dc) } else { 0.0 };
    EigEstimate::coupled(lambda_phi, lambda_c, coupling)
}

/// Stable step of an `s`-stage super-time-step as a multiple of `Δt_e`.
pub fn sts_stability_multiple(s: usize, order: u8) -> f64 {
    crate::integrators::sts::stability_multiple(s, order)
}

/// Smallest odd stage count whose safe stability limit reaches `dt_target`.
pub fn sts_stage_count(dt_target: f64, dt_e: f64, order: u8) -> usize {
    let mut s = if order == 1 { 1 } else { 3 };
    while SAFETY * dt_e * sts_stability_multiple(s, order) < dt_target {
        s += 2;
    }
    s
}

/// Step multiplier `1 + 5 atan((F - 1) / 5)`.
pub fn limiter(f: f64) -> f64 {
    1.0 + 5.0 * ((f - 1.0) / 5.0).atan()
}

/// Söderlind-type PID controller with an adaptive bias.
#[derive(Debug, Clone, PartialEq)]
pub struct PidController {
    pub k: [f64; 5],
    /// Local order of the error estimate.
    pub order: u32,
    pub bias: f64,
    /// Scaled errors of the two previous accepted steps, newest first.
    e_hist: [Option<f64>; 2],
    /// Sizes of the two previous accepted steps, newest first.
    dt_hist: [Option<f64>; 2],
}

pub const BIAS_MIN: f64 = 0.1;
pub const BIAS_MAX: f64 = 0.98;
const E_FLOOR: f64 = 1e-12;

impl PidController {
    pub fn new(order: u32) -> Self {
        PidController {
            k: [1.25, 0.5, -0.6, 0.25, 0.0],
            order,
            bias: 0.9,
            e_hist: [None; 2],
            dt_hist: [None; 2],
        }
    }

    pub fn history(&self) -> ([Option<f64>; 2], [Option<f64>; 2]) {
        (self.e_hist, self.dt_hist)
    }

    /// Processes the error `e` of a step of size `dt` and returns the next
    /// step size. A step is accepted when `e < 1`.
    pub fn update(&mut self, e: f64, dt: f64, accepted: bool) -> f64 {
        let p1 = (self.order + 1) as f64;
        let en = (e / self.bias).max(E_FLOOR);
        let mut f = en.powf(-self.k[0] / p1);
        if let Some(e1) = self.e_hist[0] {
            f *= e1.powf(-self.k[1] / p1);
        }
        if let Some(e2) = self.e_hist[1] {
            f *= e2.powf(-self.k[2] / p1);
        }
        if let Some(d1) = self.dt_hist[0] {
            f *= (dt / d1).powf(self.k[3]);
            if let Some(d2) = self.dt_hist[1] {
                f *= (d1 / d2).powf(self.k[4]);
            }
        }
        if accepted {
            self.bias = (self.bias / self.bias.sqrt()).min(BIAS_MAX);
            self.e_hist = [Some(en), self.e_hist[0]];
            self.dt_hist = [Some(dt), self.dt_hist[0]];
        } else {
            self.bias = (self.bias * self.bias).max(BIAS_MIN);
            if f >= 1.0 {
                f = en.powf(-self.k[0] / p1);
            }
        }
        dt * limiter(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    /// Forward Euler at `0.9 Δt_e` stayed bounded.
    pub stable: bool,
    /// Forward Euler at `4 Δt_e` grew the increment norm by more than 1e3.
    pub tight: bool,
    pub growth_stable: f64,
    pub growth_tight: f64,
}

/// Growth of the per-step increment norm over forward-Euler steps.
pub fn increment_growth<S: OdeSystem + Clone>(sys: &S, u: &[f64], dt: f64, steps: usize, limit: f64) -> f64 {
    let mut sys = sys.clone();
    let mut u = u.to_vec();
    let mut prev = u.clone();
    let mut ws = Workspace::new();
    let mut first = None;
    let mut worst = 0.0f64;
    for _ in 0..steps {
        prev.copy_from_slice(&u);
        if feuler_step(&mut sys, &mut u, dt, &mut ws).is_err() {
            return f64::INFINITY;
        }
        let inc = u.iter().zip(&prev).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if !inc.is_finite() {
            return f64::INFINITY;
        }
        sys.after_accept(&mut u);
        let base = *first.get_or_insert(inc.max(f64::MIN_POSITIVE));
        worst = worst.max(inc / base);
        if worst > limit {
            break;
        }
    }
    worst
}

/// Checks a stable-step estimate by experiment: forward Euler must stay
/// bounded at `0.9 Δt_e` for 500 steps, and must blow up at `4 Δt_e`.
pub fn validate_bounds<S: OdeSystem + Clone>(sys: &S, u: &[f64], est: &EigEstimate) -> BoundCheck {
    const STEPS: usize = 500;
    const GROWTH: f64 = 1e3;
    let growth_stable = increment_growth(sys, u, SAFETY * est.dt_e, STEPS, GROWTH);
    let growth_tight = increment_growth(sys, u, 4.0 * est.dt_e, STEPS, GROWTH);
    BoundCheck { stable: growth_stable <= GROWTH, tight: growth_tight > GROWTH, growth_stable, growth_tight }
}

#![allow(dead_code)]

//! Property suites shared by the `properties` and `acceptance` targets.
//! Every suite runs a fixed number of cases from a fixed seed.

use phasefield_lab::field::{ScalarField, SparsePhaseField};
use phasefield_lab::grid::{Boundary, Grid, Side};
use phasefield_lab::integrators::{feuler_step, ssp104_step, ssp2_step, sts_coeffs, sts_step, OdeSystem, Workspace};
use phasefield_lab::model::{
    grand_potential, kks_partition, phase_rhs, profile, simplex_project, KksSystem, ModelParams, PhysicalParams, State,
};
use phasefield_lab::stepcontrol::{gershgorin_bounds, sts_stability_multiple, sts_stage_count, PidController, BIAS_MAX, BIAS_MIN, SAFETY};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestError, TestRng, TestRunner};
use std::fmt::Debug;
use std::ops::Range;

pub type Suite = (&'static str, fn() -> Result<(), String>);

pub const SUITES: [Suite; 9] = [
    ("simplex projection idempotence and membership (10^4 vectors)", simplex_projection),
    ("KKS partition vs bisection oracle (100 cases, 1e-10)", kks_partition_oracle),
    ("sparse phase rates vs dense oracle (1e-12)", sparse_vs_dense),
    ("per-cell sum of phase rates is zero (1e-12)", rates_sum_to_zero),
    ("periodic mass conservation (1e-10 relative)", mass_conservation),
    ("stability polynomials of all steppers (1e-12)", stability_polynomials),
    ("PID bias bounds", pid_bias_bounds),
    ("rejection decreases the step", rejection_shrinks),
    ("stage count minimality", stage_count_minimal),
];

fn check<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S::Value: Debug,
{
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    let rng = TestRng::deterministic_rng(config.rng_algorithm);
    let mut runner = TestRunner::new_with_rng(config, rng);
    runner.run(&strategy, test).map_err(|e| match e {
        TestError::Abort(r) => format!("aborted: {r}"),
        TestError::Fail(r, _) => r.to_string(),
    })
}

pub fn simplex_projection() -> Result<(), String> {
    check(10_000, prop::collection::vec(-0.5f64..1.5, 1..8), |v| {
        let mut once = v.clone();
        if v.iter().any(|&x| x > 0.0) {
            simplex_project(&mut once).unwrap();
            prop_assert!(once.iter().all(|&x| (0.0..=1.0).contains(&x)));
            prop_assert!((once.iter().sum::<f64>() - 1.0).abs() < 1e-13);
            let mut twice = once.clone();
            let violated = simplex_project(&mut twice).unwrap();
            prop_assert!(!violated);
            prop_assert_eq!(once, twice);
        } else {
            prop_assert!(simplex_project(&mut once).is_err());
        }
        Ok(())
    })
}

/// Independent root finder for `Σ h_α c_α(μ) = c`.
fn bisect_mu(c: f64, h: &[f64], p: &PhysicalParams) -> f64 {
    let mix = |mu: f64| (0..h.len()).map(|a| h[a] * (p.c_eq[a] + mu / p.gibbs_k[a])).sum::<f64>() - c;
    let (mut lo, mut hi) = (-1e6, 1e6);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mix(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn kks_partition_oracle() -> Result<(), String> {
    let strategy = (
        prop::collection::vec(0.01f64..1.0, 2..5),
        0.0f64..1.0,
        prop::collection::vec(1.0f64..1000.0, 4),
        prop::collection::vec(0.0f64..1.0, 4),
    );
    check(100, strategy, |(raw, c, ks, c0s)| {
        let n = raw.len();
        let s: f64 = raw.iter().sum();
        let h: Vec<f64> = raw.iter().map(|x| x / s).collect();
        let p = PhysicalParams::uniform(n, 1.0, 1.0, 2.5, vec![1.0; n], ks[..n].to_vec(), c0s[..n].to_vec()).unwrap();
        let part = kks_partition(c, &h, &p).unwrap();
        let mu = bisect_mu(c, &h, &p);
        let scale = 1.0 + mu.abs();
        prop_assert!((part.mu - mu).abs() < 1e-10 * scale, "{} vs {}", part.mu, mu);
        let mixed: f64 = h.iter().zip(&part.c_phase).map(|(a, b)| a * b).sum();
        prop_assert!((mixed - c).abs() < 1e-10);
        for a in 0..n {
            prop_assert!((p.gibbs_k[a] * (part.c_phase[a] - p.c_eq[a]) - part.mu).abs() < 1e-10 * scale);
        }
        Ok(())
    })
}

fn three_phase_params(width: f64) -> PhysicalParams {
    let mut p = PhysicalParams::uniform(3, 1.0, 1.0, width, vec![3.0, 1.0, 2.0], vec![500.0, 300.0, 800.0], vec![0.02, 0.98, 0.5]).unwrap();
    p.gamma.set(0, 2, 1.5);
    p.mobility.set(1, 2, 0.5);
    p
}

/// A disk of phase 2 straddling a planar boundary between phases 0 and 1,
/// with a concentration close to the local equilibrium plus a ripple.
fn random_state(n: usize, cx: f64, cy: f64, r: f64, tilt: f64, ripple: f64, boundary: Boundary) -> State {
    let width = 2.5;
    let grid = Grid::uniform(&[n, n], 1.0, boundary).unwrap();
    let half = 0.5 * n as f64;
    let phases = SparsePhaseField::from_fn(grid, 3, 3, |cell| {
        let [x, y, _] = grid.center(cell);
        let disk = profile(r - (x - cx).hypot(y - cy), width);
        let plane = profile(y - half - tilt * (x - half), width);
        let g1 = (1.0 - disk) * plane;
        let g0 = (1.0 - disk) * (1.0 - plane);
        vec![(0, g0), (1, g1), (2, disk)]
    })
    .unwrap();
    let c = ScalarField::from_fn(grid, |cell| {
        let v = 0.02 * phases.value(cell, 0) + 0.98 * phases.value(cell, 1) + 0.5 * phases.value(cell, 2);
        v + ripple * (0.37 * cell as f64).sin()
    });
    State { phases, concentration: Some(c), time: 0.0 }
}

fn state_strategy(boundary: Boundary) -> impl Strategy<Value = State> {
    (8.0f64..16.0, 8.0f64..16.0, 3.0f64..6.0, -0.3f64..0.3, 0.0f64..0.01)
        .prop_map(move |(cx, cy, r, tilt, ripple)| random_state(24, cx, cy, r, tilt, ripple, boundary))
}

/// Phase rates recomputed on dense per-phase arrays.
fn dense_rates(state: &State, p: &PhysicalParams, m: &ModelParams) -> Vec<Vec<f64>> {
    let grid = state.grid();
    let n = p.n_phases;
    let cells = grid.cell_count();
    let dense: Vec<Vec<f64>> = (0..n).map(|a| state.phases.phase(a as u16).into_values()).collect();
    let c = state.concentration.as_ref().unwrap().values();
    let dx2 = grid.spacing() * grid.spacing();
    let mut out = vec![vec![0.0; cells]; n];
    for cell in 0..cells {
        let h: Vec<f64> = (0..n).map(|a| dense[a][cell]).collect();
        let mu = kks_partition(c[cell], &h, p).unwrap().mu;
        let mut lap = vec![0.0; n];
        let mut present = vec![false; n];
        for a in 0..n {
            present[a] = dense[a][cell] > 0.0;
            for axis in 0..grid.ndim() {
                for side in [Side::Lower, Side::Upper] {
                    let j = grid.neighbor_or_self(cell, axis, side);
                    lap[a] += (dense[a][j] - dense[a][cell]) / dx2;
                    present[a] |= dense[a][j] > 0.0;
                }
            }
        }
        let delta: Vec<f64> = (0..n)
            .map(|a| {
                let pair: f64 = (0..n).filter(|&b| b != a).map(|b| m.a.get(a, b) * lap[b] + m.b.get(a, b) * dense[b][cell]).sum();
                pair + grand_potential(mu, a, p)
            })
            .collect();
        let nz = present.iter().filter(|&&x| x).count().max(1) as f64;
        for a in (0..n).filter(|&a| present[a]) {
            let s: f64 = (0..n).filter(|&b| b != a && present[b]).map(|b| m.l.get(a, b) * (delta[a] - delta[b])).sum();
            out[a][cell] = -s / nz;
        }
    }
    out
}

pub fn sparse_vs_dense() -> Result<(), String> {
    check(16, state_strategy(Boundary::ZeroGradient), |state| {
        let p = three_phase_params(2.5);
        let m = ModelParams::derive(&p);
        let sparse = phase_rhs(&state, &p, &m).unwrap();
        let dense = dense_rates(&state, &p, &m);
        let layout = state.phases.layout();
        let scale = dense.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        prop_assert!(scale > 0.0);
        for cell in 0..state.grid().cell_count() {
            for a in 0..3u16 {
                let s = layout.lookup(&sparse, cell, a);
                let d = dense[a as usize][cell];
                prop_assert!((s - d).abs() <= 1e-12 * scale, "cell {} phase {}: {} vs {}", cell, a, s, d);
            }
        }
        Ok(())
    })
}

pub fn rates_sum_to_zero() -> Result<(), String> {
    check(16, state_strategy(Boundary::Periodic), |state| {
        let p = three_phase_params(2.5);
        let m = ModelParams::derive(&p);
        let rates = phase_rhs(&state, &p, &m).unwrap();
        let cap = state.phases.capacity();
        for cell in 0..state.grid().cell_count() {
            let slots = &rates[cell * cap..(cell + 1) * cap];
            let scale = slots.iter().fold(1.0f64, |a, v| a.max(v.abs()));
            prop_assert!(slots.iter().sum::<f64>().abs() < 1e-12 * scale);
        }
        Ok(())
    })
}

pub fn mass_conservation() -> Result<(), String> {
    check(16, (state_strategy(Boundary::Periodic), 0.1f64..0.9), |(state, frac)| {
        let p = three_phase_params(2.5);
        let m = ModelParams::derive(&p);
        let dt = frac * gershgorin_bounds(&state, &m, &p).dt_e;
        let (mut sys, mut u) = KksSystem::new(&state, &p, &m).unwrap();
        let total = |sys: &KksSystem, u: &[f64]| sys.state(u, 0.0).concentration.unwrap().values().iter().sum::<f64>();
        let before = total(&sys, &u);
        let mut ws = Workspace::new();
        for _ in 0..20 {
            feuler_step(&mut sys, &mut u, dt, &mut ws).unwrap();
            sys.after_accept(&mut u);
        }
        let after = total(&sys, &u);
        prop_assert!(((after - before) / before).abs() < 1e-10);
        Ok(())
    })
}

/// `u' = λ u` over independent scalar components.
pub struct Decay {
    lambda: Vec<f64>,
    ranges: Vec<Range<usize>>,
}

impl Decay {
    pub fn new(lambda: Vec<f64>) -> Self {
        let n = lambda.len();
        Decay { lambda, ranges: vec![0..n] }
    }
}

impl OdeSystem for Decay {
    fn len(&self) -> usize {
        self.lambda.len()
    }
    fn active(&self) -> &[Range<usize>] {
        &self.ranges
    }
    fn rhs(&mut self, u: &[f64], out: &mut [f64]) {
        for i in 0..u.len() {
            out[i] = self.lambda[i] * u[i];
        }
    }
}

fn legendre(s: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if s == 0 {
        return p0;
    }
    for j in 1..s {
        let jf = j as f64;
        let p2 = ((2.0 * jf + 1.0) * x * p1 - jf * p0) / (jf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Known stability polynomials of the Runge-Kutta-Legendre methods.
fn rkl_stability(s: usize, order: u8, z: f64) -> f64 {
    let sf = s as f64;
    if order == 1 {
        legendre(s, 1.0 + 2.0 * z / (sf * sf + sf))
    } else {
        let w1 = 4.0 / (sf * sf + sf - 2.0);
        let b = (sf * sf + sf - 2.0) / (2.0 * sf * (sf + 1.0));
        1.0 - b + b * legendre(s, 1.0 + w1 * z)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// SSP(n)2 as `1/n + (n-1)/n (1 + z/(n-1))^n`, expanded by the binomial theorem.
fn ssp2_stability(n: usize, z: f64) -> f64 {
    let h = z / (n - 1) as f64;
    let pow: f64 = (0..=n).map(|k| binomial(n, k) * h.powi(k as i32)).sum();
    1.0 / n as f64 + (n - 1) as f64 / n as f64 * pow
}

/// SSP(10)4 applied to `u' = z u` in closed form, with `E = 1 + z/6` the
/// amplification of one inner Euler step.
pub fn ssp104_stability(z: f64) -> f64 {
    let e = 1.0 + z / 6.0;
    let q5 = e.powi(5);
    let q2 = 1.0 / 25.0 + 9.0 / 25.0 * q5;
    let q1 = 15.0 * q2 - 5.0 * q5;
    q2 + 0.6 * q1 * e.powi(4) + z / 10.0 * q1 * e.powi(4)
}

pub fn stability_polynomials() -> Result<(), String> {
    check(200, (-20.0f64..0.0, 1usize..12, 2usize..9), |(z, s, n)| {
        let s = 2 * s + 1;
        let dt = 1.0;
        let mut ws = Workspace::new();
        let tol = |r: f64| 1e-12 * (1.0 + r.abs());

        let mut sys = Decay::new(vec![z]);
        let mut u = [1.0];
        feuler_step(&mut sys, &mut u, dt, &mut ws).unwrap();
        prop_assert!((u[0] - (1.0 + z)).abs() < tol(u[0]));

        let zn = z.max(-2.0 * (n - 1) as f64);
        let mut sys = Decay::new(vec![zn]);
        let mut u = [1.0];
        ssp2_step(&mut sys, &mut u, dt, n, None, &mut ws).unwrap();
        let r = ssp2_stability(n, zn);
        prop_assert!((u[0] - r).abs() < tol(r), "ssp{}2 z={}: {} vs {}", n, zn, u[0], r);

        let z4 = z.max(-12.0);
        let mut sys = Decay::new(vec![z4]);
        let mut u = [1.0];
        ssp104_step(&mut sys, &mut u, dt, None, &mut ws).unwrap();
        let r = ssp104_stability(z4);
        prop_assert!((u[0] - r).abs() < tol(r));

        for order in [1u8, 2] {
            if order == 2 && s < 3 {
                continue;
            }
            let c = sts_coeffs(s, order).unwrap();
            let zs = z.max(-2.0 * sts_stability_multiple(s, order));
            let mut sys = Decay::new(vec![zs]);
            let mut u = [1.0];
            sts_step(&mut sys, &mut u, dt, &c, &mut ws).unwrap();
            let r = rkl_stability(s, order, zs);
            prop_assert!((u[0] - r).abs() < tol(r), "sts{} s={} z={}: {} vs {}", order, s, zs, u[0], r);
        }
        Ok(())
    })
}

pub fn pid_bias_bounds() -> Result<(), String> {
    check(500, (prop::collection::vec((0.0f64..50.0, any::<bool>()), 1..60), 1u32..5), |(seq, order)| {
        let mut pid = PidController::new(order);
        let mut dt = 1.0;
        for (e, accept) in seq {
            let accepted = accept && e < 1.0;
            dt = pid.update(e, dt, accepted).max(1e-300);
            let ([e1, _], _) = pid.history();
            prop_assert!((BIAS_MIN..=BIAS_MAX).contains(&pid.bias), "{}", pid.bias);
            if let Some(e1) = e1 {
                prop_assert!(e1.is_finite());
            }
        }
        Ok(())
    })
}

pub fn rejection_shrinks() -> Result<(), String> {
    let strategy = (prop::collection::vec(0.01f64..0.99, 0..6), 1.0f64..1e6, 1u32..5, 1e-3f64..1e3);
    check(500, strategy, |(warmup, e, order, dt)| {
        let mut pid = PidController::new(order);
        let mut h = dt;
        for w in warmup {
            h = pid.update(w, h, true);
        }
        let next = pid.update(e, h, false);
        prop_assert!(next < h, "{} !< {}", next, h);
        Ok(())
    })
}

pub fn stage_count_minimal() -> Result<(), String> {
    check(500, (0.01f64..5000.0, 1u8..3), |(ratio, order)| {
        let dt_e = 0.37;
        let s = sts_stage_count(ratio * dt_e, dt_e, order);
        prop_assert!(s % 2 == 1);
        prop_assert!(SAFETY * dt_e * sts_stability_multiple(s, order) >= ratio * dt_e);
        let min = if order == 1 { 1 } else { 3 };
        if s > min {
            prop_assert!(SAFETY * dt_e * sts_stability_multiple(s - 2, order) < ratio * dt_e);
        }
        Ok(())
    })
}

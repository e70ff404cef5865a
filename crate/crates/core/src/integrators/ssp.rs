//! Forward Euler and the strong-stability-preserving Runge-Kutta schemes.

use super::{axpy, copy_ranges, OdeSystem, StepError, Workspace};

/// Differences `b_i - b̂_i` between the main and an embedded solution's
/// stage weights, indexed by RHS evaluation. When supplied to a stepper,
/// `Δt Σ (b_i - b̂_i) k_i` is accumulated into the workspace error vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedWeights(pub Vec<f64>);

impl EmbeddedWeights {
    /// Heun's method with forward Euler embedded.
    pub fn heun_euler() -> Self {
        EmbeddedWeights(vec![-0.5, 0.5])
    }
}

fn evaluate<S: OdeSystem + ?Sized>(
    sys: &mut S,
    u: &[f64],
    k: &mut [f64],
    err: &mut [f64],
    dt: f64,
    stage: usize,
    embedded: Option<&EmbeddedWeights>,
    ranges: &[std::ops::Range<usize>],
) {
    sys.rhs(u, k);
    if let Some(w) = embedded {
        let d = w.0.get(stage).copied().unwrap_or(0.0);
        if d != 0.0 {
            axpy(err, dt * d, k, ranges);
        }
    }
}

/// `u ← S(u + Δt f(u))`. Returns the number of RHS evaluations.
pub fn feuler_step<S: OdeSystem + ?Sized>(sys: &mut S, u: &mut [f64], dt: f64, ws: &mut Workspace) -> Result<usize, StepError> {
    ws.prepare(sys.len(), sys.active());
    sys.rhs(u, &mut ws.a);
    axpy(u, dt, &ws.a, &ws.ranges);
    sys.project(u, None)?;
    Ok(1)
}

/// Low-storage n-stage second-order SSP scheme. With `embedded`, the error
/// estimate is left in the workspace error vector (zeroed first).
pub fn ssp2_step<S: OdeSystem + ?Sized>(
    sys: &mut S,
    u: &mut [f64],
    dt: f64,
    n: usize,
    embedded: Option<&EmbeddedWeights>,
    ws: &mut Workspace,
) -> Result<usize, StepError> {
    assert!(n >= 2, "SSP(n)2 needs at least two stages");
    ws.prepare(sys.len(), sys.active());
    let Workspace { a: k, b: u0, e: err, ranges, .. } = ws;
    copy_ranges(u0, u, ranges);
    if embedded.is_some() {
        for r in ranges.iter() {
            err[r.clone()].fill(0.0);
        }
    }
    let h = dt / (n - 1) as f64;
    for stage in 0..n - 1 {
        evaluate(sys, u, k, err, dt, stage, embedded, ranges);
        axpy(u, h, k, ranges);
        sys.project(u, None)?;
    }
    evaluate(sys, u, k, err, dt, n - 1, embedded, ranges);
    let wn = 1.0 / n as f64;
    let wi = (n - 1) as f64 / n as f64;
    for r in ranges.iter() {
        for i in r.clone() {
            u[i] = wn * u0[i] + wi * (u[i] + h * k[i]);
        }
    }
    sys.project(u, None)?;
    Ok(n)
}

/// Ten-stage fourth-order SSP scheme in its two-register form.
pub fn ssp104_step<S: OdeSystem + ?Sized>(
    sys: &mut S,
    u: &mut [f64],
    dt: f64,
    embedded: Option<&EmbeddedWeights>,
    ws: &mut Workspace,
) -> Result<usize, StepError> {
    ws.prepare(sys.len(), sys.active());
    let Workspace { a: k, b: q2, e: err, ranges, .. } = ws;
    let q1 = u;
    copy_ranges(q2, q1, ranges);
    if embedded.is_some() {
        for r in ranges.iter() {
            err[r.clone()].fill(0.0);
        }
    }
    let h = dt / 6.0;
    let mut stage = 0;
    for _ in 0..5 {
        evaluate(sys, q1, k, err, dt, stage, embedded, ranges);
        stage += 1;
        axpy(q1, h, k, ranges);
        sys.project(q1, None)?;
    }
    for r in ranges.iter() {
        for i in r.clone() {
            q2[i] = q2[i] / 25.0 + 9.0 * q1[i] / 25.0;
            q1[i] = 15.0 * q2[i] - 5.0 * q1[i];
        }
    }
    sys.project(q1, None)?;
    for _ in 0..4 {
        evaluate(sys, q1, k, err, dt, stage, embedded, ranges);
        stage += 1;
        axpy(q1, h, k, ranges);
        sys.project(q1, None)?;
    }
    evaluate(sys, q1, k, err, dt, stage, embedded, ranges);
    for r in ranges.iter() {
        for i in r.clone() {
            q1[i] = q2[i] + 0.6 * q1[i] + dt / 10.0 * k[i];
        }
    }
    sys.project(q1, None)?;
    Ok(10)
}

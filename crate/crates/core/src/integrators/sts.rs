//! Runge-Kutta-Legendre super-time-stepping (first and second order).

use super::{copy_ranges, OdeSystem, StepError, Workspace};
use std::ops::Range;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StsError {
    #[error("order {0} is not supported; use 1 or 2")]
    Order(u8),
    #[error("stage count {s} is invalid for order {order}: it must be odd and at least {min}")]
    Stages { s: usize, order: u8, min: usize },
}

/// Recurrence coefficients; index `j` runs from 1 to `s`, index 0 is unused.
#[derive(Debug, Clone, PartialEq)]
pub struct StsCoeffs {
    pub s: usize,
    pub order: u8,
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
    pub mu_tilde: Vec<f64>,
    pub gamma_tilde: Vec<f64>,
}

impl StsCoeffs {
    /// Stable step as a multiple of the forward-Euler limit.
    pub fn stability_multiple(&self) -> f64 {
        stability_multiple(self.s, self.order)
    }
}

pub(crate) fn stability_multiple(s: usize, order: u8) -> f64 {
    let s = s as f64;
    if order == 1 {
        (s * s + s) / 2.0
    } else {
        (s * s + s - 2.0) / 4.0
    }
}

pub fn sts_coeffs(s: usize, order: u8) -> Result<StsCoeffs, StsError> {
    let min = match order {
        1 => 1,
        2 => 3,
        o => return Err(StsError::Order(o)),
    };
    if s < min || s % 2 == 0 {
        return Err(StsError::Stages { s, order, min });
    }
    let sf = s as f64;
    let mut mu = vec![0.0; s + 1];
    let mut nu = vec![0.0; s + 1];
    let mut mu_tilde = vec![0.0; s + 1];
    let mut gamma_tilde = vec![0.0; s + 1];
    if order == 1 {
        let w1 = 2.0 / (sf * sf + sf);
        mu_tilde[1] = w1;
        for j in 2..=s {
            let jf = j as f64;
            mu[j] = (2.0 * jf - 1.0) / jf;
            nu[j] = -(jf - 1.0) / jf;
            mu_tilde[j] = mu[j] * w1;
        }
    } else {
        let b = |j: usize| -> f64 {
            if j <= 2 {
                1.0 / 3.0
            } else {
                let jf = j as f64;
                (jf * jf + jf - 2.0) / (2.0 * jf * (jf + 1.0))
            }
        };
        let w1 = 4.0 / (sf * sf + sf - 2.0);
        mu_tilde[1] = b(1) * w1;
        for j in 2..=s {
            let jf = j as f64;
            mu[j] = (2.0 * jf - 1.0) / jf * b(j) / b(j - 1);
            nu[j] = -(jf - 1.0) / jf * b(j) / b(j - 2);
            mu_tilde[j] = mu[j] * w1;
            gamma_tilde[j] = -(1.0 - b(j - 1)) * mu_tilde[j];
        }
    }
    Ok(StsCoeffs { s, order, mu, nu, mu_tilde, gamma_tilde })
}

/// Replaces `rhs0` on the violated ranges by the difference quotient that
/// reproduces the projected first stage.
pub fn sts2_simplex_fixup(
    u0: &[f64],
    u1_projected: &[f64],
    mu_tilde1: f64,
    dt: f64,
    rhs0: &mut [f64],
    violated: &[Range<usize>],
) {
    let inv = 1.0 / (mu_tilde1 * dt);
    for r in violated {
        for i in r.clone() {
            rhs0[i] = (u1_projected[i] - u0[i]) * inv;
        }
    }
}

/// One super-time-step. The initial state is left in `ws.b` and the
/// (possibly corrected) initial RHS in `ws.c` for error estimation.
pub fn sts_step<S: OdeSystem + ?Sized>(
    sys: &mut S,
    u: &mut [f64],
    dt: f64,
    c: &StsCoeffs,
    ws: &mut Workspace,
) -> Result<usize, StepError> {
    ws.prepare(sys.len(), sys.active());
    let Workspace { a: k, b: u0, c: r0, d: older, e: newer, ranges, violations } = ws;
    u0.copy_from_slice(u);
    sys.rhs(u0, r0);
    older.copy_from_slice(u);
    newer.copy_from_slice(u);
    let h1 = c.mu_tilde[1] * dt;
    for r in ranges.iter() {
        for i in r.clone() {
            newer[i] += h1 * r0[i];
        }
    }
    violations.clear();
    if c.order == 2 {
        sys.project(newer, Some(violations))?;
        if !violations.is_empty() {
            sts2_simplex_fixup(u0, newer, c.mu_tilde[1], dt, r0, violations);
        }
    } else {
        sys.project(newer, None)?;
    }
    for j in 2..=c.s {
        sys.rhs(newer, k);
        let (m, n) = (c.mu[j], c.nu[j]);
        let w0 = 1.0 - m - n;
        let hk = c.mu_tilde[j] * dt;
        let hr = c.gamma_tilde[j] * dt;
        for r in ranges.iter() {
            for i in r.clone() {
                older[i] = m * newer[i] + n * older[i] + w0 * u0[i] + hk * k[i] + hr * r0[i];
            }
        }
        sys.project(older, None)?;
        std::mem::swap(older, newer);
    }
    copy_ranges(u, newer, ranges);
    Ok(c.s)
}

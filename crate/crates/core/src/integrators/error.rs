//! Local error estimates and the weighted error norm.

use super::Tolerances;
use std::ops::Range;

/// `e = (12 (u1 - u0) - 6 Δt (f(u0) + f(u1))) / 15` on the given ranges.
pub fn sommeijer_error(
    u0: &[f64],
    u1: &[f64],
    r0: &[f64],
    r1: &[f64],
    dt: f64,
    err: &mut [f64],
    ranges: &[Range<usize>],
) {
    for r in ranges {
        for i in r.clone() {
            err[i] = (12.0 * (u1[i] - u0[i]) - 6.0 * dt * (r0[i] + r1[i])) / 15.0;
        }
    }
}

/// Step-halving estimate `(u_half - u_full) / (2^p - 1)`.
pub fn richardson_error(u_full: &[f64], u_half: &[f64], order: u32, err: &mut [f64], ranges: &[Range<usize>]) {
    let scale = 1.0 / ((1u64 << order) as f64 - 1.0);
    for r in ranges {
        for i in r.clone() {
            err[i] = (u_half[i] - u_full[i]) * scale;
        }
    }
}

/// Running sum for `sqrt(Σ (e / (r max(|u0|, |u1|) + a))² / N)`.
#[derive(Debug, Default, Clone, Copy)]
pub struct NormAccumulator {
    sum: f64,
    n: u64,
}

impl NormAccumulator {
    #[inline]
    pub fn add(&mut self, e: f64, u0: f64, u1: f64, rel: f64, abs: f64) {
        let w = e / (rel * u0.abs().max(u1.abs()) + abs);
        self.sum += w * w;
    }

    #[inline]
    pub fn count(&mut self, n: u64) {
        self.n += n;
    }

    pub fn finish(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.sum / self.n as f64).sqrt()
        }
    }
}

/// Weighted norm over a whole multiphase state. Phase data is laid out with
/// `capacity` slots per cell; only slots with nonzero error count as degrees
/// of freedom, and a cell without any counts as two. Every concentration
/// value counts.
pub fn weighted_error_norm(
    phase: [&[f64]; 3],
    capacity: usize,
    conc: Option<[&[f64]; 3]>,
    tol: &Tolerances,
) -> f64 {
    let [e, u0, u1] = phase;
    let mut acc = NormAccumulator::default();
    for cell in 0..e.len() / capacity {
        let mut nontrivial = 0;
        for i in cell * capacity..(cell + 1) * capacity {
            if e[i] != 0.0 {
                acc.add(e[i], u0[i], u1[i], tol.phi_rel, tol.phi_abs);
                nontrivial += 1;
            }
        }
        acc.count(if nontrivial == 0 { 2 } else { nontrivial });
    }
    if let Some([e, u0, u1]) = conc {
        for i in 0..e.len() {
            acc.add(e[i], u0[i], u1[i], tol.c_rel, tol.c_abs);
        }
        acc.count(e.len() as u64);
    }
    acc.finish()
}

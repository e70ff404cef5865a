//! Explicit time steppers over a flat state vector.
//!
//! A system exposes the ranges of its state that may change ("active"
//! ranges); steppers only read and write those. Everything else is left
//! untouched, which is what makes narrow-band phase fields cheap.

mod error;
mod ssp;
pub(crate) mod sts;

pub use error::{richardson_error, sommeijer_error, weighted_error_norm, NormAccumulator};
pub use ssp::{feuler_step, ssp104_step, ssp2_step, EmbeddedWeights};
pub use sts::{sts2_simplex_fixup, sts_coeffs, sts_step, StsCoeffs, StsError};

use std::ops::Range;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StepError {
    #[error("cell {cell}: all phase values non-positive after a stage")]
    DegenerateCell { cell: usize },
    #[error("non-finite value in the state")]
    NonFinite,
}

/// Per-field error tolerances for the weighted norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub phi_abs: f64,
    pub phi_rel: f64,
    pub c_abs: f64,
    pub c_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { phi_abs: 1e-4, phi_rel: 1e-4, c_abs: 1e-4, c_rel: 1e-4 }
    }
}

/// Semi-discrete system `u' = f(u)`.
pub trait OdeSystem {
    fn len(&self) -> usize;

    /// Components that may change. Sorted and disjoint.
    fn active(&self) -> &[Range<usize>];

    /// Writes `f(u)` into the active ranges of `out`.
    fn rhs(&mut self, u: &[f64], out: &mut [f64]);

    /// Maps a stage back onto the admissible set. When `violations` is given,
    /// component ranges whose raw values were inadmissible are appended.
    fn project(&self, _u: &mut [f64], _violations: Option<&mut Vec<Range<usize>>>) -> Result<(), StepError> {
        Ok(())
    }

    /// Zeroes error components whose trial values are inadmissible.
    fn filter_error(&self, _trial: &[f64], _err: &mut [f64]) {}

    /// Weighted l² norm of `err` over the active ranges.
    fn error_norm(&self, err: &[f64], u0: &[f64], u1: &[f64], tol: &Tolerances) -> f64 {
        let mut acc = NormAccumulator::default();
        for r in self.active() {
            for i in r.clone() {
                acc.add(err[i], u0[i], u1[i], tol.phi_rel, tol.phi_abs);
                acc.count(1);
            }
        }
        acc.finish()
    }

    /// Called after every accepted step; may rearrange the state and change
    /// the active ranges.
    fn after_accept(&mut self, _u: &mut [f64]) {}
}

/// Number of full right-hand-side evaluations performed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RhsCounter(pub u64);

impl RhsCounter {
    pub fn add(&mut self, n: usize) {
        self.0 += n as u64;
    }

    pub fn get(&self) -> u64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub error: f64,
    pub accepted: bool,
    pub rhs_evals: usize,
}

/// Scratch vectors shared by the steppers.
#[derive(Debug, Default, Clone)]
pub struct Workspace {
    pub(crate) a: Vec<f64>,
    pub(crate) b: Vec<f64>,
    pub(crate) c: Vec<f64>,
    pub(crate) d: Vec<f64>,
    pub(crate) e: Vec<f64>,
    pub(crate) ranges: Vec<Range<usize>>,
    pub(crate) violations: Vec<Range<usize>>,
}

impl Workspace {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn prepare(&mut self, len: usize, active: &[Range<usize>]) {
        for v in [&mut self.a, &mut self.b, &mut self.c, &mut self.d, &mut self.e] {
            if v.len() != len {
                v.clear();
                v.resize(len, 0.0);
            }
        }
        self.ranges.clear();
        self.ranges.extend_from_slice(active);
    }
}

#[inline]
pub(crate) fn copy_ranges(dst: &mut [f64], src: &[f64], ranges: &[Range<usize>]) {
    for r in ranges {
        dst[r.clone()].copy_from_slice(&src[r.clone()]);
    }
}

/// `y += a * x` on the given ranges.
#[inline]
pub(crate) fn axpy(y: &mut [f64], a: f64, x: &[f64], ranges: &[Range<usize>]) {
    for r in ranges {
        for (yi, xi) in y[r.clone()].iter_mut().zip(&x[r.clone()]) {
            *yi += a * xi;
        }
    }
}

/// Integration scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    FEuler,
    Ssp2 { stages: usize },
    Ssp104,
    Sts { order: u8 },
}

impl Scheme {
    pub fn order(&self) -> u32 {
        match self {
            Scheme::FEuler => 1,
            Scheme::Ssp2 { .. } => 2,
            Scheme::Ssp104 => 4,
            Scheme::Sts { order } => *order as u32,
        }
    }

    /// Largest stable step as a multiple of the forward-Euler limit, for
    /// the fixed-stage schemes.
    pub fn stability_multiple(&self) -> Option<f64> {
        match self {
            Scheme::FEuler => Some(1.0),
            Scheme::Ssp2 { stages } => Some((*stages - 1) as f64),
            Scheme::Ssp104 => Some(6.0),
            Scheme::Sts { .. } => None,
        }
    }

    /// RHS evaluations of one step without error estimation.
    pub fn stages(&self, sts_stages: usize) -> usize {
        match self {
            Scheme::FEuler => 1,
            Scheme::Ssp2 { stages } => *stages,
            Scheme::Ssp104 => 10,
            Scheme::Sts { .. } => sts_stages,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Scheme::FEuler => "feuler".into(),
            Scheme::Ssp2 { stages } => format!("ssp{stages}2"),
            Scheme::Ssp104 => "ssp104".into(),
            Scheme::Sts { order } => format!("sts{order}"),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let s = s.to_ascii_lowercase();
        match s.as_str() {
            "feuler" | "fe" => Some(Scheme::FEuler),
            "ssp104" | "ssp(10)4" => Some(Scheme::Ssp104),
            "sts1" => Some(Scheme::Sts { order: 1 }),
            "sts2" => Some(Scheme::Sts { order: 2 }),
            _ => {
                let inner = s.strip_prefix("ssp(").and_then(|r| r.strip_suffix(")2"));
                let inner = inner.or_else(|| s.strip_prefix("ssp").and_then(|r| r.strip_suffix('2')));
                let n: usize = inner?.parse().ok()?;
                (n >= 2).then_some(Scheme::Ssp2 { stages: n })
            }
        }
    }
}

/// One fixed-stage step of `scheme` (STS uses `sts` coefficients).
pub fn step_once<S: OdeSystem + ?Sized>(
    sys: &mut S,
    u: &mut [f64],
    dt: f64,
    scheme: Scheme,
    sts: Option<&StsCoeffs>,
    ws: &mut Workspace,
) -> Result<usize, StepError> {
    match scheme {
        Scheme::FEuler => feuler_step(sys, u, dt, ws),
        Scheme::Ssp2 { stages } => ssp2_step(sys, u, dt, stages, None, ws),
        Scheme::Ssp104 => ssp104_step(sys, u, dt, None, ws),
        Scheme::Sts { order } => {
            let owned;
            let coeffs = match sts {
                Some(c) => c,
                None => {
                    owned = sts_coeffs(if order == 1 { 1 } else { 3 }, order).expect("minimal stage count");
                    &owned
                }
            };
            sts_step(sys, u, dt, coeffs, ws)
        }
    }
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;

    /// `u' = λ u` in any number of uncoupled components.
    pub struct Linear {
        pub lambda: Vec<f64>,
        pub ranges: Vec<Range<usize>>,
    }

    impl Linear {
        pub fn scalar(lambda: f64) -> Self {
            Linear { lambda: vec![lambda], ranges: vec![0..1] }
        }
    }

    impl OdeSystem for Linear {
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

    #[test]
    fn scheme_names_round_trip() {
        for s in [Scheme::FEuler, Scheme::Ssp2 { stages: 5 }, Scheme::Ssp104, Scheme::Sts { order: 1 }, Scheme::Sts { order: 2 }] {
            assert_eq!(Scheme::parse(&s.name()), Some(s));
        }
        assert_eq!(Scheme::parse("SSP(5)2"), Some(Scheme::Ssp2 { stages: 5 }));
        assert_eq!(Scheme::parse("ssp12"), None);
    }
}

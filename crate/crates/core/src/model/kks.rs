//! Pointwise pieces of the model: interface profile, KKS partition, grand
//! potentials and the simplex projection.

use super::params::PhysicalParams;
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

/// Sum of the two thin-interface integrals of the sine profile.
pub const THIN_INTERFACE_MF: f64 = 0.3084251;

/// Equilibrium profile of a flat interface at signed distance `d`.
pub fn profile(d: f64, width: f64) -> f64 {
    let half = FRAC_PI_2 * width;
    if d <= -half {
        0.0
    } else if d >= half {
        1.0
    } else {
        0.5 * (1.0 + (d / width).sin())
    }
}

/// Chemical potential and phase concentrations in local equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub mu: f64,
    /// `c_α = c_{0,α} + μ/k_α` for every phase.
    pub c_phase: Vec<f64>,
}

#[derive(Debug, Error, PartialEq)]
pub enum PartitionError {
    #[error("weights sum to zero after dividing by the Gibbs prefactors")]
    Degenerate,
    #[error("expected {expected} weights, got {got}")]
    Shape { expected: usize, got: usize },
}

/// Solves `c = Σ h_α c_α`, `k_α (c_α - c_{0,α}) = μ` in closed form.
pub fn kks_partition(c: f64, h: &[f64], p: &PhysicalParams) -> Result<Partition, PartitionError> {
    if h.len() != p.n_phases {
        return Err(PartitionError::Shape { expected: p.n_phases, got: h.len() });
    }
    let mut compliance = 0.0;
    let mut base = 0.0;
    for a in 0..p.n_phases {
        compliance += h[a] / p.gibbs_k[a];
        base += h[a] * p.c_eq[a];
    }
    if compliance == 0.0 {
        return Err(PartitionError::Degenerate);
    }
    let mu = (c - base) / compliance;
    let c_phase = (0..p.n_phases).map(|a| p.c_eq[a] + mu / p.gibbs_k[a]).collect();
    Ok(Partition { mu, c_phase })
}

/// ψ_α(μ) = -μ²/(2k_α) - μ c_{0,α}.
#[inline]
pub fn grand_potential(mu: f64, phase: usize, p: &PhysicalParams) -> f64 {
    -mu * mu / (2.0 * p.gibbs_k[phase]) - mu * p.c_eq[phase]
}

/// Parabolic Gibbs energy of one phase at its own concentration.
#[inline]
pub fn gibbs_energy(c_phase: f64, phase: usize, p: &PhysicalParams) -> f64 {
    let d = c_phase - p.c_eq[phase];
    0.5 * p.gibbs_k[phase] * d * d
}

/// Thin-interface phase-field mobility that cancels interface kinetics for a
/// two-phase system with equal diffusivities.
pub fn thin_interface_mobility(dc_dmu: f64, diffusivity: f64, width: f64, delta_c_eq: f64) -> f64 {
    PI * PI / (16.0 * width * width) * diffusivity * dc_dmu / (delta_c_eq * delta_c_eq * THIN_INTERFACE_MF)
}

#[derive(Debug, Error, PartialEq)]
#[error("all phase values are non-positive; the simplex projection is undefined")]
pub struct DegenerateSimplex;

/// Sums within this distance of 1 are left unscaled, which makes the
/// projection exactly idempotent.
const NORMALIZE_SLACK: f64 = 1e-14;

/// Projects one cell's values onto the Gibbs simplex: negatives are clamped
/// to 0; if any value reaches 1 it becomes the only nonzero entry; otherwise
/// the vector is divided by its sum. Returns whether any input value lay
/// outside `[0, 1]`.
pub fn simplex_project(values: &mut [f64]) -> Result<bool, DegenerateSimplex> {
    let mut violated = false;
    let mut best: Option<usize> = None;
    for i in 0..values.len() {
        let v = values[i];
        if v.is_nan() {
            return Err(DegenerateSimplex);
        }
        if v < 0.0 {
            violated = true;
            values[i] = 0.0;
        } else if v >= 1.0 {
            violated |= v > 1.0;
            if best.is_none_or(|b| v > values[b]) {
                best = Some(i);
            }
        }
    }
    if let Some(b) = best {
        for (i, v) in values.iter_mut().enumerate() {
            *v = if i == b { 1.0 } else { 0.0 };
        }
        return Ok(violated);
    }
    let sum: f64 = values.iter().sum();
    if sum <= 0.0 {
        return Err(DegenerateSimplex);
    }
    if (sum - 1.0).abs() > NORMALIZE_SLACK {
        let inv = 1.0 / sum;
        for v in values.iter_mut() {
            *v *= inv;
        }
    }
    Ok(violated)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table1() -> PhysicalParams {
        PhysicalParams::uniform(2, 1.0, 1.0, 2.5, vec![1.0; 2], vec![500.0; 2], vec![0.02, 0.98]).unwrap()
    }

    #[test]
    fn profile_values() {
        let w = 2.5;
        assert_eq!(profile(0.0, w), 0.5);
        assert_eq!(profile(FRAC_PI_2 * w, w), 1.0);
        assert_eq!(profile(-FRAC_PI_2 * w, w), 0.0);
        assert!((profile(1.0, w) - 0.694_709_171_154_325).abs() < 1e-12);
        assert_eq!(profile(100.0, w), 1.0);
    }

    #[test]
    fn partition_examples() {
        let p = table1();
        let bulk = kks_partition(0.02, &[1.0, 0.0], &p).unwrap();
        assert_eq!(bulk.mu, 0.0);
        assert!((bulk.c_phase[0] - 0.02).abs() < 1e-15);

        let mid = kks_partition(0.5, &[0.5, 0.5], &p).unwrap();
        assert!(mid.mu.abs() < 1e-10);
        assert!((mid.c_phase[1] - 0.98).abs() < 1e-12);

        let off = kks_partition(0.6, &[0.5, 0.5], &p).unwrap();
        assert!((off.mu - 50.0).abs() < 1e-9);
        assert!((off.c_phase[0] - 0.12).abs() < 1e-12);
        assert!((off.c_phase[1] - 1.08).abs() < 1e-12);
        assert_eq!(kks_partition(0.5, &[0.0, 0.0], &p), Err(PartitionError::Degenerate));
    }

    #[test]
    fn grand_potential_examples() {
        let p = table1();
        assert_eq!(grand_potential(0.0, 1, &p), 0.0);
        assert!((grand_potential(50.0, 0, &p) + 3.5).abs() < 1e-12);
        let mu = 7.3;
        let diff = grand_potential(mu, 0, &p) - grand_potential(mu, 1, &p);
        assert!((diff + mu * (0.02 - 0.98)).abs() < 1e-12);
    }

    #[test]
    fn thin_interface_examples() {
        let l = thin_interface_mobility(1.0, 1.0, 2.5, 0.96);
        assert!((l - 0.34724).abs() < 1e-4, "{l}");
        let l2 = thin_interface_mobility(1.0, 1.0, 5.0, 0.96);
        assert!((l2 / l - 0.25).abs() < 1e-14);
        let l3 = thin_interface_mobility(1.0, 2.0, 2.5, 0.96);
        assert!((l3 / l - 2.0).abs() < 1e-14);
    }

    #[test]
    fn projection_examples() {
        let mut a = [0.3, 0.7];
        assert_eq!(simplex_project(&mut a), Ok(false));
        assert_eq!(a, [0.3, 0.7]);

        let mut b = [1.2, -0.2];
        assert_eq!(simplex_project(&mut b), Ok(true));
        assert_eq!(b, [1.0, 0.0]);

        let mut c = [0.5, 0.6, -0.1];
        assert_eq!(simplex_project(&mut c), Ok(true));
        assert!((c[0] - 0.5 / 1.1).abs() < 1e-15);
        assert!((c[1] - 0.6 / 1.1).abs() < 1e-15);
        assert_eq!(c[2], 0.0);

        let mut d = [-0.1, 0.0];
        assert_eq!(simplex_project(&mut d), Err(DegenerateSimplex));
    }
}

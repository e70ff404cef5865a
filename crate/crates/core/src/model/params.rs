use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("at least two phases are required, got {0}")]
    PhaseCount(usize),
    #[error("{name} has {got} entries, expected {expected}")]
    Shape { name: &'static str, expected: usize, got: usize },
    #[error("{name}[{i}][{j}] = {value} must be positive")]
    NonPositivePair { name: &'static str, i: usize, j: usize, value: f64 },
    #[error("{name} is not symmetric at ({i}, {j})")]
    Asymmetric { name: &'static str, i: usize, j: usize },
    #[error("interface parameter W = {0} must be positive")]
    Width(f64),
    #[error("Gibbs prefactor k[{0}] = {1} must be positive")]
    Prefactor(usize, f64),
    #[error("equilibrium concentration c0[{0}] = {1} outside [0, 1]")]
    Concentration(usize, f64),
    #[error("diffusivity D[{0}] = {1} must be non-negative")]
    Diffusivity(usize, f64),
}

/// Dense symmetric N×N matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMatrix {
    n: usize,
    data: Vec<f64>,
}

impl PairMatrix {
    pub fn uniform(n: usize, off_diagonal: f64) -> Self {
        let mut data = vec![off_diagonal; n * n];
        for i in 0..n {
            data[i * n + i] = 0.0;
        }
        PairMatrix { n, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        PairMatrix { n, data: rows.iter().flatten().copied().collect() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Largest off-diagonal entry.
    pub fn max_pair(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    m = m.max(self.get(i, j));
                }
            }
        }
        m
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    out.data[i * self.n + j] = f(self.get(i, j));
                }
            }
        }
        out
    }

    fn check(&self, name: &'static str, n: usize) -> Result<(), ParamError> {
        if self.n != n || self.data.len() != n * n {
            return Err(ParamError::Shape { name, expected: n * n, got: self.data.len() });
        }
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let v = self.get(i, j);
                if !(v > 0.0) {
                    return Err(ParamError::NonPositivePair { name, i, j, value: v });
                }
                if v != self.get(j, i) {
                    return Err(ParamError::Asymmetric { name, i, j });
                }
            }
        }
        Ok(())
    }
}

/// Physical parameters of the multiphase KKS model with parabolic Gibbs
/// energies `g_α = k_α/2 (c_α - c_{0,α})²`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalParams {
    pub n_phases: usize,
    /// Interface energies γ_αβ.
    pub gamma: PairMatrix,
    /// Interface mobilities M_αβ.
    pub mobility: PairMatrix,
    /// Interface parameter W; the interface is πW wide.
    pub width: f64,
    pub diffusivity: Vec<f64>,
    pub gibbs_k: Vec<f64>,
    pub c_eq: Vec<f64>,
}

impl PhysicalParams {
    /// Same γ and M on every pair.
    pub fn uniform(
        n_phases: usize,
        gamma: f64,
        mobility: f64,
        width: f64,
        diffusivity: Vec<f64>,
        gibbs_k: Vec<f64>,
        c_eq: Vec<f64>,
    ) -> Result<Self, ParamError> {
        let p = PhysicalParams {
            n_phases,
            gamma: PairMatrix::uniform(n_phases, gamma),
            mobility: PairMatrix::uniform(n_phases, mobility),
            width,
            diffusivity,
            gibbs_k,
            c_eq,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let n = self.n_phases;
        if n < 2 {
            return Err(ParamError::PhaseCount(n));
        }
        self.gamma.check("gamma", n)?;
        self.mobility.check("mobility", n)?;
        if !(self.width > 0.0) {
            return Err(ParamError::Width(self.width));
        }
        for (name, v) in [("diffusivity", &self.diffusivity), ("gibbs_k", &self.gibbs_k), ("c_eq", &self.c_eq)] {
            if v.len() != n {
                return Err(ParamError::Shape { name, expected: n, got: v.len() });
            }
        }
        for a in 0..n {
            if !(self.gibbs_k[a] > 0.0) {
                return Err(ParamError::Prefactor(a, self.gibbs_k[a]));
            }
            if !(0.0..=1.0).contains(&self.c_eq[a]) {
                return Err(ParamError::Concentration(a, self.c_eq[a]));
            }
            if !(self.diffusivity[a] >= 0.0) {
                return Err(ParamError::Diffusivity(a, self.diffusivity[a]));
            }
        }
        Ok(())
    }

    /// True if every phase shares the same Gibbs prefactor.
    pub fn equal_k(&self) -> bool {
        self.gibbs_k.iter().all(|&k| k == self.gibbs_k[0])
    }
}

/// Gradient, potential and mobility matrices of the phase-field equation.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// A_αβ = 4Wγ_αβ/π.
    pub a: PairMatrix,
    /// B_αβ = 4γ_αβ/(πW).
    pub b: PairMatrix,
    /// L_αβ = πM_αβ/(4W), unless overridden.
    pub l: PairMatrix,
}

impl ModelParams {
    pub fn derive(p: &PhysicalParams) -> Self {
        let w = p.width;
        ModelParams {
            a: p.gamma.map(|g| 4.0 * w * g / PI),
            b: p.gamma.map(|g| 4.0 * g / (PI * w)),
            l: p.mobility.map(|m| PI * m / (4.0 * w)),
        }
    }

    /// Replaces the phase-field mobility of every pair.
    pub fn with_uniform_mobility(mut self, l: f64) -> Self {
        let n = self.l.n();
        self.l = PairMatrix::uniform(n, l);
        self
    }
}

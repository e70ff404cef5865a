//! Steady-state detection for slowly converging, possibly oscillating
//! observables.

/// Declares equilibrium once the least-squares slope of the observable over
/// a trailing window is below `threshold` in magnitude. The history must
/// span at least one full window first.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumDetector {
    pub threshold: f64,
    pub window: f64,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl EquilibriumDetector {
    pub fn new(threshold: f64, window: f64) -> Self {
        EquilibriumDetector { threshold, window, times: Vec::new(), values: Vec::new() }
    }

    pub fn push(&mut self, time: f64, value: f64) {
        self.times.push(time);
        self.values.push(value);
    }

    /// Slope over the trailing window, once the history is long enough.
    pub fn slope(&self) -> Option<f64> {
        let &last = self.times.last()?;
        if last - self.times[0] < self.window {
            return None;
        }
        let start = self.times.partition_point(|&t| t < last - self.window);
        let (t, v) = (&self.times[start..], &self.values[start..]);
        if t.len() < 2 {
            return None;
        }
        let n = t.len() as f64;
        let tm = t.iter().sum::<f64>() / n;
        let vm = v.iter().sum::<f64>() / n;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (ti, vi) in t.iter().zip(v) {
            sxy += (ti - tm) * (vi - vm);
            sxx += (ti - tm) * (ti - tm);
        }
        Some(sxy / sxx)
    }

    pub fn converged(&self) -> bool {
        self.slope().is_some_and(|s| s.abs() < self.threshold)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

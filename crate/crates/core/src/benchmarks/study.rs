//! Multi-run studies and CSV emission.

use super::runner::{run, BenchmarkReport, Case, Control, Frame, IntegratorConfig, Observer, RunError, RunSpec};
use super::refinement_width;
use crate::driver::StepRecord;
use crate::dump::FieldDump;
use crate::integrators::Scheme;
use crate::model::State;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

/// `{:.16e}` keeps 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Time-series columns: `time,observable,energy,dt,accepted,kind`.
///
/// Accepted steps give `kind = step` rows with empty observable and energy;
/// output times give `kind = output` rows with empty `dt`. Rejected steps
/// are not written, so the row count is accepted steps plus output times.
pub struct TimeSeriesWriter<W: Write> {
    out: W,
    dump_dir: Option<PathBuf>,
    frames: usize,
    error: Option<io::Error>,
}

pub const TIME_SERIES_HEADER: &str = "time,observable,energy,dt,accepted,kind";

impl<W: Write> TimeSeriesWriter<W> {
    pub fn new(mut out: W) -> io::Result<Self> {
        writeln!(out, "{TIME_SERIES_HEADER}")?;
        Ok(TimeSeriesWriter { out, dump_dir: None, frames: 0, error: None })
    }

    /// Also writes `fields_NNNNN.txt` into `dir` at every output time.
    pub fn with_dumps(mut self, dir: PathBuf) -> Self {
        self.dump_dir = Some(dir);
        self
    }

    fn keep(&mut self, r: io::Result<()>) {
        if let (Err(e), None) = (r, &self.error) {
            self.error = Some(e);
        }
    }

    /// Flushes and returns the writer, or the first I/O error seen.
    pub fn finish(mut self) -> io::Result<W> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<W: Write> Observer for TimeSeriesWriter<W> {
    fn step(&mut self, rec: &StepRecord) {
        if rec.accepted {
            let r = writeln!(self.out, "{},,,{},1,step", fmt_f64(rec.time), fmt_f64(rec.dt));
            self.keep(r);
        }
    }

    fn frame(&mut self, frame: &Frame, state: &State) {
        let r = writeln!(self.out, "{},{},{},,,output", fmt_f64(frame.time), fmt_f64(frame.observable), fmt_f64(frame.energy));
        self.keep(r);
        if let Some(dir) = &self.dump_dir {
            let path = dir.join(format!("fields_{:05}.txt", self.frames));
            let r = File::create(path).and_then(|f| {
                let mut w = BufWriter::new(f);
                FieldDump::from_state(state).write(&mut w)?;
                w.flush()
            });
            self.keep(r);
        }
        self.frames += 1;
    }
}

/// `key,value` summary of a run.
pub fn write_summary<W: Write>(mut w: W, r: &BenchmarkReport, seed: u64) -> io::Result<()> {
    writeln!(w, "key,value")?;
    writeln!(w, "case,{}", r.case)?;
    writeln!(w, "integrator,{}", r.integrator)?;
    writeln!(w, "reference,{}", fmt_f64(r.reference))?;
    writeln!(w, "measured,{}", fmt_f64(r.measured))?;
    writeln!(w, "error,{}", fmt_f64(r.error))?;
    writeln!(w, "relative_error,{}", fmt_f64(r.relative_error()))?;
    writeln!(w, "rhs_evals,{}", r.rhs_evals)?;
    writeln!(w, "accepted,{}", r.accepted)?;
    writeln!(w, "rejected,{}", r.rejected)?;
    writeln!(w, "rejected_fraction,{}", fmt_f64(r.rejected_fraction()))?;
    writeln!(w, "dt_e,{}", fmt_f64(r.dt_e))?;
    writeln!(w, "final_time,{}", fmt_f64(r.final_state.time))?;
    if let Some(c) = r.converged {
        writeln!(w, "converged,{c}")?;
    }
    if let Some(d) = r.mass_drift {
        writeln!(w, "mass_drift,{}", fmt_f64(d))?;
    }
    writeln!(w, "seed,{seed}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkPrecisionRow {
    pub integrator: String,
    /// Step multiple of `Δt_e` or `a_φ`.
    pub setting: f64,
    pub adaptive: bool,
    pub rhs_evals: u64,
    pub error: f64,
    pub relative_error: f64,
    /// RHS evaluations of forward Euler at `Δt_e` over this row's; `None`
    /// without such a row.
    pub speedup: Option<f64>,
}

/// Tabulates finished runs, with speedups relative to the forward-Euler
/// run at `Δt = Δt_e`.
pub fn work_precision(runs: &[(IntegratorConfig, BenchmarkReport)]) -> Vec<WorkPrecisionRow> {
    let baseline = runs
        .iter()
        .find(|(c, _)| c.scheme == Scheme::FEuler && c.control == Control::Fixed { factor: 1.0 })
        .map(|(_, r)| r.rhs_evals as f64);
    runs.iter()
        .map(|(c, r)| {
            let (setting, adaptive) = match c.control {
                Control::Fixed { factor } => (factor, false),
                Control::Adaptive { tol } => (tol.phi_abs, true),
            };
            WorkPrecisionRow {
                integrator: c.scheme.name(),
                setting,
                adaptive,
                rhs_evals: r.rhs_evals,
                error: r.error,
                relative_error: r.relative_error(),
                speedup: baseline.map(|b| b / r.rhs_evals as f64),
            }
        })
        .collect()
}

pub fn write_work_precision<W: Write>(mut w: W, rows: &[WorkPrecisionRow]) -> io::Result<()> {
    writeln!(w, "integrator,mode,setting,rhs_evals,error,relative_error,speedup")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.integrator,
            if r.adaptive { "a_phi" } else { "dt_factor" },
            fmt_f64(r.setting),
            r.rhs_evals,
            fmt_f64(r.error),
            fmt_f64(r.relative_error),
            r.speedup.map(fmt_f64).unwrap_or_default()
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementRow {
    pub dx: f64,
    pub width: f64,
    pub error: f64,
    pub relative_error: f64,
    pub rhs_evals: u64,
}

/// Runs `case` at each spacing with `W = 3 Δx^0.4`.
pub fn refinement_study(
    case: &Case,
    levels: &[f64],
    integrator: IntegratorConfig,
    configure: impl Fn(&mut RunSpec),
) -> Result<Vec<RefinementRow>, RunError> {
    let mut rows = Vec::new();
    for &dx in levels {
        let mut spec = RunSpec::new(case.refined(dx), integrator);
        configure(&mut spec);
        let r = run(&spec, &mut ())?;
        rows.push(RefinementRow {
            dx,
            width: refinement_width(dx),
            error: r.error,
            relative_error: r.relative_error(),
            rhs_evals: r.rhs_evals,
        });
    }
    Ok(rows)
}

/// Whether errors strictly decrease from the first row to the last.
pub fn decreases_monotonically(rows: &[RefinementRow]) -> bool {
    rows.windows(2).all(|w| w[1].error < w[0].error)
}

pub fn write_refinement<W: Write>(mut w: W, rows: &[RefinementRow]) -> io::Result<()> {
    writeln!(w, "dx,width,error,relative_error,rhs_evals")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{}", fmt_f64(r.dx), fmt_f64(r.width), fmt_f64(r.error), fmt_f64(r.relative_error), r.rhs_evals)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{SingleGrainSpec, Termination};

    fn small() -> Case {
        Case::SingleGrain(SingleGrainSpec { length: 48.0, radius: 15.0, ..Default::default() })
    }

    fn short(spec: &mut RunSpec) {
        spec.termination = Termination::Fixed { end: 6.0, interval: 2.0 };
    }

    #[test]
    fn euler_row_has_unit_speedup() {
        let mut runs = Vec::new();
        for c in [IntegratorConfig::fixed(Scheme::FEuler, 1.0), IntegratorConfig::fixed(Scheme::Sts { order: 2 }, 10.0)] {
            let mut spec = RunSpec::new(small(), c);
            short(&mut spec);
            runs.push((c, run(&spec, &mut ()).unwrap()));
        }
        let rows = work_precision(&runs);
        assert_eq!(rows[0].speedup, Some(1.0));
        assert!(rows[1].speedup.unwrap() > 1.0);
        let mut buf = Vec::new();
        write_work_precision(&mut buf, &rows).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 3);
    }

    #[test]
    fn time_series_rows() {
        let mut spec = RunSpec::new(small(), IntegratorConfig::fixed(Scheme::FEuler, 1.0));
        short(&mut spec);
        let mut w = TimeSeriesWriter::new(Vec::new()).unwrap();
        let r = run(&spec, &mut w).unwrap();
        let text = String::from_utf8(w.finish().unwrap()).unwrap();
        let rows: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(rows.len() as u64, r.accepted + r.frames.len() as u64);
        let out: Vec<&&str> = rows.iter().filter(|l| l.ends_with("output")).collect();
        let t: f64 = out[1].split(',').next().unwrap().parse().unwrap();
        assert_eq!(t, 2.0);
    }

    #[test]
    fn refinement_widths_and_monotone_check() {
        let rows = refinement_study(&small(), &[1.0], IntegratorConfig::fixed(Scheme::FEuler, 1.0), short).unwrap();
        assert_eq!(rows[0].width, 3.0);
        let mk = |e| RefinementRow { dx: 1.0, width: 3.0, error: e, relative_error: e, rhs_evals: 0 };
        assert!(decreases_monotonically(&[mk(3.0), mk(2.0), mk(1.0)]));
        assert!(!decreases_monotonically(&[mk(3.0), mk(1.0), mk(2.0)]));
    }
}

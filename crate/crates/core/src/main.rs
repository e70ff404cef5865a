use clap::{Args, Parser, Subcommand};
use phasefield_lab::benchmarks::{
    decreases_monotonically, refinement_study, run, work_precision, write_refinement, write_summary, write_work_precision,
    BenchmarkReport, IntegratorConfig, TimeSeriesWriter,
};
use phasefield_lab::config::RunConfig;
use std::error::Error;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

/// Phase-field integrator benchmarks.
#[derive(Parser)]
#[command(name = "pflab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one benchmark with one integrator.
    Run(Common),
    /// Run a benchmark with every standard integrator configuration and
    /// write a work-precision table.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Only configurations whose scheme is listed (e.g. feuler,sts2).
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
    /// Repeat a benchmark over grid spacings with W = 3 dx^0.4.
    Refine {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "1,0.5,0.25")]
        levels: Vec<f64>,
    },
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<String>,
    #[arg(long)]
    benchmark: Option<String>,
    #[arg(long)]
    integrator: Option<String>,
    /// Fixed step as a multiple of the forward-Euler limit.
    #[arg(long)]
    dt_factor: Option<f64>,
    #[arg(long)]
    tol_phi_abs: Option<f64>,
    #[arg(long)]
    tol_phi_rel: Option<f64>,
    #[arg(long)]
    tol_c_abs: Option<f64>,
    #[arg(long)]
    tol_c_rel: Option<f64>,
    #[arg(long)]
    dx: Option<f64>,
    #[arg(long)]
    end_time: Option<f64>,
    #[arg(long)]
    output_interval: Option<f64>,
    /// Abort after this many right-hand-side evaluations.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    out: Option<String>,
    /// Write the fields at every output time.
    #[arg(long)]
    dump_fields: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Any configuration key, as `key=value`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

impl Common {
    fn config(&self) -> Result<RunConfig, Box<dyn Error>> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
            cfg.apply_text(&text)?;
        }
        let mut set = |k: &str, v: Option<String>| -> Result<(), Box<dyn Error>> {
            if let Some(v) = v {
                cfg.set(k, &v)?;
            }
            Ok(())
        };
        set("benchmark", self.benchmark.clone())?;
        set("integrator", self.integrator.clone())?;
        set("dt_factor", self.dt_factor.map(|v| v.to_string()))?;
        set("tol_phi_abs", self.tol_phi_abs.map(|v| v.to_string()))?;
        set("tol_phi_rel", self.tol_phi_rel.map(|v| v.to_string()))?;
        set("tol_c_abs", self.tol_c_abs.map(|v| v.to_string()))?;
        set("tol_c_rel", self.tol_c_rel.map(|v| v.to_string()))?;
        set("dx", self.dx.map(|v| v.to_string()))?;
        set("end_time", self.end_time.map(|v| v.to_string()))?;
        set("output_interval", self.output_interval.map(|v| v.to_string()))?;
        set("budget", self.budget.map(|v| v.to_string()))?;
        set("out", self.out.clone())?;
        set("seed", self.seed.map(|v| v.to_string()))?;
        if self.dump_fields {
            set("dump_fields", Some("true".into()))?;
        }
        for kv in &self.sets {
            let (k, v) = kv.split_once('=').ok_or_else(|| format!("--set expects key=value, got `{kv}`"))?;
            cfg.set(k.trim(), v.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn print_report(r: &BenchmarkReport) {
    println!(
        "{:<8} {:<24} evals {:>9}  rejected {:>5.1}%  measured {:.6e}  reference {:.6e}  rel. error {:.4e}{}",
        r.case,
        r.integrator,
        r.rhs_evals,
        100.0 * r.rejected_fraction(),
        r.measured,
        r.reference,
        r.relative_error(),
        match r.converged {
            Some(false) => "  (equilibrium not reached)",
            _ => "",
        }
    );
}

fn create(path: &Path) -> Result<BufWriter<File>, Box<dyn Error>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| format!("{}: {e}", path.display()))?))
}

fn run_one(cfg: &RunConfig) -> Result<BenchmarkReport, Box<dyn Error>> {
    let spec = cfg.run_spec()?;
    fs::create_dir_all(&cfg.out)?;
    fs::write(cfg.out.join("config.txt"), cfg.to_string())?;
    let mut ts = TimeSeriesWriter::new(create(&cfg.out.join("timeseries.csv"))?)?;
    if cfg.dump_fields {
        let dir = cfg.out.join("fields");
        fs::create_dir_all(&dir)?;
        ts = ts.with_dumps(dir);
    }
    let report = run(&spec, &mut ts)?;
    ts.finish()?;
    let mut w = create(&cfg.out.join("summary.csv"))?;
    write_summary(&mut w, &report, cfg.seed)?;
    w.flush()?;
    Ok(report)
}

fn sweep(cfg: &RunConfig, only: &[String]) -> Result<(), Box<dyn Error>> {
    let base = cfg.run_spec()?;
    fs::create_dir_all(&cfg.out)?;
    let mut runs = Vec::new();
    for preset in IntegratorConfig::presets() {
        let name = preset.scheme.name();
        if !only.is_empty() && !only.iter().any(|o| o.eq_ignore_ascii_case(&name)) {
            continue;
        }
        let mut spec = base.clone();
        spec.integrator = preset;
        match run(&spec, &mut ()) {
            Ok(r) => {
                print_report(&r);
                runs.push((preset, r));
            }
            Err(e) => eprintln!("{}: {e}", preset.label()),
        }
    }
    let rows = work_precision(&runs);
    let mut w = create(&cfg.out.join("work_precision.csv"))?;
    write_work_precision(&mut w, &rows)?;
    w.flush()?;
    write_work_precision(std::io::stdout().lock(), &rows)?;
    if runs.is_empty() {
        return Err("no configuration completed".into());
    }
    Ok(())
}

fn refine(cfg: &RunConfig, levels: &[f64]) -> Result<(), Box<dyn Error>> {
    let base = cfg.run_spec()?;
    fs::create_dir_all(&cfg.out)?;
    let rows = refinement_study(&base.case, levels, base.integrator, |spec| {
        if cfg.end_time.is_some() || cfg.output_interval.is_some() {
            spec.termination = base.termination;
        }
        spec.budget = base.budget;
    })?;
    let mut w = create(&cfg.out.join("refinement.csv"))?;
    write_refinement(&mut w, &rows)?;
    w.flush()?;
    write_refinement(std::io::stdout().lock(), &rows)?;
    println!("monotone decrease: {}", decreases_monotonically(&rows));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(c) => c.config().and_then(|cfg| run_one(&cfg)).map(|r| print_report(&r)),
        Command::Sweep { common, only } => common.config().and_then(|cfg| sweep(&cfg, only)),
        Command::Refine { common, levels } => common.config().and_then(|cfg| refine(&cfg, levels)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

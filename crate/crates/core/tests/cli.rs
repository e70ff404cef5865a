use phasefield_lab::dump::FieldDump;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pflab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pflab")).args(args).output().unwrap()
}

fn small_grain(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "run",
        "--benchmark",
        "single-grain",
        "--set",
        "end_time=4",
        "--output-interval",
        "1",
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    pflab(&args)
}

fn summary_value(dir: &Path, key: &str) -> String {
    let text = fs::read_to_string(dir.join("summary.csv")).unwrap();
    text.lines().find_map(|l| l.strip_prefix(&format!("{key},"))).unwrap().to_string()
}

#[test]
fn rerun_is_bit_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        let out = small_grain(d, &["--integrator", "sts2", "--tol-phi-abs", "1e-3", "--seed", "7"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let ta = fs::read(a.join("timeseries.csv")).unwrap();
    assert_eq!(ta, fs::read(b.join("timeseries.csv")).unwrap());
    assert_eq!(fs::read(a.join("summary.csv")).unwrap(), fs::read(b.join("summary.csv")).unwrap());
    assert_eq!(summary_value(&a, "seed"), "7");
}

#[test]
fn rows_are_accepted_steps_plus_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = small_grain(tmp.path(), &["--integrator", "feuler", "--dt-factor", "0.9"]);
    assert!(out.status.success());
    let text = fs::read_to_string(tmp.path().join("timeseries.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "time,observable,energy,dt,accepted,kind");
    let rows: Vec<&str> = lines.collect();
    let accepted: usize = summary_value(tmp.path(), "accepted").parse().unwrap();
    let outputs = rows.iter().filter(|r| r.ends_with(",output")).count();
    assert_eq!(outputs, 5);
    assert_eq!(rows.len(), accepted + outputs);
    // 17 significant digits
    let t = rows[1].split(',').next().unwrap();
    assert_eq!(t.split('e').next().unwrap().replace(['.', '-'], "").len(), 17);
    let evals: u64 = summary_value(tmp.path(), "rhs_evals").parse().unwrap();
    assert_eq!(evals as usize, accepted);
}

#[test]
fn config_file_and_field_dumps() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    let out_dir = tmp.path().join("out");
    fs::write(&cfg, format!("benchmark = stefan\nintegrator = sts2\nend_time = 50\noutput_interval = 25\nout = {}\n", out_dir.display()))
        .unwrap();
    let out = pflab(&["run", "--config", cfg.to_str().unwrap(), "--dump-fields"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let recorded = fs::read_to_string(out_dir.join("config.txt")).unwrap();
    assert!(recorded.contains("benchmark = stefan") && recorded.contains("dump_fields = true"));
    let last = FieldDump::read(fs::read(out_dir.join("fields/fields_00002.txt")).unwrap().as_slice()).unwrap();
    assert_eq!(last.time, 50.0);
    assert_eq!(last.extents, [1800]);
    let c = last.field("c").unwrap();
    assert!(c[0] > 0.9 && c[1799] < 0.3);
}

#[test]
fn invalid_input_exits_nonzero() {
    let out = pflab(&["run", "--benchmark", "cube"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown benchmark"));
    let out = pflab(&["run", "--dt-factor", "-1"]);
    assert!(!out.status.success());
    let out = pflab(&["run", "--set", "nonsense"]);
    assert!(!out.status.success());
}

#[test]
fn blow_up_reports_the_step() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_str().unwrap();
    let out = pflab(&[
        "run", "--benchmark", "stefan", "--integrator", "feuler", "--dt-factor", "10", "--end-time", "2000", "--out", dir,
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("step "), "{err}");
}

#[test]
fn sweep_and_refine_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_str().unwrap();
    let out = pflab(&["sweep", "--benchmark", "single-grain", "--set", "end_time=2", "--only", "feuler,sts2", "--out", dir]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(tmp.path().join("work_precision.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 2 + 7);
    let fe = table.lines().find(|l| l.starts_with("feuler,dt_factor,1.0")).unwrap();
    assert!(fe.ends_with(",1.0000000000000000e0"));

    let out = pflab(&[
        "refine",
        "--benchmark",
        "stefan",
        "--levels",
        "2,1",
        "--integrator",
        "sts2",
        "--set",
        "end_time=20",
        "--out",
        dir,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(tmp.path().join("refinement.csv")).unwrap();
    let w: f64 = table.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((w - 3.0 * 2f64.powf(0.4)).abs() < 1e-15);
    assert!(String::from_utf8_lossy(&out.stdout).contains("monotone decrease"));
}

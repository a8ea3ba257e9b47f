use std::fs;
use std::process::{Command, Output};

fn mhd_rv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mhd-rv")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_writes_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = mhd_rv(&["run", "--problem", "smooth_wave", "--cells", "6", "--tfinal", "0.02", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("relative L1"));
    for f in ["timeseries.csv", "errors.csv", "final_fields.csv", "final_fields.vtk"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let ts = fs::read_to_string(dir.path().join("timeseries.csv")).unwrap();
    assert!(ts.starts_with("step,t,tau,min_rho,min_p,max_mu,div_b"));
    // 17 significant digits
    let t = ts.lines().nth(1).unwrap().split(',').nth(1).unwrap();
    assert_eq!(t.split('e').next().unwrap().replace(['.', '-'], "").len(), 17);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "problem = \"brio_wu\"\ndegree = 2\ncells = [50]\ntfinal = 0.01\n").unwrap();
    let o = mhd_rv(&["run", "--config", cfg.to_str().unwrap(), "--degree", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("brio_wu P1 cells=[50]"), "{}", stdout(&o));

    fs::write(&cfg, "problem = \"brio_wu\"\nresolution = 3\n").unwrap();
    assert!(!mhd_rv(&["run", "--config", cfg.to_str().unwrap()]).status.success());
}

#[test]
fn gamma_override_needs_the_flag() {
    let args = ["run", "--problem", "brio_wu", "--cells", "20", "--tfinal", "0.001", "--gamma", "1.4"];
    let o = mhd_rv(&args);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("gamma"));
    let mut with_flag = args.to_vec();
    with_flag.push("--unsafe-override");
    assert!(mhd_rv(&with_flag).status.success());
}

#[test]
fn aborted_run_keeps_the_last_good_step() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    // the vortex core is nearly at vacuum pressure; without viscosity it fails at once
    let o = mhd_rv(&["run", "--problem", "smooth_vortex", "--cells", "20", "--stab", "none", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("run aborted"));
    let vtk = fs::read_to_string(dir.path().join("final_fields.vtk")).unwrap();
    assert!(vtk.contains("last good step"));
}

#[test]
fn sweep_writes_a_convergence_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = mhd_rv(&[
        "sweep", "--problem", "smooth_wave", "--stab", "none", "--tfinal", "0.01", "--cells-list", "8,16", "--out", out,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    let rho: Vec<&str> = csv.lines().filter(|l| l.contains(",rho,")).collect();
    assert_eq!(rho.len(), 2);
    let rate: f64 = rho[1].split(',').nth(5).unwrap().parse().unwrap();
    assert!((rate - 2.0).abs() < 0.3, "{rate}");
}

#[test]
fn check_tables_reports_the_count() {
    let o = mhd_rv(&["check-tables"]);
    let text = stdout(&o);
    let summary = text.lines().last().unwrap();
    assert!(summary.ends_with("printed rates reproduced within 0.01"), "{summary}");
    assert_eq!(o.status.success(), !text.contains("FAIL"));
}

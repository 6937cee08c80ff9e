use std::path::Path;
use std::process::{Command, Output};

use trm_cli::output::parse_summary;

const SMALL: &str = "seed = 3\n[grid]\nn = 12\n[flow]\nnu = 0.05\nchi = 0.3\n[filter]\ndelta = 0.5\nN = 1\n\
                     [time]\nt_end = 0.4\n[output]\ninterval = 0.1\ncheckpoint = true\n";

fn trm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trm")).args(args).output().unwrap()
}

fn run_config(dir: &Path, name: &str, text: &str, out: &str, extra: &[&str]) -> Output {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    let out_dir = dir.join(out);
    let mut args = vec!["run", "--config", path.to_str().unwrap(), "--output", out_dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    trm(&args)
}

fn summary_value(dir: &Path, key: &str) -> String {
    let text = std::fs::read_to_string(dir.join("summary.txt")).unwrap();
    parse_summary(&text).into_iter().find(|(k, _)| k == key).unwrap().1
}

#[test]
fn run_writes_csv_summary_and_checkpoint() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_config(tmp.path(), "a.toml", SMALL, "a", &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("a/energy.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("# trm ") && lines[0].contains("config_hash="));
    assert_eq!(lines[1], "t,kinetic_energy,eps0,epsM,eps_total,work_rate,budget_residual,div_max");
    assert_eq!(lines.len(), 2 + 5);
    assert!(tmp.path().join("a/final.ckpt").exists());
    assert_eq!(summary_value(&tmp.path().join("a"), "records"), "5");
}

#[test]
fn invalid_configs_exit_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("missing_nu", SMALL.replace("nu = 0.05\n", "")),
        ("negative_chi", SMALL.replace("chi = 0.3", "chi = -1.0")),
        ("odd_grid", SMALL.replace("n = 12", "n = 13")),
        ("order_too_high", SMALL.replace("N = 1", "N = 9")),
        ("unknown_key", SMALL.replace("[flow]\n", "[flow]\nviscosity = 1.0\n")),
        ("bad_interval", SMALL.replace("[time]\n", "[time]\ndt = 0.03\n")),
    ];
    for (name, text) in cases {
        let out = run_config(tmp.path(), &format!("{name}.toml"), &text, name, &[]);
        assert_eq!(out.status.code(), Some(2), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!tmp.path().join(name).join("energy.csv").exists(), "{name}");
    }
}

#[test]
fn zero_duration_reports_initial_statistics() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SMALL.replace("t_end = 0.4", "t_end = 0.0");
    let out = run_config(tmp.path(), "z.toml", &text, "z", &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("z");
    let csv = std::fs::read_to_string(dir.join("energy.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert_eq!(summary_value(&dir, "converged"), "false");
    let u: f64 = summary_value(&dir, "U").parse().unwrap();
    assert!((u - 1.0).abs() < 1e-12, "U = {u}");
}

#[test]
fn resume_continues_from_checkpoint() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_config(tmp.path(), "first.toml", SMALL, "first", &[]);
    assert!(out.status.success());
    let ckpt = tmp.path().join("first/final.ckpt");
    let second = SMALL.replace("t_end = 0.4", "t_end = 0.8");
    let out = run_config(tmp.path(), "second.toml", &second, "second", &["--resume", ckpt.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let direct = run_config(tmp.path(), "direct.toml", &second, "direct", &[]);
    assert!(direct.status.success());
    let last = |dir: &str| {
        let csv = std::fs::read_to_string(tmp.path().join(dir).join("energy.csv")).unwrap();
        let row = csv.lines().last().unwrap().to_string();
        row.split(',').take(2).map(|v| v.parse::<f64>().unwrap()).collect::<Vec<_>>()
    };
    let (resumed, straight) = (last("second"), last("direct"));
    assert_eq!(resumed[0], 0.8);
    assert!((resumed[1] - straight[1]).abs() <= 1e-12 * straight[1]);
}

#[test]
fn missing_checkpoint_is_a_runtime_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_config(tmp.path(), "a.toml", SMALL, "a", &["--resume", "/nonexistent/file.ckpt"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_writes_one_row_per_chi() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("s.toml");
    std::fs::write(&path, SMALL).unwrap();
    let dir = tmp.path().join("sweep");
    let out = trm(&["sweep", "--config", path.to_str().unwrap(), "--chi", "0,0.5,2", "--output", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(dir.join("sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 2 + 3);
    for i in 0..3 {
        assert!(dir.join(format!("chi_{i:02}/energy.csv")).exists());
    }
    let unsorted = trm(&["sweep", "--config", path.to_str().unwrap(), "--chi", "1,0.5"]);
    assert_eq!(unsorted.status.code(), Some(2));
}

#[test]
fn chi_range_prints_both_mesh_dependent_forms() {
    let out = trm(&["chi-range", "--u", "1", "--l", "1", "--re", "1e4", "--mesh-dependent"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("mode=mesh_dependent_published"));
    assert!(text.contains("mode=mesh_dependent_derived"));
    assert!(text.contains("discrepancy:"));

    let out = trm(&["chi-range", "--u", "1", "--l", "1", "--re", "-3", "--delta", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn quick_verify_passes() {
    let out = trm(&["verify", "--quick"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("grid=16^3 fields=10"));
    assert!(!text.contains("FAIL"));
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BASE: &str = r#"
seed = 7

[material.constants]
c11 = 160.0
c13 = 6.5
c33 = 14.0
c55 = 7.0
rho = 1200.0

[grid]
fh_min = 0.05
fh_max = 4.098
points = 40
order = 14
"#;

const PIPELINE: &str = r#"
seed = 11

[material.constants]
c11 = 28.1
c13 = 7.8
c33 = 16.7
c55 = 8.2
rho = 1200.0

[grid]
fh_min = 0.2
fh_max = 4.098
points = 30

[synth]
n_x = 64
n_t = 2048

[sampler]
samples = 300
warmup = 200

[summary]
thin = 20
ensemble_points = 8
pairs = [["c11", "rho"]]
"#;

fn lambid(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lambid"))
        .arg(cmd)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn solve_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let first = lambid("solve", &cfg, &a, &[]);
    assert!(first.status.success(), "{}", stderr(&first));
    assert!(String::from_utf8_lossy(&first.stdout).contains("order 14"));
    assert!(lambid("solve", &cfg, &b, &[]).status.success());
    let (x, y) = (fs::read(a.join("curves.csv")).unwrap(), fs::read(b.join("curves.csv")).unwrap());
    assert!(x.len() > 1000);
    assert_eq!(x, y);
    assert!(a.join("solve.resolved.toml").exists());
}

#[test]
fn inverted_band_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &BASE.replace("fh_min = 0.05", "fh_min = 5.0"));
    let o = lambid("solve", &cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).starts_with("error[config]"), "{}", stderr(&o));
}

#[test]
fn unknown_config_key_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{BASE}\n[plate]\nthickness = 16\n"));
    let o = lambid("solve", &cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("line"), "{}", stderr(&o));
}

#[test]
fn sensitivity_orders_the_modes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE);
    let o = lambid("sensitivity", &cfg, dir.path(), &["--param", "c13"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("sensitivity.csv")).unwrap();
    let shift = |mode: &str| -> f64 {
        text.lines()
            .find(|l| l.starts_with(&format!("c13,{mode},")))
            .and_then(|l| l.split(',').nth(2))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!(shift("A0") < shift("S0"));
}

#[test]
fn zero_perturbation_gives_zero_shift() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{BASE}\n[sensitivity]\nperturbation = 0.0\n"));
    let o = lambid("sensitivity", &cfg, dir.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("sensitivity.csv")).unwrap();
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        for v in line.split(',').skip(2) {
            assert_eq!(v.parse::<f64>().unwrap(), 0.0, "{line}");
        }
    }
}

#[test]
fn unknown_parameter_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE);
    let o = lambid("sensitivity", &cfg, dir.path(), &["--param", "c99"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn silent_wavefield_is_a_signal_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE);
    let field = lambid_core::wavefield::TXField::zeros(16, 64, 1e-6, 1e-3).unwrap();
    lambid::formats::write_field(dir.path(), "wavefield", &field, "arbitrary").unwrap();
    let o = lambid("extract", &cfg, dir.path(), &[]);
    assert!(!o.status.success());
    assert!(stderr(&o).starts_with("error[signal]"), "{}", stderr(&o));
}

#[test]
fn identify_needs_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &BASE.replace("seed = 7", ""));
    let o = lambid("identify", &cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("seed"), "{}", stderr(&o));
}

#[test]
fn short_chain_cannot_be_summarized() {
    let dir = tempfile::tempdir().unwrap();
    let text = PIPELINE.replace("samples = 300", "samples = 10").replace("warmup = 200", "warmup = 0\nuse_likelihood = false");
    let cfg = write_config(dir.path(), &text);
    fs::write(dir.path().join("observations.csv"), "mode,omega_rad_s,k_rad_m\nA0,100000,200\n").unwrap();
    let o = lambid("identify", &cfg, dir.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = lambid("summarize", &cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(10));
    assert!(stderr(&o).starts_with("error[analysis]") && stderr(&o).contains("too few samples"), "{}", stderr(&o));
}

#[test]
fn pipeline_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), PIPELINE);
    let out = dir.path();
    for cmd in ["synth", "extract", "identify", "summarize"] {
        let o = lambid(cmd, &cfg, out, &[]);
        assert!(o.status.success(), "{cmd}: {}", stderr(&o));
    }
    for f in ["wavefield.toml", "wavefield.bin", "truth_curves.csv", "observations.csv", "chain_0.csv", "summary.csv", "ensemble.csv", "ensemble_band.csv", "density_c11_rho.csv"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().filter(|l| !l.starts_with('#')).count(), 7);

    let again = dir.path().join("again");
    fs::create_dir_all(&again).unwrap();
    let o = lambid("identify", &cfg, &again, &["--chains", "1"]);
    // observations are looked up in the output directory
    assert!(!o.status.success());
    fs::copy(out.join("observations.csv"), again.join("observations.csv")).unwrap();
    assert!(lambid("identify", &cfg, &again, &[]).status.success());
    assert_eq!(fs::read(out.join("chain_0.csv")).unwrap(), fs::read(again.join("chain_0.csv")).unwrap());
}

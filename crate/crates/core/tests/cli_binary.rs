use std::path::Path;
use std::process::{Command, Output};

use pdcsim::cli::DEFAULT_CONFIG;

fn pdcsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdcsim")).args(args).output().unwrap()
}

/// Small, fast variant of the default config.
fn write_config(dir: &Path, seed: u64) -> String {
    let text = DEFAULT_CONFIG
        .replace("seed = 1 ", &format!("seed = {seed} "))
        .replace("samples_per_pixel = 64", "samples_per_pixel = 2")
        .replace("max_qpm_order = 7", "max_qpm_order = 1")
        .replace("n_x = 256", "n_x = 24")
        .replace("n_y = 128", "n_y = 8")
        .replace(
            "polarization_pairs = [\"ee\", \"oo\", \"oe\", \"eo\"]",
            "polarization_pairs = [\"ee\"]",
        )
        .replace("angle_deg = 0.2", "angle_deg = 0.0")
        .replace("wavelength_nm = 660.7", "wavelength_nm = 660.0");
    let out = dir.join(format!("out{seed}"));
    let text = text.replace(
        "output_dir = \"pdcsim-out\"",
        &format!("output_dir = {:?}", out.display().to_string()),
    );
    let path = dir.join(format!("run{seed}.toml"));
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn hash_in(path: &Path) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    let line = text.lines().find(|l| l.contains("config_hash")).unwrap();
    line.rsplit([',', '"', ' '])
        .find(|s| s.len() == 64)
        .unwrap()
        .to_string()
}

#[test]
fn simulate_writes_hashed_outputs_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 1);
    let run = |sub: &str| {
        let o = pdcsim(&["simulate", "--config", &cfg, "--output-dir", sub]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        String::from_utf8(o.stdout).unwrap()
    };
    let a_dir = dir.path().join("a");
    let b_dir = dir.path().join("b");
    let listed = run(a_dir.to_str().unwrap());
    run(b_dir.to_str().unwrap());
    for name in ["counts.csv", "stderr.csv", "metadata.toml"] {
        for tag in ["down", "up"] {
            assert!(listed.contains(&format!("{tag}_{name}")), "{listed}");
        }
    }
    let hash = hash_in(&a_dir.join("down_counts.csv"));
    for f in [
        "down_stderr.csv",
        "up_counts.csv",
        "down_metadata.toml",
        "down_cut_h_0.000deg.csv",
    ] {
        assert_eq!(hash_in(&a_dir.join(f)), hash, "{f}");
    }
    // the output directory override is part of the hashed config
    assert_ne!(hash, hash_in(&b_dir.join("down_counts.csv")));
    let a = std::fs::read_to_string(a_dir.join("down_stderr.csv")).unwrap();
    let b = std::fs::read_to_string(b_dir.join("down_stderr.csv")).unwrap();
    let body = |s: &str| {
        s.lines()
            .filter(|l| !l.starts_with('#'))
            .map(String::from)
            .collect::<Vec<_>>()
    };
    assert_eq!(body(&a), body(&b));
    assert!(a_dir.join("down.pgm").exists());
}

#[test]
fn invalid_config_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 2);
    let text = std::fs::read_to_string(&cfg)
        .unwrap()
        .replace("max_qpm_order = 1", "max_qpm_order = 4");
    std::fs::write(&cfg, text).unwrap();
    let o = pdcsim(&["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("max_qpm_order"));

    let o = pdcsim(&["simulate", "--config", &cfg, "--orders", "3", "--samples", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("samples_per_pixel"));
}

#[test]
fn missing_file_exits_with_code_four() {
    let o = pdcsim(&["simulate", "--config", "/nonexistent/run.toml"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn compare_and_cut_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let one = write_config(dir.path(), 3);
    let two = write_config(dir.path(), 4);
    for cfg in [&one, &two] {
        let o = pdcsim(&["simulate", "--config", cfg, "--processes", "down"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = dir.path().join("out3/down_counts.csv");
    let b = dir.path().join("out4/down_counts.csv");
    let (a, b) = (a.to_str().unwrap(), b.to_str().unwrap());

    let o = pdcsim(&["compare", a, a]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("rms_residual = 0.0"));

    let o = pdcsim(&["compare", a, b]);
    assert_eq!(o.status.code(), Some(2), "different configs must not compare silently");
    let o = pdcsim(&["compare", a, b, "--allow-hash-mismatch"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let profile = dir.path().join("cut.csv");
    let o = pdcsim(&[
        "cut",
        a,
        "--axis",
        "horizontal",
        "--at",
        "0.0",
        "-o",
        profile.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&profile).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 24);
}

#[test]
fn printed_config_is_the_bundled_default() {
    let o = pdcsim(&["print-config"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text, DEFAULT_CONFIG);
    pdcsim::cli::SimulationConfig::from_toml(&text).unwrap();
}

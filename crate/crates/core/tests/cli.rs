use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_plexdyn");
const COATED: &str = include_str!("../presets/coated-paper.toml");

fn plexdyn(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn out_dir(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_owned()
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Data rows of a CSV file, without the provenance comments.
fn data_lines(path: impl AsRef<Path>) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).map(str::to_owned).collect()
}

#[test]
fn identical_configs_give_identical_files() {
    let dir = TempDir::new().unwrap();
    for run in ["a", "b"] {
        let o = plexdyn(&["--preset", "coated-paper", "--out", &out_dir(&dir, run), "kernel"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for file in ["kernel.csv", "kernel.json"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between runs");
    }
    let text = fs::read_to_string(dir.path().join("a/kernel.csv")).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with(&format!("# plexdyn {} config-sha256=", env!("CARGO_PKG_VERSION"))));
    assert_eq!(header.rsplit('=').next().unwrap().len(), 64);
    assert_eq!(text.lines().nth(1), Some("omega_eV,K_meV"));
}

#[test]
fn coated_kernel_peaks_at_geometric_mode() {
    let dir = TempDir::new().unwrap();
    let o = plexdyn(&["--preset", "coated-paper", "--out", &out_dir(&dir, "k"), "kernel"]);
    assert!(o.status.success());
    let k = json(dir.path().join("k/kernel.json"));
    assert!((k["argmax_ev"].as_f64().unwrap() - 3.14).abs() < 0.01);
    assert_eq!(k["scenario"], "coated-paper");
}

#[test]
fn extinction_maxima_of_presets() {
    let dir = TempDir::new().unwrap();
    let peaks = |preset: &str| -> Vec<(f64, f64)> {
        let o = plexdyn(&["--preset", preset, "--out", &out_dir(&dir, preset), "xsec"]);
        assert!(o.status.success(), "{}", stderr(&o));
        json(dir.path().join(preset).join("xsec_peaks.json"))["extinction_peaks"]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| (p["omega"].as_f64().unwrap(), p["value"].as_f64().unwrap()))
            .collect()
    };
    let coated = peaks("coated-paper");
    assert!(coated.len() >= 3);
    assert!(coated[2].1 > 0.2 * coated[0].1, "three prominent maxima: {coated:?}");
    let bare = peaks("bare-paper");
    assert!((bare[0].0 - 3.07).abs() < 0.02);
    assert!(bare[1].1 < 0.2 * bare[0].1);
    let header = data_lines(dir.path().join("bare-paper/xsec.csv"));
    assert_eq!(header[0], "omega_eV,sigma_ext_nm2,sigma_sca_nm2");
}

#[test]
fn missing_shell_block_equals_zero_thickness() {
    let dir = TempDir::new().unwrap();
    let no_shell =
        COATED.split("[materials.shell]").next().unwrap().to_owned() + &COATED[COATED.find("[geometry]").unwrap()..];
    let zero = COATED.replace("shell_thickness_nm = 2.0", "shell_thickness_nm = 0.0");
    let mut rows = Vec::new();
    for (name, text) in [("no-shell", no_shell), ("zero", zero)] {
        let cfg = dir.path().join(format!("{name}.toml"));
        fs::write(&cfg, text).unwrap();
        let out = out_dir(&dir, name);
        let o = plexdyn(&["--config", cfg.to_str().unwrap(), "--out", &out, "xsec"]);
        assert!(o.status.success(), "{}", stderr(&o));
        rows.push(data_lines(Path::new(&out).join("xsec.csv")));
    }
    assert_eq!(rows[0], rows[1]);
}

#[test]
fn dynamics_from_coated_fixture_reproduces_pole_table() {
    let dir = TempDir::new().unwrap();
    let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/table4_coated.json");
    let out = out_dir(&dir, "dyn");
    let o = plexdyn(&["--preset", "coated-paper", "--out", &out, "dynamics", "--fit", fixture, "--omega-e", "3.1441"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let poles = json(Path::new(&out).join("poles.json"));
    let rows = poles["poles"].as_array().unwrap();
    let get = |m: usize, k: &str| rows[m][k].as_f64().unwrap();
    assert!((get(0, "gamma_meV") - 14.4).abs() < 1.0);
    assert!((get(0, "omega_meV").abs() - 145.0).abs() < 1.0);
    for (m, r) in [0.45, 0.29, 0.25].into_iter().enumerate() {
        assert!((get(m, "abs_R") - r).abs() < 0.02);
    }
    assert_eq!(json(Path::new(&out).join("regime.json"))["regime"], "MM-SC");
    let trace = data_lines(Path::new(&out).join("trace.csv"));
    assert_eq!(trace[0], "t_fs,re,im,population");
    assert_eq!(trace.len(), 10_002);
    for file in ["coherence.csv", "stationary.csv"] {
        assert_eq!(data_lines(Path::new(&out).join(file)).len(), 1_702);
    }
}

#[test]
fn coated_sweep_collapses_deepest_at_geometric_mode() {
    let dir = TempDir::new().unwrap();
    let out = out_dir(&dir, "sweep");
    let o = plexdyn(&["--preset", "coated-paper", "--out", &out, "sweep"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = json(Path::new(&out).join("sweep_summary.json"))["rows"].as_array().unwrap().clone();
    assert_eq!(rows.len(), 111);
    let (we, t, p) = rows
        .iter()
        .filter(|r| r["omega_e"].as_f64().unwrap() <= 3.3)
        .map(|r| {
            (
                r["omega_e"].as_f64().unwrap(),
                r["first_minimum_fs"].as_f64().unwrap(),
                r["first_minimum_population"].as_f64().unwrap(),
            )
        })
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .unwrap();
    assert!((we - 3.14).abs() <= 0.03, "deepest collapse at {we} eV");
    assert!(t < 10.0 && p < 0.01);
    let map = data_lines(Path::new(&out).join("population_map.csv"));
    assert_eq!(map.len(), 112);
    assert_eq!(map[1].split(',').count(), 1002);
}

#[test]
fn config_errors_exit_with_one_and_name_the_line() {
    let dir = TempDir::new().unwrap();
    let cases = [
        (COATED.replace("gap_nm = 3.0", "gap_nm = 3.0\ngap = 1.0"), "gap"),
        (COATED.replace("core_radius_nm = 20.0", "core_radius_nm = -20.0"), "line 17"),
        (COATED.replace("gap_nm = 3.0", "gap_nm = 1.5"), "emitter.gap_nm"),
    ];
    for (i, (text, needle)) in cases.iter().enumerate() {
        let cfg = dir.path().join(format!("bad{i}.toml"));
        fs::write(&cfg, text).unwrap();
        let o = plexdyn(&["--config", cfg.to_str().unwrap(), "xsec"]);
        assert_eq!(o.status.code(), Some(1));
        assert!(stderr(&o).contains(needle), "{needle:?} missing from {}", stderr(&o));
    }
    assert_eq!(plexdyn(&["xsec"]).status.code(), Some(1));
    assert_eq!(plexdyn(&["--preset", "nope", "xsec"]).status.code(), Some(1));
    assert_eq!(plexdyn(&["--preset", "bare-paper", "--nmax", "0", "xsec"]).status.code(), Some(1));
    assert_eq!(plexdyn(&["--frobnicate"]).status.code(), Some(1));
}

#[test]
fn numerical_failures_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let coarse = dir.path().join("coarse.toml");
    fs::write(&coarse, COATED.replace("n_max = 60", "n_max = 60\nt_step = 0.05")).unwrap();
    let o = plexdyn(&["--config", coarse.to_str().unwrap(), "--out", &out_dir(&dir, "o"), "oracle"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("oracle"));

    // One term with A = B²/4 at zero detuning gives a double pole.
    let degenerate = dir.path().join("degenerate.json");
    fs::write(&degenerate, r#"[{"j": 1, "Omega_eV": 3.0, "B_eV": 0.02, "A_meV2": 100.0}]"#).unwrap();
    let unit = dir.path().join("unit.toml");
    fs::write(&unit, COATED.replace("\"two-pi\"", "\"unit\"")).unwrap();
    let o = plexdyn(&[
        "--config",
        unit.to_str().unwrap(),
        "--out",
        &out_dir(&dir, "d"),
        "dynamics",
        "--fit",
        degenerate.to_str().unwrap(),
        "--omega-e",
        "3.0",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("degenerate"));
}

#[test]
fn validate_subcommand_reports_and_sets_exit_code() {
    let o = plexdyn(&["validate", "--criterion", "2", "--criterion", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("[PASS] criterion  2"));
    assert!(text.contains("2 of 2 criteria passed"));
    assert_eq!(plexdyn(&["validate", "--criterion", "42"]).status.code(), Some(1));
}

#[test]
fn show_prints_a_loadable_scenario() {
    let dir = TempDir::new().unwrap();
    let o = plexdyn(&["--preset", "bare-paper", "show"]);
    assert!(o.status.success());
    let cfg = dir.path().join("shown.toml");
    fs::write(&cfg, &o.stdout).unwrap();
    let again = plexdyn(&["--config", cfg.to_str().unwrap(), "show"]);
    assert_eq!(o.stdout, again.stdout);
}

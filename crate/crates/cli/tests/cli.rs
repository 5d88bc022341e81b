use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use apwt::apwf::{self, ApwfFile};
use apwt::lattice::{forward_fourier, inverse_fourier, light_cone_bins};
use apwt::{BoundarySignal, Complex64, Grid2D, Sector, Spectrum};
use serde_json::Value;
use sha2::{Digest, Sha256};

fn apwt() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_apwt"));
    cmd.env_remove("APWT_THREADS");
    cmd
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn write_signal(path: &Path, s: &BoundarySignal) {
    apwf::encode_signal(s).write_path(path).unwrap();
}

fn read_field(path: &Path) -> (f64, Option<Sector>, BoundarySignal) {
    apwf::decode_field(&ApwfFile::read_path(path).unwrap()).unwrap()
}

fn manifest(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn peaks(path: &Path) -> Vec<Vec<f64>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("a,phi,omega,v_over_c,height"));
    lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect()
}

fn single_source_config(dir: &Path, name: &str, phi: f64) -> PathBuf {
    let config = serde_json::json!({
        "groups": [{ "omega": 1.0, "phi_mean": phi, "speed_sigma": 0.0, "n_sources": 1 }],
        "grid": { "half_extent": 128.0, "step": 0.5 },
        "seed": 1
    });
    let path = dir.join(name);
    fs::write(&path, config.to_string()).unwrap();
    path
}

/// Sector-1 Gaussian packet built in the spectral domain.
fn packet(grid: Grid2D) -> BoundarySignal {
    let fhat = Spectrum::from_fn(grid, |s| {
        if !Sector::D1.contains(s) {
            return Complex64::new(0.0, 0.0);
        }
        let r2 = (s.k - 2.0).powi(2) + (s.kx - 0.5).powi(2);
        Complex64::new((-r2 / 0.08).exp(), 0.0)
    })
    .unwrap();
    inverse_fourier(&fhat)
}

#[test]
fn six_group_pipeline_is_deterministic_and_finds_the_groups() {
    let dir = tempfile::tempdir().unwrap();
    let (f1, f2) = (dir.path().join("a.apwf"), dir.path().join("b.apwf"));
    for (f, threads) in [(&f1, "1"), (&f2, "3")] {
        let out = run(apwt().args(["--threads", threads, "--config"]).arg(bundled("paper_s5.json")).arg("gen-sources").arg("--out").arg(f));
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    let bytes = fs::read(&f1).unwrap();
    assert_eq!(bytes, fs::read(&f2).unwrap());
    let m = manifest(&dir.path().join("a.apwf.manifest.json"));
    assert_eq!(m["command"], "gen-sources");
    assert_eq!(m["outputs"][0]["sha256"], hex::encode(Sha256::digest(&bytes)));
    assert_eq!(m["config"]["seed"], 2011);
    let (y, sector, field) = read_field(&f1);
    assert_eq!((y, sector, field.grid().shape()), (0.0, None, (513, 513)));

    let d = dir.path().join("diagram");
    let out = run(apwt().arg("--config").arg(bundled("wavelet_s5.json")).arg("diagram").arg("--input").arg(&f1).arg("--out-dir").arg(&d));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows = peaks(&d.join("peaks.csv"));
    assert_eq!(rows.len(), 6);
    let mut expected = vec![0.4, 0.7, 0.5, 0.3, 0.5, 0.4];
    for row in &rows {
        let i = expected.iter().position(|p| (row[1] - p).abs() <= 0.05).expect("rapidity of a configured group");
        expected.remove(i);
        assert!((row[3] - row[1].tanh()).abs() < 1e-12);
    }
    let m = manifest(&d.join("manifest.json"));
    let scaling = &m["details"]["heatmap_scaling"];
    assert!(scaling["max"].as_f64().unwrap() > scaling["min"].as_f64().unwrap());
    for entry in m["outputs"].as_array().unwrap() {
        let contents = fs::read(entry["path"].as_str().unwrap()).unwrap();
        assert_eq!(entry["sha256"], hex::encode(Sha256::digest(&contents)));
    }
    let pgm = fs::read(d.join("diagram.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n141 161\n65535\n"));
}

#[test]
fn boosted_source_shifts_the_diagram_peak() {
    let dir = tempfile::tempdir().unwrap();
    let mut phis = Vec::new();
    for (name, phi) in [("slow", 0.3), ("fast", 0.5)] {
        let config = single_source_config(dir.path(), &format!("{name}.json"), phi);
        let field = dir.path().join(format!("{name}.apwf"));
        assert_eq!(code(&run(apwt().arg("--config").arg(&config).arg("gen-sources").arg("--out").arg(&field))), 0);
        let d = dir.path().join(name);
        assert_eq!(code(&run(apwt().arg("diagram").arg("--input").arg(&field).arg("--out-dir").arg(&d))), 0);
        phis.push(peaks(&d.join("peaks.csv"))[0][1]);
    }
    // one rapidity cell of the default axis
    assert!((phis[1] - phis[0] - 0.2).abs() <= 0.01, "{phis:?}");
}

#[test]
fn zero_field_gives_an_empty_peak_list_and_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("zero.apwf");
    write_signal(&input, &BoundarySignal::zeros(Grid2D::centered(64, 64, 0.5, 0.5).unwrap()));
    let d = dir.path().join("d");
    let out = run(apwt().arg("diagram").arg("--input").arg(&input).arg("--out-dir").arg(&d).arg("--no-calibrate"));
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("identically zero"));
    assert!(peaks(&d.join("peaks.csv")).is_empty());
    assert_eq!(manifest(&d.join("manifest.json"))["details"]["peaks"], 0);
}

#[test]
fn invalid_configurations_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    fs::write(&empty, r#"{"groups": [], "grid": {"half_extent": 8.0, "step": 0.5}, "seed": 0}"#).unwrap();
    let out = run(apwt().arg("--config").arg(&empty).arg("gen-sources").arg("--out").arg(dir.path().join("x.apwf")));
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("groups"));
    assert!(!dir.path().join("x.apwf").exists());

    let typo = dir.path().join("typo.json");
    fs::write(&typo, r#"{"groups": [{"omega": 1.0, "phi_mean": 0.1, "omgea": 2}], "grid": {"half_extent": 8.0, "step": 0.5}, "seed": 0}"#)
        .unwrap();
    let out = run(apwt().arg("--config").arg(&typo).arg("gen-sources").arg("--out").arg(dir.path().join("x.apwf")));
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("omgea"));

    let input = dir.path().join("f.apwf");
    write_signal(&input, &packet(Grid2D::centered(32, 32, 0.5, 0.5).unwrap()));
    let mut wavelet: Value = serde_json::from_slice(&fs::read(bundled("wavelet_s5.json")).unwrap()).unwrap();
    wavelet["mother"]["sector"] = 3.into();
    let evanescent = dir.path().join("d3.json");
    fs::write(&evanescent, wavelet.to_string()).unwrap();
    let out = run(apwt().arg("--config").arg(&evanescent).arg("diagram").arg("--input").arg(&input).arg("--out-dir").arg(dir.path()));
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("sector D3"));

    let out = run(apwt().arg("propagate").arg("--input").arg(&input).arg("--y").arg("1,-0.5").arg("--out-dir").arg(dir.path()));
    assert_eq!(code(&out), 2);
}

#[test]
fn unreadable_files_exit_with_code_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(apwt().arg("diagram").arg("--input").arg(dir.path().join("missing.apwf")).arg("--out-dir").arg(dir.path()));
    assert_eq!(code(&out), 4);
    let junk = dir.path().join("junk.apwf");
    fs::write(&junk, b"not an array file").unwrap();
    let out = run(apwt().arg("propagate").arg("--input").arg(&junk).arg("--y").arg("0").arg("--out-dir").arg(dir.path()));
    assert_eq!(code(&out), 4);
}

#[test]
fn propagation_at_zero_height_returns_the_input() {
    let dir = tempfile::tempdir().unwrap();
    let grid = Grid2D::centered(48, 40, 0.5, 0.5).unwrap();
    let mut state = 7u64;
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let f = BoundarySignal::from_fn(grid, |_, _| Complex64::new(next(), next())).unwrap();
    let input = dir.path().join("f.apwf");
    write_signal(&input, &f);
    let out_dir = dir.path().join("p");
    let out = run(apwt().arg("propagate").arg("--input").arg(&input).arg("--y").arg("0,2.5").arg("--out-dir").arg(&out_dir));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (y, sector, total) = read_field(&out_dir.join("y0_total.apwf"));
    assert_eq!((y, sector), (0.0, None));
    // bins on the light cone belong to no sector
    let cone = inverse_fourier(&light_cone_bins(&forward_fourier(&f)));
    let expected = BoundarySignal::new(grid, f.values() - cone.values()).unwrap();
    assert!(total.relative_l2_error(&expected).unwrap() < 1e-10);
    let (y, sector, _) = read_field(&out_dir.join("y1_d3.apwf"));
    assert_eq!((y, sector), (2.5, Some(Sector::D3)));
    let m = manifest(&out_dir.join("manifest.json"));
    assert_eq!(m["outputs"].as_array().unwrap().len(), 10);
}

#[test]
fn evanescent_norms_decay_with_height() {
    let dir = tempfile::tempdir().unwrap();
    let grid = Grid2D::centered(32, 32, 0.5, 0.5).unwrap();
    let fhat = Spectrum::from_fn(grid, |s| {
        let v = if Sector::D3.contains(s) || Sector::D4.contains(s) { 1.0 } else { 0.0 };
        Complex64::new(v, 0.0)
    })
    .unwrap();
    let input = dir.path().join("f.apwf");
    write_signal(&input, &inverse_fourier(&fhat));
    let out_dir = dir.path().join("p");
    let out = run(apwt().arg("propagate").arg("--input").arg(&input).arg("--y").arg("0,0.5,1,2,4").arg("--out-dir").arg(&out_dir));
    assert_eq!(code(&out), 0);
    let norms: Vec<f64> = (0..5).map(|i| read_field(&out_dir.join(format!("y{i}_total.apwf"))).2.norm()).collect();
    assert!(norms.windows(2).all(|w| w[1] < w[0]), "{norms:?}");
}

#[test]
fn transform_then_reconstruct_recovers_the_packet() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("f.apwf");
    write_signal(&input, &packet(Grid2D::centered(64, 64, 0.5, 0.5).unwrap()));
    let coeffs = dir.path().join("c.apwf");
    let out = run(apwt().arg("--config").arg(bundled("transform_small.json")).arg("transform").arg("--input").arg(&input).arg("--out").arg(&coeffs));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let back = dir.path().join("u.apwf");
    let out = run(apwt().arg("reconstruct").arg("--input").arg(&coeffs).arg("--out").arg(&back).arg("--reference").arg(&input));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let error = manifest(&dir.path().join("u.apwf.manifest.json"))["details"]["relative_l2_error"].as_f64().unwrap();
    assert!(error < 0.05, "{error}");
    let (y, sector, _) = read_field(&back);
    assert_eq!((y, sector), (0.0, Some(Sector::D1)));

    let out = run(apwt().arg("transform").arg("--input").arg(&input).arg("--out").arg(&coeffs).arg("--max-bytes").arg("1000"));
    assert_eq!(code(&out), 2);
}

#[test]
fn selfcheck_reports_and_detects_a_tampered_mother() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("quick.json");
    let out = run(apwt().arg("selfcheck").arg("--level").arg("quick").arg("--report").arg(&report));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = manifest(&report);
    assert_eq!(r["passed"], true);
    let ids: Vec<u64> = r["checks"].as_array().unwrap().iter().map(|c| c["id"].as_u64().unwrap()).collect();
    assert_eq!(ids, [1, 4, 6, 8]);
    assert!(dir.path().join("quick.json.manifest.json").exists());

    let out = run(apwt().args(["selfcheck", "--level", "quick", "--tamper-normalization", "1.1"]));
    assert_eq!(code(&out), 3);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    let plancherel = r["checks"].as_array().unwrap().iter().find(|c| c["id"] == 2).unwrap();
    assert_eq!(plancherel["passed"], false);
}

#[test]
fn bundled_configs_match_the_built_in_defaults() {
    let experiment: apwt::sources::ExperimentConfig = serde_json::from_slice(&fs::read(bundled("paper_s5.json")).unwrap()).unwrap();
    assert_eq!(experiment, apwt::sources::ExperimentConfig::six_groups());
    let wavelet: apwt::transform::DiagramConfig = serde_json::from_slice(&fs::read(bundled("wavelet_s5.json")).unwrap()).unwrap();
    assert_eq!(wavelet, apwt::transform::DiagramConfig::moving_source());
}

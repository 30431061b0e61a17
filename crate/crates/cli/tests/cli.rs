use csh_cli::config::{RunConfig, KEYS};
use csh_cli::snapshot::{self, Snapshot};
use csh_cli::{EXIT_CONFIG, EXIT_OK, EXIT_PROPERTY};
use csh_core::lp::sobolev_norm;
use csh_core::model::{CshState, InitialData, Sigma};
use csh_core::spectral::GridSpec;
use serde_json::Value;
use std::path::{Path, PathBuf};
use tempfile::TempDir;

fn csh(args: &[&str]) -> i32 {
    csh_cli::run(std::iter::once("csh").chain(args.iter().copied()).chain(["--quiet"]))
}

fn write_config(dir: &Path, name: &str, lines: &[&str]) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, format!("# test config\n{}\n", lines.join("\n"))).unwrap();
    p
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Numeric CSV columns as rows of f64, skipping the header and scheme tag.
fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').filter_map(|c| c.parse().ok()).collect())
        .collect()
}

const SMALL: &[&str] = &["grid.n = 32", "t_end = 0.1", "step.dt = 0.01", "diag_every = 2"];

#[test]
fn template_documents_every_key() {
    let t = RunConfig::template();
    for (key, default, _) in KEYS {
        assert!(t.contains(&format!("{key} = {default}")), "{key}");
    }
    assert_eq!(csh(&["template"]), EXIT_OK);
}

#[test]
fn simulate_writes_outputs_and_manifest_replays_identically() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "run.cfg", SMALL);
    let out = tmp.path().join("a");
    assert_eq!(csh(&["--config", s(&cfg), "--out", s(&out), "simulate"]), EXIT_OK);

    let csv = std::fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    assert!(csv.starts_with(csh_core::diagnostics::CSV_HEADER));
    assert_eq!(csv.lines().count(), 1 + 6);
    let snaps = std::fs::read_dir(out.join("snapshots")).unwrap().count();
    assert_eq!(snaps, 6);
    let m = json(&out.join("run_manifest.json"));
    assert_eq!(m["status"], "ok");
    assert_eq!(m["div_ok"], true);
    assert_eq!(m["apriori_ok"], true);
    assert_eq!(m["steps"], 10);
    assert_eq!(m["config"]["grid.n"], "32");
    assert_eq!(m["passing_sigma"], -1);

    let replay = tmp.path().join("b");
    let manifest = out.join("run_manifest.json");
    assert_eq!(csh(&["--config", s(&manifest), "--out", s(&replay), "simulate"]), EXIT_OK);
    assert_eq!(std::fs::read(out.join("diagnostics.csv")).unwrap(), std::fs::read(replay.join("diagnostics.csv")).unwrap());
    for i in 0..6 {
        let name = format!("snapshots/snap_{i:06}.csh");
        assert_eq!(std::fs::read(out.join(&name)).unwrap(), std::fs::read(replay.join(&name)).unwrap());
    }
}

#[test]
fn zero_data_gives_zero_rows() {
    let tmp = TempDir::new().unwrap();
    let mut lines = SMALL.to_vec();
    lines.push("init = zero");
    let cfg = write_config(tmp.path(), "zero.cfg", &lines);
    assert_eq!(csh(&["--config", s(&cfg), "--out", s(tmp.path()), "simulate"]), EXIT_OK);
    let rows = csv_rows(&tmp.path().join("diagnostics.csv"));
    assert_eq!(rows.len(), 6);
    for r in rows {
        // Every column after t except the Picard bookkeeping.
        assert!(r[1..9].iter().all(|&v| v == 0.0), "{r:?}");
        assert_eq!(r[10], 0.0);
    }
}

#[test]
fn near_linear_run_conserves_energy() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "linear.cfg",
        &["grid.n = 32", "potential.m = 0", "potential.v_coeffs =", "init.amplitude = 1e-8", "t_end = 1", "diag_every = 1"],
    );
    assert_eq!(csh(&["--config", s(&cfg), "--out", s(tmp.path()), "simulate"]), EXIT_OK);
    let rows = csv_rows(&tmp.path().join("diagnostics.csv"));
    let e0 = rows[0][1];
    assert!(e0 > 0.0);
    let drift = rows.iter().map(|r| (r[1] - e0).abs() / e0).fold(0.0, f64::max);
    assert!(drift <= 1e-10, "drift {drift:e}");
}

#[test]
fn seed_flag_changes_random_data_only_through_the_seed() {
    let tmp = TempDir::new().unwrap();
    let mut lines = SMALL.to_vec();
    lines.extend(["init = random", "init.amplitude = 0.3"]);
    let cfg = write_config(tmp.path(), "rand.cfg", &lines);
    let run = |seed: &str, dir: &str| {
        let out = tmp.path().join(dir);
        assert_eq!(csh(&["--config", s(&cfg), "--out", s(&out), "--seed", seed, "simulate"]), EXIT_OK);
        std::fs::read(out.join("diagnostics.csv")).unwrap()
    };
    let a = run("7", "a");
    assert_eq!(a, run("7", "b"));
    assert_ne!(a, run("8", "c"));
}

#[test]
fn output_directory_precedence() {
    let base = RunConfig::defaults();
    let env = Some(PathBuf::from("/env"));
    assert_eq!(base.clone().with_overrides(None, Some("/flag".into()), env.clone()).out_dir, PathBuf::from("/flag"));
    assert_eq!(base.clone().with_overrides(None, None, env).out_dir, PathBuf::from("/env"));
    assert_eq!(base.clone().with_overrides(Some(5), None, None).seed, 5);
    assert!(base.with_overrides(None, None, None).out_dir.ends_with("out"));
}

#[test]
fn config_errors_exit_two() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("o");
    for (name, lines) in [
        ("unknown.cfg", vec!["grid.size = 32"]),
        ("malformed.cfg", vec!["grid.n 32"]),
        ("duplicate.cfg", vec!["grid.n = 32", "grid.n = 64"]),
        ("grid.cfg", vec!["grid.n = 48"]),
        ("sigma.cfg", vec!["sigma = 2"]),
        ("dt.cfg", vec!["step.dt = -0.1"]),
        ("scheme.cfg", vec!["step.scheme = euler"]),
        ("ladder.cfg", vec!["convergence.levels = 1"]),
    ] {
        let cfg = write_config(tmp.path(), name, &lines);
        let cmd = if name == "ladder.cfg" { "convergence" } else { "simulate" };
        assert_eq!(csh(&["--config", s(&cfg), "--out", s(&out), cmd]), EXIT_CONFIG, "{name}");
    }
    assert_eq!(csh(&["--config", s(&tmp.path().join("missing.cfg")), "simulate"]), EXIT_CONFIG);
    assert_eq!(csh(&["frobnicate"]), EXIT_CONFIG);
}

#[test]
fn corrupted_snapshot_is_a_format_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "run.cfg", SMALL);
    let out = tmp.path().join("run");
    assert_eq!(csh(&["--config", s(&cfg), "--out", s(&out), "simulate"]), EXIT_OK);
    let snap = out.join("snapshots/snap_000003.csh");
    let good = snapshot::read(&snap).unwrap();
    assert_eq!(good.n, 32);

    let mut bytes = std::fs::read(&snap).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0x40;
    std::fs::write(&snap, &bytes).unwrap();
    assert!(Snapshot::decode(&bytes).unwrap_err().contains("CRC"));

    let init = write_config(tmp.path(), "init.cfg", &["grid.n = 32", "init = snapshot", &format!("init.path = {}", s(&snap))]);
    assert_eq!(csh(&["--config", s(&init), "--out", s(&tmp.path().join("x")), "simulate"]), EXIT_CONFIG);
    let traj = out.join("snapshots");
    assert_eq!(csh(&["--config", s(&cfg), "--out", s(&out), "norms", "--trajectory", s(&traj)]), EXIT_CONFIG);
    let empty = tmp.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    assert_eq!(csh(&["--out", s(&out), "norms", "--trajectory", s(&empty)]), EXIT_CONFIG);
}

#[test]
fn snapshot_restart_continues_the_run() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "run.cfg", SMALL);
    let out = tmp.path().join("run");
    assert_eq!(csh(&["--config", s(&cfg), "--out", s(&out), "simulate"]), EXIT_OK);
    let mid = out.join("snapshots/snap_000002.csh");
    let restart = write_config(
        tmp.path(),
        "restart.cfg",
        &["grid.n = 32", "t_end = 0.1", "step.dt = 0.01", "diag_every = 2", "init = snapshot", &format!("init.path = {}", s(&mid))],
    );
    let out2 = tmp.path().join("restart");
    assert_eq!(csh(&["--config", s(&restart), "--out", s(&out2), "simulate"]), EXIT_OK);
    let a = snapshot::read(&out.join("snapshots/snap_000005.csh")).unwrap();
    let b = snapshot::read(&out2.join("snapshots/snap_000003.csh")).unwrap();
    assert!((a.t - b.t).abs() < 1e-12);
    let g = GridSpec::standard(32);
    let d = a.phi_field(g).sub(&b.phi_field(g)).l2_norm() / a.phi_field(g).l2_norm();
    assert!(d < 1e-12, "restart mismatch {d:e}");
}

#[test]
fn picard_divergence_aborts_with_partial_outputs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "big.cfg", &["grid.n = 32", "step.dt = 2", "t_end = 20", "diag_every = 1"]);
    assert_eq!(csh(&["--config", s(&cfg), "--out", s(tmp.path()), "simulate"]), csh_cli::EXIT_RUNTIME);
    let m = json(&tmp.path().join("run_manifest.json"));
    assert_eq!(m["status"], "aborted");
    assert!(m["error"].as_str().unwrap().contains("Picard"));
    assert!(csv_rows(&tmp.path().join("diagnostics.csv")).len() >= 1);
}

fn static_trajectory(dir: &Path, phi_amp: f64) -> CshState {
    let g = GridSpec::standard(64);
    let d = InitialData::GaussianBump { amplitude: phi_amp, width: 0.8, center: [3.0, 3.2], omega: 1.0 };
    let (phi, u) = d.build(&g).unwrap();
    let mut st = CshState::new(phi, u, Sigma::Minus, 0.0).unwrap();
    std::fs::create_dir_all(dir).unwrap();
    for i in 0..9 {
        st.t = i as f64 * 0.125;
        snapshot::write(&dir.join(format!("s{i:02}.csh")), &st).unwrap();
    }
    st
}

#[test]
fn norms_of_zero_and_static_trajectories() {
    let tmp = TempDir::new().unwrap();
    let zero = tmp.path().join("zero");
    static_trajectory(&zero, 0.0);
    assert_eq!(csh(&["--out", s(tmp.path()), "norms", "--trajectory", s(&zero), "--gamma", "0.8"]), EXIT_OK);
    let r = json(&tmp.path().join("norms.json"));
    assert_eq!(r["value"], 0.0);
    assert_eq!(r["gamma"], 0.8);
    assert_eq!(r["phi"]["gamma"], 0.8);
    assert_eq!(r["u"]["gamma"].as_f64().unwrap(), 0.8 - 1.0);
    assert_eq!(r["samples"], 9);

    let stat = tmp.path().join("static");
    let st = static_trajectory(&stat, 1.0);
    for gamma in [0.0, 0.5, 0.9] {
        let out = tmp.path().join(format!("g{gamma}"));
        assert_eq!(csh(&["--out", s(&out), "norms", "--trajectory", s(&stat), "--gamma", &gamma.to_string()]), EXIT_OK);
        let r = json(&out.join("norms.json"));
        let sg = r["phi"]["value"].as_f64().unwrap();
        let h = sobolev_norm(&st.phi, gamma, false);
        let ratio = sg / h;
        println!("static trajectory gamma {gamma}: S/H = {ratio:.4}");
        if gamma == 0.0 {
            assert!((ratio - 1.0).abs() <= 0.05, "ratio {ratio}");
        } else {
            // Band k is weighted by 2^{2γk} while its support reaches 2^{k+2},
            // so only the band-overlap lower bound holds for γ > 0.
            assert!(ratio >= 1.0 / (2.0 * 17f64.powf(gamma)).sqrt() && ratio <= 1.05, "ratio {ratio}");
        }
    }
}

#[test]
fn verify_reports_skips_and_per_case_json() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "verify.cfg",
        &[
            "verify.n = 32",
            "verify.estimates = bernstein, potential_energy_bilinear",
            "estimate.potential_energy_bilinear.gamma = 0.7",
        ],
    );
    assert_eq!(csh(&["--config", s(&cfg), "--out", s(tmp.path()), "verify"]), EXIT_OK);
    let r = json(&tmp.path().join("verify_report.json"));
    assert_eq!(r["passed"], true);
    let skipped = json(&tmp.path().join("estimates/potential_energy_bilinear.json"));
    assert_eq!(skipped["status"], "skipped");
    assert!(skipped["note"].as_str().unwrap().contains("gamma"));
    assert_eq!(json(&tmp.path().join("estimates/bernstein.json"))["status"], "pass");
    let m = json(&tmp.path().join("run_manifest.json"));
    assert_eq!(m["measured_passing_sigma"], -1);

    let bad = write_config(tmp.path(), "bad.cfg", &["verify.estimates = no_such_estimate"]);
    assert_eq!(csh(&["--config", s(&bad), "--out", s(tmp.path()), "verify"]), EXIT_CONFIG);
}

#[test]
fn opposite_sign_is_accepted_and_echoed() {
    // The sign changes the dynamics; a short run is still well posed.
    let tmp = TempDir::new().unwrap();
    let mut lines = SMALL.to_vec();
    lines.push("sigma = 1");
    let cfg = write_config(tmp.path(), "plus.cfg", &lines);
    let code = csh(&["--config", s(&cfg), "--out", s(tmp.path()), "simulate"]);
    assert!(code == EXIT_OK || code == EXIT_PROPERTY);
    assert_eq!(json(&tmp.path().join("run_manifest.json"))["sigma"], 1);
}

#[test]
fn convergence_orders_on_near_linear_problems() {
    let tmp = TempDir::new().unwrap();
    for (scheme, mass, order) in [("rk4_reference", "0", 4.0), ("twisted_duhamel", "1", 2.0)] {
        let cfg = write_config(
            tmp.path(),
            &format!("{scheme}.cfg"),
            &[
                "grid.n = 32",
                &format!("potential.m = {mass}"),
                "potential.v_coeffs =",
                "potential.alpha = none",
                "init.amplitude = 1e-8",
                &format!("step.scheme = {scheme}"),
                "step.dt = 0.04",
                "t_end = 0.8",
            ],
        );
        let out = tmp.path().join(scheme);
        assert_eq!(csh(&["--config", s(&cfg), "--out", s(&out), "convergence"]), EXIT_OK, "{scheme}");
        let r = json(&out.join("convergence.json"));
        let p = r["state_order"].as_f64().unwrap();
        println!("{scheme}: state order {p:.3}");
        assert!((p - order).abs() <= 0.3, "{scheme} slope {p}");
        assert_eq!(r["levels"].as_array().unwrap().len(), 4);
        assert!(r["grid"]["rel_diff"].as_f64().unwrap() < 1e-10);
    }
}

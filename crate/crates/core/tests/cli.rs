use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nbrel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nbrel"))
        .args(args)
        .env("NBREL_LOG", "off")
        .output()
        .unwrap()
}

/// Two small datasets plus a third manifest whose file is absent.
fn fixture(dir: &Path) -> String {
    let mut csv = String::from("x,a,b,t\n");
    for i in 0..80u32 {
        let a = i % 3;
        let b = (i / 3) % 2;
        let t = if (a + b + i % 5) % 3 == 0 {
            "yes"
        } else {
            "no"
        };
        let b = if i == 7 {
            "?".to_string()
        } else {
            b.to_string()
        };
        csv += &format!("{}.5,{a},{b},{t}\n", i);
    }
    fs::write(dir.join("toy.csv"), &csv).unwrap();
    fs::write(dir.join("toy2.csv"), csv.replace("yes", "maybe")).unwrap();
    for (name, file) in [
        ("toy", "toy.csv"),
        ("toy2", "toy2.csv"),
        ("ghost", "ghost.csv"),
    ] {
        fs::write(
            dir.join(format!("{name}.toml")),
            format!("name = \"{name}\"\npath = \"{file}\"\ntarget_column = \"t\"\ncontinuous_columns = [\"x\"]\n"),
        )
        .unwrap();
    }
    let config = dir.join("config.toml");
    fs::write(
        &config,
        "manifests = [\"toy.toml\", \"toy2.toml\", \"ghost.toml\"]\nensemble_size = 5\nmaster_seed = 3\noutput_dir = \"out\"\n",
    )
    .unwrap();
    config.to_string_lossy().into_owned()
}

#[test]
fn run_writes_all_outputs_for_selected_datasets() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture(dir.path());
    let out = dir.path().join("custom");
    let o = nbrel(&[
        "run",
        "--config",
        &config,
        "--datasets",
        "toy,toy2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    // 2 datasets x 10 metric pairs x 2 files + 5 summaries.
    assert_eq!(names.len(), 45);
    assert!(names.contains(&"toy_eps_glob_u_H.dat".to_string()));
    assert!(names.contains(&"toy2_eps_loc_u_e_cloud.dat".to_string()));

    let summary = fs::read_to_string(out.join("summary_u_H.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(
        lines[0],
        "dataset,unc,glob,hybridA,mixingA,local,hybridB,mixingB"
    );
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("toy,"));

    let arc = fs::read_to_string(out.join("toy_eps_glob_u_H.dat")).unwrap();
    let arc: Vec<&str> = arc.lines().collect();
    assert_eq!(arc[0], "rej_rate ideal robustness uncertainty hybrid");
    // 79 complete rows, 60/40 split.
    assert_eq!(arc.len() - 1, 32);
    assert!(arc[1].starts_with("0.000000 "));
    let cloud = fs::read_to_string(out.join("toy_eps_glob_u_H_cloud.dat")).unwrap();
    assert_eq!(cloud.lines().next(), Some("x y correct"));
    assert_eq!(cloud.lines().count(), 33);
}

#[test]
fn missing_dataset_is_reported_and_others_still_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture(dir.path());
    let o = nbrel(&["run", "--config", &config]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ghost"));
    let summary = fs::read_to_string(dir.path().join("out/summary_u_m.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
}

#[test]
fn seed_override_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture(dir.path());
    let read = |sub: &str| {
        let out = dir.path().join(sub);
        let o = nbrel(&[
            "run",
            "--config",
            &config,
            "--datasets",
            "toy",
            "--seed",
            "99",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        fs::read(out.join("toy_eps_loc_u_t.dat")).unwrap()
    };
    assert_eq!(read("a"), read("b"));
}

#[test]
fn validate_reports_each_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture(dir.path());
    let o = nbrel(&["validate", "--config", &config]);
    assert_eq!(o.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("toy: ok (47 train, 32 test)"), "{stdout}");
    assert!(stdout.contains("ghost: file not found"));
    let o = nbrel(&["validate", "--config", &config, "--datasets", "toy"]);
    assert!(o.status.success());
    assert!(!dir.path().join("out").exists());
}

#[test]
fn bad_inputs_exit_with_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture(dir.path());
    assert_eq!(
        nbrel(&["run", "--config", &config, "--datasets", "nope"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        nbrel(&["run", "--config", "/nonexistent.toml"])
            .status
            .code(),
        Some(2)
    );
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "manifests = []\ncv_folds = 1\n").unwrap();
    assert_eq!(
        nbrel(&["validate", "--config", bad.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    fs::write(&bad, "manifests = []\nunknown_key = 1\n").unwrap();
    assert_eq!(
        nbrel(&["validate", "--config", bad.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

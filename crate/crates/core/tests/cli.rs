use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_local-hodge"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("local-hodge-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn convergence_writes_fixed_csv_and_identical_reruns() {
    let dir = scratch("conv");
    let run = || {
        let out = dir.join("report");
        let status = bin()
            .args(["convergence", "--domain", "unit_square", "--kind", "cubical", "--k", "2", "--levels", "1-3", "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        (std::fs::read(out.with_extension("csv")).unwrap(), std::fs::read(out.with_extension("json")).unwrap())
    };
    let (csv_a, json_a) = run();
    let (csv_b, json_b) = run();
    assert_eq!(csv_a, csv_b);
    assert_eq!(json_a, json_b);
    let csv = String::from_utf8(csv_a).unwrap();
    assert!(csv.starts_with("level,h,dofs,err_sigma_l2,err_sigma_energy,err_u_l2,err_du_l2,residual\n"));
    assert!(!csv.contains('\r'));
    let json: serde_json::Value = serde_json::from_slice(&json_a).unwrap();
    assert_eq!(json["metadata"]["command"], "convergence");
    assert_eq!(json["result"]["config"]["levels"], serde_json::json!([1, 2, 3]));
}

#[test]
fn config_file_with_flag_override() {
    let dir = scratch("config");
    let cfg = dir.join("study.json");
    std::fs::write(&cfg, r#"{"domain":"unit_square","kind":"simplicial","k":1,"variant":"exact","levels":[1,2]}"#).unwrap();
    let out = bin().args(["solve", "--config"]).arg(&cfg).args(["--variant", "lumped"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["result"]["config"]["variant"], "lumped");
    assert_eq!(json["result"]["level"], 2);
    assert!(json["result"]["conservation"].is_null());
}

#[test]
fn locality_and_infsup_subcommands() {
    let out = bin().args(["locality", "--domain", "unit_square", "--kind", "simplicial", "--k", "2", "--levels", "2"]).output().unwrap();
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["result"]["far_nonzero"], 0);
    let out = bin().args(["infsup", "--domain", "unit_square", "--kind", "cubical", "--k", "1", "--levels", "1,2"]).output().unwrap();
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["result"]["levels"].as_array().unwrap().len(), 2);
}

#[test]
fn unisolvency_subcommand() {
    let out = bin().args(["unisolvency", "--n-max", "2"]).output().unwrap();
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["result"]["failed"], 0);
}

#[test]
fn bad_input_fails_cleanly() {
    let out = bin().args(["convergence", "--domain", "unit_square", "--kind", "simplicial", "--k", "3", "--levels", "1-2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("k = 3"));
    let out = bin().args(["convergence", "--domain", "unit_square", "--kind", "simplicial", "--k", "1", "--levels", "2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin().args(["solve", "--domain", "mars"]).output().unwrap();
    assert!(!out.status.success());
}

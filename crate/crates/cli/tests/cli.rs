use std::process::{Command, Output};

fn uirbpm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uirbpm")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn count_table() {
    let o = uirbpm(&["count", "--d", "3", "--n-max", "3"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "d,n,trees,plane_maps,rooted_maps\n3,1,3,3,1\n3,2,12,12,3\n3,3,60,60,12\n");
}

#[test]
fn enumerate_matches_count() {
    let o = uirbpm(&["enumerate", "--d", "4", "--n", "2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 36);
}

#[test]
fn close_triple_edge() {
    let o = uirbpm(&["close", "--tree", "B[W[cc]oo]"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["vertices"].as_array().unwrap().len(), 2);
    assert_eq!(v["twins"].as_array().unwrap().len(), 3);
}

#[test]
fn close_rejects_bad_charge() {
    let o = uirbpm(&["close", "--tree", "B[W[cc]o]"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn samples_are_seeded() {
    let a = uirbpm(&["sample-tree", "--n", "30", "--count", "3", "--seed", "7"]);
    let b = uirbpm(&["sample-tree", "--n", "30", "--count", "3", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
    let c = uirbpm(&["sample-tree", "--n", "30", "--count", "3", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn limit_balls_jsonl() {
    let o = uirbpm(&["sample-uirbpm", "--radius", "2", "--count", "4", "--seed", "1"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 4);
    for line in out.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["R"], 2);
        assert_eq!(v["distances"][0], 0);
    }
}

#[test]
fn map_dot() {
    let o = uirbpm(&["sample-map", "--n", "5", "--format", "dot"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("graph map {"));
}

#[test]
fn reports_exit_zero_and_write_out() {
    let dir = std::env::temp_dir().join(format!("uirbpm-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("bij.json");
    let o = uirbpm(&["verify-bijection", "--d", "3", "--n-max", "3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["schema_version"], 1);
    assert!(uirbpm(&["srw", "--sanity", "--steps", "20"]).status.success());
    assert!(uirbpm(&["walk-stats", "--samples", "500", "--levels", "10"]).status.success());
    assert!(uirbpm(&["srw", "--radius", "3", "--walkers", "3", "--steps", "100"]).status.success());
}

#[test]
fn unknown_ball_index_fails() {
    let o = uirbpm(&["verify-convergence", "--k", "1", "--ball", "99"]);
    assert_eq!(o.status.code(), Some(2));
}

use std::fs;
use std::path::PathBuf;

fn run(args: &[&str]) -> i32 {
    let mut v = vec!["lamlab"];
    v.extend_from_slice(args);
    lamlab_cli::run(v)
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("lamlab-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["no-such-command"]), 2);
    assert_eq!(run(&["sample-tree", "--n", "5", "--seed", "1", "--bogus"]), 2);
    assert_eq!(run(&["sample-tree", "--n", "5"]), 2, "missing seed");
    assert_eq!(run(&["animate", "--n", "50", "--seed", "1"]), 2, "missing output directory");
    assert_eq!(run(&["sample-tree", "--n", "5", "--seed", "1", "--alpha", "2.5"]), 2);
    assert_eq!(run(&["lamination", "--tree", "/nonexistent/tree.json"]), 2);
    assert_eq!(run(&["sample-tree", "--n", "5", "--seed", "1", "--format", "svg", "--width", "10"]), 2);
}

#[test]
fn tree_file_to_lamination_svg() {
    let d = scratch("tree");
    let tree = d.join("tree.json");
    let svg = d.join("lam.svg");
    assert_eq!(run(&["sample-tree", "--n", "40", "--seed", "5", "--out", tree.to_str().unwrap()]), 0);
    assert_eq!(run(&["lamination", "--tree", tree.to_str().unwrap(), "--out", svg.to_str().unwrap()]), 0);
    let text = fs::read_to_string(&svg).unwrap();
    // Leaves and the root give degenerate chords, so only inner non-root vertices are drawn.
    let t: serde_json::Value = serde_json::from_str(&fs::read_to_string(&tree).unwrap()).unwrap();
    let parents: std::collections::BTreeSet<u64> =
        t["parents"].as_array().unwrap().iter().filter_map(|p| p.as_u64()).collect();
    assert_eq!(text.matches("<path").count(), parents.len() - 1);
    let json = d.join("lam.json");
    let args = ["lamination", "--tree", tree.to_str().unwrap(), "--luka", "--format", "json", "--out", json.to_str().unwrap()];
    assert_eq!(run(&args), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(v["denominator"], 40);
}

#[test]
fn config_file_supplies_missing_flags() {
    let d = scratch("config");
    let cfg = d.join("run.conf");
    let out = d.join("f.json");
    fs::write(&cfg, format!("# sample\nseed = 8\nn = 7\nout = {}\n", out.display())).unwrap();
    assert_eq!(run(&["--config", cfg.to_str().unwrap(), "sample-facto"]), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["n"], 7);
    assert_eq!(v["transpositions"].as_array().unwrap().len(), 6);
    // A flag wins over the file.
    assert_eq!(run(&["--config", cfg.to_str().unwrap(), "sample-facto", "--n", "4"]), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["n"], 4);
    fs::write(&cfg, "seed = many\n").unwrap();
    assert_eq!(run(&["--config", cfg.to_str().unwrap(), "sample-facto"]), 2);
}

#[test]
fn partition_and_density_outputs() {
    let d = scratch("partition");
    let facto = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/figure_facto.json");
    let out = d.join("p.json");
    let args = ["partition", "--facto", facto.to_str().unwrap(), "--k", "5", "--format", "json", "--out", out.to_str().unwrap()];
    assert_eq!(run(&args), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["blocks"], serde_json::json!([[1, 3, 4, 5, 6]]));
    let csv = d.join("q.csv");
    let args = ["levy-density", "--alpha", "2", "--u", "1", "--xmin", "-0.5", "--xmax", "1", "--points", "4", "--out", csv.to_str().unwrap()];
    assert_eq!(run(&args), 0);
    assert_eq!(fs::read_to_string(csv).unwrap().lines().count(), 5);
}

#[test]
fn verify_writes_reports() {
    let d = scratch("verify");
    assert_eq!(run(&["verify", "--suite", "mass", "--seed", "1", "--out", d.to_str().unwrap()]), 0);
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("00_mass_identity.json")).unwrap()).unwrap();
    assert_eq!(v["verdict"], "pass");
    assert_eq!(v["seed"], 1);
    assert!(d.join("00_mass_identity.csv").exists());
    assert_eq!(run(&["verify", "--suite", "mass"]), 2, "seed required without --fresh-seed");
}

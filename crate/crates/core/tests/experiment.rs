//! Config-driven runs end to end through the library API.

use infoperc::experiment::{run, write_outputs, ExperimentConfig, Kind};
use infoperc::stats::within_sigma;
use infoperc::Error;

fn cfg(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml(text).unwrap()
}

const MAGNET: &str = r#"
schema_version = 1
kind = "magnetization"
beta = 0.0
seed = 42
replicas = 20000
times = [0.5, 1.0, 2.0]

[graph]
family = "cycle"
n = 50
"#;

#[test]
fn magnetization_run_matches_closed_form() {
    let rec = run(&cfg(MAGNET)).unwrap();
    assert_eq!(rec.rows.len(), 3);
    for r in &rec.rows {
        assert_eq!(r.series, "m_t");
        assert_eq!(r.seed, 42);
        assert!(within_sigma(r.estimate, (-r.time).exp(), r.stderr, 4.0), "{r:?}");
    }
}

#[test]
fn runs_are_reproducible_and_seed_sensitive() {
    let a = run(&cfg(MAGNET)).unwrap();
    let b = run(&cfg(MAGNET)).unwrap();
    assert_eq!(a.rows, b.rows);
    assert_eq!(a.config_hash, b.config_hash);
    let mut other = cfg(MAGNET);
    other.seed = 43;
    let c = run(&other).unwrap();
    assert_ne!(a.rows, c.rows);
    assert_ne!(a.config_hash, c.config_hash);
}

#[test]
fn outputs_embed_a_replayable_config() {
    let config = cfg(MAGNET);
    let rec = run(&config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = write_outputs(&rec, dir.path(), Some(2)).unwrap();
    assert_eq!(files, ["results.csv", "plot.csv", "manifest.txt"]);
    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert!(csv.starts_with("series,time,estimate,stderr,replicas,seed\n"));
    assert_eq!(csv.lines().count(), 4);
    let manifest = std::fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains(&format!("config_hash: {}", rec.config_hash)));
    assert!(manifest.contains("workers: 2"));
    let embedded = manifest.split_once("[config]\n").unwrap().1;
    let replay = ExperimentConfig::from_toml(embedded).unwrap();
    assert_eq!(replay, config);
    assert_eq!(run(&replay).unwrap().rows, rec.rows);
}

#[test]
fn cluster_runs_report_fractions_that_sum_to_one() {
    let config = cfg(r#"
schema_version = 1
kind = "clusters"
beta = 0.2
t_star = 2.0
replicas = 50
[graph]
family = "torus"
side = 5
dim = 2
"#);
    let rec = run(&config).unwrap();
    let frac = |name: &str| rec.rows.iter().find(|r| r.series == name).unwrap().estimate;
    let total = frac("red_fraction") + frac("green_fraction") + frac("blue_fraction");
    assert!((total - 1.0).abs() < 1e-12);
    assert_eq!(rec.clusters.iter().map(|c| c.roots.len()).sum::<usize>(), 50 * 25);
}

#[test]
fn capacity_and_supercritical_errors_surface() {
    let tv = cfg(r#"
schema_version = 1
kind = "tv"
mode = "exact"
times = [1.0]
[graph]
family = "cycle"
n = 13
"#);
    assert!(matches!(run(&tv), Err(Error::Capacity(_))));

    let hot = cfg(r#"
schema_version = 1
kind = "clusters"
beta = 3.0
t_star = 50.0
replicas = 2
[limits]
length_cap_per_site = 2.0
[graph]
family = "torus"
side = 6
dim = 2
"#);
    let err = run(&hot).unwrap_err();
    assert!(matches!(err, Error::Supercritical { .. }));
    assert_eq!(err.exit_code(), 5);
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(ExperimentConfig::from_toml("schema_version = 1\nkind = \"tv\"\nbogus = 1\n").is_err());
    let mut bad = cfg(MAGNET);
    bad.times.clear();
    assert!(matches!(run(&bad), Err(Error::InvalidConfig(_))));
    let mut bad = cfg(MAGNET);
    bad.schema_version = 9;
    assert!(matches!(run(&bad), Err(Error::InvalidConfig(_))));
    assert_eq!(cfg(MAGNET).kind, Kind::Magnetization);
}

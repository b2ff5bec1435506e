use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use super::config::{ExperimentConfig, Kind};
use crate::clusters::{build_clusters_capped, Color};
use crate::error::Result;
use crate::forward::{estimate_magnetization, find_t_m, MagnetizationOptions, TmOptions};
use crate::graph::GraphSpec;
use crate::mixing::{cutoff_window_scan, mp_l2_check, tv_profile, CutoffOptions, TvMode};
use crate::replicas;
use crate::rule::Theta;
use crate::stats::MeanEstimate;
use crate::update_stream::UpdateSequence;
use crate::zn;

/// One line of `results.csv`. `time` holds the row's abscissa: a time for
/// curves, a distance or size where the series says so.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatRow {
    pub series: String,
    pub time: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub replicas: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterRow {
    pub replica: usize,
    pub roots: Vec<usize>,
    pub color: Color,
    #[serde(rename = "W")]
    pub width: usize,
    pub chi: usize,
    pub length: f64,
    pub survives: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentRecord {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub rows: Vec<StatRow>,
    pub clusters: Vec<ClusterRow>,
    pub wall_clock_seconds: f64,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotRow {
    pub series: String,
    pub x: f64,
    pub y: f64,
    pub err: f64,
}

struct Rows {
    seed: u64,
    rows: Vec<StatRow>,
}

impl Rows {
    fn push(&mut self, series: impl Into<String>, time: f64, est: f64, stderr: f64, replicas: usize) {
        self.rows.push(StatRow {
            series: series.into(),
            time,
            estimate: est,
            stderr,
            replicas,
            seed: self.seed,
        });
    }

    fn push_mean(&mut self, series: impl Into<String>, time: f64, m: MeanEstimate) {
        self.push(series, time, m.mean, m.stderr, m.count);
    }
}

/// Validate `config` and run the experiment it describes.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentRecord> {
    config.validate()?;
    let start = Instant::now();
    let mut out = Rows {
        seed: config.seed,
        rows: Vec::new(),
    };
    let mut clusters = Vec::new();
    let (beta, seed, reps) = (config.beta, config.seed, config.replicas);
    match config.kind {
        Kind::Magnetization => {
            let g = config.build_graph()?;
            let opts = MagnetizationOptions {
                site_average: g.is_trusted_transitive(),
                origin: 0,
            };
            let curve = estimate_magnetization(&g, beta, &config.times, reps, seed, opts)?;
            for p in curve.points {
                out.push("m_t", p.time, p.estimate, p.stderr, p.replicas);
            }
        }
        Kind::Tm => {
            let g = config.build_graph()?;
            let opts = TmOptions {
                initial_replicas: reps.max(2),
                max_replicas: config.limits.max_replicas.max(reps.max(2)),
                site_average: g.is_trusted_transitive(),
                ..TmOptions::default()
            };
            let tm = find_t_m(&g, beta, config.precision.expect("validated"), seed, opts)?;
            let n = g.n() as f64;
            let half = 0.5 * (tm.upper - tm.lower);
            out.push("t_m", n, tm.time, half, tm.replicas_used);
            out.push("t_m_lower", n, tm.lower, 0.0, tm.replicas_used);
            out.push("t_m_upper", n, tm.upper, 0.0, tm.replicas_used);
        }
        Kind::Clusters => {
            let g = config.build_graph()?;
            let t_star = config.t_star.expect("validated");
            let cap = config.limits.length_cap_per_site * g.n() as f64;
            let per = replicas::map(seed, reps, |r, s| {
                let seq = UpdateSequence::generate(g.n(), t_star, s)?;
                let cs = build_clusters_capped(&g, &seq, beta, cap)?;
                Ok(cs
                    .into_iter()
                    .map(|c| ClusterRow {
                        replica: r,
                        roots: c.roots.as_slice().to_vec(),
                        color: c.color,
                        width: c.stats.width,
                        chi: c.stats.chi,
                        length: c.stats.length,
                        survives: c.stats.survives,
                    })
                    .collect::<Vec<_>>())
            })?;
            let n = g.n() as f64;
            for (color, name) in [(Color::Red, "red"), (Color::Green, "green"), (Color::Blue, "blue")] {
                let fractions: Vec<f64> = per
                    .iter()
                    .map(|cs| {
                        cs.iter()
                            .filter(|c| c.color == color)
                            .map(|c| c.roots.len())
                            .sum::<usize>() as f64
                            / n
                    })
                    .collect();
                out.push_mean(format!("{name}_fraction"), t_star, MeanEstimate::from_samples(&fractions));
            }
            let counts: Vec<f64> = per.iter().map(|cs| cs.len() as f64).collect();
            out.push_mean("cluster_count", t_star, MeanEstimate::from_samples(&counts));
            clusters = per.into_iter().flatten().collect();
        }
        Kind::Zn => {
            let g = config.build_graph()?;
            let n = g.n();
            let t_star = config.t_star.expect("validated");
            let theta = Theta::new(beta, 2).value();
            out.push("survival_exact", t_star, zn::survival_probability(theta, t_star)?, 0.0, 0);
            out.push_mean("survival", t_star, zn::survival_frequency(theta, t_star, reps, seed)?);
            let counts = zn::survivor_counts(n, theta, t_star, reps, seed)?;
            out.push_mean("walks_at_0", t_star, counts.walks);
            out.push_mean("distinct_at_0", t_star, counts.distinct);
            let green = zn::green_same_spin_check(&g, beta, t_star, reps, seed)?;
            out.push("green_violations", t_star, green.violations as f64, 0.0, reps);
            let max_d = config.max_distance.unwrap_or((n / 2).min(8));
            for (r, m) in zn::same_green_probability(&g, beta, t_star, max_d, reps, seed)?
                .into_iter()
                .enumerate()
            {
                out.push_mean("same_green", (r + 1) as f64, m);
            }
        }
        Kind::Tv => {
            let g = config.build_graph()?;
            let mode = config.mode.expect("validated");
            let profile = tv_profile(&g, beta, &config.times, mode, reps, seed)?;
            let used = if mode == TvMode::Exact { 0 } else { reps };
            for p in profile.points {
                out.push("tv", p.time, p.tv, p.stderr, used);
                if let Some(plugin) = p.plugin {
                    out.push("tv_plugin", p.time, plugin, p.stderr, used);
                }
            }
        }
        Kind::CutoffScan => {
            let family: &GraphSpec = config.graph.as_ref().expect("validated");
            let mut opts = CutoffOptions {
                replicas: reps,
                t_m: TmOptions {
                    max_replicas: config.limits.max_replicas,
                    ..TmOptions::default()
                },
                ..CutoffOptions::default()
            };
            if !config.offsets.is_empty() {
                opts.offsets = config.offsets.clone();
            }
            if let Some(p) = config.precision {
                opts.t_m_precision = p;
            }
            let scan = cutoff_window_scan(family, &config.sizes, beta, &config.eps, seed, &opts)?;
            let mut last_n = None;
            for row in &scan.rows {
                if last_n != Some(row.n) {
                    out.push("t_m", row.n as f64, row.t_m, 0.0, reps);
                    last_n = Some(row.n);
                }
                out.push(format!("t_mix(eps={})", row.eps), row.n as f64, row.offset, 0.0, reps);
            }
            for w in &scan.windows {
                out.push(format!("window(eps={})", w.eps), w.n as f64, w.width, 0.0, reps);
            }
            for (n, profile) in &scan.profiles {
                for p in &profile.points {
                    out.push(format!("tv_n={n}"), p.time, p.tv, p.stderr, reps);
                }
            }
        }
        Kind::MpCheck => {
            let v = config.v_size.expect("validated");
            let check = mp_l2_check(v, reps, seed)?;
            out.push("violations", v as f64, check.violations as f64, 0.0, check.trials);
            out.push("max_ratio", v as f64, check.max_ratio, 0.0, check.trials);
        }
    }
    Ok(ExperimentRecord {
        config: config.clone(),
        config_hash: config.hash(),
        rows: out.rows,
        clusters,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

/// Long-format `(series, x, y, err)` rows. Cluster records add a
/// cluster-size histogram.
pub fn emit_plot_data(record: &ExperimentRecord) -> Vec<PlotRow> {
    let mut rows: Vec<PlotRow> = record
        .rows
        .iter()
        .map(|r| PlotRow {
            series: r.series.clone(),
            x: r.time,
            y: r.estimate,
            err: r.stderr,
        })
        .collect();
    if !record.clusters.is_empty() {
        let max = record.clusters.iter().map(|c| c.roots.len()).max().unwrap_or(0);
        let mut hist = vec![0usize; max + 1];
        for c in &record.clusters {
            hist[c.roots.len()] += 1;
        }
        for (size, &count) in hist.iter().enumerate().skip(1) {
            if count > 0 {
                rows.push(PlotRow {
                    series: "cluster_size".into(),
                    x: size as f64,
                    y: count as f64,
                    err: (count as f64).sqrt(),
                });
            }
        }
    }
    rows
}

/// Write `results.csv`, `plot.csv`, `clusters.jsonl` (cluster runs) and
/// `manifest.txt` into `dir`.
pub fn write_outputs(record: &ExperimentRecord, dir: &Path, workers: Option<usize>) -> Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();

    let mut csv = String::from("series,time,estimate,stderr,replicas,seed\n");
    for r in &record.rows {
        writeln!(csv, "{},{},{},{},{},{}", r.series, r.time, r.estimate, r.stderr, r.replicas, r.seed)
            .expect("string write");
    }
    fs::write(dir.join("results.csv"), csv)?;
    files.push("results.csv".to_string());

    let mut plot = String::from("series,x,y,err\n");
    for p in emit_plot_data(record) {
        writeln!(plot, "{},{},{},{}", p.series, p.x, p.y, p.err).expect("string write");
    }
    fs::write(dir.join("plot.csv"), plot)?;
    files.push("plot.csv".to_string());

    if record.config.kind == Kind::Clusters {
        let mut jsonl = String::new();
        for c in &record.clusters {
            jsonl.push_str(&serde_json::to_string(c).expect("row serializes"));
            jsonl.push('\n');
        }
        fs::write(dir.join("clusters.jsonl"), jsonl)?;
        files.push("clusters.jsonl".to_string());
    }

    let mut manifest = String::new();
    writeln!(manifest, "kind: {}", record.config.kind.name()).unwrap();
    writeln!(manifest, "config_hash: {}", record.config_hash).unwrap();
    writeln!(manifest, "seed: {}", record.config.seed).unwrap();
    writeln!(manifest, "replicas: {}", record.config.replicas).unwrap();
    writeln!(manifest, "version: {}", record.version).unwrap();
    writeln!(manifest, "wall_clock_seconds: {:.3}", record.wall_clock_seconds).unwrap();
    if let Some(w) = workers {
        writeln!(manifest, "workers: {w}").unwrap();
    }
    writeln!(manifest, "files: {}", files.join(" ")).unwrap();
    writeln!(manifest, "\n[config]\n{}", record.config.to_toml()).unwrap();
    fs::write(dir.join("manifest.txt"), manifest)?;
    files.push("manifest.txt".to_string());
    Ok(files)
}

//! `infoperc <subcommand> --config FILE [--seed N] [--out DIR] [--workers K]`

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use infoperc::experiment::{self, ExperimentConfig, Kind, SCHEMA_VERSION};
use infoperc::{replicas, Error, GraphSpec, Result};

#[derive(Parser)]
#[command(name = "infoperc", version, about = "Information-percolation experiments for Glauber dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, env = "INFOPERC_WORKERS")]
    workers: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct ZnArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    tstar: Option<f64>,
    #[arg(long)]
    replicas: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Magnetization curve from the all-plus start.
    Magnetization(Common),
    /// Locate t_m, where the magnetization crosses 1/√n.
    Tm(Common),
    /// Information-percolation clusters, one JSON line per cluster.
    Clusters(Common),
    /// Cycle experiments through killed coalescing walks.
    Zn(ZnArgs),
    /// Total-variation profile from the all-plus start.
    Tv(Common),
    /// Mixing-time offsets and cutoff windows across sizes.
    CutoffScan(Common),
    /// Check the L² bound for partially uniform mixtures.
    MpCheck(Common),
}

fn load(common: &Common, kind: Kind) -> Result<ExperimentConfig> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("--config is required".into()))?;
    let cfg = ExperimentConfig::load(path)?;
    if cfg.kind != kind {
        return Err(Error::InvalidConfig(format!(
            "config kind {} does not match subcommand {}",
            cfg.kind.name(),
            kind.name()
        )));
    }
    Ok(cfg)
}

fn zn_config(args: &ZnArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.common.config {
        Some(_) => load(&args.common, Kind::Zn)?,
        None => {
            let n = args.n.ok_or_else(|| Error::InvalidConfig("zn needs --config or --n".into()))?;
            ExperimentConfig::from_toml(&format!(
                "schema_version = {SCHEMA_VERSION}\nkind = \"zn\"\n[graph]\nfamily = \"cycle\"\nn = {n}\n"
            ))?
        }
    };
    if let Some(n) = args.n {
        cfg.graph = Some(GraphSpec::Cycle { n });
    }
    if let Some(b) = args.beta {
        cfg.beta = b;
    }
    if let Some(t) = args.tstar {
        cfg.t_star = Some(t);
    }
    if let Some(r) = args.replicas {
        cfg.replicas = r;
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<()> {
    let (mut cfg, common) = match &cli.command {
        Command::Magnetization(c) => (load(c, Kind::Magnetization)?, c),
        Command::Tm(c) => (load(c, Kind::Tm)?, c),
        Command::Clusters(c) => (load(c, Kind::Clusters)?, c),
        Command::Zn(z) => (zn_config(z)?, &z.common),
        Command::Tv(c) => (load(c, Kind::Tv)?, c),
        Command::CutoffScan(c) => (load(c, Kind::CutoffScan)?, c),
        Command::MpCheck(c) => (load(c, Kind::MpCheck)?, c),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(o) = &common.out {
        cfg.output.dir = o.clone();
    }
    if let Some(w) = common.workers {
        if w == 0 {
            return Err(Error::InvalidArgument("--workers must be ≥ 1".into()));
        }
    }
    // Everything is checked before any simulation or output.
    cfg.validate()?;
    if let Some(w) = common.workers {
        replicas::set_workers(w)?;
    }
    let record = experiment::run(&cfg)?;
    let files = experiment::write_outputs(&record, &cfg.output.dir, common.workers)?;
    println!(
        "{}",
        serde_json::json!({
            "kind": cfg.kind.name(),
            "config_hash": record.config_hash,
            "out": cfg.output.dir,
            "files": files,
            "rows": record.rows.len(),
        })
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.payload());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use polar_wom::channel::ModelSpec;
use polar_wom::harness::{self, ExperimentConfig};
use polar_wom::profile::CodeProfile;
use polar_wom::{verify, Error, Result};

#[derive(Parser)]
#[command(name = "polar-wom", version, about = "Polar codes for asymmetric channels and noisy WOM rewriting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a profile, choose index sets, search a frozen vector, write the profile.
    Construct(Common),
    /// Monte Carlo encode/transmit/decode; writes a CSV row and a JSON summary.
    Simulate(Common),
    /// Closed-form and grid-oracle capacity of a model.
    Capacity(Common),
    /// Construct + simulate over a list of block lengths (`--n 256,1024,4096`).
    Sweep(Common),
    /// Run the oracle and identity suites.
    Verify(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// JSON experiment config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// example1 | example2 | bsc | basym
    #[arg(long)]
    model: Option<String>,
    /// Model parameters, e.g. `alpha=0.1,beta=0.5,B=0.25`.
    #[arg(long)]
    params: Option<String>,
    /// Block length; a comma-separated list for `sweep`.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long = "k-blocks")]
    k_blocks: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Profile file to write (`construct`) or read (`simulate`).
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Output path (CSV data; a JSON summary is written next to it).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Effective rate target as a fraction of capacity.
    #[arg(long = "rate-fraction")]
    rate_fraction: Option<f64>,
    /// Absolute effective rate target.
    #[arg(long)]
    rate: Option<f64>,
    /// Source-side threshold: indices with `z_source` at or above it may carry data.
    #[arg(long = "z-high")]
    z_high: Option<f64>,
    #[arg(long = "z-low")]
    z_low: Option<f64>,
    #[arg(long = "error-target")]
    error_target: Option<f64>,
    #[arg(long = "sample-count")]
    sample_count: Option<usize>,
    /// Keep the all-zero frozen vector.
    #[arg(long = "no-search")]
    no_search: bool,
}

impl Common {
    fn resolve(&self, sweep: bool) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(m) = &self.model {
            if m != &cfg.model && self.params.is_none() {
                cfg.params.clear();
            }
            cfg.model.clone_from(m);
        }
        if let Some(p) = &self.params {
            cfg.params = ModelSpec::parse_params(p)?;
        }
        match (sweep, self.n.as_slice()) {
            (_, []) => {}
            (true, list) => cfg.sweep_n = list.to_vec(),
            (false, [n]) => cfg.n = *n,
            (false, _) => return Err(Error::Config("--n takes a list only for sweep".into())),
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(k) = self.k_blocks {
            cfg.k_blocks = k;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if self.rate_fraction.is_some() {
            cfg.rate_fraction = self.rate_fraction;
        }
        if self.rate.is_some() {
            cfg.rate = self.rate;
        }
        if let Some(z) = self.z_high {
            cfg.z_high = z;
        }
        if self.z_low.is_some() {
            cfg.z_low = self.z_low;
        }
        if let Some(e) = self.error_target {
            cfg.error_target = e;
        }
        if let Some(s) = self.sample_count {
            cfg.sample_count = s;
        }
        if self.no_search {
            cfg.search = false;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

fn write_rows<T: serde::Serialize>(out: Option<&Path>, rows: &[T]) -> Result<()> {
    match out {
        Some(path) => harness::write_csv(BufWriter::new(File::create(path)?), rows),
        None => harness::write_csv(io::stdout().lock(), rows),
    }
}

/// Exit status: 0 success, 1 a check failed, 2 invalid input or I/O error.
fn run(cli: Cli) -> Result<bool> {
    let (common, sweep) = match &cli.command {
        Command::Sweep(c) => (c, true),
        Command::Construct(c) | Command::Simulate(c) | Command::Capacity(c) | Command::Verify(c) => (c, false),
    };
    if let Some(t) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let cfg = common.resolve(sweep)?;
    let out = common.out.as_deref();

    match cli.command {
        Command::Construct(_) => {
            let built = harness::construct(&cfg, cfg.n)?;
            let path = common
                .profile
                .as_deref()
                .or(out)
                .ok_or_else(|| Error::Config("construct needs --profile or --out".into()))?;
            built.profile.save(path)?;
            let summary = harness::summary_json(&cfg, "construct", &built.summary())?;
            print!("{summary}");
            eprintln!(
                "wrote {}: |message|/n = {:.4}, effective rate {:.4}, capacity {:.4}",
                path.display(),
                built.summary().message_fraction,
                built.summary().effective_rate,
                built.capacity
            );
            Ok(built.search.as_ref().is_none_or(|s| s.accepted))
        }
        Command::Simulate(_) => {
            let (profile, capacity) = match &common.profile {
                Some(path) => {
                    let p = CodeProfile::load(path)?;
                    let c = p.model.capacity()?;
                    (p, c)
                }
                None => {
                    let built = harness::construct(&cfg, cfg.n)?;
                    (built.profile, built.capacity)
                }
            };
            let report = harness::simulate(&cfg, &profile, capacity)?;
            let summary = harness::summary_json(&cfg, "simulate", &report)?;
            if let Some(path) = out {
                #[derive(serde::Serialize)]
                struct Row<'a> {
                    n: usize,
                    rate: f64,
                    capacity: f64,
                    #[serde(rename = "FER")]
                    fer: f64,
                    #[serde(rename = "FER_CI_low")]
                    fer_ci_low: f64,
                    #[serde(rename = "FER_CI_high")]
                    fer_ci_high: f64,
                    cost: f64,
                    seed: u64,
                    scheme: &'a harness::SchemeKind,
                    blocks: usize,
                    stuck_writes: usize,
                }
                write_rows(
                    Some(path),
                    &[Row {
                        n: report.n,
                        rate: report.effective_rate,
                        capacity: report.capacity,
                        fer: report.fer,
                        fer_ci_low: report.fer_ci_low,
                        fer_ci_high: report.fer_ci_high,
                        cost: report.mean_cost,
                        seed: report.seed,
                        scheme: &report.scheme,
                        blocks: report.blocks,
                        stuck_writes: report.stuck_writes,
                    }],
                )?;
                write_text(&harness::json_sibling(path), &summary)?;
            }
            print!("{summary}");
            Ok(true)
        }
        Command::Capacity(_) => {
            let r = harness::capacity(&cfg.model_spec(), cfg.grid_resolution)?;
            let fmt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.6}"));
            println!("model        {} {:?}", r.model.id, r.model.params);
            println!("closed form  {}", fmt(r.closed_form));
            println!("grid         {} (resolution {})", fmt(r.grid), r.resolution);
            if let Some(aux) = &r.grid_aux {
                let p: Vec<String> = aux.p_v_given_s.iter().map(|b| format!("{:.4}", b.p1())).collect();
                println!("argmax       P(V=1|S=s) = [{}], x(v,s) = {:?}", p.join(", "), aux.x_map);
            }
            println!("gap          {}", fmt(r.gap));
            if let Some(path) = out {
                #[derive(serde::Serialize)]
                struct Row {
                    model: String,
                    closed_form: Option<f64>,
                    grid: Option<f64>,
                    gap: Option<f64>,
                    resolution: f64,
                }
                write_rows(
                    Some(path),
                    &[Row {
                        model: r.model.id.clone(),
                        closed_form: r.closed_form,
                        grid: r.grid,
                        gap: r.gap,
                        resolution: r.resolution,
                    }],
                )?;
                write_text(&harness::json_sibling(path), &harness::summary_json(&cfg, "capacity", &r)?)?;
            }
            Ok(true)
        }
        Command::Sweep(_) => {
            let rows = harness::sweep(&cfg)?;
            write_rows(out, &rows)?;
            if let Some(path) = out {
                write_text(&harness::json_sibling(path), &harness::summary_json(&cfg, "sweep", &rows)?)?;
            }
            for row in rows.iter().filter(|r| r.status != "ok") {
                eprintln!("n = {}: {}", row.n, row.status);
            }
            Ok(true)
        }
        Command::Verify(_) => {
            let checks = verify::run_all(cfg.seed)?;
            let mut stdout = io::stdout().lock();
            for c in &checks {
                writeln!(stdout, "{c}")?;
            }
            if let Some(path) = out {
                write_text(path, &harness::summary_json(&cfg, "verify", &checks)?)?;
            }
            Ok(checks.iter().all(|c| c.passed))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

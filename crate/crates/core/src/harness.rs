//! Experiment runner: configuration, construction, Monte Carlo simulation,
//! sweeps and report files.
//!
//! Trial `t` of a run always draws from stream `(seed, Trial, t)` and batch
//! sums are reduced in trial order, so a `(config, seed)` pair reproduces
//! every number in its outputs regardless of the worker count.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::channel::{gp_capacity_grid, AuxFunctions, ModelSpec, StateChannelSpec};
use crate::error::{Error, Result};
use crate::prob::{BinaryInputChannel, FinitePmf};
use crate::profile::{
    estimate_profile, search_frozen, select_sets, select_sets_for_rate, union_bound_threshold,
    CodeProfile, FrozenSearch, SearchOptions, Thresholds, DEFAULT_SEARCH_BATCH, DEFAULT_Z_HIGH,
};
use crate::scheme::{
    chain_effective_rate, effective_rate, run_trials, AsymmetricCode, BatchStats, ChainProfile,
    ChainScheme, MulticodeScheme,
};
use crate::streams::{self, Purpose, RNG_ALGORITHM};

pub const CI_METHOD: &str = "Wilson score, 95%";

const Z_95: f64 = 1.959_963_984_540_054;

/// 95% Wilson score interval for `hits` out of `trials`.
pub fn wilson_interval(hits: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = Z_95 * Z_95;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = Z_95 / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // the bounds are exactly 0 and 1 at the ends; don't let round-off say otherwise
    let lo = if hits == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if hits == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Everything a run needs. JSON files deserialize into this; CLI flags
/// override individual fields afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: String,
    pub params: BTreeMap<String, f64>,
    pub n: usize,
    /// Block lengths for `sweep`; empty means `[n]` elsewhere.
    pub sweep_n: Vec<usize>,
    pub sample_count: usize,
    pub z_high: f64,
    /// Explicit channel-side threshold; overrides every rate setting.
    pub z_low: Option<f64>,
    /// Absolute effective rate target (bits per cell).
    pub rate: Option<f64>,
    /// Effective rate target as a fraction of capacity.
    pub rate_fraction: Option<f64>,
    /// Union-bound target used when no rate or `z_low` is given; also the
    /// frame-error acceptance level of the frozen search.
    pub error_target: f64,
    pub search: bool,
    pub search_budget: usize,
    pub search_batch: usize,
    pub cost_slack: f64,
    pub trials: usize,
    pub k_blocks: usize,
    pub seed: u64,
    pub grid_resolution: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: "example2".into(),
            params: [("alpha", 0.1), ("beta", 0.5), ("B", 0.25)]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            n: 1024,
            sweep_n: Vec::new(),
            sample_count: 1000,
            z_high: DEFAULT_Z_HIGH,
            z_low: None,
            rate: None,
            rate_fraction: None,
            error_target: 0.1,
            search: true,
            search_budget: 20,
            search_batch: DEFAULT_SEARCH_BATCH,
            cost_slack: 0.02,
            trials: 500,
            k_blocks: 1,
            seed: 1,
            grid_resolution: crate::channel::DEFAULT_GRID_RESOLUTION,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|source| Error::MalformedFile {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn model_spec(&self) -> ModelSpec {
        ModelSpec {
            id: self.model.clone(),
            params: self.params.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        for &n in std::iter::once(&self.n).chain(&self.sweep_n) {
            if !n.is_power_of_two() {
                return bad(format!("block length {n} is not a power of two"));
            }
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.k_blocks == 0 {
            return bad("k_blocks must be at least 1".into());
        }
        if self.sample_count == 0 {
            return bad("sample_count must be at least 1".into());
        }
        if self.search && (self.search_budget == 0 || self.search_batch == 0) {
            return bad("search budget and batch must be positive".into());
        }
        if !(self.z_high > 0.0 && self.z_high <= 1.0) {
            return bad(format!("z_high {} outside (0, 1]", self.z_high));
        }
        if !(self.grid_resolution > 0.0 && self.grid_resolution <= 0.5) {
            return bad(format!("grid resolution {} outside (0, 0.5]", self.grid_resolution));
        }
        if !crate::channel::MODEL_IDS.contains(&self.model.as_str()) {
            return Err(Error::UnknownModel(self.model.clone()));
        }
        Ok(())
    }
}

/// Capacity of a model: closed form when known, grid oracle otherwise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityReport {
    pub model: ModelSpec,
    pub closed_form: Option<f64>,
    pub grid: Option<f64>,
    pub grid_aux: Option<AuxFunctions>,
    pub grid_cost: Option<f64>,
    pub resolution: f64,
    /// `|closed_form - grid|` when both exist.
    pub gap: Option<f64>,
}

impl CapacityReport {
    pub fn best(&self) -> Option<f64> {
        self.closed_form.or(self.grid)
    }
}

pub fn capacity(model: &ModelSpec, resolution: f64) -> Result<CapacityReport> {
    let closed_form = model.closed_form_capacity()?;
    let spec = model.build()?;
    let grid = gp_capacity_grid(&spec, resolution);
    let gap = closed_form.zip(grid.as_ref()).map(|(c, g)| (c - g.capacity).abs());
    Ok(CapacityReport {
        model: model.clone(),
        closed_form,
        grid: grid.as_ref().map(|g| g.capacity),
        grid_cost: grid.as_ref().map(|g| g.cost),
        grid_aux: grid.map(|g| g.aux),
        resolution,
        gap,
    })
}

/// A built profile and how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct Construction {
    pub profile: CodeProfile,
    pub capacity: f64,
    pub search: Option<FrozenSearch>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstructionSummary {
    pub model: ModelSpec,
    pub n: usize,
    pub capacity: f64,
    pub message_fraction: f64,
    pub side_fraction: f64,
    pub effective_rate: f64,
    pub thresholds: Thresholds,
    pub search: Option<FrozenSearch>,
}

impl Construction {
    pub fn summary(&self) -> ConstructionSummary {
        let p = &self.profile;
        ConstructionSummary {
            model: p.model.clone(),
            n: p.n(),
            capacity: self.capacity,
            message_fraction: p.code_rate(),
            side_fraction: p.side_len() as f64 / p.n() as f64,
            effective_rate: effective_rate(p),
            thresholds: p.thresholds,
            search: self.search.clone(),
        }
    }
}

/// Estimate, select sets, attach the relay set when it fits, search the
/// frozen vector.
pub fn construct(cfg: &ExperimentConfig, n: usize) -> Result<Construction> {
    cfg.validate()?;
    let model = cfg.model_spec();
    let spec = model.build()?;
    let cap = model.capacity()?;
    let z = estimate_profile(&spec, n, cfg.sample_count, cfg.seed)?;
    let target = match (cfg.rate, cfg.rate_fraction) {
        (Some(r), _) => Some(r),
        (None, Some(f)) => Some(f * cap),
        (None, None) => None,
    };
    let (sets, z_low) = match (cfg.z_low, target) {
        (Some(z_low), _) => (select_sets(&z, cfg.z_high, z_low)?, z_low),
        (None, Some(rate)) => select_sets_for_rate(&z, cfg.z_high, rate)?,
        (None, None) => {
            let z_low = union_bound_threshold(&z, cfg.error_target).min(cfg.z_high);
            (select_sets(&z, cfg.z_high, z_low)?, z_low)
        }
    };
    let thresholds = Thresholds {
        z_high: cfg.z_high,
        z_low,
    };
    let mut profile = CodeProfile::new(model, z, thresholds, sets)?;
    if profile.side_len() <= profile.message_len() {
        profile = profile.with_relay_set()?;
    }
    let search = if cfg.search {
        let opts = SearchOptions {
            trials_budget: cfg.search_budget,
            cost_slack: cfg.cost_slack,
            error_target: cfg.error_target,
            batch: cfg.search_batch,
            seed: cfg.seed,
        };
        let found = search_frozen(&profile, &spec, &opts)?;
        profile = profile.with_frozen_bits(found.frozen_bits.clone())?;
        Some(found)
    } else {
        None
    };
    Ok(Construction {
        profile,
        capacity: cap,
        search,
    })
}

/// Which construction a simulation runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    PointToPoint,
    Multicoding,
    Chained,
}

/// The point-to-point code applies when the model is stateless and its aux
/// writes `x = v`.
fn point_to_point(spec: &StateChannelSpec) -> Option<(BinaryInputChannel, crate::prob::BinaryPmf)> {
    let aux = spec.aux()?;
    if spec.num_states() != 1 || aux.x_map[0] != [0, 1] {
        return None;
    }
    let rows = [0u8, 1].map(|x| {
        FinitePmf::new((0..spec.num_outputs()).map(|y| spec.p_y(y, x, 0)).collect())
            .expect("transition rows are validated")
    });
    let [r0, r1] = rows;
    Some((BinaryInputChannel::new(r0, r1).ok()?, aux.p_v_given_s[0]))
}

/// Per-configuration aggregates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub model: ModelSpec,
    pub scheme: SchemeKind,
    pub n: usize,
    pub k_blocks: usize,
    pub trials: usize,
    pub blocks: usize,
    pub message_bits: usize,
    pub side_bits: usize,
    pub code_rate: f64,
    pub effective_rate: f64,
    pub capacity: f64,
    pub frame_errors: usize,
    pub fer: f64,
    pub fer_ci_low: f64,
    pub fer_ci_high: f64,
    pub failed_trials: usize,
    pub decode_failures: usize,
    pub encode_failures: usize,
    pub mean_cost: f64,
    pub cost_ci_low: f64,
    pub cost_ci_high: f64,
    pub budget: f64,
    pub stuck_writes: usize,
    pub seed: u64,
    pub wall_clock_s: f64,
    pub rng: String,
    pub ci_method: String,
}

/// Runs `cfg.trials` trials (blocks, or chains of `cfg.k_blocks`) of the
/// scheme matching the profile's model.
pub fn simulate(cfg: &ExperimentConfig, profile: &CodeProfile, capacity: f64) -> Result<TrialReport> {
    cfg.validate()?;
    if profile.model.id != cfg.model {
        return Err(Error::Config(format!(
            "profile was built for `{}`, config asks for `{}`",
            profile.model.id, cfg.model
        )));
    }
    let spec = profile.model.build()?;
    let n = profile.n();
    let started = Instant::now();
    let seed = cfg.seed;
    let rng_for = |t: usize| streams::stream(seed, Purpose::Trial, t as u64);

    let (kind, stats, rate, message_bits) = if cfg.k_blocks > 1 {
        let chain = ChainScheme::new(ChainProfile::new(profile.clone(), cfg.k_blocks)?, &spec)?;
        let stats = run_trials(cfg.trials, n, |t, _| chain.trial(&mut rng_for(t)))?;
        let bits = chain.chain().block_message_len();
        (SchemeKind::Chained, stats, chain_effective_rate(profile, cfg.k_blocks), bits)
    } else if let Some((channel, prior)) = point_to_point(&spec) {
        let code = AsymmetricCode::new(profile, &channel, prior)?;
        let stats = run_trials(cfg.trials, n, |t, _| Ok(vec![code.trial(&mut rng_for(t))?]))?;
        (SchemeKind::PointToPoint, stats, effective_rate(profile), profile.message_len())
    } else {
        let code = MulticodeScheme::new(profile, &spec)?;
        let stats = run_trials(cfg.trials, n, |t, ws| Ok(vec![code.trial_in(ws, &mut rng_for(t))?]))?;
        (SchemeKind::Multicoding, stats, effective_rate(profile), profile.message_len())
    };
    Ok(report(cfg, profile, &spec, kind, &stats, rate, message_bits, capacity, started))
}

#[allow(clippy::too_many_arguments)]
fn report(
    cfg: &ExperimentConfig,
    profile: &CodeProfile,
    spec: &StateChannelSpec,
    scheme: SchemeKind,
    stats: &BatchStats,
    effective_rate: f64,
    message_bits: usize,
    capacity: f64,
    started: Instant,
) -> TrialReport {
    let (fer_ci_low, fer_ci_high) = wilson_interval(stats.frame_errors, stats.blocks);
    let mean_cost = stats.mean_cost_per_cell();
    let encoded = (stats.blocks - stats.encode_failures).max(1);
    let half = Z_95 * stats.cost_std() / (encoded as f64).sqrt();
    TrialReport {
        model: profile.model.clone(),
        scheme,
        n: profile.n(),
        k_blocks: cfg.k_blocks,
        trials: stats.trials,
        blocks: stats.blocks,
        message_bits,
        side_bits: profile.side_len(),
        code_rate: profile.code_rate(),
        effective_rate,
        capacity,
        frame_errors: stats.frame_errors,
        fer: stats.fer(),
        fer_ci_low,
        fer_ci_high,
        failed_trials: stats.failed_trials,
        decode_failures: stats.decode_failures,
        encode_failures: stats.encode_failures,
        mean_cost,
        cost_ci_low: mean_cost - half,
        cost_ci_high: mean_cost + half,
        budget: spec.budget(),
        stuck_writes: stats.stuck_writes,
        seed: cfg.seed,
        wall_clock_s: started.elapsed().as_secs_f64(),
        rng: RNG_ALGORITHM.into(),
        ci_method: CI_METHOD.into(),
    }
}

/// One row of a sweep CSV. A failed point keeps its `n` and seed, leaves
/// the numbers empty and carries the error in `status`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub rate: Option<f64>,
    pub capacity: Option<f64>,
    #[serde(rename = "FER")]
    pub fer: Option<f64>,
    #[serde(rename = "FER_CI_low")]
    pub fer_ci_low: Option<f64>,
    #[serde(rename = "FER_CI_high")]
    pub fer_ci_high: Option<f64>,
    pub cost: Option<f64>,
    pub seed: u64,
    pub message_fraction: Option<f64>,
    pub side_fraction: Option<f64>,
    pub status: String,
}

fn sweep_point(cfg: &ExperimentConfig, n: usize) -> Result<SweepRow> {
    let built = construct(cfg, n)?;
    let r = simulate(cfg, &built.profile, built.capacity)?;
    Ok(SweepRow {
        n,
        rate: Some(r.effective_rate),
        capacity: Some(r.capacity),
        fer: Some(r.fer),
        fer_ci_low: Some(r.fer_ci_low),
        fer_ci_high: Some(r.fer_ci_high),
        cost: Some(r.mean_cost),
        seed: cfg.seed,
        message_fraction: Some(built.profile.code_rate()),
        side_fraction: Some(built.profile.side_len() as f64 / n as f64),
        status: "ok".into(),
    })
}

/// Construct and simulate at every block length of `cfg.sweep_n`. A failing
/// point is reported in its row and the sweep carries on.
pub fn sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    if cfg.sweep_n.is_empty() {
        return Err(Error::Config("sweep needs at least one block length".into()));
    }
    cfg.validate()?;
    Ok(cfg
        .sweep_n
        .iter()
        .map(|&n| {
            sweep_point(cfg, n).unwrap_or_else(|e| SweepRow {
                n,
                rate: None,
                capacity: None,
                fer: None,
                fer_ci_low: None,
                fer_ci_high: None,
                cost: None,
                seed: cfg.seed,
                message_fraction: None,
                side_fraction: None,
                status: format!("error: {e}"),
            })
        })
        .collect())
}

/// Writes `rows` as CSV with a header.
pub fn write_csv<T: Serialize>(out: impl Write, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| Error::Config(format!("csv: {e}")))?;
    }
    w.flush()?;
    Ok(())
}

/// JSON document echoing the resolved config next to the payload.
pub fn summary_json<T: Serialize>(cfg: &ExperimentConfig, command: &str, payload: &T) -> Result<String> {
    #[derive(Serialize)]
    struct Doc<'a, T> {
        command: &'a str,
        config: &'a ExperimentConfig,
        rng: &'a str,
        result: &'a T,
    }
    let mut s = serde_json::to_string_pretty(&Doc {
        command,
        config: cfg,
        rng: RNG_ALGORITHM,
        result: payload,
    })?;
    s.push('\n');
    Ok(s)
}

/// `path` with its extension replaced by `json`.
pub fn json_sibling(path: &Path) -> PathBuf {
    path.with_extension("json")
}

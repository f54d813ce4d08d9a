//! Code construction.
//!
//! Per-index Bhattacharyya parameters are estimated by Monte Carlo with
//! genie-aided prefixes, the indices are split into the four sets
//!
//! | set          | source side (`V|S`) | channel side (`V|Y`) | encoder        | decoder        |
//! |--------------|---------------------|----------------------|----------------|----------------|
//! | `message`    | high                | low                  | message bit    | argmax         |
//! | `frozen`     | high                | not low              | frozen bit     | frozen bit     |
//! | `random_low` | not high            | low                  | random round   | argmax         |
//! | `side`       | not high            | not low              | random round   | side payload   |
//!
//! and a frozen vector is searched by repeated uniform draws.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ModelSpec, StateChannelSpec};
use crate::error::{Error, Result};
use crate::scheme::{self, MulticodeScheme};
use crate::sc::{Observation, ScContext, Workspace};
use crate::streams::{self, Purpose, StreamRng};
use crate::transform::transform_in_place;

pub const PROFILE_VERSION: u32 = 1;

/// Default source-side threshold: `i` is in `H` iff `z_source[i] >= 0.9`.
pub const DEFAULT_Z_HIGH: f64 = 0.9;

/// Blocks simulated per frozen-vector candidate.
pub const DEFAULT_SEARCH_BATCH: usize = 200;

const ESTIMATION_CHUNK: usize = 16;

/// Estimated `Z(U_i | U_{<i}, S)` and `Z(U_i | U_{<i}, Y)` for every index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZProfile {
    pub n: usize,
    pub z_source: Vec<f64>,
    pub z_channel: Vec<f64>,
    /// Estimated genie-aided argmax error `P(U_i != argmax | U_{<i}, Y)`.
    #[serde(default)]
    pub pe_channel: Vec<f64>,
    pub sample_count: usize,
    pub seed: u64,
}

fn z_of(p1: f64) -> f64 {
    2.0 * (p1 * (1.0 - p1)).max(0.0).sqrt()
}

/// Draws `(s, v, x, y)` for one block from the model under its aux functions.
pub(crate) fn sample_block(
    spec: &StateChannelSpec,
    n: usize,
    rng: &mut StreamRng,
) -> Result<(Vec<usize>, Vec<u8>, Vec<u8>, Vec<usize>)> {
    use rand::Rng;
    let aux = spec.require_aux()?;
    let s = spec.sample_states(n, rng);
    let v: Vec<u8> = s
        .iter()
        .map(|&si| u8::from(rng.random::<f64>() < aux.p_v_given_s[si].p1()))
        .collect();
    let x: Vec<u8> = v.iter().zip(&s).map(|(&vi, &si)| aux.x(vi, si)).collect();
    let y = spec.simulate_channel(&x, &s, rng)?;
    Ok((s, v, x, y))
}

/// Monte Carlo estimate of both Z-profiles from `sample_count` model blocks.
///
/// Each block uses its own stream `(seed, Estimation, t)` and chunk sums are
/// reduced in a fixed order, so the result is bit-identical for any number
/// of worker threads.
pub fn estimate_profile(
    spec: &StateChannelSpec,
    n: usize,
    sample_count: usize,
    seed: u64,
) -> Result<ZProfile> {
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    if sample_count == 0 {
        return Err(Error::InvalidParameter("sample_count must be positive".into()));
    }
    let enc = ScContext::iid(n, spec.encoder_base()?)?;
    let dec = ScContext::iid(n, spec.decoder_base()?)?;

    let chunks = sample_count.div_ceil(ESTIMATION_CHUNK);
    let partials: Vec<[Vec<f64>; 3]> = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<[Vec<f64>; 3]> {
            let mut ws = Workspace::new(n);
            let mut zs = vec![0.0; n];
            let mut zc = vec![0.0; n];
            let mut pe = vec![0.0; n];
            let end = ((c + 1) * ESTIMATION_CHUNK).min(sample_count);
            for t in c * ESTIMATION_CHUNK..end {
                let mut rng = streams::stream(seed, Purpose::Estimation, t as u64);
                let (s, mut u, _, y) = sample_block(spec, n, &mut rng)?;
                transform_in_place(&mut u);
                let ps = enc.genie_probabilities_in(&mut ws, &Observation(s), &u)?;
                for (acc, p) in zs.iter_mut().zip(ps) {
                    *acc += z_of(p);
                }
                let pc = dec.genie_probabilities_in(&mut ws, &Observation(y), &u)?;
                for ((z, e), p) in zc.iter_mut().zip(pe.iter_mut()).zip(pc) {
                    *z += z_of(p);
                    *e += p.min(1.0 - p);
                }
            }
            Ok([zs, zc, pe])
        })
        .collect::<Result<_>>()?;

    let mut z_source = vec![0.0; n];
    let mut z_channel = vec![0.0; n];
    let mut pe_channel = vec![0.0; n];
    for [zs, zc, pe] in &partials {
        for i in 0..n {
            z_source[i] += zs[i];
            z_channel[i] += zc[i];
            pe_channel[i] += pe[i];
        }
    }
    let scale = 1.0 / sample_count as f64;
    for z in z_source
        .iter_mut()
        .chain(z_channel.iter_mut())
        .chain(pe_channel.iter_mut())
    {
        *z = (*z * scale).clamp(0.0, 1.0);
    }
    Ok(ZProfile {
        n,
        z_source,
        z_channel,
        pe_channel,
        sample_count,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub z_high: f64,
    pub z_low: f64,
}

/// The four-way partition of `0..n`, each list sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IndexSets {
    pub message: Vec<usize>,
    pub frozen: Vec<usize>,
    pub random_low: Vec<usize>,
    pub side: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Message,
    Frozen,
    RandomLow,
    Side,
}

impl IndexSets {
    /// Role of every index; fails unless the sets partition `0..n`.
    pub fn roles(&self, n: usize) -> Result<Vec<Role>> {
        let mut roles: Vec<Option<Role>> = vec![None; n];
        for (set, role) in [
            (&self.message, Role::Message),
            (&self.frozen, Role::Frozen),
            (&self.random_low, Role::RandomLow),
            (&self.side, Role::Side),
        ] {
            if set.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidProfile(format!("{role:?} set is not strictly ascending")));
            }
            for &i in set {
                let slot = roles
                    .get_mut(i)
                    .ok_or_else(|| Error::InvalidProfile(format!("index {i} out of range")))?;
                if let Some(prev) = slot {
                    return Err(Error::InvalidProfile(format!(
                        "index {i} is in both {prev:?} and {role:?}"
                    )));
                }
                *slot = Some(role);
            }
        }
        roles
            .into_iter()
            .enumerate()
            .map(|(i, r)| r.ok_or_else(|| Error::InvalidProfile(format!("index {i} unassigned"))))
            .collect()
    }
}

fn check_thresholds(z_high: f64, z_low: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&z_high) || !(0.0..=1.0).contains(&z_low) || z_low > z_high {
        return Err(Error::InvalidParameter(format!(
            "thresholds (high {z_high}, low {z_low}) must satisfy 0 <= low <= high <= 1"
        )));
    }
    Ok(())
}

/// Threshold split: `i` is source-high iff `z_source[i] >= z_high` and
/// channel-low iff `z_channel[i] <= z_low`.
pub fn select_sets(zp: &ZProfile, z_high: f64, z_low: f64) -> Result<IndexSets> {
    check_thresholds(z_high, z_low)?;
    let mut sets = IndexSets::default();
    for i in 0..zp.n {
        let high = zp.z_source[i] >= z_high;
        let low = zp.z_channel[i] <= z_low;
        match (high, low) {
            (true, true) => sets.message.push(i),
            (true, false) => sets.frozen.push(i),
            (false, true) => sets.random_low.push(i),
            (false, false) => sets.side.push(i),
        }
    }
    if sets.message.is_empty() {
        return Err(Error::EmptyMessageSet);
    }
    Ok(sets)
}

/// Largest `z_low` with `sum_{i : z_channel[i] <= z_low} z_channel[i] <= error_target`
/// (a union bound on the argmax error events). Returns 0 if no index fits.
pub fn union_bound_threshold(zp: &ZProfile, error_target: f64) -> f64 {
    let mut z = zp.z_channel.clone();
    z.sort_by(f64::total_cmp);
    let mut total = 0.0;
    let mut threshold = 0.0;
    let mut k = 0;
    while k < z.len() {
        // include the whole group of equal values or nothing
        let mut end = k;
        let mut group = 0.0;
        while end < z.len() && z[end] == z[k] {
            group += z[end];
            end += 1;
        }
        if total + group > error_target {
            break;
        }
        total += group;
        threshold = z[k];
        k = end;
    }
    threshold
}

/// Rate-targeted split: the `message_size` source-high indices with the
/// smallest `z_channel` (ties to the lower index) carry the message; the
/// largest of their `z_channel` values becomes `z_low` for the rest.
pub fn select_sets_for_size(
    zp: &ZProfile,
    z_high: f64,
    message_size: usize,
) -> Result<(IndexSets, f64)> {
    check_thresholds(z_high, 0.0)?;
    if message_size == 0 {
        return Err(Error::EmptyMessageSet);
    }
    let mut high: Vec<usize> = (0..zp.n).filter(|&i| zp.z_source[i] >= z_high).collect();
    if message_size > high.len() {
        return Err(Error::InvalidParameter(format!(
            "{message_size} message bits requested, only {} source-high indices",
            high.len()
        )));
    }
    high.sort_by(|&a, &b| zp.z_channel[a].total_cmp(&zp.z_channel[b]).then(a.cmp(&b)));
    let z_low = zp.z_channel[high[message_size - 1]];
    let mut is_message = vec![false; zp.n];
    for &i in &high[..message_size] {
        is_message[i] = true;
    }
    let mut sets = IndexSets::default();
    for i in 0..zp.n {
        if is_message[i] {
            sets.message.push(i);
        } else if zp.z_source[i] >= z_high {
            sets.frozen.push(i);
        } else if zp.z_channel[i] <= z_low {
            sets.random_low.push(i);
        } else {
            sets.side.push(i);
        }
    }
    Ok((sets, z_low))
}

/// Smallest rate-targeted split whose effective rate `(|message| - |side|) / n`
/// reaches `rate`. `|message| - |side|` never decreases as the message set
/// grows (the side set only shrinks), so a binary search suffices.
pub fn select_sets_for_rate(zp: &ZProfile, z_high: f64, rate: f64) -> Result<(IndexSets, f64)> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::InvalidParameter(format!("target rate {rate} outside (0, 1]")));
    }
    let need = (rate * zp.n as f64 - 1e-9).ceil() as usize;
    let high = zp.z_source.iter().filter(|&&z| z >= z_high).count();
    let net = |k: usize| -> Result<(IndexSets, f64, bool)> {
        let (sets, z_low) = select_sets_for_size(zp, z_high, k)?;
        let ok = sets.message.len() >= need + sets.side.len();
        Ok((sets, z_low, ok))
    };
    let (mut lo, mut hi) = (need.max(1), high);
    if lo > hi || !net(hi)?.2 {
        return Err(Error::InvalidParameter(format!(
            "target rate {rate} not reachable with {high} source-high indices at n = {}",
            zp.n
        )));
    }
    while lo < hi {
        let mid = (lo + hi) / 2;
        if net(mid)?.2 {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let (sets, z_low, _) = net(lo)?;
    Ok((sets, z_low))
}

/// The `|side|` message indices with the smallest `z_channel` (ties to the
/// lower index), sorted ascending.
pub fn choose_relay_set(sets: &IndexSets, z_channel: &[f64]) -> Result<Vec<usize>> {
    if sets.side.len() > sets.message.len() {
        return Err(Error::InvalidParameter(format!(
            "side set ({}) larger than message set ({}); cannot chain",
            sets.side.len(),
            sets.message.len()
        )));
    }
    let mut m = sets.message.clone();
    m.sort_by(|&a, &b| z_channel[a].total_cmp(&z_channel[b]).then(a.cmp(&b)));
    let mut relay = m[..sets.side.len()].to_vec();
    relay.sort_unstable();
    Ok(relay)
}

/// A constructed code: sets, frozen vector, relay set and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeProfile {
    pub model: ModelSpec,
    pub thresholds: Thresholds,
    pub z: ZProfile,
    pub sets: IndexSets,
    pub frozen_bits: Vec<u8>,
    pub relay_set: Vec<usize>,
    roles: Vec<Role>,
}

impl CodeProfile {
    /// Profile with an all-zero frozen vector and no relay set.
    pub fn new(model: ModelSpec, z: ZProfile, thresholds: Thresholds, sets: IndexSets) -> Result<Self> {
        let frozen_bits = vec![0; sets.frozen.len()];
        Self::from_parts(model, z, thresholds, sets, frozen_bits, Vec::new())
    }

    pub fn from_parts(
        model: ModelSpec,
        z: ZProfile,
        thresholds: Thresholds,
        sets: IndexSets,
        frozen_bits: Vec<u8>,
        relay_set: Vec<usize>,
    ) -> Result<Self> {
        let n = z.n;
        if !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        if z.z_source.len() != n || z.z_channel.len() != n {
            return Err(Error::InvalidProfile("z-profile length differs from n".into()));
        }
        if z
            .z_source
            .iter()
            .chain(&z.z_channel)
            .any(|v| !(0.0..=1.0).contains(v))
        {
            return Err(Error::InvalidProfile("z estimate outside [0, 1]".into()));
        }
        if z.sample_count == 0 {
            return Err(Error::InvalidProfile("sample_count must be positive".into()));
        }
        let roles = sets.roles(n)?;
        if frozen_bits.len() != sets.frozen.len() {
            return Err(Error::InvalidProfile(format!(
                "{} frozen bits for {} frozen indices",
                frozen_bits.len(),
                sets.frozen.len()
            )));
        }
        if frozen_bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidProfile("frozen bits must be 0/1".into()));
        }
        if !relay_set.is_empty() {
            if relay_set.len() != sets.side.len() {
                return Err(Error::InvalidProfile(format!(
                    "relay set has {} indices, side set {}",
                    relay_set.len(),
                    sets.side.len()
                )));
            }
            if relay_set.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidProfile("relay set is not strictly ascending".into()));
            }
            if relay_set.iter().any(|&i| roles.get(i) != Some(&Role::Message)) {
                return Err(Error::InvalidProfile("relay set is not inside the message set".into()));
            }
        }
        Ok(Self {
            model,
            thresholds,
            z,
            sets,
            frozen_bits,
            relay_set,
            roles,
        })
    }

    pub fn n(&self) -> usize {
        self.z.n
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn message_len(&self) -> usize {
        self.sets.message.len()
    }

    pub fn side_len(&self) -> usize {
        self.sets.side.len()
    }

    /// `|message| / n`.
    pub fn code_rate(&self) -> f64 {
        self.message_len() as f64 / self.n() as f64
    }

    pub fn with_frozen_bits(mut self, bits: Vec<u8>) -> Result<Self> {
        if bits.len() != self.sets.frozen.len() || bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidProfile("frozen vector has the wrong shape".into()));
        }
        self.frozen_bits = bits;
        Ok(self)
    }

    /// Fills the relay set per [`choose_relay_set`].
    pub fn with_relay_set(mut self) -> Result<Self> {
        self.relay_set = choose_relay_set(&self.sets, &self.z.z_channel)?;
        Ok(self)
    }

    /// Whether chaining is usable: a relay set matching the side set.
    pub fn chaining_ready(&self) -> bool {
        self.relay_set.len() == self.sets.side.len()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Json(source) => Error::MalformedFile {
                path: path.to_path_buf(),
                source,
            },
            other => other,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ProfileFile {
            version: PROFILE_VERSION,
            model_id: self.model.id.clone(),
            model_params: self.model.params.clone(),
            n: self.n(),
            thresholds: self.thresholds,
            z_source: self.z.z_source.clone(),
            z_channel: self.z.z_channel.clone(),
            pe_channel: self.z.pe_channel.clone(),
            sets: self.sets.clone(),
            frozen_bits: self.frozen_bits.clone(),
            relay_set: self.relay_set.clone(),
            seed: self.z.seed,
            sample_count: self.z.sample_count,
            rng: streams::RNG_ALGORITHM.to_string(),
        };
        let mut text = serde_json::to_string_pretty(&file)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Version {
            version: u32,
        }
        let Version { version } = serde_json::from_str(text)?;
        if version != PROFILE_VERSION {
            return Err(Error::VersionMismatch {
                found: version,
                expected: PROFILE_VERSION,
            });
        }
        let f: ProfileFile = serde_json::from_str(text)?;
        if f.n != f.z_source.len() {
            return Err(Error::InvalidProfile(format!(
                "n = {} but {} z values",
                f.n,
                f.z_source.len()
            )));
        }
        Self::from_parts(
            ModelSpec {
                id: f.model_id,
                params: f.model_params,
            },
            ZProfile {
                n: f.n,
                z_source: f.z_source,
                z_channel: f.z_channel,
                pe_channel: f.pe_channel,
                sample_count: f.sample_count,
                seed: f.seed,
            },
            f.thresholds,
            f.sets,
            f.frozen_bits,
            f.relay_set,
        )
    }
}

/// On-disk layout of a profile.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    version: u32,
    model_id: String,
    #[serde(default)]
    model_params: std::collections::BTreeMap<String, f64>,
    n: usize,
    thresholds: Thresholds,
    z_source: Vec<f64>,
    z_channel: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pe_channel: Vec<f64>,
    sets: IndexSets,
    frozen_bits: Vec<u8>,
    relay_set: Vec<usize>,
    seed: u64,
    sample_count: usize,
    #[serde(default)]
    rng: String,
}

/// Acceptance rule and budget for [`search_frozen`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Maximum number of candidates drawn.
    pub trials_budget: usize,
    /// Accept if mean cost per cell `<= B + cost_slack`.
    pub cost_slack: f64,
    /// Accept if the batch frame-error rate `<= error_target`.
    pub error_target: f64,
    pub batch: usize,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            trials_budget: 20,
            cost_slack: 0.02,
            error_target: 0.1,
            batch: DEFAULT_SEARCH_BATCH,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrozenSearch {
    pub frozen_bits: Vec<u8>,
    /// `false` if the budget ran out; `frozen_bits` is then the best seen.
    pub accepted: bool,
    pub candidates_tried: usize,
    pub mean_cost: f64,
    pub fer: f64,
}

/// Draws uniform frozen vectors until one passes a simulated batch.
pub fn search_frozen(
    profile: &CodeProfile,
    spec: &StateChannelSpec,
    opts: &SearchOptions,
) -> Result<FrozenSearch> {
    use rand::Rng;
    if opts.trials_budget == 0 || opts.batch == 0 {
        return Err(Error::InvalidParameter("search budget and batch must be positive".into()));
    }
    let cost_limit = spec.budget() + opts.cost_slack;
    let mut best: Option<(f64, FrozenSearch)> = None;
    for c in 0..opts.trials_budget {
        let mut rng = streams::stream(opts.seed, Purpose::FrozenCandidate, c as u64);
        let bits: Vec<u8> = (0..profile.sets.frozen.len())
            .map(|_| rng.random_range(0..2u8))
            .collect();
        let candidate = profile.clone().with_frozen_bits(bits.clone())?;
        let code = MulticodeScheme::new(&candidate, spec)?;
        let stats = scheme::run_batch(&code, opts.batch, opts.seed, (c * opts.batch) as u64)?;
        let mean_cost = stats.mean_cost_per_cell();
        let fer = stats.fer();
        let result = FrozenSearch {
            frozen_bits: bits,
            accepted: mean_cost <= cost_limit && fer <= opts.error_target,
            candidates_tried: c + 1,
            mean_cost,
            fer,
        };
        if result.accepted {
            return Ok(result);
        }
        let shortfall =
            (mean_cost - cost_limit).max(0.0) + (fer - opts.error_target).max(0.0);
        if best.as_ref().is_none_or(|(s, _)| shortfall < *s) {
            best = Some((shortfall, result));
        }
    }
    let (_, mut result) = best.expect("budget is positive");
    result.candidates_tried = opts.trials_budget;
    Ok(result)
}

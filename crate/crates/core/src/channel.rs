//! Channels with a state known to the encoder, and the models used for flash
//! rewriting.
//!
//! A [`StateChannelSpec`] holds `p(s)`, `p(y|x,s)`, the cost `b(x)` with its
//! budget `B`, and optionally the auxiliary pair `p(v|s)`, `x(v,s)` that the
//! multicoding encoder runs on. Point-to-point channels are the special case
//! of a single state.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{
    binary_entropy, star_convolve, BinaryInputChannel, BinaryPmf, FinitePmf, JointBase,
};

/// Default resolution of [`gp_capacity_grid`].
pub const DEFAULT_GRID_RESOLUTION: f64 = 1e-3;

const COST_TOLERANCE: f64 = 1e-12;

/// `p(v|s)` and the deterministic encoder map `x(v,s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxFunctions {
    pub p_v_given_s: Vec<BinaryPmf>,
    /// `x_map[s][v]`.
    pub x_map: Vec<[u8; 2]>,
}

impl AuxFunctions {
    pub fn x(&self, v: u8, s: usize) -> u8 {
        self.x_map[s][v as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateChannelSpec {
    state_pmf: FinitePmf,
    /// `transition[s][x]` is the pmf of `y`.
    transition: Vec<[FinitePmf; 2]>,
    cost: [f64; 2],
    budget: f64,
    aux: Option<AuxFunctions>,
}

impl StateChannelSpec {
    pub fn new(
        state_pmf: FinitePmf,
        transition: Vec<[FinitePmf; 2]>,
        cost: [f64; 2],
        budget: f64,
    ) -> Result<Self> {
        if transition.len() != state_pmf.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} transition rows for {} states",
                transition.len(),
                state_pmf.len()
            )));
        }
        let ny = transition[0][0].len();
        if transition.iter().flatten().any(|row| row.len() != ny) {
            return Err(Error::DimensionMismatch("output alphabets differ".into()));
        }
        if !(budget >= 0.0) || cost.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cost {cost:?} / budget {budget}"
            )));
        }
        Ok(Self {
            state_pmf,
            transition,
            cost,
            budget,
            aux: None,
        })
    }

    /// A channel without state: `p(y|x)`.
    pub fn stateless(channel: &BinaryInputChannel, cost: [f64; 2], budget: f64) -> Result<Self> {
        Self::new(
            FinitePmf::point(1, 0),
            vec![[channel.row(0).clone(), channel.row(1).clone()]],
            cost,
            budget,
        )
    }

    pub fn with_aux(mut self, aux: AuxFunctions) -> Result<Self> {
        if aux.p_v_given_s.len() != self.num_states() || aux.x_map.len() != self.num_states() {
            return Err(Error::DimensionMismatch(format!(
                "aux tables cover {} / {} states, model has {}",
                aux.p_v_given_s.len(),
                aux.x_map.len(),
                self.num_states()
            )));
        }
        if aux.x_map.iter().flatten().any(|&x| x > 1) {
            return Err(Error::InvalidParameter("x(v,s) must be binary".into()));
        }
        self.aux = Some(aux);
        Ok(self)
    }

    pub fn num_states(&self) -> usize {
        self.state_pmf.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.transition[0][0].len()
    }

    pub fn state_pmf(&self) -> &FinitePmf {
        &self.state_pmf
    }

    pub fn p_y(&self, y: usize, x: u8, s: usize) -> f64 {
        self.transition[s][x as usize].prob(y)
    }

    pub fn cost(&self, x: u8) -> f64 {
        self.cost[x as usize]
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn aux(&self) -> Option<&AuxFunctions> {
        self.aux.as_ref()
    }

    pub fn require_aux(&self) -> Result<&AuxFunctions> {
        self.aux.as_ref().ok_or(Error::MissingAux)
    }

    /// Joint of `(v, s)`: the encoder-side SC base.
    pub fn encoder_base(&self) -> Result<JointBase> {
        let aux = self.require_aux()?;
        let row = |v: u8| -> Vec<f64> {
            (0..self.num_states())
                .map(|s| self.state_pmf.prob(s) * aux.p_v_given_s[s].prob(v))
                .collect()
        };
        Ok(JointBase::from_weights_unchecked(row(0), row(1)))
    }

    /// Joint of `(v, y)` with the state marginalised: the decoder-side SC base.
    pub fn decoder_base(&self) -> Result<JointBase> {
        let aux = self.require_aux()?;
        let row = |v: u8| -> Vec<f64> {
            (0..self.num_outputs())
                .map(|y| {
                    let mut acc = 0.0;
                    for s in 0..self.num_states() {
                        let vs = self.state_pmf.prob(s) * aux.p_v_given_s[s].prob(v);
                        acc += vs * self.p_y(y, aux.x(v, s), s);
                    }
                    acc
                })
                .collect()
        };
        Ok(JointBase::from_weights_unchecked(row(0), row(1)))
    }

    /// `p(y|v)` under the aux functions.
    pub fn y_given_v(&self) -> Result<BinaryInputChannel> {
        self.decoder_base()?.conditional_channel()
    }

    /// `p(s|v)` under the aux functions.
    pub fn s_given_v(&self) -> Result<BinaryInputChannel> {
        self.encoder_base()?.conditional_channel()
    }

    /// `E b(X)` per cell under the aux functions.
    pub fn expected_cost(&self) -> Result<f64> {
        let aux = self.require_aux()?;
        Ok(expected_cost_of(self, &aux.p_v_given_s, &aux.x_map))
    }

    /// `I(V;Y) - I(V;S)` under the aux functions.
    pub fn aux_rate(&self) -> Result<f64> {
        let aux = self.require_aux()?;
        let p: Vec<f64> = aux.p_v_given_s.iter().map(|b| b.p1()).collect();
        Ok(gp_objective(self, &p, &aux.x_map))
    }

    pub fn sample_states<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<usize> {
        (0..n)
            .map(|_| self.state_pmf.sample_with(rng.random()))
            .collect()
    }

    /// Draws `y_i ~ p(. | x_i, s_i)` independently.
    pub fn simulate_channel<R: Rng + ?Sized>(
        &self,
        x: &[u8],
        s: &[usize],
        rng: &mut R,
    ) -> Result<Vec<usize>> {
        if x.len() != s.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} inputs, {} states",
                x.len(),
                s.len()
            )));
        }
        x.iter()
            .zip(s)
            .map(|(&xi, &si)| {
                if xi > 1 || si >= self.num_states() {
                    return Err(Error::InvalidParameter(format!("symbol pair ({xi}, {si})")));
                }
                Ok(self.transition[si][xi as usize].sample_with(rng.random()))
            })
            .collect()
    }
}

fn binary_row(p1: f64) -> FinitePmf {
    FinitePmf::new(vec![1.0 - p1, p1]).expect("probability checked by caller")
}

fn check_unit(name: &str, p: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(Error::InvalidParameter(format!("{name} = {p} outside [0, 1]")))
    }
}

/// Noisy WOM cell with a binary asymmetric write channel.
///
/// `P(y=1 | x, s) = alpha0` for `(x, s) = (0, 0)` and `1 - alpha1` otherwise;
/// cost `b(x) = x`. No auxiliary functions are attached.
pub fn make_example1(alpha0: f64, alpha1: f64, beta: f64, budget: f64) -> Result<StateChannelSpec> {
    check_unit("alpha0", alpha0)?;
    check_unit("alpha1", alpha1)?;
    check_unit("beta", beta)?;
    let stuck = binary_row(1.0 - alpha1);
    StateChannelSpec::new(
        FinitePmf::new(vec![1.0 - beta, beta])?,
        vec![
            [binary_row(alpha0), stuck.clone()],
            [stuck.clone(), stuck],
        ],
        [0.0, 1.0],
        budget,
    )
}

const EPSILON_SLACK: f64 = 1e-12;

fn example2_epsilon(beta: f64, budget: f64) -> Result<f64> {
    check_unit("beta", beta)?;
    if beta >= 1.0 {
        return Err(Error::InvalidParameter("beta must be below 1".into()));
    }
    if !(budget >= 0.0) {
        return Err(Error::InvalidParameter(format!("budget {budget} is negative")));
    }
    let epsilon = budget / (1.0 - beta);
    // round-off slack so that e.g. B = 0.1, beta = 0.8 counts as 1/2
    if epsilon > 0.5 + EPSILON_SLACK {
        return Err(Error::InvalidParameter(format!(
            "epsilon = B/(1-beta) = {epsilon} exceeds 1/2"
        )));
    }
    Ok(epsilon.min(0.5))
}

/// `P(V=1 | S=1) = eps(1-alpha) / (eps * alpha)`, taken as 0 when `eps = 0`.
pub fn example2_stuck_aux(alpha: f64, epsilon: f64) -> f64 {
    if epsilon == 0.0 {
        0.0
    } else {
        epsilon * (1.0 - alpha) / star_convolve(epsilon, alpha)
    }
}

/// WOM with writing noise: a BSC(`alpha`) on free cells, output stuck at 1 on
/// cells with `s = 1`; cost `b(x) = x`. Carries the capacity-achieving aux
/// functions `x(v,s) = v AND NOT s`, `P(V=1|S=0) = eps`,
/// `P(V=1|S=1) = eps(1-alpha)/(eps * alpha)` with `eps = B/(1-beta)`.
pub fn make_example2(alpha: f64, beta: f64, budget: f64) -> Result<StateChannelSpec> {
    check_unit("alpha", alpha)?;
    let epsilon = example2_epsilon(beta, budget)?;
    let stuck = FinitePmf::point(2, 1);
    let spec = StateChannelSpec::new(
        FinitePmf::new(vec![1.0 - beta, beta])?,
        vec![
            [binary_row(alpha), binary_row(1.0 - alpha)],
            [stuck.clone(), stuck],
        ],
        [0.0, 1.0],
        budget,
    )?;
    spec.with_aux(AuxFunctions {
        p_v_given_s: vec![
            BinaryPmf::new(epsilon)?,
            BinaryPmf::new(example2_stuck_aux(alpha, epsilon).clamp(0.0, 1.0))?,
        ],
        x_map: vec![[0, 1], [0, 0]],
    })
}

/// `(1 - beta) [h(eps * alpha) - h(alpha)]`.
pub fn capacity_example2(alpha: f64, beta: f64, budget: f64) -> Result<f64> {
    check_unit("alpha", alpha)?;
    let epsilon = example2_epsilon(beta, budget)?;
    Ok((1.0 - beta) * (binary_entropy(star_convolve(epsilon, alpha)) - binary_entropy(alpha)))
}

/// Stateless BSC(`alpha`) with cost `b(x) = x` and budget `epsilon`; aux is
/// `P(X=1) = min(epsilon, 1/2)`, `x = v`.
pub fn make_bsc(alpha: f64, epsilon: f64) -> Result<StateChannelSpec> {
    check_unit("alpha", alpha)?;
    check_unit("epsilon", epsilon)?;
    let ch = BinaryInputChannel::new(binary_row(alpha), binary_row(1.0 - alpha))?;
    StateChannelSpec::stateless(&ch, [0.0, 1.0], epsilon)?.with_aux(AuxFunctions {
        p_v_given_s: vec![BinaryPmf::new(epsilon.min(0.5))?],
        x_map: vec![[0, 1]],
    })
}

/// `h(alpha * min(eps, 1/2)) - h(alpha)`.
pub fn capacity_bsc(alpha: f64, epsilon: f64) -> Result<f64> {
    check_unit("alpha", alpha)?;
    check_unit("epsilon", epsilon)?;
    Ok(binary_entropy(star_convolve(epsilon.min(0.5), alpha)) - binary_entropy(alpha))
}

/// Stateless binary asymmetric channel: `P(y=1|x=0) = p01`,
/// `P(y=0|x=1) = p10`. Cost `b(x) = x` with an inactive budget of 1. No aux.
pub fn make_basym(p01: f64, p10: f64) -> Result<StateChannelSpec> {
    check_unit("p01", p01)?;
    check_unit("p10", p10)?;
    let ch = BinaryInputChannel::new(binary_row(p01), binary_row(1.0 - p10))?;
    StateChannelSpec::stateless(&ch, [0.0, 1.0], 1.0)
}

/// The Example 2 degradation witness `W : Y -> S` with `W(1|0) = 0` and
/// `W(1|1) = beta / ((eps * alpha)(1 - beta) + beta)`; rows indexed by `y`.
pub fn appendix_b_witness(alpha: f64, beta: f64, budget: f64) -> Result<BinaryInputChannel> {
    check_unit("alpha", alpha)?;
    let epsilon = example2_epsilon(beta, budget)?;
    let denom = star_convolve(epsilon, alpha) * (1.0 - beta) + beta;
    let ratio = if denom > 0.0 { beta / denom } else { 0.0 };
    BinaryInputChannel::from_rows(vec![1.0, 0.0], vec![1.0 - ratio, ratio])
}

fn expected_cost_of(spec: &StateChannelSpec, p_v: &[BinaryPmf], x_map: &[[u8; 2]]) -> f64 {
    (0..spec.num_states())
        .map(|s| {
            spec.state_pmf.prob(s)
                * (p_v[s].p0() * spec.cost(x_map[s][0]) + p_v[s].p1() * spec.cost(x_map[s][1]))
        })
        .sum()
}

/// `H(V|S) - H(V|Y) = I(V;Y) - I(V;S)` for `P(V=1|S=s) = p1[s]`.
fn gp_objective(spec: &StateChannelSpec, p1: &[f64], x_map: &[[u8; 2]]) -> f64 {
    let ns = spec.num_states();
    let ny = spec.num_outputs();
    let mut h_v_given_s = 0.0;
    let mut vy = [vec![0.0; ny], vec![0.0; ny]];
    for s in 0..ns {
        let ps = spec.state_pmf.prob(s);
        if ps == 0.0 {
            continue;
        }
        h_v_given_s += ps * binary_entropy(p1[s]);
        for v in 0..2u8 {
            let pvs = ps * if v == 1 { p1[s] } else { 1.0 - p1[s] };
            if pvs == 0.0 {
                continue;
            }
            let row = &spec.transition[s][x_map[s][v as usize] as usize];
            for (acc, &py) in vy[v as usize].iter_mut().zip(row.probs()) {
                *acc += pvs * py;
            }
        }
    }
    let h_v_given_y: f64 = vy[0]
        .iter()
        .zip(&vy[1])
        .map(|(&a, &b)| {
            let t = a + b;
            if t > 0.0 {
                t * binary_entropy(b / t)
            } else {
                0.0
            }
        })
        .sum();
    h_v_given_s - h_v_given_y
}

/// Output of [`gp_capacity_grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub capacity: f64,
    pub aux: AuxFunctions,
    /// `E b(X)` at the maximiser.
    pub cost: f64,
}

/// Encoder maps `x(v, s)` with `x(0, .) <= x(1, .)` lexicographically. The
/// others are relabelings `v -> 1 - v` of these and give the same values on
/// the mirrored grid.
fn canonical_maps(ns: usize) -> Vec<Vec<[u8; 2]>> {
    (0u32..1 << (2 * ns))
        .map(|code| {
            (0..ns)
                .map(|s| [((code >> (2 * s)) & 1) as u8, ((code >> (2 * s + 1)) & 1) as u8])
                .collect::<Vec<[u8; 2]>>()
        })
        .filter(|m| {
            let zero: Vec<u8> = m.iter().map(|x| x[0]).collect();
            let one: Vec<u8> = m.iter().map(|x| x[1]).collect();
            zero <= one
        })
        .collect()
}

struct GridBest {
    value: f64,
    map: usize,
    coords: Vec<u32>,
}

/// Exhaustive search of `max I(V;Y) - I(V;S)` over `P(V=1|S=s)` on a grid of
/// spacing `resolution` and over all deterministic `x(v,s)`, subject to
/// `E b(X) <= B`.
///
/// A coarse pass (spacing 0.01) locates candidate regions, which are then
/// searched at full resolution. Ties go to the lexicographically smallest
/// `(map, grid coordinates)`. Returns `None` if no grid point is feasible.
pub fn gp_capacity_grid(spec: &StateChannelSpec, resolution: f64) -> Option<GridResult> {
    let ns = spec.num_states();
    let fine = (1.0 / resolution).round().max(1.0) as u32;
    let coarse = if fine > 100 { 100 } else { fine };
    let maps = canonical_maps(ns);

    let pmfs = |p1: &[f64]| -> Vec<BinaryPmf> {
        p1.iter().map(|&p| BinaryPmf::new(p).expect("grid point in [0,1]")).collect()
    };
    let eval = |map: &[[u8; 2]], coords: &[u32], steps: u32| -> Option<f64> {
        let p1: Vec<f64> = coords.iter().map(|&k| f64::from(k) / f64::from(steps)).collect();
        if expected_cost_of(spec, &pmfs(&p1), map) > spec.budget() + COST_TOLERANCE {
            return None;
        }
        Some(gp_objective(spec, &p1, map))
    };

    // coarse pass: best point per map
    let mut per_map: Vec<Option<GridBest>> = Vec::with_capacity(maps.len());
    for (m, map) in maps.iter().enumerate() {
        let mut best: Option<GridBest> = None;
        for_each_point(&vec![(0, coarse); ns], |coords| {
            if let Some(value) = eval(map, coords, coarse) {
                if best.as_ref().is_none_or(|b| value > b.value) {
                    best = Some(GridBest {
                        value,
                        map: m,
                        coords: coords.to_vec(),
                    });
                }
            }
        });
        per_map.push(best);
    }
    let top = per_map
        .iter()
        .flatten()
        .map(|b| b.value)
        .fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return None;
    }

    // fine pass around every map whose coarse optimum is competitive
    let scale = fine / coarse;
    let radius = 3 * scale;
    let mut best: Option<GridBest> = None;
    for cand in per_map.iter().flatten().filter(|b| b.value >= top - 1e-2) {
        let map = &maps[cand.map];
        let ranges: Vec<(u32, u32)> = cand
            .coords
            .iter()
            .map(|&k| {
                let centre = k * scale;
                (centre.saturating_sub(radius), (centre + radius).min(fine))
            })
            .collect();
        for_each_point(&ranges, |coords| {
            if let Some(value) = eval(map, coords, fine) {
                let better = match &best {
                    None => true,
                    Some(b) => {
                        value > b.value
                            || (value == b.value && (cand.map, coords) < (b.map, &b.coords[..]))
                    }
                };
                if better {
                    best = Some(GridBest {
                        value,
                        map: cand.map,
                        coords: coords.to_vec(),
                    });
                }
            }
        });
    }

    let best = best?;
    let p_v_given_s = pmfs(
        &best
            .coords
            .iter()
            .map(|&k| f64::from(k) / f64::from(fine))
            .collect::<Vec<_>>(),
    );
    let x_map = maps[best.map].clone();
    let cost = expected_cost_of(spec, &p_v_given_s, &x_map);
    Some(GridResult {
        capacity: best.value,
        aux: AuxFunctions { p_v_given_s, x_map },
        cost,
    })
}

/// Visits every integer point of the box `ranges` (inclusive) in
/// lexicographic order.
fn for_each_point(ranges: &[(u32, u32)], mut f: impl FnMut(&[u32])) {
    let mut coords: Vec<u32> = ranges.iter().map(|r| r.0).collect();
    loop {
        f(&coords);
        let mut d = coords.len();
        loop {
            if d == 0 {
                return;
            }
            d -= 1;
            if coords[d] < ranges[d].1 {
                coords[d] += 1;
                for (c, r) in coords[d + 1..].iter_mut().zip(&ranges[d + 1..]) {
                    *c = r.0;
                }
                break;
            }
        }
    }
}

/// Model ids accepted by [`ModelSpec`].
pub const MODEL_IDS: [&str; 4] = ["example1", "example2", "bsc", "basym"];

/// A registry entry: model id plus named parameters. This is what profile
/// files and experiment configs store.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub id: String,
    pub params: BTreeMap<String, f64>,
}

impl ModelSpec {
    pub fn new(id: &str, params: &[(&str, f64)]) -> Self {
        Self {
            id: id.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    /// Parses `k=v,k=v`.
    pub fn parse_params(text: &str) -> Result<BTreeMap<String, f64>> {
        text.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|kv| {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| Error::Config(format!("expected key=value, got `{kv}`")))?;
                let v: f64 = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("`{v}` is not a number")))?;
                Ok((k.trim().to_string(), v))
            })
            .collect()
    }

    fn get(&self, key: &str) -> Result<f64> {
        self.params
            .get(key)
            .copied()
            .ok_or_else(|| Error::InvalidParameter(format!("model `{}` needs `{key}`", self.id)))
    }

    fn get_or(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    fn budget(&self) -> Result<f64> {
        self.params
            .get("B")
            .or_else(|| self.params.get("budget"))
            .copied()
            .ok_or_else(|| Error::InvalidParameter(format!("model `{}` needs `B`", self.id)))
    }

    /// Whether the model has a single (degenerate) state.
    pub fn is_stateless(&self) -> bool {
        matches!(self.id.as_str(), "bsc" | "basym")
    }

    /// Builds the channel and attaches aux functions. For models without a
    /// closed-form optimum the aux comes from explicit `p_v1_s<k>` / `x_map`
    /// parameters when given, otherwise from [`gp_capacity_grid`].
    pub fn build(&self) -> Result<StateChannelSpec> {
        let spec = match self.id.as_str() {
            "example1" => make_example1(
                self.get("alpha0")?,
                self.get("alpha1")?,
                self.get("beta")?,
                self.budget()?,
            )?,
            "example2" => {
                return make_example2(self.get("alpha")?, self.get("beta")?, self.budget()?)
            }
            "bsc" => {
                let eps = self
                    .params
                    .get("epsilon")
                    .copied()
                    .map_or_else(|| self.budget(), Ok)?;
                return make_bsc(self.get("alpha")?, eps);
            }
            "basym" => make_basym(self.get("p01")?, self.get("p10")?)?,
            other => return Err(Error::UnknownModel(other.to_string())),
        };
        self.attach_aux(spec)
    }

    fn attach_aux(&self, spec: StateChannelSpec) -> Result<StateChannelSpec> {
        let ns = spec.num_states();
        if let Ok(code) = self.get("x_map") {
            let code = code as u32;
            let x_map = (0..ns)
                .map(|s| [((code >> (2 * s)) & 1) as u8, ((code >> (2 * s + 1)) & 1) as u8])
                .collect();
            let p_v_given_s = (0..ns)
                .map(|s| BinaryPmf::new(self.get(&format!("p_v1_s{s}"))?))
                .collect::<Result<Vec<_>>>()?;
            return spec.with_aux(AuxFunctions { p_v_given_s, x_map });
        }
        let resolution = self.get_or("grid_resolution", DEFAULT_GRID_RESOLUTION);
        let grid = gp_capacity_grid(&spec, resolution)
            .ok_or_else(|| Error::InvalidParameter("no cost-feasible aux functions".into()))?;
        spec.with_aux(grid.aux)
    }

    /// Closed-form capacity where one is known.
    pub fn closed_form_capacity(&self) -> Result<Option<f64>> {
        match self.id.as_str() {
            "example2" => Ok(Some(capacity_example2(
                self.get("alpha")?,
                self.get("beta")?,
                self.budget()?,
            )?)),
            "bsc" => {
                let eps = self
                    .params
                    .get("epsilon")
                    .copied()
                    .map_or_else(|| self.budget(), Ok)?;
                Ok(Some(capacity_bsc(self.get("alpha")?, eps)?))
            }
            "example1" | "basym" => Ok(None),
            other => Err(Error::UnknownModel(other.to_string())),
        }
    }

    /// Closed form when available, otherwise the grid value.
    pub fn capacity(&self) -> Result<f64> {
        if let Some(c) = self.closed_form_capacity()? {
            return Ok(c);
        }
        let spec = self.build()?;
        gp_capacity_grid(&spec, DEFAULT_GRID_RESOLUTION)
            .map(|g| g.capacity)
            .ok_or_else(|| Error::InvalidParameter("no cost-feasible aux functions".into()))
    }
}

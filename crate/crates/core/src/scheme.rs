//! Encoders and decoders.
//!
//! [`AsymmetricCode`] codes for a binary-input channel without state,
//! [`MulticodeScheme`] for a channel whose state the encoder knows, and
//! [`ChainScheme`] links `k` multicoding blocks so each block relays the
//! previous block's side bits. The side payload of the last (or only) block
//! travels out of band and is debited from the rate.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::StateChannelSpec;
use crate::error::{Error, Result};
use crate::prob::{BinaryInputChannel, BinaryPmf, FinitePmf, JointBase};
use crate::profile::{CodeProfile, Role};
use crate::sc::{Observation, Rule, ScContext, Workspace};
use crate::streams::{self, Purpose, StreamRng};

/// The `u` values at the side indices of one block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideChannelPayload {
    pub bits: Vec<u8>,
    pub block_index: usize,
}

/// Encoder output for one block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoded {
    pub u: Vec<u8>,
    pub v: Vec<u8>,
    pub x: Vec<u8>,
    pub side: SideChannelPayload,
}

/// Decoder output for one block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decoded {
    /// The decoded `u`; message bits are read from it by the scheme.
    Block(Vec<u8>),
    /// The observation has probability zero under the model at this index.
    Failure { index: usize },
}

/// One encode/transmit/decode trial.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOutcome {
    pub message: Vec<u8>,
    pub state: Vec<usize>,
    pub u: Vec<u8>,
    pub v: Vec<u8>,
    pub x: Vec<u8>,
    pub y: Vec<usize>,
    /// `None` on a decode failure.
    pub estimate: Option<Vec<u8>>,
    pub cost: f64,
    pub success: bool,
    pub side_payload: SideChannelPayload,
    /// `false` if encoding was infeasible; `u`, `v`, `x`, `y` are then empty.
    pub encoded: bool,
}

impl BlockOutcome {
    fn encode_failure(message: Vec<u8>, state: Vec<usize>, block_index: usize) -> Self {
        Self {
            message,
            state,
            u: Vec::new(),
            v: Vec::new(),
            x: Vec::new(),
            y: Vec::new(),
            estimate: None,
            cost: 0.0,
            success: false,
            side_payload: SideChannelPayload {
                bits: Vec::new(),
                block_index,
            },
            encoded: false,
        }
    }

    /// Cells written to 1 while in state 1 (an already-programmed WOM cell).
    pub fn stuck_writes(&self) -> usize {
        self.state
            .iter()
            .zip(&self.x)
            .filter(|&(&s, &x)| s == 1 && x == 1)
            .count()
    }
}

fn check_len<T>(what: &str, v: &[T], expected: usize) -> Result<()> {
    if v.len() != expected {
        return Err(Error::DimensionMismatch(format!(
            "{what} has length {}, expected {expected}",
            v.len()
        )));
    }
    Ok(())
}

fn check_bits(what: &str, bits: &[u8]) -> Result<()> {
    match bits.iter().position(|&b| b > 1) {
        Some(index) => Err(Error::InvalidParameter(format!(
            "{what}: entry {index} is {}, not a bit",
            bits[index]
        ))),
        None => Ok(()),
    }
}

/// Shared SC machinery: the profile and the two conditioning contexts.
#[derive(Debug, Clone)]
struct Engine {
    profile: CodeProfile,
    enc: ScContext,
    dec: ScContext,
}

impl Engine {
    fn new(profile: &CodeProfile, enc_base: JointBase, dec_base: JointBase) -> Result<Self> {
        let n = profile.n();
        Ok(Self {
            profile: profile.clone(),
            enc: ScContext::iid(n, enc_base)?,
            dec: ScContext::iid(n, dec_base)?,
        })
    }

    fn n(&self) -> usize {
        self.profile.n()
    }

    /// Encoder rules. `slots` lists the message positions fed from
    /// `message`; `relay` fixes further message positions.
    fn encoder_rules(&self, slots: &[usize], message: &[u8], relay: &[(usize, u8)]) -> Vec<Rule> {
        let mut rules: Vec<Rule> = self
            .profile
            .roles()
            .iter()
            .map(|role| match role {
                Role::RandomLow | Role::Side => Rule::RandomRound,
                // overwritten below
                Role::Message | Role::Frozen => Rule::Fixed(0),
            })
            .collect();
        for (&i, &b) in self.profile.sets.frozen.iter().zip(&self.profile.frozen_bits) {
            rules[i] = Rule::Fixed(b);
        }
        for (&i, &b) in slots.iter().zip(message) {
            rules[i] = Rule::Fixed(b);
        }
        for &(i, b) in relay {
            rules[i] = Rule::Fixed(b);
        }
        rules
    }

    fn decoder_rules(&self, side: &[u8]) -> Vec<Rule> {
        let mut rules: Vec<Rule> = self
            .profile
            .roles()
            .iter()
            .map(|role| match role {
                Role::Message | Role::RandomLow => Rule::Argmax,
                Role::Frozen | Role::Side => Rule::Fixed(0),
            })
            .collect();
        for (&i, &b) in self.profile.sets.frozen.iter().zip(&self.profile.frozen_bits) {
            rules[i] = Rule::Fixed(b);
        }
        for (&i, &b) in self.profile.sets.side.iter().zip(side) {
            rules[i] = Rule::Fixed(b);
        }
        rules
    }

    fn encode_u<R: Rng + ?Sized>(
        &self,
        ws: &mut Workspace,
        obs: &Observation,
        rules: &[Rule],
        rng: &mut R,
        block_index: usize,
    ) -> Result<(Vec<u8>, Vec<u8>, SideChannelPayload)> {
        let out = self.enc.pass_in(ws, obs, rules, rng).map_err(|e| match e {
            Error::Unnormalizable { index } => Error::EncodeInfeasible { index },
            other => other,
        })?;
        let side = SideChannelPayload {
            bits: self.profile.sets.side.iter().map(|&i| out.u[i]).collect(),
            block_index,
        };
        Ok((out.u, out.v, side))
    }

    fn decode_u(&self, ws: &mut Workspace, y: &[usize], side: &SideChannelPayload) -> Result<Decoded> {
        check_len("y", y, self.n())?;
        check_len("side payload", &side.bits, self.profile.side_len())?;
        check_bits("side payload", &side.bits)?;
        let rules = self.decoder_rules(&side.bits);
        // argmax never draws; the rng is only there to satisfy the signature
        let mut idle = streams::stream(0, Purpose::Trial, 0);
        match self
            .dec
            .pass_in(ws, &Observation(y.to_vec()), &rules, &mut idle)
        {
            Ok(out) => Ok(Decoded::Block(out.u)),
            Err(Error::Unnormalizable { index }) => Ok(Decoded::Failure { index }),
            Err(e) => Err(e),
        }
    }

    fn extract(&self, u: &[u8], slots: &[usize]) -> Vec<u8> {
        slots.iter().map(|&i| u[i]).collect()
    }
}

/// `(|message| - |side|) / n`: the side payload counted against the rate.
pub fn effective_rate(profile: &CodeProfile) -> f64 {
    (profile.message_len() as f64 - profile.side_len() as f64) / profile.n() as f64
}

/// `(k (|message| - |relay|) - |side|) / (k n)`: the chain's message bits
/// less the final side payload.
pub fn chain_effective_rate(profile: &CodeProfile, k: usize) -> f64 {
    let k = k as f64;
    let per_block = profile.message_len() as f64 - profile.side_len() as f64;
    (k * per_block - profile.side_len() as f64) / (k * profile.n() as f64)
}

/// Point-to-point code for a binary-input channel with input prior `p_X`.
#[derive(Debug, Clone)]
pub struct AsymmetricCode {
    engine: Engine,
    channel: BinaryInputChannel,
}

impl AsymmetricCode {
    pub fn new(profile: &CodeProfile, channel: &BinaryInputChannel, prior: BinaryPmf) -> Result<Self> {
        let enc = JointBase::independent(prior, &FinitePmf::point(1, 0));
        let dec = JointBase::from_channel(prior, channel);
        Ok(Self {
            engine: Engine::new(profile, enc, dec)?,
            channel: channel.clone(),
        })
    }

    pub fn profile(&self) -> &CodeProfile {
        &self.engine.profile
    }

    pub fn channel(&self) -> &BinaryInputChannel {
        &self.channel
    }

    pub fn encode<R: Rng + ?Sized>(&self, message: &[u8], rng: &mut R) -> Result<Encoded> {
        let p = &self.engine.profile;
        check_len("message", message, p.message_len())?;
        check_bits("message", message)?;
        let rules = self.engine.encoder_rules(&p.sets.message, message, &[]);
        let mut ws = Workspace::new(p.n());
        let (u, v, side) =
            self.engine
                .encode_u(&mut ws, &Observation::constant(p.n()), &rules, rng, 0)?;
        Ok(Encoded {
            x: v.clone(),
            u,
            v,
            side,
        })
    }

    /// Message estimate, or `None` on a decode failure.
    pub fn decode(&self, y: &[usize], side: &SideChannelPayload) -> Result<Option<Vec<u8>>> {
        let mut ws = Workspace::new(self.engine.n());
        Ok(match self.engine.decode_u(&mut ws, y, side)? {
            Decoded::Block(u) => Some(self.engine.extract(&u, &self.engine.profile.sets.message)),
            Decoded::Failure { .. } => None,
        })
    }

    /// Draws `y_i ~ p(. | x_i)`.
    pub fn transmit<R: Rng + ?Sized>(&self, x: &[u8], rng: &mut R) -> Vec<usize> {
        x.iter()
            .map(|&xi| self.channel.row(xi).sample_with(rng.random()))
            .collect()
    }

    /// Random message, encode, transmit, decode; the side payload is
    /// delivered intact.
    pub fn trial<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<BlockOutcome> {
        let n = self.engine.n();
        let message = random_bits(self.engine.profile.message_len(), rng);
        let enc = match self.encode(&message, rng) {
            Err(Error::EncodeInfeasible { .. }) => {
                return Ok(BlockOutcome::encode_failure(message, vec![0; n], 0))
            }
            other => other?,
        };
        let y = self.transmit(&enc.x, rng);
        let estimate = self.decode(&y, &enc.side)?;
        let cost = enc.x.iter().map(|&b| f64::from(b)).sum();
        Ok(BlockOutcome {
            success: estimate.as_deref() == Some(&message[..]),
            message,
            state: vec![0; n],
            u: enc.u,
            v: enc.v,
            x: enc.x,
            y,
            estimate,
            cost,
            side_payload: enc.side,
            encoded: true,
        })
    }
}

fn random_bits<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<u8> {
    (0..len).map(|_| rng.random_range(0..2u8)).collect()
}

/// Multicoding for a channel with encoder-known state.
#[derive(Debug, Clone)]
pub struct MulticodeScheme {
    engine: Engine,
    spec: StateChannelSpec,
}

impl MulticodeScheme {
    pub fn new(profile: &CodeProfile, spec: &StateChannelSpec) -> Result<Self> {
        Ok(Self {
            engine: Engine::new(profile, spec.encoder_base()?, spec.decoder_base()?)?,
            spec: spec.clone(),
        })
    }

    pub fn profile(&self) -> &CodeProfile {
        &self.engine.profile
    }

    pub fn spec(&self) -> &StateChannelSpec {
        &self.spec
    }

    fn check_state(&self, s: &[usize]) -> Result<()> {
        check_len("state", s, self.engine.n())?;
        if let Some(index) = s.iter().position(|&si| si >= self.spec.num_states()) {
            return Err(Error::SymbolOutOfRange {
                index,
                symbol: s[index],
                size: self.spec.num_states(),
            });
        }
        Ok(())
    }

    fn encode_with<R: Rng + ?Sized>(
        &self,
        ws: &mut Workspace,
        slots: &[usize],
        message: &[u8],
        relay: &[(usize, u8)],
        s: &[usize],
        rng: &mut R,
        block_index: usize,
    ) -> Result<Encoded> {
        check_bits("message", message)?;
        self.check_state(s)?;
        let aux = self.spec.require_aux()?;
        let rules = self.engine.encoder_rules(slots, message, relay);
        let (u, v, side) =
            self.engine
                .encode_u(ws, &Observation(s.to_vec()), &rules, rng, block_index)?;
        let x = v.iter().zip(s).map(|(&vi, &si)| aux.x(vi, si)).collect();
        Ok(Encoded { u, v, x, side })
    }

    pub fn encode<R: Rng + ?Sized>(&self, message: &[u8], s: &[usize], rng: &mut R) -> Result<Encoded> {
        let p = &self.engine.profile;
        check_len("message", message, p.message_len())?;
        let mut ws = Workspace::new(p.n());
        self.encode_with(&mut ws, &p.sets.message, message, &[], s, rng, 0)
    }

    /// Message estimate, or `None` on a decode failure. The decoder never
    /// sees the state.
    pub fn decode(&self, y: &[usize], side: &SideChannelPayload) -> Result<Option<Vec<u8>>> {
        let mut ws = Workspace::new(self.engine.n());
        Ok(match self.engine.decode_u(&mut ws, y, side)? {
            Decoded::Block(u) => Some(self.engine.extract(&u, &self.engine.profile.sets.message)),
            Decoded::Failure { .. } => None,
        })
    }

    pub fn cost_of(&self, x: &[u8]) -> f64 {
        x.iter().map(|&b| self.spec.cost(b)).sum()
    }

    pub fn trial<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<BlockOutcome> {
        let mut ws = Workspace::new(self.engine.n());
        self.trial_in(&mut ws, rng)
    }

    /// [`trial`](Self::trial) with a caller-owned workspace.
    pub fn trial_in<R: Rng + ?Sized>(&self, ws: &mut Workspace, rng: &mut R) -> Result<BlockOutcome> {
        let p = &self.engine.profile;
        let message = random_bits(p.message_len(), rng);
        let state = self.spec.sample_states(p.n(), rng);
        let enc = match self.encode_with(ws, &p.sets.message, &message, &[], &state, rng, 0) {
            Err(Error::EncodeInfeasible { .. }) => {
                return Ok(BlockOutcome::encode_failure(message, state, 0))
            }
            other => other?,
        };
        let y = self.spec.simulate_channel(&enc.x, &state, rng)?;
        let estimate = match self.engine.decode_u(ws, &y, &enc.side)? {
            Decoded::Block(u) => Some(self.engine.extract(&u, &p.sets.message)),
            Decoded::Failure { .. } => None,
        };
        Ok(BlockOutcome {
            success: estimate.as_deref() == Some(&message[..]),
            cost: self.cost_of(&enc.x),
            message,
            state,
            u: enc.u,
            v: enc.v,
            x: enc.x,
            y,
            estimate,
            side_payload: enc.side,
            encoded: true,
        })
    }
}

/// Aggregates over a batch of independent trials (a trial is one block, or
/// one chain of `k` blocks).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BatchStats {
    pub n: usize,
    pub trials: usize,
    /// Trials with at least one failed block.
    pub failed_trials: usize,
    pub blocks: usize,
    pub frame_errors: usize,
    pub decode_failures: usize,
    pub encode_failures: usize,
    /// Cost over encoded blocks only.
    pub total_cost: f64,
    /// Sum over encoded blocks of `(cost / n)^2`.
    pub total_cost_sq: f64,
    pub stuck_writes: usize,
}

impl BatchStats {
    fn empty(n: usize) -> Self {
        Self {
            n,
            ..Default::default()
        }
    }

    pub fn fer(&self) -> f64 {
        self.frame_errors as f64 / self.blocks as f64
    }

    fn encoded_blocks(&self) -> usize {
        self.blocks - self.encode_failures
    }

    /// Mean cost per cell over the blocks that were encoded (0 if none).
    pub fn mean_cost_per_cell(&self) -> f64 {
        match self.encoded_blocks() {
            0 => 0.0,
            b => self.total_cost / (b * self.n) as f64,
        }
    }

    /// Sample standard deviation of the per-block cost per cell.
    pub fn cost_std(&self) -> f64 {
        if self.encoded_blocks() < 2 {
            return 0.0;
        }
        let m = self.mean_cost_per_cell();
        let b = self.encoded_blocks() as f64;
        ((self.total_cost_sq - b * m * m) / (b - 1.0)).max(0.0).sqrt()
    }

    fn absorb(&mut self, outcomes: &[BlockOutcome]) {
        self.trials += 1;
        self.failed_trials += usize::from(outcomes.iter().any(|o| !o.success));
        for o in outcomes {
            self.blocks += 1;
            self.frame_errors += usize::from(!o.success);
            self.decode_failures += usize::from(o.encoded && o.estimate.is_none());
            self.encode_failures += usize::from(!o.encoded);
            self.total_cost += o.cost;
            let per_cell = o.cost / self.n as f64;
            self.total_cost_sq += per_cell * per_cell;
            self.stuck_writes += o.stuck_writes();
        }
    }

    fn merge(&mut self, o: &Self) {
        self.trials += o.trials;
        self.failed_trials += o.failed_trials;
        self.blocks += o.blocks;
        self.frame_errors += o.frame_errors;
        self.decode_failures += o.decode_failures;
        self.encode_failures += o.encode_failures;
        self.total_cost += o.total_cost;
        self.total_cost_sq += o.total_cost_sq;
        self.stuck_writes += o.stuck_writes;
    }
}

const BATCH_CHUNK: usize = 8;

/// Runs blocks `first .. first + count`, block `t` on stream
/// `(seed, FrozenBatch, t)`. Thread-count independent.
pub fn run_batch(code: &MulticodeScheme, count: usize, seed: u64, first: u64) -> Result<BatchStats> {
    run_trials(count, code.engine.n(), |t, ws| {
        let mut rng = streams::stream(seed, Purpose::FrozenBatch, first + t as u64);
        Ok(vec![code.trial_in(ws, &mut rng)?])
    })
}

/// Runs `count` trials in parallel chunks and reduces in trial order, so the
/// floating-point sums do not depend on the thread count.
pub fn run_trials<F>(count: usize, n: usize, trial: F) -> Result<BatchStats>
where
    F: Fn(usize, &mut Workspace) -> Result<Vec<BlockOutcome>> + Sync,
{
    let chunks = count.div_ceil(BATCH_CHUNK);
    let parts: Vec<BatchStats> = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<BatchStats> {
            let mut ws = Workspace::new(n);
            let mut stats = BatchStats::empty(n);
            for t in c * BATCH_CHUNK..((c + 1) * BATCH_CHUNK).min(count) {
                stats.absorb(&trial(t, &mut ws)?);
            }
            Ok(stats)
        })
        .collect::<Result<_>>()?;
    let mut total = BatchStats::empty(n);
    for p in &parts {
        total.merge(p);
    }
    Ok(total)
}

/// `k` blocks sharing one profile, linked through the relay set.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainProfile {
    pub k: usize,
    pub profile: CodeProfile,
}

impl ChainProfile {
    pub fn new(profile: CodeProfile, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("chain length k must be at least 1".into()));
        }
        let profile = if profile.chaining_ready() {
            profile
        } else {
            profile.with_relay_set()?
        };
        Ok(Self { k, profile })
    }

    /// Message bits per block: `|message| - |relay|`.
    pub fn block_message_len(&self) -> usize {
        self.profile.message_len() - self.profile.relay_set.len()
    }

    pub fn effective_rate(&self) -> f64 {
        chain_effective_rate(&self.profile, self.k)
    }
}

/// Output of a chained encode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainEncoded {
    pub blocks: Vec<Encoded>,
    /// Side bits of the last block, sent out of band.
    pub final_side: SideChannelPayload,
}

#[derive(Debug, Clone)]
pub struct ChainScheme {
    chain: ChainProfile,
    code: MulticodeScheme,
    /// Message positions outside the relay set.
    slots: Vec<usize>,
}

impl ChainScheme {
    pub fn new(chain: ChainProfile, spec: &StateChannelSpec) -> Result<Self> {
        let code = MulticodeScheme::new(&chain.profile, spec)?;
        let slots = chain
            .profile
            .sets
            .message
            .iter()
            .copied()
            .filter(|i| chain.profile.relay_set.binary_search(i).is_err())
            .collect();
        Ok(Self { chain, code, slots })
    }

    pub fn chain(&self) -> &ChainProfile {
        &self.chain
    }

    pub fn code(&self) -> &MulticodeScheme {
        &self.code
    }

    /// Encodes forward; block `j` carries block `j-1`'s side bits in its
    /// relay positions (all-zero for the first block).
    pub fn encode<R: Rng + ?Sized>(
        &self,
        messages: &[Vec<u8>],
        states: &[Vec<usize>],
        rng: &mut R,
    ) -> Result<ChainEncoded> {
        let k = self.chain.k;
        check_len("messages", messages, k)?;
        check_len("states", states, k)?;
        let relay_set = &self.chain.profile.relay_set;
        let mut ws = Workspace::new(self.code.engine.n());
        let mut previous_side = vec![0u8; relay_set.len()];
        let mut blocks = Vec::with_capacity(k);
        for (j, (m, s)) in messages.iter().zip(states).enumerate() {
            check_len("block message", m, self.slots.len())?;
            let relay: Vec<(usize, u8)> =
                relay_set.iter().copied().zip(previous_side.iter().copied()).collect();
            let enc = self.code.encode_with(&mut ws, &self.slots, m, &relay, s, rng, j)?;
            previous_side.clone_from(&enc.side.bits);
            blocks.push(enc);
        }
        let final_side = blocks.last().expect("k >= 1").side.clone();
        Ok(ChainEncoded { blocks, final_side })
    }

    /// Decodes backward. Block `j`'s side bits come from block `j+1`'s
    /// decoded relay positions, so an error there propagates; a block after
    /// a decode failure is decoded with all-zero side bits.
    pub fn decode(&self, ys: &[Vec<usize>], final_side: &SideChannelPayload) -> Result<Vec<Option<Vec<u8>>>> {
        let k = self.chain.k;
        check_len("outputs", ys, k)?;
        let engine = &self.code.engine;
        let relay_set = &self.chain.profile.relay_set;
        let mut ws = Workspace::new(engine.n());
        let mut out = vec![None; k];
        let mut side = final_side.clone();
        for j in (0..k).rev() {
            side.block_index = j;
            match engine.decode_u(&mut ws, &ys[j], &side)? {
                Decoded::Block(u) => {
                    side.bits = engine.extract(&u, relay_set);
                    out[j] = Some(engine.extract(&u, &self.slots));
                }
                Decoded::Failure { .. } => side.bits.fill(0),
            }
        }
        Ok(out)
    }

    /// One chain with random messages and states; per-block outcomes.
    pub fn trial<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<BlockOutcome>> {
        let n = self.code.engine.n();
        let spec = &self.code.spec;
        let k = self.chain.k;
        let messages: Vec<Vec<u8>> = (0..k).map(|_| random_bits(self.slots.len(), rng)).collect();
        let states: Vec<Vec<usize>> = (0..k).map(|_| spec.sample_states(n, rng)).collect();
        // an infeasible block breaks the relay chain, so the whole chain fails
        let enc = match self.encode(&messages, &states, rng) {
            Err(Error::EncodeInfeasible { .. }) => {
                return Ok(messages
                    .into_iter()
                    .zip(states)
                    .enumerate()
                    .map(|(j, (m, s))| BlockOutcome::encode_failure(m, s, j))
                    .collect())
            }
            other => other?,
        };
        let ys = enc
            .blocks
            .iter()
            .zip(&states)
            .map(|(b, s)| spec.simulate_channel(&b.x, s, rng))
            .collect::<Result<Vec<_>>>()?;
        let estimates = self.decode(&ys, &enc.final_side)?;
        Ok(enc
            .blocks
            .into_iter()
            .zip(messages)
            .zip(states)
            .zip(ys)
            .zip(estimates)
            .map(|((((b, message), state), y), estimate)| BlockOutcome {
                success: estimate.as_deref() == Some(&message[..]),
                cost: self.code.cost_of(&b.x),
                message,
                state,
                u: b.u,
                v: b.v,
                x: b.x,
                y,
                estimate,
                side_payload: b.side,
                encoded: true,
            })
            .collect())
    }
}

/// Random trial on stream `(seed, Trial, index)`.
pub fn trial_stream(seed: u64, index: u64) -> StreamRng {
    streams::stream(seed, Purpose::Trial, index)
}

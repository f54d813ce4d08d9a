//! Successive-cancellation (SC) conditionals for non-uniform binary sources.
//!
//! The model: `V_1..V_n` independent, `(V_j, O_j)` distributed according to
//! the per-position [`JointBase`], and `U = V G_n`. For every index `i` the
//! engine produces the exact `P(U_i = 1 | U_{<i} = u_{<i}, O = o)` in one
//! left-to-right pass of `O(n log n)` work.
//!
//! The same engine serves the encoder (observation = state, base
//! `p(s) p(v|s)`) and the decoder (observation = channel output, base
//! `p(v, y)`).
//!
//! Recursion: split `V` into halves `V'`, `V''`. The first half of `U` is
//! `(V' ^ V'') G_{n/2}` and the second half is `V'' G_{n/2}`, so the first
//! child sees pairs `(j, j + n/2)` combined by XOR-convolution and the second
//! child sees `V''_j` jointly with the now-known `V'_j ^ V''_j`. Each node
//! keeps one weight pair per position, renormalised to sum to one; positions
//! are independent so per-position scaling leaves every conditional unchanged
//! and nothing underflows regardless of `n`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::prob::JointBase;

/// Largest block length accepted by [`sc_bruteforce`].
pub const BRUTEFORCE_MAX_N: usize = 16;

/// Observation symbols, one per position.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Observation(pub Vec<usize>);

impl Observation {
    pub fn constant(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<usize>> for Observation {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

/// How a pass sets `u_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// Draw `u_i = 1` with the SC conditional probability.
    RandomRound,
    /// Copy the given bit.
    Fixed(u8),
    /// The more likely value; ties go to 0.
    Argmax,
}

/// Result of a full pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PassOutput {
    pub u: Vec<u8>,
    /// `u G_n`.
    pub v: Vec<u8>,
}

/// Early exit from the recursion.
enum Halt {
    Done,
    Fail(Error),
}

impl From<Error> for Halt {
    fn from(e: Error) -> Self {
        Halt::Fail(e)
    }
}

/// Recursion buffers, laid out like a binary heap: a node of length `len`
/// keeps its weights and partial sums in `[len, 2 len)`.
#[derive(Debug, Clone, Default)]
pub struct Workspace {
    weights: Vec<[f64; 2]>,
    partial: Vec<u8>,
    u: Vec<u8>,
}

impl Workspace {
    pub fn new(n: usize) -> Self {
        Self {
            weights: vec![[0.0; 2]; 2 * n],
            partial: vec![0; 2 * n],
            u: vec![0; n],
        }
    }

    fn ensure(&mut self, n: usize) {
        if self.u.len() != n {
            *self = Self::new(n);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScContext {
    bases: Vec<JointBase>,
}

impl ScContext {
    pub fn new(bases: Vec<JointBase>) -> Result<Self> {
        if !bases.len().is_power_of_two() {
            return Err(Error::NotPowerOfTwo(bases.len()));
        }
        Ok(Self { bases })
    }

    /// Identical base at every position.
    pub fn iid(n: usize, base: JointBase) -> Result<Self> {
        if !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        Ok(Self {
            bases: vec![base; n],
        })
    }

    pub fn n(&self) -> usize {
        self.bases.len()
    }

    pub fn base(&self, index: usize) -> &JointBase {
        &self.bases[index]
    }

    fn check_observation(&self, obs: &Observation) -> Result<()> {
        if obs.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "observation has length {}, block length is {}",
                obs.len(),
                self.n()
            )));
        }
        for (index, (&symbol, base)) in obs.0.iter().zip(&self.bases).enumerate() {
            if symbol >= base.num_observations() {
                return Err(Error::SymbolOutOfRange {
                    index,
                    symbol,
                    size: base.num_observations(),
                });
            }
        }
        Ok(())
    }

    /// `P(U_i = 1 | U_{<i} = prefix, O = obs)` with `i = prefix.len()`.
    pub fn conditional(&self, obs: &Observation, prefix: &[u8]) -> Result<f64> {
        let n = self.n();
        if prefix.len() >= n {
            return Err(Error::PrefixLength {
                prefix: prefix.len(),
                n,
            });
        }
        check_bits(prefix)?;
        let mut out = f64::NAN;
        let mut ws = Workspace::new(n);
        self.run(&mut ws, obs, |i, p1| {
            if i < prefix.len() {
                Ok(prefix[i])
            } else {
                out = p1;
                Err(Halt::Done)
            }
        })?;
        Ok(out)
    }

    /// One SC pass applying `rules[i]` at each index.
    pub fn pass<R: Rng + ?Sized>(
        &self,
        obs: &Observation,
        rules: &[Rule],
        rng: &mut R,
    ) -> Result<PassOutput> {
        let mut ws = Workspace::new(self.n());
        self.pass_in(&mut ws, obs, rules, rng)
    }

    /// [`pass`](Self::pass) with a caller-owned workspace.
    pub fn pass_in<R: Rng + ?Sized>(
        &self,
        ws: &mut Workspace,
        obs: &Observation,
        rules: &[Rule],
        rng: &mut R,
    ) -> Result<PassOutput> {
        if rules.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "{} rules for block length {}",
                rules.len(),
                self.n()
            )));
        }
        if let Some((index, value)) = rules.iter().enumerate().find_map(|(i, r)| match r {
            Rule::Fixed(b) if *b > 1 => Some((i, *b)),
            _ => None,
        }) {
            return Err(Error::NonBinary { index, value });
        }
        self.run(ws, obs, |i, p1| {
            Ok(match rules[i] {
                Rule::Fixed(bit) => bit,
                Rule::Argmax => u8::from(p1 > 0.5),
                Rule::RandomRound => u8::from(rng.random::<f64>() < p1),
            })
        })?;
        Ok(PassOutput {
            u: ws.u.clone(),
            v: ws.partial[self.n()..].to_vec(),
        })
    }

    /// Conditionals `P(U_i = 1 | U_{<i} = u_{<i}, O = obs)` along the given
    /// `u`, for all `i` (genie-aided: the true past is fed back).
    pub fn genie_probabilities(&self, obs: &Observation, u: &[u8]) -> Result<Vec<f64>> {
        let mut ws = Workspace::new(self.n());
        self.genie_probabilities_in(&mut ws, obs, u)
    }

    pub fn genie_probabilities_in(
        &self,
        ws: &mut Workspace,
        obs: &Observation,
        u: &[u8],
    ) -> Result<Vec<f64>> {
        if u.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "u has length {}, block length is {}",
                u.len(),
                self.n()
            )));
        }
        check_bits(u)?;
        let mut probs = vec![0.0; self.n()];
        self.run(ws, obs, |i, p1| {
            probs[i] = p1;
            Ok(u[i])
        })?;
        Ok(probs)
    }

    fn run<F>(&self, ws: &mut Workspace, obs: &Observation, mut decide: F) -> Result<()>
    where
        F: FnMut(usize, f64) -> std::result::Result<u8, Halt>,
    {
        self.check_observation(obs)?;
        let n = self.n();
        ws.ensure(n);
        for (j, (base, &o)) in self.bases.iter().zip(&obs.0).enumerate() {
            ws.weights[n + j] = normalize([base.weight(0, o), base.weight(1, o)]);
        }
        match node(ws, n, 0, &mut decide) {
            Ok(()) | Err(Halt::Done) => Ok(()),
            Err(Halt::Fail(e)) => Err(e),
        }
    }
}

#[inline]
fn normalize(w: [f64; 2]) -> [f64; 2] {
    let total = w[0] + w[1];
    if total > 0.0 {
        [w[0] / total, w[1] / total]
    } else {
        [0.0, 0.0]
    }
}

fn node<F>(
    ws: &mut Workspace,
    len: usize,
    first: usize,
    decide: &mut F,
) -> std::result::Result<(), Halt>
where
    F: FnMut(usize, f64) -> std::result::Result<u8, Halt>,
{
    if len == 1 {
        let [w0, w1] = ws.weights[1];
        let total = w0 + w1;
        if !(total > 0.0 && total.is_finite()) {
            return Err(Halt::Fail(Error::Unnormalizable { index: first }));
        }
        let bit = decide(first, w1 / total)?;
        ws.partial[1] = bit;
        ws.u[first] = bit;
        return Ok(());
    }

    let half = len / 2;
    {
        let (child, parent) = ws.weights.split_at_mut(len);
        let (lo, hi) = parent[..len].split_at(half);
        for ((c, a), b) in child[half..].iter_mut().zip(lo).zip(hi) {
            *c = normalize([a[0] * b[0] + a[1] * b[1], a[0] * b[1] + a[1] * b[0]]);
        }
    }
    node(ws, half, first, decide)?;

    {
        let (child, parent) = ws.partial.split_at_mut(len);
        parent[..half].copy_from_slice(&child[half..]);
    }
    {
        let (child, parent) = ws.weights.split_at_mut(len);
        let (lo, hi) = parent[..len].split_at(half);
        let xored = &ws.partial[len..len + half];
        for (((c, a), b), &x) in child[half..].iter_mut().zip(lo).zip(hi).zip(xored) {
            let x = x as usize;
            *c = normalize([a[x] * b[0], a[x ^ 1] * b[1]]);
        }
    }
    node(ws, half, first + half, decide)?;

    let (child, parent) = ws.partial.split_at_mut(len);
    let (lo, hi) = parent[..len].split_at_mut(half);
    for ((l, h), &c) in lo.iter_mut().zip(hi.iter_mut()).zip(&child[half..]) {
        *l ^= c;
        *h = c;
    }
    Ok(())
}

fn check_bits(bits: &[u8]) -> Result<()> {
    match bits.iter().enumerate().find(|(_, &b)| b > 1) {
        Some((index, &value)) => Err(Error::NonBinary { index, value }),
        None => Ok(()),
    }
}

/// `P(U_i = 1 | U_{<i} = prefix, O = obs)` by summing over all `2^n`
/// vectors `v`. The transform is the dense Kronecker matrix, not the
/// butterfly used elsewhere.
pub fn sc_bruteforce(ctx: &ScContext, obs: &Observation, prefix: &[u8]) -> Result<f64> {
    let n = ctx.n();
    if n > BRUTEFORCE_MAX_N {
        return Err(Error::TooLarge(n));
    }
    if prefix.len() >= n {
        return Err(Error::PrefixLength {
            prefix: prefix.len(),
            n,
        });
    }
    check_bits(prefix)?;
    ctx.check_observation(obs)?;

    let rows = kronecker_rows(n);
    let i = prefix.len();
    let prefix_mask: u32 = prefix
        .iter()
        .enumerate()
        .fold(0, |m, (j, &b)| m | (u32::from(b) << j));
    let low_bits: u32 = (1u32 << i) - 1;

    let mut mass = [0.0f64; 2];
    for v in 0u32..(1u32 << n) {
        let weight: f64 = (0..n)
            .map(|j| ctx.base(j).weight(((v >> j) & 1) as u8, obs.0[j]))
            .product();
        if weight == 0.0 {
            continue;
        }
        let u = (0..n)
            .filter(|j| (v >> j) & 1 == 1)
            .fold(0u32, |acc, j| acc ^ rows[j]);
        if u & low_bits == prefix_mask {
            mass[((u >> i) & 1) as usize] += weight;
        }
    }
    let total = mass[0] + mass[1];
    if total <= 0.0 {
        return Err(Error::Unnormalizable { index: i });
    }
    Ok(mass[1] / total)
}

/// Row `j` of `G_n` as a bitmask (bit `k` set iff `G_n[j][k] = 1`), built by
/// repeated Kronecker products with `[[1, 0], [1, 1]]`.
fn kronecker_rows(n: usize) -> Vec<u32> {
    let mut matrix: Vec<Vec<u8>> = vec![vec![1]];
    while matrix.len() < n {
        let m = matrix.len();
        let mut next = vec![vec![0u8; 2 * m]; 2 * m];
        for (r, row) in matrix.iter().enumerate() {
            for (c, &x) in row.iter().enumerate() {
                next[r][c] = x;
                next[m + r][c] = x;
                next[m + r][m + c] = x;
            }
        }
        matrix = next;
    }
    // v G_n: u_k = xor_j v_j G[j][k], so row j is what v_j contributes
    matrix
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .fold(0u32, |m, (k, &x)| m | (u32::from(x) << k))
        })
        .collect()
}

//! Finite probability primitives.
//!
//! Everything here is exact double-precision arithmetic over finite
//! alphabets. Entropies are in bits and use the convention `0 log 0 = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when checking that a pmf sums to one.
pub const PMF_TOLERANCE: f64 = 1e-12;

fn check_probability(p: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(Error::InvalidProbability(p))
    }
}

/// Distribution of a single bit, stored as the probability of `1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryPmf {
    p1: f64,
}

impl BinaryPmf {
    pub fn new(p1: f64) -> Result<Self> {
        check_probability(p1).map(|p1| Self { p1 })
    }

    pub fn uniform() -> Self {
        Self { p1: 0.5 }
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p0(&self) -> f64 {
        1.0 - self.p1
    }

    pub fn prob(&self, bit: u8) -> f64 {
        if bit == 0 {
            self.p0()
        } else {
            self.p1
        }
    }

    pub fn entropy(&self) -> f64 {
        binary_entropy(self.p1)
    }
}

/// A pmf over `{0, .., len-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinitePmf {
    probs: Vec<f64>,
}

impl FinitePmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        if let Some(&p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidDistribution(format!("negative or non-finite entry {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PMF_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
        }
        Ok(Self { probs })
    }

    /// Point mass on `symbol` over an alphabet of `len` symbols.
    pub fn point(len: usize, symbol: usize) -> Self {
        let mut probs = vec![0.0; len];
        probs[symbol] = 1.0;
        Self { probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, symbol: usize) -> f64 {
        self.probs[symbol]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn entropy(&self) -> f64 {
        self.probs.iter().map(|&p| plogp(p)).sum()
    }

    /// Inverse-CDF sampling from a uniform draw in `[0, 1)`.
    pub fn sample_with(&self, uniform: f64) -> usize {
        let mut acc = 0.0;
        for (symbol, &p) in self.probs.iter().enumerate() {
            acc += p;
            if uniform < acc {
                return symbol;
            }
        }
        // round-off: fall back to the last symbol with positive mass
        self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }
}

/// A channel with binary input: one output pmf per input bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryInputChannel {
    rows: [FinitePmf; 2],
}

impl BinaryInputChannel {
    pub fn new(row0: FinitePmf, row1: FinitePmf) -> Result<Self> {
        if row0.len() != row1.len() {
            return Err(Error::DimensionMismatch(format!(
                "channel rows have {} and {} outputs",
                row0.len(),
                row1.len()
            )));
        }
        Ok(Self { rows: [row0, row1] })
    }

    pub fn from_rows(row0: Vec<f64>, row1: Vec<f64>) -> Result<Self> {
        Self::new(FinitePmf::new(row0)?, FinitePmf::new(row1)?)
    }

    pub fn output_len(&self) -> usize {
        self.rows[0].len()
    }

    pub fn prob(&self, input: u8, output: usize) -> f64 {
        self.rows[input as usize].prob(output)
    }

    pub fn row(&self, input: u8) -> &FinitePmf {
        &self.rows[input as usize]
    }

    pub fn matrix(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.probs().to_vec()).collect()
    }
}

/// Joint pmf of a bit `v` and an observation `o` over a finite alphabet.
///
/// Entry `(v, o)` is `P(V = v, O = o)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointBase {
    weights: [Vec<f64>; 2],
}

impl JointBase {
    pub fn new(w0: Vec<f64>, w1: Vec<f64>) -> Result<Self> {
        if w0.len() != w1.len() || w0.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "joint rows have {} and {} observations",
                w0.len(),
                w1.len()
            )));
        }
        if let Some(&w) = w0.iter().chain(&w1).find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidDistribution(format!("negative or non-finite weight {w}")));
        }
        let total: f64 = w0.iter().chain(&w1).sum();
        if (total - 1.0).abs() > PMF_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("joint weights sum to {total}")));
        }
        Ok(Self { weights: [w0, w1] })
    }

    /// `V ~ prior`, observed through `channel`.
    pub fn from_channel(prior: BinaryPmf, channel: &BinaryInputChannel) -> Self {
        let w = |v: u8| {
            channel
                .row(v)
                .probs()
                .iter()
                .map(|&p| prior.prob(v) * p)
                .collect::<Vec<_>>()
        };
        Self {
            weights: [w(0), w(1)],
        }
    }

    /// `V ~ prior` with an observation independent of `V`.
    pub fn independent(prior: BinaryPmf, observation: &FinitePmf) -> Self {
        let w = |v: u8| {
            observation
                .probs()
                .iter()
                .map(|&p| prior.prob(v) * p)
                .collect::<Vec<_>>()
        };
        Self {
            weights: [w(0), w(1)],
        }
    }

    pub(crate) fn from_weights_unchecked(w0: Vec<f64>, w1: Vec<f64>) -> Self {
        Self { weights: [w0, w1] }
    }

    pub fn num_observations(&self) -> usize {
        self.weights[0].len()
    }

    pub fn weight(&self, v: u8, o: usize) -> f64 {
        self.weights[v as usize][o]
    }

    pub fn row(&self, v: u8) -> &[f64] {
        &self.weights[v as usize]
    }

    pub fn marginal_v(&self) -> BinaryPmf {
        let p1: f64 = self.weights[1].iter().sum();
        let p0: f64 = self.weights[0].iter().sum();
        BinaryPmf {
            p1: (p1 / (p0 + p1)).clamp(0.0, 1.0),
        }
    }

    pub fn marginal_o(&self) -> Vec<f64> {
        self.weights[0]
            .iter()
            .zip(&self.weights[1])
            .map(|(a, b)| a + b)
            .collect()
    }

    /// The channel `p(o | v)`. Fails if either bit value has zero mass.
    pub fn conditional_channel(&self) -> Result<BinaryInputChannel> {
        let row = |v: usize| -> Result<Vec<f64>> {
            let mass: f64 = self.weights[v].iter().sum();
            if mass <= 0.0 {
                return Err(Error::InvalidDistribution(format!("P(V={v}) is zero")));
            }
            Ok(self.weights[v].iter().map(|w| w / mass).collect())
        };
        BinaryInputChannel::from_rows(row(0)?, row(1)?)
    }
}

fn plogp(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

/// Binary entropy `h(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    plogp(p) + plogp(1.0 - p)
}

/// `e * a = e(1-a) + (1-e)a`, the crossover of two cascaded BSCs.
pub fn star_convolve(e: f64, a: f64) -> f64 {
    e * (1.0 - a) + (1.0 - e) * a
}

/// `Z(V|O) = 2 sum_o sqrt(p(0,o) p(1,o))`, clamped to `[0, 1]`.
pub fn bhattacharyya(joint: &JointBase) -> f64 {
    let sum: f64 = joint.weights[0]
        .iter()
        .zip(&joint.weights[1])
        .map(|(a, b)| (a * b).sqrt())
        .sum();
    (2.0 * sum).clamp(0.0, 1.0)
}

/// `H(V|O)` in bits.
pub fn conditional_entropy(joint: &JointBase) -> f64 {
    joint.weights[0]
        .iter()
        .zip(&joint.weights[1])
        .map(|(&a, &b)| {
            let total = a + b;
            if total <= 0.0 {
                0.0
            } else {
                total * binary_entropy(b / total)
            }
        })
        .sum()
}

/// Checks that `degraded(y1|x) = sum_y2 better(y2|x) w(y1|y2)` and returns the
/// largest absolute violation over `(x, y1)`.
///
/// `w` has one row per output of `better`, each a pmf over the outputs of
/// `degraded`.
pub fn verify_degraded(
    better: &BinaryInputChannel,
    degraded: &BinaryInputChannel,
    w: &[Vec<f64>],
) -> Result<f64> {
    if w.len() != better.output_len() {
        return Err(Error::DimensionMismatch(format!(
            "witness has {} rows, expected {}",
            w.len(),
            better.output_len()
        )));
    }
    for (y2, row) in w.iter().enumerate() {
        if row.len() != degraded.output_len() {
            return Err(Error::DimensionMismatch(format!(
                "witness row {y2} has {} entries, expected {}",
                row.len(),
                degraded.output_len()
            )));
        }
        FinitePmf::new(row.clone())
            .map_err(|e| Error::InvalidDistribution(format!("witness row {y2}: {e}")))?;
    }

    let mut worst = 0.0f64;
    for x in 0..2u8 {
        for y1 in 0..degraded.output_len() {
            let composed: f64 = (0..better.output_len())
                .map(|y2| better.prob(x, y2) * w[y2][y1])
                .sum();
            worst = worst.max((degraded.prob(x, y1) - composed).abs());
        }
    }
    Ok(worst)
}

use std::time::Instant;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polar_wom::prob::{BinaryPmf, FinitePmf, JointBase};
use polar_wom::sc::{sc_bruteforce, Observation, Rule, ScContext};
use polar_wom::verify::{dense_transform, random_joint};

fn bernoulli(q: f64) -> JointBase {
    JointBase::independent(BinaryPmf::new(q).unwrap(), &FinitePmf::point(1, 0))
}

/// `p(u, o) = prod_j w(v_j, o_j)` with `v = u G_n`, by enumeration.
fn joint_table(bases: &[JointBase], obs: &[usize]) -> Vec<f64> {
    let n = bases.len();
    (0..1usize << n)
        .map(|bits| {
            let u: Vec<u8> = (0..n).map(|j| ((bits >> j) & 1) as u8).collect();
            let v = dense_transform(&u);
            v.iter()
                .zip(bases.iter().zip(obs))
                .map(|(&vj, (b, &o))| b.weight(vj, o))
                .product()
        })
        .collect()
}

fn random_case(rng: &mut ChaCha8Rng, n: usize) -> (Vec<JointBase>, Vec<usize>) {
    let outputs = rng.random_range(1..=3);
    let bases: Vec<_> = (0..n).map(|_| random_joint(rng, outputs, 0.01)).collect();
    let obs = (0..n).map(|_| rng.random_range(0..outputs)).collect();
    (bases, obs)
}

#[test]
fn small_worked_values() {
    let ctx = ScContext::iid(1, bernoulli(0.37)).unwrap();
    assert!((ctx.conditional(&Observation::constant(1), &[]).unwrap() - 0.37).abs() < 1e-15);
    let ctx = ScContext::iid(2, bernoulli(0.11)).unwrap();
    assert!((ctx.conditional(&Observation::constant(2), &[]).unwrap() - 0.1958).abs() < 1e-12);
}

#[test]
fn all_prefixes_match_enumeration_n8() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..5 {
        let (bases, obs) = random_case(&mut rng, 8);
        let ctx = ScContext::new(bases).unwrap();
        let obs = Observation(obs);
        for len in 0..8 {
            for bits in 0..1usize << len {
                let prefix: Vec<u8> = (0..len).map(|j| ((bits >> j) & 1) as u8).collect();
                let fast = ctx.conditional(&obs, &prefix).unwrap();
                let slow = sc_bruteforce(&ctx, &obs, &prefix).unwrap();
                assert!((fast - slow).abs() <= 1e-9, "prefix {prefix:?}: {fast} vs {slow}");
            }
        }
    }
}

#[test]
fn chain_rule_matches_posterior() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for n in [2usize, 4, 8, 16] {
        let (bases, obs) = random_case(&mut rng, n);
        let table = joint_table(&bases, &obs);
        let total: f64 = table.iter().sum();
        let ctx = ScContext::new(bases).unwrap();
        let o = Observation(obs);
        for _ in 0..10 {
            let idx = rng.random_range(0..1usize << n);
            let u: Vec<u8> = (0..n).map(|j| ((idx >> j) & 1) as u8).collect();
            let probs = ctx.genie_probabilities(&o, &u).unwrap();
            let product: f64 = probs
                .iter()
                .zip(&u)
                .map(|(&p, &b)| if b == 1 { p } else { 1.0 - p })
                .product();
            assert!((product - table[idx] / total).abs() <= 1e-9, "n={n}");
        }
    }
}

#[test]
fn random_rounding_frequencies() {
    let q = 0.2;
    let blocks = 100_000;
    let ctx = ScContext::iid(4, bernoulli(q)).unwrap();
    let obs = Observation::constant(4);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut ones = [0usize; 4];
    let mut patterns = [0usize; 16];
    for _ in 0..blocks {
        let out = ctx.pass(&obs, &[Rule::RandomRound; 4], &mut rng).unwrap();
        let mut key = 0;
        for (j, &b) in out.v.iter().enumerate() {
            ones[j] += b as usize;
            key |= (b as usize) << j;
        }
        patterns[key] += 1;
    }
    let sigma = (q * (1.0 - q) / blocks as f64).sqrt();
    for c in ones {
        let f = c as f64 / blocks as f64;
        assert!((f - q).abs() <= 3.0 * sigma, "frequency {f}");
    }
    // the whole block, not only its marginals, follows the iid prior
    let tv: f64 = patterns
        .iter()
        .enumerate()
        .map(|(key, &c)| {
            let w = key.count_ones() as i32;
            let p = q.powi(w) * (1.0 - q).powi(4 - w);
            (c as f64 / blocks as f64 - p).abs()
        })
        .sum::<f64>()
        / 2.0;
    assert!(tv <= 0.01, "total variation {tv}");
}

#[test]
fn argmax_recovers_noiseless_observation() {
    let base = JointBase::new(vec![0.3, 0.0], vec![0.0, 0.7]).unwrap();
    let ctx = ScContext::iid(64, base).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let v: Vec<u8> = (0..64).map(|_| rng.random_range(0..2u8)).collect();
    let obs = Observation(v.iter().map(|&b| b as usize).collect());
    let out = ctx.pass(&obs, &[Rule::Argmax; 64], &mut rng).unwrap();
    assert_eq!(out.v, v);
}

/// Timing ratio of one pass at `n` and `4n`, normalised by `n log n`.
#[test]
fn pass_cost_grows_like_n_log_n() {
    let time = |n: usize| {
        let ctx = ScContext::iid(n, bernoulli(0.3)).unwrap();
        let obs = Observation::constant(n);
        let rules = vec![Rule::RandomRound; n];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut ws = polar_wom::sc::Workspace::new(n);
        let reps = (1 << 20) / n;
        // best of three to damp scheduler noise
        (0..3)
            .map(|_| {
                let t = Instant::now();
                for _ in 0..reps {
                    ctx.pass_in(&mut ws, &obs, &rules, &mut rng).unwrap();
                }
                t.elapsed().as_secs_f64() / reps as f64
            })
            .fold(f64::INFINITY, f64::min)
    };
    let small = 1usize << 10;
    let large = 1usize << 14;
    let ratio = time(large) / time(small);
    let nlogn = (large as f64 * 14.0) / (small as f64 * 10.0);
    assert!(
        ratio < 2.5 * nlogn,
        "time ratio {ratio:.1} vs n log n ratio {nlogn:.1}"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conditional_is_a_probability_and_exact(seed in any::<u64>(), m in 1u32..=4) {
        let n = 1usize << m;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (bases, obs) = random_case(&mut rng, n);
        let ctx = ScContext::new(bases).unwrap();
        let obs = Observation(obs);
        let len = rng.random_range(0..n);
        let prefix: Vec<u8> = (0..len).map(|_| rng.random_range(0..2u8)).collect();
        let p = ctx.conditional(&obs, &prefix).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!((p - sc_bruteforce(&ctx, &obs, &prefix).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn fixed_rules_reproduce_the_transform(u in (0u32..=8).prop_flat_map(|m| prop::collection::vec(0..2u8, 1usize << m))) {
        let n = u.len();
        let ctx = ScContext::iid(n, bernoulli(0.4)).unwrap();
        let rules: Vec<Rule> = u.iter().map(|&b| Rule::Fixed(b)).collect();
        let out = ctx.pass(&Observation::constant(n), &rules, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        prop_assert_eq!(&out.u, &u);
        prop_assert_eq!(out.v, dense_transform(&u));
    }
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polar_wom::channel::{make_example2, AuxFunctions, ModelSpec, StateChannelSpec};
use polar_wom::harness::{self, ExperimentConfig};
use polar_wom::prob::{BinaryInputChannel, BinaryPmf};
use polar_wom::profile::{
    estimate_profile, select_sets, CodeProfile, IndexSets, Thresholds,
};
use polar_wom::scheme::{
    chain_effective_rate, effective_rate, AsymmetricCode, ChainProfile, ChainScheme, MulticodeScheme,
    SideChannelPayload,
};
use polar_wom::transform::transform_slice;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn bits(rng: &mut ChaCha8Rng, len: usize) -> Vec<u8> {
    (0..len).map(|_| rng.random_range(0..2u8)).collect()
}

fn bsc(p: f64) -> BinaryInputChannel {
    BinaryInputChannel::from_rows(vec![1.0 - p, p], vec![p, 1.0 - p]).unwrap()
}

/// Stateless model with input prior `q` over `channel`.
fn stateless(channel: &BinaryInputChannel, q: f64) -> StateChannelSpec {
    StateChannelSpec::stateless(channel, [0.0, 1.0], 1.0)
        .unwrap()
        .with_aux(AuxFunctions {
            p_v_given_s: vec![BinaryPmf::new(q).unwrap()],
            x_map: vec![[0, 1]],
        })
        .unwrap()
}

fn built(model: ModelSpec, spec: &StateChannelSpec, n: usize, samples: usize, z_high: f64, z_low: f64) -> CodeProfile {
    let z = estimate_profile(spec, n, samples, 1).unwrap();
    let sets = select_sets(&z, z_high, z_low).unwrap();
    CodeProfile::new(model, z, Thresholds { z_high, z_low }, sets).unwrap()
}

fn bsc_model() -> ModelSpec {
    ModelSpec::new("bsc", &[("alpha", 0.0), ("epsilon", 0.5)])
}

fn example2_model(alpha: f64) -> ModelSpec {
    ModelSpec::new("example2", &[("alpha", alpha), ("beta", 0.5), ("B", 0.25)])
}

#[test]
fn full_message_set_sends_the_transform() {
    let n = 16;
    let z = estimate_profile(&stateless(&bsc(0.1), 0.5), n, 10, 1).unwrap();
    let sets = IndexSets {
        message: (0..n).collect(),
        ..IndexSets::default()
    };
    let profile = CodeProfile::new(bsc_model(), z, Thresholds { z_high: 0.5, z_low: 0.5 }, sets).unwrap();
    let code = AsymmetricCode::new(&profile, &bsc(0.1), BinaryPmf::uniform()).unwrap();
    let m = bits(&mut rng(1), n);
    assert_eq!(code.encode(&m, &mut rng(2)).unwrap().x, transform_slice(&m).unwrap());
}

/// Mean codeword weight over `blocks` random messages.
fn mean_weight(code: &AsymmetricCode, blocks: usize) -> f64 {
    let mut r = rng(3);
    let len = code.profile().message_len();
    let total: usize = (0..blocks)
        .map(|_| {
            let m = bits(&mut r, len);
            code.encode(&m, &mut r).unwrap().x.iter().filter(|&&b| b == 1).count()
        })
        .sum();
    total as f64 / blocks as f64
}

/// Message on the near-uniform indices, everything else randomly rounded:
/// no frozen bits, so the codeword law is the i.i.d. prior up to the small
/// non-uniformity of the message conditionals.
fn prior_preserving_profile(spec: &StateChannelSpec, n: usize) -> CodeProfile {
    let z = estimate_profile(spec, n, 20_000, 1).unwrap();
    let (message, random_low) = (0..n).partition(|&i| z.z_source[i] >= 0.9999);
    let sets = IndexSets {
        message,
        random_low,
        ..IndexSets::default()
    };
    CodeProfile::new(bsc_model(), z, Thresholds { z_high: 0.9999, z_low: 0.9999 }, sets).unwrap()
}

#[test]
fn codewords_follow_the_input_prior() {
    let n = 64;
    let blocks = 10_000;
    for q in [0.5, 0.2] {
        let channel = bsc(0.05);
        let profile = prior_preserving_profile(&stateless(&channel, q), n);
        assert!(profile.message_len() > 0);
        let code = AsymmetricCode::new(&profile, &channel, BinaryPmf::new(q).unwrap()).unwrap();
        let w = mean_weight(&code, blocks);
        let sigma = (n as f64 * q * (1.0 - q) / blocks as f64).sqrt();
        assert!((w - q * n as f64).abs() <= 3.0 * sigma, "q = {q}: mean weight {w}");
    }
}

#[test]
fn noiseless_point_to_point_never_fails() {
    let channel = bsc(0.0);
    let spec = stateless(&channel, 0.3);
    let profile = built(bsc_model(), &spec, 256, 2000, 0.9, 0.01);
    let code = AsymmetricCode::new(&profile, &channel, BinaryPmf::new(0.3).unwrap()).unwrap();
    let mut r = rng(4);
    for _ in 0..200 {
        let t = code.trial(&mut r).unwrap();
        assert!(t.encoded && t.success);
    }
}

fn noisy_chain_profile() -> (CodeProfile, StateChannelSpec) {
    let spec = make_example2(0.1, 0.5, 0.25).unwrap();
    let z = estimate_profile(&spec, 1024, 1000, 1).unwrap();
    let z_low = 0.02;
    let sets = select_sets(&z, 0.9, z_low).unwrap();
    let profile = CodeProfile::new(example2_model(0.1), z, Thresholds { z_high: 0.9, z_low }, sets).unwrap();
    assert!(profile.side_len() > 0, "test needs a side set");
    assert!(profile.side_len() <= profile.message_len());
    (profile, spec)
}

#[test]
fn corrupted_side_payload_is_survivable() {
    let (profile, spec) = noisy_chain_profile();
    let code = MulticodeScheme::new(&profile, &spec).unwrap();
    let mut r = rng(5);
    let mut clean_errors = 0;
    let mut corrupted_errors = 0;
    for _ in 0..50 {
        let m = bits(&mut r, profile.message_len());
        let s = spec.sample_states(1024, &mut r);
        let enc = code.encode(&m, &s, &mut r).unwrap();
        let y = spec.simulate_channel(&enc.x, &s, &mut r).unwrap();
        clean_errors += usize::from(code.decode(&y, &enc.side).unwrap().as_deref() != Some(&m[..]));
        let flipped = SideChannelPayload {
            bits: enc.side.bits.iter().map(|b| b ^ 1).collect(),
            block_index: 0,
        };
        corrupted_errors += usize::from(code.decode(&y, &flipped).unwrap().as_deref() != Some(&m[..]));
    }
    eprintln!("block errors: {clean_errors} clean, {corrupted_errors} with flipped side bits");
    assert!(corrupted_errors >= clean_errors);
}

#[test]
fn multicoding_respects_the_stuck_cells_and_the_budget() {
    let cfg = ExperimentConfig {
        n: 1024,
        search: false,
        trials: 1000,
        ..ExperimentConfig::default()
    };
    let c = harness::construct(&cfg, 1024).unwrap();
    let report = harness::simulate(&cfg, &c.profile, c.capacity).unwrap();
    assert_eq!(report.stuck_writes, 0);
    assert!(report.mean_cost <= 0.25 + 0.02, "cost {}", report.mean_cost);

    let spec = make_example2(0.1, 0.5, 0.25).unwrap();
    let code = MulticodeScheme::new(&c.profile, &spec).unwrap();
    let mut r = rng(6);
    let m = bits(&mut r, c.profile.message_len());
    let enc = code.encode(&m, &vec![1; 1024], &mut r).unwrap();
    assert!(enc.x.iter().all(|&x| x == 0));
    assert_eq!(code.cost_of(&enc.x), 0.0);
}

fn noiseless_wom_profile(n: usize) -> (CodeProfile, StateChannelSpec) {
    let spec = make_example2(0.0, 0.5, 0.25).unwrap();
    (built(example2_model(0.0), &spec, n, 20_000, 0.99999, 0.01), spec)
}

#[test]
fn noiseless_wom_decodes_exactly() {
    let (profile, spec) = noiseless_wom_profile(256);
    let code = MulticodeScheme::new(&profile, &spec).unwrap();
    let mut r = rng(7);
    for _ in 0..200 {
        let t = code.trial(&mut r).unwrap();
        assert!(t.encoded && t.success);
        assert_eq!(t.stuck_writes(), 0);
    }
}

#[test]
fn single_block_chain_is_multicoding() {
    let (profile, spec) = noisy_chain_profile();
    let chain = ChainScheme::new(ChainProfile::new(profile, 1).unwrap(), &spec).unwrap();
    let code = chain.code();
    let p = &chain.chain().profile;
    let mut r = rng(8);
    let s = spec.sample_states(1024, &mut r);
    let m = bits(&mut r, chain.chain().block_message_len());

    // with k = 1 the relay positions carry zeros
    let mut full = vec![0u8; p.message_len()];
    let mut slot = m.iter();
    for (j, &i) in p.sets.message.iter().enumerate() {
        if p.relay_set.binary_search(&i).is_err() {
            full[j] = *slot.next().unwrap();
        }
    }
    let a = chain.encode(&[m.clone()], &[s.clone()], &mut rng(9)).unwrap();
    let b = code.encode(&full, &s, &mut rng(9)).unwrap();
    assert_eq!(a.blocks[0], b);
    assert_eq!(a.final_side, b.side);

    let y = spec.simulate_channel(&b.x, &s, &mut r).unwrap();
    let chained = chain.decode(&[y.clone()], &a.final_side).unwrap();
    let plain = code.decode(&y, &b.side).unwrap();
    let strip = |v: Vec<u8>| -> Vec<u8> {
        v.into_iter()
            .zip(&p.sets.message)
            .filter(|(_, i)| p.relay_set.binary_search(i).is_err())
            .map(|(b, _)| b)
            .collect()
    };
    assert_eq!(chained[0], plain.map(strip));
}

#[test]
fn chain_without_side_set_is_independent_blocks() {
    let (profile, spec) = noiseless_wom_profile(256);
    assert_eq!(profile.side_len(), 0);
    let chain = ChainScheme::new(ChainProfile::new(profile.clone(), 4).unwrap(), &spec).unwrap();
    assert!(chain.chain().profile.relay_set.is_empty());
    let code = MulticodeScheme::new(&profile, &spec).unwrap();
    let mut r = rng(10);
    let states: Vec<Vec<usize>> = (0..4).map(|_| spec.sample_states(256, &mut r)).collect();
    let messages: Vec<Vec<u8>> = (0..4).map(|_| bits(&mut r, profile.message_len())).collect();
    let enc = chain.encode(&messages, &states, &mut rng(11)).unwrap();
    let mut shared = rng(11);
    for j in 0..4 {
        let single = code.encode(&messages[j], &states[j], &mut shared).unwrap();
        assert_eq!((&enc.blocks[j].u, &enc.blocks[j].x), (&single.u, &single.x));
        assert_eq!(enc.blocks[j].side.block_index, j);
    }
}

#[test]
fn chained_noiseless_wom_recovers_every_block() {
    let (profile, spec) = noiseless_wom_profile(1024);
    let chain = ChainScheme::new(ChainProfile::new(profile.clone(), 8).unwrap(), &spec).unwrap();
    let mut r = rng(12);
    for _ in 0..10 {
        let blocks = chain.trial(&mut r).unwrap();
        assert_eq!(blocks.len(), 8);
        assert!(blocks.iter().all(|b| b.success));
        // k (|M| - |S|) message bits in total
        let carried: usize = blocks.iter().map(|b| b.message.len()).sum();
        assert_eq!(carried, 8 * (profile.message_len() - profile.side_len()));
    }
}

#[test]
fn wrong_relay_bits_only_reach_earlier_blocks() {
    let (profile, spec) = noisy_chain_profile();
    let k = 4;
    let chain = ChainScheme::new(ChainProfile::new(profile, k).unwrap(), &spec).unwrap();
    let n = 1024;
    let len = chain.chain().block_message_len();
    let mut r = rng(13);
    let states: Vec<Vec<usize>> = (0..k).map(|_| spec.sample_states(n, &mut r)).collect();
    let a_msgs: Vec<Vec<u8>> = (0..k).map(|_| bits(&mut r, len)).collect();
    let mut b_msgs = a_msgs.clone();
    // block 1 differs, so block 2 relays different side bits
    b_msgs[1] = bits(&mut r, len);
    let a = chain.encode(&a_msgs, &states, &mut rng(14)).unwrap();
    let b = chain.encode(&b_msgs, &states, &mut rng(15)).unwrap();
    assert_ne!(a.blocks[1].side, b.blocks[1].side, "test needs differing side bits");

    // outputs without noise: only the relay mismatch can cause an error
    let clean = |e: &polar_wom::scheme::ChainEncoded, j: usize| -> Vec<usize> {
        e.blocks[j].x.iter().zip(&states[j]).map(|(&x, &s)| usize::from(x == 1 || s == 1)).collect()
    };
    let mut ys: Vec<Vec<usize>> = (0..k).map(|j| clean(&a, j)).collect();
    ys[2] = clean(&b, 2);
    let out = chain.decode(&ys, &a.final_side).unwrap();
    assert_eq!(out.len(), k);
    assert_eq!(out[3].as_deref(), Some(&a_msgs[3][..]));
    assert_eq!(out[2].as_deref(), Some(&b_msgs[2][..]));
    // block 1 is decoded against block 0's side bits as relayed by the
    // wrong block 2; it still yields an estimate (here the side indices
    // carry little weight, so it may even be right)
    assert!(out[1].is_some() && out[0].is_some());
}

#[test]
fn rate_accounting() {
    let (profile, _) = noisy_chain_profile();
    let n = profile.n() as f64;
    let m = profile.message_len() as f64;
    let s = profile.side_len() as f64;
    assert_eq!(effective_rate(&profile), (m - s) / n);
    let gap = chain_effective_rate(&profile, 8) - chain_effective_rate(&profile, 1);
    assert!((gap - 7.0 / 8.0 * s / n).abs() < 1e-15);
    assert!((chain_effective_rate(&profile, 1 << 30) - (m - s) / n).abs() < 1e-8);

    let (plain, _) = noiseless_wom_profile(256);
    assert_eq!(effective_rate(&plain), plain.code_rate());
    assert_eq!(chain_effective_rate(&plain, 8), plain.code_rate());
}

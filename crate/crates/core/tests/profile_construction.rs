use proptest::prelude::*;

use polar_wom::channel::{make_bsc, make_example2, ModelSpec, StateChannelSpec};
use polar_wom::error::Error;
use polar_wom::prob::JointBase;
use polar_wom::profile::{
    estimate_profile, search_frozen, select_sets, CodeProfile, IndexSets, SearchOptions, Thresholds,
    ZProfile,
};
use polar_wom::verify::dense_transform;

/// Exact `Z(U_i | U_{<i}, O)` for an i.i.d. joint base at small `n`, by
/// enumerating every observation vector and every `u`.
fn exact_z(base: &JointBase, n: usize) -> Vec<f64> {
    let outputs = base.num_observations();
    let mut z = vec![0.0; n];
    let mut obs = vec![0usize; n];
    loop {
        // weight of each u, keyed with u_0 as the most significant bit
        let mut w = vec![0.0; 1 << n];
        for (key, slot) in w.iter_mut().enumerate() {
            let u: Vec<u8> = (0..n).map(|j| ((key >> (n - 1 - j)) & 1) as u8).collect();
            let v = dense_transform(&u);
            *slot = v.iter().zip(&obs).map(|(&vj, &o)| base.weight(vj, o)).product();
        }
        for (i, zi) in z.iter_mut().enumerate() {
            let shift = n - 1 - i;
            let mut m = vec![0.0; 1 << (i + 1)];
            for (key, &x) in w.iter().enumerate() {
                m[key >> shift] += x;
            }
            *zi += m.chunks(2).map(|p| 2.0 * (p[0] * p[1]).sqrt()).sum::<f64>();
        }
        // next observation vector
        let mut j = 0;
        while j < n {
            obs[j] += 1;
            if obs[j] < outputs {
                break;
            }
            obs[j] = 0;
            j += 1;
        }
        if j == n {
            return z;
        }
    }
}

fn example2_model() -> ModelSpec {
    ModelSpec::new("example2", &[("alpha", 0.1), ("beta", 0.5), ("B", 0.25)])
}

#[test]
fn estimates_match_exhaustive_values_at_n8() {
    let spec = make_example2(0.1, 0.5, 0.25).unwrap();
    let zp = estimate_profile(&spec, 8, 100_000, 4).unwrap();
    let source = exact_z(&spec.encoder_base().unwrap(), 8);
    let channel = exact_z(&spec.decoder_base().unwrap(), 8);
    for i in 0..8 {
        assert!((zp.z_source[i] - source[i]).abs() <= 0.02, "source {i}: {} vs {}", zp.z_source[i], source[i]);
        assert!((zp.z_channel[i] - channel[i]).abs() <= 0.02, "channel {i}: {} vs {}", zp.z_channel[i], channel[i]);
    }
}

#[test]
fn estimates_in_the_extreme_cases() {
    // noiseless observation: the channel side is decided everywhere
    let noiseless = make_bsc(0.0, 0.5).unwrap();
    let zp = estimate_profile(&noiseless, 64, 2000, 1).unwrap();
    assert!(zp.z_channel.iter().all(|&z| z <= 0.01));
    // uniform stateless source stays uniform
    let zp = estimate_profile(&noiseless, 2, 500, 1).unwrap();
    assert_eq!(zp.z_source, vec![1.0, 1.0]);
}

#[test]
fn estimation_is_reproducible_and_thread_independent() {
    let spec = make_example2(0.1, 0.5, 0.25).unwrap();
    let a = estimate_profile(&spec, 64, 500, 9).unwrap();
    let b = estimate_profile(&spec, 64, 500, 9).unwrap();
    assert_eq!(a, b);
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let c = single.install(|| estimate_profile(&spec, 64, 500, 9).unwrap());
    assert_eq!(a, c);
    assert_ne!(a, estimate_profile(&spec, 64, 500, 10).unwrap());
}

#[test]
fn message_fraction_stays_below_capacity() {
    let spec = make_example2(0.1, 0.5, 0.25).unwrap();
    let zp = estimate_profile(&spec, 1024, 500, 2).unwrap();
    let sets = select_sets(&zp, 0.9, 0.1).unwrap();
    let fraction = sets.message.len() as f64 / 1024.0;
    assert!(fraction > 0.0 && fraction <= 0.2655, "{fraction}");
}

fn noiseless_profile(n: usize) -> (CodeProfile, StateChannelSpec) {
    let model = ModelSpec::new("bsc", &[("alpha", 0.0), ("epsilon", 0.5)]);
    let spec = model.build().unwrap();
    let z = estimate_profile(&spec, n, 100, 1).unwrap();
    let sets = IndexSets {
        message: (0..n).step_by(2).collect(),
        frozen: (1..n).step_by(2).collect(),
        ..IndexSets::default()
    };
    let thresholds = Thresholds {
        z_high: 0.9,
        z_low: 0.0,
    };
    (CodeProfile::new(model, z, thresholds, sets).unwrap(), spec)
}

#[test]
fn search_accepts_at_once_when_nothing_can_fail() {
    let (profile, spec) = noiseless_profile(64);
    let found = search_frozen(&profile, &spec, &SearchOptions::default()).unwrap();
    assert!(found.accepted);
    assert_eq!(found.candidates_tried, 1);
    assert_eq!(found.fer, 0.0);

    let spec2 = make_example2(0.1, 0.5, 0.25).unwrap();
    let z = estimate_profile(&spec2, 256, 200, 1).unwrap();
    let sets = select_sets(&z, 0.5, 0.5).unwrap();
    let thresholds = Thresholds {
        z_high: 0.5,
        z_low: 0.5,
    };
    let profile = CodeProfile::new(example2_model(), z, thresholds, sets).unwrap();
    let vacuous = SearchOptions {
        error_target: 1.0,
        cost_slack: f64::INFINITY,
        batch: 10,
        ..SearchOptions::default()
    };
    let found = search_frozen(&profile, &spec2, &vacuous).unwrap();
    assert!(found.accepted);
    assert_eq!(found.candidates_tried, 1);
}

#[test]
fn search_is_deterministic_per_seed() {
    let spec = make_example2(0.1, 0.5, 0.25).unwrap();
    let z = estimate_profile(&spec, 256, 200, 1).unwrap();
    let sets = select_sets(&z, 0.9, 0.05).unwrap();
    let thresholds = Thresholds {
        z_high: 0.9,
        z_low: 0.05,
    };
    let profile = CodeProfile::new(example2_model(), z, thresholds, sets).unwrap();
    let opts = SearchOptions {
        trials_budget: 3,
        batch: 20,
        seed: 5,
        ..SearchOptions::default()
    };
    assert_eq!(
        search_frozen(&profile, &spec, &opts).unwrap(),
        search_frozen(&profile, &spec, &opts).unwrap()
    );
}

fn saved_profile() -> CodeProfile {
    let spec = make_example2(0.1, 0.5, 0.25).unwrap();
    let z = estimate_profile(&spec, 128, 300, 3).unwrap();
    let sets = select_sets(&z, 0.6, 0.3).unwrap();
    let thresholds = Thresholds {
        z_high: 0.6,
        z_low: 0.3,
    };
    let frozen: Vec<u8> = (0..sets.frozen.len()).map(|i| (i % 3 == 0) as u8).collect();
    CodeProfile::new(example2_model(), z, thresholds, sets)
        .unwrap()
        .with_frozen_bits(frozen)
        .unwrap()
        .with_relay_set()
        .unwrap()
}

#[test]
fn save_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("profile.json");
    let p = saved_profile();
    p.save(&path).unwrap();
    let back = CodeProfile::load(&path).unwrap();
    assert_eq!(back, p);
    back.save(dir.path().join("again.json")).unwrap();
    assert_eq!(
        std::fs::read(&path).unwrap(),
        std::fs::read(dir.path().join("again.json")).unwrap()
    );

    let doc: serde_json::Value = serde_json::from_str(&p.to_json().unwrap()).unwrap();
    for key in [
        "version", "model_id", "n", "thresholds", "z_source", "z_channel", "sets", "frozen_bits",
        "relay_set", "seed", "sample_count",
    ] {
        assert!(doc.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn damaged_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = saved_profile().to_json().unwrap();

    let path = dir.path().join("truncated.json");
    std::fs::write(&path, &text[..text.len() / 2]).unwrap();
    assert!(matches!(CodeProfile::load(&path), Err(Error::MalformedFile { .. })));

    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    let first_message = doc["sets"]["message"][0].clone();
    doc["sets"]["frozen"].as_array_mut().unwrap().push(first_message);
    let path = dir.path().join("overlap.json");
    std::fs::write(&path, doc.to_string()).unwrap();
    assert!(matches!(CodeProfile::load(&path), Err(Error::InvalidProfile(_))));

    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc["version"] = 99.into();
    assert!(matches!(
        CodeProfile::from_json(&doc.to_string()),
        Err(Error::VersionMismatch { found: 99, .. })
    ));
}

fn z_profile(z_source: Vec<f64>, z_channel: Vec<f64>) -> ZProfile {
    ZProfile {
        n: z_source.len(),
        z_source,
        z_channel,
        pe_channel: Vec::new(),
        sample_count: 1,
        seed: 0,
    }
}

proptest! {
    #[test]
    fn selected_sets_partition_the_indices(
        (zs, zc) in (0u32..=7).prop_flat_map(|m| {
            let n = 1usize << m;
            (prop::collection::vec(0.0..=1.0f64, n), prop::collection::vec(0.0..=1.0f64, n))
        }),
        z_low in 0.0..0.5f64,
        z_high in 0.5..=1.0f64,
    ) {
        let n = zs.len();
        let zp = z_profile(zs.clone(), zc.clone());
        match select_sets(&zp, z_high, z_low) {
            Ok(sets) => {
                let roles = sets.roles(n).unwrap();
                prop_assert_eq!(roles.len(), n);
                for &i in &sets.message {
                    prop_assert!(zs[i] >= z_high && zc[i] <= z_low);
                }
                for &i in &sets.side {
                    prop_assert!(zs[i] < z_high && zc[i] > z_low);
                }
                let thresholds = Thresholds { z_high, z_low };
                let p = CodeProfile::new(example2_model(), zp, thresholds, sets).unwrap();
                prop_assert_eq!(CodeProfile::from_json(&p.to_json().unwrap()).unwrap(), p);
            }
            Err(e) => {
                prop_assert!(matches!(e, Error::EmptyMessageSet));
                prop_assert!(!(0..n).any(|i| zs[i] >= z_high && zc[i] <= z_low));
            }
        }
    }
}

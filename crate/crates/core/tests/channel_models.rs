use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use polar_wom::channel::{
    appendix_b_witness, capacity_bsc, capacity_example2, gp_capacity_grid, make_bsc, make_example1,
    make_example2, StateChannelSpec,
};
use polar_wom::prob::{bhattacharyya, binary_entropy, conditional_entropy, verify_degraded, JointBase};

/// Frequency of `y = 1` for every `(x, s)` against `p(1 | x, s)`, 3 sigma.
fn check_frequencies(spec: &StateChannelSpec, per_pair: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s in 0..spec.num_states() {
        for x in 0..2u8 {
            let y = spec
                .simulate_channel(&vec![x; per_pair], &vec![s; per_pair], &mut rng)
                .unwrap();
            let f = y.iter().filter(|&&v| v == 1).count() as f64 / per_pair as f64;
            let p = spec.p_y(1, x, s);
            let sigma = (p * (1.0 - p) / per_pair as f64).sqrt();
            assert!((f - p).abs() <= 3.0 * sigma, "(x, s) = ({x}, {s}): {f} vs {p}");
        }
    }
}

#[test]
fn sampled_outputs_follow_the_transition_table() {
    check_frequencies(&make_example1(0.05, 0.1, 0.3, 0.3).unwrap(), 250_000, 1);
    check_frequencies(&make_example2(0.1, 0.5, 0.25).unwrap(), 250_000, 2);
}

#[test]
fn example1_matches_its_table() {
    let spec = make_example1(0.05, 0.05, 0.3, 0.3).unwrap();
    let table = [((0, 0), 0.05), ((0, 1), 0.95), ((1, 0), 0.95), ((1, 1), 0.95)];
    for ((x, s), p) in table {
        assert_eq!(spec.p_y(1, x, s), p);
    }
}

#[test]
fn example2_worked_values() {
    let spec = make_example2(0.1, 0.5, 0.25).unwrap();
    let aux = spec.aux().unwrap();
    assert!((aux.p_v_given_s[1].p1() - 0.9).abs() < 1e-12);
    assert_eq!(aux.x(1, 1), 0);
    assert!((capacity_example2(0.1, 0.5, 0.25).unwrap() - 0.265502).abs() < 1e-6);
    assert_eq!(capacity_example2(0.0, 0.5, 0.25).unwrap(), 0.5);
    assert!((capacity_bsc(0.1, 0.5).unwrap() - 0.531004).abs() < 1e-6);
    let w = appendix_b_witness(0.1, 0.5, 0.25).unwrap();
    assert!((w.prob(1, 1) - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn grid_agrees_with_closed_forms() {
    let grid = gp_capacity_grid(&make_example2(0.1, 0.5, 0.25).unwrap(), 1e-3).unwrap();
    assert!((grid.capacity - 0.265502).abs() <= 1e-3);
    assert!((grid.aux.p_v_given_s[0].p1() - 0.5).abs() <= 2e-3);
    assert!((grid.aux.p_v_given_s[1].p1() - 0.9).abs() <= 2e-3);

    // stateless: the grid maximises I(V;Y) under the cost constraint
    for (alpha, eps) in [(0.1, 0.5), (0.05, 0.2), (0.2, 0.3)] {
        let grid = gp_capacity_grid(&make_bsc(alpha, eps).unwrap(), 1e-3).unwrap();
        let want = binary_entropy(alpha + eps - 2.0 * alpha * eps) - binary_entropy(alpha);
        assert!((grid.capacity - want).abs() <= 1e-3, "{alpha} {eps}");
    }
}

proptest! {
    #[test]
    fn aux_functions_attain_the_closed_form(
        alpha in 0.0..0.5f64,
        beta in 0.0..0.9f64,
        eps in 0.0..=0.5f64,
    ) {
        let budget = eps * (1.0 - beta);
        let spec = make_example2(alpha, beta, budget).unwrap();
        let closed = capacity_example2(alpha, beta, budget).unwrap();
        prop_assert!((spec.aux_rate().unwrap() - closed).abs() <= 1e-12);
        prop_assert!((spec.expected_cost().unwrap() - budget).abs() <= 1e-12);
    }

    #[test]
    fn witness_degrades_state_view_from_output_view(
        alpha in 0.0..0.5f64,
        beta in 0.0..0.95f64,
        eps in 0.001..=0.5f64,
    ) {
        let budget = eps * (1.0 - beta);
        let spec = make_example2(alpha, beta, budget).unwrap();
        let w = appendix_b_witness(alpha, beta, budget).unwrap();
        let v = verify_degraded(&spec.y_given_v().unwrap(), &spec.s_given_v().unwrap(), &w.matrix()).unwrap();
        prop_assert!(v <= 1e-12);
    }

    #[test]
    fn entropy_lies_between_z_squared_and_z(
        w in (1usize..=6).prop_flat_map(|k| prop::collection::vec(0.0..1.0f64, 2 * k)),
    ) {
        let total: f64 = w.iter().sum();
        prop_assume!(total > 1e-9);
        let mut w: Vec<f64> = w.iter().map(|x| x / total).collect();
        let w1 = w.split_off(w.len() / 2);
        let j = JointBase::new(w, w1).unwrap();
        let z = bhattacharyya(&j);
        let h = conditional_entropy(&j);
        prop_assert!(z * z <= h + 1e-12 && h <= z + 1e-12, "z {z}, h {h}");
    }
}

use proptest::prelude::*;

use polar_wom::transform::{polar_inverse, polar_transform, transform_slice};
use polar_wom::verify::dense_transform;
use polar_wom::BitBlock;

fn block(max_log: u32) -> impl Strategy<Value = Vec<u8>> {
    (0..=max_log).prop_flat_map(|m| prop::collection::vec(0..2u8, 1usize << m))
}

fn pair(max_log: u32) -> impl Strategy<Value = (Vec<u8>, Vec<u8>)> {
    (0..=max_log).prop_flat_map(|m| {
        let n = 1usize << m;
        (prop::collection::vec(0..2u8, n), prop::collection::vec(0..2u8, n))
    })
}

#[test]
fn worked_examples() {
    assert_eq!(transform_slice(&[1, 1]).unwrap(), vec![0, 1]);
    assert_eq!(transform_slice(&[1, 0, 1, 1]).unwrap(), vec![1, 1, 0, 1]);
    assert_eq!(transform_slice(&[1, 1, 0, 1]).unwrap(), vec![1, 0, 1, 1]);
    assert_eq!(transform_slice(&[0; 8]).unwrap(), vec![0; 8]);
}

proptest! {
    #[test]
    fn involution(u in block(12)) {
        let u = BitBlock::new(u).unwrap();
        prop_assert_eq!(polar_inverse(&polar_transform(&u)), u.clone());
        prop_assert_eq!(polar_transform(&polar_transform(&u)), u);
    }

    #[test]
    fn linear_over_gf2((a, b) in pair(10)) {
        let sum: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
        let ta = transform_slice(&a).unwrap();
        let tb = transform_slice(&b).unwrap();
        let want: Vec<u8> = ta.iter().zip(&tb).map(|(x, y)| x ^ y).collect();
        prop_assert_eq!(transform_slice(&sum).unwrap(), want);
    }

    #[test]
    fn matches_dense_matrix(u in block(6)) {
        prop_assert_eq!(transform_slice(&u).unwrap(), dense_transform(&u));
    }

    // row i of G_n has weight 2^{popcount(i)}
    #[test]
    fn unit_vector_weight(m in 0u32..=10, seed in any::<usize>()) {
        let n = 1usize << m;
        let i = seed % n;
        let mut e = vec![0u8; n];
        e[i] = 1;
        let w = BitBlock::new(e).unwrap().transform().weight();
        prop_assert_eq!(w, 1usize << i.count_ones());
    }
}

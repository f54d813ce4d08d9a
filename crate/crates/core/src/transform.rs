//! The transform `x = u G_n` over GF(2), `G_n` the `log2 n`-fold Kronecker
//! power of `[[1, 0], [1, 1]]`.
//!
//! No bit-reversal permutation is applied: index `i` of `u` is row `i` of the
//! block-recursive `G_n = [[G_{n/2}, 0], [G_{n/2}, G_{n/2}]]`. Consequently
//! `u G_n = ((u_a ^ u_b) G_{n/2}, u_b G_{n/2})` for the halves `u_a`, `u_b`,
//! and the SC recursion pairs position `j` with `j + n/2`.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A binary vector whose length is a power of two.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct BitBlock(Vec<u8>);

impl BitBlock {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        check_len(bits.len())?;
        if let Some((index, &value)) = bits.iter().enumerate().find(|(_, &b)| b > 1) {
            return Err(Error::NonBinary { index, value });
        }
        Ok(Self(bits))
    }

    pub fn zeros(n: usize) -> Result<Self> {
        check_len(n)?;
        Ok(Self(vec![0; n]))
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.0
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    /// `self * G_n`.
    pub fn transform(&self) -> BitBlock {
        let mut out = self.0.clone();
        transform_in_place(&mut out);
        BitBlock(out)
    }

    /// `self * G_n^{-1}`, which is the same map since `G_n` is an involution.
    pub fn inverse(&self) -> BitBlock {
        self.transform()
    }
}

impl Deref for BitBlock {
    type Target = [u8];

    fn deref(&self) -> &[u8] {
        &self.0
    }
}

impl TryFrom<Vec<u8>> for BitBlock {
    type Error = Error;

    fn try_from(bits: Vec<u8>) -> Result<Self> {
        Self::new(bits)
    }
}

impl From<BitBlock> for Vec<u8> {
    fn from(b: BitBlock) -> Vec<u8> {
        b.0
    }
}

fn check_len(n: usize) -> Result<()> {
    if n.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::NotPowerOfTwo(n))
    }
}

pub fn polar_transform(u: &BitBlock) -> BitBlock {
    u.transform()
}

pub fn polar_inverse(x: &BitBlock) -> BitBlock {
    x.inverse()
}

/// Butterfly evaluation of `bits * G_n`, `n log n / 2` XORs.
///
/// # Panics
/// If the length is not a power of two.
pub fn transform_in_place(bits: &mut [u8]) {
    let n = bits.len();
    assert!(n.is_power_of_two(), "length {n} is not a power of two");
    let mut half = 1;
    while half < n {
        for block in bits.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= *b;
            }
        }
        half *= 2;
    }
}

/// Checked slice variant of [`transform_in_place`].
pub fn transform_slice(bits: &[u8]) -> Result<Vec<u8>> {
    BitBlock::new(bits.to_vec()).map(|b| b.transform().into_inner())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        let u = BitBlock::new(vec![1, 1]).unwrap();
        assert_eq!(&*u.transform(), &[0, 1]);

        let u = BitBlock::new(vec![1, 0, 1, 1]).unwrap();
        let x = polar_transform(&u);
        assert_eq!(&*x, &[1, 1, 0, 1]);
        assert_eq!(polar_inverse(&x), u);

        let z = BitBlock::zeros(16).unwrap();
        assert_eq!(z.transform(), z);
    }

    #[test]
    fn length_one_is_identity() {
        let u = BitBlock::new(vec![1]).unwrap();
        assert_eq!(u.transform(), u);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(BitBlock::new(vec![0, 1, 0]), Err(Error::NotPowerOfTwo(3))));
        assert!(matches!(BitBlock::zeros(0), Err(Error::NotPowerOfTwo(0))));
        assert!(matches!(
            BitBlock::new(vec![0, 2]),
            Err(Error::NonBinary { index: 1, value: 2 })
        ));
        assert!(transform_slice(&[1, 0, 1, 1, 0, 0]).is_err());
    }
}

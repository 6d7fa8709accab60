//! Subsets of `{0, .., n-1}` encoded as bitmasks, and k-subset enumeration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A subset of coordinates. Bit `j` set means coordinate `j` belongs to the set.
///
/// The same encoding indexes cube points (bit `j` set iff `eps_j = -1`) and
/// Walsh frequencies, which is what lets the transform run in place.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Subset(pub u64);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    /// The full set `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        if n >= 64 {
            Subset(u64::MAX)
        } else {
            Subset((1u64 << n) - 1)
        }
    }

    pub fn singleton(j: usize) -> Self {
        Subset(1u64 << j)
    }

    pub fn from_coords<I: IntoIterator<Item = usize>>(coords: I) -> Self {
        Subset(coords.into_iter().fold(0, |m, j| m | (1u64 << j)))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, j: usize) -> bool {
        self.0 >> j & 1 == 1
    }

    pub fn intersect(self, other: Subset) -> Subset {
        Subset(self.0 & other.0)
    }

    /// Complement inside `{0, .., n-1}`.
    pub fn complement(self, n: usize) -> Subset {
        Subset(!self.0 & Subset::full(n).0)
    }

    pub fn coords(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let j = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(j)
            }
        })
    }

    pub fn check(self, n: usize) -> Result<Self> {
        if self.0 & !Subset::full(n).0 != 0 {
            Err(Error::SubsetOutOfRange { mask: self.0, n })
        } else {
            Ok(self)
        }
    }
}

/// Binomial coefficient as `u128`; exact for every argument used here.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// All `k`-subsets of `{0, .., n-1}` in colexicographic order.
///
/// Colex order on k-subsets coincides with increasing bitmask order, so the
/// iterator walks masks with Gosper's hack.
pub fn k_subsets(n: usize, k: usize) -> KSubsets {
    let next = if k > n || n > 63 { None } else { Some((1u64 << k) - 1) };
    KSubsets { n, next }
}

#[derive(Debug, Clone)]
pub struct KSubsets {
    n: usize,
    next: Option<u64>,
}

impl Iterator for KSubsets {
    type Item = Subset;

    fn next(&mut self) -> Option<Subset> {
        let cur = self.next?;
        self.next = if cur == 0 {
            None
        } else {
            let low = cur & cur.wrapping_neg();
            let ripple = cur + low;
            let succ = (((ripple ^ cur) >> 2) / low) | ripple;
            if succ >> self.n != 0 {
                None
            } else {
                Some(succ)
            }
        };
        Some(Subset(cur))
    }
}

/// Scatter the bits of `compact` onto the positions of `mask` (inverse of a bit gather).
pub fn deposit_bits(compact: u64, mask: Subset) -> u64 {
    let mut out = 0u64;
    for (i, j) in mask.coords().enumerate() {
        out |= (compact >> i & 1) << j;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(20, 10), 184_756);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(0, 0), 1);
    }

    #[test]
    fn k_subsets_are_colex_and_complete() {
        let all: Vec<u64> = k_subsets(5, 2).map(|s| s.0).collect();
        assert_eq!(all.len(), 10);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert!(all.iter().all(|m| m.count_ones() == 2 && m >> 5 == 0));
        // colex: {0,1},{0,2},{1,2},{0,3},...
        assert_eq!(&all[..4], &[0b00011, 0b00101, 0b00110, 0b01001]);
        assert_eq!(k_subsets(4, 0).count(), 1);
        assert_eq!(k_subsets(4, 4).count(), 1);
        assert_eq!(k_subsets(3, 4).count(), 0);
    }

    #[test]
    fn subset_helpers() {
        let s = Subset::from_coords([0, 3]);
        assert_eq!(s.0, 0b1001);
        assert_eq!(s.complement(4).0, 0b0110);
        assert_eq!(s.coords().collect::<Vec<_>>(), vec![0, 3]);
        assert!(Subset(0b10000).check(4).is_err());
        assert_eq!(deposit_bits(0b11, Subset(0b1010)), 0b1010);
        assert_eq!(deposit_bits(0b10, Subset(0b1010)), 0b1000);
    }
}

//! Gray bit labeling of integer constellation coordinates.
//!
//! A coordinate taking values in `{0, .., q-1}` (with `q` a power of two)
//! carries `log2(q)` bits. Bits are indexed MSB first within a coordinate,
//! and a vector's bits are enumerated coordinate-major: global bit
//! `i * bits_per_coord + j` is bit `j` of coordinate `i`.

use crate::error::{Error, Result};

/// Binary-reflected Gray code of `level`.
pub fn gray_label(level: u64) -> u64 {
    level ^ (level >> 1)
}

/// Gray labeling of one coordinate axis with `q` levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitLabeling {
    q: u64,
    bits_per_coord: usize,
}

impl BitLabeling {
    pub fn gray(q: u64) -> Result<Self> {
        if q < 2 || !q.is_power_of_two() {
            return Err(Error::parameter(format!(
                "level count must be a power of two >= 2, got {}",
                q
            )));
        }
        Ok(BitLabeling {
            q,
            bits_per_coord: q.trailing_zeros() as usize,
        })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn bits_per_coord(&self) -> usize {
        self.bits_per_coord
    }

    pub fn total_bits(&self, n: usize) -> usize {
        n * self.bits_per_coord
    }

    fn check_level(&self, a: i64) -> Result<u64> {
        if a < 0 || a as u64 >= self.q {
            return Err(Error::parameter(format!(
                "coordinate {} outside 0..{}",
                a, self.q
            )));
        }
        Ok(a as u64)
    }

    /// Bit `j` (0 = MSB) of the label of level `a`.
    pub fn bit_of(&self, a: i64, j: usize) -> Result<u8> {
        let a = self.check_level(a)?;
        if j >= self.bits_per_coord {
            return Err(Error::parameter(format!(
                "bit index {} outside 0..{}",
                j, self.bits_per_coord
            )));
        }
        Ok(((gray_label(a) >> (self.bits_per_coord - 1 - j)) & 1) as u8)
    }

    /// All bits of level `a`, MSB first.
    pub fn bits_of(&self, a: i64) -> Result<Vec<u8>> {
        (0..self.bits_per_coord).map(|j| self.bit_of(a, j)).collect()
    }

    /// The level whose label has the given bits (MSB first).
    pub fn level_of(&self, bits: &[u8]) -> Result<i64> {
        if bits.len() != self.bits_per_coord {
            return Err(Error::parameter("wrong number of bits for one level"));
        }
        let g = bits.iter().fold(0u64, |acc, &b| (acc << 1) | (b as u64 & 1));
        // Invert the Gray map by prefix-xor.
        let mut level = g;
        let mut shift = 1;
        while shift < self.bits_per_coord {
            level ^= level >> shift;
            shift <<= 1;
        }
        Ok(level as i64)
    }

    /// Levels whose bit `j` equals `value`.
    pub fn levels_with(&self, j: usize, value: u8) -> Result<Vec<i64>> {
        (0..self.q as i64)
            .filter_map(|a| match self.bit_of(a, j) {
                Ok(b) => (b == value).then_some(Ok(a)),
                Err(e) => Some(Err(e)),
            })
            .collect()
    }

    /// Bit `k` of the coordinate-major bit string of `z`.
    pub fn vector_bit(&self, z: &[i64], k: usize) -> Result<u8> {
        let coord = k / self.bits_per_coord;
        if coord >= z.len() {
            return Err(Error::parameter(format!(
                "bit index {} outside the {}-bit vector",
                k,
                self.total_bits(z.len())
            )));
        }
        self.bit_of(z[coord], k % self.bits_per_coord)
    }

    /// All bits of `z`, coordinate-major.
    pub fn vector_bits(&self, z: &[i64]) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(self.total_bits(z.len()));
        for &a in z {
            out.extend(self.bits_of(a)?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_neighbors_differ_in_one_bit() {
        for a in 0u64..255 {
            let x = gray_label(a) ^ gray_label(a + 1);
            assert_eq!(x.count_ones(), 1, "levels {} and {}", a, a + 1);
        }
        let mut seen: Vec<u64> = (0..256).map(gray_label).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 256);
    }

    #[test]
    fn four_level_table() {
        let lab = BitLabeling::gray(4).unwrap();
        assert_eq!(lab.bits_per_coord(), 2);
        assert_eq!(lab.bits_of(0).unwrap(), vec![0, 0]);
        assert_eq!(lab.bits_of(1).unwrap(), vec![0, 1]);
        assert_eq!(lab.bits_of(2).unwrap(), vec![1, 1]);
        assert_eq!(lab.bits_of(3).unwrap(), vec![1, 0]);
        for a in 0..4 {
            let bits = lab.bits_of(a).unwrap();
            assert_eq!(lab.level_of(&bits).unwrap(), a);
        }
    }

    #[test]
    fn hypothesis_sets_partition_the_levels() {
        for q in [2u64, 4, 8, 16] {
            let lab = BitLabeling::gray(q).unwrap();
            for j in 0..lab.bits_per_coord() {
                let zeros = lab.levels_with(j, 0).unwrap();
                let ones = lab.levels_with(j, 1).unwrap();
                assert_eq!(zeros.len(), q as usize / 2);
                assert_eq!(ones.len(), q as usize / 2);
                let mut all: Vec<i64> = zeros.iter().chain(&ones).copied().collect();
                all.sort();
                assert_eq!(all, (0..q as i64).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn vector_bits_are_coordinate_major() {
        let lab = BitLabeling::gray(4).unwrap();
        let z = [2i64, 0, 3];
        assert_eq!(lab.vector_bits(&z).unwrap(), vec![1, 1, 0, 0, 1, 0]);
        assert_eq!(lab.vector_bit(&z, 0).unwrap(), 1);
        assert_eq!(lab.vector_bit(&z, 3).unwrap(), 0);
        assert_eq!(lab.vector_bit(&z, 4).unwrap(), 1);
        assert_eq!(lab.vector_bit(&z, 5).unwrap(), 0);
        assert!(lab.vector_bit(&z, 6).is_err());
        assert_eq!(lab.total_bits(z.len()), 6);
    }

    #[test]
    fn invalid_arguments_are_rejected() {
        assert!(BitLabeling::gray(0).is_err());
        assert!(BitLabeling::gray(1).is_err());
        assert!(BitLabeling::gray(3).is_err());
        assert!(BitLabeling::gray(12).is_err());
        let lab = BitLabeling::gray(4).unwrap();
        assert!(lab.bit_of(-1, 0).is_err());
        assert!(lab.bit_of(4, 0).is_err());
        assert!(lab.bit_of(1, 2).is_err());
        assert!(lab.level_of(&[0]).is_err());
    }
}

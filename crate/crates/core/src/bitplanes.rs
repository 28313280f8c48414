//! Bitplane decomposition of integer maps.
//!
//! A value map of length N (vectorized image or coefficient block layout)
//! is split into K binary planes: plane k holds bit k of every value, so
//! plane K-1 carries the MSBs. Signed quantized DCT coefficients use a
//! sign plane plus K-1 magnitude planes instead of two's complement.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BitplaneError {
    #[error("value {value} at position {index} does not fit in {bits} bits")]
    ValueOutOfRange {
        value: u32,
        index: usize,
        bits: u32,
    },
    #[error("plane count must be at least {min}, got {got}")]
    TooFewPlanes { min: usize, got: usize },
    #[error("plane lengths differ: expected {expected}, plane {plane} has {got}")]
    MixedLengths {
        expected: usize,
        plane: usize,
        got: usize,
    },
    #[error("empty plane stack")]
    Empty,
}

/// A binary vector packed 64 bits per word.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitSeq {
    words: Vec<u64>,
    len: usize,
}

impl BitSeq {
    pub fn zeros(len: usize) -> Self {
        BitSeq {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut seq = BitSeq::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b != 0 {
                seq.set(i, true);
            }
        }
        seq
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Positions of the set bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let bit = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + bit)
                }
            })
        })
    }

    /// Bits as 0/1 bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.get(i) as u8).collect()
    }

    /// Bits as 0.0/1.0 reals, written into `out`.
    pub fn write_f64(&self, out: &mut [f64]) {
        assert_eq!(out.len(), self.len);
        out.fill(0.0);
        for i in self.ones() {
            out[i] = 1.0;
        }
    }

    pub fn xor(&self, other: &BitSeq) -> BitSeq {
        assert_eq!(self.len, other.len);
        BitSeq {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a ^ b)
                .collect(),
            len: self.len,
        }
    }
}

/// One binary plane of a value map.
#[derive(Debug, Clone)]
pub struct Bitplane {
    pub bits: BitSeq,
    /// Significance index: k in [0, K-1], where K-1 is the MSB
    /// (the sign plane for coefficient stacks).
    pub plane_index: usize,
}

/// What a plane stack was extracted from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    Pixels,
    DctCoefficients,
}

/// K binary planes of one value map, all of equal length.
///
/// Planes are stored LSB-indexed (`planes[k]` holds bit k); consumers that
/// want MSB-first feed order iterate [`BitplaneStack::iter_msb_first`].
#[derive(Debug, Clone)]
pub struct BitplaneStack {
    planes: Vec<Bitplane>,
    pub source_kind: SourceKind,
    /// Count of coefficients clamped to the magnitude ceiling by
    /// [`signed_to_planes`]; zero for pixel stacks.
    pub saturated: usize,
}

impl BitplaneStack {
    pub fn num_planes(&self) -> usize {
        self.planes.len()
    }

    pub fn plane_len(&self) -> usize {
        self.planes.first().map_or(0, |p| p.bits.len())
    }

    /// Plane with significance index k (k = 0 is the LSB plane).
    pub fn plane(&self, k: usize) -> &Bitplane {
        &self.planes[k]
    }

    /// Planes from most to least significant. For coefficient stacks the
    /// sign plane (index K-1) comes first.
    pub fn iter_msb_first(&self) -> impl Iterator<Item = &Bitplane> {
        self.planes.iter().rev()
    }

    /// Planes from least to most significant.
    pub fn iter_lsb_first(&self) -> impl Iterator<Item = &Bitplane> {
        self.planes.iter()
    }
}

/// Split non-negative values into K planes; plane k holds
/// `floor(v / 2^k) mod 2` at each position.
pub fn decompose(values: &[u32], num_planes: usize) -> Result<BitplaneStack, BitplaneError> {
    if num_planes == 0 {
        return Err(BitplaneError::TooFewPlanes {
            min: 1,
            got: num_planes,
        });
    }
    let limit = 1u64 << num_planes;
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, &v)| v as u64 >= limit) {
        return Err(BitplaneError::ValueOutOfRange {
            value,
            index,
            bits: num_planes as u32,
        });
    }
    let planes = (0..num_planes)
        .map(|k| {
            let mut bits = BitSeq::zeros(values.len());
            for (i, &v) in values.iter().enumerate() {
                if v >> k & 1 == 1 {
                    bits.set(i, true);
                }
            }
            Bitplane {
                bits,
                plane_index: k,
            }
        })
        .collect();
    Ok(BitplaneStack {
        planes,
        source_kind: SourceKind::Pixels,
        saturated: 0,
    })
}

/// Exact inverse of [`decompose`]: sum of `b_k * 2^k` per position.
pub fn reconstruct(stack: &BitplaneStack) -> Result<Vec<u32>, BitplaneError> {
    let first = stack.planes.first().ok_or(BitplaneError::Empty)?;
    let len = first.bits.len();
    for (k, plane) in stack.planes.iter().enumerate() {
        if plane.bits.len() != len {
            return Err(BitplaneError::MixedLengths {
                expected: len,
                plane: k,
                got: plane.bits.len(),
            });
        }
    }
    let mut values = vec![0u32; len];
    for plane in &stack.planes {
        for i in plane.bits.ones() {
            values[i] |= 1 << plane.plane_index;
        }
    }
    Ok(values)
}

/// Sign-magnitude plane stack for signed coefficients.
///
/// Plane K-1 is the sign plane (1 iff the coefficient is negative); planes
/// K-2..0 hold the magnitude saturated to `2^(K-1) - 1`. Fed MSB-first this
/// yields sign plane, then magnitude MSB, down to the magnitude LSB.
pub fn signed_to_planes(coeffs: &[i32], num_planes: usize) -> Result<BitplaneStack, BitplaneError> {
    if num_planes < 2 {
        return Err(BitplaneError::TooFewPlanes {
            min: 2,
            got: num_planes,
        });
    }
    let magnitude_bits = num_planes - 1;
    let ceiling = (1u32 << magnitude_bits) - 1;
    let mut saturated = 0usize;
    let mut planes: Vec<Bitplane> = (0..num_planes)
        .map(|k| Bitplane {
            bits: BitSeq::zeros(coeffs.len()),
            plane_index: k,
        })
        .collect();
    for (i, &c) in coeffs.iter().enumerate() {
        if c < 0 {
            planes[magnitude_bits].bits.set(i, true);
        }
        let mag = c.unsigned_abs();
        let mag = if mag > ceiling {
            saturated += 1;
            ceiling
        } else {
            mag
        };
        for (k, plane) in planes.iter_mut().take(magnitude_bits).enumerate() {
            if mag >> k & 1 == 1 {
                plane.bits.set(i, true);
            }
        }
    }
    Ok(BitplaneStack {
        planes,
        source_kind: SourceKind::DctCoefficients,
        saturated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn decompose_173_is_its_binary_expansion() {
        let stack = decompose(&[173], 8).unwrap();
        let msb_first: Vec<u8> = stack
            .iter_msb_first()
            .map(|p| p.bits.get(0) as u8)
            .collect();
        assert_eq!(msb_first, vec![1, 0, 1, 0, 1, 1, 0, 1]);
    }

    #[test]
    fn decompose_zero_vector_gives_zero_planes() {
        let stack = decompose(&[0; 16], 8).unwrap();
        for plane in stack.iter_lsb_first() {
            assert_eq!(plane.bits.count_ones(), 0);
        }
    }

    #[test]
    fn decompose_255_sets_every_plane() {
        let stack = decompose(&[255], 8).unwrap();
        for plane in stack.iter_lsb_first() {
            assert!(plane.bits.get(0));
        }
    }

    #[test]
    fn decompose_rejects_value_out_of_range() {
        assert!(matches!(
            decompose(&[256], 8),
            Err(BitplaneError::ValueOutOfRange { .. })
        ));
    }

    #[test]
    fn reconstruct_single_plane() {
        let mut stack = decompose(&[0, 0], 8).unwrap();
        stack.planes[3].bits.set(0, true);
        let values = reconstruct(&stack).unwrap();
        assert_eq!(values, vec![8, 0]);
    }

    #[test]
    fn reconstruct_empty_stack_errors() {
        let stack = BitplaneStack {
            planes: vec![],
            source_kind: SourceKind::Pixels,
            saturated: 0,
        };
        assert!(matches!(reconstruct(&stack), Err(BitplaneError::Empty)));
    }

    #[test]
    fn reconstruct_rejects_mixed_lengths() {
        let mut stack = decompose(&[1, 2, 3], 4).unwrap();
        stack.planes[2].bits = BitSeq::zeros(5);
        assert!(matches!(
            reconstruct(&stack),
            Err(BitplaneError::MixedLengths { .. })
        ));
    }

    #[test]
    fn msb_plane_alone_reconstructs_top_bit() {
        let values: Vec<u32> = (0..256).collect();
        let stack = decompose(&values, 8).unwrap();
        let msb_only = BitplaneStack {
            planes: vec![stack.plane(7).clone()],
            source_kind: SourceKind::Pixels,
            saturated: 0,
        };
        let top = reconstruct(&msb_only).unwrap();
        for (i, &v) in values.iter().enumerate() {
            assert_eq!(top[i], 128 * (v >> 7));
        }
    }

    #[test]
    fn signed_planes_sign_and_magnitude() {
        let stack = signed_to_planes(&[-5], 8).unwrap();
        assert!(stack.plane(7).bits.get(0), "sign plane set for negative");
        let mag: u32 = (0..7).map(|k| (stack.plane(k).bits.get(0) as u32) << k).sum();
        assert_eq!(mag, 5);
    }

    #[test]
    fn signed_planes_zero_is_all_zero() {
        let stack = signed_to_planes(&[0], 8).unwrap();
        for plane in stack.iter_lsb_first() {
            assert_eq!(plane.bits.count_ones(), 0);
        }
    }

    #[test]
    fn signed_planes_saturate_large_magnitudes() {
        // Brute-force clamp oracle: min(|c|, 127).
        for c in [300i32, -300, 127, -127, 128, 4096] {
            let stack = signed_to_planes(&[c], 8).unwrap();
            assert_eq!(stack.plane(7).bits.get(0), c < 0);
            let mag: u32 = (0..7).map(|k| (stack.plane(k).bits.get(0) as u32) << k).sum();
            assert_eq!(mag, c.unsigned_abs().min(127));
        }
        let stack = signed_to_planes(&[300, -1, 127, 200], 8).unwrap();
        assert_eq!(stack.saturated, 2);
    }

    #[test]
    fn signed_planes_require_two_planes() {
        assert!(matches!(
            signed_to_planes(&[1], 1),
            Err(BitplaneError::TooFewPlanes { .. })
        ));
    }

    #[test]
    fn bitseq_ones_matches_get() {
        let mut seq = BitSeq::zeros(200);
        for i in [0usize, 1, 63, 64, 65, 127, 128, 199] {
            seq.set(i, true);
        }
        let ones: Vec<usize> = seq.ones().collect();
        assert_eq!(ones, vec![0, 1, 63, 64, 65, 127, 128, 199]);
        assert_eq!(seq.count_ones(), 8);
    }

    proptest! {
        #[test]
        fn decompose_reconstruct_roundtrip(values in proptest::collection::vec(0u32..256, 1..200)) {
            let stack = decompose(&values, 8).unwrap();
            prop_assert_eq!(reconstruct(&stack).unwrap(), values);
        }

        #[test]
        fn sign_flip_changes_only_sign_plane(
            coeffs in proptest::collection::vec(-127i32..=127, 1..100)
        ) {
            let negated: Vec<i32> = coeffs.iter().map(|&c| -c).collect();
            let a = signed_to_planes(&coeffs, 8).unwrap();
            let b = signed_to_planes(&negated, 8).unwrap();
            for k in 0..7 {
                prop_assert_eq!(&a.plane(k).bits, &b.plane(k).bits);
            }
        }
    }
}

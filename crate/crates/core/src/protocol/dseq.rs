//! d-sequence keystreams: the binary expansion of `1/p`.
//!
//! Bit `i` (counting from 1) of `1/p` is `(2^i mod p) mod 2`, which is what
//! [`d_sequence`] evaluates with a running residue. The expansion is purely
//! periodic with period `ord_p(2)`.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DSequence {
    p: u64,
    bits: Vec<u8>,
}

impl DSequence {
    pub fn prime(&self) -> u64 {
        self.p
    }

    /// Bits `1..=n_bits` of `1/p`, one per element.
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Period of the full expansion, the multiplicative order of 2 mod `p`.
    pub fn period(&self) -> u64 {
        multiplicative_order(2, self.p).expect("p is odd so 2 is a unit")
    }

    /// `n_bytes` of keystream starting at bit `bit_offset`, packed MSB-first.
    pub fn keystream_bytes(&self, bit_offset: usize, n_bytes: usize) -> Result<Vec<u8>> {
        let needed = bit_offset + 8 * n_bytes;
        if needed > self.bits.len() {
            return Err(Error::invalid(format!("keystream exhausted: need {needed} bits, have {}", self.bits.len())));
        }
        Ok(self.bits[bit_offset..needed]
            .chunks(8)
            .map(|chunk| chunk.iter().fold(0u8, |acc, &b| acc << 1 | b))
            .collect())
    }
}

/// First `n_bits` of the base-2 expansion of `1/p`. `p` must be odd and at least 3.
pub fn d_sequence(p: u64, n_bits: usize) -> Result<DSequence> {
    if p < 3 || p.is_multiple_of(2) {
        return Err(Error::invalid(format!("d-sequence modulus must be an odd number >= 3, got {p}")));
    }
    let mut residue = 1u128;
    let modulus = u128::from(p);
    let bits = (0..n_bits)
        .map(|_| {
            residue = residue * 2 % modulus;
            (residue % 2) as u8
        })
        .collect();
    Ok(DSequence { p, bits })
}

/// XORs `payload` with keystream bits starting at `bit_offset`. Applying it twice restores the payload.
pub fn keystream_xor(payload: &[u8], ds: &DSequence, bit_offset: usize) -> Result<Vec<u8>> {
    let stream = ds.keystream_bytes(bit_offset, payload.len())?;
    Ok(payload.iter().zip(stream).map(|(x, k)| x ^ k).collect())
}

/// Smallest `e >= 1` with `base^e ≡ 1 (mod modulus)`, or `None` if there is none.
pub fn multiplicative_order(base: u64, modulus: u64) -> Option<u64> {
    if modulus < 2 {
        return None;
    }
    let m = u128::from(modulus);
    let b = u128::from(base) % m;
    let mut acc = b;
    for e in 1..=modulus {
        if acc == 1 {
            return Some(e);
        }
        if acc == 0 {
            return None;
        }
        acc = acc * b % m;
    }
    None
}

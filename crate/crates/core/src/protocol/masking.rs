//! Fixed-width integer encoding and XOR masking with `h(secret)`.
//!
//! `h(secret)` is SHA-256 over the 8-byte big-endian encoding of the secret
//! (followed by the 16-byte nonce when replay hardening is on), truncated to
//! the masking width.

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::primes::PrimeSieve;
use crate::protocol::codec::Nonce;

const HASH_LEN: usize = 32;

/// Big-endian encoding of `x`, zero-padded to `width` bytes.
pub fn encode_int(x: u64, width: usize) -> Result<Vec<u8>> {
    if width == 0 || width > HASH_LEN {
        return Err(Error::invalid(format!("integer width must be in [1, {HASH_LEN}], got {width}")));
    }
    let raw = x.to_be_bytes();
    let significant = raw.iter().position(|&b| b != 0).unwrap_or(raw.len());
    if raw.len() - significant > width {
        return Err(Error::invalid(format!("{x} does not fit in {width} bytes")));
    }
    let mut out = vec![0u8; width];
    let copy = width.min(raw.len());
    out[width - copy..].copy_from_slice(&raw[raw.len() - copy..]);
    Ok(out)
}

/// Inverse of [`encode_int`]. Fails if the value exceeds `u64`.
pub fn decode_int(bytes: &[u8]) -> Result<u64> {
    let split = bytes.len().saturating_sub(8);
    let (high, low) = bytes.split_at(split);
    if high.iter().any(|&b| b != 0) {
        return Err(Error::invalid("encoded integer exceeds 64 bits"));
    }
    Ok(low.iter().fold(0u64, |acc, &b| acc << 8 | u64::from(b)))
}

/// `h(secret)` truncated to `width` bytes.
pub fn hash_mask(secret: u64, width: usize) -> Result<Vec<u8>> {
    hash_mask_with_nonce(secret, None, width)
}

/// `h(secret ∥ nonce)` truncated to `width` bytes; identical to [`hash_mask`] without a nonce.
pub fn hash_mask_with_nonce(secret: u64, nonce: Option<&Nonce>, width: usize) -> Result<Vec<u8>> {
    if secret < 2 {
        return Err(Error::invalid(format!("secret must be at least 2, got {secret}")));
    }
    if width == 0 || width > HASH_LEN {
        return Err(Error::invalid(format!("mask width must be in [1, {HASH_LEN}], got {width}")));
    }
    let mut hasher = Sha256::new();
    hasher.update(secret.to_be_bytes());
    if let Some(nonce) = nonce {
        hasher.update(nonce.as_bytes());
    }
    Ok(hasher.finalize()[..width].to_vec())
}

/// `encode_int(p) ⊕ key_material`, as carried in a KEYSHARE frame.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MaskedKey(Vec<u8>);

impl MaskedKey {
    pub fn from_bytes(bytes: Vec<u8>) -> Result<Self> {
        if bytes.is_empty() || bytes.len() > HASH_LEN {
            return Err(Error::invalid(format!("masked key width must be in [1, {HASH_LEN}], got {}", bytes.len())));
        }
        Ok(MaskedKey(bytes))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    /// Flips the bits selected by `xor` in byte `index`. Used for fault injection.
    pub fn corrupt(&mut self, index: usize, xor: u8) {
        self.0[index] ^= xor;
    }
}

fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

pub fn mask(p: u64, key_material: &[u8]) -> Result<MaskedKey> {
    let encoded = encode_int(p, key_material.len())?;
    MaskedKey::from_bytes(xor(&encoded, key_material))
}

pub fn unmask(masked: &MaskedKey, key_material: &[u8]) -> Result<u64> {
    if key_material.len() != masked.width() {
        return Err(Error::invalid(format!(
            "key material is {} bytes but the masked key is {}",
            key_material.len(),
            masked.width()
        )));
    }
    decode_int(&xor(masked.as_bytes(), key_material))
}

/// Unmasks a share with the party's own secret and checks that the result is
/// a prime the sieve can vouch for.
///
/// Anything that does not decode to a prime within the sieve limit is an
/// [`Error::IntegrityFailure`]: either the secret is wrong or the share was
/// tampered with.
pub fn party_recover(masked: &MaskedKey, own_secret: u64, nonce: Option<&Nonce>, sieve: &PrimeSieve) -> Result<u64> {
    let material = hash_mask_with_nonce(own_secret, nonce, masked.width())?;
    let value = unmask(masked, &material)
        .map_err(|_| Error::IntegrityFailure("recovered value does not fit in 64 bits".into()))?;
    match sieve.is_prime(value) {
        Ok(true) => Ok(value),
        Ok(false) => Err(Error::IntegrityFailure(format!("recovered value {value} is not prime"))),
        Err(_) => Err(Error::IntegrityFailure(format!(
            "recovered value {value} is above the plausible key bound {}",
            sieve.limit()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn encode_examples() {
        assert_eq!(encode_int(5, 4).unwrap(), vec![0, 0, 0, 5]);
        assert_eq!(encode_int(256, 2).unwrap(), vec![1, 0]);
        assert_eq!(encode_int(u64::MAX, 12).unwrap()[..4], [0, 0, 0, 0]);
        assert!(encode_int(256, 1).is_err());
        assert!(encode_int(1, 0).is_err());
        assert!(decode_int(&[1, 0, 0, 0, 0, 0, 0, 0, 0]).is_err());
    }

    #[test]
    fn encode_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let x: u64 = rng.gen_range(1..1 << 48);
            assert_eq!(decode_int(&encode_int(x, 8).unwrap()).unwrap(), x);
            assert_eq!(decode_int(&encode_int(x, 6).unwrap()).unwrap(), x);
        }
    }

    #[test]
    fn hash_mask_properties() {
        assert_eq!(hash_mask(11, 8).unwrap(), hash_mask(11, 8).unwrap());
        assert_ne!(hash_mask(11, 8).unwrap(), hash_mask(13, 8).unwrap());
        assert_eq!(hash_mask(11, 8).unwrap().len(), 8);
        assert!(hash_mask(11, 33).is_err());
        assert!(hash_mask(1, 8).is_err());
        // prefix-consistent truncation
        assert_eq!(hash_mask(11, 32).unwrap()[..8], hash_mask(11, 8).unwrap()[..]);
    }

    #[test]
    fn hash_mask_is_sha256_of_be_bytes() {
        // sha256(00 00 00 00 00 00 00 0b)
        let digest = Sha256::digest([0, 0, 0, 0, 0, 0, 0, 11u8]);
        assert_eq!(hash_mask(11, 32).unwrap(), digest.to_vec());
        let nonce = Nonce::from_bytes([7; 16]);
        assert_ne!(hash_mask_with_nonce(11, Some(&nonce), 8).unwrap(), hash_mask(11, 8).unwrap());
    }

    #[test]
    fn mask_round_trip_and_identity() {
        let sieve = PrimeSieve::new(1_000_000).unwrap();
        let primes: Vec<u64> = sieve.primes().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let p = primes[rng.gen_range(0..primes.len())];
            let material: Vec<u8> = (0..8).map(|_| rng.gen()).collect();
            assert_eq!(unmask(&mask(p, &material).unwrap(), &material).unwrap(), p);
        }
        assert_eq!(mask(97, &[0; 8]).unwrap().as_bytes(), encode_int(97, 8).unwrap().as_slice());
        assert!(unmask(&mask(97, &[0; 8]).unwrap(), &[0; 4]).is_err());
    }

    #[test]
    fn wrong_material_does_not_recover() {
        let sieve = PrimeSieve::new(2_000_000).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let masked = mask(1_000_003, &hash_mask(11, 8).unwrap()).unwrap();
        assert_eq!(party_recover(&masked, 11, None, &sieve).unwrap(), 1_000_003);
        let mut accepted = 0;
        for _ in 0..1000 {
            let wrong = rng.gen_range(12u64..1_000_000);
            if party_recover(&masked, wrong, None, &sieve).is_ok() {
                accepted += 1;
            }
        }
        assert_eq!(accepted, 0);
    }
}

//! Party identities and the CA's table of secret primes.
//!
//! On disk the registry is one `id,prime` pair per line. Blank lines and
//! lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::primes::PrimeSieve;

pub const MAX_ID_LEN: usize = 64;

/// Opaque party identifier, 1 to 64 bytes.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartyId(Vec<u8>);

impl PartyId {
    pub fn new(bytes: Vec<u8>) -> Result<Self> {
        if bytes.is_empty() || bytes.len() > MAX_ID_LEN {
            return Err(Error::invalid(format!("party id must be 1 to {MAX_ID_LEN} bytes, got {}", bytes.len())));
        }
        Ok(PartyId(bytes))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

impl std::str::FromStr for PartyId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PartyId::new(s.as_bytes().to_vec())
    }
}

impl fmt::Display for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&String::from_utf8_lossy(&self.0))
    }
}

impl fmt::Debug for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PartyId({:?})", String::from_utf8_lossy(&self.0))
    }
}

// Text ids serialise as strings, anything else as a byte array.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum IdRepr {
    Text(String),
    Bytes(Vec<u8>),
}

impl Serialize for PartyId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match std::str::from_utf8(&self.0) {
            Ok(text) => IdRepr::Text(text.to_owned()),
            Err(_) => IdRepr::Bytes(self.0.clone()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PartyId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let bytes = match IdRepr::deserialize(d)? {
            IdRepr::Text(t) => t.into_bytes(),
            IdRepr::Bytes(b) => b,
        };
        PartyId::new(bytes).map_err(serde::de::Error::custom)
    }
}

/// A party's identity and the odd prime it shares with the CA.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartySecret {
    pub id: PartyId,
    pub secret_prime: u64,
}

impl PartySecret {
    pub fn new(id: PartyId, secret_prime: u64, sieve: &PrimeSieve) -> Result<Self> {
        if secret_prime == 2 || !sieve.is_prime(secret_prime)? {
            return Err(Error::invalid(format!("secret for {id} must be an odd prime, got {secret_prime}")));
        }
        Ok(PartySecret { id, secret_prime })
    }
}

/// CA-side map from party id to secret prime. Every value is an odd prime.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Registry {
    secrets: BTreeMap<PartyId, u64>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, secret: PartySecret) -> Result<()> {
        if self.secrets.contains_key(&secret.id) {
            return Err(Error::invalid(format!("party {} is already registered", secret.id)));
        }
        self.secrets.insert(secret.id, secret.secret_prime);
        Ok(())
    }

    pub fn secret(&self, id: &PartyId) -> Option<u64> {
        self.secrets.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.secrets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.secrets.is_empty()
    }

    pub fn max_secret(&self) -> Option<u64> {
        self.secrets.values().copied().max()
    }

    /// Sieve limit that covers `a + b` for every pair of registered parties.
    pub fn required_sieve_limit(&self) -> u64 {
        self.max_secret().map_or(2, |m| 2 * m)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PartyId, u64)> {
        self.secrets.iter().map(|(id, &p)| (id, p))
    }

    /// Parses `id,prime` lines, checking every prime against a sieve sized to the largest one.
    pub fn parse(input: impl Read) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in BufReader::new(input).lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (id, prime) = line
                .rsplit_once(',')
                .ok_or_else(|| Error::invalid(format!("registry line {}: expected id,prime", lineno + 1)))?;
            let prime: u64 = prime
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("registry line {}: bad prime {prime:?}", lineno + 1)))?;
            rows.push((id.trim().parse::<PartyId>()?, prime));
        }
        let max = rows.iter().map(|&(_, p)| p).max().unwrap_or(2).max(2);
        let sieve = PrimeSieve::new(max)?;
        let mut registry = Registry::new();
        for (id, prime) in rows {
            registry.insert(PartySecret::new(id, prime, &sieve)?)?;
        }
        Ok(registry)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(std::fs::File::open(path)?)
    }

    pub fn to_text(&self) -> String {
        self.iter().map(|(id, p)| format!("{id},{p}\n")).collect()
    }
}

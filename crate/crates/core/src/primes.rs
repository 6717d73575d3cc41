//! Sieve of Eratosthenes over `[0, limit]`, one bit per integer.
//!
//! The sieve is the only primality authority in the crate. Queries beyond the
//! limit are errors rather than silent fallbacks so that range mistakes in the
//! callers show up immediately.

use crate::error::{Error, Result};

const WORD: u64 = 64;

/// Immutable primality table for every integer in `[0, limit]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeSieve {
    limit: u64,
    words: Vec<u64>,
}

impl PrimeSieve {
    /// Sieves all integers up to and including `limit`.
    pub fn new(limit: u64) -> Result<Self> {
        if limit < 2 {
            return Err(Error::invalid(format!("sieve limit must be at least 2, got {limit}")));
        }
        let len = usize::try_from(limit / WORD + 1)
            .map_err(|_| Error::invalid(format!("sieve limit {limit} does not fit in memory")))?;
        let mut words = vec![u64::MAX; len];

        // 0 and 1; bits past the limit stay set but are never read
        words[0] &= !0b11;

        let mut p = 2u64;
        while p * p <= limit {
            if words[(p / WORD) as usize] >> (p % WORD) & 1 == 1 {
                let mut multiple = p * p;
                while multiple <= limit {
                    words[(multiple / WORD) as usize] &= !(1u64 << (multiple % WORD));
                    multiple += p;
                }
            }
            p += 1;
        }
        Ok(PrimeSieve { limit, words })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Primality of `n`, or [`Error::OutOfRange`] when `n > limit`.
    pub fn is_prime(&self, n: u64) -> Result<bool> {
        self.check(n)?;
        Ok(self.bit(n))
    }

    /// Fails with [`Error::OutOfRange`] unless `n <= limit`.
    pub fn check(&self, n: u64) -> Result<()> {
        if n > self.limit {
            Err(Error::OutOfRange { value: n, limit: self.limit })
        } else {
            Ok(())
        }
    }

    /// Unchecked lookup for callers that already validated the range.
    #[inline]
    pub(crate) fn bit(&self, n: u64) -> bool {
        debug_assert!(n <= self.limit);
        self.words[(n / WORD) as usize] >> (n % WORD) & 1 == 1
    }

    /// Primes in ascending order.
    pub fn primes(&self) -> Primes<'_> {
        self.primes_up_to(self.limit)
    }

    /// Primes `<= bound` (clamped to the limit) in ascending order.
    pub fn primes_up_to(&self, bound: u64) -> Primes<'_> {
        let end = bound.min(self.limit);
        Primes { words: &self.words, word: 0, current: self.words[0], end }
    }

    pub fn count(&self) -> usize {
        let full = (self.limit / WORD) as usize;
        let mut total: usize = self.words[..full].iter().map(|w| w.count_ones() as usize).sum();
        let tail_bits = self.limit % WORD + 1;
        let mask = if tail_bits == WORD { u64::MAX } else { (1u64 << tail_bits) - 1 };
        total += (self.words[full] & mask).count_ones() as usize;
        total
    }
}

/// Ascending primes from a [`PrimeSieve`], scanning one word at a time.
#[derive(Clone, Debug)]
pub struct Primes<'a> {
    words: &'a [u64],
    word: usize,
    current: u64,
    end: u64,
}

impl Iterator for Primes<'_> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        loop {
            if self.current != 0 {
                let n = self.word as u64 * WORD + u64::from(self.current.trailing_zeros());
                if n > self.end {
                    self.current = 0;
                    self.word = self.words.len();
                    return None;
                }
                self.current &= self.current - 1;
                return Some(n);
            }
            self.word += 1;
            if self.word >= self.words.len() || self.word as u64 * WORD > self.end {
                return None;
            }
            self.current = self.words[self.word];
        }
    }
}

//! Goldbach partitions, circles, `(1,k)` ellipses and the sequences derived
//! from them.
//!
//! An ellipse around an even center `2n` is the pair of primes `2n - m` and
//! `2n + k*m` for the smallest odd `m` that makes both prime. Listing `m` over
//! successive centers gives the m-sequence; reducing each `m` modulo 4 gives
//! the `±1` b-sequence. A circle is the `k = 1` case with a fixed radius.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primes::PrimeSieve;

/// Unordered Goldbach partition `n = p + q` with `p <= q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Partition {
    pub n: u64,
    pub p: u64,
    pub q: u64,
}

/// Inclusive range of even integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvenRange {
    start: u64,
    end: u64,
}

impl EvenRange {
    pub fn new(start: u64, end: u64) -> Result<Self> {
        if !start.is_multiple_of(2) || !end.is_multiple_of(2) {
            return Err(Error::invalid(format!("range bounds must be even, got [{start}, {end}]")));
        }
        if start > end {
            return Err(Error::invalid(format!("empty range [{start}, {end}]")));
        }
        Ok(EvenRange { start, end })
    }

    /// `[start, end]` with `end` rounded down to the nearest even number.
    pub fn up_to(start: u64, end: u64) -> Result<Self> {
        Self::new(start, end - end % 2)
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    pub fn end(&self) -> u64 {
        self.end
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> {
        (self.start..=self.end).step_by(2)
    }
}

/// All Goldbach partitions of the even number `n`, ascending by the smaller prime.
pub fn partitions(sieve: &PrimeSieve, n: u64) -> Result<Vec<Partition>> {
    if !n.is_multiple_of(2) || n < 4 {
        return Err(Error::invalid(format!("partitions need an even n >= 4, got {n}")));
    }
    sieve.check(n)?;
    Ok(sieve.primes_up_to(n / 2).filter(|&p| sieve.bit(n - p)).map(|p| Partition { n, p, q: n - p }).collect())
}

pub fn partition_count(sieve: &PrimeSieve, n: u64) -> Result<usize> {
    partitions(sieve, n).map(|parts| parts.len())
}

/// One point of a circle sequence: a center with primes at equal distance on both sides.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CirclePoint {
    pub two_n: u64,
    pub lower: u64,
    pub upper: u64,
}

/// Centers in `range` for which `two_n - radius` and `two_n + radius` are both prime.
pub fn circle_with_radius(sieve: &PrimeSieve, radius: u64, range: EvenRange) -> Result<Vec<CirclePoint>> {
    if radius == 0 {
        return Err(Error::invalid("circle radius must be at least 1"));
    }
    sieve.check(range.end() + radius)?;
    Ok(range
        .iter()
        .filter(|&c| c > radius)
        .filter(|&c| sieve.bit(c - radius) && sieve.bit(c + radius))
        .map(|c| CirclePoint { two_n: c, lower: c - radius, upper: c + radius })
        .collect())
}

/// Odd `m` with its residue class modulo 4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct OddM(u64);

impl OddM {
    pub fn new(m: u64) -> Result<Self> {
        if m % 2 == 1 {
            Ok(OddM(m))
        } else {
            Err(Error::invalid(format!("m must be odd, got {m}")))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    /// `+1` when `m ≡ 1 (mod 4)`, `-1` when `m ≡ 3 (mod 4)`.
    pub fn sign(self) -> Symbol {
        if self.0 % 4 == 1 {
            Symbol::Plus
        } else {
            Symbol::Minus
        }
    }
}

impl TryFrom<u64> for OddM {
    type Error = Error;
    fn try_from(m: u64) -> Result<Self> {
        OddM::new(m)
    }
}

impl From<OddM> for u64 {
    fn from(m: OddM) -> u64 {
        m.0
    }
}

impl fmt::Display for OddM {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Odd ellipse ratio `k >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct EllipseK(u64);

impl EllipseK {
    pub fn new(k: u64) -> Result<Self> {
        if k >= 1 && k % 2 == 1 {
            Ok(EllipseK(k))
        } else {
            Err(Error::invalid(format!("k must be an odd integer >= 1, got {k}")))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    /// Largest value the m search may probe for `two_n`.
    pub fn headroom(self, two_n: u64) -> u64 {
        two_n + self.0 * two_n.saturating_sub(3)
    }
}

impl TryFrom<u64> for EllipseK {
    type Error = Error;
    fn try_from(k: u64) -> Result<Self> {
        EllipseK::new(k)
    }
}

impl From<EllipseK> for u64 {
    fn from(k: EllipseK) -> u64 {
        k.0
    }
}

/// One row of an ellipse table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EllipseEntry {
    pub two_n: u64,
    pub lower: u64,
    pub upper: u64,
    pub m: OddM,
    /// `lower + upper`, which equals `2*two_n + (k-1)*m`.
    pub span_sum: u64,
}

/// The ellipse around `two_n` with the smallest odd `m`, if any `m <= two_n - 3` works.
///
/// The sieve must cover `two_n + k*(two_n - 3)` so that an exhausted search
/// really means "no ellipse".
pub fn ellipse_m(sieve: &PrimeSieve, two_n: u64, k: EllipseK) -> Result<Option<EllipseEntry>> {
    if !two_n.is_multiple_of(2) || two_n < 6 {
        return Err(Error::invalid(format!("ellipse center must be even and >= 6, got {two_n}")));
    }
    sieve.check(k.headroom(two_n))?;
    Ok(find_ellipse(sieve, two_n, k))
}

fn find_ellipse(sieve: &PrimeSieve, two_n: u64, k: EllipseK) -> Option<EllipseEntry> {
    (1..=two_n - 3).step_by(2).find(|&m| sieve.bit(two_n - m) && sieve.bit(two_n + k.0 * m)).map(|m| EllipseEntry {
        two_n,
        lower: two_n - m,
        upper: two_n + k.0 * m,
        m: OddM(m),
        span_sum: 2 * two_n + (k.0 - 1) * m,
    })
}

/// Smallest sieve limit that lets [`m_sequence`] scan every center up to `max_center`.
pub fn ellipse_sieve_limit(max_center: u64, k: EllipseK) -> u64 {
    k.headroom(max_center).max(2)
}

/// Ellipse entries for a fixed `k` over a range of centers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MSequence {
    pub k: EllipseK,
    pub range: EvenRange,
    pub entries: Vec<EllipseEntry>,
}

impl MSequence {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn m_values(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().map(|e| e.m.get())
    }
}

/// Ellipses for every even center in `range`, skipping centers without one.
pub fn m_sequence(sieve: &PrimeSieve, k: EllipseK, range: EvenRange) -> Result<MSequence> {
    if range.start() < 6 {
        return Err(Error::invalid(format!("ellipse centers start at 6, got {}", range.start())));
    }
    sieve.check(k.headroom(range.end()))?;
    let entries = range.iter().filter_map(|c| find_ellipse(sieve, c, k)).collect();
    Ok(MSequence { k, range, entries })
}

/// m-sequence for centers `6..=max_center`, with a sieve sized to fit.
pub fn ellipse_sequence(k: EllipseK, max_center: u64) -> Result<MSequence> {
    let range = EvenRange::up_to(6, max_center.max(6))?;
    let sieve = PrimeSieve::new(ellipse_sieve_limit(range.end(), k))?;
    m_sequence(&sieve, k, range)
}

/// How a bound `N` on "n" translates into a bound on ellipse centers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum CenterBound {
    /// Centers `2n <= N`.
    #[default]
    TwoN,
    /// Indices `n <= N`, so centers `2n <= 2N`.
    FourN,
}

impl CenterBound {
    pub fn max_center(self, bound: u64) -> u64 {
        match self {
            CenterBound::TwoN => bound,
            CenterBound::FourN => 2 * bound,
        }
    }
}

impl std::str::FromStr for CenterBound {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "2n" => Ok(CenterBound::TwoN),
            "4n" => Ok(CenterBound::FourN),
            other => Err(Error::invalid(format!("center bound must be 2n or 4n, got {other:?}"))),
        }
    }
}

impl fmt::Display for CenterBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CenterBound::TwoN => "2n",
            CenterBound::FourN => "4n",
        })
    }
}

/// Ellipses for an explicit list of centers, in the order given.
pub fn ellipses_at(sieve: &PrimeSieve, k: EllipseK, centers: &[u64]) -> Result<Vec<Option<EllipseEntry>>> {
    centers.iter().map(|&c| ellipse_m(sieve, c, k)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Symbol {
    Plus,
    Minus,
}

impl Symbol {
    pub fn value(self) -> i8 {
        match self {
            Symbol::Plus => 1,
            Symbol::Minus => -1,
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Symbol::Plus => 1,
            Symbol::Minus => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Ellipse { k: u64 },
    PartitionParity,
}

/// `±1` sequence with a `0/1` bit view (`+1 -> 1`, `-1 -> 0`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BSequence {
    symbols: Vec<Symbol>,
    origin: Origin,
}

impl BSequence {
    pub fn from_symbols(symbols: Vec<Symbol>, origin: Origin) -> Self {
        BSequence { symbols, origin }
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn values(&self) -> Vec<i8> {
        self.symbols.iter().map(|s| s.value()).collect()
    }

    pub fn bits(&self) -> Bits {
        Bits(self.symbols.iter().map(|s| s.bit()).collect())
    }

    pub fn origin(&self) -> &Origin {
        &self.origin
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

pub fn to_b_sequence(ms: &MSequence) -> BSequence {
    BSequence { symbols: ms.entries.iter().map(|e| e.m.sign()).collect(), origin: Origin::Ellipse { k: ms.k.get() } }
}

/// Bit `i` is the parity of the partition count of `4 + 2i`, up to `n_max`.
pub fn parity_sequence(sieve: &PrimeSieve, n_max: u64) -> Result<BSequence> {
    if n_max < 4 {
        return Err(Error::invalid(format!("parity sequence needs n_max >= 4, got {n_max}")));
    }
    sieve.check(n_max)?;
    let symbols = EvenRange::up_to(4, n_max)?
        .iter()
        .map(|n| {
            let count = sieve.primes_up_to(n / 2).filter(|&p| sieve.bit(n - p)).count();
            if count % 2 == 1 {
                Symbol::Plus
            } else {
                Symbol::Minus
            }
        })
        .collect();
    Ok(BSequence { symbols, origin: Origin::PartitionParity })
}

/// String of `0`/`1` bits.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits(Vec<u8>);

impl Bits {
    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn from_bools(bits: impl IntoIterator<Item = bool>) -> Self {
        Bits(bits.into_iter().map(u8::from).collect())
    }
}

impl std::str::FromStr for Bits {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.bytes()
            .map(|b| match b {
                b'0' => Ok(0),
                b'1' => Ok(1),
                other => {
                    Err(Error::invalid(format!("bit strings may only contain 0 and 1, found {:?}", other as char)))
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Bits)
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

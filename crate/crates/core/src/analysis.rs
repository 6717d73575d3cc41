//! Autocorrelation and substring statistics over `±1` / `0,1` sequences.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequences::{BSequence, Bits};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationMode {
    /// Indices wrap around modulo the sequence length.
    #[default]
    Circular,
    /// Only the `L - i` overlapping pairs are summed and averaged.
    Linear,
}

impl FromStr for CorrelationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circular" => Ok(CorrelationMode::Circular),
            "linear" => Ok(CorrelationMode::Linear),
            other => Err(Error::invalid(format!("unknown correlation mode {other:?}"))),
        }
    }
}

impl fmt::Display for CorrelationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorrelationMode::Circular => "circular",
            CorrelationMode::Linear => "linear",
        })
    }
}

/// `C(0..=max_lag)` for one sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSeries {
    pub mode: CorrelationMode,
    pub values: Vec<f64>,
}

impl CorrelationSeries {
    pub fn max_lag(&self) -> usize {
        self.values.len() - 1
    }

    /// Largest `|C(i)|` over `i >= 1`.
    pub fn max_off_peak(&self) -> f64 {
        self.values[1..].iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Mean `|C(i)|` over `i >= 1`.
    pub fn mean_abs_off_peak(&self) -> f64 {
        let off = &self.values[1..];
        if off.is_empty() {
            return 0.0;
        }
        off.iter().map(|v| v.abs()).sum::<f64>() / off.len() as f64
    }
}

/// Normalised autocorrelation of `b` for lags `0..=max_lag`.
///
/// The lag sums are accumulated as integers, so `C(0)` is exactly 1.
pub fn autocorrelation(b: &BSequence, max_lag: usize, mode: CorrelationMode) -> Result<CorrelationSeries> {
    let a = b.values();
    let len = a.len();
    if len == 0 {
        return Err(Error::invalid("autocorrelation of an empty sequence"));
    }
    if max_lag >= len {
        return Err(Error::invalid(format!("max lag {max_lag} must be below the sequence length {len}")));
    }
    let values = (0..=max_lag)
        .map(|lag| {
            let (sum, pairs) = match mode {
                CorrelationMode::Circular => {
                    let sum: i64 = (0..len).map(|m| i64::from(a[m] * a[(m + lag) % len])).sum();
                    (sum, len)
                }
                CorrelationMode::Linear => {
                    let sum: i64 = a.iter().zip(&a[lag..]).map(|(&x, &y)| i64::from(x * y)).sum();
                    (sum, len - lag)
                }
            };
            sum as f64 / pairs as f64
        })
        .collect();
    Ok(CorrelationSeries { mode, values })
}

/// Overlapping, stride-1 occurrence counts of every length-`w` pattern.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowCounts {
    pub window: usize,
    pub sequence_length: usize,
    /// Only patterns that occur; absent ones count 0.
    pub counts: BTreeMap<String, u64>,
}

impl WindowCounts {
    pub fn get(&self, pattern: &str) -> u64 {
        self.counts.get(pattern).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Windows whose pattern occurs exactly once.
    pub fn unique(&self) -> u64 {
        self.counts.values().filter(|&&c| c == 1).count() as u64
    }
}

fn check_window(bits: &Bits, w: usize) -> Result<()> {
    if w == 0 || w > bits.len() {
        return Err(Error::invalid(format!("window length {w} must be in [1, {}]", bits.len())));
    }
    Ok(())
}

pub fn count_windows(bits: &Bits, w: usize) -> Result<WindowCounts> {
    check_window(bits, w)?;
    let mut counts = BTreeMap::new();
    for window in bits.as_slice().windows(w) {
        let pattern: String = window.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect();
        *counts.entry(pattern).or_insert(0) += 1;
    }
    Ok(WindowCounts { window: w, sequence_length: bits.len(), counts })
}

/// Number of window positions whose length-`w` pattern appears nowhere else.
pub fn unique_window_count(bits: &Bits, w: usize) -> Result<u64> {
    count_windows(bits, w).map(|c| c.unique())
}

/// One row of a unique-window profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniqueWindows {
    pub window: usize,
    pub unique_count: u64,
}

/// [`unique_window_count`] for every `w` in `w_min..=w_max`.
pub fn unique_window_profile(bits: &Bits, w_min: usize, w_max: usize) -> Result<Vec<UniqueWindows>> {
    if w_min > w_max {
        return Err(Error::invalid(format!("empty window range [{w_min}, {w_max}]")));
    }
    (w_min..=w_max).map(|w| Ok(UniqueWindows { window: w, unique_count: unique_window_count(bits, w)? })).collect()
}

/// Start indices of every (possibly overlapping) occurrence of `pattern`.
pub fn locate(bits: &Bits, pattern: &Bits) -> Result<Vec<usize>> {
    if pattern.is_empty() || pattern.len() > bits.len() {
        return Err(Error::invalid(format!("pattern length {} must be in [1, {}]", pattern.len(), bits.len())));
    }
    Ok(bits
        .as_slice()
        .windows(pattern.len())
        .enumerate()
        .filter(|(_, w)| *w == pattern.as_slice())
        .map(|(i, _)| i)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::{Origin, Symbol};

    fn b(values: &[i8]) -> BSequence {
        let symbols = values.iter().map(|&v| if v > 0 { Symbol::Plus } else { Symbol::Minus }).collect();
        BSequence::from_symbols(symbols, Origin::PartitionParity)
    }

    fn bits(s: &str) -> Bits {
        s.parse().unwrap()
    }

    #[test]
    fn alternating_sequence() {
        let seq = b(&[1, -1, 1, -1]);
        let c = autocorrelation(&seq, 3, CorrelationMode::Circular).unwrap();
        assert_eq!(c.values, vec![1.0, -1.0, 1.0, -1.0]);
        let l = autocorrelation(&seq, 3, CorrelationMode::Linear).unwrap();
        assert_eq!(l.values, vec![1.0, -1.0, 1.0, -1.0]);
    }

    #[test]
    fn linear_uses_overlap_length() {
        // pairs at lag 1: (1,1), (1,-1) -> 0/2
        let l = autocorrelation(&b(&[1, 1, -1]), 2, CorrelationMode::Linear).unwrap();
        assert_eq!(l.values, vec![1.0, 0.0, -1.0]);
        // circular lag 1: 1 - 1 - 1 = -1 over 3
        let c = autocorrelation(&b(&[1, 1, -1]), 2, CorrelationMode::Circular).unwrap();
        assert_eq!(c.values[1], -1.0 / 3.0);
    }

    #[test]
    fn autocorrelation_rejects_bad_lags() {
        assert!(autocorrelation(&b(&[]), 0, CorrelationMode::Circular).is_err());
        assert!(autocorrelation(&b(&[1, 1]), 2, CorrelationMode::Circular).is_err());
    }

    #[test]
    fn window_counts_by_hand() {
        let c = count_windows(&bits("1101"), 2).unwrap();
        let expected: BTreeMap<String, u64> =
            [("11", 1), ("10", 1), ("01", 1)].into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        assert_eq!(c.counts, expected);

        let c = count_windows(&bits("111010000"), 3).unwrap();
        let expected: BTreeMap<String, u64> = [("111", 1), ("110", 1), ("101", 1), ("010", 1), ("100", 1), ("000", 2)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        assert_eq!(c.counts, expected);
        assert_eq!(c.get("011"), 0);
    }

    #[test]
    fn single_bit_windows_partition_positions() {
        let s = bits("1011100101");
        let c = count_windows(&s, 1).unwrap();
        assert_eq!(c.get("0") + c.get("1"), s.len() as u64);
    }

    #[test]
    fn window_range_errors() {
        assert!(count_windows(&bits("101"), 0).is_err());
        assert!(count_windows(&bits("101"), 4).is_err());
        assert!(unique_window_count(&bits("101"), 4).is_err());
    }

    #[test]
    fn unique_windows() {
        assert_eq!(unique_window_count(&bits("1100"), 2).unwrap(), 3);
        assert_eq!(unique_window_count(&bits("0000"), 2).unwrap(), 0);
    }

    #[test]
    fn unique_windows_on_parity_prefix() {
        let s = bits("111010000111010000101010111001100101");
        let w = 10;
        // quadratic scan: a position is unique if no other position carries the same window
        let windows: Vec<&[u8]> = s.as_slice().windows(w).collect();
        let oracle = (0..windows.len())
            .filter(|&i| (0..windows.len()).all(|j| j == i || windows[j] != windows[i]))
            .count() as u64;
        assert_eq!(unique_window_count(&s, w).unwrap(), oracle);
    }

    #[test]
    fn locate_patterns() {
        assert_eq!(locate(&bits("10101"), &bits("101")).unwrap(), vec![0, 2]);
        assert!(locate(&bits("1110"), &bits("00")).unwrap().is_empty());
        assert!(locate(&bits("1110"), &Bits::default()).is_err());
        assert!(locate(&bits("11"), &bits("111")).is_err());
    }

    #[test]
    fn profile_covers_requested_lengths() {
        let s = bits("111010000111010000101010111001100101");
        let rows = unique_window_profile(&s, 2, 20).unwrap();
        assert_eq!(rows.len(), 19);
        assert_eq!(rows[0].window, 2);
        assert!(unique_window_profile(&s, 5, 4).is_err());
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("linear".parse::<CorrelationMode>().unwrap(), CorrelationMode::Linear);
        assert!("both".parse::<CorrelationMode>().is_err());
        assert_eq!(CorrelationMode::default().to_string(), "circular");
    }
}

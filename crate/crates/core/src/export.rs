//! CSV and JSON serialisation of the data series this crate produces.
//!
//! CSV layouts:
//!
//! | data                    | header                          |
//! |-------------------------|---------------------------------|
//! | [`CorrelationSeries`]   | `lag,value`                     |
//! | [`WindowCounts`] list   | `w,pattern,count`               |
//! | [`UniqueWindows`] list  | `w,unique_count`                |
//! | [`MSequence`]           | `two_n,lower,upper,m,span_sum`  |
//! | [`CirclePoint`] list    | `two_n,lower,upper`             |
//! | [`Partition`] list      | `n,p,q`                         |
//!
//! Floats are written with Rust's shortest round-trip formatting, so `1.0`
//! becomes `1` and parsing the text back yields the same bits.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::Serialize;

use crate::analysis::{CorrelationMode, CorrelationSeries, UniqueWindows, WindowCounts};
use crate::error::{Error, Result};
use crate::sequences::{CirclePoint, MSequence, Partition};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::invalid(format!("unknown export format {other:?}"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

pub trait Export {
    fn write_csv(&self, out: &mut dyn Write) -> Result<()>;
    fn write_json(&self, out: &mut dyn Write) -> Result<()>;
}

/// Serialises `item` to `out`. JSON output ends with a newline.
pub fn export<T: Export + ?Sized>(item: &T, format: Format, out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Csv => item.write_csv(out),
        Format::Json => item.write_json(out),
    }
}

pub fn export_to_vec<T: Export + ?Sized>(item: &T, format: Format) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    export(item, format, &mut buf)?;
    Ok(buf)
}

fn json_line<T: Serialize + ?Sized>(value: &T, out: &mut dyn Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

fn csv_rows<I, R>(header: &[&str], rows: I, out: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row)?;
    }
    writer.flush()?;
    Ok(())
}

impl Export for CorrelationSeries {
    fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        csv_rows(
            &["lag", "value"],
            self.values.iter().enumerate().map(|(lag, v)| [lag.to_string(), v.to_string()]),
            out,
        )
    }

    fn write_json(&self, out: &mut dyn Write) -> Result<()> {
        json_line(self, out)
    }
}

impl Export for [WindowCounts] {
    fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        csv_rows(
            &["w", "pattern", "count"],
            self.iter().flat_map(|wc| {
                wc.counts
                    .iter()
                    .map(move |(pattern, count)| [wc.window.to_string(), pattern.clone(), count.to_string()])
            }),
            out,
        )
    }

    fn write_json(&self, out: &mut dyn Write) -> Result<()> {
        json_line(self, out)
    }
}

impl Export for WindowCounts {
    fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        std::slice::from_ref(self).write_csv(out)
    }

    fn write_json(&self, out: &mut dyn Write) -> Result<()> {
        json_line(self, out)
    }
}

impl Export for [UniqueWindows] {
    fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        csv_rows(&["w", "unique_count"], self.iter().map(|r| [r.window.to_string(), r.unique_count.to_string()]), out)
    }

    fn write_json(&self, out: &mut dyn Write) -> Result<()> {
        json_line(self, out)
    }
}

impl Export for MSequence {
    fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        csv_rows(
            &["two_n", "lower", "upper", "m", "span_sum"],
            self.entries.iter().map(|e| [e.two_n, e.lower, e.upper, e.m.get(), e.span_sum].map(|v| v.to_string())),
            out,
        )
    }

    fn write_json(&self, out: &mut dyn Write) -> Result<()> {
        json_line(self, out)
    }
}

impl Export for [CirclePoint] {
    fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        csv_rows(
            &["two_n", "lower", "upper"],
            self.iter().map(|c| [c.two_n, c.lower, c.upper].map(|v| v.to_string())),
            out,
        )
    }

    fn write_json(&self, out: &mut dyn Write) -> Result<()> {
        json_line(self, out)
    }
}

impl Export for [Partition] {
    fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        csv_rows(&["n", "p", "q"], self.iter().map(|p| [p.n, p.p, p.q].map(|v| v.to_string())), out)
    }

    fn write_json(&self, out: &mut dyn Write) -> Result<()> {
        json_line(self, out)
    }
}

fn parse_field<T: FromStr>(record: &csv::StringRecord, idx: usize, name: &str) -> Result<T> {
    let raw = record.get(idx).ok_or_else(|| Error::Codec(format!("missing column {name}")))?;
    raw.parse().map_err(|_| Error::Codec(format!("bad {name} value {raw:?}")))
}

fn expect_header(reader: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let header = reader.headers()?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::Codec(format!(
            "expected header {}, got {}",
            expected.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(())
}

/// Reads a `lag,value` CSV back into a series. Lags must run 0, 1, 2, ...
pub fn read_correlation_csv(input: impl Read, mode: CorrelationMode) -> Result<CorrelationSeries> {
    let mut reader = csv::Reader::from_reader(input);
    expect_header(&mut reader, &["lag", "value"])?;
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record?;
        let lag: usize = parse_field(&record, 0, "lag")?;
        if lag != values.len() {
            return Err(Error::Codec(format!("expected lag {}, got {lag}", values.len())));
        }
        values.push(parse_field(&record, 1, "value")?);
    }
    if values.is_empty() {
        return Err(Error::Codec("correlation series has no rows".into()));
    }
    Ok(CorrelationSeries { mode, values })
}

/// Reads a `w,pattern,count` CSV, one [`WindowCounts`] per distinct `w` in
/// ascending order. The sequence length is recovered from the window total
/// `L - w + 1`.
pub fn read_window_counts_csv(input: impl Read) -> Result<Vec<WindowCounts>> {
    let mut reader = csv::Reader::from_reader(input);
    expect_header(&mut reader, &["w", "pattern", "count"])?;
    let mut by_window: BTreeMap<usize, BTreeMap<String, u64>> = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let w: usize = parse_field(&record, 0, "w")?;
        let pattern: String = parse_field(&record, 1, "pattern")?;
        let count: u64 = parse_field(&record, 2, "count")?;
        if pattern.len() != w || !pattern.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(Error::Codec(format!("pattern {pattern:?} is not a {w}-bit string")));
        }
        if by_window.entry(w).or_default().insert(pattern.clone(), count).is_some() {
            return Err(Error::Codec(format!("duplicate pattern {pattern:?} for w={w}")));
        }
    }
    Ok(by_window
        .into_iter()
        .map(|(window, counts)| {
            let total: u64 = counts.values().sum();
            WindowCounts { window, sequence_length: total as usize + window - 1, counts }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::count_windows;
    use crate::sequences::Bits;

    #[test]
    fn correlation_csv_layout() {
        let series = CorrelationSeries { mode: CorrelationMode::Circular, values: vec![1.0, 0.1, -0.05] };
        let text = String::from_utf8(export_to_vec(&series, Format::Csv).unwrap()).unwrap();
        assert_eq!(text, "lag,value\n0,1\n1,0.1\n2,-0.05\n");
        let back = read_correlation_csv(text.as_bytes(), CorrelationMode::Circular).unwrap();
        assert_eq!(back, series);
    }

    #[test]
    fn window_counts_round_trip() {
        let bits: Bits = "111010000111010000101010111001100101".parse().unwrap();
        let all: Vec<WindowCounts> = (1..=6).map(|w| count_windows(&bits, w).unwrap()).collect();
        let csv = export_to_vec(all.as_slice(), Format::Csv).unwrap();
        assert_eq!(read_window_counts_csv(csv.as_slice()).unwrap(), all);

        let json = export_to_vec(all.as_slice(), Format::Json).unwrap();
        let parsed: Vec<WindowCounts> = serde_json::from_slice(&json).unwrap();
        assert_eq!(parsed, all);
    }

    #[test]
    fn bad_csv_is_rejected() {
        assert!(read_window_counts_csv("w,pattern,count\n2,012,1\n".as_bytes()).is_err());
        assert!(read_window_counts_csv("w,pattern\n".as_bytes()).is_err());
        assert!(read_window_counts_csv("w,pattern,count\n2,01,1\n2,01,3\n".as_bytes()).is_err());
        assert!(read_correlation_csv("lag,value\n1,0.5\n".as_bytes(), CorrelationMode::Linear).is_err());
    }

    #[test]
    fn unwritable_sink_is_io_error() {
        struct Broken;
        impl Write for Broken {
            fn write(&mut self, _: &[u8]) -> std::io::Result<usize> {
                Err(std::io::Error::other("sink closed"))
            }
            fn flush(&mut self) -> std::io::Result<()> {
                Ok(())
            }
        }
        let series = CorrelationSeries { mode: CorrelationMode::Circular, values: vec![1.0] };
        assert!(matches!(export(&series, Format::Csv, &mut Broken), Err(Error::Io(_))));
        assert!(matches!(export(&series, Format::Json, &mut Broken), Err(Error::Io(_))));
    }
}

use std::fmt::{self, Write as _};
use std::fs::OpenOptions;
use std::io::Write;
use std::time::Duration;

use anyhow::{Context, Result};
use goldbach_core::analysis::{
    autocorrelation, count_windows, locate, unique_window_profile, CorrelationMode, CorrelationSeries, WindowCounts,
};
use goldbach_core::export::{export, Export, Format};
use goldbach_core::protocol::ca::Clock;
use goldbach_core::protocol::codec::{Body, Nonce, SessionId};
use goldbach_core::protocol::dseq::d_sequence;
use goldbach_core::protocol::transport::{exchange, loopback_handshake, CaServer};
use goldbach_core::protocol::{Ca, JsonLinesAudit, Party, PartySecret, Registry};
use goldbach_core::reference::{compare_table1, compare_table2, compare_table3, compare_table4};
use goldbach_core::sequences::{
    circle_with_radius, ellipse_sequence, parity_sequence, partitions, to_b_sequence, BSequence, Bits, CenterBound,
    EllipseK, EvenRange, MSequence,
};
use goldbach_core::PrimeSieve;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::{
    CaCommand, CenterBoundArg, Cli, Command, ModeArg, OutFormat, PartyArgs, PartyCommand, SequenceArgs, SourceArg,
};

/// Bad input caught by the CLI itself rather than by the library.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

const INTERPRETIVE_NOTE: &str =
    "note: unique_count is the number of length-w windows whose pattern occurs exactly once (interpretive reading)";

pub fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let mut buf = Vec::new();
    if let Command::Ca(CaCommand::Serve { registry, addr, audit }) = &cli.command {
        return serve(registry, addr, audit, cli.seed, stderr);
    }
    render(cli, &mut buf, stderr)?;
    match &cli.out {
        Some(path) => std::fs::write(path, &buf).with_context(|| format!("writing {}", path.display()))?,
        None => stdout.write_all(&buf)?,
    }
    Ok(())
}

fn data_format(cli: &Cli, default: OutFormat) -> OutFormat {
    cli.format.unwrap_or(default)
}

fn emit<T: Export + ?Sized>(
    item: &T,
    format: OutFormat,
    out: &mut Vec<u8>,
    table: impl FnOnce(&mut String),
) -> Result<()> {
    match format {
        OutFormat::Csv => export(item, Format::Csv, out)?,
        OutFormat::Json => export(item, Format::Json, out)?,
        OutFormat::Table => {
            let mut text = String::new();
            table(&mut text);
            out.extend_from_slice(text.as_bytes());
        }
    }
    Ok(())
}

fn render(cli: &Cli, out: &mut Vec<u8>, stderr: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Sieve { limit, count: _, list } => {
            let sieve = PrimeSieve::new(*limit)?;
            if *list {
                for p in sieve.primes() {
                    writeln!(out, "{p}")?;
                }
            } else {
                writeln!(out, "{}", sieve.count())?;
            }
        }
        Command::Partitions { n } => {
            let sieve = PrimeSieve::new((*n).max(2))?;
            let parts = partitions(&sieve, *n)?;
            emit(parts.as_slice(), data_format(cli, OutFormat::Csv), out, |t| {
                for p in &parts {
                    let _ = writeln!(t, "{} = {} + {}", p.n, p.p, p.q);
                }
                let _ = writeln!(t, "{} partition(s)", parts.len());
            })?;
        }
        Command::Parity { max } => {
            let sieve = PrimeSieve::new((*max).max(2))?;
            let b = parity_sequence(&sieve, *max)?;
            match data_format(cli, OutFormat::Table) {
                OutFormat::Table => writeln!(out, "{}", b.bits())?,
                OutFormat::Csv => {
                    writeln!(out, "n,bit")?;
                    for (i, bit) in b.bits().as_slice().iter().enumerate() {
                        writeln!(out, "{},{bit}", 4 + 2 * i)?;
                    }
                }
                OutFormat::Json => {
                    writeln!(out, "{}", serde_json::json!({ "start": 4, "step": 2, "bits": b.bits().to_string() }))?
                }
            }
        }
        Command::Circle { radius, max, min } => {
            let range = EvenRange::new(*min, *max)?;
            let sieve = PrimeSieve::new(max + radius)?;
            let points = circle_with_radius(&sieve, *radius, range)?;
            emit(points.as_slice(), data_format(cli, OutFormat::Csv), out, |t| {
                for c in &points {
                    let _ = writeln!(t, "{}: ({},{})", c.two_n, c.lower, c.upper);
                }
            })?;
        }
        Command::Mseq(seq) => {
            if seq.source != SourceArg::Ellipse {
                return Err(usage("mseq only applies to the ellipse source"));
            }
            let ms = build_mseq(seq)?;
            emit(&ms, data_format(cli, OutFormat::Csv), out, |t| mseq_table(&ms, t))?;
        }
        Command::Autocorr { seq, max_lag, mode } => {
            let b = build_b_sequence(seq)?;
            let mode = match mode {
                ModeArg::Circular => CorrelationMode::Circular,
                ModeArg::Linear => CorrelationMode::Linear,
            };
            let series = autocorrelation(&b, *max_lag, mode)?;
            emit(&series, data_format(cli, OutFormat::Csv), out, |t| correlation_table(&series, b.len(), t))?;
        }
        Command::Windows { seq, w_min, w_max, unique } => {
            let bits = build_b_sequence(seq)?.bits();
            if *w_min == 0 || w_min > w_max {
                return Err(usage(format!("window range [{w_min}, {w_max}] is empty or starts at 0")));
            }
            let format = data_format(cli, OutFormat::Csv);
            if *unique {
                let rows = unique_window_profile(&bits, *w_min, *w_max)?;
                if format != OutFormat::Table {
                    writeln!(stderr, "{INTERPRETIVE_NOTE}")?;
                }
                emit(rows.as_slice(), format, out, |t| {
                    let _ = writeln!(t, "{INTERPRETIVE_NOTE}\nL = {}", bits.len());
                    let _ = writeln!(t, "{:>3} {:>12}", "w", "unique_count");
                    for r in &rows {
                        let _ = writeln!(t, "{:>3} {:>12}", r.window, r.unique_count);
                    }
                })?;
            } else {
                let all =
                    (*w_min..=*w_max).map(|w| count_windows(&bits, w)).collect::<Result<Vec<WindowCounts>, _>>()?;
                emit(all.as_slice(), format, out, |t| {
                    let _ = writeln!(t, "L = {}", bits.len());
                    for wc in &all {
                        for (pattern, count) in &wc.counts {
                            let _ = writeln!(t, "{:>3} {pattern:>20} {count:>6}", wc.window);
                        }
                    }
                })?;
            }
        }
        Command::Locate { pattern, bits, seq } => {
            let haystack: Bits = match bits {
                Some(text) => text.parse()?,
                None => build_b_sequence(seq)?.bits(),
            };
            let pattern: Bits = pattern.parse()?;
            let positions = locate(&haystack, &pattern)?;
            match data_format(cli, OutFormat::Csv) {
                OutFormat::Csv => {
                    writeln!(out, "position")?;
                    for p in &positions {
                        writeln!(out, "{p}")?;
                    }
                }
                OutFormat::Json => {
                    writeln!(out, "{}", serde_json::json!({ "pattern": pattern.to_string(), "positions": positions }))?
                }
                OutFormat::Table => {
                    let verdict = match positions.len() {
                        0 => "not found",
                        1 => "unique",
                        _ => "ambiguous",
                    };
                    writeln!(out, "pattern {pattern} occurs {} time(s) ({verdict}): {positions:?}", positions.len())?;
                }
            }
        }
        Command::Dseq { p, bits } => {
            let ds = d_sequence(*p, *bits)?;
            match data_format(cli, OutFormat::Table) {
                OutFormat::Json => writeln!(
                    out,
                    "{}",
                    serde_json::json!({ "p": p, "period": ds.period(), "bits": Bits::from_bools(ds.bits().iter().map(|&b| b == 1)).to_string() })
                )?,
                OutFormat::Csv => {
                    writeln!(out, "i,bit")?;
                    for (i, b) in ds.bits().iter().enumerate() {
                        writeln!(out, "{},{b}", i + 1)?;
                    }
                }
                OutFormat::Table => {
                    writeln!(out, "{}", Bits::from_bools(ds.bits().iter().map(|&b| b == 1)))?;
                    writeln!(out, "period {}", ds.period())?;
                }
            }
        }
        Command::CompareTables { table } => {
            let wanted = |n: u8| table.is_none_or(|t| t == n);
            let mut sections = Vec::new();
            if wanted(1) {
                sections.push(compare_table1()?.render());
            }
            if wanted(2) {
                sections.push(compare_table2()?.render());
            }
            if wanted(3) {
                sections.push(compare_table3()?.render());
            }
            if wanted(4) {
                sections.push(compare_table4()?.render());
            }
            out.extend_from_slice(sections.join("\n").as_bytes());
        }
        Command::CompareTable2 => out.extend_from_slice(compare_table2()?.render().as_bytes()),
        Command::Ca(CaCommand::Serve { .. }) => unreachable!("handled in execute"),
        Command::Party(cmd) => party(cmd, cli.seed, out)?,
        Command::DemoHandshake { a, b, nonce } => demo_handshake(*a, *b, *nonce, cli.seed.unwrap_or(0), out)?,
    }
    Ok(())
}

fn center_bound(arg: CenterBoundArg) -> CenterBound {
    match arg {
        CenterBoundArg::TwoN => CenterBound::TwoN,
        CenterBoundArg::FourN => CenterBound::FourN,
    }
}

fn build_mseq(seq: &SequenceArgs) -> Result<MSequence> {
    let k = EllipseK::new(seq.k)?;
    let max_center = center_bound(seq.center_bound).max_center(seq.max);
    if max_center < 6 {
        return Err(usage(format!("ellipse centers start at 6; bound {max_center} is too small")));
    }
    Ok(ellipse_sequence(k, max_center)?)
}

fn build_b_sequence(seq: &SequenceArgs) -> Result<BSequence> {
    match seq.source {
        SourceArg::Ellipse => Ok(to_b_sequence(&build_mseq(seq)?)),
        SourceArg::Parity => {
            let n_max = center_bound(seq.center_bound).max_center(seq.max);
            let sieve = PrimeSieve::new(n_max.max(2))?;
            Ok(parity_sequence(&sieve, n_max)?)
        }
    }
}

fn mseq_table(ms: &MSequence, t: &mut String) {
    let _ = writeln!(t, "{:>6} {:>6} {:>8} {:>4} {:>10}", "2n", "2n-m", "2n+km", "m", "4n+(k-1)m");
    for e in &ms.entries {
        let _ = writeln!(t, "{:>6} {:>6} {:>8} {:>4} {:>10}", e.two_n, e.lower, e.upper, e.m, e.span_sum);
    }
    let ms_text: Vec<String> = ms.m_values().map(|m| m.to_string()).collect();
    let _ = writeln!(t, "m-sequence (k={}): {}", ms.k.get(), ms_text.join(","));
}

fn correlation_table(series: &CorrelationSeries, len: usize, t: &mut String) {
    let _ = writeln!(t, "{} autocorrelation, L = {len}", series.mode);
    for (lag, v) in series.values.iter().enumerate() {
        let _ = writeln!(t, "{lag:>5} {v:>10.6}");
    }
    if series.values.len() > 1 {
        let _ = writeln!(t, "max |C(i)|, i>=1: {:.6}", series.max_off_peak());
        let _ = writeln!(t, "mean |C(i)|, i>=1: {:.6}", series.mean_abs_off_peak());
    }
}

fn rng_for(seed: Option<u64>) -> ChaCha8Rng {
    match seed {
        Some(s) => ChaCha8Rng::seed_from_u64(s),
        None => ChaCha8Rng::from_entropy(),
    }
}

fn serve(
    registry: &std::path::Path,
    addr: &str,
    audit: &std::path::Path,
    seed: Option<u64>,
    stderr: &mut dyn Write,
) -> Result<()> {
    let registry = Registry::load(registry).with_context(|| format!("loading registry {}", registry.display()))?;
    let audit_file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(audit)
        .with_context(|| format!("opening audit log {}", audit.display()))?;
    let seed = seed.unwrap_or_else(|| rng_for(None).next_u64());
    let ca = Ca::new(registry, JsonLinesAudit::new(audit_file), seed)?;
    let server = CaServer::bind(addr, ca).with_context(|| format!("binding {addr}"))?;
    writeln!(stderr, "gbx ca: listening on {}", server.local_addr()?)?;
    server.serve()?;
    Ok(())
}

fn party(cmd: &PartyCommand, seed: Option<u64>, out: &mut Vec<u8>) -> Result<()> {
    let (args, requesting) = match cmd {
        PartyCommand::Request(args) => (args, true),
        PartyCommand::Agree(args) => (args, false),
    };
    let PartyArgs { id, peer, secret, ca, session, nonce, key_bound, timeout } = args;
    let sieve = PrimeSieve::new((*key_bound).max(*secret))?;
    PartySecret::new(id.parse()?, *secret, &sieve)?;
    let mut rng = rng_for(seed);
    let session_id = match session {
        Some(hex) => hex.parse()?,
        None if requesting => SessionId::random(&mut rng),
        None => SessionId::UNSET,
    };
    let nonce = nonce.then(|| Nonce::random(&mut rng));
    let (mut me, opening) = if requesting {
        Party::request(id.parse()?, peer.parse()?, *secret, session_id, nonce)
    } else {
        Party::agree(id.parse()?, peer.parse()?, *secret, session_id, nonce)
    };
    let key = exchange(ca.as_str(), &mut me, &opening, &sieve, Some(Duration::from_secs(*timeout)))?;
    writeln!(out, "session_id {}", key.session_id)?;
    writeln!(out, "session_key {}", key.p)?;
    writeln!(out, "confirmation {}", hex::encode(key.confirmation_tag()))?;
    Ok(())
}

fn demo_handshake(a: u64, b: u64, with_nonce: bool, seed: u64, out: &mut Vec<u8>) -> Result<()> {
    let validation = PrimeSieve::new(a.max(b).max(2))?;
    let (id_a, id_b) = ("A".parse()?, "B".parse()?);
    let mut registry = Registry::new();
    registry.insert(PartySecret::new(id_a, a, &validation)?)?;
    registry.insert(PartySecret::new(id_b, b, &validation)?)?;
    let sieve = PrimeSieve::new(registry.required_sieve_limit())?;

    let mut ca = Ca::new(registry, Vec::new(), seed)?.with_clock(Clock::Fixed(0));
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let session_id = SessionId::random(&mut rng);
    let (nonce_a, nonce_b) =
        if with_nonce { (Some(Nonce::random(&mut rng)), Some(Nonce::random(&mut rng))) } else { (None, None) };

    let outcome = loopback_handshake(
        &mut ca,
        Party::request("A".parse()?, "B".parse()?, a, session_id, nonce_a),
        Party::agree("B".parse()?, "A".parse()?, b, SessionId::UNSET, nonce_b),
        &sieve,
    )?;

    writeln!(out, "secrets a = {a}, b = {b}, n = a + b = {}", a + b)?;
    for entry in &outcome.transcript {
        let step = match (&entry.frame.body, entry.from) {
            (Body::Request { .. }, _) => 1,
            (Body::Agree { .. }, _) => 2,
            _ => 3,
        };
        writeln!(
            out,
            "step {step} {:>2} -> {:<2} {:<8} {}",
            entry.from,
            entry.to,
            entry.frame.body.type_name(),
            hex::encode(&entry.bytes)
        )?;
    }
    for record in ca.audit() {
        writeln!(out, "step 3 audit {}", serde_json::to_string(record)?)?;
    }
    let key_a = outcome.requester.context("step 4: A could not recover the session key")?;
    writeln!(out, "step 4 A recovers p = {}", key_a.p)?;
    let key_b = outcome.agreer.context("step 5: B could not recover the session key")?;
    writeln!(out, "step 5 B recovers p = {}", key_b.p)?;
    let (tag_a, tag_b) = (key_a.confirmation_tag(), key_b.confirmation_tag());
    writeln!(out, "step 6 keystream prefix A = {} B = {}", hex::encode(tag_a), hex::encode(tag_b))?;
    key_a.confirm(&tag_b)?;
    let ciphertext = key_a.apply_keystream(b"hello from A")?;
    writeln!(out, "step 6 A -> B ciphertext {}", hex::encode(&ciphertext))?;
    writeln!(out, "step 6 B decrypts {:?}", String::from_utf8_lossy(&key_b.apply_keystream(&ciphertext)?))?;
    Ok(())
}

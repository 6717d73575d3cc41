//! CA audit records: one JSON object per line, appended before any key share
//! leaves the CA.

use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::codec::SessionId;
use crate::protocol::registry::PartyId;

/// Everything needed to re-derive a session after the fact: `p + q = n`, and
/// `n` is the sum of the two parties' secrets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub session_id: SessionId,
    pub id_a: PartyId,
    pub id_b: PartyId,
    pub n: u64,
    /// Session key.
    pub p: u64,
    /// Audit key.
    pub q: u64,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
}

pub trait AuditLog {
    fn append(&mut self, record: &SessionRecord) -> Result<()>;
}

impl AuditLog for Vec<SessionRecord> {
    fn append(&mut self, record: &SessionRecord) -> Result<()> {
        self.push(record.clone());
        Ok(())
    }
}

impl<L: AuditLog + ?Sized> AuditLog for Box<L> {
    fn append(&mut self, record: &SessionRecord) -> Result<()> {
        (**self).append(record)
    }
}

/// Appends each record as a JSON line and flushes it immediately.
#[derive(Debug)]
pub struct JsonLinesAudit<W: Write> {
    out: W,
}

impl<W: Write> JsonLinesAudit<W> {
    pub fn new(out: W) -> Self {
        JsonLinesAudit { out }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> AuditLog for JsonLinesAudit<W> {
    fn append(&mut self, record: &SessionRecord) -> Result<()> {
        let mut line = serde_json::to_vec(record)?;
        line.push(b'\n');
        self.out.write_all(&line)?;
        self.out.flush()?;
        Ok(())
    }
}

pub fn read_audit(input: impl Read) -> Result<Vec<SessionRecord>> {
    BufReader::new(input)
        .lines()
        .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|line| Ok(serde_json::from_str(&line?)?))
        .collect()
}

/// Checks the record against the secrets it claims to come from.
pub fn verify_record(record: &SessionRecord, a: u64, b: u64) -> Result<()> {
    let pair = |x: u64, y: u64| (x.min(y), x.max(y));
    if record.p + record.q != record.n || record.n != a + b {
        return Err(Error::IntegrityFailure(format!(
            "record {}: {} + {} does not reproduce {a} + {b}",
            record.session_id, record.p, record.q
        )));
    }
    if pair(record.p, record.q) == pair(a, b) {
        return Err(Error::IntegrityFailure(format!("record {} reuses the secret pair", record.session_id)));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record() -> SessionRecord {
        SessionRecord {
            session_id: SessionId::from_bytes([1; 16]),
            id_a: "alice".parse().unwrap(),
            id_b: "bob".parse().unwrap(),
            n: 34,
            p: 3,
            q: 31,
            created_at: 0,
        }
    }

    #[test]
    fn json_lines_round_trip() {
        let mut log = JsonLinesAudit::new(Vec::new());
        log.append(&record()).unwrap();
        log.append(&record()).unwrap();
        let bytes = log.into_inner();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with(r#"{"session_id":"01010101010101010101010101010101","id_a":"alice","id_b":"bob","n":34,"p":3,"q":31,"created_at":0}"#));
        assert_eq!(read_audit(bytes.as_slice()).unwrap(), vec![record(), record()]);
    }

    #[test]
    fn replay_check() {
        assert!(verify_record(&record(), 11, 23).is_ok());
        assert!(verify_record(&record(), 13, 23).is_err());
        let mut reused = record();
        reused.p = 11;
        reused.q = 23;
        assert!(verify_record(&reused, 23, 11).is_err());
    }
}

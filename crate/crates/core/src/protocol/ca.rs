//! The certification authority: partition choice, share masking, audit, and
//! the frame-level state machine that ties them together.

use std::collections::HashSet;
use std::time::{SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::primes::PrimeSieve;
use crate::protocol::audit::{AuditLog, SessionRecord};
use crate::protocol::codec::{Body, ErrorCode, Frame, Nonce, SessionId};
use crate::protocol::masking::{hash_mask_with_nonce, mask, MaskedKey};
use crate::protocol::registry::{PartyId, Registry};
use crate::protocol::DEFAULT_WIDTH;
use crate::sequences::partitions;

/// Picks a Goldbach partition `p + q = a + b` other than `{a, b}`, uniformly
/// among the admissible ones. Returns `(p, q)` with `p <= q`; `p` is the
/// session key and `q` the audit key.
///
/// `p` may still equal `a` or `b` individually when another partition shares
/// that prime; only the exact pair is excluded.
pub fn choose_session_partition<R: Rng + ?Sized>(
    sieve: &PrimeSieve,
    a: u64,
    b: u64,
    rng: &mut R,
) -> Result<(u64, u64)> {
    for s in [a, b] {
        if s == 2 || !sieve.is_prime(s)? {
            return Err(Error::invalid(format!("party secrets must be odd primes, got {s}")));
        }
    }
    let n = a + b;
    let secret_pair = (a.min(b), a.max(b));
    let options: Vec<_> = partitions(sieve, n)?.into_iter().filter(|part| (part.p, part.q) != secret_pair).collect();
    if options.is_empty() {
        return Err(Error::NoAlternativePartition { n, a: secret_pair.0, b: secret_pair.1 });
    }
    let chosen = options[rng.gen_range(0..options.len())];
    Ok((chosen.p, chosen.q))
}

/// Source of `created_at` timestamps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Clock {
    System,
    Fixed(u64),
}

impl Clock {
    pub fn now(self) -> u64 {
        match self {
            Clock::System => SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            Clock::Fixed(t) => t,
        }
    }
}

/// Per-session inputs that do not come from the registry.
#[derive(Clone, Copy, Debug)]
pub struct SessionParams {
    pub session_id: SessionId,
    pub nonce_a: Option<Nonce>,
    pub nonce_b: Option<Nonce>,
    pub width: usize,
    pub created_at: u64,
}

impl SessionParams {
    pub fn new(session_id: SessionId) -> Self {
        SessionParams { session_id, nonce_a: None, nonce_b: None, width: DEFAULT_WIDTH, created_at: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Established {
    pub record: SessionRecord,
    /// `p ⊕ h(a)`, for the requester.
    pub share_a: MaskedKey,
    /// `p ⊕ h(b)`, for the agreeing party.
    pub share_b: MaskedKey,
}

/// Chooses the session partition for `id_a` and `id_b`, writes the audit
/// record, and only then returns the two masked shares.
pub fn ca_establish<R: Rng + ?Sized>(
    registry: &Registry,
    sieve: &PrimeSieve,
    audit: &mut dyn AuditLog,
    id_a: &PartyId,
    id_b: &PartyId,
    params: SessionParams,
    rng: &mut R,
) -> Result<Established> {
    let lookup = |id: &PartyId| registry.secret(id).ok_or_else(|| Error::Authentication(format!("unknown party {id}")));
    let a = lookup(id_a)?;
    let b = lookup(id_b)?;
    let (p, q) = choose_session_partition(sieve, a, b, rng)?;

    let share_a = mask(p, &hash_mask_with_nonce(a, params.nonce_a.as_ref(), params.width)?)?;
    let share_b = mask(p, &hash_mask_with_nonce(b, params.nonce_b.as_ref(), params.width)?)?;
    let record = SessionRecord {
        session_id: params.session_id,
        id_a: id_a.clone(),
        id_b: id_b.clone(),
        n: a + b,
        p,
        q,
        created_at: params.created_at,
    };
    audit.append(&record)?;
    Ok(Established { record, share_a, share_b })
}

/// Transport-level handle for a connection to the CA.
pub type ConnId = u64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outgoing {
    pub to: ConnId,
    pub frame: Frame,
}

#[derive(Clone, Debug)]
struct Pending {
    session_id: SessionId,
    requester: PartyId,
    peer: PartyId,
    nonce: Option<Nonce>,
    conn: ConnId,
}

/// Frame-driven CA. Feed it frames with [`Ca::handle`] and deliver whatever it returns.
pub struct Ca<L: AuditLog> {
    registry: Registry,
    sieve: PrimeSieve,
    audit: L,
    rng: ChaCha8Rng,
    clock: Clock,
    width: usize,
    pending: Vec<Pending>,
    used: HashSet<SessionId>,
}

impl<L: AuditLog> Ca<L> {
    /// A CA whose partition choices are reproducible from `seed`.
    pub fn new(registry: Registry, audit: L, seed: u64) -> Result<Self> {
        let sieve = PrimeSieve::new(registry.required_sieve_limit().max(16))?;
        Ok(Ca {
            registry,
            sieve,
            audit,
            rng: ChaCha8Rng::seed_from_u64(seed),
            clock: Clock::System,
            width: DEFAULT_WIDTH,
            pending: Vec::new(),
            used: HashSet::new(),
        })
    }

    pub fn with_clock(mut self, clock: Clock) -> Self {
        self.clock = clock;
        self
    }

    pub fn with_width(mut self, width: usize) -> Result<Self> {
        if width == 0 || width > 32 {
            return Err(Error::invalid(format!("masking width must be in [1, 32], got {width}")));
        }
        self.width = width;
        Ok(self)
    }

    pub fn audit(&self) -> &L {
        &self.audit
    }

    pub fn into_audit(self) -> L {
        self.audit
    }

    pub fn sieve(&self) -> &PrimeSieve {
        &self.sieve
    }

    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }

    /// Forgets requests that were waiting on a closed connection.
    pub fn disconnect(&mut self, conn: ConnId) {
        self.pending.retain(|p| p.conn != conn);
    }

    pub fn handle(&mut self, from: ConnId, frame: Frame) -> Vec<Outgoing> {
        let sid = frame.session_id;
        let reply = |code, msg: String| vec![Outgoing { to: from, frame: Frame::error(sid, code, msg) }];
        match frame.body {
            Body::Request { requester, peer, nonce } => {
                if let Some(id) = [&requester, &peer].into_iter().find(|id| self.registry.secret(id).is_none()) {
                    return reply(ErrorCode::UNKNOWN_PARTY, format!("unknown party {id}"));
                }
                if sid.is_unset() {
                    return reply(ErrorCode::MALFORMED_FRAME, "REQUEST needs a nonzero session id".into());
                }
                if self.used.contains(&sid) || self.pending.iter().any(|p| p.session_id == sid) {
                    return reply(ErrorCode::DUPLICATE_SESSION, format!("session {sid} already exists"));
                }
                self.pending.push(Pending { session_id: sid, requester, peer, nonce, conn: from });
                Vec::new()
            }
            Body::Agree { agreer, requester, nonce } => {
                if let Some(id) = [&agreer, &requester].into_iter().find(|id| self.registry.secret(id).is_none()) {
                    return reply(ErrorCode::UNKNOWN_PARTY, format!("unknown party {id}"));
                }
                let Some(idx) = self.pending.iter().position(|p| {
                    p.requester == requester && p.peer == agreer && (sid.is_unset() || p.session_id == sid)
                }) else {
                    return reply(
                        ErrorCode::NO_PENDING_REQUEST,
                        format!("no pending request from {requester} to {agreer}"),
                    );
                };
                let pending = self.pending.remove(idx);
                self.establish(pending, from, nonce)
            }
            Body::KeyShare { .. } | Body::Error { .. } => reply(
                ErrorCode::UNEXPECTED_MESSAGE,
                format!("the CA does not accept {} frames", frame.body.type_name()),
            ),
        }
    }

    fn establish(&mut self, pending: Pending, agreer_conn: ConnId, agree_nonce: Option<Nonce>) -> Vec<Outgoing> {
        let sid = pending.session_id;
        self.used.insert(sid);
        let params = SessionParams {
            session_id: sid,
            nonce_a: pending.nonce,
            nonce_b: agree_nonce,
            width: self.width,
            created_at: self.clock.now(),
        };
        let result = ca_establish(
            &self.registry,
            &self.sieve,
            &mut self.audit,
            &pending.requester,
            &pending.peer,
            params,
            &mut self.rng,
        );
        let both = |frame: Frame| {
            vec![Outgoing { to: pending.conn, frame: frame.clone() }, Outgoing { to: agreer_conn, frame }]
        };
        match result {
            Ok(est) => vec![
                Outgoing {
                    to: pending.conn,
                    frame: Frame::new(sid, Body::KeyShare { masked: est.share_a, nonce: pending.nonce }),
                },
                Outgoing {
                    to: agreer_conn,
                    frame: Frame::new(sid, Body::KeyShare { masked: est.share_b, nonce: agree_nonce }),
                },
            ],
            Err(e @ Error::NoAlternativePartition { .. }) => {
                both(Frame::error(sid, ErrorCode::NO_ALTERNATIVE_PARTITION, e.to_string()))
            }
            Err(e) => both(Frame::error(sid, ErrorCode::INTERNAL, e.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::masking::party_recover;
    use crate::protocol::registry::PartySecret;

    fn registry(entries: &[(&str, u64)]) -> Registry {
        let sieve = PrimeSieve::new(1000).unwrap();
        let mut reg = Registry::new();
        for &(id, p) in entries {
            reg.insert(PartySecret::new(id.parse().unwrap(), p, &sieve).unwrap()).unwrap();
        }
        reg
    }

    fn id(s: &str) -> PartyId {
        s.parse().unwrap()
    }

    #[test]
    fn partition_choice_for_34() {
        let sieve = PrimeSieve::new(100).unwrap();
        let mut seen = HashSet::new();
        for seed in 0..200 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (p, q) = choose_session_partition(&sieve, 11, 23, &mut rng).unwrap();
            assert!([(3, 31), (5, 29), (17, 17)].contains(&(p, q)), "{p}+{q}");
            seen.insert((p, q));
        }
        assert_eq!(seen.len(), 3);
    }

    #[test]
    fn partition_choice_is_seeded() {
        let sieve = PrimeSieve::new(1000).unwrap();
        let pick = |seed| choose_session_partition(&sieve, 101, 397, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        assert_eq!(pick(7), pick(7));
    }

    #[test]
    fn no_alternative_for_six() {
        let sieve = PrimeSieve::new(100).unwrap();
        let err = choose_session_partition(&sieve, 3, 3, &mut ChaCha8Rng::seed_from_u64(0)).unwrap_err();
        assert!(matches!(err, Error::NoAlternativePartition { n: 6, .. }));
        // 3 + 5 = 8 has only 3+5
        assert!(choose_session_partition(&sieve, 5, 3, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
        assert!(matches!(
            choose_session_partition(&sieve, 2, 3, &mut ChaCha8Rng::seed_from_u64(0)),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            choose_session_partition(&sieve, 9, 3, &mut ChaCha8Rng::seed_from_u64(0)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn establish_end_to_end() {
        let reg = registry(&[("alice", 11), ("bob", 23)]);
        let sieve = PrimeSieve::new(100).unwrap();
        let mut audit = Vec::new();
        let est = ca_establish(
            &reg,
            &sieve,
            &mut audit,
            &id("alice"),
            &id("bob"),
            SessionParams::new(SessionId::from_bytes([5; 16])),
            &mut ChaCha8Rng::seed_from_u64(1),
        )
        .unwrap();
        let pa = party_recover(&est.share_a, 11, None, &sieve).unwrap();
        let pb = party_recover(&est.share_b, 23, None, &sieve).unwrap();
        assert_eq!(pa, pb);
        assert_eq!(pa + est.record.q, 34);
        assert_eq!(audit, vec![est.record.clone()]);
        assert_eq!(est.record.p + est.record.q, 11 + 23);
    }

    #[test]
    fn establish_unknown_party() {
        let reg = registry(&[("alice", 11)]);
        let sieve = PrimeSieve::new(100).unwrap();
        let mut audit = Vec::new();
        let err = ca_establish(
            &reg,
            &sieve,
            &mut audit,
            &id("alice"),
            &id("mallory"),
            SessionParams::new(SessionId::from_bytes([5; 16])),
            &mut ChaCha8Rng::seed_from_u64(1),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Authentication(_)));
        assert!(audit.is_empty());
    }

    #[test]
    fn audit_failure_releases_nothing() {
        struct Full;
        impl AuditLog for Full {
            fn append(&mut self, _: &SessionRecord) -> Result<()> {
                Err(std::io::Error::other("disk full").into())
            }
        }
        let mut ca = Ca::new(registry(&[("alice", 11), ("bob", 23)]), Full, 0).unwrap();
        let sid = SessionId::from_bytes([1; 16]);
        assert!(ca
            .handle(1, Frame::new(sid, Body::Request { requester: id("alice"), peer: id("bob"), nonce: None }))
            .is_empty());
        let out = ca.handle(2, Frame::new(sid, Body::Agree { agreer: id("bob"), requester: id("alice"), nonce: None }));
        assert_eq!(out.len(), 2);
        assert!(out.iter().all(|o| matches!(o.frame.body, Body::Error { code: ErrorCode::INTERNAL, .. })));
    }

    #[test]
    fn state_machine_errors() {
        let mut ca =
            Ca::new(registry(&[("alice", 11), ("bob", 23), ("carol", 3), ("dave", 3)]), Vec::new(), 0).unwrap();
        let sid = SessionId::from_bytes([1; 16]);
        let request = |a: &str, b: &str| Frame::new(sid, Body::Request { requester: id(a), peer: id(b), nonce: None });
        let code = |out: Vec<Outgoing>| match &out[0].frame.body {
            Body::Error { code, .. } => *code,
            other => panic!("expected error, got {other:?}"),
        };

        assert_eq!(code(ca.handle(1, request("alice", "eve"))), ErrorCode::UNKNOWN_PARTY);
        assert_eq!(
            code(ca.handle(
                1,
                Frame::new(SessionId::UNSET, Body::Request { requester: id("alice"), peer: id("bob"), nonce: None })
            )),
            ErrorCode::MALFORMED_FRAME
        );
        assert!(ca.handle(1, request("alice", "bob")).is_empty());
        assert_eq!(code(ca.handle(1, request("alice", "bob"))), ErrorCode::DUPLICATE_SESSION);
        assert_eq!(
            code(
                ca.handle(2, Frame::new(sid, Body::Agree { agreer: id("carol"), requester: id("alice"), nonce: None }))
            ),
            ErrorCode::NO_PENDING_REQUEST
        );
        assert_eq!(
            code(ca.handle(
                2,
                Frame::new(sid, Body::KeyShare { masked: MaskedKey::from_bytes(vec![0; 8]).unwrap(), nonce: None })
            )),
            ErrorCode::UNEXPECTED_MESSAGE
        );

        // carol and dave both hold 3: 3+3 has no other partition
        let sid2 = SessionId::from_bytes([2; 16]);
        assert!(ca
            .handle(3, Frame::new(sid2, Body::Request { requester: id("carol"), peer: id("dave"), nonce: None }))
            .is_empty());
        let out = ca.handle(
            4,
            Frame::new(SessionId::UNSET, Body::Agree { agreer: id("dave"), requester: id("carol"), nonce: None }),
        );
        assert_eq!(out.len(), 2);
        assert_eq!(code(out), ErrorCode::NO_ALTERNATIVE_PARTITION);
        assert!(ca.audit().is_empty());

        // a used session id cannot be requested again
        assert_eq!(
            code(
                ca.handle(3, Frame::new(sid2, Body::Request { requester: id("carol"), peer: id("dave"), nonce: None }))
            ),
            ErrorCode::DUPLICATE_SESSION
        );
    }

    #[test]
    fn disconnect_drops_pending() {
        let mut ca = Ca::new(registry(&[("alice", 11), ("bob", 23)]), Vec::new(), 0).unwrap();
        let sid = SessionId::from_bytes([1; 16]);
        ca.handle(9, Frame::new(sid, Body::Request { requester: id("alice"), peer: id("bob"), nonce: None }));
        assert_eq!(ca.pending_len(), 1);
        ca.disconnect(9);
        assert_eq!(ca.pending_len(), 0);
    }
}

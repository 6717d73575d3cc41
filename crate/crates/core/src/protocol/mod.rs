//! Session-key establishment through a trusted certification authority (CA).
//!
//! Each party shares a secret prime with the CA. For parties with secrets `a`
//! and `b` the CA picks a different Goldbach partition `p + q = a + b`, keeps
//! `q` as the audit key and hands out `p` masked as `p ⊕ h(a)` and `p ⊕ h(b)`.
//! The parties unmask `p` with their own secret and use it to seed a
//! d-sequence keystream.
//!
//! Message flow (one frame per arrow):
//!
//! ```text
//! A  --REQUEST-->  CA          A asks for a session with B
//! B  --AGREE---->  CA          B agrees
//! CA --KEYSHARE--> A, B        p ⊕ h(a), p ⊕ h(b); audit record written first
//! ```
//!
//! [`ca::Ca`] and [`party::Party`] are transport-agnostic state machines;
//! [`transport`] drives them in-process or over TCP.

pub mod audit;
pub mod ca;
pub mod codec;
pub mod dseq;
pub mod masking;
pub mod party;
pub mod registry;
pub mod transport;

pub use audit::{AuditLog, JsonLinesAudit, SessionRecord};
pub use ca::{ca_establish, choose_session_partition, Ca, Clock, Established};
pub use codec::{Body, ErrorCode, Frame, Nonce, SessionId};
pub use dseq::{d_sequence, keystream_xor, DSequence};
pub use masking::{decode_int, encode_int, hash_mask, mask, party_recover, unmask, MaskedKey};
pub use party::{Party, SessionKey};
pub use registry::{PartyId, PartySecret, Registry};

/// Width in bytes of masked integers on the wire.
pub const DEFAULT_WIDTH: usize = 8;

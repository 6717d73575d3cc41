//! Client side of the protocol: send REQUEST or AGREE, then recover `p` from
//! the KEYSHARE the CA returns.

use crate::error::{Error, Result};
use crate::primes::PrimeSieve;
use crate::protocol::codec::{Body, Frame, Nonce, SessionId};
use crate::protocol::dseq::{d_sequence, keystream_xor, DSequence};
use crate::protocol::masking::party_recover;
use crate::protocol::registry::PartyId;

/// Bits of keystream exchanged for key confirmation.
pub const CONFIRMATION_BITS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Requester,
    Agreer,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum State {
    AwaitingKeyShare,
    Done,
}

#[derive(Clone, Debug)]
pub struct Party {
    id: PartyId,
    peer: PartyId,
    secret: u64,
    role: Role,
    session_id: SessionId,
    nonce: Option<Nonce>,
    state: State,
}

impl Party {
    /// Starts a session as the initiating party. Returns the REQUEST to send.
    pub fn request(
        id: PartyId,
        peer: PartyId,
        secret: u64,
        session_id: SessionId,
        nonce: Option<Nonce>,
    ) -> (Self, Frame) {
        let frame = Frame::new(session_id, Body::Request { requester: id.clone(), peer: peer.clone(), nonce });
        (Party { id, peer, secret, role: Role::Requester, session_id, nonce, state: State::AwaitingKeyShare }, frame)
    }

    /// Agrees to a session requested by `requester`. With [`SessionId::UNSET`]
    /// the CA matches the oldest pending request from that party.
    pub fn agree(
        id: PartyId,
        requester: PartyId,
        secret: u64,
        session_id: SessionId,
        nonce: Option<Nonce>,
    ) -> (Self, Frame) {
        let frame = Frame::new(session_id, Body::Agree { agreer: id.clone(), requester: requester.clone(), nonce });
        (
            Party {
                id,
                peer: requester,
                secret,
                role: Role::Agreer,
                session_id,
                nonce,
                state: State::AwaitingKeyShare,
            },
            frame,
        )
    }

    pub fn id(&self) -> &PartyId {
        &self.id
    }

    pub fn peer(&self) -> &PartyId {
        &self.peer
    }

    pub fn role(&self) -> Role {
        self.role
    }

    /// Processes the CA's answer. `sieve` bounds the keys this party will accept.
    pub fn on_frame(&mut self, frame: &Frame, sieve: &PrimeSieve) -> Result<SessionKey> {
        if self.state == State::Done {
            return Err(Error::Protocol("session already established".into()));
        }
        if !self.session_id.is_unset() && frame.session_id != self.session_id {
            return Err(Error::Protocol(format!(
                "frame for session {} while waiting on {}",
                frame.session_id, self.session_id
            )));
        }
        match &frame.body {
            Body::KeyShare { masked, nonce } => {
                if *nonce != self.nonce {
                    return Err(Error::Protocol("KEYSHARE does not echo our nonce".into()));
                }
                let p = party_recover(masked, self.secret, self.nonce.as_ref(), sieve)?;
                self.state = State::Done;
                self.session_id = frame.session_id;
                Ok(SessionKey { session_id: frame.session_id, p })
            }
            Body::Error { code, message } => {
                self.state = State::Done;
                Err(Error::Remote { code: code.0, message: message.clone() })
            }
            other => Err(Error::Protocol(format!("unexpected {} frame from the CA", other.type_name()))),
        }
    }
}

/// The prime `p` both parties hold once the exchange succeeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SessionKey {
    pub session_id: SessionId,
    pub p: u64,
}

impl SessionKey {
    pub fn keystream(&self, n_bits: usize) -> Result<DSequence> {
        d_sequence(self.p, n_bits)
    }

    /// First 64 keystream bits, packed. Distinct for distinct keys below 2^32.
    pub fn confirmation_tag(&self) -> [u8; 8] {
        let ds = d_sequence(self.p, CONFIRMATION_BITS).expect("session keys are odd primes");
        ds.keystream_bytes(0, 8).expect("64 bits generated").try_into().unwrap()
    }

    /// Compares keystream prefixes with the peer's; a mismatch means the two sides hold different keys.
    pub fn confirm(&self, peer_tag: &[u8; 8]) -> Result<()> {
        if self.confirmation_tag() == *peer_tag {
            Ok(())
        } else {
            Err(Error::IntegrityFailure("peer holds a different session key".into()))
        }
    }

    /// XORs `payload` with the keystream after the confirmation bits.
    pub fn apply_keystream(&self, payload: &[u8]) -> Result<Vec<u8>> {
        let ds = self.keystream(CONFIRMATION_BITS + 8 * payload.len())?;
        keystream_xor(payload, &ds, CONFIRMATION_BITS)
    }
}

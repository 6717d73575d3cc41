//! Length-prefixed frames for the key-establishment protocol.
//!
//! ```text
//! u32 BE total_length | u8 type | 16-byte session_id | payload
//! ```
//!
//! `total_length` counts the whole frame, prefix included. Payloads:
//!
//! | type            | payload                                              |
//! |-----------------|------------------------------------------------------|
//! | `0x01` REQUEST  | `u8 len, requester, u8 len, peer [, 16-byte nonce]`  |
//! | `0x02` AGREE    | `u8 len, agreer, u8 len, requester [, 16-byte nonce]`|
//! | `0x03` KEYSHARE | `u8 width, masked bytes [, 16-byte nonce]`           |
//! | `0x04` ERROR    | `u16 BE code, utf-8 message`                         |

use std::fmt;
use std::io::{self, Read, Write};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::protocol::masking::MaskedKey;
use crate::protocol::registry::PartyId;

pub const TYPE_REQUEST: u8 = 0x01;
pub const TYPE_AGREE: u8 = 0x02;
pub const TYPE_KEYSHARE: u8 = 0x03;
pub const TYPE_ERROR: u8 = 0x04;

pub const SESSION_ID_LEN: usize = 16;
pub const NONCE_LEN: usize = 16;
const PREFIX_LEN: usize = 4;
pub const HEADER_LEN: usize = PREFIX_LEN + 1 + SESSION_ID_LEN;
/// Frames longer than this are rejected before their body is read.
pub const MAX_FRAME_LEN: usize = 64 * 1024;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SessionId([u8; SESSION_ID_LEN]);

impl SessionId {
    /// All-zero id: an AGREE carrying it matches the oldest pending request.
    pub const UNSET: SessionId = SessionId([0; SESSION_ID_LEN]);

    pub fn from_bytes(bytes: [u8; SESSION_ID_LEN]) -> Self {
        SessionId(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; SESSION_ID_LEN] {
        &self.0
    }

    pub fn is_unset(&self) -> bool {
        *self == Self::UNSET
    }

    pub fn random(rng: &mut impl rand::RngCore) -> Self {
        let mut bytes = [0u8; SESSION_ID_LEN];
        rng.fill_bytes(&mut bytes);
        SessionId(bytes)
    }
}

impl fmt::Display for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

impl fmt::Debug for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SessionId({self})")
    }
}

impl std::str::FromStr for SessionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut bytes = [0u8; SESSION_ID_LEN];
        hex::decode_to_slice(s, &mut bytes).map_err(|e| Error::invalid(format!("bad session id {s:?}: {e}")))?;
        Ok(SessionId(bytes))
    }
}

impl Serialize for SessionId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SessionId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Per-request random value mixed into `h(secret ∥ nonce)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Nonce([u8; NONCE_LEN]);

impl Nonce {
    pub fn from_bytes(bytes: [u8; NONCE_LEN]) -> Self {
        Nonce(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; NONCE_LEN] {
        &self.0
    }

    pub fn random(rng: &mut impl rand::RngCore) -> Self {
        let mut bytes = [0u8; NONCE_LEN];
        rng.fill_bytes(&mut bytes);
        Nonce(bytes)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ErrorCode(pub u16);

impl ErrorCode {
    pub const UNKNOWN_PARTY: ErrorCode = ErrorCode(1);
    pub const NO_ALTERNATIVE_PARTITION: ErrorCode = ErrorCode(2);
    pub const UNEXPECTED_MESSAGE: ErrorCode = ErrorCode(3);
    pub const DUPLICATE_SESSION: ErrorCode = ErrorCode(4);
    pub const NO_PENDING_REQUEST: ErrorCode = ErrorCode(5);
    pub const MALFORMED_FRAME: ErrorCode = ErrorCode(6);
    pub const INTERNAL: ErrorCode = ErrorCode(7);
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Body {
    Request { requester: PartyId, peer: PartyId, nonce: Option<Nonce> },
    Agree { agreer: PartyId, requester: PartyId, nonce: Option<Nonce> },
    KeyShare { masked: MaskedKey, nonce: Option<Nonce> },
    Error { code: ErrorCode, message: String },
}

impl Body {
    pub fn type_tag(&self) -> u8 {
        match self {
            Body::Request { .. } => TYPE_REQUEST,
            Body::Agree { .. } => TYPE_AGREE,
            Body::KeyShare { .. } => TYPE_KEYSHARE,
            Body::Error { .. } => TYPE_ERROR,
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Body::Request { .. } => "REQUEST",
            Body::Agree { .. } => "AGREE",
            Body::KeyShare { .. } => "KEYSHARE",
            Body::Error { .. } => "ERROR",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub session_id: SessionId,
    pub body: Body,
}

impl Frame {
    pub fn new(session_id: SessionId, body: Body) -> Self {
        Frame { session_id, body }
    }

    pub fn error(session_id: SessionId, code: ErrorCode, message: impl Into<String>) -> Self {
        Frame { session_id, body: Body::Error { code, message: message.into() } }
    }

    pub fn encode(&self) -> Result<Vec<u8>> {
        let mut out = vec![0u8; PREFIX_LEN];
        out.push(self.body.type_tag());
        out.extend_from_slice(self.session_id.as_bytes());
        match &self.body {
            Body::Request { requester: a, peer: b, nonce } | Body::Agree { agreer: a, requester: b, nonce } => {
                put_id(&mut out, a);
                put_id(&mut out, b);
                put_nonce(&mut out, nonce);
            }
            Body::KeyShare { masked, nonce } => {
                out.push(masked.width() as u8);
                out.extend_from_slice(masked.as_bytes());
                put_nonce(&mut out, nonce);
            }
            Body::Error { code, message } => {
                out.extend_from_slice(&code.0.to_be_bytes());
                out.extend_from_slice(message.as_bytes());
            }
        }
        if out.len() > MAX_FRAME_LEN {
            return Err(Error::Codec(format!("frame of {} bytes exceeds {MAX_FRAME_LEN}", out.len())));
        }
        let len = out.len() as u32;
        out[..PREFIX_LEN].copy_from_slice(&len.to_be_bytes());
        Ok(out)
    }

    /// Decodes exactly one frame; the length prefix must match `bytes.len()`.
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Codec(format!(
                "frame of {} bytes is shorter than the {HEADER_LEN}-byte header",
                bytes.len()
            )));
        }
        let declared = u32::from_be_bytes(bytes[..PREFIX_LEN].try_into().unwrap()) as usize;
        if declared != bytes.len() {
            return Err(Error::Codec(format!("length prefix says {declared} bytes, frame has {}", bytes.len())));
        }
        let tag = bytes[PREFIX_LEN];
        let session_id = SessionId(bytes[PREFIX_LEN + 1..HEADER_LEN].try_into().unwrap());
        let mut payload = Cursor { buf: &bytes[HEADER_LEN..] };
        let body = match tag {
            TYPE_REQUEST => {
                let requester = payload.id()?;
                let peer = payload.id()?;
                Body::Request { requester, peer, nonce: payload.trailing_nonce()? }
            }
            TYPE_AGREE => {
                let agreer = payload.id()?;
                let requester = payload.id()?;
                Body::Agree { agreer, requester, nonce: payload.trailing_nonce()? }
            }
            TYPE_KEYSHARE => {
                let width = payload.byte()? as usize;
                let masked =
                    MaskedKey::from_bytes(payload.take(width)?.to_vec()).map_err(|e| Error::Codec(e.to_string()))?;
                Body::KeyShare { masked, nonce: payload.trailing_nonce()? }
            }
            TYPE_ERROR => {
                let code = ErrorCode(u16::from_be_bytes(payload.take(2)?.try_into().unwrap()));
                let message = std::str::from_utf8(payload.rest())
                    .map_err(|_| Error::Codec("error message is not utf-8".into()))?
                    .to_owned();
                Body::Error { code, message }
            }
            other => return Err(Error::Codec(format!("unknown frame type {other:#04x}"))),
        };
        Ok(Frame { session_id, body })
    }
}

fn put_id(out: &mut Vec<u8>, id: &PartyId) {
    out.push(id.as_bytes().len() as u8);
    out.extend_from_slice(id.as_bytes());
}

fn put_nonce(out: &mut Vec<u8>, nonce: &Option<Nonce>) {
    if let Some(n) = nonce {
        out.extend_from_slice(n.as_bytes());
    }
}

struct Cursor<'a> {
    buf: &'a [u8],
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() < n {
            return Err(Error::Codec(format!("payload truncated: needed {n} bytes, {} left", self.buf.len())));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn byte(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn id(&mut self) -> Result<PartyId> {
        let len = self.byte()? as usize;
        PartyId::new(self.take(len)?.to_vec()).map_err(|e| Error::Codec(e.to_string()))
    }

    fn rest(&mut self) -> &'a [u8] {
        std::mem::take(&mut self.buf)
    }

    fn trailing_nonce(&mut self) -> Result<Option<Nonce>> {
        match self.buf.len() {
            0 => Ok(None),
            NONCE_LEN => Ok(Some(Nonce(self.rest().try_into().unwrap()))),
            n => Err(Error::Codec(format!("{n} trailing bytes; expected none or a {NONCE_LEN}-byte nonce"))),
        }
    }
}

/// Reads one frame from a byte stream. `Ok(None)` on a clean end of stream.
pub fn read_frame(reader: &mut impl Read) -> Result<Option<Frame>> {
    let mut prefix = [0u8; PREFIX_LEN];
    let mut filled = 0;
    while filled < PREFIX_LEN {
        match reader.read(&mut prefix[filled..]) {
            Ok(0) if filled == 0 => return Ok(None),
            Ok(0) => return Err(Error::Codec(format!("stream ended after {filled} bytes of a length prefix"))),
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    let len = u32::from_be_bytes(prefix) as usize;
    if !(HEADER_LEN..=MAX_FRAME_LEN).contains(&len) {
        return Err(Error::Codec(format!("length prefix {len} outside [{HEADER_LEN}, {MAX_FRAME_LEN}]")));
    }
    let mut frame = vec![0u8; len];
    frame[..PREFIX_LEN].copy_from_slice(&prefix);
    reader.read_exact(&mut frame[PREFIX_LEN..]).map_err(|e| {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            Error::Codec(format!("stream ended inside a {len}-byte frame"))
        } else {
            e.into()
        }
    })?;
    Frame::decode(&frame).map(Some)
}

pub fn write_frame(writer: &mut impl Write, frame: &Frame) -> Result<()> {
    writer.write_all(&frame.encode()?)?;
    writer.flush()?;
    Ok(())
}

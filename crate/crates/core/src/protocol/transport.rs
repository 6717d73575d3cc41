//! Two ways of moving frames between parties and the CA: an in-process
//! loopback that records every frame, and a TCP service with one thread per
//! connection. Both run the same [`Ca`] and [`Party`] state machines.

use std::collections::HashMap;
use std::io;
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use crate::error::{Error, Result};
use crate::primes::PrimeSieve;
use crate::protocol::audit::AuditLog;
use crate::protocol::ca::{Ca, ConnId, Outgoing};
use crate::protocol::codec::{read_frame, write_frame, ErrorCode, Frame};
use crate::protocol::party::{Party, SessionKey};

const REQUESTER: ConnId = 1;
const AGREER: ConnId = 2;

/// One frame as it crossed the loopback.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub from: &'static str,
    pub to: &'static str,
    pub bytes: Vec<u8>,
    pub frame: Frame,
}

#[derive(Debug)]
pub struct LoopbackOutcome {
    pub transcript: Vec<TranscriptEntry>,
    pub requester: Result<SessionKey>,
    pub agreer: Result<SessionKey>,
}

fn carry(transcript: &mut Vec<TranscriptEntry>, from: &'static str, to: &'static str, frame: &Frame) -> Result<Frame> {
    let bytes = frame.encode()?;
    let decoded = Frame::decode(&bytes)?;
    transcript.push(TranscriptEntry { from, to, bytes, frame: decoded.clone() });
    Ok(decoded)
}

/// Runs REQUEST, AGREE and the two KEYSHAREs through `ca` in-process, encoding
/// and decoding every frame on the way.
pub fn loopback_handshake<L: AuditLog>(
    ca: &mut Ca<L>,
    requester: (Party, Frame),
    agreer: (Party, Frame),
    sieve: &PrimeSieve,
) -> Result<LoopbackOutcome> {
    let (mut alice, request) = requester;
    let (mut bob, agree) = agreer;
    let mut transcript = Vec::new();
    let mut replies: Vec<Outgoing> = Vec::new();

    let request = carry(&mut transcript, "A", "CA", &request)?;
    replies.extend(ca.handle(REQUESTER, request));
    let agree = carry(&mut transcript, "B", "CA", &agree)?;
    replies.extend(ca.handle(AGREER, agree));

    let mut for_alice = None;
    let mut for_bob = None;
    for out in replies {
        match out.to {
            REQUESTER => for_alice = Some(carry(&mut transcript, "CA", "A", &out.frame)?),
            AGREER => for_bob = Some(carry(&mut transcript, "CA", "B", &out.frame)?),
            other => return Err(Error::Protocol(format!("CA addressed unknown connection {other}"))),
        }
    }
    let no_reply = || Err(Error::Protocol("CA sent no reply".into()));
    Ok(LoopbackOutcome {
        requester: for_alice.map_or_else(no_reply, |f| alice.on_frame(&f, sieve)),
        agreer: for_bob.map_or_else(no_reply, |f| bob.on_frame(&f, sieve)),
        transcript,
    })
}

type Connections = Arc<Mutex<HashMap<ConnId, TcpStream>>>;

/// TCP front end for a [`Ca`]. The audit log is written under the CA lock, so
/// records are serialised even with many connections.
pub struct CaServer<L: AuditLog> {
    listener: TcpListener,
    ca: Arc<Mutex<Ca<L>>>,
    conns: Connections,
    next_conn: Arc<AtomicU64>,
}

impl<L: AuditLog + Send + 'static> CaServer<L> {
    pub fn bind(addr: impl ToSocketAddrs, ca: Ca<L>) -> Result<Self> {
        Ok(CaServer {
            listener: TcpListener::bind(addr)?,
            ca: Arc::new(Mutex::new(ca)),
            conns: Arc::default(),
            next_conn: Arc::new(AtomicU64::new(1)),
        })
    }

    pub fn local_addr(&self) -> Result<SocketAddr> {
        Ok(self.listener.local_addr()?)
    }

    /// Shared handle on the CA, e.g. to inspect the audit log.
    pub fn ca(&self) -> Arc<Mutex<Ca<L>>> {
        Arc::clone(&self.ca)
    }

    /// Accepts connections until the listener fails.
    pub fn serve(self) -> Result<()> {
        for stream in self.listener.incoming() {
            let stream = stream?;
            let conn = self.next_conn.fetch_add(1, Ordering::Relaxed);
            let ca = Arc::clone(&self.ca);
            let conns = Arc::clone(&self.conns);
            thread::spawn(move || {
                if let Err(e) = serve_connection(conn, stream, &ca, &conns) {
                    eprintln!("connection {conn}: {e}");
                }
                conns.lock().unwrap().remove(&conn);
                ca.lock().unwrap().disconnect(conn);
            });
        }
        Ok(())
    }

    pub fn spawn(self) -> JoinHandle<Result<()>> {
        thread::spawn(move || self.serve())
    }
}

fn serve_connection<L: AuditLog>(
    conn: ConnId,
    stream: TcpStream,
    ca: &Mutex<Ca<L>>,
    conns: &Connections,
) -> Result<()> {
    conns.lock().unwrap().insert(conn, stream.try_clone()?);
    let mut reader = stream;
    loop {
        let frame = match read_frame(&mut reader) {
            Ok(Some(frame)) => frame,
            Ok(None) => return Ok(()),
            Err(Error::Codec(msg)) => {
                let reply = Frame::error(Default::default(), ErrorCode::MALFORMED_FRAME, msg.clone());
                write_frame(&mut reader, &reply)?;
                return Err(Error::Codec(msg));
            }
            Err(e) => return Err(e),
        };
        let outgoing = ca.lock().unwrap().handle(conn, frame);
        let mut conns = conns.lock().unwrap();
        for out in outgoing {
            if let Some(target) = conns.get_mut(&out.to) {
                if let Err(e) = write_frame(target, &out.frame) {
                    eprintln!("connection {}: dropping {} frame: {e}", out.to, out.frame.body.type_name());
                }
            }
        }
    }
}

/// Sends the party's opening frame to the CA at `addr` and waits for the answer.
pub fn exchange(
    addr: impl ToSocketAddrs,
    party: &mut Party,
    opening: &Frame,
    sieve: &PrimeSieve,
    timeout: Option<Duration>,
) -> Result<SessionKey> {
    let mut stream = TcpStream::connect(addr)?;
    stream.set_read_timeout(timeout)?;
    write_frame(&mut stream, opening)?;
    match read_frame(&mut stream) {
        Ok(Some(frame)) => party.on_frame(&frame, sieve),
        Ok(None) => Err(Error::Io(io::Error::new(io::ErrorKind::UnexpectedEof, "CA closed the connection"))),
        Err(e) => Err(e),
    }
}

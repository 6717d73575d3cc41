use std::time::Duration;

use goldbach_core::protocol::audit::{read_audit, verify_record};
use goldbach_core::protocol::ca::Clock;
use goldbach_core::protocol::codec::{read_frame, write_frame, Body, ErrorCode, Frame, Nonce, SessionId};
use goldbach_core::protocol::transport::{exchange, loopback_handshake, CaServer};
use goldbach_core::protocol::{Ca, JsonLinesAudit, Party, PartySecret, Registry};
use goldbach_core::{Error, PrimeSieve};

fn registry(entries: &[(&str, u64)]) -> Registry {
    let sieve = PrimeSieve::new(10_000).unwrap();
    let mut reg = Registry::new();
    for &(id, p) in entries {
        reg.insert(PartySecret::new(id.parse().unwrap(), p, &sieve).unwrap()).unwrap();
    }
    reg
}

fn id(s: &str) -> goldbach_core::protocol::PartyId {
    s.parse().unwrap()
}

#[test]
fn loopback_six_steps() {
    let mut ca = Ca::new(registry(&[("alice", 11), ("bob", 23)]), Vec::new(), 42).unwrap().with_clock(Clock::Fixed(0));
    let sieve = PrimeSieve::new(100).unwrap();
    let sid = SessionId::from_bytes([0x11; 16]);
    let outcome = loopback_handshake(
        &mut ca,
        Party::request(id("alice"), id("bob"), 11, sid, None),
        Party::agree(id("bob"), id("alice"), 23, SessionId::UNSET, None),
        &sieve,
    )
    .unwrap();

    let names: Vec<_> = outcome.transcript.iter().map(|t| (t.from, t.to, t.frame.body.type_name())).collect();
    assert_eq!(
        names,
        vec![("A", "CA", "REQUEST"), ("B", "CA", "AGREE"), ("CA", "A", "KEYSHARE"), ("CA", "B", "KEYSHARE")]
    );
    let ka = outcome.requester.unwrap();
    let kb = outcome.agreer.unwrap();
    assert_eq!(ka, kb);
    assert!(ka.confirm(&kb.confirmation_tag()).is_ok());

    let records = ca.audit();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0].p, ka.p);
    assert!([(3, 31), (5, 29), (17, 17)].contains(&(records[0].p, records[0].q)));
    verify_record(&records[0], 11, 23).unwrap();

    // step 6: the two sides share a keystream
    let ct = ka.apply_keystream(b"meet at noon").unwrap();
    assert_eq!(kb.apply_keystream(&ct).unwrap(), b"meet at noon");
}

#[test]
fn loopback_with_nonces() {
    let mut ca = Ca::new(registry(&[("alice", 101), ("bob", 397)]), Vec::new(), 1).unwrap();
    let sieve = PrimeSieve::new(1000).unwrap();
    let sid = SessionId::from_bytes([0x22; 16]);
    let na = Some(Nonce::from_bytes([1; 16]));
    let nb = Some(Nonce::from_bytes([2; 16]));
    let outcome = loopback_handshake(
        &mut ca,
        Party::request(id("alice"), id("bob"), 101, sid, na),
        Party::agree(id("bob"), id("alice"), 397, sid, nb),
        &sieve,
    )
    .unwrap();
    assert_eq!(outcome.requester.unwrap(), outcome.agreer.unwrap());
    match &outcome.transcript[2].frame.body {
        Body::KeyShare { nonce, .. } => assert_eq!(*nonce, na),
        other => panic!("{other:?}"),
    }
}

#[test]
fn loopback_unknown_party() {
    let mut ca = Ca::new(registry(&[("alice", 11)]), Vec::new(), 0).unwrap();
    let sieve = PrimeSieve::new(100).unwrap();
    let sid = SessionId::from_bytes([0x33; 16]);
    let outcome = loopback_handshake(
        &mut ca,
        Party::request(id("alice"), id("mallory"), 11, sid, None),
        Party::agree(id("mallory"), id("alice"), 13, sid, None),
        &sieve,
    )
    .unwrap();
    let error_frame = &outcome.transcript[2];
    assert_eq!(error_frame.bytes[4], 0x04);
    assert!(matches!(outcome.requester, Err(Error::Remote { code: 1, .. })));
    assert!(ca.audit().is_empty());
}

#[test]
fn tcp_service_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let audit_path = dir.path().join("audit.jsonl");
    let audit = JsonLinesAudit::new(std::fs::File::create(&audit_path).unwrap());
    let ca = Ca::new(registry(&[("alice", 11), ("bob", 23), ("carol", 3), ("dave", 3)]), audit, 7).unwrap();
    let server = CaServer::bind("127.0.0.1:0", ca).unwrap();
    let addr = server.local_addr().unwrap();
    server.spawn();

    let sieve = PrimeSieve::new(100).unwrap();
    let timeout = Some(Duration::from_secs(10));
    let sid = SessionId::from_bytes([0x44; 16]);

    let alice = std::thread::spawn(move || {
        let sieve = PrimeSieve::new(100).unwrap();
        let (mut party, opening) = Party::request(id("alice"), id("bob"), 11, sid, None);
        exchange(addr, &mut party, &opening, &sieve, timeout)
    });
    // bob agrees once alice's request is pending
    let bob_key = loop {
        let (mut party, opening) = Party::agree(id("bob"), id("alice"), 23, SessionId::UNSET, None);
        match exchange(addr, &mut party, &opening, &sieve, timeout) {
            Err(Error::Remote { code, .. }) if code == ErrorCode::NO_PENDING_REQUEST.0 => {
                std::thread::sleep(Duration::from_millis(20));
            }
            other => break other.unwrap(),
        }
    };
    let alice_key = alice.join().unwrap().unwrap();
    assert_eq!(alice_key, bob_key);
    assert_eq!(alice_key.session_id, sid);

    let records = read_audit(std::fs::File::open(&audit_path).unwrap()).unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0].p, alice_key.p);
    verify_record(&records[0], 11, 23).unwrap();

    // unknown party gets an ERROR frame
    let (mut party, opening) = Party::request(id("eve"), id("bob"), 13, SessionId::from_bytes([0x55; 16]), None);
    assert!(matches!(exchange(addr, &mut party, &opening, &sieve, timeout), Err(Error::Remote { code: 1, .. })));

    // garbage frame gets MALFORMED_FRAME back
    let mut stream = std::net::TcpStream::connect(addr).unwrap();
    stream.set_read_timeout(timeout).unwrap();
    use std::io::Write;
    stream.write_all(&[0, 0, 0, 30, 0x09]).unwrap();
    stream.write_all(&[0; 25]).unwrap();
    let reply = read_frame(&mut stream).unwrap().unwrap();
    assert!(matches!(reply.body, Body::Error { code: ErrorCode::MALFORMED_FRAME, .. }));

    // the CA rejects frames that only a CA may send
    let mut stream = std::net::TcpStream::connect(addr).unwrap();
    stream.set_read_timeout(timeout).unwrap();
    write_frame(&mut stream, &Frame::error(sid, ErrorCode(9), "hi")).unwrap();
    let reply = read_frame(&mut stream).unwrap().unwrap();
    assert!(matches!(reply.body, Body::Error { code: ErrorCode::UNEXPECTED_MESSAGE, .. }));
}

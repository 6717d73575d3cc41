use gbx::{run, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE};

fn gbx(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("gbx").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn exit_codes() {
    assert_eq!(gbx(&["partitions", "28"]).0, EXIT_OK);
    assert_eq!(gbx(&["autocorr", "--help"]).0, EXIT_OK);
    assert_eq!(gbx(&["--version"]).0, EXIT_OK);

    let (code, out, err) = gbx(&["partitions", "11"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(out.is_empty());
    assert!(err.starts_with("gbx: "));

    for bad in [
        &["no-such-command"][..],
        &["mseq", "--k", "4"],
        &["mseq", "--k", "5", "--max", "4"],
        &["windows", "--w-min", "5", "--w-max", "2"],
        &["locate", "--pattern", "10x"],
        &["dseq", "--p", "2"],
        &["sieve", "--limit", "1"],
        &["compare-tables", "--table", "5"],
    ] {
        assert_eq!(gbx(bad).0, EXIT_USAGE, "{bad:?}");
    }
    // nothing listens on port 1
    let (code, _, _) = gbx(&["party", "request", "--id", "a", "--peer", "b", "--secret", "11", "--ca", "127.0.0.1:1"]);
    assert_eq!(code, EXIT_RUNTIME);
    let (code, _, _) =
        gbx(&["ca", "serve", "--registry", "/nonexistent/registry", "--addr", "127.0.0.1:0", "--audit", "/tmp/x"]);
    assert_eq!(code, EXIT_RUNTIME);
}

#[test]
fn mseq_csv_rows() {
    let (code, out, _) = gbx(&["mseq", "--k", "5", "--max", "42"]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "two_n,lower,upper,m,span_sum");
    assert_eq!(lines[1], "6,5,11,1,16");
    assert!(lines.contains(&"16,13,31,3,44"));
    assert!(lines.contains(&"42,41,47,1,88"));
}

#[test]
fn parity_and_dseq_bits() {
    assert_eq!(gbx(&["parity", "--max", "74"]).1.trim(), "111010000111010000101010111001100101");
    assert!(gbx(&["dseq", "--p", "7", "--bits", "9"]).1.starts_with("001001001\n"));
}

#[test]
fn formats() {
    let (_, csv, _) = gbx(&["autocorr", "--max-lag", "2"]);
    assert!(csv.starts_with("lag,value\n0,1\n"));
    let (_, json, _) = gbx(&["autocorr", "--max-lag", "2", "--format", "json"]);
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(value["values"][0], 1.0);

    let (_, csv, err) = gbx(&["windows", "--unique", "--w-min", "2", "--w-max", "3"]);
    assert!(csv.starts_with("w,unique_count\n"));
    assert!(err.contains("interpretive"));

    let (_, csv, _) = gbx(&["windows", "--w-min", "1", "--w-max", "1"]);
    assert!(csv.starts_with("w,pattern,count\n1,0,"));

    let (_, out, _) = gbx(&["locate", "--pattern", "01", "--bits", "0101", "--format", "table"]);
    assert!(out.contains("ambiguous"));
}

#[test]
fn out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.csv");
    let (code, out, _) =
        gbx(&["circle", "--radius", "3", "--min", "8", "--max", "14", "--out", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    assert_eq!(std::fs::read_to_string(path).unwrap(), "two_n,lower,upper\n8,5,11\n10,7,13\n14,11,17\n");
}

#[test]
fn demo_handshake_reaches_agreement() {
    let (code, out, _) = gbx(&["demo-handshake", "--seed", "3", "--nonce"]);
    assert_eq!(code, EXIT_OK);
    let recovered: Vec<&str> =
        out.lines().filter(|l| l.contains("recovers p =")).map(|l| l.rsplit(' ').next().unwrap()).collect();
    assert_eq!(recovered.len(), 2);
    assert_eq!(recovered[0], recovered[1]);
    assert!(out.contains("B decrypts \"hello from A\""));
    // 34 = 3 + 31 = 5 + 29 = 11 + 23 = 17 + 17, and 11 + 23 is the secret pair
    assert!(["3", "5", "17"].contains(&recovered[0]));
}

#[test]
fn demo_handshake_refuses_without_alternative() {
    let (code, _, err) = gbx(&["demo-handshake", "--a", "3", "--b", "3"]);
    assert_eq!(code, EXIT_RUNTIME);
    assert!(err.contains("gbx: "));
}

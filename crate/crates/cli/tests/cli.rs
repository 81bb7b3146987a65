use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use aes::cipher::{BlockEncrypt, KeyInit};
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_tinyot");

fn free_addr() -> String {
    let l = TcpListener::bind("127.0.0.1:0").unwrap();
    l.local_addr().unwrap().to_string()
}

fn tinyot(args: &[&str]) -> Command {
    let mut c = Command::new(BIN);
    c.args(args).env_remove("TINYOT_SEED").env_remove("TINYOT_PSI").env_remove("TINYOT_KAPPA");
    c.stdout(Stdio::piped()).stderr(Stdio::piped());
    c
}

/// Runs alice and bob concurrently with the same trailing arguments.
fn pair(sub: &str, alice: &[&str], bob: &[&str]) -> (Output, Output) {
    let addr = free_addr();
    let a = tinyot(&[sub, "--role", "alice", "--peer", &addr]).args(alice).spawn().unwrap();
    let b = tinyot(&[sub, "--role", "bob", "--peer", &addr]).args(bob).spawn().unwrap();
    let (a, b) = (a.wait_with_output().unwrap(), b.wait_with_output().unwrap());
    (a, b)
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn deal_pair(dir: &Path, tag: &str, extra: &[&str]) -> (PathBuf, PathBuf) {
    let (fa, fb) = (dir.join(format!("{tag}.a")), dir.join(format!("{tag}.b")));
    let mut args_a = vec!["--seed", "11", "--kappa", "64", "--out", path_str(&fa)];
    let mut args_b = vec!["--seed", "22", "--kappa", "64", "--out", path_str(&fb)];
    args_a.extend_from_slice(extra);
    args_b.extend_from_slice(extra);
    let (a, b) = pair("deal", &args_a, &args_b);
    assert!(a.status.success(), "alice: {}", String::from_utf8_lossy(&a.stderr));
    assert!(b.status.success(), "bob: {}", String::from_utf8_lossy(&b.stderr));
    (fa, fb)
}

#[test]
fn deal_refuses_to_overwrite() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("m.bin");
    std::fs::write(&out, b"keep").unwrap();
    let o = tinyot(&["deal", "--role", "alice", "--peer", "127.0.0.1:1", "--gates", "1", "--out", path_str(&out)])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(std::fs::read(&out).unwrap(), b"keep");
}

#[test]
fn bad_flags_exit_with_usage_code() {
    let o = tinyot(&["deal", "--role", "carol"]).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn identical_seeds_give_identical_stores() {
    let dir = TempDir::new().unwrap();
    let extra = ["--gates", "20", "--inputs-alice", "4", "--inputs-bob", "4", "--psi", "20"];
    let (a1, b1) = deal_pair(dir.path(), "one", &extra);
    let (a2, b2) = deal_pair(dir.path(), "two", &extra);
    assert_eq!(std::fs::read(a1).unwrap(), std::fs::read(a2).unwrap());
    assert_eq!(std::fs::read(b1).unwrap(), std::fs::read(b2).unwrap());
}

#[test]
fn aes_eval_matches_reference_cipher() {
    let dir = TempDir::new().unwrap();
    let circ = dir.path().join("aes.txt");
    assert!(tinyot(&["gen-aes", "--out", path_str(&circ)]).status().unwrap().success());
    let (fa, fb) = deal_pair(dir.path(), "aes", &["--circuit", path_str(&circ)]);

    let key_a: [u8; 16] = std::array::from_fn(|i| i as u8 * 7 + 1);
    let key_b: [u8; 16] = std::array::from_fn(|i| 0xa5 ^ (i as u8 * 13));
    let pt: [u8; 16] = *b"sixteen byte msg";
    let input_a = hex::encode([key_a, pt].concat());
    let input_b = hex::encode(key_b);
    let (a, b) = pair(
        "eval",
        &["--circuit", path_str(&circ), "--material", path_str(&fa), "--input", &input_a, "--json"],
        &["--circuit", path_str(&circ), "--material", path_str(&fb), "--input", &input_b, "--json"],
    );
    assert!(a.status.success(), "alice: {}", String::from_utf8_lossy(&a.stderr));
    assert!(b.status.success(), "bob: {}", String::from_utf8_lossy(&b.stderr));

    let key: [u8; 16] = std::array::from_fn(|i| key_a[i] ^ key_b[i]);
    let mut block = aes::Block::clone_from_slice(&pt);
    aes::Aes128::new(&key.into()).encrypt_block(&mut block);

    // Bristol files carry no output recipients, so both parties learn the result.
    for out in [&a, &b] {
        let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(report["output"], hex::encode(block));
        assert!(report["gates_per_second"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn tampered_material_aborts() {
    let dir = TempDir::new().unwrap();
    let circ = dir.path().join("and.txt");
    std::fs::write(&circ, "1 3\n2 1 1\n1 1\n\n2 1 0 1 2 AND\n").unwrap();
    let (fa, fb) = deal_pair(dir.path(), "t", &["--circuit", path_str(&circ)]);

    // First byte of the global key, right after the fixed-size prefix.
    let mut bytes = std::fs::read(&fa).unwrap();
    bytes[64 + 48 + 64] ^= 1;
    std::fs::write(&fa, &bytes).unwrap();

    let (a, _b) = pair(
        "eval",
        &["--circuit", path_str(&circ), "--material", path_str(&fa), "--input", "01"],
        &["--circuit", path_str(&circ), "--material", path_str(&fb), "--input", "01"],
    );
    assert_eq!(a.status.code(), Some(2), "{}", String::from_utf8_lossy(&a.stderr));

    // A flipped header commitment is caught when loading.
    let mut bytes = std::fs::read(&fb).unwrap();
    bytes[40] ^= 0x80;
    std::fs::write(&fb, &bytes).unwrap();
    let o = tinyot(&["eval", "--role", "bob", "--peer", "127.0.0.1:1", "--circuit", path_str(&circ)])
        .args(["--material", path_str(&fb), "--input", "01"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exhausted_material_exits_with_code_four() {
    let dir = TempDir::new().unwrap();
    let circ = dir.path().join("and.txt");
    std::fs::write(&circ, "1 3\n2 1 1\n1 1\n\n2 1 0 1 2 AND\n").unwrap();
    let (fa, fb) = deal_pair(dir.path(), "x", &["--gates", "0", "--inputs-alice", "1", "--inputs-bob", "1"]);
    let (a, b) = pair(
        "eval",
        &["--circuit", path_str(&circ), "--material", path_str(&fa), "--input", "01"],
        &["--circuit", path_str(&circ), "--material", path_str(&fb), "--input", "00"],
    );
    assert_eq!(a.status.code(), Some(4), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(b.status.code(), Some(4), "{}", String::from_utf8_lossy(&b.stderr));
}

#[test]
fn verify_bounds_passes() {
    let o = tinyot(&["verify-bounds", "--seed", "5", "--trials", "20000", "--json"]).output().unwrap();
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["failed"], 0);
}

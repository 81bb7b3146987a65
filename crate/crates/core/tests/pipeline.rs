mod common;

use std::net::TcpListener;
use std::thread;
use std::time::Duration;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use tinyot::bitlinalg::BitVec;
use tinyot::circuit::{plain_eval, random_circuit};
use tinyot::dealer::{deal, verify_pair, DealerConfig, MaterialStore};
use tinyot::runtime::{evaluate, EvalOptions, FaultPlan};
use tinyot::transport::TcpChannel;
use tinyot::Role;

use common::{counts_for, eval_pair, ideal_for, run_pair};

#[test]
fn deal_and_evaluate_over_tcp() {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let c = random_circuit(&mut rng, 6, 5, 120, 6);
    let (xa, xb) = (BitVec::random(6, &mut rng), BitVec::random(5, &mut rng));
    let expect = plain_eval(&c, &xa, &xb).unwrap();
    let cfg = DealerConfig::new(64, 20, counts_for(&c));

    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let bob = {
        let (c, cfg, xb) = (c.clone(), cfg, xb.clone());
        thread::spawn(move || {
            let ch = TcpChannel::connect(addr, Duration::from_secs(5)).unwrap();
            let (mut store, _) = deal(&ch, Role::Bob, &cfg, [0; 16], &mut ChaCha20Rng::seed_from_u64(3)).unwrap();
            let out = evaluate(&ch, &c, &xb, &mut store, &EvalOptions::default()).unwrap();
            (store, out)
        })
    };
    let ch = TcpChannel::accept(&listener).unwrap();
    let (mut store, report) = deal(&ch, Role::Alice, &cfg, [5; 16], &mut ChaCha20Rng::seed_from_u64(2)).unwrap();
    let out = evaluate(&ch, &c, &xa, &mut store, &EvalOptions::default()).unwrap();
    let (bob_store, bob_out) = bob.join().unwrap();

    assert_eq!(out.outputs, expect);
    assert_eq!(bob_out.outputs, expect);
    assert_eq!(bob_store.session_id(), [5; 16]);
    assert!(report.bytes_sent > 0);
    assert_eq!(store.consumed(), store.counts());
}

#[test]
fn dealt_stores_survive_a_file_round_trip() {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let c = random_circuit(&mut rng, 4, 4, 60, 4);
    let cfg = DealerConfig::new(32, 16, counts_for(&c));
    let (a, b) = run_pair(
        |ch| deal(ch, Role::Alice, &cfg, [1; 16], &mut ChaCha20Rng::seed_from_u64(5)).unwrap().0,
        |ch| deal(ch, Role::Bob, &cfg, [0; 16], &mut ChaCha20Rng::seed_from_u64(6)).unwrap().0,
    );
    verify_pair(&a, &b).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let (pa, pb) = (dir.path().join("a"), dir.path().join("b"));
    a.save(&pa, false).unwrap();
    b.save(&pb, false).unwrap();
    assert!(a.save(&pa, false).is_err());
    let (la, lb) = (MaterialStore::load(&pa).unwrap(), MaterialStore::load(&pb).unwrap());
    verify_pair(&la, &lb).unwrap();

    let (xa, xb) = (BitVec::random(4, &mut rng), BitVec::random(4, &mut rng));
    let (ra, rb) = eval_pair(&c, &xa, &xb, la, lb, FaultPlan::none(), FaultPlan::none());
    let expect = plain_eval(&c, &xa, &xb).unwrap();
    assert_eq!(ra.unwrap().outputs, expect);
    assert_eq!(rb.unwrap().outputs, expect);
}

#[test]
fn stores_from_different_sessions_are_rejected() {
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let c = random_circuit(&mut rng, 2, 2, 10, 2);
    let (sa, _) = ideal_for(&c, 32, &mut rng);
    let (_, sb) = ideal_for(&c, 32, &mut rng);
    let (xa, xb) = (BitVec::zeros(2), BitVec::zeros(2));
    let (ra, rb) = eval_pair(&c, &xa, &xb, sa, sb, FaultPlan::none(), FaultPlan::none());
    assert!(ra.unwrap_err().is_abort());
    assert!(rb.unwrap_err().is_abort());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn secure_evaluation_matches_plain(
        seed in any::<u64>(),
        gates in 1usize..200,
        ia in 1usize..8,
        ib in 0usize..8,
        chunk in 1usize..64,
    ) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let c = random_circuit(&mut rng, ia, ib, gates, gates.min(4));
        let (xa, xb) = (BitVec::random(ia, &mut rng), BitVec::random(ib, &mut rng));
        let (mut sa, mut sb) = ideal_for(&c, 32, &mut rng);
        let opts = EvalOptions { chunk, ..EvalOptions::default() };
        let (ra, rb) = run_pair(
            |ch| evaluate(ch, &c, &xa, &mut sa, &opts),
            |ch| evaluate(ch, &c, &xb, &mut sb, &opts),
        );
        let expect = plain_eval(&c, &xa, &xb).unwrap();
        prop_assert_eq!(ra.unwrap().outputs, expect.clone());
        prop_assert_eq!(rb.unwrap().outputs, expect);
    }
}

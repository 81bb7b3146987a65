mod common;

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use tinyot::bitlinalg::BitVec;
use tinyot::circuit::{random_circuit, Circuit, GateKind, OutputTo};
use tinyot::runtime::{evaluate, EvalOptions};
use tinyot::Role;

use common::{ideal_for, run_pair};

const HANDSHAKE_PAYLOAD: u64 = 1 + 2 + 2 + 16 + 32;

fn frame(payload: u64) -> u64 {
    5 + payload
}

fn bits(n: usize) -> u64 {
    4 + n.div_ceil(8) as u64
}

/// Bytes `role` sends and the number of AND batches, recomputed from the
/// circuit: a batch closes when a gate reads a pending AND output and at
/// every chunk end.
fn expected(c: &Circuit, role: Role, kappa: usize, chunk: usize) -> (u64, usize) {
    let mut total = frame(HANDSHAKE_PAYLOAD) + frame(bits(c.header.inputs[role.index()]));
    let mut batches = 0;
    let mut pending = HashSet::new();
    let mut close = |pending: &mut HashSet<u32>, total: &mut u64| {
        if !pending.is_empty() {
            *total += frame(bits(4 * pending.len())) + frame(bits(pending.len()));
            batches += 1;
            pending.clear();
        }
    };
    for gates in c.gates.chunks(chunk) {
        for g in gates {
            if g.in_wires().iter().any(|w| pending.contains(w)) {
                close(&mut pending, &mut total);
            }
            if g.kind == GateKind::And {
                pending.insert(g.out);
            }
        }
        close(&mut pending, &mut total);
    }
    let to_peer = c.header.output_to.iter().filter(|t| t.includes(role.peer())).count();
    total += frame(bits(kappa)) + frame(bits(to_peer * (1 + kappa)));
    (total, batches)
}

#[test]
fn online_bytes_follow_the_reveal_schedule_exactly() {
    let mut rng = ChaCha20Rng::seed_from_u64(21);
    for (case, (gates, chunk, to)) in [
        (300, 1024, OutputTo::Both),
        (300, 7, OutputTo::Bob),
        (500, 64, OutputTo::Alice),
        (40, 1, OutputTo::Both),
    ]
    .into_iter()
    .enumerate()
    {
        let kappa = [128, 64, 40, 8][case];
        let c = random_circuit(&mut rng, 9, 5, gates, 6).with_outputs_to(to);
        let (xa, xb) = (BitVec::random(9, &mut rng), BitVec::random(5, &mut rng));
        let (mut sa, mut sb) = ideal_for(&c, kappa, &mut rng);
        let opts = EvalOptions { chunk, ..EvalOptions::default() };
        let (ra, rb) = run_pair(
            |ch| evaluate(ch, &c, &xa, &mut sa, &opts),
            |ch| evaluate(ch, &c, &xb, &mut sb, &opts),
        );
        let (ra, rb) = (ra.unwrap(), rb.unwrap());
        let (ea, batches) = expected(&c, Role::Alice, kappa, chunk);
        let (eb, _) = expected(&c, Role::Bob, kappa, chunk);
        assert_eq!(ra.stats.bytes_sent, ea, "case {case}");
        assert_eq!(rb.stats.bytes_sent, eb, "case {case}");
        assert_eq!(ra.stats.bytes_received, eb, "case {case}");
        assert_eq!(ra.stats.batches, batches, "case {case}");
        assert_eq!(ra.stats.announced_bits, 5 * c.and_count());
        assert_eq!(rb.stats.announced_bits, 5 * c.and_count());
    }
}

#[test]
fn xor_only_circuits_use_no_and_material() {
    let text = "3 7\n2 2 2\n1 1\n\n2 1 0 2 4 XOR\n2 1 1 3 5 XOR\n2 1 4 5 6 XOR\n";
    let c = Circuit::parse(text).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let (mut sa, mut sb) = ideal_for(&c, 32, &mut rng);
    let (xa, xb) = (BitVec::from_bools(&[true, false]), BitVec::from_bools(&[true, true]));
    let opts = EvalOptions::default();
    let (ra, rb) = run_pair(
        |ch| evaluate(ch, &c, &xa, &mut sa, &opts),
        |ch| evaluate(ch, &c, &xb, &mut sb, &opts),
    );
    for r in [ra.unwrap(), rb.unwrap()] {
        assert_eq!(r.outputs, BitVec::from_bools(&[true]));
        assert_eq!(r.stats.consumed.aands, [0, 0]);
        assert_eq!(r.stats.consumed.aots, [0, 0]);
        assert_eq!(r.stats.batches, 0);
    }
}

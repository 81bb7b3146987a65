#![allow(dead_code)]

use std::thread;

use tinyot::circuit::Circuit;
use tinyot::dealer::ideal::ideal_stores;
use tinyot::dealer::{MaterialCounts, MaterialStore};
use tinyot::bitlinalg::BitVec;
use tinyot::runtime::{evaluate, EvalOptions, EvalOutput, FaultPlan};
use tinyot::transport::{memory_pair, MemoryChannel};
use tinyot::Result;

/// Runs `fa` as Alice and `fb` as Bob over a fresh in-memory channel. Each
/// endpoint is dropped as soon as its party returns.
pub fn run_pair<RA, RB>(
    fa: impl FnOnce(&MemoryChannel) -> RA + Send,
    fb: impl FnOnce(&MemoryChannel) -> RB + Send,
) -> (RA, RB)
where
    RA: Send,
    RB: Send,
{
    let (ca, cb) = memory_pair();
    thread::scope(|s| {
        let hb = s.spawn(move || {
            let r = fb(&cb);
            drop(cb);
            r
        });
        let ra = fa(&ca);
        drop(ca);
        (ra, hb.join().expect("bob thread panicked"))
    })
}

pub fn counts_for(circuit: &Circuit) -> MaterialCounts {
    MaterialCounts::for_circuit(circuit.and_count(), circuit.header.inputs[0], circuit.header.inputs[1])
}

pub fn ideal_for<R: rand::Rng>(circuit: &Circuit, kappa: usize, rng: &mut R) -> (MaterialStore, MaterialStore) {
    let sid: [u8; 16] = rng.random();
    ideal_stores(kappa, 40, counts_for(circuit), sid, rng)
}

/// Evaluates `circuit` on both sides with the given faults.
#[allow(clippy::too_many_arguments)]
pub fn eval_pair(
    circuit: &Circuit,
    xa: &BitVec,
    xb: &BitVec,
    mut sa: MaterialStore,
    mut sb: MaterialStore,
    fault_a: FaultPlan,
    fault_b: FaultPlan,
) -> (Result<EvalOutput>, Result<EvalOutput>) {
    let oa = EvalOptions { fault: fault_a, ..EvalOptions::default() };
    let ob = EvalOptions { fault: fault_b, ..EvalOptions::default() };
    run_pair(
        |ch| evaluate(ch, circuit, xa, &mut sa, &oa),
        |ch| evaluate(ch, circuit, xb, &mut sb, &ob),
    )
}

/// Three-standard-error check against a Bernoulli rate.
pub fn within_3_sigma(hits: u64, trials: u64, p: f64) -> bool {
    let rate = hits as f64 / trials as f64;
    (rate - p).abs() <= 3.0 * (p * (1.0 - p) / trials as f64).sqrt()
}

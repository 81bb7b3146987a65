use std::thread;
use std::time::Duration;

use clap::Args;
use rand::Rng;
use serde_json::json;
use tinyot::bitlinalg::BitVec;
use tinyot::circuit::aes::{aes128_circuit, aes_inputs};
use tinyot::circuit::{plain_eval, Circuit};
use tinyot::dealer::{deal, DealerConfig, MaterialCounts};
use tinyot::runtime::{evaluate, EvalOptions};
use tinyot::transport::{memory_pair, Channel};
use tinyot::Role;

use crate::{make_rng, CliError, CliResult};

#[derive(Args)]
pub struct BenchArgs {
    /// AES blocks to encrypt.
    #[arg(long, default_value_t = 1)]
    blocks: usize,
    #[arg(long, env = "TINYOT_PSI", default_value_t = 40)]
    psi: usize,
    #[arg(long, env = "TINYOT_KAPPA", default_value_t = 128)]
    kappa: usize,
    #[arg(long, env = "TINYOT_CHUNK", default_value_t = tinyot::circuit::DEFAULT_CHUNK)]
    chunk: usize,
    #[arg(long, env = "TINYOT_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    json: bool,
}

struct PartyRun {
    pre: Duration,
    online: Duration,
    outputs: Vec<BitVec>,
}

fn party(
    ch: &dyn Channel,
    role: Role,
    cfg: &DealerConfig,
    circuit: &Circuit,
    inputs: &[BitVec],
    seed: u64,
    chunk: usize,
) -> tinyot::Result<PartyRun> {
    let mut rng = make_rng(Some(seed));
    let (mut store, report) = deal(ch, role, cfg, rng.random(), &mut rng)?;
    let opts = EvalOptions { chunk, ..EvalOptions::default() };
    let mut online = Duration::ZERO;
    let mut outputs = Vec::with_capacity(inputs.len());
    for input in inputs {
        let out = evaluate(ch, circuit, input, &mut store, &opts)?;
        online += out.stats.elapsed;
        outputs.push(out.outputs);
    }
    Ok(PartyRun { pre: report.elapsed, online, outputs })
}

pub fn run(a: BenchArgs) -> CliResult {
    if a.blocks == 0 {
        return Err(CliError::Usage("--blocks must be positive".into()));
    }
    let circuit = aes128_circuit();
    let mut rng = make_rng(a.seed);
    let blocks: Vec<(BitVec, BitVec)> = (0..a.blocks)
        .map(|_| aes_inputs(&rng.random(), &rng.random(), &rng.random()))
        .collect();
    let (ins_a, ins_b): (Vec<_>, Vec<_>) = blocks.iter().cloned().unzip();
    let counts = MaterialCounts::for_circuit(
        a.blocks * circuit.and_count(),
        a.blocks * circuit.header.inputs[0],
        a.blocks * circuit.header.inputs[1],
    );
    let cfg = DealerConfig::new(a.kappa, a.psi, counts);
    let (seed_a, seed_b): (u64, u64) = (rng.random(), rng.random());
    let (ch_a, ch_b) = memory_pair();

    let (ra, rb) = thread::scope(|s| {
        let ha = s.spawn(|| party(&ch_a, Role::Alice, &cfg, &circuit, &ins_a, seed_a, a.chunk));
        let hb = s.spawn(|| party(&ch_b, Role::Bob, &cfg, &circuit, &ins_b, seed_b, a.chunk));
        (ha.join().expect("alice thread"), hb.join().expect("bob thread"))
    });
    let (ra, rb) = (ra?, rb?);

    for (i, ((x, y), got)) in blocks.iter().zip(&rb.outputs).enumerate() {
        if plain_eval(&circuit, x, y)? != *got {
            return Err(CliError::Failed(format!("block {i}: secure output differs from plain evaluation")));
        }
    }

    let g = a.blocks * circuit.gates.len();
    let pre = ra.pre.max(rb.pre).as_secs_f64();
    let onl = ra.online.max(rb.online).as_secs_f64();
    let tot = pre + onl;
    let rate = g as f64 / tot.max(1e-9);
    if a.json {
        let report = json!({
            "blocks": a.blocks,
            "gates": g,
            "sigma": a.psi,
            "kappa": a.kappa,
            "t_pre": pre,
            "t_onl": onl,
            "t_tot_per_block": tot / a.blocks as f64,
            "gates_per_second": rate,
            "checked": true,
        });
        println!("{report}");
    } else {
        println!("{:>6} {:>10} {:>4} {:>9} {:>9} {:>9} {:>9}", "l", "G", "sig", "T_pre", "T_onl", "T_tot/l", "G/T_tot");
        println!(
            "{:>6} {:>10} {:>4} {:>9.3} {:>9.3} {:>9.3} {:>9.0}",
            a.blocks,
            g,
            a.psi,
            pre,
            onl,
            tot / a.blocks as f64,
            rate
        );
        println!("all {} ciphertexts match plain evaluation", a.blocks);
    }
    Ok(())
}

//! `tinyot` command line entry point.

mod bench;
mod bounds;
mod net;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::json;
use tinyot::bitlinalg::BitVec;
use tinyot::circuit::{aes::aes128_circuit, Circuit};
use tinyot::dealer::{deal, DealerConfig, MaterialCounts, MaterialStore};
use tinyot::runtime::{evaluate, EvalOptions};
use tinyot::Role;

use net::NetArgs;

#[derive(Parser)]
#[command(name = "tinyot", version, about = "Actively secure two-party computation of Boolean circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the preprocessing protocol with the peer and save the material.
    Deal(DealArgs),
    /// Evaluate a Bristol circuit with the peer using saved material.
    Eval(EvalArgs),
    /// Deal and evaluate AES-128 blocks in one process and print timings.
    BenchAes(bench::BenchArgs),
    /// Check the combinatorial security bounds numerically.
    VerifyBounds(bounds::BoundsArgs),
    /// Write the generated AES-128 circuit in Bristol format.
    GenAes(GenAesArgs),
}

#[derive(Args)]
struct DealArgs {
    #[arg(long, env = "TINYOT_ROLE")]
    role: Role,
    #[command(flatten)]
    net: NetArgs,
    /// Statistical security parameter.
    #[arg(long, env = "TINYOT_PSI", default_value_t = 40)]
    psi: usize,
    /// Computational security parameter (MAC and key length).
    #[arg(long, env = "TINYOT_KAPPA", default_value_t = 128)]
    kappa: usize,
    /// Number of AND gates to provision for.
    #[arg(long, required_unless_present = "circuit", conflicts_with = "circuit")]
    gates: Option<usize>,
    #[arg(long, default_value_t = 0, conflicts_with = "circuit")]
    inputs_alice: usize,
    #[arg(long, default_value_t = 0, conflicts_with = "circuit")]
    inputs_bob: usize,
    /// Size the material for this Bristol circuit.
    #[arg(long)]
    circuit: Option<PathBuf>,
    /// Override the bucket size of both combiners.
    #[arg(long)]
    bucket: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    /// Overwrite an existing material file.
    #[arg(long)]
    force: bool,
    /// RNG seed; OS entropy when absent.
    #[arg(long, env = "TINYOT_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, env = "TINYOT_ROLE")]
    role: Role,
    #[command(flatten)]
    net: NetArgs,
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long)]
    material: PathBuf,
    /// Our input bits as hex, least significant bit of each byte first.
    #[arg(long, default_value = "")]
    input: String,
    /// AND gates per batch.
    #[arg(long, env = "TINYOT_CHUNK", default_value_t = tinyot::circuit::DEFAULT_CHUNK)]
    chunk: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GenAesArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    force: bool,
}

/// Failures with their process exit codes.
#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] tinyot::Error),
    #[error("{0}")]
    Failed(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use tinyot::Error as E;
        match self {
            CliError::Usage(_) => 3,
            CliError::Failed(_) => 1,
            CliError::Core(e) if e.is_abort() => 2,
            CliError::Core(e) => match e.root() {
                E::Usage(_) | E::Circuit(_) => 3,
                E::OutOfMaterial(_) => 4,
                _ => 1,
            },
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 3 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Deal(a) => cmd_deal(a),
        Command::Eval(a) => cmd_eval(a),
        Command::BenchAes(a) => bench::run(a),
        Command::VerifyBounds(a) => bounds::run(a),
        Command::GenAes(a) => cmd_gen_aes(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub(crate) fn make_rng(seed: Option<u64>) -> ChaCha20Rng {
    match seed {
        Some(s) => ChaCha20Rng::seed_from_u64(s),
        None => ChaCha20Rng::from_os_rng(),
    }
}

fn load_circuit(path: &Path) -> CliResult<Circuit> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read circuit {}: {e}", path.display())))?;
    Ok(Circuit::parse(&text)?)
}

fn refuse_overwrite(path: &Path, force: bool) -> CliResult {
    if path.exists() && !force {
        return Err(CliError::Usage(format!("{} exists; pass --force to overwrite", path.display())));
    }
    Ok(())
}

fn cmd_deal(a: DealArgs) -> CliResult {
    refuse_overwrite(&a.out, a.force)?;
    let counts = match &a.circuit {
        Some(path) => {
            let c = load_circuit(path)?;
            MaterialCounts::for_circuit(c.and_count(), c.header.inputs[0], c.header.inputs[1])
        }
        None => MaterialCounts::for_circuit(a.gates.unwrap_or(0), a.inputs_alice, a.inputs_bob),
    };
    let mut cfg = DealerConfig::new(a.kappa, a.psi, counts);
    if let Some(b) = a.bucket {
        cfg = cfg.with_bucket(b);
    }
    let mut rng = make_rng(a.seed);
    let session_id: [u8; 16] = rand::Rng::random(&mut rng);
    let ch = a.net.open(a.role)?;
    let (store, report) = deal(&ch, a.role, &cfg, session_id, &mut rng)?;
    store.save(&a.out, a.force)?;

    if a.json {
        let report = json!({
            "role": a.role.to_string(),
            "kappa": a.kappa,
            "psi": a.psi,
            "abits": report.counts.abits,
            "aands": report.counts.aands,
            "aots": report.counts.aots,
            "aot_buckets": report.aot_buckets,
            "aand_buckets": report.aand_buckets,
            "seed_ots": report.seed_ots,
            "bytes_sent": report.bytes_sent,
            "seconds": report.elapsed.as_secs_f64(),
            "out": a.out.display().to_string(),
        });
        println!("{report}");
    } else {
        let c = &report.counts;
        println!("role {} kappa {} psi {}", a.role, a.kappa, a.psi);
        println!("aBits {:?}  aANDs {:?}  aOTs {:?}", c.abits, c.aands, c.aots);
        println!("buckets: aOT {:?}  aAND {:?}", report.aot_buckets, report.aand_buckets);
        println!(
            "seed OTs {}  sent {} bytes  T_pre {:.3} s",
            report.seed_ots,
            report.bytes_sent,
            report.elapsed.as_secs_f64()
        );
        println!("wrote {}", a.out.display());
    }
    Ok(())
}

/// Parses hex into exactly `n` bits; bits past `n` in the last byte must be 0.
fn parse_input(hex_str: &str, n: usize) -> CliResult<BitVec> {
    let bytes = hex::decode(hex_str.trim()).map_err(|e| CliError::Usage(format!("--input: {e}")))?;
    if bytes.len() != n.div_ceil(8) {
        return Err(CliError::Usage(format!(
            "--input must be {} hex bytes for {n} input bits, got {}",
            n.div_ceil(8),
            bytes.len()
        )));
    }
    BitVec::from_bytes(&bytes, n).map_err(|e| CliError::Usage(format!("--input: {e}")))
}

fn cmd_eval(a: EvalArgs) -> CliResult {
    let circuit = load_circuit(&a.circuit)?;
    let mut store = MaterialStore::load(&a.material)?;
    if store.role() != a.role {
        return Err(CliError::Usage(format!("material belongs to {}, not {}", store.role(), a.role)));
    }
    let input = parse_input(&a.input, circuit.header.inputs[a.role.index()])?;
    let ch = a.net.open(a.role)?;
    let opts = EvalOptions { chunk: a.chunk, ..EvalOptions::default() };
    let out = evaluate(&ch, &circuit, &input, &mut store, &opts)?;

    let gates = circuit.gates.len();
    let secs = out.stats.elapsed.as_secs_f64();
    let rate = out.stats.gates_per_second(gates);
    let hex_out = hex::encode(out.outputs.to_bytes());
    if a.json {
        let report = json!({
            "role": a.role.to_string(),
            "output": hex_out,
            "output_bits": out.outputs.len(),
            "gates": gates,
            "and_gates": out.stats.and_gates,
            "seconds": secs,
            "gates_per_second": rate,
            "bytes_sent": out.stats.bytes_sent,
            "bytes_received": out.stats.bytes_received,
        });
        println!("{report}");
    } else {
        if out.outputs.is_empty() {
            println!("output: (none)");
        } else {
            println!("output: {hex_out}");
        }
        println!("T_onl {secs:.3} s  G {gates}  G/T {rate:.0} gates/s");
    }
    Ok(())
}

fn cmd_gen_aes(a: GenAesArgs) -> CliResult {
    refuse_overwrite(&a.out, a.force)?;
    fs::write(&a.out, aes128_circuit().to_bristol())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_parsing() {
        let v = parse_input("0501", 9).unwrap();
        assert_eq!(v.iter().collect::<Vec<_>>(), [true, false, true, false, false, false, false, false, true]);
        assert!(parse_input("0502", 9).is_err());
        assert!(parse_input("05", 9).is_err());
        assert!(parse_input("zz", 8).is_err());
        assert!(parse_input("", 0).unwrap().is_empty());
    }

    #[test]
    fn exit_codes() {
        use tinyot::error::MaterialKind;
        assert_eq!(CliError::Core(tinyot::Abort::MacCheck.into()).exit_code(), 2);
        assert_eq!(CliError::Core(tinyot::Error::OutOfMaterial(MaterialKind::Aand)).exit_code(), 4);
        assert_eq!(CliError::Usage("x".into()).exit_code(), 3);
        assert_eq!(CliError::Core(tinyot::Error::Protocol("x".into())).exit_code(), 1);
    }
}

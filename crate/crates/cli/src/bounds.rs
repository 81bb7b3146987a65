use clap::Args;
use serde_json::json;
use tinyot::leakage::{
    bucket_fail_mc, bucket_fail_prob, leak_bits, leakage_game_success, log2_alpha_prime,
    log2_alpha_prime_bound, span_fail_rate, LeakageSpec, Outcome,
};

use crate::{make_rng, CliError, CliResult};

#[derive(Args)]
pub struct BoundsArgs {
    /// Monte Carlo trials per estimate.
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    /// Tolerance in standard errors for Monte Carlo comparisons.
    #[arg(long, default_value_t = 3.0)]
    sigmas: f64,
    #[arg(long, env = "TINYOT_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    json: bool,
}

struct Check {
    name: String,
    pass: bool,
    detail: String,
}

pub fn run(a: BoundsArgs) -> CliResult {
    if a.trials == 0 {
        return Err(CliError::Usage("--trials must be positive".into()));
    }
    let mut rng = make_rng(a.seed);
    let mut checks = Vec::new();
    let mut push = |name: String, pass: bool, detail: String| checks.push(Check { name, pass, detail });

    let mixed = LeakageSpec::new(
        4,
        vec![
            Outcome { prob: 0.5, leaked: vec![], undetected: true },
            Outcome { prob: 0.5, leaked: vec![0], undetected: true },
        ],
    )?;
    for (name, spec, leak) in [
        ("no leakage", LeakageSpec::always(4, 0), 0.0),
        ("always leak 2", LeakageSpec::always(4, 2), 2.0),
        ("mixed", mixed, 1.5f64.log2()),
    ] {
        let got = leak_bits(&spec);
        push(format!("leak_bits {name}"), (got - leak).abs() < 1e-12, format!("{got:.6} vs {leak:.6}"));
        let target = 2f64.powf(leak - spec.tau as f64);
        let est = leakage_game_success(&spec, a.trials, &mut rng);
        push(
            format!("game rate {name}"),
            est.within(target, a.sigmas, a.trials),
            format!("{:.5} vs {target:.5}", est.value),
        );
    }

    for b in 2..=4u64 {
        for ell in [4u64, 8, 16] {
            for gamma in b..=2 * b {
                let alpha = bucket_fail_prob(gamma, ell, b)?;
                let est = bucket_fail_mc(gamma, ell, b, a.trials, &mut rng)?;
                push(
                    format!("bucket B={b} l={ell} gamma={gamma}"),
                    est.within(alpha, a.sigmas, a.trials),
                    format!("mc {:.3e} vs alpha {alpha:.3e}", est.value),
                );
            }
        }
    }

    let mut grid_ok = true;
    for b in 2..=6u64 {
        for k in 4..=12 {
            let ell = 1u64 << k;
            grid_ok &= log2_alpha_prime(ell, b)? <= log2_alpha_prime_bound(ell, b) + 1e-9;
        }
    }
    push("alpha' <= (2l)^(1-B) grid".into(), grid_ok, "B 2..6, l 2^4..2^12".into());
    let big = log2_alpha_prime(1 << 20, 6)?;
    push("alpha'(6, 2^20) <= 2^-100".into(), big <= -100.0, format!("log2 = {big:.2}"));

    let rate = span_fail_rate(8, 36, a.trials, &mut rng)?;
    push("span psi=8 n=36 <= 2^-7".into(), rate <= 2f64.powi(-7), format!("rate {rate:.3e}"));

    let failed = checks.iter().filter(|c| !c.pass).count();
    if a.json {
        let list: Vec<_> = checks
            .iter()
            .map(|c| json!({ "name": c.name, "pass": c.pass, "detail": c.detail }))
            .collect();
        println!("{}", json!({ "checks": list, "failed": failed }));
    } else {
        for c in &checks {
            println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        println!("{} checks, {failed} failed", checks.len());
    }
    if failed > 0 {
        return Err(CliError::Failed(format!("{failed} bound checks failed")));
    }
    Ok(())
}

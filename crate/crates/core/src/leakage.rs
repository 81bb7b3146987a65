//! Numeric oracles for the combinatorial security bounds: leakage
//! functions, bucket failure probabilities and random spanning sets.

use rand::seq::index::sample;
use rand::Rng;
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};

/// A leakage function given as an explicit distribution over outcomes
/// `(S, c)`: the leaked positions `S` of a `tau`-bit key and whether the
/// cheat goes unnoticed (`c`).
#[derive(Debug, Clone, PartialEq)]
pub struct LeakageSpec {
    pub tau: usize,
    pub outcomes: Vec<Outcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub prob: f64,
    pub leaked: Vec<usize>,
    pub undetected: bool,
}

impl LeakageSpec {
    pub fn new(tau: usize, outcomes: Vec<Outcome>) -> Result<Self> {
        let total: f64 = outcomes.iter().map(|o| o.prob).sum();
        if (total - 1.0).abs() > 1e-9 || outcomes.iter().any(|o| o.prob < 0.0) {
            return Err(Error::Usage(format!("outcome probabilities sum to {total}")));
        }
        if tau > 64 {
            return Err(Error::Usage("tau above 64 is not supported".into()));
        }
        for o in &outcomes {
            if o.leaked.iter().any(|&i| i >= tau) {
                return Err(Error::Usage("leaked position outside the key".into()));
            }
        }
        Ok(LeakageSpec { tau, outcomes })
    }

    /// Leaks the same `s` positions every time and is never caught.
    pub fn always(tau: usize, s: usize) -> Self {
        LeakageSpec { tau, outcomes: vec![Outcome { prob: 1.0, leaked: (0..s).collect(), undetected: true }] }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &Outcome {
        let mut u: f64 = rng.random();
        for o in &self.outcomes {
            if u < o.prob {
                return o;
            }
            u -= o.prob;
        }
        self.outcomes.last().expect("at least one outcome")
    }
}

/// `log2 E[c * 2^|S|]`, computed exactly.
pub fn leak_bits(spec: &LeakageSpec) -> f64 {
    spec.outcomes
        .iter()
        .filter(|o| o.undetected)
        .map(|o| o.prob * 2f64.powi(o.leaked.len() as i32))
        .sum::<f64>()
        .log2()
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    fn from_sums(sum: f64, sum_sq: f64, n: u64) -> Self {
        let n = n as f64;
        let mean = sum / n;
        let var = (sum_sq / n - mean * mean).max(0.0);
        Estimate { value: mean, stderr: (var / n).sqrt() }
    }

    /// Whether `target` lies within `k` standard errors, with the standard
    /// error of a Bernoulli(`target`) rate as a floor.
    pub fn within(&self, target: f64, k: f64, trials: u64) -> bool {
        let floor = (target * (1.0 - target) / trials as f64).sqrt();
        (self.value - target).abs() <= k * self.stderr.max(floor)
    }
}

/// Leakage of a sampleable function, estimated from `trials` draws. The
/// estimate is of `E[c * 2^|S|]` on a log scale; `stderr` refers to the
/// linear-scale mean.
pub fn leak_bits_sampled<R, F>(mut draw: F, trials: u64, rng: &mut R) -> Estimate
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> (usize, bool),
{
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..trials {
        let (s, c) = draw(rng);
        let x = if c { 2f64.powi(s as i32) } else { 0.0 };
        sum += x;
        sum_sq += x * x;
    }
    let e = Estimate::from_sums(sum, sum_sq, trials);
    Estimate { value: e.value.log2(), stderr: e.stderr }
}

/// Plays the key-guessing game `trials` times against the best adversary:
/// it learns the leaked key bits and guesses the others. Detection is a loss.
pub fn leakage_game_success<R: Rng + ?Sized>(spec: &LeakageSpec, trials: u64, rng: &mut R) -> Estimate {
    let full = if spec.tau == 64 { u64::MAX } else { (1u64 << spec.tau) - 1 };
    let mut wins = 0u64;
    for _ in 0..trials {
        let key: u64 = rng.random::<u64>() & full;
        let o = spec.sample(rng);
        if !o.undetected {
            continue;
        }
        let known: u64 = o.leaked.iter().fold(0, |m, &i| m | (1 << i));
        let guess = (key & known) | (rng.random::<u64>() & !known & full);
        wins += (guess == key) as u64;
    }
    Estimate::from_sums(wins as f64, wins as f64, trials)
}

fn check_bucket_domain(gamma: u64, ell: u64, b: u64) -> Result<()> {
    if b == 0 || ell == 0 || gamma > b * ell {
        return Err(Error::Usage(format!("need 0 <= gamma <= B*ell, got gamma={gamma} ell={ell} B={b}")));
    }
    Ok(())
}

/// `log2` of the probability that some bucket consists only of leaky items
/// when `gamma` leaky items survive a check that catches each with
/// probability 1/2 and `B * ell` items are bucketed at random.
pub fn log2_bucket_fail_prob(gamma: u64, ell: u64, b: u64) -> Result<f64> {
    check_bucket_domain(gamma, ell, b)?;
    if gamma < b {
        return Ok(f64::NEG_INFINITY);
    }
    let ln = ln_binomial(gamma, b) + (ell as f64).ln() - ln_binomial(b * ell, b);
    Ok(-(gamma as f64) + ln / std::f64::consts::LN_2)
}

pub fn bucket_fail_prob(gamma: u64, ell: u64, b: u64) -> Result<f64> {
    Ok(log2_bucket_fail_prob(gamma, ell, b)?.exp2())
}

/// Simulation of [`bucket_fail_prob`]: each trial keeps the `gamma` leaky
/// items only if all survive a fair coin, then buckets all items uniformly
/// and counts buckets made only of leaky items.
pub fn bucket_fail_mc<R: Rng + ?Sized>(gamma: u64, ell: u64, b: u64, trials: u64, rng: &mut R) -> Result<Estimate> {
    check_bucket_domain(gamma, ell, b)?;
    let (n, g, bs) = ((b * ell) as usize, gamma as usize, b as usize);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    let mut fill = vec![0usize; ell as usize];
    for _ in 0..trials {
        if (0..g).any(|_| rng.random::<bool>()) {
            continue;
        }
        fill.iter_mut().for_each(|f| *f = 0);
        for pos in sample(rng, n, g).iter() {
            fill[pos / bs] += 1;
        }
        let full = fill.iter().filter(|&&f| f == bs).count() as f64;
        sum += full;
        sum_sq += full * full;
    }
    Ok(Estimate::from_sums(sum, sum_sq, trials))
}

/// `log2 max_gamma alpha(gamma, ell, B)`.
pub fn log2_alpha_prime(ell: u64, b: u64) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    let mut prev = f64::NEG_INFINITY;
    for gamma in b..=b * ell {
        let v = log2_bucket_fail_prob(gamma, ell, b)?;
        best = best.max(v);
        // The step ratio (gamma+1) / (2(gamma+1-B)) only falls, so the first
        // descent past 2B ends the scan.
        if gamma > 2 * b && v < prev {
            break;
        }
        prev = v;
    }
    Ok(best)
}

/// `log2 (2 ell)^(1-B)`.
pub fn log2_alpha_prime_bound(ell: u64, b: u64) -> f64 {
    (1.0 - b as f64) * (2.0 * ell as f64).log2()
}

/// Number of random vectors used for spanning: `ceil(9 psi / 2)`.
pub fn default_span_count(psi: usize) -> usize {
    (9 * psi).div_ceil(2)
}

/// Rank over GF(2) of vectors packed in the low bits of each word.
pub fn rank_u64(vectors: &[u64]) -> usize {
    let mut basis = [0u64; 64];
    let mut rank = 0;
    for &v in vectors {
        let mut x = v;
        while x != 0 {
            let top = 63 - x.leading_zeros() as usize;
            if basis[top] == 0 {
                basis[top] = x;
                rank += 1;
                break;
            }
            x ^= basis[top];
        }
    }
    rank
}

/// Fraction of trials in which `n` uniform `psi`-bit vectors fail to span.
pub fn span_fail_rate<R: Rng + ?Sized>(psi: usize, n: usize, trials: u64, rng: &mut R) -> Result<f64> {
    if psi == 0 || psi > 64 {
        return Err(Error::Usage(format!("psi {psi} out of range 1..=64")));
    }
    let mask = if psi == 64 { u64::MAX } else { (1u64 << psi) - 1 };
    let mut vecs = vec![0u64; n];
    let mut fails = 0u64;
    for _ in 0..trials {
        vecs.iter_mut().for_each(|v| *v = rng.random::<u64>() & mask);
        fails += (rank_u64(&vecs) < psi) as u64;
    }
    Ok(fails as f64 / trials as f64)
}

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::eca::{step_program, WordProgram};
use crate::error::{Error, Result};
use crate::generation::Generation;
use crate::rule::RuleTable;

pub const MIN_BATTERY_BITS: usize = 1024;

/// State of the center cell `width / 2` at steps `1..=n_bits`.
pub fn middle_column_bits(rule: &RuleTable, init: &Generation, n_bits: usize) -> Result<Vec<bool>> {
    let width = init.width();
    if width <= 2 * n_bits + 1 {
        return Err(Error::LatticeTooNarrow(format!(
            "{n_bits} middle-column bits need a width above {}, got {width}",
            2 * n_bits + 1
        )));
    }
    let center = width / 2;
    let program = WordProgram::synthesize(rule);
    let mut g = init.clone();
    let mut bits = Vec::with_capacity(n_bits);
    for _ in 0..n_bits {
        g = step_program(&g, &program);
        bits.push(g.get(center));
    }
    Ok(bits)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomnessReport {
    pub n_bits: usize,
    /// `(2·ones − n) / √n`.
    pub monobit_z: f64,
    /// Lag-1 autocorrelation of the ±1-mapped sequence (1 for a constant sequence).
    pub lag1_autocorrelation: f64,
    /// Wald–Wolfowitz runs statistic (0 when only one symbol occurs).
    pub runs_z: f64,
    /// Upper-tail p-value of the χ² statistic over the 256 byte values.
    pub block_chi2_pvalue: f64,
    /// Period of the second half of the sequence, when it repeats at least twice.
    pub period_found: Option<usize>,
}

pub fn randomness_battery(bits: &[bool]) -> Result<RandomnessReport> {
    let n = bits.len();
    if n < MIN_BATTERY_BITS {
        return Err(Error::Precondition(format!(
            "randomness battery needs at least {MIN_BATTERY_BITS} bits, got {n}"
        )));
    }
    let nf = n as f64;
    let ones = bits.iter().filter(|&&b| b).count() as f64;
    let zeros = nf - ones;
    let monobit_z = (2.0 * ones - nf) / nf.sqrt();

    let signs: Vec<f64> = bits.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect();
    let mean = signs.iter().sum::<f64>() / nf;
    let var: f64 = signs.iter().map(|s| (s - mean).powi(2)).sum();
    let cov: f64 = signs.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
    let lag1_autocorrelation = if var == 0.0 { 1.0 } else { cov / var };

    let runs = 1 + bits.windows(2).filter(|w| w[0] != w[1]).count();
    let expected_runs = 2.0 * ones * zeros / nf + 1.0;
    let runs_var = (expected_runs - 1.0) * (expected_runs - 2.0) / (nf - 1.0);
    let runs_z = if runs_var > 0.0 {
        (runs as f64 - expected_runs) / runs_var.sqrt()
    } else {
        0.0
    };

    let mut histogram = [0u64; 256];
    for chunk in bits.chunks_exact(8) {
        let byte = chunk.iter().fold(0usize, |acc, &b| acc << 1 | b as usize);
        histogram[byte] += 1;
    }
    let blocks = (n / 8) as f64;
    let expected = blocks / 256.0;
    let chi2: f64 = histogram.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    let block_chi2_pvalue = ChiSquared::new(255.0).expect("positive dof").sf(chi2);

    Ok(RandomnessReport {
        n_bits: n,
        monobit_z,
        lag1_autocorrelation,
        runs_z,
        block_chi2_pvalue,
        period_found: tail_period(bits),
    })
}

/// Smallest `p` such that the second half of `bits` satisfies
/// `bits[i] = bits[i + p]` and repeats at least twice, via the prefix function.
fn tail_period(bits: &[bool]) -> Option<usize> {
    let tail = &bits[bits.len() / 2..];
    let m = tail.len();
    if m < 2 {
        return None;
    }
    let mut pi = vec![0usize; m];
    for i in 1..m {
        let mut k = pi[i - 1];
        while k > 0 && tail[i] != tail[k] {
            k = pi[k - 1];
        }
        if tail[i] == tail[k] {
            k += 1;
        }
        pi[i] = k;
    }
    let period = m - pi[m - 1];
    (2 * period <= m).then_some(period)
}

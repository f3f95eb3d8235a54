//! Timing and key-size tables over grids of `(s, p)`.

use std::fmt;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::numeric::{Nat, RandomSource};
use crate::systems::{encrypt, keygen, Message, Params, PublicKey, System, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    EncryptTime,
    DecryptTime,
    KeygenTime,
    KeySize,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::EncryptTime => "encrypt_time",
            Metric::DecryptTime => "decrypt_time",
            Metric::KeygenTime => "keygen_time",
            Metric::KeySize => "key_size",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "encrypt_time" => Ok(Metric::EncryptTime),
            "decrypt_time" => Ok(Metric::DecryptTime),
            "keygen_time" => Ok(Metric::KeygenTime),
            "key_size" => Ok(Metric::KeySize),
            other => Err(Error::Param(format!("unknown metric {other}"))),
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Metric::KeySize => "MB",
            _ => "s",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchTable {
    pub metric: Metric,
    pub system: System,
    pub s_values: Vec<usize>,
    pub p_values: Vec<Nat>,
    /// `cells[i][j]` is the value at `s_values[i]`, `p_values[j]`.
    pub cells: Vec<Vec<f64>>,
}

impl BenchTable {
    pub fn get(&self, s: usize, p: &Nat) -> Option<f64> {
        let i = self.s_values.iter().position(|&v| v == s)?;
        let j = self.p_values.iter().position(|v| v == p)?;
        Some(self.cells[i][j])
    }
}

fn short_p(p: &Nat) -> String {
    let text = p.to_string();
    let zeros = text.len() - text.trim_end_matches('0').len();
    if text.starts_with('1') && text.len() == zeros + 1 && zeros >= 3 {
        format!("10^{zeros}")
    } else {
        text
    }
}

impl fmt::Display for BenchTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# system {} {} ({})", self.system, self.metric.name(), self.metric.unit())?;
        let cell = |v: f64| match self.metric {
            Metric::KeySize => format!("{v:.3}"),
            _ => format!("{v:.3e}"),
        };
        let headers: Vec<String> = std::iter::once("s \\ p".to_string()).chain(self.p_values.iter().map(short_p)).collect();
        let rows: Vec<Vec<String>> = self
            .s_values
            .iter()
            .zip(&self.cells)
            .map(|(s, r)| std::iter::once(s.to_string()).chain(r.iter().map(|&v| cell(v))).collect())
            .collect();
        let widths: Vec<usize> = (0..headers.len())
            .map(|c| rows.iter().map(|r| r[c].len()).chain([headers[c].len()]).max().unwrap_or(0))
            .collect();
        let line = |f: &mut fmt::Formatter<'_>, r: &[String]| {
            let parts: Vec<String> = r.iter().zip(&widths).map(|(v, w)| format!("{v:>w$}")).collect();
            writeln!(f, "{}", parts.join("  "))
        };
        line(f, &headers)?;
        for r in &rows {
            line(f, r)?;
        }
        Ok(())
    }
}

/// Public key size in megabytes, counting raw bit lengths.
pub fn key_size_mb(key: &PublicKey) -> f64 {
    key.bit_size() as f64 / 8.0e6
}

/// Median seconds per call of `f` over `trials` batches, after a warm-up.
/// Batches repeat `f` until they last at least `min_batch`.
pub fn median_time<F: FnMut()>(trials: usize, min_batch: Duration, mut f: F) -> f64 {
    let trials = trials.max(5);
    let start = Instant::now();
    f();
    let single = start.elapsed().max(Duration::from_nanos(50));
    let reps = (min_batch.as_nanos() / single.as_nanos()).clamp(1, 1_000_000) as usize;
    let mut samples: Vec<f64> = (0..trials)
        .map(|_| {
            let t = Instant::now();
            for _ in 0..reps {
                f();
            }
            t.elapsed().as_secs_f64() / reps as f64
        })
        .collect();
    samples.sort_by(|a, b| a.total_cmp(b));
    samples[samples.len() / 2]
}

const MIN_BATCH: Duration = Duration::from_millis(5);

/// Measures one cell.
pub fn measure(metric: Metric, params: &Params, trials: usize) -> Result<f64> {
    let kp = keygen(params)?;
    let mut rng = RandomSource::new(params.seed ^ 0x5eed);
    let messages: Vec<Message> = (0..16).map(|_| Message::random(params.s, params.alphabet, &mut rng)).collect();
    Ok(match metric {
        Metric::KeySize => key_size_mb(&kp.public),
        Metric::KeygenTime => median_time(trials, MIN_BATCH, || {
            std::hint::black_box(keygen(params).expect("parameters already validated"));
        }),
        Metric::EncryptTime => {
            let mut i = 0;
            median_time(trials, MIN_BATCH, || {
                i = (i + 1) % messages.len();
                std::hint::black_box(encrypt(&kp.public, &messages[i]).expect("valid message"));
            })
        }
        Metric::DecryptTime => {
            let cts = messages.iter().map(|m| encrypt(&kp.public, m)).collect::<Result<Vec<_>>>()?;
            let mut i = 0;
            median_time(trials, MIN_BATCH, || {
                i = (i + 1) % cts.len();
                std::hint::black_box(kp.private.decrypt(&cts[i]).expect("fresh ciphertext"));
            })
        }
    })
}

/// Fills an `s × p` table. Cells run one at a time so timings don't compete.
pub fn run_bench(
    metric: Metric,
    system: System,
    variant: Variant,
    s_list: &[usize],
    p_list: &[Nat],
    trials: usize,
    seed: u64,
) -> Result<BenchTable> {
    let cells = s_list
        .iter()
        .map(|&s| {
            p_list
                .iter()
                .map(|p| {
                    let params = Params::new(system, s, p.clone()).with_variant(variant).with_seed(seed);
                    measure(metric, &params, trials)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchTable { metric, system, s_values: s_list.to_vec(), p_values: p_list.to_vec(), cells })
}

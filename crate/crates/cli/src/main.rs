use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use knapforge::analysis::{
    count_superincreasing, density, density_closed_form, find_pseudokeys, rest_sum_bound, rest_sum_probability,
    uniqueness_experiment, RestSumMode, RestSumProbability,
};
use knapforge::bench::{run_bench, Metric};
use knapforge::chunk::{chunk_decrypt, chunk_encrypt, ChunkedCiphertext};
use knapforge::keyfile::{KeyBody, KeyFile};
use knapforge::lattice::{attack1, attack2, random_dyadic_matrix, stability_experiment};
use knapforge::reduction::{factor_via_problem4, BruteForceOracle};
use knapforge::{encrypt, keygen, Error, Execution, Message, Nat, Params, PrivateKey, PublicKey, RandomSource, System, Variant};

#[derive(Parser)]
#[command(name = "knapforge", version, about = "Knapsack cryptosystems and cryptanalysis experiments")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Global {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 2)]
    system: u8,
    #[arg(long, global = true, default_value_t = 1)]
    variant: u8,
    #[arg(long, global = true)]
    s: Option<usize>,
    /// Decimal, `10^k` or `1ek`.
    #[arg(long, global = true)]
    p: Option<String>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long = "in", global = true)]
    input: Option<PathBuf>,
    /// Exit with status 3 when decoding or an attack fails.
    #[arg(long, global = true)]
    strict: bool,
    /// Run data-parallel loops on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,
}

impl Global {
    fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }

    fn params(&self, alphabet: u32) -> anyhow::Result<Params> {
        let s = self.s.ok_or_else(|| Error::Param("--s is required".into()))?;
        let p = parse_nat(self.p.as_deref().ok_or_else(|| Error::Param("--p is required".into()))?)?;
        Ok(Params::new(System::from_id(self.system)?, s, p)
            .with_variant(Variant::from_id(self.variant)?)
            .with_alphabet(alphabet)
            .with_seed(self.seed))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a key pair, written to `<out>.pub` and `<out>.priv`.
    Keygen {
        #[arg(long = "M", default_value_t = 2)]
        alphabet: u32,
    },
    /// Encrypt a digit string, or a byte file given with --in.
    Encrypt {
        #[arg(long)]
        key: PathBuf,
        /// Digits such as `1011` or `2,0,1`.
        #[arg(long)]
        message: Option<String>,
    },
    /// Decrypt a ciphertext, or a chunked file given with --in.
    Decrypt {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        ct: Option<String>,
    },
    /// Density of a public key, or of a fresh key from --system/--s/--p.
    Density {
        #[arg(long)]
        key: Option<PathBuf>,
    },
    /// List the pseudo-keys of a public key.
    Pseudokeys {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        q_max: Option<String>,
        #[arg(long)]
        true_key: Option<String>,
    },
    #[command(subcommand)]
    Experiment(Experiment),
    /// Lattice attack on one ciphertext.
    Attack {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        ct: String,
        #[arg(long, value_enum, default_value_t = Method::Lll1)]
        method: Method,
    },
    /// Factor `n` through random pseudo-key subproblems.
    Reduce {
        #[arg(long)]
        n: String,
        #[arg(long = "eta", default_value_t = 0.05)]
        eta: f64,
        /// Oracle checks only prescribed rests and range.
        #[arg(long)]
        literal: bool,
    },
    /// Timing or key-size table over an s × p grid.
    Bench {
        #[arg(long, default_value = "key_size")]
        metric: String,
        #[arg(long, value_delimiter = ',', required = true)]
        s_list: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        p_list: Vec<String>,
        #[arg(long, default_value_t = 5)]
        trials: usize,
    },
}

#[derive(Subcommand)]
enum Experiment {
    /// Fraction of keys whose pseudo-key is unique.
    Uniqueness {
        #[arg(long)]
        p_lo: u64,
        #[arg(long)]
        p_hi: u64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Probability that s uniform rests mod q sum below q.
    Restsum {
        #[arg(long)]
        q: u64,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        mode: Mode,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// Count superincreasing sequences summing to t.
    CountSi {
        #[arg(long)]
        t: u64,
    },
    /// Compare attack 2 on x₀ and on q·x₀ + ε.
    Stability {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum Method {
    Lll1,
    Lll2,
}

#[derive(Copy, Clone, ValueEnum)]
enum Mode {
    Exact,
    Montecarlo,
}

/// Parameters of the stability experiment. Integers are strings so that
/// values beyond 64 bits survive.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StabilitySpec {
    m: String,
    x0: Vec<String>,
    eps: Vec<String>,
    q: Vec<String>,
}

/// Outcome that maps to exit status 3 under `--strict`.
struct Failure(String);

fn parse_nat(text: &str) -> Result<Nat, Error> {
    let bad = || Error::Param(format!("not a natural number: {text}"));
    let t = text.trim();
    let pow = |base: &str, exp: &str| -> Result<Nat, Error> {
        let b = Nat::from_str(base).map_err(|_| bad())?;
        let e = exp.parse::<u32>().map_err(|_| bad())?;
        Ok(b.pow(e))
    };
    if let Some((b, e)) = t.split_once('^') {
        return pow(b, e);
    }
    if let Some((m, e)) = t.split_once(['e', 'E']) {
        return Ok(Nat::from_str(m).map_err(|_| bad())? * pow("10", e)?);
    }
    if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    Nat::from_str(t).map_err(|_| bad())
}

fn parse_message(text: &str) -> Result<Message, Error> {
    let digits: Option<Vec<u32>> = if text.contains(',') {
        text.split(',').map(|d| d.trim().parse().ok()).collect()
    } else {
        text.chars().map(|c| c.to_digit(10)).collect()
    };
    digits.map(Message).ok_or_else(|| Error::Param(format!("bad message {text:?}")))
}

fn read_key(path: &Path) -> anyhow::Result<KeyFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(KeyFile::parse(&text)?)
}

fn read_public(path: &Path) -> anyhow::Result<PublicKey> {
    match read_key(path)?.body {
        KeyBody::Public(k) => Ok(k),
        KeyBody::Private(_) => Err(Error::Param(format!("{} holds a private key", path.display())).into()),
    }
}

fn read_private(path: &Path) -> anyhow::Result<PrivateKey> {
    match read_key(path)?.body {
        KeyBody::Private(k) => Ok(k),
        KeyBody::Public(_) => Err(Error::Param(format!("{} holds a public key", path.display())).into()),
    }
}

fn emit(g: &Global, text: &str) -> anyhow::Result<()> {
    match &g.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<Option<Failure>> {
    let g = &cli.global;
    match cli.command {
        Command::Keygen { alphabet } => {
            let params = g.params(alphabet)?;
            let out = g.out.clone().ok_or_else(|| Error::Param("--out <prefix> is required".into()))?;
            let kp = keygen(&params)?;
            let public = KeyFile::public(params.system, params.variant, Some(params.seed), kp.public);
            let private = KeyFile::private(params.variant, Some(params.seed), kp.private);
            let stem = out.to_string_lossy().into_owned();
            fs::write(format!("{stem}.pub"), public.serialize()).context("writing public key")?;
            fs::write(format!("{stem}.priv"), private.serialize()).context("writing private key")?;
            println!("wrote {stem}.pub {stem}.priv");
        }
        Command::Encrypt { key, message } => {
            let public = read_public(&key)?;
            match (message, &g.input) {
                (Some(m), None) => emit(g, &format!("{}\n", encrypt(&public, &parse_message(&m)?)?))?,
                (None, Some(path)) => {
                    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
                    emit(g, &chunk_encrypt(&public, &bytes, g.exec())?.serialize())?;
                }
                _ => bail!(Error::Param("give exactly one of --message or --in".into())),
            }
        }
        Command::Decrypt { key, ct } => {
            let private = read_private(&key)?;
            match (ct, &g.input) {
                (Some(ct), None) => match private.decrypt(&parse_nat(&ct)?) {
                    Ok(m) => emit(g, &format!("{m}\n"))?,
                    Err(e) => {
                        println!("FAILURE {e}");
                        return Ok(Some(Failure(e.to_string())));
                    }
                },
                (None, Some(path)) => {
                    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                    let chunks = ChunkedCiphertext::parse(&text)?;
                    match chunk_decrypt(&private, &chunks, g.exec()) {
                        Ok(bytes) => match &g.out {
                            Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))?,
                            None => std::io::Write::write_all(&mut std::io::stdout(), &bytes)?,
                        },
                        Err(e) => {
                            println!("FAILURE {e}");
                            return Ok(Some(Failure(e.to_string())));
                        }
                    }
                }
                _ => bail!(Error::Param("give exactly one of --ct or --in".into())),
            }
        }
        Command::Density { key } => {
            let (entries, expected) = match key {
                Some(path) => (read_public(&path)?.entries().to_vec(), None),
                None => {
                    let params = g.params(2)?;
                    let kp = keygen(&params)?;
                    let closed = density_closed_form(params.system, params.variant, params.s, &params.p);
                    (kp.public.entries().to_vec(), closed)
                }
            };
            let d = density(&entries)?;
            match expected {
                Some(c) => println!("density={d:.10} closed_form={c:.10}"),
                None => println!("density={d:.10}"),
            }
        }
        Command::Pseudokeys { key, q_max, true_key } => {
            let public = read_public(&key)?;
            let q_max = match q_max {
                Some(v) => parse_nat(&v)?,
                None => public.entries().iter().max().cloned().unwrap_or_default(),
            };
            let true_key = true_key.as_deref().map(parse_nat).transpose()?;
            let report = find_pseudokeys(&public, &q_max, true_key.as_ref());
            let mut text = String::new();
            for c in &report.candidates {
                let rests: Vec<String> = c.rests.iter().map(Nat::to_string).collect();
                text.push_str(&format!("{} {}\n", c.q, rests.join(" ")));
            }
            if let Some((lo, hi)) = &report.degenerate {
                text.push_str(&format!("degenerate {lo}..{hi}\n"));
            }
            text.push_str(&format!(
                "summary count={} unique={} contains_true_key={}\n",
                report.count(),
                report.unique,
                report.contains_true_key
            ));
            emit(g, &text)?;
        }
        Command::Experiment(Experiment::Uniqueness { p_lo, p_hi, trials }) => {
            let s = g.s.ok_or_else(|| Error::Param("--s is required".into()))?;
            let summary = uniqueness_experiment(s, p_lo, p_hi, trials, g.seed, g.exec())?;
            let mut text: String = summary.records.iter().map(|r| format!("{r}\n")).collect();
            text.push_str(&summary.summary_line());
            text.push('\n');
            emit(g, &text)?;
        }
        Command::Experiment(Experiment::Restsum { q, mode, trials }) => {
            let s = g.s.ok_or_else(|| Error::Param("--s is required".into()))?;
            let mode = match mode {
                Mode::Exact => RestSumMode::Exact,
                Mode::Montecarlo => RestSumMode::MonteCarlo { trials },
            };
            let p = rest_sum_probability(q, s, mode, &mut RandomSource::new(g.seed))?;
            let shown = match &p {
                RestSumProbability::Exact(r) => format!("{r}"),
                RestSumProbability::Estimate { hits, trials } => format!("{hits}/{trials}"),
            };
            println!("q={q} s={s} p={shown} value={:.6} bound={}", p.value(), rest_sum_bound(s));
        }
        Command::Experiment(Experiment::CountSi { t }) => {
            let s = g.s.ok_or_else(|| Error::Param("--s is required".into()))?;
            let (si, c) = count_superincreasing(s, t)?;
            println!("s={s} t={t} S={si} C={c}");
        }
        Command::Experiment(Experiment::Stability { spec, samples }) => {
            let text = fs::read_to_string(&spec).with_context(|| format!("reading {}", spec.display()))?;
            let spec: StabilitySpec = toml::from_str(&text).map_err(|e| Error::Param(format!("stability spec: {e}")))?;
            let nats = |v: &[String]| v.iter().map(|x| parse_nat(x)).collect::<Result<Vec<_>, _>>();
            let (x0, eps, qs) = (nats(&spec.x0)?, nats(&spec.eps)?, nats(&spec.q)?);
            let m = parse_message(&spec.m)?;
            let rows = stability_experiment(&m, &x0, &qs, &eps, samples, g.seed, g.exec())?;
            let mut out = String::from("q eps_over_q samples steps_match result_match transform_match\n");
            for r in rows {
                out.push_str(&format!(
                    "{} {:.3e} {} {} {} {}\n",
                    r.q, r.ratio, r.samples, r.steps_match, r.result_match, r.transform_match
                ));
            }
            emit(g, &out)?;
        }
        Command::Attack { key, ct, method } => {
            let public = read_public(&key)?;
            let ct = parse_nat(&ct)?;
            let outcome = match method {
                Method::Lll1 => attack1(&public, &ct)?,
                Method::Lll2 => {
                    let pert = random_dyadic_matrix(public.dim() + 1, &mut RandomSource::new(g.seed));
                    attack2(&public, &ct, &pert)?
                }
            };
            match &outcome.result {
                Some(m) => println!("result={m} lll_steps={} row={:?}", outcome.lll_steps, outcome.which_row),
                None => {
                    println!("result=FAILURE lll_steps={}", outcome.lll_steps);
                    return Ok(Some(Failure("attack failed".into())));
                }
            }
        }
        Command::Reduce { n, eta, literal } => {
            let n = parse_nat(&n)?;
            let s = g.s.unwrap_or(3);
            let oracle = if literal { BruteForceOracle::literal() } else { BruteForceOracle::default() };
            let report = factor_via_problem4(&n, s, eta, &mut RandomSource::new(g.seed), &oracle, g.exec())?;
            println!("{report}");
            if report.factor_found.is_none() {
                return Ok(Some(Failure("no factor found".into())));
            }
        }
        Command::Bench { metric, s_list, p_list, trials } => {
            let metric = Metric::parse(&metric)?;
            let p_list = p_list.iter().map(|p| parse_nat(p)).collect::<Result<Vec<_>, _>>()?;
            let table = run_bench(
                metric,
                System::from_id(g.system)?,
                Variant::from_id(g.variant)?,
                &s_list,
                &p_list,
                trials,
                g.seed,
            )?;
            emit(g, &table.to_string())?;
        }
    }
    Ok(None)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Decode(_) | Error::InvalidCiphertext(_) | Error::Block { .. }) => 3,
        Some(_) => 2,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let strict = cli.global.strict;
    match run(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(Failure(msg))) => {
            if strict {
                eprintln!("error: {msg}");
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

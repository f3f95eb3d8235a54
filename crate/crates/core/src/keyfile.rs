//! Plain-text key files.
//!
//! ```text
//! KNAPFORGE v1 <system> <pub|priv>
//! s=<s> M=<M> variant=<v> [seed=<u64>]
//! <one decimal integer per line>
//! ```
//!
//! Body order:
//!
//! - public key: `x[1..s]`
//! - system 1 private: `x_bound`, `σ[1..s]`, `τ[1..s]` (1-based images),
//!   `U` upper triangle row by row, `q[1..s]`, `p[1..s]`, `x0[1..s]`
//! - system 2 private: `σ[1..s]`, `ε[1..s]`, `q1`, `p1`, `x0[1..s]`
//! - system 3 private: `σ[1..s]` (order of `μ = ε₂ − ε₁`), `ε1[1..s]`,
//!   `ε2[1..s]`, `q1`, `p1`, `q2`, `p2`, `x0[1..s]`

use std::fmt::Write as _;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::numeric::{Nat, Permutation};
use crate::sis::{EpsilonMatrix, SuperincreasingRow};
use crate::systems::{PrivateKey, PrivateKey1, PrivateKey2, PrivateKey3, PublicKey, System, Variant};

const MAGIC: &str = "KNAPFORGE";
const VERSION: &str = "v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KeyBody {
    Public(PublicKey),
    Private(PrivateKey),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyFile {
    pub system: System,
    pub variant: Variant,
    pub seed: Option<u64>,
    pub body: KeyBody,
}

impl KeyFile {
    pub fn public(system: System, variant: Variant, seed: Option<u64>, key: PublicKey) -> Self {
        KeyFile { system, variant, seed, body: KeyBody::Public(key) }
    }

    pub fn private(variant: Variant, seed: Option<u64>, key: PrivateKey) -> Self {
        KeyFile { system: key.system(), variant, seed, body: KeyBody::Private(key) }
    }

    pub fn dim(&self) -> usize {
        match &self.body {
            KeyBody::Public(k) => k.dim(),
            KeyBody::Private(k) => k.dim(),
        }
    }

    pub fn alphabet(&self) -> u32 {
        match &self.body {
            KeyBody::Public(k) => k.alphabet(),
            KeyBody::Private(k) => k.alphabet(),
        }
    }

    pub fn role(&self) -> &'static str {
        match self.body {
            KeyBody::Public(_) => "pub",
            KeyBody::Private(_) => "priv",
        }
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC} {VERSION} {} {}", self.system, self.role());
        let _ = write!(out, "s={} M={} variant={}", self.dim(), self.alphabet(), self.variant.id());
        if let Some(seed) = self.seed {
            let _ = write!(out, " seed={seed}");
        }
        out.push('\n');
        let mut put = |v: &dyn std::fmt::Display| {
            let _ = writeln!(out, "{v}");
        };
        let perm = |p: &Permutation| p.images().iter().map(|&i| i + 1).collect::<Vec<_>>();
        match &self.body {
            KeyBody::Public(k) => k.entries().iter().for_each(|v| put(v)),
            KeyBody::Private(PrivateKey::One(k)) => {
                put(k.epsilon.x_bound());
                perm(k.epsilon.sigma()).iter().for_each(|v| put(v));
                perm(k.epsilon.tau()).iter().for_each(|v| put(v));
                k.epsilon.upper_entries().iter().for_each(|v| put(v));
                k.q.iter().chain(&k.p_mult).chain(&k.x0).for_each(|v| put(v));
            }
            KeyBody::Private(PrivateKey::Two(k)) => {
                perm(k.row.sigma()).iter().for_each(|v| put(v));
                k.row.eps().iter().for_each(|v| put(v));
                put(&k.q1);
                put(&k.p1);
                k.x0.iter().for_each(|v| put(v));
            }
            KeyBody::Private(PrivateKey::Three(k)) => {
                perm(k.mu.sigma()).iter().for_each(|v| put(v));
                k.eps1.iter().chain(&k.eps2).for_each(|v| put(v));
                for v in [&k.q1, &k.p1, &k.q2, &k.p2] {
                    put(v);
                }
                k.x0.iter().for_each(|v| put(v));
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<KeyFile> {
        let mut lines = text.split('\n');
        let header = lines.next().unwrap_or("");
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 4 || parts[0] != MAGIC {
            return Err(Error::parse(1, "expected `KNAPFORGE v1 <system> <pub|priv>`"));
        }
        if parts[1] != VERSION {
            return Err(Error::parse(1, format!("unsupported format version {}", parts[1])));
        }
        let system = parts[2]
            .parse::<u8>()
            .map_err(|_| Error::parse(1, format!("bad system id {}", parts[2])))
            .and_then(|id| System::from_id(id).map_err(|e| Error::parse(1, e.to_string())))?;
        let private = match parts[3] {
            "pub" => false,
            "priv" => true,
            other => return Err(Error::parse(1, format!("unknown role {other}"))),
        };

        let (s, alphabet, variant, seed) = parse_params(lines.next().ok_or_else(|| Error::parse(2, "missing parameter line"))?)?;
        let mut body = Reader { lines: lines.collect(), pos: 0 };

        let key = if !private {
            let entries = body.nats("x", s)?;
            KeyBody::Public(PublicKey::new(entries, alphabet).map_err(|e| Error::parse(3, e.to_string()))?)
        } else {
            if system != System::One && alphabet != 2 {
                return Err(Error::parse(2, format!("system {system} keys have M=2, got {alphabet}")));
            }
            let start = body.line_no();
            let wrap = |e: Error| Error::parse(start, e.to_string());
            KeyBody::Private(match system {
                System::One => {
                    let x_bound = body.nat("x_bound")?;
                    let sigma = body.perm("sigma", s)?;
                    let tau = body.perm("tau", s)?;
                    let upper = body.nats("U", s * (s + 1) / 2)?;
                    let q = body.nats("q", s)?;
                    let p_mult = body.nats("p", s)?;
                    let x0 = body.nats("x0", s)?;
                    let epsilon = EpsilonMatrix::from_parts(x_bound, sigma, tau, upper).map_err(wrap)?;
                    PrivateKey::One(PrivateKey1 { epsilon, q, p_mult, x0, alphabet })
                }
                System::Two => {
                    let sigma = body.perm("sigma", s)?;
                    let eps = body.nats("eps", s)?;
                    let q1 = body.nat("q1")?;
                    let p1 = body.nat("p1")?;
                    let x0 = body.nats("x0", s)?;
                    let row = SuperincreasingRow::new(eps, sigma).map_err(wrap)?;
                    PrivateKey::Two(PrivateKey2 { row, q1, p1, x0 })
                }
                System::Three => {
                    let sigma = body.perm("sigma", s)?;
                    let eps1 = body.nats("eps1", s)?;
                    let eps2 = body.nats("eps2", s)?;
                    let q1 = body.nat("q1")?;
                    let p1 = body.nat("p1")?;
                    let q2 = body.nat("q2")?;
                    let p2 = body.nat("p2")?;
                    let x0 = body.nats("x0", s)?;
                    if eps1.iter().zip(&eps2).any(|(a, b)| a > b) {
                        return Err(Error::parse(start, "eps2 must dominate eps1 entrywise"));
                    }
                    let mu: Vec<Nat> = eps1.iter().zip(&eps2).map(|(a, b)| b - a).collect();
                    let mu = SuperincreasingRow::new(mu, sigma).map_err(wrap)?;
                    PrivateKey::Three(PrivateKey3 { eps1, eps2, mu, q1, p1, q2, p2, x0 })
                }
            })
        };
        body.finish()?;
        if let KeyBody::Private(k) = &key {
            let moduli: Vec<&Nat> = match k {
                PrivateKey::One(k) => k.q.iter().chain(&k.p_mult).collect(),
                PrivateKey::Two(k) => vec![&k.q1, &k.p1],
                PrivateKey::Three(k) => vec![&k.q1, &k.p1, &k.q2, &k.p2],
            };
            if moduli.iter().any(|v| v.is_zero()) {
                return Err(Error::parse(3, "moduli q and p must be positive"));
            }
            if k.public_key().entries().iter().any(Zero::is_zero) {
                return Err(Error::parse(3, "private key yields a zero public entry"));
            }
        }
        Ok(KeyFile { system, variant, seed, body: key })
    }
}

fn parse_params(line: &str) -> Result<(usize, u32, Variant, Option<u64>)> {
    let mut s = None;
    let mut alphabet = None;
    let mut variant = None;
    let mut seed = None;
    for field in line.split_whitespace() {
        let (k, v) = field.split_once('=').ok_or_else(|| Error::parse(2, format!("expected key=value, got {field}")))?;
        let bad = || Error::parse(2, format!("bad value for {k}: {v}"));
        match k {
            "s" => s = Some(v.parse::<usize>().map_err(|_| bad())?),
            "M" => alphabet = Some(v.parse::<u32>().map_err(|_| bad())?),
            "variant" => {
                variant = Some(v.parse::<u8>().ok().and_then(|id| Variant::from_id(id).ok()).ok_or_else(bad)?)
            }
            "seed" => seed = Some(v.parse::<u64>().map_err(|_| bad())?),
            _ => return Err(Error::parse(2, format!("unknown field {k}"))),
        }
    }
    let s = s.ok_or_else(|| Error::parse(2, "missing field s"))?;
    if s == 0 {
        return Err(Error::parse(2, "s must be positive"));
    }
    let alphabet = alphabet.ok_or_else(|| Error::parse(2, "missing field M"))?;
    let variant = variant.ok_or_else(|| Error::parse(2, "missing field variant"))?;
    Ok((s, alphabet, variant, seed))
}

struct Reader<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl Reader<'_> {
    /// 1-based file line of the next body line.
    fn line_no(&self) -> usize {
        self.pos + 3
    }

    fn nat(&mut self, field: &str) -> Result<Nat> {
        let line = self.line_no();
        let token = match self.lines.get(self.pos) {
            Some(t) if !t.is_empty() || self.pos + 1 < self.lines.len() => *t,
            _ => return Err(Error::parse(line, format!("missing field {field}"))),
        };
        self.pos += 1;
        if token.is_empty() || !token.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::parse(line, format!("{field}: expected a decimal integer, got {token:?}")));
        }
        token.parse::<Nat>().map_err(|_| Error::parse(line, format!("{field}: bad integer {token:?}")))
    }

    fn nats(&mut self, field: &str, n: usize) -> Result<Vec<Nat>> {
        (0..n).map(|i| self.nat(&format!("{field}[{}]", i + 1))).collect()
    }

    fn perm(&mut self, field: &str, n: usize) -> Result<Permutation> {
        let line = self.line_no();
        let images = self
            .nats(field, n)?
            .into_iter()
            .map(|v| {
                usize::try_from(v)
                    .ok()
                    .and_then(|i| i.checked_sub(1))
                    .ok_or_else(|| Error::parse(line, format!("{field}: images are 1-based")))
            })
            .collect::<Result<Vec<_>>>()?;
        Permutation::new(images).map_err(|e| Error::parse(line, format!("{field}: {e}")))
    }

    fn finish(&self) -> Result<()> {
        let rest = &self.lines[self.pos..];
        if rest.iter().any(|l| !l.is_empty()) {
            return Err(Error::parse(self.line_no(), "unexpected trailing data"));
        }
        Ok(())
    }
}

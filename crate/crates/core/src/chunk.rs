//! Encrypting byte streams as a sequence of `s`-bit blocks.
//!
//! The input is read as a bit stream, most significant bit of each byte
//! first. Block `j` holds stream bits `j·s .. (j+1)·s`, with stream bit
//! `j·s + i` as message digit `i`; the last block is zero-padded. The byte
//! length travels alongside the blocks so padding can be dropped.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::numeric::Nat;
use crate::systems::{encrypt, Message, PrivateKey, PublicKey};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkedCiphertext {
    pub blocks: Vec<Nat>,
    pub len: usize,
}

impl ChunkedCiphertext {
    /// One decimal ciphertext per line followed by `len=<bytes>`.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for b in &self.blocks {
            let _ = writeln!(out, "{b}");
        }
        let _ = writeln!(out, "len={}", self.len);
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text.lines().collect();
        let (last, body) = lines.split_last().ok_or_else(|| Error::parse(1, "missing len trailer"))?;
        let len = last
            .strip_prefix("len=")
            .and_then(|v| v.parse::<usize>().ok())
            .ok_or_else(|| Error::parse(lines.len(), format!("expected len=<bytes>, got {last:?}")))?;
        let blocks = body
            .iter()
            .enumerate()
            .map(|(i, l)| {
                if l.is_empty() || !l.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(Error::parse(i + 1, format!("expected a decimal ciphertext, got {l:?}")));
                }
                l.parse::<Nat>().map_err(|_| Error::parse(i + 1, "bad ciphertext"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ChunkedCiphertext { blocks, len })
    }
}

fn bit(bytes: &[u8], k: usize) -> u32 {
    bytes.get(k / 8).map_or(0, |b| ((b >> (7 - k % 8)) & 1) as u32)
}

/// Splits `bytes` into `s`-bit messages.
pub fn to_blocks(bytes: &[u8], s: usize) -> Vec<Message> {
    let bits = bytes.len() * 8;
    let count = bits.div_ceil(s);
    (0..count).map(|j| Message((0..s).map(|i| bit(bytes, j * s + i)).collect())).collect()
}

/// Inverse of [`to_blocks`], keeping the first `len` bytes.
pub fn from_blocks(blocks: &[Message], len: usize) -> Result<Vec<u8>> {
    let mut out = vec![0u8; len];
    let mut k = 0usize;
    for block in blocks {
        for &d in block.digits() {
            if d > 1 {
                return Err(Error::Decode(format!("digit {d} in a binary block")));
            }
            if k < len * 8 && d == 1 {
                out[k / 8] |= 1 << (7 - k % 8);
            }
            k += 1;
        }
    }
    if k < len * 8 {
        return Err(Error::Decode(format!("{} bits decoded, {} bytes expected", k, len)));
    }
    Ok(out)
}

pub fn chunk_encrypt(key: &PublicKey, bytes: &[u8], exec: Execution) -> Result<ChunkedCiphertext> {
    if key.alphabet() != 2 {
        return Err(Error::Param(format!("chunking needs M = 2, key has M = {}", key.alphabet())));
    }
    let blocks = to_blocks(bytes, key.dim());
    let cts = exec.map_slice(&blocks, |m| encrypt(key, m)).into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ChunkedCiphertext { blocks: cts, len: bytes.len() })
}

pub fn chunk_decrypt(key: &PrivateKey, ct: &ChunkedCiphertext, exec: Execution) -> Result<Vec<u8>> {
    if key.alphabet() != 2 {
        return Err(Error::Param(format!("chunking needs M = 2, key has M = {}", key.alphabet())));
    }
    let s = key.dim();
    if ct.blocks.len() != (ct.len * 8).div_ceil(s) {
        return Err(Error::Shape(format!("{} blocks cannot carry {} bytes at s = {s}", ct.blocks.len(), ct.len)));
    }
    let messages = exec
        .map_indexed(ct.blocks.len(), |i| key.decrypt(&ct.blocks[i]).map_err(|e| Error::Block { index: i, source: Box::new(e) }))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    from_blocks(&messages, ct.len)
}

//! Toeplitz two-universal hashing.
//!
//! For input length n and output length m the matrix is defined by n + m − 1
//! random bits r: out_i = ⊕_j r[i + n − 1 − j]·x_j. Both bit strings are
//! packed into u64 words, so each output bit costs O(n/64).

use rand::RngCore;

use crate::error::{Error, Result};
use crate::rng::{stream, StreamRng};

fn pack(bits: impl ExactSizeIterator<Item = bool>) -> Vec<u64> {
    let mut words = vec![0u64; bits.len().div_ceil(64)];
    for (i, b) in bits.enumerate() {
        if b {
            words[i / 64] |= 1 << (i % 64);
        }
    }
    words
}

/// 64 bits of `words` starting at bit `off`, zero past the end.
#[inline]
fn window(words: &[u64], off: usize) -> u64 {
    let (w, s) = (off / 64, off % 64);
    let lo = words.get(w).copied().unwrap_or(0);
    if s == 0 {
        lo
    } else {
        let hi = words.get(w + 1).copied().unwrap_or(0);
        (lo >> s) | (hi << (64 - s))
    }
}

/// Hashes `bits` to `out_len` bits with the Toeplitz matrix seeded by `seed`.
pub fn toeplitz_hash(bits: &[bool], seed: u64, out_len: usize) -> Result<Vec<bool>> {
    let n = bits.len();
    if out_len > n {
        return Err(Error::Length(format!("output length {out_len} exceeds input length {n}")));
    }
    if out_len == 0 {
        return Ok(Vec::new());
    }
    let mut rng = StreamRng::new(seed, stream::HASH).sequential();
    let r_len = n + out_len - 1;
    let r: Vec<u64> = (0..r_len.div_ceil(64)).map(|_| rng.next_u64()).collect();
    let rev = pack(bits.iter().rev().copied());
    let last_mask = if n % 64 == 0 { u64::MAX } else { (1u64 << (n % 64)) - 1 };

    Ok((0..out_len)
        .map(|i| {
            let mut acc = 0u64;
            for (w, &x) in rev.iter().enumerate() {
                let mut win = window(&r, i + 64 * w);
                if w + 1 == rev.len() {
                    win &= last_mask;
                }
                acc ^= win & x;
            }
            acc.count_ones() % 2 == 1
        })
        .collect())
}

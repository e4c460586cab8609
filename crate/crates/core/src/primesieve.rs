//! Segmented sieve of Eratosthenes over `(a, b]`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_CEILING: u64 = 1 << 50;
/// Numbers covered by one segment (odd-only storage halves the bytes).
const SEGMENT_SPAN: u64 = 1 << 19;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimeBlock {
    pub lo: u64,
    pub hi: u64,
    /// Ascending primes in `(lo, hi]`.
    pub primes: Vec<u64>,
    /// `ln p` for each prime.
    pub logs: Vec<f64>,
}

impl PrimeBlock {
    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Sieve {
    pub ceiling: u64,
}

impl Default for Sieve {
    fn default() -> Self {
        Self {
            ceiling: DEFAULT_CEILING,
        }
    }
}

impl Sieve {
    /// Primes in the integer range `(floor a, floor b]`.
    pub fn segment(&self, a: f64, b: f64) -> Result<PrimeBlock> {
        if !(a.is_finite() && b.is_finite() && a >= 0.0 && a < b) {
            return Err(Error::InvalidRange { a, b });
        }
        if b > self.ceiling as f64 {
            return Err(Error::RangeTooLarge {
                bound: b.min(u64::MAX as f64) as u64,
                ceiling: self.ceiling,
            });
        }
        self.range(a.floor() as u64, b.floor() as u64)
    }

    /// Primes in `(lo, hi]`.
    pub fn range(&self, lo: u64, hi: u64) -> Result<PrimeBlock> {
        if hi > self.ceiling {
            return Err(Error::RangeTooLarge {
                bound: hi,
                ceiling: self.ceiling,
            });
        }
        if lo >= hi {
            return Ok(PrimeBlock {
                lo,
                hi,
                primes: Vec::new(),
                logs: Vec::new(),
            });
        }
        let base = small_primes(isqrt(hi));
        let start = lo + 1;
        let n_segments = (hi - start) / SEGMENT_SPAN + 1;
        let chunks: Vec<Vec<u64>> = (0..n_segments)
            .into_par_iter()
            .map(|s| {
                let seg_lo = start + s * SEGMENT_SPAN;
                let seg_hi = (seg_lo + SEGMENT_SPAN - 1).min(hi);
                sieve_block(seg_lo, seg_hi, &base)
            })
            .collect();
        let primes: Vec<u64> = chunks.into_iter().flatten().collect();
        let logs = primes.iter().map(|&p| (p as f64).ln()).collect();
        Ok(PrimeBlock { lo, hi, primes, logs })
    }
}

/// Primes in `(floor a, floor b]` with the default ceiling.
pub fn sieve_segment(a: f64, b: f64) -> Result<PrimeBlock> {
    Sieve::default().segment(a, b)
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Plain sieve of all primes `<= limit`.
pub fn small_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= limit {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Primes in `[lo, hi]` given all base primes up to `sqrt(hi)`.
fn sieve_block(lo: u64, hi: u64, base: &[u64]) -> Vec<u64> {
    let mut out = Vec::new();
    if lo <= 2 && 2 <= hi {
        out.push(2);
    }
    // odd numbers first_odd, first_odd + 2, ...
    let first_odd = (lo.max(3)) | 1;
    if first_odd > hi {
        return out;
    }
    let len = ((hi - first_odd) / 2 + 1) as usize;
    let mut composite = vec![false; len];
    for &p in base.iter().skip(1) {
        if p * p > hi {
            break;
        }
        let mut m = (first_odd.div_ceil(p) * p).max(p * p);
        if m % 2 == 0 {
            m += p;
        }
        while m <= hi {
            composite[((m - first_odd) / 2) as usize] = true;
            m += 2 * p;
        }
    }
    out.extend(
        composite
            .iter()
            .enumerate()
            .filter(|(_, &c)| !c)
            .map(|(i, _)| first_odd + 2 * i as u64),
    );
    out
}

//! Certified evaluation of the floor sequence `f(n) = [n^c tan^θ(log n)]`.
//!
//! Values are computed in double precision first. When the double result is
//! within the guard distance of an integer the value is recomputed with a
//! 128-bit significand and the floor taken from there; if even that lands
//! within 2^-40 of an integer the evaluation fails with
//! [`Error::AmbiguousFloor`] instead of guessing.

use std::cell::RefCell;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hp::{self, Ctx};
use crate::primesieve::{self, PrimeBlock};
use crate::window::WindowParams;

/// Absolute distance to the nearest integer below which the double path
/// escalates to extended precision.
pub const ESCALATION_GUARD: f64 = 1e-6;
/// Relative part of the guard; dominates only for values above 10^7.
const RELATIVE_GUARD: f64 = 1e-13;
/// Significand bits of the extended path; floors are below 2^64, so 128
/// bits leave at least 64 bits of fraction.
pub const FLOOR_PRECISION: usize = 128;
/// Extended-precision distance below which a floor is reported ambiguous.
pub const AMBIGUITY_GUARD: f64 = 9.094_947_017_729_282e-13; // 2^-40

thread_local! {
    static CTX: RefCell<Ctx> = RefCell::new(Ctx::with_precision(FLOOR_PRECISION));
}

/// Which floor sequence to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Sequence {
    /// `[n^c tan^θ(log n)]`.
    Tangent { c: f64, theta: f64 },
    /// `[n^c]`, the classical Piatetski-Shapiro sequence.
    Power { c: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValueEntry {
    pub n: u64,
    pub f: u64,
    /// Fractional part of the unfloored value, in `[0, 1)`.
    pub frac: f64,
    /// True when the floor was re-evaluated and confirmed in extended precision.
    pub certified: bool,
}

impl ValueEntry {
    /// `‖value‖`, the distance to the nearest integer.
    pub fn frac_norm(&self) -> f64 {
        self.frac.min(1.0 - self.frac)
    }
}

impl Sequence {
    pub fn tangent(c: f64, theta: f64) -> Self {
        Sequence::Tangent { c, theta }
    }

    /// Double-precision value and its floor.
    pub fn eval_double(&self, n: u64) -> Result<(u64, f64)> {
        let v = self.value_f64(n)?;
        let fl = v.floor();
        Ok((fl as u64, v - fl))
    }

    fn value_f64(&self, n: u64) -> Result<f64> {
        let x = n as f64;
        match *self {
            Sequence::Tangent { c, theta } => {
                let tan = x.ln().tan();
                if !(tan > 0.0) {
                    return Err(Error::DomainError(n));
                }
                Ok(x.powf(c) * tan.powf(theta))
            }
            Sequence::Power { c } => Ok(x.powf(c)),
        }
    }

    /// Extended-precision floor and fractional part.
    pub fn eval_extended(&self, n: u64) -> Result<(u64, f64)> {
        CTX.with(|ctx| {
            let ctx = &mut *ctx.borrow_mut();
            let x = ctx.u(n);
            let log = ctx.ln(&x);
            // value = exp(c log n + θ log tan(log n)), sharing one log n
            let exponent = match *self {
                Sequence::Tangent { c, theta } => {
                    let tan = ctx.tan(&log);
                    if tan.is_negative() || tan.is_zero() {
                        return Err(Error::DomainError(n));
                    }
                    let log_tan = ctx.ln(&tan);
                    ctx.add(&ctx.mul(&ctx.f(c), &log), &ctx.mul(&ctx.f(theta), &log_tan))
                }
                Sequence::Power { c } => ctx.mul(&ctx.f(c), &log),
            };
            let v = ctx.exp(&exponent);
            let fl = v.floor();
            let frac = hp::to_f64(&ctx.sub(&v, &fl));
            let f = hp::to_u64(&fl).ok_or_else(|| Error::TooLarge(format!("f({n}) exceeds 2^64")))?;
            let distance = frac.min(1.0 - frac);
            if distance < AMBIGUITY_GUARD {
                return Err(Error::AmbiguousFloor { n, distance });
            }
            Ok((f, frac))
        })
    }

    /// Floor with the two-tier certification scheme.
    pub fn floor_value(&self, n: u64) -> Result<ValueEntry> {
        let v = self.value_f64(n)?;
        let fl = v.floor();
        let frac = v - fl;
        let guard = ESCALATION_GUARD.max(RELATIVE_GUARD * v);
        if frac.min(1.0 - frac) >= guard {
            return Ok(ValueEntry {
                n,
                f: fl as u64,
                frac,
                certified: false,
            });
        }
        let (f, frac) = self.eval_extended(n)?;
        Ok(ValueEntry {
            n,
            f,
            frac,
            certified: true,
        })
    }

    /// Floors for every `n` in `ns`, evaluated in parallel, output in input order.
    pub fn tabulate(&self, ns: &[u64]) -> Result<Vec<ValueEntry>> {
        ns.par_iter().map(|&n| self.floor_value(n)).collect()
    }
}

pub fn floor_value(n: u64, c: f64, theta: f64) -> Result<ValueEntry> {
    Sequence::tangent(c, theta).floor_value(n)
}

pub fn frac_norm(n: u64, c: f64, theta: f64) -> Result<f64> {
    Ok(floor_value(n, c, theta)?.frac_norm())
}

/// Primes of a range paired with their floor values and log weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueTable {
    pub entries: Vec<ValueEntry>,
    pub logs: Vec<f64>,
}

impl ValueTable {
    pub fn from_primes(block: &PrimeBlock, seq: Sequence) -> Result<Self> {
        Ok(Self {
            entries: seq.tabulate(&block.primes)?,
            logs: block.logs.clone(),
        })
    }

    /// Primes in `(Δ1, Δ2]` under the window's tangent sequence.
    pub fn for_window(w: &WindowParams) -> Result<Self> {
        let block = primesieve::sieve_segment(w.delta1, w.delta2)?;
        Self::from_primes(&block, Sequence::tangent(w.c, w.theta))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().map(|e| e.f)
    }

    pub fn max_f(&self) -> Option<u64> {
        self.values().max()
    }

    pub fn min_f(&self) -> Option<u64> {
        self.values().min()
    }

    /// CSV with header `n,f,frac,certified`, frac to 12 digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_entries_csv(&self.entries, out)
    }
}

pub fn write_entries_csv<W: Write>(entries: &[ValueEntry], out: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    wtr.write_record(["n", "f", "frac", "certified"])?;
    for e in entries {
        wtr.write_record([
            e.n.to_string(),
            e.f.to_string(),
            format!("{:.12}", e.frac),
            e.certified.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

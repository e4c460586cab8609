//! Thin helpers over `astro-float` for the extended-precision paths.

use astro_float::{BigFloat, Consts, RoundingMode, Sign};

/// Working precision in bits for every extended evaluation.
pub const PRECISION: usize = 192;

pub(crate) const RM: RoundingMode = RoundingMode::ToEven;

pub(crate) struct Ctx {
    pub p: usize,
    pub cc: Consts,
}

impl Ctx {
    pub fn new() -> Self {
        Self::with_precision(PRECISION)
    }

    pub fn with_precision(p: usize) -> Self {
        Self {
            p,
            cc: Consts::new().expect("astro-float constant cache"),
        }
    }

    pub fn f(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.p)
    }

    pub fn u(&self, x: u64) -> BigFloat {
        BigFloat::from_u64(x, self.p)
    }

    pub fn pi(&mut self) -> BigFloat {
        self.cc.pi(self.p, RM)
    }

    pub fn ln(&mut self, x: &BigFloat) -> BigFloat {
        x.ln(self.p, RM, &mut self.cc)
    }

    pub fn exp(&mut self, x: &BigFloat) -> BigFloat {
        x.exp(self.p, RM, &mut self.cc)
    }

    pub fn tan(&mut self, x: &BigFloat) -> BigFloat {
        x.tan(self.p, RM, &mut self.cc)
    }

    pub fn atan(&mut self, x: &BigFloat) -> BigFloat {
        x.atan(self.p, RM, &mut self.cc)
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.p, RM)
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.p, RM)
    }

    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.p, RM)
    }

    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.p, RM)
    }
}

/// Nearest f64 (ties to even via the u64 -> f64 conversion of the top word).
pub(crate) fn to_f64(x: &BigFloat) -> f64 {
    let Some((words, _, sign, exp, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    let Some(&top) = words.last() else {
        return 0.0;
    };
    if top == 0 {
        return 0.0;
    }
    // value = 0.top... * 2^exp; include the next word as a sticky bit.
    let sticky = words[..words.len() - 1].iter().any(|&w| w != 0) as u64;
    let wide = ((top as u128) << 64) | sticky as u128;
    let mag = (wide as f64) * 2f64.powi(exp - 128);
    if sign == Sign::Neg {
        -mag
    } else {
        mag
    }
}

/// Integer value of a nonnegative integral BigFloat below 2^64.
pub(crate) fn to_u64(x: &BigFloat) -> Option<u64> {
    let (words, _, sign, exp, _) = x.as_raw_parts()?;
    let top = *words.last()?;
    if top == 0 {
        return Some(0);
    }
    if sign == Sign::Neg || !(1..=64).contains(&exp) {
        return None;
    }
    Some(top >> (64 - exp as u32))
}

//! Order-independent floating point summation.
//!
//! [`ExactSum`] accumulates `f64` values into a wide fixed-point integer, so
//! the running total is exact and the final rounding depends only on the set
//! of summands, never on their order or on how a parallel reduction split
//! them. Every reduction in the crate goes through it, which is what makes
//! outputs bit-identical across thread counts.

use num_complex::Complex64;
use rayon::prelude::*;

const LIMB_BITS: u32 = 32;
const LIMB_MASK: i64 = (1 << LIMB_BITS) - 1;
/// Bit 0 of limb 0 has weight 2^-1074 (smallest subnormal).
const MIN_EXP: i32 = -1074;
const LIMBS: usize = 70;
/// Each add puts < 2^32 into a limb; normalize well before i64 overflow.
const NORMALIZE_EVERY: u32 = 1 << 29;

#[derive(Clone, Debug)]
pub struct ExactSum {
    limbs: [i64; LIMBS],
    pending: u32,
    /// Naive sum of any non-finite inputs.
    special: f64,
}

impl Default for ExactSum {
    fn default() -> Self {
        Self::new()
    }
}

impl ExactSum {
    pub fn new() -> Self {
        Self {
            limbs: [0; LIMBS],
            pending: 0,
            special: 0.0,
        }
    }

    pub fn add(&mut self, x: f64) {
        if !x.is_finite() {
            self.special += x;
            return;
        }
        if x == 0.0 {
            return;
        }
        let bits = x.to_bits();
        let negative = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i32;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if biased == 0 {
            (frac, MIN_EXP)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        let pos = (exp - MIN_EXP) as u32;
        let idx = (pos / LIMB_BITS) as usize;
        let wide = (mant as u128) << (pos % LIMB_BITS);
        let parts = [
            (wide & LIMB_MASK as u128) as i64,
            ((wide >> 32) & LIMB_MASK as u128) as i64,
            (wide >> 64) as i64,
        ];
        for (k, part) in parts.into_iter().enumerate() {
            if negative {
                self.limbs[idx + k] -= part;
            } else {
                self.limbs[idx + k] += part;
            }
        }
        self.pending += 1;
        if self.pending >= NORMALIZE_EVERY {
            self.normalize();
        }
    }

    pub fn merge(&mut self, other: &ExactSum) {
        self.normalize();
        let mut other = other.clone();
        other.normalize();
        for (a, b) in self.limbs.iter_mut().zip(other.limbs.iter()) {
            *a += *b;
        }
        self.special += other.special;
        self.normalize();
    }

    /// Propagate carries so limbs 0..LIMBS-1 lie in [0, 2^32).
    fn normalize(&mut self) {
        for i in 0..LIMBS - 1 {
            let carry = self.limbs[i] >> LIMB_BITS;
            self.limbs[i] -= carry << LIMB_BITS;
            self.limbs[i + 1] += carry;
        }
        self.pending = 0;
    }

    /// The exact total rounded to nearest f64.
    pub fn value(&self) -> f64 {
        if self.special != 0.0 || self.special.is_nan() {
            return self.special;
        }
        let mut limbs = self.limbs;
        normalize_limbs(&mut limbs);
        let negative = limbs[LIMBS - 1] < 0;
        if negative {
            for l in limbs.iter_mut() {
                *l = -*l;
            }
            normalize_limbs(&mut limbs);
        }
        let Some(top) = limbs.iter().rposition(|&l| l != 0) else {
            return 0.0;
        };
        // Three limbs give 96 bits; a sticky bit carries the rest so the
        // u128 -> f64 conversion rounds correctly.
        let lo = top.saturating_sub(2);
        let mut wide: u128 = 0;
        for i in (lo..=top).rev() {
            wide = (wide << LIMB_BITS) | limbs[i] as u128;
        }
        if limbs[..lo].iter().any(|&l| l != 0) {
            wide |= 1;
        }
        let magnitude = ldexp(wide as f64, lo as i32 * LIMB_BITS as i32 + MIN_EXP);
        if negative {
            -magnitude
        } else {
            magnitude
        }
    }
}

fn normalize_limbs(limbs: &mut [i64; LIMBS]) {
    for i in 0..LIMBS - 1 {
        let carry = limbs[i] >> LIMB_BITS;
        limbs[i] -= carry << LIMB_BITS;
        limbs[i + 1] += carry;
    }
}

fn ldexp(mut x: f64, mut e: i32) -> f64 {
    const STEP: i32 = 1000;
    while e > STEP {
        x *= f64::from_bits(((1023 + STEP) as u64) << 52);
        e -= STEP;
    }
    while e < -STEP {
        x *= f64::from_bits(((1023 - STEP) as u64) << 52);
        e += STEP;
    }
    x * f64::from_bits(((1023 + e) as u64) << 52)
}

impl Extend<f64> for ExactSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

impl FromIterator<f64> for ExactSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = ExactSum::new();
        s.extend(iter);
        s
    }
}

/// Exact sum of a sequence, rounded once.
pub fn exact_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<ExactSum>().value()
}

/// Parallel exact sum; the result does not depend on the thread count.
pub fn par_exact_sum<I>(iter: I) -> f64
where
    I: ParallelIterator<Item = f64>,
{
    iter.fold(ExactSum::new, |mut acc, x| {
        acc.add(x);
        acc
    })
    .reduce(ExactSum::new, |mut a, b| {
        a.merge(&b);
        a
    })
    .value()
}

/// Complex counterpart of [`ExactSum`].
#[derive(Clone, Debug, Default)]
pub struct ExactComplexSum {
    re: ExactSum,
    im: ExactSum,
}

impl ExactComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn merge(&mut self, other: &ExactComplexSum) {
        self.re.merge(&other.re);
        self.im.merge(&other.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

pub fn par_exact_complex_sum<I>(iter: I) -> Complex64
where
    I: ParallelIterator<Item = Complex64>,
{
    iter.fold(ExactComplexSum::new, |mut acc, z| {
        acc.add(z);
        acc
    })
    .reduce(ExactComplexSum::new, |mut a, b| {
        a.merge(&b);
        a
    })
    .value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cancels_exactly() {
        let s = exact_sum([1e100, 1.0, -1e100]);
        assert_eq!(s, 1.0);
        let s = exact_sum([0.1, 0.2, -0.3]);
        // 0.1 + 0.2 - 0.3 in exact binary arithmetic
        assert_eq!(s, 2.0f64.powi(-55));
    }

    #[test]
    fn small_integers() {
        assert_eq!(exact_sum((1..=100).map(|i| i as f64)), 5050.0);
        assert_eq!(exact_sum((1..=100).map(|i| -(i as f64))), -5050.0);
        assert_eq!(exact_sum(std::iter::empty()), 0.0);
    }

    #[test]
    fn subnormals_and_extremes() {
        let tiny = f64::from_bits(1);
        assert_eq!(exact_sum([tiny, tiny]), 2.0 * tiny);
        assert_eq!(exact_sum([f64::MAX, -f64::MAX, 3.5]), 3.5);
        assert!(exact_sum([f64::NAN, 1.0]).is_nan());
    }

    #[test]
    fn parallel_matches_sequential() {
        let xs: Vec<f64> = (0..10_000).map(|i| ((i as f64) * 0.731).sin() * 1e3).collect();
        let seq = exact_sum(xs.iter().copied());
        let par = par_exact_sum(xs.par_iter().copied());
        assert_eq!(seq.to_bits(), par.to_bits());
    }

    proptest! {
        #[test]
        fn order_independent(mut xs in proptest::collection::vec(-1e12f64..1e12, 0..200), seed in any::<u64>()) {
            let forward = exact_sum(xs.iter().copied());
            // deterministic shuffle
            let mut state = seed | 1;
            for i in (1..xs.len()).rev() {
                state ^= state << 13; state ^= state >> 7; state ^= state << 17;
                xs.swap(i, (state % (i as u64 + 1)) as usize);
            }
            let shuffled = exact_sum(xs.iter().copied());
            prop_assert_eq!(forward.to_bits(), shuffled.to_bits());
        }

        #[test]
        fn close_to_naive(xs in proptest::collection::vec(0.0f64..1e6, 1..100)) {
            let naive: f64 = xs.iter().sum();
            let exact = exact_sum(xs.iter().copied());
            prop_assert!((naive - exact).abs() <= 1e-12 * naive.abs().max(1.0));
        }
    }
}

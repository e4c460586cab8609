//! Exponential sums and circle-method integrals.
//!
//! Phases are reduced to `[-1/2, 1/2)` turns before any trigonometry, and on
//! rational grids `α = j/M` the reduction `(f j) mod M` is done in integers.
//! Each sum goes through [`ExactComplexSum`], so `F(-α)` is the exact
//! conjugate of `F(α)` and results do not depend on thread count.

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::asymptotics::WeightGrid;
use crate::error::{Error, Result};
use crate::seqeval::{Sequence, ValueEntry, ValueTable};
use crate::summation::{par_exact_complex_sum, ExactComplexSum, ExactSum};
use crate::window::WindowParams;

pub const MIN_GRID: usize = 16;
const SINGULAR_GUARD: f64 = 1e-12;

/// `e(t) = exp(2πit)`, reduced by quarter turns so that `t ∈ ½ℤ` is exact.
pub fn cis_turns(t: f64) -> Complex64 {
    let q = (4.0 * t).round();
    let r = t - 0.25 * q;
    let (s, c) = (TAU * r).sin_cos();
    match (q as i64).rem_euclid(4) {
        0 => Complex64::new(c, s),
        1 => Complex64::new(-s, c),
        2 => Complex64::new(-c, -s),
        _ => Complex64::new(s, -c),
    }
}

/// `e(p/q)` with the reduction done in integers.
fn cis_ratio(p: i128, q: u64) -> Complex64 {
    let q = q as i128;
    let mut r = p.rem_euclid(q);
    if 2 * r >= q {
        r -= q;
    }
    cis_turns(r as f64 / q as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SumKind {
    S,
    Theta,
    A,
}

impl std::str::FromStr for SumKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "S" | "s" => Ok(SumKind::S),
            "Theta" | "theta" => Ok(SumKind::Theta),
            "A" | "a" => Ok(SumKind::A),
            _ => Err(format!("unknown sum `{s}` (expected S, theta or A)")),
        }
    }
}

fn ser_complex<S: Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SumSample {
    pub alpha: f64,
    #[serde(serialize_with = "ser_complex")]
    pub value: Complex64,
    pub kind: SumKind,
}

/// `Σ weight · e(α · freq)`.
fn exp_sum<'a, I>(terms: I, alpha: f64) -> Complex64
where
    I: Iterator<Item = (i64, f64)> + 'a,
{
    let mut acc = ExactComplexSum::new();
    for (freq, weight) in terms {
        acc.add(cis_turns(alpha * freq as f64) * weight);
    }
    acc.value()
}

/// Same sum at `α = j/m`.
fn exp_sum_ratio<I>(terms: I, j: i64, m: u64) -> Complex64
where
    I: Iterator<Item = (i64, f64)>,
{
    let mut acc = ExactComplexSum::new();
    for (freq, weight) in terms {
        acc.add(cis_ratio(freq as i128 * j as i128, m) * weight);
    }
    acc.value()
}

fn prime_terms<'a>(values: &'a [ValueEntry], logs: &'a [f64]) -> impl Iterator<Item = (i64, f64)> + 'a {
    values.iter().zip(logs).map(|(e, &l)| (e.f as i64, l))
}

fn grid_terms(grid: &WeightGrid) -> impl Iterator<Item = (i64, f64)> + '_ {
    grid.weights.iter().enumerate().map(move |(i, &w)| (grid.start + i as i64, w))
}

fn unit_terms(values: &[ValueEntry]) -> impl Iterator<Item = (i64, f64)> + '_ {
    values.iter().map(|e| (e.f as i64, 1.0))
}

fn check_lengths(values: &[ValueEntry], logs: &[f64]) -> Result<()> {
    if values.len() != logs.len() {
        return Err(Error::WindowMismatch {
            values: values.len(),
            logs: logs.len(),
        });
    }
    Ok(())
}

/// `S(α) = Σ_p e(α f(p)) log p`.
pub fn s_alpha(values: &[ValueEntry], logs: &[f64], alpha: f64) -> Result<Complex64> {
    check_lengths(values, logs)?;
    Ok(exp_sum(prime_terms(values, logs), alpha))
}

/// `Θ(α) = Σ_m w(m) e(mα)` over a precomputed weight grid.
pub fn theta_on_grid(grid: &WeightGrid, alpha: f64) -> Complex64 {
    exp_sum(grid_terms(grid), alpha)
}

pub fn theta_alpha(w: &WindowParams, alpha: f64) -> Result<Complex64> {
    Ok(theta_on_grid(&WeightGrid::new(w)?, alpha))
}

/// Floor values of every integer in `(Δ1, Δ2]`.
pub fn integer_values(w: &WindowParams) -> Result<Vec<ValueEntry>> {
    let ns: Vec<u64> = w.integer_range().collect();
    Sequence::tangent(w.c, w.theta).tabulate(&ns)
}

/// `A(α) = Σ_n e(α f(n))` over precomputed integer values.
pub fn a_on_values(values: &[ValueEntry], alpha: f64) -> Complex64 {
    exp_sum(unit_terms(values), alpha)
}

pub fn a_alpha(w: &WindowParams, alpha: f64) -> Result<Complex64> {
    Ok(a_on_values(&integer_values(w)?, alpha))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleIntegral {
    pub value: Complex64,
    /// Full circle sampled with `M <= 3 max f`, so the sum may alias.
    pub grid_too_coarse: bool,
}

/// `∫_a^b S³(α) e(-Nα) dα` on `m` subintervals.
///
/// Over the full circle `[0, 1]` the uniform sum is used with exact rational
/// phases; when `m > 3 max f` it equals `Γ(N)` up to rounding. Any other
/// interval uses the trapezoid rule.
pub fn circle_integral(
    values: &[ValueEntry],
    logs: &[f64],
    n: i64,
    interval: (f64, f64),
    m: usize,
) -> Result<CircleIntegral> {
    check_lengths(values, logs)?;
    let (a, b) = interval;
    if !(a.is_finite() && b.is_finite() && a < b && b - a <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "interval [{a}, {b}] must satisfy a < b <= a + 1"
        )));
    }
    if m < MIN_GRID {
        return Err(Error::InvalidParameter(format!("grid size {m} is below {MIN_GRID}")));
    }
    let full = a == 0.0 && b == 1.0;
    let fmax = values.iter().map(|e| e.f).max().unwrap_or(0);
    let grid_too_coarse = full && (m as u64) <= 3 * fmax;
    let terms: Vec<(i64, f64)> = prime_terms(values, logs).collect();
    let value = if full {
        let mm = m as u64;
        par_exact_complex_sum((0..m as i64).into_par_iter().map(|j| {
            let s = exp_sum_ratio(terms.iter().copied(), j, mm);
            s * s * s * cis_ratio(-(n as i128) * j as i128, mm)
        })) / m as f64
    } else {
        let h = (b - a) / m as f64;
        par_exact_complex_sum((0..=m).into_par_iter().map(|j| {
            let alpha = if j == m { b } else { a + (b - a) * j as f64 / m as f64 };
            let s = exp_sum(terms.iter().copied(), alpha);
            let end = if j == 0 || j == m { 0.5 } else { 1.0 };
            s * s * s * cis_turns(-(n as f64) * alpha) * end
        })) * h
    };
    Ok(CircleIntegral {
        value,
        grid_too_coarse,
    })
}

/// Major arc `[-τ, τ]`, minor arc `[τ, 1-τ]` and their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcSplit {
    pub major: Complex64,
    pub minor: Complex64,
}

impl ArcSplit {
    pub fn total(&self) -> Complex64 {
        self.major + self.minor
    }
}

/// Both arcs sampled with the same step `1/m`, rounded to whole steps.
pub fn arc_split(values: &[ValueEntry], logs: &[f64], n: i64, tau: f64, m: usize) -> Result<ArcSplit> {
    if !(tau > 0.0 && tau < 0.5) {
        return Err(Error::InvalidParameter(format!("tau = {tau} must lie in (0, 1/2)")));
    }
    let m_major = ((2.0 * tau * m as f64).round() as usize).max(MIN_GRID);
    let m_minor = m.saturating_sub(m_major).max(MIN_GRID);
    let major = circle_integral(values, logs, n, (-tau, tau), m_major)?.value;
    let minor = circle_integral(values, logs, n, (tau, 1.0 - tau), m_minor)?.value;
    Ok(ArcSplit { major, minor })
}

/// `c_h(x) = (1 - e(-x)) / (2πi(h + x))`.
pub fn fourier_coeff_ch(x: f64, h: i64) -> Result<Complex64> {
    let d = h as f64 + x;
    if d.abs() < SINGULAR_GUARD {
        return Err(Error::Singular(d));
    }
    let num = Complex64::new(1.0, 0.0) - cis_turns(-x);
    Ok(num / Complex64::new(0.0, TAU * d))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualStats {
    pub h: i64,
    pub points: usize,
    pub max: f64,
    pub mean: f64,
    /// Max of `residual / min(1, 1/(H‖y‖))` over points with `‖y‖ >= 0.05`.
    pub max_ratio: f64,
}

/// `|e(-x{y}) - Σ_{|h|<=H} c_h(x) e(hy)|` over a grid of `y`.
pub fn buriev_residual(y_grid: &[f64], x: f64, h_max: i64) -> Result<ResidualStats> {
    if h_max < 3 {
        return Err(Error::InvalidParameter(format!("H = {h_max} must be at least 3")));
    }
    if y_grid.is_empty() {
        return Err(Error::InvalidParameter("empty y grid".into()));
    }
    let coeffs = (-h_max..=h_max)
        .map(|h| fourier_coeff_ch(x, h))
        .collect::<Result<Vec<_>>>()?;
    let residuals: Vec<(f64, f64)> = y_grid
        .par_iter()
        .map(|&y| {
            let mut acc = ExactComplexSum::new();
            for (c, h) in coeffs.iter().zip(-h_max..) {
                acc.add(c * cis_turns(h as f64 * y));
            }
            let frac = y - y.floor();
            let r = (cis_turns(-x * frac) - acc.value()).norm();
            let dist = (y - y.round()).abs();
            let bound = 1f64.min(1.0 / (h_max as f64 * dist));
            (r, if dist >= 0.05 { r / bound } else { f64::NAN })
        })
        .collect();
    let max = residuals.iter().map(|r| r.0).fold(0.0, f64::max);
    let mean = residuals.iter().map(|r| r.0).collect::<ExactSum>().value() / residuals.len() as f64;
    let max_ratio = residuals.iter().map(|r| r.1).filter(|r| !r.is_nan()).fold(0.0, f64::max);
    Ok(ResidualStats {
        h: h_max,
        points: residuals.len(),
        max,
        mean,
        max_ratio,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpSumReport {
    pub window: WindowParams,
    pub kind: SumKind,
    pub grid: usize,
    pub samples: Vec<SumSample>,
}

/// `F(j/M)` for `j = 0..M` with exact rational phases.
pub fn sample_sum(w: &WindowParams, kind: SumKind, m: usize) -> Result<ExpSumReport> {
    if m == 0 {
        return Err(Error::InvalidParameter("grid size must be positive".into()));
    }
    let terms: Vec<(i64, f64)> = match kind {
        SumKind::S => {
            let t = ValueTable::for_window(w)?;
            prime_terms(&t.entries, &t.logs).collect()
        }
        SumKind::Theta => grid_terms(&WeightGrid::new(w)?).collect(),
        SumKind::A => unit_terms(&integer_values(w)?).collect(),
    };
    let mm = m as u64;
    let samples = (0..m as i64)
        .into_par_iter()
        .map(|j| SumSample {
            alpha: j as f64 / m as f64,
            value: exp_sum_ratio(terms.iter().copied(), j, mm),
            kind,
        })
        .collect();
    Ok(ExpSumReport {
        window: *w,
        kind,
        grid: m,
        samples,
    })
}

impl ExpSumReport {
    /// CSV `alpha,re,im,abs`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        wtr.write_record(["alpha", "re", "im", "abs"])?;
        for s in &self.samples {
            wtr.write_record([
                s.alpha.to_string(),
                s.value.re.to_string(),
                s.value.im.to_string(),
                s.value.norm().to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

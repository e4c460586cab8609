//! Main terms and the smooth convolutions `Ψk`.
//!
//! The smooth weight `w(m) = dy/dt` at `t = m` lives on the integer grid
//! `(N1, N*]`. `Ψk(N)` is the `k`-fold convolution of those weights at `N`,
//! which is also the `N`-th Fourier coefficient of `Θ^k`, so it is summed
//! directly instead of integrated.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::repcount::RepReport;
use crate::summation::{exact_sum, ExactSum};
use crate::window::WindowParams;

/// Largest weight grid that will be materialized.
pub const GRID_LIMIT: u64 = 10_000_000;
const ROW_CHUNK: usize = 256;

/// `2^θ c + 5θ 2^(θ-1)`.
pub fn denominator(c: f64, theta: f64) -> f64 {
    2f64.powf(theta) * c + 5.0 * theta * 2f64.powf(theta - 1.0)
}

/// `Δ2^(1-c) X² / (2^θ c + 5θ 2^(θ-1))`.
pub fn main_term(w: &WindowParams) -> f64 {
    w.delta2.powf(1.0 - w.c) * w.x * w.x / denominator(w.c, w.theta)
}

// Lanczos approximation, g = 7, nine terms. Relative error below 2e-15 on
// the positive reals.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// The gamma function.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut a = LANCZOS[0];
        let t = x + LANCZOS_G + 0.5;
        for (i, &coef) in LANCZOS.iter().enumerate().skip(1) {
            a += coef / (x + i as f64);
        }
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
    }
}

/// `Γ³(1 + 1/c) / Γ(3/c) · N^(3/c - 1)`.
pub fn classical_main_term(c: f64, n: i64) -> Result<f64> {
    if !(c.is_finite() && c >= 1.0) {
        return Err(Error::InvalidParameter(format!("c must be at least 1, got {c}")));
    }
    if n < 1 {
        return Err(Error::InvalidParameter(format!("N must be positive, got {n}")));
    }
    let g = gamma(1.0 + 1.0 / c);
    Ok(g * g * g / gamma(3.0 / c) * (n as f64).powf(3.0 / c - 1.0))
}

/// Smooth weights `w(m)` for every integer `m` in `(N1, N*]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightGrid {
    pub start: i64,
    pub weights: Vec<f64>,
}

impl WeightGrid {
    pub fn new(w: &WindowParams) -> Result<Self> {
        let grid = w.grid();
        let (start, end) = (*grid.start(), *grid.end());
        let points = (end - start + 1).max(0) as u64;
        if points > GRID_LIMIT {
            return Err(Error::BandTooWide {
                points,
                limit: GRID_LIMIT,
            });
        }
        let weights = (start..=end)
            .into_par_iter()
            .map(|m| w.weight_w(m as f64))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self { start, weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Last grid point.
    pub fn end(&self) -> i64 {
        self.start + self.weights.len() as i64 - 1
    }

    /// `w(m)` on the grid, zero elsewhere.
    pub fn get(&self, m: i64) -> f64 {
        if m < self.start || m > self.end() {
            return 0.0;
        }
        self.weights[(m - self.start) as usize]
    }

    /// `Σ w(m)`, i.e. `Θ(0)`.
    pub fn total(&self) -> f64 {
        exact_sum(self.weights.iter().copied())
    }

    /// Grid points `m` for which `n - m` can be a sum of `parts` grid points.
    fn first_range(&self, n: i64, parts: i64) -> Option<(i64, i64)> {
        if self.is_empty() {
            return None;
        }
        let lo = self.start.max(n - parts * self.end());
        let hi = self.end().min(n - parts * self.start);
        (lo <= hi).then_some((lo, hi))
    }

    pub fn psi1(&self, n: i64) -> f64 {
        self.get(n)
    }

    /// `Σ_{m1 + m2 = N} w(m1) w(m2)`, exactly rounded.
    pub fn psi2(&self, n: i64) -> f64 {
        let Some((lo, hi)) = self.first_range(n, 1) else {
            return 0.0;
        };
        let mut acc = ExactSum::new();
        for m in lo..=hi {
            acc.add(self.get(m) * self.get(n - m));
        }
        acc.value()
    }

    /// Compensated `Ψ2(r)` in ascending `m`; the inner row of `Ψ3`.
    fn row(&self, r: i64) -> f64 {
        let Some((lo, hi)) = self.first_range(r, 1) else {
            return 0.0;
        };
        let a = &self.weights[(lo - self.start) as usize..=(hi - self.start) as usize];
        let b_lo = (r - hi - self.start) as usize;
        let b = &self.weights[b_lo..b_lo + a.len()];
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for (x, y) in a.iter().zip(b.iter().rev()) {
            let p = x * y;
            let t = sum + p;
            if sum.abs() >= p.abs() {
                comp += (sum - t) + p;
            } else {
                comp += (p - t) + sum;
            }
            sum = t;
        }
        sum + comp
    }

    /// `Σ_{m1 + m2 + m3 = N} w(m1) w(m2) w(m3)`, split over `m1`.
    pub fn psi3(&self, n: i64) -> f64 {
        let Some((lo, hi)) = self.first_range(n, 2) else {
            return 0.0;
        };
        let firsts: Vec<i64> = (lo..=hi).collect();
        firsts
            .par_chunks(ROW_CHUNK)
            .map(|chunk| {
                let mut acc = ExactSum::new();
                for &m1 in chunk {
                    acc.add(self.get(m1) * self.row(n - m1));
                }
                acc
            })
            .reduce(ExactSum::new, |mut a, b| {
                a.merge(&b);
                a
            })
            .value()
    }

    pub fn psi(&self, n: i64, k: u32) -> Result<f64> {
        match k {
            1 => Ok(self.psi1(n)),
            2 => Ok(self.psi2(n)),
            3 => Ok(self.psi3(n)),
            _ => Err(Error::InvalidParameter(format!("k must be 1, 2 or 3, got {k}"))),
        }
    }
}

/// `Ψk(N)` by direct convolution over the window grid.
pub fn psi_k_exact(w: &WindowParams, n: i64, k: u32) -> Result<f64> {
    if !(1..=3).contains(&k) {
        return Err(Error::InvalidParameter(format!("k must be 1, 2 or 3, got {k}")));
    }
    if k == 1 {
        // one coefficient, no grid needed
        let grid = w.grid();
        if !grid.contains(&n) {
            return Ok(0.0);
        }
        return w.weight_w(n as f64);
    }
    WeightGrid::new(w)?.psi(n, k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompareRow {
    #[serde(rename = "N")]
    pub target: i64,
    pub count: u64,
    #[serde(rename = "weighted")]
    pub gamma_observed: f64,
    pub main_term: f64,
    pub ratio: f64,
    #[serde(skip)]
    pub window: WindowParams,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub window: WindowParams,
    pub mean_ratio: f64,
    pub median_ratio: f64,
    pub rows: Vec<CompareRow>,
}

/// Observed `Γ(N)` against the main term for every `N` of a scan.
pub fn compare_report(scan: &[RepReport], w: &WindowParams) -> Result<CompareReport> {
    if scan.is_empty() {
        return Err(Error::InvalidParameter("empty scan".into()));
    }
    let main = main_term(w);
    let rows: Vec<CompareRow> = scan
        .iter()
        .map(|r| CompareRow {
            target: r.target,
            count: r.count,
            gamma_observed: r.weighted,
            main_term: main,
            ratio: if main > 0.0 { r.weighted / main } else { 0.0 },
            window: *w,
        })
        .collect();
    let mut ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let mean_ratio = exact_sum(ratios.iter().copied()) / ratios.len() as f64;
    ratios.sort_by(f64::total_cmp);
    let mid = ratios.len() / 2;
    let median_ratio = if ratios.len() % 2 == 1 {
        ratios[mid]
    } else {
        0.5 * (ratios[mid - 1] + ratios[mid])
    };
    Ok(CompareReport {
        window: *w,
        mean_ratio,
        median_ratio,
        rows,
    })
}

impl CompareReport {
    /// Fraction of rows with at least one representation.
    pub fn positive_fraction(&self) -> f64 {
        self.rows.iter().filter(|r| r.count > 0).count() as f64 / self.rows.len() as f64
    }

    /// CSV `N,count,weighted,main_term,ratio`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        wtr.write_record(["N", "count", "weighted", "main_term", "ratio"])?;
        for r in &self.rows {
            wtr.write_record([
                r.target.to_string(),
                r.count.to_string(),
                r.gamma_observed.to_string(),
                r.main_term.to_string(),
                r.ratio.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

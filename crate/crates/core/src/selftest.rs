//! Built-in consistency checks run by `tanprimes selftest`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::asymptotics::psi_k_exact;
use crate::circle::circle_integral;
use crate::error::Result;
use crate::exponents::{admissible_c, Rational};
use crate::repcount::{count_ternary_mitm, count_ternary_naive};
use crate::seqeval::ValueTable;
use crate::window::window_from_index;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Targets around `N*`, drawn without replacement.
fn sample_targets(center: i64, spread: i64, count: usize, seed: u64) -> Vec<i64> {
    let mut pool: Vec<i64> = (center - spread..=center + spread).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pool.shuffle(&mut rng);
    pool.truncate(count);
    pool.sort_unstable();
    pool
}

/// Meet-in-the-middle against the triple loop on the k = 2 window.
pub fn oracle_equivalence(seed: u64) -> Result<Check> {
    let w = window_from_index(2, 1.05, 2.0, 0.05)?;
    let t = ValueTable::for_window(&w)?;
    let mut worst = 0.0f64;
    let mut count_mismatch = 0;
    for n in sample_targets(w.n_star, 200, 20, seed) {
        let fast = count_ternary_mitm(&t.entries, &t.logs, n)?;
        let slow = count_ternary_naive(&t.entries, &t.logs, n)?;
        if fast.count != slow.count {
            count_mismatch += 1;
        }
        worst = worst.max(rel(fast.weighted, slow.weighted));
    }
    Ok(Check {
        name: "oracle-equivalence",
        passed: count_mismatch == 0 && worst <= 1e-9,
        detail: format!("20 targets, {count_mismatch} count mismatches, max weight rel err {worst:.2e}"),
    })
}

/// Full-circle uniform sum of `S³ e(-Nα)` against the direct count.
pub fn dft_identity(seed: u64) -> Result<Check> {
    let w = window_from_index(2, 1.05, 2.0, 0.05)?;
    let t = ValueTable::for_window(&w)?;
    let m = 3 * t.max_f().unwrap_or(0) as usize + 1;
    let mut worst = 0.0f64;
    for n in sample_targets(w.n_star, 200, 10, seed ^ 0x5eed) {
        let gamma = count_ternary_mitm(&t.entries, &t.logs, n)?.weighted;
        let ci = circle_integral(&t.entries, &t.logs, n, (0.0, 1.0), m)?.value;
        let err = if gamma == 0.0 { ci.norm() } else { rel(ci.re, gamma).max(ci.im.abs() / gamma) };
        worst = worst.max(err);
    }
    Ok(Check {
        name: "dft-identity",
        passed: worst <= 1e-6,
        detail: format!("10 targets, M = {m}, max rel err {worst:.2e}"),
    })
}

/// `Ψ1(N*)` is the single weight `w(N*)`.
pub fn psi_orthogonality() -> Result<Check> {
    let w = window_from_index(2, 1.05, 2.0, 0.05)?;
    let psi = psi_k_exact(&w, w.n_star, 1)?;
    let weight = w.weight_w(w.n_star as f64)?;
    Ok(Check {
        name: "psi-orthogonality",
        passed: psi == weight,
        detail: format!("psi1 = {psi}, w = {weight}"),
    })
}

pub fn exponent_bound() -> Check {
    let got = admissible_c();
    Check {
        name: "exponent-chain",
        passed: got == Rational::new(23, 21),
        detail: format!("admissible c < {got}"),
    }
}

pub fn run_all(seed: u64) -> Result<Vec<Check>> {
    Ok(vec![
        oracle_equivalence(seed)?,
        dft_identity(seed)?,
        psi_orthogonality()?,
        exponent_bound(),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for check in run_all(7).unwrap() {
            assert!(check.passed, "{check}");
        }
    }

    #[test]
    fn sampling_is_seeded() {
        assert_eq!(sample_targets(100, 50, 10, 3), sample_targets(100, 50, 10, 3));
        assert_ne!(sample_targets(100, 50, 10, 3), sample_targets(100, 50, 10, 4));
        let s = sample_targets(100, 50, 10, 3);
        assert!(s.windows(2).all(|p| p[0] < p[1]));
        assert!(s.iter().all(|n| (50..=150).contains(n)));
    }
}

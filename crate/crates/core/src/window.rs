//! Admissible windows and the implicit function `y(t)`.
//!
//! For an index `k` the window is `(Δ1, Δ2]` with `log Δ1 = πk + π/4` and
//! `log Δ2 = πk + arctan 2`, so `tan(log y)` runs over `[1, 2]` and the map
//! `t(y) = y^c tan^θ(log y)` is smooth and strictly increasing on it. The
//! canonical scale is `X = Δ2` and the canonical target is
//! `N* = round(2^θ Δ2^c)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hp::{self, Ctx};

pub const DEFAULT_EPSILON: f64 = 0.05;
pub const DEFAULT_TOL_K: f64 = 1e-6;
/// Upper end of the range of `c` covered by the asymptotic formula.
pub const C_ADMISSIBLE: f64 = 23.0 / 21.0;
pub const TAU_MAX: f64 = 0.25;

/// Margin (in `log y`) by which the Newton bracket extends past the window.
const BRACKET_MARGIN: f64 = 0.1;
const MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowParams {
    pub c: f64,
    pub theta: f64,
    /// `[log X / π]`.
    pub k: u32,
    pub delta1: f64,
    pub delta2: f64,
    /// Canonical `X`, equal to `Δ2`.
    pub x: f64,
    pub n_star: i64,
    /// `Δ1^c`, the image of the lower endpoint.
    pub n1: f64,
    /// `2^θ Δ2^c`, the image of the upper endpoint.
    pub t_top: f64,
    pub epsilon: f64,
    pub tau: f64,
    pub tau_clipped: bool,
    /// `n_star - t_top`, evaluated in extended precision.
    pub n_star_residual: f64,
    /// Distance of the real window index from an integer (target-first mode).
    pub k_residual: Option<f64>,
}

fn validate(c: f64, theta: f64, epsilon: f64) -> Result<()> {
    if !(c.is_finite() && c > 1.0) {
        return Err(Error::InvalidParameter(format!("c must exceed 1, got {c}")));
    }
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "theta must be positive, got {theta}"
        )));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    Ok(())
}

/// Build the window with index `k`.
pub fn window_from_index(k: i64, c: f64, theta: f64, epsilon: f64) -> Result<WindowParams> {
    if k < 0 {
        return Err(Error::InvalidParameter(format!(
            "window index must be nonnegative, got {k}"
        )));
    }
    validate(c, theta, epsilon)?;
    let k = u32::try_from(k)
        .map_err(|_| Error::InvalidParameter(format!("window index {k} out of range")))?;

    let mut ctx = Ctx::new();
    let pi = ctx.pi();
    let one = ctx.u(1);
    let two = ctx.u(2);
    let four = ctx.u(4);
    let base = ctx.mul(&pi, &ctx.u(k as u64));
    let quarter_pi = ctx.div(&pi, &four);
    let atan2 = ctx.atan(&two);
    let log_d1 = ctx.add(&base, &quarter_pi);
    let log_d2 = ctx.add(&base, &atan2);
    let c_hp = ctx.f(c);
    let theta_hp = ctx.f(theta);

    let d1 = ctx.exp(&log_d1);
    let d2 = ctx.exp(&log_d2);
    let n1 = ctx.exp(&ctx.mul(&c_hp, &log_d1));
    let ln2 = ctx.ln(&two);
    let log_top = ctx.add(&ctx.mul(&theta_hp, &ln2), &ctx.mul(&c_hp, &log_d2));
    let t_top = ctx.exp(&log_top);
    let half = ctx.div(&one, &two);
    let n_star_hp = ctx.add(&t_top, &half).floor();
    let n_star = hp::to_u64(&n_star_hp)
        .filter(|&n| n < (1u64 << 62))
        .ok_or_else(|| Error::TooLarge(format!("window {k} target exceeds 2^62")))?;
    let residual = hp::to_f64(&ctx.sub(&n_star_hp, &t_top));

    let delta2 = hp::to_f64(&d2);
    let raw_tau = delta2.powf(1.0 - c - epsilon);
    let tau_clipped = raw_tau > TAU_MAX;

    let w = WindowParams {
        c,
        theta,
        k,
        delta1: hp::to_f64(&d1),
        delta2,
        x: delta2,
        n_star: n_star as i64,
        n1: hp::to_f64(&n1),
        t_top: hp::to_f64(&t_top),
        epsilon,
        tau: raw_tau.min(TAU_MAX),
        tau_clipped,
        n_star_residual: residual,
        k_residual: None,
    };
    Ok(w)
}

/// Target-first construction: find the window whose canonical target is `n`.
///
/// Succeeds only when the real window index
/// `((1/c) log(n / 2^θ) - arctan 2) / π` lies within `tol_k` of an integer.
pub fn solve_for_target(n: i64, c: f64, theta: f64, epsilon: f64, tol_k: f64) -> Result<WindowParams> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("target must be at least 2, got {n}")));
    }
    if !(tol_k.is_finite() && tol_k > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "index tolerance must be positive, got {tol_k}"
        )));
    }
    validate(c, theta, epsilon)?;
    let k_real = real_index(n, c, theta);
    let k_round = k_real.round();
    let residual = (k_real - k_round).abs();
    if residual > tol_k {
        return Err(Error::NoExactWindow {
            target: n,
            residual,
            tol: tol_k,
        });
    }
    if k_round < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "target {n} maps to negative window index {k_round}"
        )));
    }
    let mut w = window_from_index(k_round as i64, c, theta, epsilon)?;
    w.n_star_residual += (n - w.n_star) as f64;
    w.n_star = n;
    w.k_residual = Some(residual);
    Ok(w)
}

/// `((1/c) log(n / 2^θ) - arctan 2) / π` in extended precision.
pub fn real_index(n: i64, c: f64, theta: f64) -> f64 {
    let mut ctx = Ctx::new();
    let two = ctx.u(2);
    let pi = ctx.pi();
    let atan2 = ctx.atan(&two);
    let log_n = ctx.ln(&ctx.u(n.unsigned_abs()));
    let ln2 = ctx.ln(&two);
    let scaled = ctx.div(&ctx.sub(&log_n, &ctx.mul(&ctx.f(theta), &ln2)), &ctx.f(c));
    hp::to_f64(&ctx.div(&ctx.sub(&scaled, &atan2), &pi))
}

impl WindowParams {
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.theta <= 1.0 {
            out.push(format!(
                "theta = {} is not above 1; the asymptotic formula assumes theta > 1",
                self.theta
            ));
        }
        if self.c >= C_ADMISSIBLE {
            out.push(format!(
                "c = {} is outside (1, 23/21); results are exploratory",
                self.c
            ));
        }
        if self.tau_clipped {
            out.push(format!(
                "tau = X^(1-c-eps) exceeds {TAU_MAX} at this scale; clipped to {TAU_MAX}"
            ));
        }
        out
    }

    fn t_unchecked(&self, y: f64) -> f64 {
        y.powf(self.c) * y.ln().tan().powf(self.theta)
    }

    /// `dt/dy = y^(c-1) tan^(θ-1)(log y) (c tan(log y) + θ sec²(log y))`.
    fn dt_dy(&self, y: f64) -> f64 {
        let tan = y.ln().tan();
        let sec2 = 1.0 + tan * tan;
        y.powf(self.c - 1.0) * tan.powf(self.theta - 1.0) * (self.c * tan + self.theta * sec2)
    }

    /// `t(y) = y^c tan^θ(log y)` for `y` in `[Δ1, Δ2]`.
    pub fn forward_t(&self, y: f64) -> Result<f64> {
        if !(y >= self.delta1 && y <= self.delta2) {
            return Err(Error::OutOfWindow {
                y,
                lo: self.delta1,
                hi: self.delta2,
            });
        }
        Ok(self.t_unchecked(y))
    }

    /// Interval of `t` accepted by [`invert_y`](Self::invert_y): the image of
    /// the window widened by half a unit, so the rounded target is inside.
    pub fn t_domain(&self) -> (f64, f64) {
        (self.n1 - 0.5, self.t_top + 0.5)
    }

    /// Solve `t(y) = t` by bracketed Newton iteration.
    pub fn invert_y(&self, t: f64) -> Result<f64> {
        let (lo_t, hi_t) = self.t_domain();
        if !(t >= lo_t && t <= hi_t) {
            return Err(Error::OutOfRange { t, lo: lo_t, hi: hi_t });
        }
        let mut lo = self.delta1 * (-BRACKET_MARGIN).exp();
        let mut hi = self.delta2 * BRACKET_MARGIN.exp();
        // Start from the linear interpolation between the endpoints.
        let frac = ((t - self.n1) / (self.t_top - self.n1)).clamp(0.0, 1.0);
        let mut y = self.delta1 + frac * (self.delta2 - self.delta1);
        for _ in 0..MAX_ITER {
            let g = self.t_unchecked(y) - t;
            if g.abs() <= 1e-13 * t.abs() {
                return Ok(y);
            }
            if g < 0.0 {
                lo = y;
            } else {
                hi = y;
            }
            let step = g / self.dt_dy(y);
            let mut next = y - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if next == y || hi - lo <= 4.0 * f64::EPSILON * hi {
                return self.accept(y, t);
            }
            y = next;
        }
        self.accept(y, t)
    }

    fn accept(&self, y: f64, t: f64) -> Result<f64> {
        if (self.t_unchecked(y) - t).abs() <= 1e-9 * t.abs() {
            Ok(y)
        } else {
            Err(Error::NoConvergence(t))
        }
    }

    /// `dy/dt` at `t = m`:
    /// `y^(1-c) / ((c tan(log y) + θ sec²(log y)) tan^(θ-1)(log y))`.
    pub fn weight_w(&self, m: f64) -> Result<f64> {
        let y = self.invert_y(m)?;
        Ok(1.0 / self.dt_dy(y))
    }

    /// Integer grid `(N1, N*]` carrying the smooth weights.
    pub fn grid(&self) -> std::ops::RangeInclusive<i64> {
        (self.n1.floor() as i64 + 1)..=self.n_star
    }

    /// Integer range `(floor Δ1, floor Δ2]` holding the window's integers.
    pub fn integer_range(&self) -> std::ops::RangeInclusive<u64> {
        (self.delta1.floor() as u64 + 1)..=(self.delta2.floor() as u64)
    }
}

pub fn forward_t(y: f64, w: &WindowParams) -> Result<f64> {
    w.forward_t(y)
}

pub fn invert_y(t: f64, w: &WindowParams) -> Result<f64> {
    w.invert_y(t)
}

pub fn weight_w(m: f64, w: &WindowParams) -> Result<f64> {
    w.weight_w(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    // e^{π/4}, e^{arctan 2}: 50-digit oracle.
    const E_QUARTER_PI: f64 = 2.193_280_050_738_015_5;
    const E_ATAN2: f64 = 3.025_718_905_003_628_6;

    #[test]
    fn k0_endpoints() {
        let w = window_from_index(0, 1.05, 2.0, 0.05).unwrap();
        assert_relative_eq!(w.delta1, E_QUARTER_PI, max_relative = 1e-15);
        assert_relative_eq!(w.delta2, E_ATAN2, max_relative = 1e-15);
        assert_eq!(w.x, w.delta2);
        assert_eq!(w.k, 0);
    }

    #[test]
    fn lower_endpoint_has_unit_tangent() {
        for k in 0..8 {
            let w = window_from_index(k, 1.03, 2.0, 0.05).unwrap();
            assert_relative_eq!(w.delta1.ln().tan(), 1.0, max_relative = 1e-12);
            assert_relative_eq!(w.delta2.ln().tan(), 2.0, max_relative = 1e-12);
            assert_eq!((w.x.ln() / std::f64::consts::PI).floor() as u32, w.k);
        }
    }

    #[test]
    fn k2_canonical_target() {
        // 4 e^{1.05 (2π + arctan 2)} = 9378.2183945...
        let w = window_from_index(2, 1.05, 2.0, 0.05).unwrap();
        assert_eq!(w.n_star, 9378);
        assert_relative_eq!(w.t_top, 9378.218_394_525_272, max_relative = 1e-14);
        assert_relative_eq!(w.n_star_residual, -0.218_394_525_272_141_9, max_relative = 1e-9);
    }

    #[test]
    fn geometry_is_index_independent() {
        let ratio = (2f64.atan() - std::f64::consts::FRAC_PI_4).exp();
        for k in 0..10 {
            let w = window_from_index(k, 1.05, 2.0, 0.05).unwrap();
            assert_relative_eq!(w.delta2 / w.delta1, ratio, max_relative = 1e-12);
            assert!(w.delta2 < 2.0 * w.delta1);
            assert_relative_eq!(w.n1, w.delta1.powf(1.05), max_relative = 1e-12);
            assert_relative_eq!(w.t_top, 4.0 * w.delta2.powf(1.05), max_relative = 1e-12);
        }
    }

    #[test]
    fn tau_is_clipped() {
        let w = window_from_index(1, 1.05, 2.0, 0.05).unwrap();
        assert!(w.tau <= TAU_MAX);
        assert!(w.tau_clipped);
        assert!(w.warnings().iter().any(|m| m.contains("clipped")));
    }

    #[test]
    fn invalid_parameters() {
        assert!(matches!(window_from_index(-1, 1.05, 2.0, 0.05), Err(Error::InvalidParameter(_))));
        assert!(matches!(window_from_index(1, 1.0, 2.0, 0.05), Err(Error::InvalidParameter(_))));
        assert!(matches!(window_from_index(1, 1.05, 0.0, 0.05), Err(Error::InvalidParameter(_))));
        assert!(matches!(window_from_index(1, 1.05, 2.0, 0.0), Err(Error::InvalidParameter(_))));
        // theta in (0, 1] and c beyond 23/21 are warnings only
        let w = window_from_index(1, 1.2, 0.5, 0.05).unwrap();
        assert_eq!(w.warnings().len(), 3);
    }

    #[test]
    fn target_round_trip() {
        let w = window_from_index(3, 1.02, 1.5, DEFAULT_EPSILON).unwrap();
        let s = solve_for_target(w.n_star, 1.02, 1.5, DEFAULT_EPSILON, DEFAULT_TOL_K).unwrap();
        assert_eq!(s.k, 3);
        assert_eq!(s.n_star, w.n_star);
        assert!(s.k_residual.unwrap() <= 1e-6);
    }

    #[test]
    fn half_way_target_has_no_window() {
        // k_real = 2.5 for N = 2^θ exp(c (2.5π + arctan 2)).
        let n = (4.0 * (1.05 * (2.5 * std::f64::consts::PI + 2f64.atan())).exp()).round() as i64;
        let err = solve_for_target(n, 1.05, 2.0, 0.05, DEFAULT_TOL_K).unwrap_err();
        match err {
            Error::NoExactWindow { residual, .. } => assert!((residual - 0.5).abs() < 1e-3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tiny_target_is_rejected() {
        let err = solve_for_target(2, 1.05, 2.0, 0.05, DEFAULT_TOL_K).unwrap_err();
        assert!(matches!(err, Error::NoExactWindow { .. } | Error::InvalidParameter(_)));
        assert!(matches!(
            solve_for_target(1, 1.05, 2.0, 0.05, DEFAULT_TOL_K),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn forward_map_values() {
        let w = window_from_index(0, 1.05, 2.0, 0.05).unwrap();
        assert_relative_eq!(w.forward_t(w.delta1).unwrap(), w.delta1.powf(1.05), max_relative = 1e-13);
        assert_relative_eq!(w.forward_t(w.delta2).unwrap(), 4.0 * w.delta2.powf(1.05), max_relative = 1e-13);
        // 3^{1.05} tan²(log 3), 50-digit oracle
        assert_relative_eq!(w.forward_t(3.0).unwrap(), 12.151_152_629_945_54, max_relative = 1e-13);
        assert!(matches!(w.forward_t(2.0), Err(Error::OutOfWindow { .. })));
        assert!(matches!(w.forward_t(3.1), Err(Error::OutOfWindow { .. })));
    }

    #[test]
    fn inversion_endpoints() {
        let w = window_from_index(2, 1.05, 2.0, 0.05).unwrap();
        let top = w.forward_t(w.delta2).unwrap();
        let bottom = w.forward_t(w.delta1).unwrap();
        assert_relative_eq!(w.invert_y(top).unwrap(), w.delta2, max_relative = 1e-12);
        assert_relative_eq!(w.invert_y(bottom).unwrap(), w.delta1, max_relative = 1e-12);
        // N* = 9378 sits 0.218 below t(Δ2); y(N*) from a 40-digit root finder.
        let y = w.invert_y(w.n_star as f64).unwrap();
        assert_relative_eq!(y, 1620.240_988_925_711_3, max_relative = 1e-13);
        assert_relative_eq!(y, w.delta2, max_relative = 1e-5);
        assert!(matches!(w.invert_y(top + 10.0), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn weight_at_endpoints() {
        let (c, theta) = (1.05, 2.0);
        let w = window_from_index(2, c, theta, 0.05).unwrap();
        let top = w.forward_t(w.delta2).unwrap();
        let expect_top = w.delta2.powf(1.0 - c) / ((2.0 * c + 5.0 * theta) * 2f64.powf(theta - 1.0));
        assert_relative_eq!(w.weight_w(top).unwrap(), expect_top, max_relative = 1e-10);
        let bottom = w.forward_t(w.delta1).unwrap();
        let expect_bottom = w.delta1.powf(1.0 - c) / (c + 2.0 * theta);
        assert_relative_eq!(w.weight_w(bottom).unwrap(), expect_bottom, max_relative = 1e-10);
    }

    #[test]
    fn weight_matches_finite_difference() {
        let w = window_from_index(2, 1.05, 2.0, 0.05).unwrap();
        let h = 1e-3;
        for i in 1..50 {
            let m = w.n1 + (w.t_top - w.n1) * i as f64 / 50.0;
            let fd = (w.invert_y(m + h).unwrap() - w.invert_y(m - h).unwrap()) / (2.0 * h);
            assert_relative_eq!(w.weight_w(m).unwrap(), fd, max_relative = 1e-5);
        }
    }

    fn k2() -> WindowParams {
        window_from_index(2, 1.05, 2.0, 0.05).unwrap()
    }

    proptest! {
        #[test]
        fn forward_is_increasing(a in 0.0f64..1.0, b in 0.0f64..1.0) {
            prop_assume!(a != b);
            let w = k2();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let y1 = w.delta1 + lo * (w.delta2 - w.delta1);
            let y2 = w.delta1 + hi * (w.delta2 - w.delta1);
            prop_assume!(y1 < y2);
            prop_assert!(w.forward_t(y1).unwrap() < w.forward_t(y2).unwrap());
        }

        #[test]
        fn inversion_round_trip(s in 0.0f64..=1.0) {
            let w = k2();
            let t = w.n1 + s * (w.t_top - w.n1);
            let y = w.invert_y(t).unwrap();
            prop_assert!((w.t_unchecked(y) - t).abs() <= 1e-9 * t);
        }

        #[test]
        fn weight_is_positive(s in 0.0f64..=1.0) {
            let w = k2();
            let m = w.n1 + s * (w.t_top - w.n1);
            prop_assert!(w.weight_w(m).unwrap() > 0.0);
        }
    }
}

//! Exact bookkeeping of the power-of-`X` exponents behind the range of `c`.
//!
//! Every exponent is an affine function `a + b c` with rational coefficients.
//! Logarithms and `X^ε` factors count as exponent zero. The chain is built as
//! a list of named steps, solved for the admissible range of `c`, and each
//! `max` it takes is checked for the branch it assumes.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Reduced fraction with a positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn int(n: i64) -> Self {
        Rational::new(n, 1)
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn pow2(k: u32) -> Self {
        Rational(BigRational::from_integer(BigInt::one() << k))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl std::str::FromStr for Rational {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<BigInt>().map_err(|e| format!("`{s}`: {e}"));
        let r = match s.split_once('/') {
            Some((n, d)) => {
                let d = parse(d)?;
                if d.is_zero() {
                    return Err(format!("`{s}`: zero denominator"));
                }
                BigRational::new(parse(n)?, d)
            }
            None => BigRational::from_integer(parse(s)?),
        };
        Ok(Rational(r))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl $tr for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                Rational(self.0.$m(rhs.0))
            }
        }
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $m(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$m(&rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

/// `constant + slope · c`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Affine {
    pub constant: Rational,
    pub slope: Rational,
}

impl Affine {
    pub fn new(constant: Rational, slope: Rational) -> Self {
        Self { constant, slope }
    }

    pub fn constant(v: Rational) -> Self {
        Self::new(v, Rational::zero())
    }

    /// The variable `c` itself.
    pub fn c() -> Self {
        Self::new(Rational::zero(), Rational::one())
    }

    pub fn eval(&self, c: &Rational) -> Rational {
        &self.constant + &(&self.slope * c)
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self::new(&self.constant * k, &self.slope * k)
    }

    /// The `c` where `self = other`, if the lines cross.
    pub fn crossing(&self, other: &Affine) -> Option<Rational> {
        let d = self - other;
        if d.slope.is_zero() {
            None
        } else {
            Some(-d.constant / d.slope)
        }
    }

    /// True when `self >= other` on the whole interval `[lo, hi]`.
    pub fn dominates_on(&self, other: &Affine, lo: &Rational, hi: &Rational) -> bool {
        let d = self - other;
        !d.eval(lo).is_negative() && !d.eval(hi).is_negative()
    }
}

impl Add for &Affine {
    type Output = Affine;
    fn add(self, rhs: &Affine) -> Affine {
        Affine::new(&self.constant + &rhs.constant, &self.slope + &rhs.slope)
    }
}

impl Sub for &Affine {
    type Output = Affine;
    fn sub(self, rhs: &Affine) -> Affine {
        Affine::new(&self.constant - &rhs.constant, &self.slope - &rhs.slope)
    }
}

impl fmt::Display for Affine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use num_integer::Integer;
        let d = self.constant.denom().lcm(self.slope.denom());
        let a = self.constant.numer() * (&d / self.constant.denom());
        let b = self.slope.numer() * (&d / self.slope.denom());
        let c_term = |b: &BigInt| {
            if b.abs().is_one() {
                "c".to_string()
            } else {
                format!("{}c", b.abs())
            }
        };
        let body = match (a.is_zero(), b.is_zero()) {
            (_, true) => a.to_string(),
            (true, false) => {
                let sign = if b.is_negative() { "-" } else { "" };
                format!("{sign}{}", c_term(&b))
            }
            (false, false) => {
                let sign = if b.is_negative() { '-' } else { '+' };
                format!("{a} {sign} {}", c_term(&b))
            }
        };
        if d.is_one() {
            write!(f, "{body}")
        } else if !a.is_zero() && !b.is_zero() {
            write!(f, "({body})/{d}")
        } else {
            write!(f, "{body}/{d}")
        }
    }
}

impl Serialize for Affine {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Exponent of `max(F^{1/(4Q-2)} N^{1-(k+2)/(4Q-2)}, F^{-1} N)` with
/// `Q = 2^k`, `F = X^{f_exp}` and `N = X`.
pub fn gk_exponent(k: u32, f_exp: &Rational) -> Result<Rational> {
    if k > 8 {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds 8")));
    }
    let d = Rational::int(4) * Rational::pow2(k) - Rational::int(2);
    let first = &(f_exp / &d) + &(Rational::one() - Rational::int(k as i64 + 2) / d);
    Ok(first.max(Rational::one() - f_exp.clone()))
}

/// `σ(c) = (11 + 3c)/15`, the exponent of the minor-arc bound for `S(α)`.
pub fn sigma() -> Affine {
    Affine::new(Rational::new(11, 15), Rational::new(1, 5))
}

pub fn minor_arc_exponent(c: &Rational) -> Rational {
    sigma().eval(c)
}

/// `h` with `X^{1-h} = X^σ`: the Fourier cutoff for the prime sum.
fn cutoff_h() -> Affine {
    &Affine::constant(Rational::one()) - &sigma()
}

/// `h0` with `X^{1-h0} = X^{h0/2 + c/2}`: the cutoff for `A(α)`.
fn cutoff_h0() -> Affine {
    // 1 - h0 = h0/2 + c/2  =>  h0 = (1 - c/2) / (3/2)
    let rhs = &Affine::constant(Rational::one()) - &Affine::c().scale(&Rational::new(1, 2));
    rhs.scale(&Rational::new(2, 3))
}

/// `(H, H0)` exponents `((4 - 3c)/15, (2 - c)/3)`.
pub fn cutoffs(c: &Rational) -> (Rational, Rational) {
    (cutoff_h().eval(c), cutoff_h0().eval(c))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Step {
    pub name: &'static str,
    pub expression: String,
    pub value: Affine,
}

/// The derivation from the minor-arc bound to the admissible range of `c`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Chain {
    pub steps: Vec<Step>,
    /// Supremum of admissible `c`.
    pub admissible: Rational,
    /// Every assumed branch of a `max`, with whether it holds on `(1, admissible]`.
    pub checks: Vec<(String, bool)>,
}

impl Chain {
    pub fn step(&self, name: &str) -> Option<&Affine> {
        self.steps.iter().find(|s| s.name == name).map(|s| &s.value)
    }

    pub fn is_consistent(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }

    /// Rows `step,expression,value`, closing with the solved bound.
    pub fn table(&self) -> Vec<[String; 3]> {
        let mut rows: Vec<[String; 3]> = self
            .steps
            .iter()
            .map(|s| [s.name.to_string(), s.expression.clone(), s.value.to_string()])
            .collect();
        rows.push([
            "admissible_c".into(),
            "gamma2 < main".into(),
            format!("c < {}", self.admissible),
        ]);
        for (what, ok) in &self.checks {
            rows.push(["check".into(), what.clone(), ok.to_string()]);
        }
        rows
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        wtr.write_record(["step", "expression", "value"])?;
        for row in self.table() {
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

pub fn exponent_chain() -> Chain {
    let one = || Affine::constant(Rational::one());
    let c = Affine::c();
    let sigma = sigma();
    let h = cutoff_h();
    let h0 = cutoff_h0();
    // van der Corput with k = 0 and F = X^c: F^{1/2} dominates F^{-1} N.
    let gk0 = c.scale(&Rational::new(1, 2));
    let a_exp = &one() - &h0;
    let mean_square = one();
    let t1 = &(&one() - &c) + &sigma.scale(&Rational::int(2));
    let t2 = &a_exp + &mean_square;
    let inner = t1.clone();
    let gamma2_sq = &(&one() + &mean_square) + &inner;
    let gamma2 = gamma2_sq.scale(&Rational::new(1, 2));
    let main = &Affine::constant(Rational::int(3)) - &c;

    // Γ2 < X^{3-c} iff main - gamma2 > 0; the difference decreases in c.
    let margin = &main - &gamma2;
    let admissible = gamma2.crossing(&main).expect("lines cross");
    debug_assert!(margin.slope.is_negative());

    let lo = Rational::one();
    let hi = admissible.clone();
    let gk_check = (1..=16).all(|i| {
        let cc = &lo + &(&(&hi - &lo) * &Rational::new(i, 16));
        gk_exponent(0, &cc).map(|g| g == gk0.eval(&cc)).unwrap_or(false)
    });
    let checks = vec![
        ("k=0 bound is X^(c/2) on the range".to_string(), gk_check),
        (
            "t1 >= t2 on the range".to_string(),
            t1.dominates_on(&t2, &lo, &hi),
        ),
        (
            "h, h0 > 0 on the range".to_string(),
            [&h, &h0].iter().all(|e| e.eval(&lo).is_positive() && e.eval(&hi).is_positive()),
        ),
        (
            "sigma balances h".to_string(),
            (&one() - &h) == sigma,
        ),
        (
            "h0 balances vdc".to_string(),
            (&one() - &h0) == &h0.scale(&Rational::new(1, 2)) + &gk0,
        ),
        (
            "equality at the bound".to_string(),
            gamma2.eval(&admissible) == main.eval(&admissible),
        ),
    ];

    let step = |name, expression: &str, value: &Affine| Step {
        name,
        expression: expression.to_string(),
        value: value.clone(),
    };
    let steps = vec![
        step("sigma", "minor-arc bound for S(alpha)", &sigma),
        step("h", "1 - h = sigma", &h),
        step("vdc_k0", "gk_exponent(0, c)", &gk0),
        step("h0", "1 - h0 = h0/2 + c/2", &h0),
        step("a_alpha", "1 - h0", &a_exp),
        step("mean_square", "integral of |S|^2 over the minor arcs", &mean_square),
        step("t1", "1 - c + 2 sigma", &t1),
        step("t2", "a_alpha + mean_square", &t2),
        step("inner", "max(t1, t2)", &inner),
        step("gamma2_sq", "1 + mean_square + inner", &gamma2_sq),
        step("gamma2", "gamma2_sq / 2", &gamma2),
        step("main", "3 - c", &main),
        step("margin", "main - gamma2", &margin),
    ];
    Chain {
        steps,
        admissible,
        checks,
    }
}

/// Supremum of `c` for which the minor arcs stay below the main term.
pub fn admissible_c() -> Rational {
    exponent_chain().admissible
}

/// Earlier published upper bounds for `c` in the classical problem.
pub const HISTORICAL_BOUNDS: [(i64, i64); 6] =
    [(17, 16), (12, 11), (258, 235), (137, 119), (3113, 2703), (3581, 3106)];

/// The historical bounds together with [`admissible_c`], in increasing order.
pub fn ordered_bounds() -> Vec<Rational> {
    let mut all: Vec<Rational> = HISTORICAL_BOUNDS.iter().map(|&(n, d)| Rational::new(n, d)).collect();
    all.push(admissible_c());
    all.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    all
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn rationals_are_reduced() {
        let r = q(10, -4);
        assert_eq!(r.to_string(), "-5/2");
        assert_eq!(*r.denom(), BigInt::from(2));
        assert_eq!("6/4".parse::<Rational>().unwrap(), q(3, 2));
        assert_eq!("7".parse::<Rational>().unwrap(), Rational::int(7));
        assert!("1/0".parse::<Rational>().is_err());
        assert_eq!(&q(1, 3) + &q(1, 6), q(1, 2));
    }

    #[test]
    fn affine_display() {
        assert_eq!(sigma().to_string(), "(11 + 3c)/15");
        assert_eq!(cutoff_h().to_string(), "(4 - 3c)/15");
        assert_eq!(cutoff_h0().to_string(), "(2 - c)/3");
        assert_eq!(Affine::c().scale(&q(1, 2)).to_string(), "c/2");
        assert_eq!((&Affine::constant(q(3, 1)) - &Affine::c()).to_string(), "3 - c");
        assert_eq!(Affine::constant(q(1, 1)).to_string(), "1");
    }

    #[test]
    fn gk_examples() {
        assert_eq!(gk_exponent(1, &Rational::zero()).unwrap(), Rational::one());
        assert_eq!(gk_exponent(1, &Rational::int(3)).unwrap(), Rational::one());
        assert_eq!(gk_exponent(0, &Rational::one()).unwrap(), q(1, 2));
        assert!(gk_exponent(9, &Rational::one()).is_err());
        // Q = 256: (f - 10)/1022 + 1
        assert_eq!(gk_exponent(8, &Rational::int(1032)).unwrap(), Rational::int(2));
    }

    #[test]
    fn minor_arc_values() {
        assert_eq!(minor_arc_exponent(&Rational::one()), q(14, 15));
        assert_eq!(minor_arc_exponent(&q(23, 21)), q(20, 21));
        assert!(minor_arc_exponent(&q(11, 10)) > minor_arc_exponent(&q(21, 20)));
    }

    #[test]
    fn cutoff_values() {
        assert_eq!(cutoffs(&Rational::one()), (q(1, 15), q(1, 3)));
        assert_eq!(cutoffs(&q(23, 21)), (q(1, 21), q(19, 63)));
        for c in [q(1, 1), q(23, 21)] {
            let (h, h0) = cutoffs(&c);
            assert!(h.is_positive() && h0.is_positive());
        }
    }

    #[test]
    fn chain_solves_to_23_over_21() {
        let chain = exponent_chain();
        assert_eq!(admissible_c(), q(23, 21));
        assert!(chain.is_consistent(), "{:?}", chain.checks);
        let t1 = chain.step("t1").unwrap();
        assert_eq!(*t1, Affine::new(q(37, 15), q(-9, 15)));
        assert_eq!(*chain.step("t2").unwrap(), Affine::new(q(4, 3), q(1, 3)));
        assert_eq!(*chain.step("gamma2_sq").unwrap(), Affine::new(q(67, 15), q(-9, 15)));
        // t1 stops dominating t2 only at 17/14, past the admissible range
        assert_eq!(t1.crossing(chain.step("t2").unwrap()), Some(q(17, 14)));
        let gamma2 = chain.step("gamma2").unwrap();
        let main = chain.step("main").unwrap();
        assert_eq!(gamma2.eval(&q(23, 21)), main.eval(&q(23, 21)));
        assert!(gamma2.eval(&q(22, 21)) < main.eval(&q(22, 21)));
        assert!(gamma2.eval(&q(24, 21)) > main.eval(&q(24, 21)));
    }

    #[test]
    fn historical_order_is_computed() {
        let a = admissible_c();
        assert!(a >= q(17, 16));
        assert!(a < q(6, 5));
        let got: Vec<String> = ordered_bounds().iter().map(|r| r.to_string()).collect();
        assert_eq!(got, ["17/16", "12/11", "23/21", "258/235", "137/119", "3113/2703", "3581/3106"]);
    }

    #[test]
    fn table_layout() {
        let mut buf = Vec::new();
        exponent_chain().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("step,expression,value\nsigma,minor-arc bound for S(alpha),(11 + 3c)/15\n"));
        assert!(text.contains("admissible_c,gamma2 < main,c < 23/21\n"));
        assert!(text.contains("t1,1 - c + 2 sigma,(37 - 9c)/15\n"));
    }
}

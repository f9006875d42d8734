//! Working-precision abstraction.
//!
//! Every numeric routine in this crate is generic over [`Scalar`], so the same
//! code path runs in ordinary binary64 or in software double-double precision
//! (~31 significant digits, the `extended` setting in run configurations).
//!
//! The double-double backend reuses [`twofloat::TwoFloat`] for error-free
//! arithmetic but supplies its own transcendental functions: the ones shipped
//! with that crate are only accurate to roughly binary64 level, which would
//! defeat the point of the mode.

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_traits::{Num, NumAssignOps};
use twofloat::TwoFloat;

/// Floating-point scalar the solver pipeline can run on.
pub trait Scalar:
    Num
    + NumAssignOps
    + Neg<Output = Self>
    + PartialOrd
    + Copy
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;

    /// Machine epsilon (unit roundoff times two) of the representation.
    fn eps() -> Self;

    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin_cos(self) -> (Self, Self);
    /// Four-quadrant arctangent, `self` being the ordinate.
    fn atan2(self, x: Self) -> Self;
    fn round(self) -> Self;
    fn floor(self) -> Self;
    fn is_finite(self) -> bool;
    fn is_nan(self) -> bool;

    fn pi() -> Self;

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn powi(self, n: i32) -> Self {
        if n < 0 {
            return Self::one() / self.powi(-n);
        }
        let mut acc = Self::one();
        let mut base = self;
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    fn hypot(self, other: Self) -> Self {
        let (a, b) = (self.abs(), other.abs());
        let (hi, lo) = if a > b { (a, b) } else { (b, a) };
        if hi == Self::zero() {
            return Self::zero();
        }
        let r = lo / hi;
        hi * (Self::one() + r * r).sqrt()
    }

    fn two_pi() -> Self {
        Self::pi() * Self::from_f64(2.0)
    }

    fn sqrt_2() -> Self {
        Self::from_f64(2.0).sqrt()
    }

    /// 2/sqrt(pi), the slope of erf at the origin.
    fn frac_2_sqrt_pi() -> Self {
        Self::from_f64(2.0) / Self::pi().sqrt()
    }

    /// sqrt(2/pi), e.g. the half-normal mean for unit sigma.
    fn sqrt_2_over_pi() -> Self {
        (Self::from_f64(2.0) / Self::pi()).sqrt()
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn eps() -> Self {
        f64::EPSILON
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin_cos(self) -> (Self, Self) {
        f64::sin_cos(self)
    }
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
    fn round(self) -> Self {
        f64::round(self)
    }
    fn floor(self) -> Self {
        f64::floor(self)
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn is_nan(self) -> bool {
        f64::is_nan(self)
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn hypot(self, other: Self) -> Self {
        f64::hypot(self, other)
    }
}

// Double-double constants, stored as (leading, trailing) binary64 legs.
const DD_PI: (f64, f64) = (3.141592653589793, 1.2246467991473532e-16);
const DD_LN2: (f64, f64) = (0.6931471805599453, 2.3190468138462996e-17);
// 2^-104: conservative unit roundoff for a double-double significand.
const DD_EPS: f64 = 4.930380657631324e-32;

fn dd(hi: f64, lo: f64) -> TwoFloat {
    TwoFloat::try_from((hi, lo)).expect("constant legs are normalized")
}

fn dd_two_pi() -> TwoFloat {
    dd(DD_PI.0, DD_PI.1) * 2.0
}

fn dd_half_pi() -> TwoFloat {
    dd(DD_PI.0, DD_PI.1) * 0.5
}

/// exp for double-double: range-reduce by ln 2, Maclaurin on the remainder.
fn dd_exp(x: TwoFloat) -> TwoFloat {
    let xf = x.hi();
    if xf >= 709.0 {
        return TwoFloat::from(f64::INFINITY);
    }
    if xf <= -745.0 {
        return TwoFloat::from(0.0);
    }
    let k = (xf / std::f64::consts::LN_2).round();
    let r = x - dd(DD_LN2.0, DD_LN2.1) * k;
    let mut sum = TwoFloat::from(1.0);
    let mut term = TwoFloat::from(1.0);
    let mut n = 1.0;
    loop {
        term = term * r / n;
        sum += term;
        if term.hi().abs() < DD_EPS * sum.hi().abs() || n > 40.0 {
            break;
        }
        n += 1.0;
    }
    // scale by 2^k; k is within f64 exponent range after the clamps above
    sum * (2.0f64).powi(k as i32)
}

/// ln via one f64 seed plus Newton on exp (doubles the correct digits).
fn dd_ln(x: TwoFloat) -> TwoFloat {
    if x.hi() <= 0.0 {
        return TwoFloat::from(f64::NAN);
    }
    let mut y = TwoFloat::from(x.hi().ln());
    for _ in 0..2 {
        y += x * dd_exp(-y) - 1.0;
    }
    y
}

/// sin and cos with quadrant reduction against a double-double pi.
fn dd_sin_cos(x: TwoFloat) -> (TwoFloat, TwoFloat) {
    if !x.hi().is_finite() {
        return (TwoFloat::from(f64::NAN), TwoFloat::from(f64::NAN));
    }
    let n = (x.hi() / (2.0 * std::f64::consts::PI)).round();
    let r = x - dd_two_pi() * n;
    let q = (r.hi() / std::f64::consts::FRAC_PI_2).round();
    let t = r - dd_half_pi() * q;

    // |t| <= pi/4 + slop; Maclaurin for both series
    let t2 = t * t;
    let mut sin_t = t;
    let mut term = t;
    let mut n_f = 1.0;
    loop {
        term = -term * t2 / ((n_f + 1.0) * (n_f + 2.0));
        sin_t += term;
        if term.hi().abs() < DD_EPS || n_f > 40.0 {
            break;
        }
        n_f += 2.0;
    }
    let mut cos_t = TwoFloat::from(1.0);
    term = TwoFloat::from(1.0);
    n_f = 0.0;
    loop {
        term = -term * t2 / ((n_f + 1.0) * (n_f + 2.0));
        cos_t += term;
        if term.hi().abs() < DD_EPS || n_f > 40.0 {
            break;
        }
        n_f += 2.0;
    }

    match (q as i64).rem_euclid(4) {
        0 => (sin_t, cos_t),
        1 => (cos_t, -sin_t),
        2 => (-sin_t, -cos_t),
        _ => (-cos_t, sin_t),
    }
}

/// atan2 via an f64 seed refined by Newton steps on y cos t - x sin t = 0.
fn dd_atan2(y: TwoFloat, x: TwoFloat) -> TwoFloat {
    if y.hi() == 0.0 && y.lo() == 0.0 {
        return if x.hi() >= 0.0 {
            TwoFloat::from(0.0)
        } else {
            dd(DD_PI.0, DD_PI.1)
        };
    }
    if x.hi() == 0.0 && x.lo() == 0.0 {
        let h = dd_half_pi();
        return if y.hi() > 0.0 { h } else { -h };
    }
    let mut t = TwoFloat::from(y.hi().atan2(x.hi()));
    for _ in 0..2 {
        let (s, c) = dd_sin_cos(t);
        t += (y * c - x * s) / (x * c + y * s);
    }
    t
}

impl Scalar for TwoFloat {
    fn from_f64(x: f64) -> Self {
        TwoFloat::from(x)
    }
    fn to_f64(self) -> f64 {
        self.hi()
    }
    fn eps() -> Self {
        TwoFloat::from(DD_EPS)
    }
    fn abs(self) -> Self {
        TwoFloat::abs(&self)
    }
    fn sqrt(self) -> Self {
        TwoFloat::sqrt(self)
    }
    fn exp(self) -> Self {
        dd_exp(self)
    }
    fn ln(self) -> Self {
        dd_ln(self)
    }
    fn sin_cos(self) -> (Self, Self) {
        dd_sin_cos(self)
    }
    fn atan2(self, x: Self) -> Self {
        dd_atan2(self, x)
    }
    fn round(self) -> Self {
        TwoFloat::round(self)
    }
    fn floor(self) -> Self {
        TwoFloat::floor(self)
    }
    fn is_finite(self) -> bool {
        self.hi().is_finite()
    }
    fn is_nan(self) -> bool {
        self.hi().is_nan()
    }
    fn pi() -> Self {
        dd(DD_PI.0, DD_PI.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dd_close(a: TwoFloat, b: TwoFloat, tol: f64) -> bool {
        let scale = b.hi().abs().max(1.0);
        ((a - b).hi() / scale).abs() < tol
    }

    #[test]
    fn dd_exp_anchors() {
        // e as double-double (leading + trailing legs of the true value)
        let e = dd(2.718281828459045, 1.4456468917292502e-16);
        assert!(dd_close(dd_exp(TwoFloat::from(1.0)), e, 1e-30));
        assert!(dd_close(dd_exp(TwoFloat::from(0.0)), TwoFloat::from(1.0), 1e-31));
        // exp(a)exp(-a) = 1
        for k in 1..40 {
            let a = TwoFloat::from(k as f64 * 0.37 - 7.0);
            let p = dd_exp(a) * dd_exp(-a);
            assert!(dd_close(p, TwoFloat::from(1.0), 1e-29), "a={a:?} p={p:?}");
        }
        // exp(a+b) = exp(a)exp(b)
        let a = TwoFloat::from(1.25) + TwoFloat::from(3e-18);
        let b = TwoFloat::from(-0.7);
        assert!(dd_close(dd_exp(a + b), dd_exp(a) * dd_exp(b), 1e-29));
    }

    #[test]
    fn dd_ln_inverts_exp() {
        for k in 0..50 {
            let x = TwoFloat::from(0.003 + 1.7 * k as f64);
            let r = dd_exp(dd_ln(x));
            assert!(dd_close(r, x, 1e-29), "x={x:?} r={r:?}");
        }
        assert!(dd_close(dd_ln(dd_exp(TwoFloat::from(3.5))), TwoFloat::from(3.5), 1e-30));
    }

    #[test]
    fn dd_sin_cos_identities() {
        let pi = dd(DD_PI.0, DD_PI.1);
        // algebraic anchors
        let (s, _) = dd_sin_cos(pi / 6.0);
        assert!(dd_close(s, TwoFloat::from(0.5), 1e-30));
        let (_, c) = dd_sin_cos(pi / 3.0);
        assert!(dd_close(c, TwoFloat::from(0.5), 1e-30));
        let (s4, c4) = dd_sin_cos(pi / 4.0);
        let half_sqrt2 = TwoFloat::sqrt(TwoFloat::from(2.0)) * 0.5;
        assert!(dd_close(s4, half_sqrt2, 1e-30));
        assert!(dd_close(c4, half_sqrt2, 1e-30));
        // pythagorean identity across a range incl. large args
        for k in 0..80 {
            let x = TwoFloat::from(-40.0 + 7.3 * k as f64 / 8.0);
            let (s, c) = dd_sin_cos(x);
            assert!(dd_close(s * s + c * c, TwoFloat::from(1.0), 1e-29), "x={x:?}");
        }
        // double angle
        let x = TwoFloat::from(0.83);
        let (s, c) = dd_sin_cos(x);
        let (s2, _) = dd_sin_cos(x * 2.0);
        assert!(dd_close(s2, s * c * 2.0, 1e-29));
    }

    #[test]
    fn dd_atan2_round_trip() {
        let pi = dd(DD_PI.0, DD_PI.1);
        assert!(dd_close(dd_atan2(TwoFloat::from(1.0), TwoFloat::from(1.0)), pi / 4.0, 1e-30));
        for k in 0..60 {
            let theta = TwoFloat::from(-3.1 + 6.2 * k as f64 / 59.0);
            let (s, c) = dd_sin_cos(theta);
            let r = dd_atan2(s * 2.5, c * 2.5);
            assert!(dd_close(r, theta, 1e-29), "theta={theta:?} r={r:?}");
        }
        // axis conventions match f64
        for (y, x) in [(0.0, 2.0), (0.0, -2.0), (3.0, 0.0), (-3.0, 0.0)] {
            let got = dd_atan2(TwoFloat::from(y), TwoFloat::from(x)).hi();
            assert!((got - y.atan2(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn f64_scalar_plumbing() {
        assert_eq!(<f64 as Scalar>::from_f64(1.5), 1.5);
        assert!((f64::sqrt_2() - std::f64::consts::SQRT_2).abs() < 1e-16);
        assert!((f64::frac_2_sqrt_pi() - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-16);
        assert!((2.0f64.powi(10) - 1024.0).abs() == 0.0);
        assert!((Scalar::hypot(3.0f64, 4.0) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn dd_derived_constants() {
        // self-validating: (sqrt(2/pi))^2 * pi/2 = 1, sqrt2^2 = 2, (2/sqrt(pi))^2 * pi = 4
        let v = TwoFloat::sqrt_2_over_pi();
        assert!(dd_close(v * v * <TwoFloat as Scalar>::pi() * 0.5, TwoFloat::from(1.0), 1e-30));
        let s2 = TwoFloat::sqrt_2();
        assert!(dd_close(s2 * s2, TwoFloat::from(2.0), 1e-30));
        let f = TwoFloat::frac_2_sqrt_pi();
        assert!(dd_close(f * f * <TwoFloat as Scalar>::pi(), TwoFloat::from(4.0), 1e-30));
    }
}

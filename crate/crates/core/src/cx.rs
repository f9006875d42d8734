//! Complex helpers over a generic [`Scalar`].
//!
//! `num_complex` only provides transcendental methods through
//! `num_traits::Float`; routing them through [`Scalar`] instead keeps the
//! double-double backend honest.

use num_complex::Complex;

use crate::scalar::Scalar;

pub type C<S> = Complex<S>;

pub fn c<S: Scalar>(re: f64, im: f64) -> C<S> {
    Complex::new(S::from_f64(re), S::from_f64(im))
}

pub fn re<S: Scalar>(x: S) -> C<S> {
    Complex::new(x, S::zero())
}

pub fn cabs<S: Scalar>(z: C<S>) -> S {
    z.re.hypot(z.im)
}

pub fn carg<S: Scalar>(z: C<S>) -> S {
    z.im.atan2(z.re)
}

pub fn cexp<S: Scalar>(z: C<S>) -> C<S> {
    let m = z.re.exp();
    let (s, c0) = z.im.sin_cos();
    Complex::new(m * c0, m * s)
}

/// exp(z) - 1 with the cancellation near z = 0 removed by series.
pub fn cexp_m1<S: Scalar>(z: C<S>) -> C<S> {
    if cabs(z) > S::from_f64(1e-3) {
        return cexp(z) - re(S::one());
    }
    let mut sum = z;
    let mut term = z;
    let mut n = 2.0;
    loop {
        term = term * z / re(S::from_f64(n));
        sum += term;
        if cabs(term) <= S::eps() * cabs(sum) || n > 20.0 {
            return sum;
        }
        n += 1.0;
    }
}

pub fn is_finite_c<S: Scalar>(z: C<S>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

pub fn to_c64<S: Scalar>(z: C<S>) -> Complex<f64> {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

pub fn from_c64<S: Scalar>(z: Complex<f64>) -> C<S> {
    Complex::new(S::from_f64(z.re), S::from_f64(z.im))
}

/// A complex value stored as `mantissa * exp(log_scale)`.
///
/// Characteristic functions with Gaussian-type claim transforms overflow
/// binary64 far into the left half-plane while their phase stays perfectly
/// meaningful; winding-number walks therefore evaluate in this form.
/// Multiplying by the positive real factor `exp(log_scale)` never moves the
/// argument, so phases read off the mantissa are exact.
#[derive(Clone, Copy, Debug)]
pub struct Scaled<S: Scalar> {
    pub mantissa: C<S>,
    pub log_scale: S,
}

impl<S: Scalar> Scaled<S> {
    pub fn from_complex(z: C<S>) -> Self {
        Scaled { mantissa: z, log_scale: S::zero() }.normalized()
    }

    pub fn new(mantissa: C<S>, log_scale: S) -> Self {
        Scaled { mantissa, log_scale }.normalized()
    }

    pub fn zero() -> Self {
        Scaled { mantissa: C::new(S::zero(), S::zero()), log_scale: S::zero() }
    }

    fn normalized(mut self) -> Self {
        let m = cabs(self.mantissa);
        if m == S::zero() || !m.is_finite() {
            return self;
        }
        let hi = S::from_f64(1e100);
        let lo = S::from_f64(1e-100);
        if m > hi || m < lo {
            let d = m.ln();
            self.mantissa = self.mantissa * re((-d).exp());
            self.log_scale += d;
        }
        self
    }

    pub fn add(self, other: Self) -> Self {
        if cabs(other.mantissa) == S::zero() {
            return self;
        }
        if cabs(self.mantissa) == S::zero() {
            return other;
        }
        let (big, small) = if self.log_scale >= other.log_scale {
            (self, other)
        } else {
            (other, self)
        };
        let shift = small.log_scale - big.log_scale;
        // exp(shift) underflows harmlessly when the scales are far apart
        let folded = if shift < S::from_f64(-746.0) {
            C::new(S::zero(), S::zero())
        } else {
            small.mantissa * re(shift.exp())
        };
        Scaled { mantissa: big.mantissa + folded, log_scale: big.log_scale }.normalized()
    }

    pub fn mul_complex(self, z: C<S>) -> Self {
        Scaled { mantissa: self.mantissa * z, log_scale: self.log_scale }.normalized()
    }

    pub fn arg(self) -> S {
        carg(self.mantissa)
    }

    pub fn log_abs(self) -> S {
        cabs(self.mantissa).ln() + self.log_scale
    }

    /// Collapses to a plain complex number; infinite if the scale overflows.
    pub fn to_complex(self) -> C<S> {
        if cabs(self.mantissa) == S::zero() {
            return self.mantissa;
        }
        self.mantissa * re(self.log_scale.exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cexp_matches_std() {
        for (x, y) in [(0.3, -1.2), (-4.0, 9.7), (2.0, 0.0)] {
            let ours = cexp(c::<f64>(x, y));
            let std = Complex::new(x, y).exp();
            assert!((ours - std).norm() < 1e-14 * std.norm().max(1.0));
        }
    }

    #[test]
    fn cexp_m1_small_argument() {
        let z = c::<f64>(1e-9, -2e-9);
        let got = cexp_m1(z);
        // exp(z)-1 = z + z^2/2 + ... ; the quadratic term is ~1e-18
        let expect = z + z * z * 0.5;
        assert!((got - expect).norm() < 1e-24);
    }

    #[test]
    fn scaled_addition_spans_ranges() {
        // 1e300 * e^500 + 1.0 stays finite in scaled form
        let a = Scaled::new(c::<f64>(1e300, 0.0), 500.0);
        let b = Scaled::from_complex(c::<f64>(1.0, 0.0));
        let sum = a.add(b);
        assert!((sum.log_abs() - (500.0 + 300.0 * std::f64::consts::LN_10)).abs() < 1e-9);
        assert!(sum.arg().abs() < 1e-15);

        // comparable scales really add
        let p = Scaled::new(c::<f64>(2.0, 0.0), 10.0);
        let q = Scaled::new(c::<f64>(3.0 * 1f64.exp(), 0.0), 9.0);
        let s = p.add(q);
        assert!((s.to_complex().re - 5.0 * 10f64.exp()).abs() < 1e-9 * 5.0 * 10f64.exp());
    }

    #[test]
    fn scaled_phase_is_scale_free() {
        let z = c::<f64>(-3.0, 4.0);
        let a = Scaled::new(z, 800.0);
        assert!((a.arg() - z.arg()).abs() < 1e-15);
    }
}

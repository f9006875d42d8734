//! Complex-analytic layer: claim-density Laplace transforms, premium moment
//! functions, and the characteristic function
//!
//! ```text
//! D(s) = -lambda1 - lambda2 + lambda1 M_C(s) + lambda2 L(f_X)(s)
//! ```
//!
//! whose left-half-plane zeros drive everything downstream. All catalog
//! transforms are closed forms; derivatives are assembled analytically, never
//! by numerical differentiation.

mod erfc;

pub use erfc::{complex_erfc, erf_real, erfcx, erfcx_real, erfcx_scaled};

use thiserror::Error;

use crate::cx::{cabs, cexp, cexp_m1, re, Scaled, C};
use crate::model::{BonusMalusSystem, DistributionSpec, ModelError};
use crate::scalar::Scalar;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum TransformError {
    #[error("evaluation point within 1e-12 of the catalog pole at {pole_re}{pole_im:+}i (order {order})")]
    PoleHit { pole_re: f64, pole_im: f64, order: u32 },
    #[error("value overflows the floating range (log magnitude {log_magnitude:.1})")]
    Overflow { log_magnitude: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A pole of the analytically continued transform, with multiplicity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pole<S> {
    pub location: S,
    pub order: u32,
}

/// Poles contributed by a law's transform: claims contribute s = -rate for
/// exponential/gamma, premiums mirror to s = +rate. Gaussian-type and
/// uniform transforms are entire.
fn law_poles<S: Scalar>(spec: &DistributionSpec<S>, premium_side: bool) -> Vec<Pole<S>> {
    let sign = if premium_side { S::one() } else { -S::one() };
    match spec {
        DistributionSpec::Exponential { rate } => {
            vec![Pole { location: sign * *rate, order: 1 }]
        }
        DistributionSpec::Gamma { shape, rate } => {
            vec![Pole { location: sign * *rate, order: *shape }]
        }
        _ => Vec::new(),
    }
}

/// Laplace transform of the density, E exp(-sX), analytically continued.
fn laplace<S: Scalar>(spec: &DistributionSpec<S>, s: C<S>) -> C<S> {
    match spec {
        DistributionSpec::PointMass { value } => cexp(-s * *value),
        DistributionSpec::DiscreteMixture { atoms } => atoms
            .iter()
            .fold(re(S::zero()), |acc, a| acc + cexp(-s * a.value) * a.weight),
        DistributionSpec::Exponential { rate } => {
            let b = *rate;
            re::<S>(b) / (s + b)
        }
        DistributionSpec::Gamma { shape, rate } => {
            let b = *rate;
            (re::<S>(b) / (s + b)).powu(*shape)
        }
        DistributionSpec::HalfNormal { sigma } => {
            erfcx(s * (*sigma / S::sqrt_2()))
        }
        DistributionSpec::Maxwell { sigma } => {
            let sg = *sigma;
            let w = s * (sg / S::sqrt_2());
            let e = erfcx(w);
            (re(S::one()) + s * s * (sg * sg)) * e - s * (sg * S::sqrt_2_over_pi())
        }
        DistributionSpec::Uniform { lower, upper } => {
            let (a, b) = (*lower, *upper);
            if s.re == S::zero() && s.im == S::zero() {
                return re(S::one());
            }
            // e^{-as}(1 - e^{-(b-a)s}) / (s(b-a)), stable near s = 0
            let width = b - a;
            cexp(-s * a) * (-cexp_m1(-s * width)) / (s * width)
        }
    }
}

/// Analytic derivative of [`laplace`] in s.
fn laplace_prime<S: Scalar>(spec: &DistributionSpec<S>, s: C<S>) -> C<S> {
    match spec {
        DistributionSpec::PointMass { value } => cexp(-s * *value) * (-*value),
        DistributionSpec::DiscreteMixture { atoms } => atoms
            .iter()
            .fold(re(S::zero()), |acc, a| {
                acc + cexp(-s * a.value) * (-a.value * a.weight)
            }),
        DistributionSpec::Exponential { rate } => {
            let b = *rate;
            let d = s + b;
            re::<S>(-b) / (d * d)
        }
        DistributionSpec::Gamma { shape, rate } => {
            let b = *rate;
            let l = (re::<S>(b) / (s + b)).powu(*shape);
            -l * S::from_f64(*shape as f64) / (s + b)
        }
        DistributionSpec::HalfNormal { sigma } => {
            // d/ds erfcx(sigma s / sqrt2) = sigma^2 s erfcx(.) - sigma sqrt(2/pi)
            let sg = *sigma;
            s * (sg * sg) * erfcx(s * (sg / S::sqrt_2())) - re(sg * S::sqrt_2_over_pi())
        }
        DistributionSpec::Maxwell { sigma } => {
            let sg = *sigma;
            let sg2 = sg * sg;
            let e = erfcx(s * (sg / S::sqrt_2()));
            let t = s * s * sg2;
            s * sg2 * e * (re(S::from_f64(3.0)) + t)
                - (re(S::from_f64(2.0)) + t) * (sg * S::sqrt_2_over_pi())
        }
        DistributionSpec::Uniform { lower, upper } => {
            let (a, b) = (*lower, *upper);
            let width = b - a;
            if cabs(s) * b.max(S::one()) < S::from_f64(1e-2) {
                // Maclaurin: sum_{n>=1} n (-s)^{n-1} (b^{n+1}-a^{n+1}) / ((n+1)! (b-a))
                let mut sum = re(S::zero());
                let mut pow = re(S::one()); // (-s)^{n-1}
                let mut an = a; // a^{n+1} running
                let mut bn = b;
                let mut fact = S::one(); // (n+1)!
                for n in 1..25u32 {
                    an *= a;
                    bn *= b;
                    fact *= S::from_f64((n + 1) as f64);
                    let coef = S::from_f64(n as f64) * (bn - an) / (fact * width);
                    let term = pow * coef;
                    sum += term;
                    if cabs(term) <= S::eps() * cabs(sum).max(S::from_f64(1e-30)) {
                        break;
                    }
                    pow = pow * (-s);
                }
                -sum
            } else {
                // L' = (-a e^{-as} + b e^{-bs}) / (s(b-a)) - L/s
                let num = cexp(-s * b) * b - cexp(-s * a) * a;
                let l = laplace(spec, s);
                num / (s * width) - l / s
            }
        }
    }
}

/// Complex moment function of the premium, E exp(sC).
pub fn premium_mgf<S: Scalar>(spec: &DistributionSpec<S>, s: C<S>) -> Result<C<S>, TransformError> {
    guard_poles(&law_poles(spec, true), s)?;
    Ok(laplace(spec, -s))
}

pub fn premium_mgf_prime<S: Scalar>(
    spec: &DistributionSpec<S>,
    s: C<S>,
) -> Result<C<S>, TransformError> {
    guard_poles(&law_poles(spec, true), s)?;
    Ok(-laplace_prime(spec, -s))
}

/// Laplace transform of the claim density, with pole guarding.
pub fn claim_laplace<S: Scalar>(
    spec: &DistributionSpec<S>,
    s: C<S>,
) -> Result<C<S>, TransformError> {
    guard_poles(&law_poles(spec, false), s)?;
    Ok(laplace(spec, s))
}

pub fn claim_laplace_prime<S: Scalar>(
    spec: &DistributionSpec<S>,
    s: C<S>,
) -> Result<C<S>, TransformError> {
    guard_poles(&law_poles(spec, false), s)?;
    Ok(laplace_prime(spec, s))
}

/// Upper-incomplete Laplace transform int_u^inf e^{-zx} f(x) dx for the
/// continuous catalog laws, in closed form. Equals [`claim_laplace`] at u=0.
pub fn claim_laplace_upper<S: Scalar>(spec: &DistributionSpec<S>, z: C<S>, u: S) -> C<S> {
    if u <= S::zero() {
        return laplace(spec, z);
    }
    match spec {
        DistributionSpec::Exponential { rate } => {
            let b = *rate;
            cexp(-(z + b) * u) * b / (z + b)
        }
        DistributionSpec::Gamma { shape, rate } => {
            let b = *rate;
            let w = (z + b) * u;
            let mut sum = re::<S>(S::one());
            let mut term = re::<S>(S::one());
            for m in 1..*shape {
                term = term * w / S::from_f64(m as f64);
                sum += term;
            }
            (re::<S>(b) / (z + b)).powu(*shape) * cexp(-w) * sum
        }
        DistributionSpec::HalfNormal { sigma } => {
            let sg = *sigma;
            let v = (re(u) + z * (sg * sg)) / (sg * S::sqrt_2());
            let g = cexp(re(-u * u / (S::from_f64(2.0) * sg * sg)) - z * u);
            if v.re >= S::zero() {
                g * erfcx(v)
            } else {
                let lead = cexp(z * z * (sg * sg * S::from_f64(0.5))) * S::from_f64(2.0);
                lead - g * erfcx(-v)
            }
        }
        DistributionSpec::Maxwell { sigma } => {
            let sg = *sigma;
            let sg2 = sg * sg;
            let v = (re(u) + z * sg2) / (sg * S::sqrt_2());
            let g = cexp(re(-u * u / (S::from_f64(2.0) * sg2)) - z * u);
            let half_pi_sqrt = (S::pi() * S::from_f64(0.5)).sqrt();
            let j0 = if v.re >= S::zero() {
                g * erfcx(v) * (sg * half_pi_sqrt)
            } else {
                (cexp(z * z * (sg2 * S::from_f64(0.5))) * S::from_f64(2.0) - g * erfcx(-v))
                    * (sg * half_pi_sqrt)
            };
            let j2 = j0 * (re(S::one()) + z * z * sg2) * sg2 + g * (re(u) - z * sg2) * sg2;
            j2 / (sg2 * sg * half_pi_sqrt)
        }
        DistributionSpec::Uniform { lower, upper } => {
            let (a, b) = (*lower, *upper);
            if u >= b {
                return re(S::zero());
            }
            let lo = u.max(a);
            let width = b - a;
            if z.re == S::zero() && z.im == S::zero() {
                return re((b - lo) / width);
            }
            cexp(-z * lo) * (-cexp_m1(-z * (b - lo))) / (z * width)
        }
        DistributionSpec::PointMass { value } => {
            if *value >= u {
                cexp(-z * *value)
            } else {
                re(S::zero())
            }
        }
        DistributionSpec::DiscreteMixture { atoms } => atoms
            .iter()
            .filter(|a| a.value >= u)
            .fold(re(S::zero()), |acc, a| acc + cexp(-z * a.value) * a.weight),
    }
}

/// Laplace transform of a law in mantissa/log-scale form; only Gaussian-type
/// claim transforms ever need the scale, everything else passes through.
fn laplace_scaled<S: Scalar>(spec: &DistributionSpec<S>, s: C<S>) -> Scaled<S> {
    match spec {
        DistributionSpec::HalfNormal { sigma } => erfcx_scaled(s * (*sigma / S::sqrt_2())),
        DistributionSpec::Maxwell { sigma } => {
            let sg = *sigma;
            let e = erfcx_scaled(s * (sg / S::sqrt_2()));
            let poly = re(S::one()) + s * s * (sg * sg);
            e.mul_complex(poly)
                .add(Scaled::from_complex(-s * (sg * S::sqrt_2_over_pi())))
        }
        _ => Scaled::from_complex(laplace(spec, s)),
    }
}

fn guard_poles<S: Scalar>(poles: &[Pole<S>], s: C<S>) -> Result<(), TransformError> {
    for p in poles {
        let gap = S::from_f64(1e-12) * p.location.abs().max(S::one());
        if cabs(s - re(p.location)) <= gap {
            return Err(TransformError::PoleHit {
                pole_re: p.location.to_f64(),
                pole_im: 0.0,
                order: p.order,
            });
        }
    }
    Ok(())
}

/// The characteristic function D and its analytic derivative, with the exact
/// catalog pole inventory needed by the root census.
#[derive(Clone, Debug)]
pub struct CharacteristicFunction<S> {
    system: BonusMalusSystem<S>,
    poles: Vec<Pole<S>>,
}

impl<S: Scalar> CharacteristicFunction<S> {
    pub fn new(system: BonusMalusSystem<S>) -> Result<Self, TransformError> {
        let mut poles = law_poles(system.premium(), true);
        poles.extend(law_poles(system.claim(), false));
        let cf = CharacteristicFunction { system, poles };
        // normalization: all moment functions are 1 at the origin
        let d0 = cf.eval(re(S::zero()))?;
        if cabs(d0) > S::from_f64(1e-12) * cf.system.intensity() {
            return Err(TransformError::Model(ModelError::InvalidParameter(format!(
                "D(0) = {d0} is not zero relative to the intensity scale"
            ))));
        }
        Ok(cf)
    }

    pub fn system(&self) -> &BonusMalusSystem<S> {
        &self.system
    }

    pub fn poles(&self) -> &[Pole<S>] {
        &self.poles
    }

    /// Poles strictly inside a rectangle, with multiplicity.
    pub fn pole_count_in(&self, x0: S, x1: S, y0: S, y1: S) -> i64 {
        self.poles
            .iter()
            .filter(|p| {
                p.location > x0 && p.location < x1 && S::zero() > y0 && S::zero() < y1
            })
            .map(|p| p.order as i64)
            .sum()
    }

    pub fn intensity(&self) -> S {
        self.system.intensity()
    }

    pub fn eval(&self, s: C<S>) -> Result<C<S>, TransformError> {
        guard_poles(&self.poles, s)?;
        let sys = &self.system;
        Ok(re(-sys.intensity())
            + laplace(sys.premium(), -s) * sys.lambda1()
            + laplace(sys.claim(), s) * sys.lambda2())
    }

    pub fn eval_prime(&self, s: C<S>) -> Result<C<S>, TransformError> {
        guard_poles(&self.poles, s)?;
        let sys = &self.system;
        Ok(-laplace_prime(sys.premium(), -s) * sys.lambda1()
            + laplace_prime(sys.claim(), s) * sys.lambda2())
    }

    /// D in mantissa/log-scale form; safe wherever the plain value would
    /// overflow (Gaussian claim transforms deep in the left half-plane).
    pub fn eval_scaled(&self, s: C<S>) -> Result<Scaled<S>, TransformError> {
        guard_poles(&self.poles, s)?;
        let sys = &self.system;
        let base = Scaled::from_complex(
            re(-sys.intensity()) + laplace(sys.premium(), -s) * sys.lambda1(),
        );
        Ok(base.add(laplace_scaled(sys.claim(), s).mul_complex(re(sys.lambda2()))))
    }

    /// Upper bound on ln |lambda1 M_C(s)| over a rectangle: the moment
    /// function of a non-negative law is maximized on the right edge.
    pub fn premium_log_bound(&self, x1: S) -> S {
        let m = laplace(self.system.premium(), re(-x1)).re;
        (self.system.lambda1() * m).ln()
    }

    /// Bounds on ln |lambda2 L(s)| over the rectangle [x0,x1] x [y0,y1]
    /// (left half-plane). Lower bound may be -inf when no useful one exists.
    pub fn claim_log_bounds(&self, x0: S, x1: S, y0: S, y1: S) -> (S, S) {
        let lam2 = self.system.lambda2();
        if lam2 == S::zero() {
            return (S::from_f64(f64::NEG_INFINITY), S::from_f64(f64::NEG_INFINITY));
        }
        let ln_lam2 = lam2.ln();
        let (lo, hi) = claim_log_abs_bounds(self.system.claim(), x0, x1, y0, y1);
        (lo + ln_lam2, hi + ln_lam2)
    }
}

/// ln |L| bounds over a left-half-plane rectangle, law by law.
fn claim_log_abs_bounds<S: Scalar>(
    spec: &DistributionSpec<S>,
    x0: S,
    x1: S,
    y0: S,
    y1: S,
) -> (S, S) {
    let neg_inf = S::from_f64(f64::NEG_INFINITY);
    let abs_y_max = y0.abs().max(y1.abs());
    let abs_y_min = if y0 <= S::zero() && y1 >= S::zero() {
        S::zero()
    } else {
        y0.abs().min(y1.abs())
    };
    match spec {
        DistributionSpec::Exponential { rate } | DistributionSpec::Gamma { rate, .. } => {
            let k = match spec {
                DistributionSpec::Gamma { shape, .. } => *shape as i32,
                _ => 1,
            };
            let b = *rate;
            // distance from the rectangle to the pole at -b
            let px = -b;
            let dx_min = if px >= x0 && px <= x1 {
                S::zero()
            } else {
                (x0 - px).abs().min((x1 - px).abs())
            };
            let d_min = dx_min.hypot(abs_y_min);
            let d_max = (x0 - px).abs().max((x1 - px).abs()).hypot(abs_y_max);
            let hi = if d_min == S::zero() {
                S::from_f64(f64::INFINITY)
            } else {
                S::from_f64(k as f64) * (b.ln() - d_min.ln())
            };
            let lo = S::from_f64(k as f64) * (b.ln() - d_max.ln());
            (lo, hi)
        }
        DistributionSpec::HalfNormal { sigma } => {
            let (m, mm) = gaussian_exponent_range(*sigma, x0, x1, abs_y_min, abs_y_max);
            (gauss_lower(m), gauss_upper(mm))
        }
        DistributionSpec::Maxwell { sigma } => {
            let sg = *sigma;
            let (m, mm) = gaussian_exponent_range(sg, x0, x1, abs_y_min, abs_y_max);
            let x2_min = if x0 <= S::zero() && x1 >= S::zero() {
                S::zero()
            } else {
                (x0 * x0).min(x1 * x1)
            };
            let s2_min = x2_min + abs_y_min * abs_y_min;
            let s2_max = x0 * x0 + abs_y_max * abs_y_max;
            let poly_min = (sg * sg * s2_min - S::one()).max(S::zero());
            let poly_max = sg * sg * s2_max + S::one();
            let lin = sg * S::sqrt_2_over_pi() * s2_max.sqrt();
            let lo_core = if poly_min > S::zero() {
                gauss_lower(m) + poly_min.ln()
            } else {
                neg_inf
            };
            let lo = log_diff_exp(lo_core, lin.ln());
            let hi = log_sum_exp(gauss_upper(mm) + poly_max.ln(), lin.ln());
            (lo, hi)
        }
        DistributionSpec::Uniform { lower, upper } => {
            let (a, b) = (*lower, *upper);
            let width = b - a;
            let s_min = x0.abs().min(x1.abs()).hypot(abs_y_min);
            let s_max = x0.abs().max(x1.abs()).hypot(abs_y_max);
            // |e^{-as} - e^{-bs}| in [e^{-b x}(1 - e^{(b-a)x}), 2 e^{-b x}]
            let hi = -b * x0 + S::from_f64(2.0).ln()
                - if s_min == S::zero() { neg_inf } else { (s_min * width).ln() };
            let gap = -cexp_m1(re((b - a) * x1)).re; // 1 - e^{(b-a)x} at nearest edge
            let lo = if gap > S::zero() && s_max > S::zero() {
                -b * x1 + gap.ln() - (s_max * width).ln()
            } else {
                neg_inf
            };
            (lo, hi)
        }
        DistributionSpec::PointMass { value } => {
            // |e^{-vs}| = e^{-v x}
            ((-*value) * x1, (-*value) * x0)
        }
        DistributionSpec::DiscreteMixture { .. } => (neg_inf, S::zero()),
    }
}

/// Range of Re((sigma s / sqrt2)^2) = sigma^2 (x^2 - y^2)/2 over the box.
fn gaussian_exponent_range<S: Scalar>(
    sigma: S,
    x0: S,
    x1: S,
    abs_y_min: S,
    abs_y_max: S,
) -> (S, S) {
    let x2_min = if x0 <= S::zero() && x1 >= S::zero() {
        S::zero()
    } else {
        (x0 * x0).min(x1 * x1)
    };
    let x2_max = (x0 * x0).max(x1 * x1);
    let h = sigma * sigma * S::from_f64(0.5);
    (h * (x2_min - abs_y_max * abs_y_max), h * (x2_max - abs_y_min * abs_y_min))
}

/// For Re w < 0: erfcx(w) = 2 e^{w^2} - erfcx(-w) with |erfcx(-w)| <= ~1.07,
/// giving |erfcx| within [2 e^m - 1.1, 2 e^M + 1.1]; in log space, guarded.
fn gauss_lower<S: Scalar>(m: S) -> S {
    log_diff_exp(m + S::from_f64(2.0f64.ln()), S::from_f64(1.1f64.ln()))
}

fn gauss_upper<S: Scalar>(m: S) -> S {
    log_sum_exp(m + S::from_f64(2.0f64.ln()), S::from_f64(1.1f64.ln()))
}

fn log_sum_exp<S: Scalar>(a: S, b: S) -> S {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if !hi.is_finite() {
        return hi;
    }
    hi + (S::one() + (lo - hi).exp()).ln()
}

/// ln(e^a - e^b), or -inf when the difference is non-positive.
fn log_diff_exp<S: Scalar>(a: S, b: S) -> S {
    if !(a > b) {
        return S::from_f64(f64::NEG_INFINITY);
    }
    a + (-((b - a).exp() - S::one())).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cx::c;
    use crate::model::{BonusMalusSystem, DistributionSpec};
    use crate::quad::integrate;

    fn premium_vec() -> [f64; 10] {
        [0.4, 0.8, 1.0, 1.2, 1.4, 1.5, 1.7, 1.8, 2.0, 2.2]
    }

    fn uniform_weights_system() -> BonusMalusSystem<f64> {
        let pairs = premium_vec().map(|v| (v, 0.1));
        BonusMalusSystem::new(
            DistributionSpec::discrete_mixture(&pairs).unwrap(),
            DistributionSpec::half_normal(1.0).unwrap(),
            18.0,
            11.0,
        )
        .unwrap()
    }

    fn geometric_weights_system() -> BonusMalusSystem<f64> {
        let total: f64 = (1..=10).map(|n| 1.1f64.powi(n)).sum();
        let pairs: Vec<(f64, f64)> = premium_vec()
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, 1.1f64.powi(i as i32 + 1) / total))
            .collect();
        BonusMalusSystem::new(
            DistributionSpec::discrete_mixture(&pairs).unwrap(),
            DistributionSpec::gamma(3.0, 6.0).unwrap(),
            18.0,
            11.0,
        )
        .unwrap()
    }

    #[test]
    fn laplace_at_zero_is_one() {
        let laws = [
            DistributionSpec::exponential(2.0).unwrap(),
            DistributionSpec::gamma(3.0, 6.0).unwrap(),
            DistributionSpec::half_normal(1.0).unwrap(),
            DistributionSpec::maxwell(0.5).unwrap(),
            DistributionSpec::uniform(0.2, 1.5).unwrap(),
        ];
        for law in &laws {
            let v = claim_laplace(law, c::<f64>(0.0, 0.0)).unwrap();
            assert!((v - c::<f64>(1.0, 0.0)).norm() < 1e-14, "{law:?}: {v}");
            let m = premium_mgf(law, c::<f64>(0.0, 0.0)).unwrap();
            assert!((m - c::<f64>(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn gamma_laplace_arithmetic() {
        // (6/7)^3 at s = 1
        let g = DistributionSpec::gamma(3.0, 6.0).unwrap();
        let v = claim_laplace(&g, c::<f64>(1.0, 0.0)).unwrap();
        let expect = (6.0f64 / 7.0).powi(3);
        assert!((v.re - expect).abs() < 1e-15);
        assert!(v.im.abs() < 1e-18);
    }

    #[test]
    fn exponential_mgf_below_pole() {
        // E e^{tC} = (1 - t/a)^{-1} for t < a
        let law = DistributionSpec::exponential(3.0).unwrap();
        for t in [-2.0, 0.5, 2.9] {
            let v = premium_mgf(&law, c::<f64>(t, 0.0)).unwrap();
            assert!((v.re - 1.0 / (1.0 - t / 3.0)).abs() < 1e-13);
        }
        assert!(matches!(
            premium_mgf(&law, c::<f64>(3.0, 0.0)),
            Err(TransformError::PoleHit { .. })
        ));
    }

    #[test]
    fn mixture_mgf_direct_sum() {
        let sys = uniform_weights_system();
        let s = c::<f64>(1.0, 0.0);
        let got = premium_mgf(sys.premium(), s).unwrap();
        let expect: f64 = premium_vec().iter().map(|&ck| 0.1 * ck.exp()).sum();
        assert!((got.re - expect).abs() < 1e-13);
    }

    #[test]
    fn laplace_matches_quadrature_on_right_half_plane() {
        let laws = [
            DistributionSpec::exponential(1.5).unwrap(),
            DistributionSpec::gamma(2.0, 4.0).unwrap(),
            DistributionSpec::half_normal(1.0).unwrap(),
            DistributionSpec::maxwell(0.7071067811865476).unwrap(),
            DistributionSpec::uniform(0.3, 1.9).unwrap(),
        ];
        let pts = [c::<f64>(2.0, 0.0), c(0.5, 3.0), c(1.0, -7.0), c(4.0, 1.0)];
        for law in &laws {
            let cutoff = law.tail_cutoff(1e-18);
            for &s in &pts {
                let direct = integrate(
                    |x: f64| cexp(-s * x) * law.pdf(x),
                    0.0,
                    cutoff,
                    1e-13,
                )
                .unwrap();
                let closed = claim_laplace(law, s).unwrap();
                assert!(
                    (closed - direct).norm() < 1e-10,
                    "{law:?} at {s}: {closed} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn half_normal_example_value() {
        // sqrt(2/pi) int_0^inf e^{-x^2/2 - 2x} dx via quadrature
        let law = DistributionSpec::half_normal(1.0).unwrap();
        let direct = integrate(
            |x: f64| (2.0 / std::f64::consts::PI).sqrt() * (-x * x / 2.0 - 2.0 * x).exp(),
            0.0,
            30.0,
            1e-14,
        )
        .unwrap();
        let closed = claim_laplace(&law, c::<f64>(2.0, 0.0)).unwrap();
        assert!((closed.re - direct).abs() < 1e-10);
    }

    #[test]
    fn upper_incomplete_reduces_and_integrates() {
        let laws = [
            DistributionSpec::exponential(1.5).unwrap(),
            DistributionSpec::gamma(3.0, 6.0).unwrap(),
            DistributionSpec::half_normal(1.0).unwrap(),
            DistributionSpec::maxwell(0.7071067811865476).unwrap(),
            DistributionSpec::uniform(0.3, 1.9).unwrap(),
        ];
        let zs = [c::<f64>(0.7, 0.0), c(-1.5, 2.0), c(-0.3, -4.0)];
        for law in &laws {
            for &z in &zs {
                // u = 0 reduces to the full transform
                let full = claim_laplace_upper(law, z, 0.0);
                assert!((full - laplace(law, z)).norm() < 1e-13);
                for u in [0.4, 1.1, 2.5] {
                    let cutoff = law.tail_cutoff(1e-18).max(u + 1.0);
                    let direct =
                        integrate(|x: f64| cexp(-z * x) * law.pdf(x), u, cutoff, 1e-13).unwrap();
                    let closed = claim_laplace_upper(law, z, u);
                    assert!(
                        (closed - direct).norm() < 1e-10 * direct.norm().max(1.0),
                        "{law:?} z={z} u={u}: {closed} vs {direct}"
                    );
                }
            }
        }
    }

    #[test]
    fn d_vanishes_at_origin() {
        for sys in [uniform_weights_system(), geometric_weights_system()] {
            let cf = CharacteristicFunction::new(sys).unwrap();
            let d0 = cf.eval(c(0.0, 0.0)).unwrap();
            assert!(d0.norm() <= 1e-12 * cf.intensity());
        }
    }

    #[test]
    fn d_prime_at_origin_is_drift() {
        for sys in [uniform_weights_system(), geometric_weights_system()] {
            let drift = sys.drift();
            let cf = CharacteristicFunction::new(sys).unwrap();
            let d1 = cf.eval_prime(c(0.0, 0.0)).unwrap();
            assert!((d1.re - drift).abs() <= 1e-10 * drift.abs());
            assert!(d1.im.abs() < 1e-12);
        }
    }

    #[test]
    fn paper_roots_are_roots() {
        // displayed roots of the two running systems
        let cf1 = CharacteristicFunction::new(uniform_weights_system()).unwrap();
        let v1 = cf1.eval(c(-0.7279947, 0.0)).unwrap();
        assert!(v1.norm() < 1e-5 * cf1.intensity(), "|D| = {}", v1.norm());

        let cf2 = CharacteristicFunction::new(geometric_weights_system()).unwrap();
        let v2 = cf2.eval(c(-1.53082, 0.0)).unwrap();
        assert!(v2.norm() < 1e-3, "|D| = {}", v2.norm());
        let v3 = cf2.eval(c(-8.17350, 3.76034)).unwrap();
        assert!(v3.norm() < 1e-2, "|D| = {}", v3.norm());
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let mut state = 0x853c49e6748fea9bu64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64)
        };
        for sys in [uniform_weights_system(), geometric_weights_system()] {
            let cf = CharacteristicFunction::new(sys).unwrap();
            let mut checked = 0;
            while checked < 100 {
                let s = c::<f64>(next() * 12.0 - 10.0, next() * 16.0 - 8.0);
                let h = 1e-6;
                let (Ok(fp), Ok(fm)) = (cf.eval(s + c(h, 0.0)), cf.eval(s - c(h, 0.0))) else {
                    continue;
                };
                let Ok(d) = cf.eval_prime(s) else { continue };
                let fd = (fp - fm) / c(2.0 * h, 0.0);
                // relative tolerance scaled by the local magnitude mix
                let scale = d.norm().max(cf.eval(s).unwrap().norm()).max(1.0);
                if (fd - d).norm() > 1e-6 * scale {
                    panic!("derivative mismatch at {s}: analytic {d}, fd {fd}");
                }
                checked += 1;
            }
        }
    }

    #[test]
    fn conjugate_symmetry() {
        let cf = CharacteristicFunction::new(uniform_weights_system()).unwrap();
        for (x, y) in [(-0.5, 1.0), (-3.0, 7.0), (-9.0, 2.5), (1.5, 4.0)] {
            let a = cf.eval(c(x, y)).unwrap();
            let b = cf.eval(c(x, -y)).unwrap();
            assert!((a - b.conj()).norm() <= 1e-12 * a.norm().max(1.0));
        }
    }

    #[test]
    fn scaled_eval_matches_plain_in_range() {
        let cf = CharacteristicFunction::new(uniform_weights_system()).unwrap();
        for (x, y) in [(-0.7, 0.0), (-3.0, 3.0), (-6.0, 1.0), (-2.0, 9.0)] {
            let plain = cf.eval(c(x, y)).unwrap();
            let scaled = cf.eval_scaled(c(x, y)).unwrap().to_complex();
            assert!((plain - scaled).norm() <= 1e-11 * plain.norm());
        }
        // far left: plain overflows, scaled stays informative
        let s = cf.eval_scaled(c(-60.0, 0.5)).unwrap();
        assert!(s.log_abs() > 1000.0);
        assert!(s.arg().is_finite());
    }

    #[test]
    fn claim_bounds_contain_samples() {
        let laws = [
            DistributionSpec::gamma(3.0, 6.0).unwrap(),
            DistributionSpec::exponential(2.0).unwrap(),
            DistributionSpec::half_normal(1.0).unwrap(),
            DistributionSpec::maxwell(0.7071067811865476).unwrap(),
            DistributionSpec::uniform(0.3, 1.9).unwrap(),
        ];
        let boxes = [
            (-5.0, -2.0, 1.0, 4.0),
            (-12.0, -8.0, 0.0, 3.0),
            (-3.0, -0.1, -2.0, 2.0),
            (-30.0, -20.0, 5.0, 25.0),
        ];
        let mut state = 0xda3e39cb94b95bdbu64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64)
        };
        for law in &laws {
            for &(x0, x1, y0, y1) in &boxes {
                let (lo, hi) = claim_log_abs_bounds(law, x0, x1, y0, y1);
                for _ in 0..60 {
                    let s = c::<f64>(x0 + (x1 - x0) * next(), y0 + (y1 - y0) * next());
                    if let Ok(v) = claim_laplace(law, s) {
                        let lv = v.norm().ln();
                        assert!(
                            lv <= hi + 1e-9 && lv >= lo - 1e-9,
                            "{law:?} box {x0},{x1},{y0},{y1} at {s}: ln|L|={lv}, bounds [{lo},{hi}]"
                        );
                    }
                }
            }
        }
    }
}

//! Domain model: claim/premium distribution catalog, bonus-malus systems,
//! and stationary distributions of level-transition matrices.

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ModelError {
    #[error("transition matrix row {row} is not a probability vector (sum {sum})")]
    NonStochasticMatrix { row: usize, sum: f64 },
    #[error("stationary distribution is not unique: P^T - I has nullity {nullity}")]
    NonUniqueStationary { nullity: usize },
    #[error("mixture weights sum to {sum}, expected 1")]
    InvalidWeights { sum: f64 },
    #[error("inadmissible claim law: {0}")]
    InadmissibleClaimLaw(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Which side of the surplus process a distribution drives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Premium,
    Claim,
}

/// One level of a discrete premium mixture.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom<S> {
    pub value: S,
    pub weight: S,
}

/// A catalog law. Every member has a moment function that continues to a
/// meromorphic function on the whole plane, which the root machinery relies
/// on; that is why the gamma shape is restricted to integers.
#[derive(Clone, Debug, PartialEq)]
pub enum DistributionSpec<S> {
    PointMass { value: S },
    DiscreteMixture { atoms: Vec<Atom<S>> },
    Exponential { rate: S },
    Gamma { shape: u32, rate: S },
    HalfNormal { sigma: S },
    Maxwell { sigma: S },
    Uniform { lower: S, upper: S },
}

impl<S: Scalar> DistributionSpec<S> {
    pub fn point_mass(value: S) -> Result<Self, ModelError> {
        if !(value >= S::zero()) {
            return Err(ModelError::InvalidParameter(format!(
                "point mass at {value} must be non-negative"
            )));
        }
        Ok(DistributionSpec::PointMass { value })
    }

    /// Builds a discrete mixture, sorting levels, merging duplicates and
    /// checking the weights. `actions` (if given) collects a note for every
    /// canonicalization step performed.
    pub fn discrete_mixture_with_log(
        pairs: &[(S, S)],
        mut actions: Option<&mut Vec<String>>,
    ) -> Result<Self, ModelError> {
        if pairs.is_empty() {
            return Err(ModelError::InvalidParameter("mixture needs at least one level".into()));
        }
        let mut sum = S::zero();
        for &(v, w) in pairs {
            if !(v > S::zero()) || !v.is_finite() {
                return Err(ModelError::InvalidParameter(format!(
                    "mixture level {v} must be strictly positive"
                )));
            }
            if !(w > S::zero()) || !w.is_finite() {
                return Err(ModelError::InvalidParameter(format!(
                    "mixture weight {w} must be strictly positive"
                )));
            }
            sum += w;
        }
        if (sum - S::one()).abs() > S::from_f64(1e-12) {
            return Err(ModelError::InvalidWeights { sum: sum.to_f64() });
        }

        let mut sorted: Vec<(S, S)> = pairs.to_vec();
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite levels"));
        if sorted
            .windows(2)
            .any(|w| w[0].0 > w[1].0 || w[0].0 == w[1].0)
            || sorted.iter().zip(pairs).any(|(a, b)| a.0 != b.0)
        {
            if let Some(log) = actions.as_deref_mut() {
                log.push("sorted premium levels into increasing order".into());
            }
        }

        let mut atoms: Vec<Atom<S>> = Vec::with_capacity(sorted.len());
        for (v, w) in sorted {
            match atoms.last_mut() {
                Some(last) if (v - last.value).abs() <= S::from_f64(1e-12) * v.max(S::one()) => {
                    last.weight += w;
                    if let Some(log) = actions.as_deref_mut() {
                        log.push(format!("merged duplicate premium level {v}"));
                    }
                }
                _ => atoms.push(Atom { value: v, weight: w }),
            }
        }
        Ok(DistributionSpec::DiscreteMixture { atoms })
    }

    pub fn discrete_mixture(pairs: &[(S, S)]) -> Result<Self, ModelError> {
        Self::discrete_mixture_with_log(pairs, None)
    }

    pub fn exponential(rate: S) -> Result<Self, ModelError> {
        require_positive(rate, "exponential rate")?;
        Ok(DistributionSpec::Exponential { rate })
    }

    /// Gamma with integer shape. Non-integer shapes are refused: their
    /// transforms have a branch point, which breaks meromorphic continuation.
    pub fn gamma(shape: S, rate: S) -> Result<Self, ModelError> {
        require_positive(rate, "gamma rate")?;
        let rounded = shape.round();
        if (shape - rounded).abs() > S::from_f64(1e-9) || !(rounded >= S::one()) {
            return Err(ModelError::InadmissibleClaimLaw(format!(
                "gamma shape {shape} is not a positive integer; \
                 the transform would have a branch point"
            )));
        }
        Ok(DistributionSpec::Gamma { shape: rounded.to_f64() as u32, rate })
    }

    pub fn half_normal(sigma: S) -> Result<Self, ModelError> {
        require_positive(sigma, "half-normal sigma")?;
        Ok(DistributionSpec::HalfNormal { sigma })
    }

    pub fn maxwell(sigma: S) -> Result<Self, ModelError> {
        require_positive(sigma, "maxwell sigma")?;
        Ok(DistributionSpec::Maxwell { sigma })
    }

    pub fn uniform(lower: S, upper: S) -> Result<Self, ModelError> {
        if !(lower >= S::zero()) || !(upper > lower) {
            return Err(ModelError::InvalidParameter(format!(
                "uniform endpoints must satisfy 0 <= {lower} < {upper}"
            )));
        }
        Ok(DistributionSpec::Uniform { lower, upper })
    }

    pub fn is_continuous(&self) -> bool {
        !matches!(
            self,
            DistributionSpec::PointMass { .. } | DistributionSpec::DiscreteMixture { .. }
        )
    }

    pub fn validate_for(&self, role: Role) -> Result<(), ModelError> {
        if role == Role::Claim && !self.is_continuous() {
            return Err(ModelError::InadmissibleClaimLaw(
                "claim size must follow a continuous catalog law".into(),
            ));
        }
        Ok(())
    }

    pub fn mean(&self) -> S {
        match self {
            DistributionSpec::PointMass { value } => *value,
            DistributionSpec::DiscreteMixture { atoms } => atoms
                .iter()
                .fold(S::zero(), |acc, a| acc + a.value * a.weight),
            DistributionSpec::Exponential { rate } => S::one() / *rate,
            DistributionSpec::Gamma { shape, rate } => S::from_f64(*shape as f64) / *rate,
            DistributionSpec::HalfNormal { sigma } => *sigma * S::sqrt_2_over_pi(),
            // 2 sigma sqrt(2/pi): mean of |N(0, sigma^2)|^3-norm law
            DistributionSpec::Maxwell { sigma } => {
                S::from_f64(2.0) * *sigma * S::sqrt_2_over_pi()
            }
            DistributionSpec::Uniform { lower, upper } => (*lower + *upper) * S::from_f64(0.5),
        }
    }

    /// Density, zero outside the support. Continuous laws only.
    pub fn pdf(&self, x: S) -> S {
        if x < S::zero() {
            return S::zero();
        }
        match self {
            DistributionSpec::Exponential { rate } => *rate * (-*rate * x).exp(),
            DistributionSpec::Gamma { shape, rate } => {
                let k = *shape;
                let mut fact = S::one();
                for m in 1..k {
                    fact *= S::from_f64(m as f64);
                }
                rate.powi(k as i32) * x.powi(k as i32 - 1) * (-*rate * x).exp() / fact
            }
            DistributionSpec::HalfNormal { sigma } => {
                let s = *sigma;
                S::sqrt_2_over_pi() / s * (-(x * x) / (S::from_f64(2.0) * s * s)).exp()
            }
            DistributionSpec::Maxwell { sigma } => {
                let s = *sigma;
                S::sqrt_2_over_pi() * x * x / (s * s * s)
                    * (-(x * x) / (S::from_f64(2.0) * s * s)).exp()
            }
            DistributionSpec::Uniform { lower, upper } => {
                if x >= *lower && x <= *upper {
                    S::one() / (*upper - *lower)
                } else {
                    S::zero()
                }
            }
            DistributionSpec::PointMass { .. } | DistributionSpec::DiscreteMixture { .. } => {
                S::zero()
            }
        }
    }

    pub fn cdf(&self, x: S) -> S {
        if x <= S::zero() {
            return S::zero();
        }
        match self {
            DistributionSpec::PointMass { value } => {
                if x >= *value {
                    S::one()
                } else {
                    S::zero()
                }
            }
            DistributionSpec::DiscreteMixture { atoms } => atoms
                .iter()
                .filter(|a| a.value <= x)
                .fold(S::zero(), |acc, a| acc + a.weight),
            DistributionSpec::Exponential { rate } => S::one() - (-*rate * x).exp(),
            DistributionSpec::Gamma { shape, rate } => {
                // 1 - e^{-bx} sum_{m<k} (bx)^m / m!
                let w = *rate * x;
                let mut term = S::one();
                let mut sum = S::one();
                for m in 1..*shape {
                    term *= w / S::from_f64(m as f64);
                    sum += term;
                }
                S::one() - (-w).exp() * sum
            }
            DistributionSpec::HalfNormal { sigma } => {
                crate::transforms::erf_real(x / (*sigma * S::sqrt_2()))
            }
            DistributionSpec::Maxwell { sigma } => {
                let v = x / (*sigma * S::sqrt_2());
                crate::transforms::erf_real(v)
                    - S::frac_2_sqrt_pi() * v * (-(v * v)).exp()
            }
            DistributionSpec::Uniform { lower, upper } => {
                if x <= *lower {
                    S::zero()
                } else if x >= *upper {
                    S::one()
                } else {
                    (x - *lower) / (*upper - *lower)
                }
            }
        }
    }

    pub fn survival(&self, x: S) -> S {
        S::one() - self.cdf(x)
    }

    /// A point beyond which the tail mass is at most `eps`.
    pub fn tail_cutoff(&self, eps: S) -> S {
        if let DistributionSpec::Uniform { upper, .. } = self {
            return *upper;
        }
        if let DistributionSpec::PointMass { value } = self {
            return *value;
        }
        let mut x = self.mean().max(S::from_f64(1e-6));
        for _ in 0..240 {
            if self.survival(x) <= eps {
                return x;
            }
            x *= S::from_f64(1.5);
        }
        x
    }

    pub fn convert<T: Scalar>(&self) -> DistributionSpec<T> {
        let f = |x: S| T::from_f64(x.to_f64());
        match self {
            DistributionSpec::PointMass { value } => DistributionSpec::PointMass { value: f(*value) },
            DistributionSpec::DiscreteMixture { atoms } => DistributionSpec::DiscreteMixture {
                atoms: atoms
                    .iter()
                    .map(|a| Atom { value: f(a.value), weight: f(a.weight) })
                    .collect(),
            },
            DistributionSpec::Exponential { rate } => {
                DistributionSpec::Exponential { rate: f(*rate) }
            }
            DistributionSpec::Gamma { shape, rate } => {
                DistributionSpec::Gamma { shape: *shape, rate: f(*rate) }
            }
            DistributionSpec::HalfNormal { sigma } => {
                DistributionSpec::HalfNormal { sigma: f(*sigma) }
            }
            DistributionSpec::Maxwell { sigma } => DistributionSpec::Maxwell { sigma: f(*sigma) },
            DistributionSpec::Uniform { lower, upper } => {
                DistributionSpec::Uniform { lower: f(*lower), upper: f(*upper) }
            }
        }
    }
}

fn require_positive<S: Scalar>(x: S, what: &str) -> Result<(), ModelError> {
    if x > S::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter(format!("{what} must be positive, got {x}")))
    }
}

/// Spec's per-operation convenience alias.
pub fn mean<S: Scalar>(spec: &DistributionSpec<S>) -> S {
    spec.mean()
}

/// A surplus process: premiums of law `premium` arriving at rate `lambda1`,
/// claims of law `claim` at rate `lambda2`. A discrete-mixture premium is the
/// steady-state bonus-malus case; a continuous premium is the doubly
/// stochastic case.
#[derive(Clone, Debug)]
pub struct BonusMalusSystem<S> {
    premium: DistributionSpec<S>,
    claim: DistributionSpec<S>,
    lambda1: S,
    lambda2: S,
}

impl<S: Scalar> BonusMalusSystem<S> {
    pub fn new(
        premium: DistributionSpec<S>,
        claim: DistributionSpec<S>,
        lambda1: S,
        lambda2: S,
    ) -> Result<Self, ModelError> {
        require_positive(lambda1, "lambda1")?;
        // lambda2 = 0 ("no claims") is accepted as a degenerate case so the
        // trivial bounds and simulations stay expressible; validate() warns.
        if !(lambda2 >= S::zero()) || !lambda2.is_finite() {
            return Err(ModelError::InvalidParameter(format!(
                "lambda2 must be non-negative, got {lambda2}"
            )));
        }
        premium.validate_for(Role::Premium)?;
        claim.validate_for(Role::Claim)?;
        Ok(BonusMalusSystem { premium, claim, lambda1, lambda2 })
    }

    pub fn premium(&self) -> &DistributionSpec<S> {
        &self.premium
    }
    pub fn claim(&self) -> &DistributionSpec<S> {
        &self.claim
    }
    pub fn lambda1(&self) -> S {
        self.lambda1
    }
    pub fn lambda2(&self) -> S {
        self.lambda2
    }

    /// Total event intensity, the natural magnitude scale of D.
    pub fn intensity(&self) -> S {
        self.lambda1 + self.lambda2
    }

    /// lambda1 E[C] - lambda2 E[X]; negative drift means certain ruin.
    pub fn drift(&self) -> S {
        self.lambda1 * self.premium.mean() - self.lambda2 * self.claim.mean()
    }

    pub fn is_discrete_premium(&self) -> bool {
        !self.premium.is_continuous()
    }

    pub fn convert<T: Scalar>(&self) -> BonusMalusSystem<T> {
        BonusMalusSystem {
            premium: self.premium.convert(),
            claim: self.claim.convert(),
            lambda1: T::from_f64(self.lambda1.to_f64()),
            lambda2: T::from_f64(self.lambda2.to_f64()),
        }
    }
}

/// What `validate` reports about a constructed system.
#[derive(Clone, Debug)]
pub struct ValidationReport<S> {
    pub actions: Vec<String>,
    pub drift: S,
    pub warnings: Vec<String>,
}

/// Reports drift and degeneracy warnings. Hard invariant violations are
/// rejected earlier, by the constructors.
pub fn validate<S: Scalar>(system: &BonusMalusSystem<S>) -> ValidationReport<S> {
    let drift = system.drift();
    let mut warnings = Vec::new();
    if drift <= S::zero() {
        warnings.push(format!(
            "net drift {drift} is not positive: the ruin probability need not vanish at \
             infinity and the series solution may be purely formal"
        ));
    }
    if system.lambda2() == S::zero() {
        warnings.push("lambda2 = 0: no claims ever arrive, ruin is impossible".into());
    }
    ValidationReport { actions: Vec::new(), drift, warnings }
}

/// Row-stochastic level-transition matrix of a bonus-malus scheme.
#[derive(Clone, Debug)]
pub struct TransitionMatrix<S> {
    entries: Vec<S>,
    k: usize,
}

impl<S: Scalar> TransitionMatrix<S> {
    pub fn new(rows: Vec<Vec<S>>) -> Result<Self, ModelError> {
        let k = rows.len();
        if k == 0 || rows.iter().any(|r| r.len() != k) {
            return Err(ModelError::InvalidParameter(
                "transition matrix must be square and non-empty".into(),
            ));
        }
        let mut entries = Vec::with_capacity(k * k);
        for (i, row) in rows.iter().enumerate() {
            let mut sum = S::zero();
            for &p in row {
                if !(p >= S::zero()) {
                    return Err(ModelError::NonStochasticMatrix { row: i, sum: p.to_f64() });
                }
                sum += p;
            }
            if (sum - S::one()).abs() > S::from_f64(1e-9) {
                return Err(ModelError::NonStochasticMatrix { row: i, sum: sum.to_f64() });
            }
            entries.extend_from_slice(row);
        }
        Ok(TransitionMatrix { entries, k })
    }

    pub fn order(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        self.entries[i * self.k + j]
    }
}

/// Stationary distribution of `p`: solves (P^T - I) pi = 0 with the
/// normalization row appended, falling back to damped power iteration when
/// the direct solve fails to meet `tol`.
pub fn steady_state<S: Scalar>(p: &TransitionMatrix<S>, tol: S) -> Result<Vec<S>, ModelError> {
    let k = p.order();

    // rank of P^T - I decides uniqueness
    let mut b = vec![S::zero(); k * k];
    for i in 0..k {
        for j in 0..k {
            b[i * k + j] = p.get(j, i) - if i == j { S::one() } else { S::zero() };
        }
    }
    let nullity = k - real_rank(&mut b.clone(), k);
    if nullity > 1 {
        return Err(ModelError::NonUniqueStationary { nullity });
    }

    // least squares for the (K+1) x K system via normal equations:
    // (B^T B + 1 1^T) x = 1
    let mut normal = vec![S::zero(); k * k];
    for i in 0..k {
        for j in 0..k {
            let mut acc = S::one(); // the ones-row outer product
            for r in 0..k {
                acc += b[r * k + i] * b[r * k + j];
            }
            normal[i * k + j] = acc;
        }
    }
    let rhs = vec![S::one(); k];
    let direct = real_solve(&mut normal, &rhs, k);

    let check = |pi: &[S]| -> bool {
        pi.iter().all(|&x| x >= -S::from_f64(1e-9))
            && residual_inf(p, pi) <= tol
    };

    if let Some(mut pi) = direct {
        clamp_normalize(&mut pi);
        if check(&pi) {
            return Ok(pi);
        }
    }

    // damped power iteration: x <- x (P + I)/2, robust to periodic chains
    let mut x = vec![S::one() / S::from_f64(k as f64); k];
    for _ in 0..200_000 {
        let mut next = vec![S::zero(); k];
        for i in 0..k {
            for j in 0..k {
                next[j] += x[i] * p.get(i, j);
            }
        }
        for j in 0..k {
            next[j] = (next[j] + x[j]) * S::from_f64(0.5);
        }
        clamp_normalize(&mut next);
        let delta = x
            .iter()
            .zip(&next)
            .fold(S::zero(), |m, (&a, &b)| m.max((a - b).abs()));
        x = next;
        if delta <= tol * S::from_f64(0.01) && residual_inf(p, &x) <= tol {
            return Ok(x);
        }
    }
    Err(ModelError::NonUniqueStationary { nullity: 1 })
}

fn residual_inf<S: Scalar>(p: &TransitionMatrix<S>, pi: &[S]) -> S {
    let k = p.order();
    let mut worst = S::zero();
    for j in 0..k {
        let mut acc = S::zero();
        for i in 0..k {
            acc += pi[i] * p.get(i, j);
        }
        worst = worst.max((acc - pi[j]).abs());
    }
    worst
}

fn clamp_normalize<S: Scalar>(pi: &mut [S]) {
    let mut sum = S::zero();
    for x in pi.iter_mut() {
        if *x < S::zero() {
            *x = S::zero();
        }
        sum += *x;
    }
    if sum > S::zero() {
        for x in pi.iter_mut() {
            *x /= sum;
        }
    }
}

/// Rank via Gaussian elimination with partial pivoting; destroys `m`.
fn real_rank<S: Scalar>(m: &mut [S], k: usize) -> usize {
    let mut max_abs = S::zero();
    for v in m.iter() {
        max_abs = max_abs.max(v.abs());
    }
    let thresh = max_abs.max(S::one()) * S::from_f64(1e-10);
    let mut rank = 0;
    let mut row = 0;
    for col in 0..k {
        let mut piv = row;
        for r in row..k {
            if m[r * k + col].abs() > m[piv * k + col].abs() {
                piv = r;
            }
        }
        if m[piv * k + col].abs() <= thresh {
            continue;
        }
        for j in 0..k {
            m.swap(row * k + j, piv * k + j);
        }
        for r in (row + 1)..k {
            let f = m[r * k + col] / m[row * k + col];
            for j in col..k {
                let sub = f * m[row * k + j];
                m[r * k + j] -= sub;
            }
        }
        rank += 1;
        row += 1;
        if row == k {
            break;
        }
    }
    rank
}

/// Solves a dense SPD-ish system in place; `None` when a pivot collapses.
fn real_solve<S: Scalar>(m: &mut [S], rhs: &[S], k: usize) -> Option<Vec<S>> {
    let mut x = rhs.to_vec();
    for col in 0..k {
        let mut piv = col;
        for r in col..k {
            if m[r * k + col].abs() > m[piv * k + col].abs() {
                piv = r;
            }
        }
        if m[piv * k + col].abs() <= S::from_f64(1e-300) {
            return None;
        }
        if piv != col {
            for j in 0..k {
                m.swap(col * k + j, piv * k + j);
            }
            x.swap(col, piv);
        }
        for r in (col + 1)..k {
            let f = m[r * k + col] / m[col * k + col];
            for j in col..k {
                let sub = f * m[col * k + j];
                m[r * k + j] -= sub;
            }
            let sub = f * x[col];
            x[r] -= sub;
        }
    }
    for col in (0..k).rev() {
        let mut acc = x[col];
        for j in (col + 1)..k {
            acc = acc - m[col * k + j] * x[j];
        }
        x[col] = acc / m[col * k + col];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mixture_0p1() -> DistributionSpec<f64> {
        let c = [0.4, 0.8, 1.0, 1.2, 1.4, 1.5, 1.7, 1.8, 2.0, 2.2];
        DistributionSpec::discrete_mixture(&c.map(|v| (v, 0.1)))
            .unwrap()
    }

    #[test]
    fn steady_state_two_level() {
        // balance by hand: pi1 * 0.5 = pi2 * 0.25 and pi1 + pi2 = 1
        // => pi = (1/3, 2/3)
        let p = TransitionMatrix::new(vec![vec![0.5, 0.5], vec![0.25, 0.75]]).unwrap();
        let pi = steady_state(&p, 1e-12).unwrap();
        assert!((pi[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((pi[1] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn steady_state_doubly_stochastic_is_uniform() {
        let p = TransitionMatrix::new(vec![
            vec![0.2, 0.3, 0.5],
            vec![0.5, 0.2, 0.3],
            vec![0.3, 0.5, 0.2],
        ])
        .unwrap();
        let pi = steady_state(&p, 1e-12).unwrap();
        for v in pi {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn steady_state_identity_not_unique() {
        let p = TransitionMatrix::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            steady_state(&p, 1e-12),
            Err(ModelError::NonUniqueStationary { nullity: 2 })
        ));
    }

    #[test]
    fn steady_state_periodic_chain() {
        let p = TransitionMatrix::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let pi = steady_state(&p, 1e-10).unwrap();
        assert!((pi[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn bad_rows_rejected() {
        assert!(matches!(
            TransitionMatrix::new(vec![vec![0.5, 0.4], vec![0.5, 0.5]]),
            Err(ModelError::NonStochasticMatrix { row: 0, .. })
        ));
        assert!(matches!(
            TransitionMatrix::new(vec![vec![1.5, -0.5], vec![0.5, 0.5]]),
            Err(ModelError::NonStochasticMatrix { .. })
        ));
    }

    #[test]
    fn means_match_catalog() {
        assert_eq!(DistributionSpec::point_mass(2.0).unwrap().mean(), 2.0);
        assert_eq!(DistributionSpec::exponential(1.0).unwrap().mean(), 1.0);
        // arithmetic mean of the ten-level premium vector
        assert!((mixture_0p1().mean() - 1.4).abs() < 1e-15);
        assert!(
            (DistributionSpec::half_normal(1.0).unwrap().mean()
                - (2.0 / std::f64::consts::PI).sqrt())
            .abs()
                < 1e-15
        );
        let g = DistributionSpec::gamma(3.0, 6.0).unwrap();
        assert!((g.mean() - 0.5).abs() < 1e-15);
        assert!((DistributionSpec::uniform(1.0, 3.0).unwrap().mean() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn gamma_shape_must_be_integer() {
        assert!(matches!(
            DistributionSpec::gamma(2.5, 6.0),
            Err(ModelError::InadmissibleClaimLaw(_))
        ));
        assert!(DistributionSpec::gamma(3.0, 6.0).is_ok());
    }

    #[test]
    fn weights_must_sum_to_one() {
        let bad = [(1.0, 0.5), (2.0, 0.4)];
        assert!(matches!(
            DistributionSpec::discrete_mixture(&bad),
            Err(ModelError::InvalidWeights { .. })
        ));
    }

    #[test]
    fn canonicalization_merges_and_sorts() {
        let mut log = Vec::new();
        let spec = DistributionSpec::discrete_mixture_with_log(
            &[(2.0, 0.25), (1.0, 0.25), (2.0, 0.5)],
            Some(&mut log),
        )
        .unwrap();
        let DistributionSpec::DiscreteMixture { atoms } = &spec else {
            panic!()
        };
        assert_eq!(atoms.len(), 2);
        assert_eq!(atoms[0].value, 1.0);
        assert!((atoms[1].weight - 0.75).abs() < 1e-14);
        assert!(atoms.windows(2).all(|w| w[0].value < w[1].value));
        assert!(!log.is_empty());
    }

    #[test]
    fn claims_must_be_continuous() {
        let sys = BonusMalusSystem::new(
            mixture_0p1(),
            DistributionSpec::point_mass(1.0).unwrap(),
            18.0,
            11.0,
        );
        assert!(matches!(sys, Err(ModelError::InadmissibleClaimLaw(_))));
    }

    #[test]
    fn validate_reports_drift() {
        let sys = BonusMalusSystem::new(
            mixture_0p1(),
            DistributionSpec::half_normal(1.0).unwrap(),
            18.0,
            11.0,
        )
        .unwrap();
        let report = validate(&sys);
        let expect = 18.0 * 1.4 - 11.0 * (2.0 / std::f64::consts::PI).sqrt();
        assert!((report.drift - expect).abs() < 1e-12);
        assert!(report.warnings.is_empty());
        assert_eq!(report.drift, sys.drift());

        let heavy = BonusMalusSystem::new(
            mixture_0p1(),
            DistributionSpec::exponential(0.1).unwrap(),
            18.0,
            11.0,
        )
        .unwrap();
        assert!(!validate(&heavy).warnings.is_empty());
    }

    #[test]
    fn cdf_pdf_consistency() {
        // quadrature of the density reproduces the distribution function
        for spec in [
            DistributionSpec::exponential(2.0).unwrap(),
            DistributionSpec::gamma(3.0, 6.0).unwrap(),
            DistributionSpec::half_normal(1.0).unwrap(),
            DistributionSpec::maxwell(0.7071067811865476).unwrap(),
            DistributionSpec::uniform(0.5, 2.0).unwrap(),
        ] {
            for x in [0.3, 0.9, 1.7] {
                let byquad =
                    crate::quad::integrate(|t: f64| spec.pdf(t), 0.0, x, 1e-13).unwrap();
                assert!(
                    (byquad - spec.cdf(x)).abs() < 1e-11,
                    "{spec:?} at {x}: {byquad} vs {}",
                    spec.cdf(x)
                );
            }
            assert!((spec.survival(spec.tail_cutoff(1e-12)) - 0.0).abs() <= 1e-12);
        }
    }
}

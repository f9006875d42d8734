//! Residue-series solver.
//!
//! Each simple zero z_i of D contributes a term A_i e^{z_i u} to the ruin
//! probability. The coefficients solve a dense linear system whose rows come
//! from taking residues of the transform identity at each zero; moving every
//! A-term to the left gives
//!
//! ```text
//!   [D'(z_i) - lambda1 M_C'(z_i)] A_i
//!       + lambda1 sum_{j != i} A_j (M_C(z_i) - M_C(z_j)) / (z_j - z_i)
//!   = -lambda1 (M_C(z_i) - 1) / z_i
//! ```
//!
//! with the discrete-premium case expanding the moment function into its
//! finite sum over levels.

use thiserror::Error;

use crate::cx::{c, cabs, cexp, cexp_m1, re, C};
use crate::linalg::{condition_estimate, CMatrix, LinalgError, Lu};
use crate::model::DistributionSpec;
use crate::roots::{rightmost_negative_real_root, RootError, RootSet, SearchOptions};
use crate::scalar::Scalar;
use crate::transforms::{CharacteristicFunction, TransformError};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum SolverError {
    #[error("root {re}{im:+}i fails the simplicity certificate: |D'| = {dprime_mag:.3e}")]
    MultipleRootDetected { re: f64, im: f64, dprime_mag: f64 },
    #[error("assembly requires a {expected} premium model")]
    WrongPremiumModel { expected: &'static str },
    #[error(transparent)]
    Singular(#[from] LinalgError),
    #[error("no strictly negative real zero: Lundberg bound unavailable")]
    NoRealRoot,
    #[error(transparent)]
    Roots(#[from] RootError),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// One exponential term A e^{z u}.
#[derive(Clone, Copy, Debug)]
pub struct SeriesTerm<S> {
    pub root: C<S>,
    pub coefficient: C<S>,
}

/// Real-arithmetic form of one root (or conjugate pair):
/// `e^{-decay_rate u} (cos_coef cos(frequency u) + sin_coef sin(frequency u))`.
#[derive(Clone, Copy, Debug)]
pub struct RealTerm<S> {
    pub decay_rate: S,
    pub frequency: S,
    pub cos_coef: S,
    pub sin_coef: S,
}

#[derive(Clone, Debug)]
pub struct Diagnostics<S> {
    /// 1-norm condition estimate of the assembled matrix.
    pub condition_number: S,
    /// Principal-part data A_i z_i D'(z_i) per term.
    pub n_psi: Vec<C<S>>,
    pub warnings: Vec<String>,
}

/// The solved exponential series for the ruin probability.
#[derive(Clone, Debug)]
pub struct SeriesSolution<S> {
    pub terms: Vec<SeriesTerm<S>>,
    pub real_form: Vec<RealTerm<S>>,
    /// True when the root set was certified exhaustive: the series is the
    /// exact ruin probability rather than a truncation.
    pub closed_form: bool,
    pub diagnostics: Diagnostics<S>,
}

impl<S: Scalar> SeriesSolution<S> {
    pub fn empty(closed_form: bool) -> Self {
        SeriesSolution {
            terms: Vec::new(),
            real_form: Vec::new(),
            closed_form,
            diagnostics: Diagnostics {
                condition_number: S::one(),
                n_psi: Vec::new(),
                warnings: Vec::new(),
            },
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Complex-route evaluation (sum of A_i e^{z_i u}); the imaginary part
    /// measures conjugate-coherence error.
    pub fn eval_complex(&self, u: S) -> C<S> {
        self.terms
            .iter()
            .fold(re(S::zero()), |acc, t| acc + t.coefficient * cexp(t.root * u))
    }
}

fn check_simple<S: Scalar>(roots: &RootSet<S>, simple_tol: f64) -> Result<(), SolverError> {
    for r in &roots.roots {
        if cabs(r.dprime) < S::from_f64(simple_tol) {
            return Err(SolverError::MultipleRootDetected {
                re: r.location.re.to_f64(),
                im: r.location.im.to_f64(),
                dprime_mag: cabs(r.dprime).to_f64(),
            });
        }
    }
    Ok(())
}

/// (1 - e^{-w c}) / d, stabilized through expm1 for small arguments.
fn one_minus_exp_over<S: Scalar>(w: C<S>, cl: S, d: C<S>) -> C<S> {
    -cexp_m1(-w * cl) / d
}

/// Assembles the residue system for a discrete (bonus-malus) premium model.
pub fn assemble_discrete<S: Scalar>(
    cf: &CharacteristicFunction<S>,
    roots: &RootSet<S>,
) -> Result<(CMatrix<S>, Vec<C<S>>), SolverError> {
    let DistributionSpec::DiscreteMixture { atoms } = cf.system().premium() else {
        return Err(SolverError::WrongPremiumModel { expected: "discrete-mixture" });
    };
    let atoms = atoms.clone();
    let lam1 = cf.system().lambda1();
    let k = roots.roots.len();
    let mut m = CMatrix::zeros(k);
    let mut rhs = vec![c::<S>(0.0, 0.0); k];

    for i in 0..k {
        let zi = roots.roots[i].location;
        let dpi = roots.roots[i].dprime;
        // weighted exponentials at this root, reused across the row
        let ew: Vec<C<S>> = atoms.iter().map(|a| cexp(zi * a.value) * a.weight).collect();

        let mgf_prime = atoms
            .iter()
            .zip(&ew)
            .fold(re(S::zero()), |acc, (a, &e)| acc + e * a.value);
        m.set(i, i, dpi - mgf_prime * lam1);

        for j in 0..k {
            if j == i {
                continue;
            }
            let zj = roots.roots[j].location;
            let w = zi - zj;
            let d = zj - zi;
            let sum = atoms
                .iter()
                .zip(&ew)
                .fold(re(S::zero()), |acc, (a, &e)| acc + e * one_minus_exp_over(w, a.value, d));
            m.set(i, j, sum * lam1);
        }

        let b = atoms
            .iter()
            .zip(&ew)
            .fold(re(S::zero()), |acc, (a, &e)| acc + e * one_minus_exp_over(zi, a.value, zi));
        rhs[i] = -b * lam1;
    }
    Ok((m, rhs))
}

/// Assembles the residue system for a continuous (doubly stochastic)
/// premium model, phrased through the premium moment function.
pub fn assemble_continuous<S: Scalar>(
    cf: &CharacteristicFunction<S>,
    roots: &RootSet<S>,
) -> Result<(CMatrix<S>, Vec<C<S>>), SolverError> {
    if !cf.system().premium().is_continuous() {
        return Err(SolverError::WrongPremiumModel { expected: "continuous" });
    }
    let premium = cf.system().premium();
    let lam1 = cf.system().lambda1();
    let k = roots.roots.len();
    let mut m = CMatrix::zeros(k);
    let mut rhs = vec![c::<S>(0.0, 0.0); k];

    let mgf: Vec<C<S>> = roots
        .roots
        .iter()
        .map(|r| crate::transforms::premium_mgf(premium, r.location))
        .collect::<Result<_, _>>()?;

    for i in 0..k {
        let zi = roots.roots[i].location;
        let dpi = roots.roots[i].dprime;
        let mgf_prime = crate::transforms::premium_mgf_prime(premium, zi)?;
        m.set(i, i, dpi - mgf_prime * lam1);
        for j in 0..k {
            if j == i {
                continue;
            }
            let zj = roots.roots[j].location;
            m.set(i, j, (mgf[i] - mgf[j]) / (zj - zi) * lam1);
        }
        rhs[i] = -(mgf[i] - re(S::one())) / zi * lam1;
    }
    Ok((m, rhs))
}

/// Dispatches on the premium model.
pub fn assemble<S: Scalar>(
    cf: &CharacteristicFunction<S>,
    roots: &RootSet<S>,
) -> Result<(CMatrix<S>, Vec<C<S>>), SolverError> {
    if cf.system().is_discrete_premium() {
        assemble_discrete(cf, roots)
    } else {
        assemble_continuous(cf, roots)
    }
}

/// Solves the assembled system and packages the series with its real form
/// and diagnostics.
pub fn solve_series<S: Scalar>(
    matrix: CMatrix<S>,
    rhs: Vec<C<S>>,
    roots: &RootSet<S>,
) -> Result<SeriesSolution<S>, SolverError> {
    check_simple(roots, SearchOptions::default().simple_tol)?;
    let k = roots.roots.len();
    if k == 0 {
        return Ok(SeriesSolution::empty(roots.exhaustive));
    }

    let lu = Lu::factor(&matrix)?;
    let mut coeffs = lu.solve(&rhs);
    let cond = condition_estimate(&matrix, &lu);

    let mut warnings = Vec::new();
    if cond > S::from_f64(1e8) {
        warnings.push(format!(
            "ill-conditioned residue system: condition estimate {cond}"
        ));
    }

    // enforce conjugate coherence so the series is exactly real
    for i in 0..k {
        let zi = roots.roots[i].location;
        if zi.im == S::zero() {
            let drift = coeffs[i].im.abs();
            if drift > S::from_f64(1e-6) * cabs(coeffs[i]).max(S::from_f64(1e-30)) {
                warnings.push(format!(
                    "coefficient at real root {} had imaginary part {drift}",
                    zi.re
                ));
            }
            coeffs[i] = re(coeffs[i].re);
        } else if let Some(j) = roots.roots[i].paired_index {
            if j > i {
                let avg = (coeffs[i] + coeffs[j].conj()) * S::from_f64(0.5);
                let drift = cabs(coeffs[i] - coeffs[j].conj());
                if drift > S::from_f64(1e-6) * cabs(avg).max(S::from_f64(1e-30)) {
                    warnings.push(format!(
                        "conjugate pair at {}{:+}i solved asymmetrically (gap {drift})",
                        zi.re, zi.im
                    ));
                }
                coeffs[i] = avg;
                coeffs[j] = avg.conj();
            }
        }
    }

    let terms: Vec<SeriesTerm<S>> = roots
        .roots
        .iter()
        .zip(&coeffs)
        .map(|(r, &a)| SeriesTerm { root: r.location, coefficient: a })
        .collect();

    // real form: one entry per real root, one per conjugate pair (with the
    // positive-frequency convention)
    let mut real_form = Vec::new();
    let mut consumed = vec![false; k];
    for i in 0..k {
        if consumed[i] {
            continue;
        }
        let t = terms[i];
        if t.root.im == S::zero() {
            real_form.push(RealTerm {
                decay_rate: -t.root.re,
                frequency: S::zero(),
                cos_coef: t.coefficient.re,
                sin_coef: S::zero(),
            });
            consumed[i] = true;
        } else {
            let j = roots.roots[i].paired_index.expect("paired complex root");
            let up = if t.root.im > S::zero() { t } else { terms[j] };
            real_form.push(RealTerm {
                decay_rate: -up.root.re,
                frequency: up.root.im,
                cos_coef: up.coefficient.re * S::from_f64(2.0),
                sin_coef: -up.coefficient.im * S::from_f64(2.0),
            });
            consumed[i] = true;
            consumed[j] = true;
        }
    }

    let n_psi = terms
        .iter()
        .zip(&roots.roots)
        .map(|(t, r)| t.coefficient * t.root * r.dprime)
        .collect();

    Ok(SeriesSolution {
        terms,
        real_form,
        closed_form: roots.exhaustive,
        diagnostics: Diagnostics { condition_number: cond, n_psi, warnings },
    })
}

/// Convenience: assemble + solve in one step.
pub fn solve_for_roots<S: Scalar>(
    cf: &CharacteristicFunction<S>,
    roots: &RootSet<S>,
) -> Result<SeriesSolution<S>, SolverError> {
    let (m, rhs) = assemble(cf, roots)?;
    solve_series(m, rhs, roots)
}

/// Evaluates the ruin probability from the real form (numerically the
/// stabler route; the complex route is kept for verification).
pub fn eval_psi<S: Scalar>(sol: &SeriesSolution<S>, u: S) -> S {
    let mut acc = S::zero();
    for t in &sol.real_form {
        let envelope = (-t.decay_rate * u).exp();
        if t.frequency == S::zero() {
            acc += t.cos_coef * envelope;
        } else {
            let (s, cs) = (t.frequency * u).sin_cos();
            acc += envelope * (t.cos_coef * cs + t.sin_coef * s);
        }
    }
    acc
}

/// Recomputes the principal-part values N(z_i) from the residue equation's
/// right side with the solved coefficients; `A_i z_i D'(z_i)` must match.
pub fn n_psi_from_equation<S: Scalar>(
    cf: &CharacteristicFunction<S>,
    sol: &SeriesSolution<S>,
) -> Result<Vec<C<S>>, SolverError> {
    let lam1 = cf.system().lambda1();
    let k = sol.terms.len();
    let mut out = Vec::with_capacity(k);
    if cf.system().is_discrete_premium() {
        let DistributionSpec::DiscreteMixture { atoms } = cf.system().premium() else {
            return Err(SolverError::WrongPremiumModel { expected: "discrete-mixture" });
        };
        for i in 0..k {
            let zi = sol.terms[i].root;
            let mut inner = re(S::zero());
            for a in atoms {
                let e = cexp(zi * a.value) * a.weight;
                let mut bracket = one_minus_exp_over(zi, a.value, zi)
                    - sol.terms[i].coefficient * a.value;
                for (j, tj) in sol.terms.iter().enumerate() {
                    if j == i {
                        continue;
                    }
                    let w = zi - tj.root;
                    bracket += tj.coefficient * one_minus_exp_over(w, a.value, tj.root - zi);
                }
                inner += e * bracket;
            }
            out.push(-inner * lam1 * zi);
        }
    } else {
        let premium = cf.system().premium();
        for i in 0..k {
            let zi = sol.terms[i].root;
            let mci = crate::transforms::premium_mgf(premium, zi)?;
            let mut bracket = (mci - re(S::one())) / zi
                - crate::transforms::premium_mgf_prime(premium, zi)? * sol.terms[i].coefficient;
            for (j, tj) in sol.terms.iter().enumerate() {
                if j == i {
                    continue;
                }
                let mcj = crate::transforms::premium_mgf(premium, tj.root)?;
                bracket += tj.coefficient * (mci - mcj) / (tj.root - zi);
            }
            out.push(-bracket * lam1 * zi);
        }
    }
    Ok(out)
}

/// Exponential upper bound psi(u) <= A exp(-r0 u): r0 sits a relative margin
/// inside the rightmost negative real zero, A is the refined maximum of
/// psi(u) e^{r0 u} over a grid covering the decay scale.
pub fn lundberg_bound<S: Scalar>(
    cf: &CharacteristicFunction<S>,
    sol: &SeriesSolution<S>,
    opts: &SearchOptions,
) -> Result<(S, S), SolverError> {
    let root = rightmost_negative_real_root(cf, opts)?.ok_or(SolverError::NoRealRoot)?;
    let r0 = root.abs() * (S::one() - S::from_f64(1e-9));

    let n = 2000usize;
    let u_max = S::from_f64(20.0) / r0;
    let h = u_max / S::from_f64(n as f64);
    let weighted = |u: S| eval_psi(sol, u) * (r0 * u).exp();

    let mut values = Vec::with_capacity(n + 1);
    for i in 0..=n {
        values.push(weighted(h * S::from_f64(i as f64)));
    }

    // refine the strongest local maxima by ternary search
    let mut peaks: Vec<usize> = (0..=n)
        .filter(|&i| {
            let v = values[i];
            (i == 0 || values[i - 1] <= v) && (i == n || values[i + 1] <= v)
        })
        .collect();
    peaks.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).expect("finite"));
    peaks.truncate(8);

    let mut best = S::zero();
    for &i in &peaks {
        best = best.max(values[i]);
        let mut lo = h * S::from_f64(i.saturating_sub(1) as f64);
        let mut hi = h * S::from_f64(((i + 1).min(n)) as f64);
        for _ in 0..90 {
            let m1 = lo + (hi - lo) / S::from_f64(3.0);
            let m2 = hi - (hi - lo) / S::from_f64(3.0);
            if weighted(m1) < weighted(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        best = best.max(weighted((lo + hi) * S::from_f64(0.5)));
    }
    Ok((r0, best))
}

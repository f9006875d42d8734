//! Independent validation of a candidate solution.
//!
//! Two instruments that never look at the solver's internals:
//!
//! * the defect of the governing balance equation
//!   `-(l1+l2) psi~(u) + l1 E[psi~(u+C)] + l2 int_0^u psi~(u-x) f_X(x) dx`,
//!   which is identically zero for the true survival probability;
//! * event-driven Monte Carlo estimation of the ruin probability itself,
//!   with deterministic per-path substreams.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::cx::{cexp, C};
use crate::model::{BonusMalusSystem, DistributionSpec};
use crate::quad::{integrate, QuadError};
use crate::scalar::Scalar;
use crate::solver::SeriesSolution;
use crate::transforms::{claim_laplace_upper, premium_mgf, TransformError};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum VerifyError {
    #[error("quadrature failure: {0}")]
    QuadratureFailure(#[from] QuadError),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// A survival-probability candidate `constant + sum Re(beta_i e^{z_i u})`.
///
/// The residual operator is linear on this class, which the property tests
/// exercise directly; a solved series corresponds to constant 1 and
/// beta_i = -A_i.
#[derive(Clone, Debug)]
pub struct ExponentialBundle<S> {
    pub constant: S,
    pub terms: Vec<(C<S>, C<S>)>,
}

impl<S: Scalar> ExponentialBundle<S> {
    pub fn from_solution(sol: &SeriesSolution<S>) -> Self {
        ExponentialBundle {
            constant: S::one(),
            terms: sol.terms.iter().map(|t| (t.root, -t.coefficient)).collect(),
        }
    }

    pub fn zero() -> Self {
        ExponentialBundle { constant: S::zero(), terms: Vec::new() }
    }

    pub fn eval(&self, u: S) -> S {
        self.terms
            .iter()
            .fold(self.constant, |acc, &(z, b)| acc + (b * cexp(z * u)).re)
    }

    pub fn scaled_sum(alpha: S, a: &Self, beta: S, b: &Self) -> Self {
        let mut terms: Vec<(C<S>, C<S>)> = a
            .terms
            .iter()
            .map(|&(z, coef)| (z, coef * alpha))
            .collect();
        terms.extend(b.terms.iter().map(|&(z, coef)| (z, coef * beta)));
        ExponentialBundle { constant: alpha * a.constant + beta * b.constant, terms }
    }
}

/// Which evaluation route the residual takes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResidualRoute {
    /// Closed-form transforms for the convolution and premium expectation.
    SemiAnalytic,
    /// Adaptive quadrature of the defining integrals (the oracle route).
    Quadrature,
}

/// Defect of the balance equation at `u` for a survival candidate.
pub fn residual_at<S: Scalar>(
    system: &BonusMalusSystem<S>,
    bundle: &ExponentialBundle<S>,
    u: S,
    route: ResidualRoute,
) -> Result<S, VerifyError> {
    let lam1 = system.lambda1();
    let lam2 = system.lambda2();
    let claim = system.claim();

    let mut r = -(lam1 + lam2) * bundle.eval(u);

    // premium expectation E[psi~(u + C)]
    match (route, system.premium()) {
        (_, DistributionSpec::DiscreteMixture { atoms }) => {
            for a in atoms {
                r += lam1 * a.weight * bundle.eval(u + a.value);
            }
        }
        (_, DistributionSpec::PointMass { value }) => {
            r += lam1 * bundle.eval(u + *value);
        }
        (ResidualRoute::SemiAnalytic, premium) => {
            let mut e = bundle.constant;
            for &(z, b) in &bundle.terms {
                e += (b * cexp(z * u) * premium_mgf(premium, z)?).re;
            }
            r += lam1 * e;
        }
        (ResidualRoute::Quadrature, premium) => {
            let tol = S::from_f64(1e-12) * system.intensity();
            let cutoff = premium.tail_cutoff(S::from_f64(1e-18));
            let e = integrate(|x: S| bundle.eval(u + x) * premium.pdf(x), S::zero(), cutoff, tol)?;
            r += lam1 * e;
        }
    }

    // claim convolution int_0^u psi~(u - x) f_X(x) dx
    if lam2 > S::zero() && u > S::zero() {
        match route {
            ResidualRoute::SemiAnalytic => {
                let mut conv = bundle.constant * claim.cdf(u);
                for &(z, b) in &bundle.terms {
                    let full = crate::transforms::claim_laplace(claim, z)?;
                    let upper = claim_laplace_upper(claim, z, u);
                    conv += (b * cexp(z * u) * (full - upper)).re;
                }
                r += lam2 * conv;
            }
            ResidualRoute::Quadrature => {
                let tol = S::from_f64(1e-12) * system.intensity();
                let conv =
                    integrate(|x: S| bundle.eval(u - x) * claim.pdf(x), S::zero(), u, tol)?;
                r += lam2 * conv;
            }
        }
    }
    Ok(r)
}

/// Residual of a solved series over a grid; the semi-analytic route is the
/// production path, quadrature remains available as the oracle.
pub fn residual_grid<S: Scalar>(
    system: &BonusMalusSystem<S>,
    sol: &SeriesSolution<S>,
    u_grid: &[S],
    route: ResidualRoute,
) -> Result<Vec<(S, S)>, VerifyError> {
    let bundle = ExponentialBundle::from_solution(sol);
    u_grid
        .iter()
        .map(|&u| residual_at(system, &bundle, u, route).map(|r| (u, r)))
        .collect()
}

fn sample_law(spec: &DistributionSpec<f64>, rng: &mut ChaCha8Rng) -> f64 {
    match spec {
        DistributionSpec::PointMass { value } => *value,
        DistributionSpec::DiscreteMixture { atoms } => {
            let mut u: f64 = rng.random();
            for a in atoms {
                if u < a.weight {
                    return a.value;
                }
                u -= a.weight;
            }
            atoms.last().expect("non-empty mixture").value
        }
        DistributionSpec::Exponential { rate } => {
            let u: f64 = rng.random();
            -(1.0 - u).ln() / rate
        }
        DistributionSpec::Gamma { shape, rate } => {
            // sum of exponentials: exact for integer shape
            let mut acc = 0.0;
            for _ in 0..*shape {
                let u: f64 = rng.random();
                acc -= (1.0 - u).ln();
            }
            acc / rate
        }
        DistributionSpec::HalfNormal { sigma } => {
            let g: f64 = StandardNormal.sample(rng);
            (g * sigma).abs()
        }
        DistributionSpec::Maxwell { sigma } => {
            let (a, b, c): (f64, f64, f64) = (
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
            );
            sigma * (a * a + b * b + c * c).sqrt()
        }
        DistributionSpec::Uniform { lower, upper } => {
            let u: f64 = rng.random();
            lower + (upper - lower) * u
        }
    }
}

/// Event-driven surplus simulation. Ruin means the surplus reaches zero or
/// below, which can only happen at claim epochs, so only those are checked.
/// Path `p` draws from substream `p + 1` of the seeded generator: estimates
/// are bit-identical for a fixed seed regardless of scheduling, and sharing
/// a seed across different `u` values yields pathwise-coupled (monotone)
/// estimates.
pub fn simulate_ruin(
    system: &BonusMalusSystem<f64>,
    u: f64,
    horizon: f64,
    n_paths: u64,
    seed: u64,
) -> (f64, f64) {
    let lam1 = system.lambda1();
    let lam2 = system.lambda2();
    let total = lam1 + lam2;
    let premium_share = lam1 / total;

    let mut ruined: u64 = 0;
    for path in 0..n_paths {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path + 1);
        let mut t = 0.0f64;
        let mut surplus = u;
        loop {
            let draw: f64 = rng.random();
            t -= (1.0 - draw).ln() / total;
            if t > horizon {
                break;
            }
            let which: f64 = rng.random();
            if which < premium_share {
                surplus += sample_law(system.premium(), &mut rng);
            } else {
                surplus -= sample_law(system.claim(), &mut rng);
                if surplus <= 0.0 {
                    ruined += 1;
                    break;
                }
            }
        }
    }

    let estimate = ruined as f64 / n_paths as f64;
    let ci = 1.96 * (estimate * (1.0 - estimate) / n_paths as f64).sqrt();
    (estimate, ci)
}

/// One Monte Carlo point of the report.
#[derive(Clone, Copy, Debug)]
pub struct McPoint {
    pub u: f64,
    pub estimate: f64,
    pub ci_halfwidth: f64,
    pub n_paths: u64,
}

/// Everything the verification pass produces.
#[derive(Clone, Debug)]
pub struct VerificationReport {
    /// (u, residual) in units of intensity x probability.
    pub residual_grid: Vec<(f64, f64)>,
    pub sup_residual: f64,
    pub mc_points: Vec<McPoint>,
    /// Series value at each Monte Carlo abscissa, for the comparison column.
    pub series_at_mc: Vec<f64>,
    /// Whether psi(u) <= A exp(-r0 u) held on the residual grid (when a
    /// bound was supplied).
    pub lundberg_ok: Option<bool>,
    pub seed: u64,
    pub horizon: f64,
}

pub struct VerifyConfig {
    pub u_max: f64,
    pub grid_points: usize,
    pub mc_us: Vec<f64>,
    pub n_paths: u64,
    pub horizon: f64,
    pub seed: u64,
    /// (r0, A) from the Lundberg computation, when available.
    pub lundberg: Option<(f64, f64)>,
}

/// Runs the full verification pass on an f64 pipeline.
pub fn verification_report(
    system: &BonusMalusSystem<f64>,
    sol: &SeriesSolution<f64>,
    cfg: &VerifyConfig,
) -> Result<VerificationReport, VerifyError> {
    let n = cfg.grid_points.max(2);
    let grid: Vec<f64> = (0..n)
        .map(|i| cfg.u_max * i as f64 / (n - 1) as f64)
        .collect();
    let residual_grid = residual_grid(system, sol, &grid, ResidualRoute::SemiAnalytic)?;
    let sup_residual = residual_grid
        .iter()
        .fold(0.0f64, |acc, &(_, r)| acc.max(r.abs()));

    let mut mc_points = Vec::new();
    let mut series_at_mc = Vec::new();
    for &u in &cfg.mc_us {
        let (estimate, ci_halfwidth) = simulate_ruin(system, u, cfg.horizon, cfg.n_paths, cfg.seed);
        mc_points.push(McPoint { u, estimate, ci_halfwidth, n_paths: cfg.n_paths });
        series_at_mc.push(crate::solver::eval_psi(sol, u));
    }

    let lundberg_ok = cfg.lundberg.map(|(r0, a)| {
        grid.iter().all(|&u| {
            crate::solver::eval_psi(sol, u) <= a * (-r0 * u).exp() + 1e-9 * a.max(1.0)
        })
    });

    Ok(VerificationReport {
        residual_grid: residual_grid
            .into_iter()
            .map(|(u, r)| (u.to_f64(), r.to_f64()))
            .collect(),
        sup_residual: sup_residual.to_f64(),
        mc_points,
        series_at_mc,
        lundberg_ok,
        seed: cfg.seed,
        horizon: cfg.horizon,
    })
}

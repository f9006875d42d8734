//! Ruin probabilities of steady-state bonus-malus systems.
//!
//! The surplus process earns premiums at Poisson rate `lambda1` and pays
//! claims at rate `lambda2`. Its ruin probability has a Laplace transform
//! whose poles sit at the left-half-plane zeros of a characteristic function
//! `D`; locating those zeros, solving a linear system for the residue
//! coefficients, and summing the resulting exponential series yields `psi(u)`
//! together with a Lundberg-type bound, a defect residual of the governing
//! integral equation, and Monte Carlo cross-checks.
//!
//! Pipeline: [`model`] (domain types) -> [`transforms`] (`D` and friends) ->
//! [`roots`] (zero census) -> [`solver`] (series coefficients and bounds) ->
//! [`verify`] (independent validation).
//!
//! Everything numeric is generic over [`scalar::Scalar`]; `f64` is the
//! default working type and [`twofloat::TwoFloat`] provides the extended
//! (~31 digit) mode. The concrete aliases below pin the common case.

pub mod cx;
pub mod linalg;
pub mod model;
pub mod quad;
pub mod roots;
pub mod scalar;
pub mod solver;
pub mod transforms;
pub mod verify;

pub use model::{BonusMalusSystem, DistributionSpec, TransitionMatrix};
pub use roots::RootSet;
pub use solver::SeriesSolution;
pub use verify::VerificationReport;

/// Default working scalar.
pub type Real = f64;
/// Extended-precision scalar (double-double, ~31 significant digits).
pub type Extended = twofloat::TwoFloat;

pub type System = model::BonusMalusSystem<Real>;
pub type Spec = model::DistributionSpec<Real>;
pub type Cf = transforms::CharacteristicFunction<Real>;
pub type Roots = roots::RootSet<Real>;
pub type Solution = solver::SeriesSolution<Real>;

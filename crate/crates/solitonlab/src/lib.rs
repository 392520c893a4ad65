//! Exact toric computations for weighted solitons and Fano cones.
//!
//! The crate computes weighted Futaki invariants, canonical soliton
//! vectors, Sasaki/Reeb-cone volume minimization, the cone-quotient weight
//! correspondence and a non-Archimedean stability calculus, all driven by
//! exact rational polytope geometry.
//!
//! Conventions (echoed by the CLI in every report):
//! - Duistermaat-Heckman measure `DH = n! * Lebesgue` on the moment
//!   polytope; global `2 pi` factors are dropped throughout.
//! - Futaki sign: `Fut_g(zeta) = -(1/V_g) int <x, zeta> g dDH`, and the
//!   unnormalized [`solitons::futaki`] drops the `1/V_g`.
//! - Normalized cone volume: `vol(C^{n+1}) = 1` at the symmetric Reeb
//!   vector.
//!
//! The geometric core is generic over the scalar type; the concrete
//! aliases below fix the two instantiations used in practice.

pub mod error;
pub mod fanocone;
pub mod identity;
pub mod linalg;
pub mod lp;
pub mod nastab;
pub mod polykernel;
pub mod scalar;
pub mod schema;
pub mod solitons;
pub mod toricfunc;
pub mod weights;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Exact rational scalar used by all combinatorics and exact integrals.
pub type Rat = num_rational::BigRational;

/// Rational polytope in the weight lattice.
pub type QPolytope = polykernel::Polytope<Rat>;
/// Rational cone (in the stated lattice).
pub type QCone = polykernel::PolyCone<Rat, polykernel::LatM>;
/// Floating polytope (same machinery, floating scalar).
pub type FPolytope = polykernel::Polytope<f64>;

pub use polykernel::measure::PiecewiseMeasure;
pub use polykernel::section::{cross_section, CrossSection, SectionFrame};
pub use polykernel::weighted::{
    integrate, moments, moments_exact, pushforward_1d, pushforward_1d_exact, IntegralValue,
    Moments,
};
pub use polykernel::{Facet, LatM, LatN, MVector, NVector, PolyCone, Polytope, Vector};
pub use weights::{reeb_transform, Expr, Weight, WeightFamily};

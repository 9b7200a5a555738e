//! Polynomial (Karhunen–Loève) approximation of Brownian motion and high order
//! discretizations of Inhomogeneous Geometric Brownian Motion.
//!
//! The crate is organised bottom-up:
//!
//! - [`orthopoly`]: Legendre and (-1,-1)-Jacobi polynomials, the orthonormal
//!   eigenfunctions `e_k` of the Brownian bridge covariance and Gauss–Legendre rules.
//! - [`brownian`]: increment / space-time Lévy area pairs, polynomial paths,
//!   parabolas, arches and exact coarsening of pairs.
//! - [`levy`]: conditional moments of the space-space-time Lévy area and the
//!   algebra linking it to third order iterated integrals.
//! - [`igbm`]: the five IGBM one-step schemes.
//! - [`harness`]: coupled fine/coarse Monte Carlo estimation of strong and weak
//!   errors with log-log slope fits.
//! - [`check`]: quick invariant suites used by `polybm check`.

pub mod brownian;
pub mod check;
pub mod error;
pub mod harness;
pub mod igbm;
pub mod levy;
pub mod orthopoly;
pub mod rng;

pub use brownian::{BrownianPolynomial, DensePath, IncrementPair};
pub use error::{Error, Result};
pub use harness::{ConvergenceReport, ErrorEstimate, ExperimentConfig, Metric, SlopeFit};
pub use igbm::{IgbmParams, SchemeKind};
pub use levy::{CondLevyEstimate, LevyAreas, TripleIntegrals};
pub use orthopoly::{PolyBasis, QuadratureRule};

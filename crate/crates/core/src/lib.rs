//! Generalized posteriors over the location of the optimum, built from a
//! profile likelihood, and Thompson sampling from them.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`). The `*64`
//! aliases below fix the scalar to `f64`.
//!
//! * [`mab`]: finite-armed bandits with a Gaussian working likelihood.
//! * [`pricing`]: posted-price selling with monotone Bernoulli demand.
//! * [`lipschitz`]: continuum-armed Lipschitz bandits on the unit cube.
//! * [`cutting_plane`]: center-of-gravity and ellipsoid methods.
//! * [`solvers`]: the convex kernels behind all of them.

pub mod cutting_plane;
pub mod error;
pub mod linalg;
pub mod lipschitz;
pub mod mab;
pub mod model;
pub mod pricing;
pub mod rng;
pub mod scalar;
pub mod solvers;

pub use error::{Error, Result};
pub use rng::RngStream;
pub use scalar::Real;

pub type Mat64 = linalg::Mat<f64>;
pub type Belief64<S> = model::Belief<S, f64>;
pub type EpisodeRecord64<D, F = f64> = model::EpisodeRecord<D, f64, F>;
pub type Dataset64 = model::Dataset<f64>;

pub type ConstraintSet64 = solvers::ConstraintSet<f64>;
pub type QuadObjective64 = solvers::QuadObjective<f64>;
pub type SolveResult64 = solvers::SolveResult<f64>;

pub type ArmStats64 = mab::ArmStats<f64>;
pub type ArmLipschitz64 = mab::ArmLipschitz<f64>;
pub type MabModel64 = mab::MabModel<f64>;
pub type BanditEnv64 = mab::BanditEnv<f64>;

pub type PriceGrid64 = pricing::PriceGrid<f64>;
pub type ValuationModel64 = pricing::ValuationModel<f64>;
pub type PricingStats64 = pricing::PricingStats<f64>;
pub type PricingPosterior64 = pricing::PricingPosterior<f64>;

pub type ContinuumDataset64 = lipschitz::ContinuumDataset<f64>;
pub type LipschitzSpec64 = lipschitz::LipschitzSpec<f64>;
pub type ConeObjective64 = lipschitz::ConeObjective<f64>;

pub type Polygon64 = cutting_plane::Polygon2D<f64>;
pub type Ellipsoid64 = cutting_plane::Ellipsoid<f64>;
pub type QuadraticObjective64 = cutting_plane::QuadraticObjective<f64>;

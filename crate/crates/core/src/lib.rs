//! Three-state level-crossing model with one tilted level crossing two
//! parallel ones, for coupling windows of finite or infinite duration.
//!
//! The crate has two independent routes to every transition probability:
//! a numerical solution of the Schrodinger equation ([`integrator`]) and an
//! analytic propagator assembled from two Landau-Zener crossings joined by
//! adiabatic evolution ([`propagator`], [`probabilities`]). Everything is
//! generic over the scalar type; the aliases below fix it to `f64`.

#![allow(
    clippy::needless_range_loop,
    clippy::excessive_precision,
    clippy::neg_cmp_op_on_partial_ord
)]

pub mod analysis;
pub mod checks;
pub mod error;
pub mod integrator;
pub mod linalg;
pub mod lz;
pub mod model;
pub mod ode;
pub mod probabilities;
pub mod propagator;
pub mod quadrature;
pub mod scalar;
pub mod special;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};
pub use model::TimeBound;
pub use propagator::Basis;
pub use scalar::Real;

pub type Params = model::ModelParams<f64>;
pub type Frame = spectral::AdiabaticFrame<f64>;
pub type Node = lz::LzNode<f64>;
pub type Phases = propagator::PhaseIntegrals<f64>;
pub type Propagator = propagator::Propagator3<f64>;
pub type Table = probabilities::TransitionTable<f64>;
pub type Split = probabilities::ProbabilitySplit<f64>;
pub type State = integrator::StateVector<f64>;
pub type Traj = integrator::Trajectory<f64>;
pub type Tols = integrator::Tolerances<f64>;

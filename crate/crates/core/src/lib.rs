//! Verification toolkit for rank-one ECS model data: canonical forms of
//! generic nilpotent self-adjoint maps, the solution space and its CT
//! spectrum, GL(Z)-polynomials, selector search and the isometry group.

pub mod error;
pub mod linalg;
pub mod nullforms;
pub mod scalar;
pub mod glzpoly;
pub mod selectors;
pub mod ode;
pub mod solspace;
pub mod isogroup;
pub mod bridge;
pub mod suite;

pub use num_rational::BigRational as Rational;

pub type RatMatrix = linalg::Matrix<Rational>;
pub type Mat64 = linalg::Matrix<f64>;
pub type Mat32 = linalg::Matrix<f32>;
pub type InnerProductQ = nullforms::InnerProduct<Rational>;
pub type Solution64 = solspace::Solution<f64>;
pub type OdeModel64 = solspace::OdeModel<f64>;
pub type ModelData64 = isogroup::ModelData<f64>;
pub type GroupElement64 = isogroup::GroupElement<f64>;
pub type Point64 = isogroup::Point<f64>;

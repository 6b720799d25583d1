//! # aerowrench-core
//!
//! Dynamics, estimation, and control library for a cooperative aerial
//! transportation system: two quadrotors rigidly attached to a beam payload,
//! guided by a human through applied forces and torques.
//!
//! The crate provides:
//!
//! - [`dynamics`]: Euler-angle kinematics, attitude-dependent inertia,
//!   Coriolis terms, and the integrated 6-DOF equations of motion, together
//!   with component-level (payload + quadrotor) consistency checks.
//! - [`allocation`]: weighted minimum-norm distribution of a total
//!   thrust/torque command to the two quadrotors.
//! - [`observer`]: an acceleration-free nonlinear wrench observer with an
//!   adaptive gain law, plus its acceleration-fed twin used as a test oracle.
//! - [`stability`]: numerical verification of the observer gain condition
//!   and convergence/robustness diagnostics over a flight envelope.
//! - [`ekf`]: an extended Kalman filter over `[eta, eta_dot, wrench]` used as
//!   the comparison estimator.
//! - [`control`]: admittance reference generation and a cascaded tracking
//!   controller that closes the simulation loop.
//! - [`scenario`] / [`sim`]: scripted interaction scenarios and a
//!   deterministic fixed-step closed-loop simulation harness with RMSE
//!   metrics.
//!
//! The library is `no_std`-compatible (with `alloc`); disable the default
//! `std` feature for embedded use. File formats and the CLI live in the
//! companion `aerowrench-cli` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![warn(missing_docs)]

extern crate alloc;

pub mod allocation;
pub mod control;
pub mod dynamics;
pub mod ekf;
mod error;
pub mod math;
pub mod observer;
pub mod params;
pub mod scenario;
pub mod sim;
pub mod stability;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = core::result::Result<T, Error>;

/// 3-vector of `f64`.
pub type Vec3 = nalgebra::Vector3<f64>;
/// 4-vector of `f64`.
pub type Vec4 = nalgebra::Vector4<f64>;
/// 6-vector of `f64`.
pub type Vec6 = nalgebra::Vector6<f64>;
/// 3x3 matrix of `f64`.
pub type Mat3 = nalgebra::Matrix3<f64>;
/// 4x4 matrix of `f64`.
pub type Mat4 = nalgebra::Matrix4<f64>;
/// 6x6 matrix of `f64`.
pub type Mat6 = nalgebra::Matrix6<f64>;
/// 6x4 input-coefficient matrix.
pub type Mat6x4 = nalgebra::SMatrix<f64, 6, 4>;
/// 4x8 allocation matrix.
pub type Mat4x8 = nalgebra::SMatrix<f64, 4, 8>;
/// 8-vector of quadrotor inputs.
pub type Vec8 = nalgebra::SVector<f64, 8>;

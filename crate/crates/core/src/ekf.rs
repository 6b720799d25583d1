//! Extended Kalman filter baseline over the augmented state
//! `x = [eta; eta_dot; T_ex]`.
//!
//! The process model integrates the vehicle dynamics with the wrench states
//! driven by a random walk, the filter-side counterpart of the observer's
//! slowly-varying-wrench assumption. Measurements are `(eta, eta_dot)` with
//! additive Gaussian noise. The discrete transition Jacobian is obtained by
//! central differences on the one-step map (step `1e-6`); the wrench block of
//! the continuous Jacobian is analytically `M^-1` and serves as a
//! cross-check. Covariance updates use the Joseph form plus explicit
//! symmetrization.

// Provides the float math methods when building without std.
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::{SMatrix, SVector};

use crate::dynamics::{compact_matrices, integrated_dynamics, SystemState, Wrench};
use crate::math::try_rk4_step;
use crate::params::{EkfNoise, SystemParams};
use crate::{Error, Mat6, Result, Vec4};

/// Augmented filter state dimension.
pub const NX: usize = 18;
/// Measurement dimension (`eta` and `eta_dot`).
pub const NZ: usize = 12;

/// Filter mean and covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct EkfState {
    /// Mean `[eta; eta_dot; T_ex]`.
    pub x: SVector<f64, NX>,
    /// Covariance.
    pub p: SMatrix<f64, NX, NX>,
    /// Time of validity [s].
    pub t: f64,
}

impl EkfState {
    /// Initializes at a measured state with zero wrench prior.
    ///
    /// The prior keeps kinematic uncertainty at sensor scale and leaves the
    /// wrench wide open (10 N / 10 N m standard deviation).
    pub fn new(meas: &SVector<f64, NZ>, t: f64) -> Self {
        let mut x = SVector::<f64, NX>::zeros();
        x.fixed_rows_mut::<NZ>(0).copy_from(meas);
        let mut p = SMatrix::<f64, NX, NX>::zeros();
        for i in 0..3 {
            p[(i, i)] = 0.01;
            p[(3 + i, 3 + i)] = 0.01;
            p[(6 + i, 6 + i)] = 0.01;
            p[(9 + i, 9 + i)] = 0.01;
            p[(12 + i, 12 + i)] = 100.0;
            p[(15 + i, 15 + i)] = 100.0;
        }
        Self { x, p, t }
    }

    /// Current wrench estimate.
    pub fn wrench(&self) -> Wrench {
        Wrench::from_vector(&self.x.fixed_rows::<6>(12).into_owned())
    }

    /// Marginal covariance of the wrench block.
    pub fn wrench_covariance(&self) -> Mat6 {
        self.p.fixed_view::<6, 6>(12, 12).into_owned()
    }
}

fn system_state_from(x: &SVector<f64, NX>, t: f64) -> SystemState {
    SystemState::from_generalized(
        &x.fixed_rows::<6>(0).into_owned(),
        &x.fixed_rows::<6>(6).into_owned(),
        t,
    )
}

/// One-step discrete process map: RK4 over `dt` with the wrench states held
/// constant (random-walk mean).
fn propagate(
    x: &SVector<f64, NX>,
    u: &Vec4,
    params: &SystemParams,
    t: f64,
    dt: f64,
) -> Result<SVector<f64, NX>> {
    try_rk4_step(
        |tt, x| -> Result<SVector<f64, NX>> {
            let state = system_state_from(x, tt);
            let wrench = Wrench::from_vector(&x.fixed_rows::<6>(12).into_owned());
            let acc = integrated_dynamics(&state, params, u, &wrench)?;
            let mut dx = SVector::<f64, NX>::zeros();
            dx.fixed_rows_mut::<6>(0).copy_from(&x.fixed_rows::<6>(6));
            dx.fixed_rows_mut::<6>(6).copy_from(&acc);
            Ok(dx)
        },
        t,
        x,
        dt,
    )
}

/// Discrete process noise for one step: white acceleration noise integrated
/// through the kinematic chain plus the wrench random walk.
fn process_noise(noise: &EkfNoise, dt: f64) -> SMatrix<f64, NX, NX> {
    let mut q = SMatrix::<f64, NX, NX>::zeros();
    for i in 0..6 {
        let qa = noise.q_eta_dd[i];
        q[(i, i)] = qa * dt.powi(3) / 3.0;
        q[(i, 6 + i)] = qa * dt.powi(2) / 2.0;
        q[(6 + i, i)] = qa * dt.powi(2) / 2.0;
        q[(6 + i, 6 + i)] = qa * dt;
        q[(12 + i, 12 + i)] = noise.q_wrench[i] * dt;
    }
    q
}

/// Prediction step: propagates the mean through the dynamics and the
/// covariance through the numerically-differentiated transition Jacobian.
pub fn ekf_predict(
    ekf: &EkfState,
    u: &Vec4,
    params: &SystemParams,
    noise: &EkfNoise,
    dt: f64,
) -> Result<EkfState> {
    if dt <= 0.0 {
        return Err(Error::NonPositiveDt { dt });
    }
    let x_next = propagate(&ekf.x, u, params, ekf.t, dt)?;

    // Central-difference transition Jacobian, step 1e-6.
    let h = 1e-6;
    let mut f = SMatrix::<f64, NX, NX>::zeros();
    for i in 0..NX {
        let mut xp = ekf.x;
        let mut xm = ekf.x;
        xp[i] += h;
        xm[i] -= h;
        let fp = propagate(&xp, u, params, ekf.t, dt)?;
        let fm = propagate(&xm, u, params, ekf.t, dt)?;
        f.set_column(i, &((fp - fm) / (2.0 * h)));
    }

    let mut p = f * ekf.p * f.transpose() + process_noise(noise, dt);
    p = (p + p.transpose()) * 0.5;
    let trace = p.trace();
    if !trace.is_finite() || trace > 1e9 {
        return Err(Error::CovarianceBlowUp { trace });
    }
    Ok(EkfState {
        x: x_next,
        p,
        t: ekf.t + dt,
    })
}

/// Measurement update with `H = [I12 0]`, Joseph-form covariance, returning
/// the updated state and the innovation.
pub fn ekf_update(
    ekf: &EkfState,
    meas: &SVector<f64, NZ>,
    noise: &EkfNoise,
) -> Result<(EkfState, SVector<f64, NZ>)> {
    let mut h = SMatrix::<f64, NZ, NX>::zeros();
    for i in 0..NZ {
        h[(i, i)] = 1.0;
    }
    let r = SMatrix::<f64, NZ, NZ>::from_diagonal(&noise.r_meas);
    let innovation = meas - ekf.x.fixed_rows::<NZ>(0).into_owned();
    let s = ekf.p.fixed_view::<NZ, NZ>(0, 0).into_owned() + r;
    let s_inv = s.try_inverse().ok_or(Error::SingularInnovation)?;
    let k = ekf.p * h.transpose() * s_inv;

    let x = ekf.x + k * innovation;
    let i_kh = SMatrix::<f64, NX, NX>::identity() - k * h;
    let mut p = i_kh * ekf.p * i_kh.transpose() + k * r * k.transpose();
    p = (p + p.transpose()) * 0.5;

    Ok((EkfState { x, p, t: ekf.t }, innovation))
}

/// Analytic sensitivity of the generalized acceleration to the wrench,
/// `d eta_ddot / d T_ex = M(eta)^-1`; cross-check for the numeric Jacobian.
pub fn wrench_acceleration_jacobian(state: &SystemState, params: &SystemParams) -> Result<Mat6> {
    compact_matrices(state, params)
        .m_inverse()
        .ok_or(Error::SingularInertia)
}

//! Acceleration-free nonlinear wrench observer with adaptive gain.
//!
//! The observer estimates the external wrench `T_ex` acting on the vehicle
//! from `(eta, eta_dot, u)` alone. Starting from the error-driven form
//! `T_hat' = B (T_ex - T_hat)` with `B = K M^-1`, the auxiliary vector
//! `delta = T_hat - Lambda(eta_dot)` with `Lambda(eta_dot) = K eta_dot`
//! removes every occurrence of `eta_ddot`:
//!
//! ```text
//! delta' = -B delta + B (C eta_dot + G + A u - Lambda(eta_dot))
//! T_hat  =  delta + Lambda(eta_dot)
//! ```
//!
//! The gain matrix is either fixed, `K = k0 I`, or scheduled on the state,
//! `K = (k0 + k1 |eta_dot| + k2 |M(eta)|) I` (spectral norm on `M`,
//! Euclidean on `eta_dot`).
//!
//! ## Adaptive-gain semantics
//!
//! The cancellation above needs `d Lambda / d eta_dot = B M = K`, an exact
//! potential that no state-dependent `K` admits. The implemented semantics
//! holds `K` constant over each integration step (zero-order hold) so the
//! identity holds exactly within a step, and re-bases the auxiliary vector on
//! gain changes, `delta <- T_hat - K_new eta_dot`, keeping the estimate
//! continuous across steps.
//!
//! [`observer_step_direct`] integrates the original acceleration-fed form and
//! exists solely as an oracle for equivalence testing; it must never feed the
//! control loop.

// Provides the float math methods when building without std.
#[allow(unused_imports)]
use num_traits::Float;

use crate::dynamics::{compact_matrices, SystemState, Wrench};
use crate::math::rk4_step;
use crate::params::{GainMode, ObserverGains, SystemParams};
use crate::{Error, Mat6, Result, Vec4, Vec6};

/// Observer state between steps.
///
/// The invariant `t_hat = delta + k_mat * eta_dot` holds after every update,
/// with `eta_dot` the measurement passed to the step that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObserverState {
    /// Auxiliary vector `delta`.
    pub delta: Vec6,
    /// Current wrench estimate.
    pub t_hat: Wrench,
    /// Gain matrix held over the last step.
    pub k_mat: Mat6,
    /// Time of validity [s].
    pub t: f64,
}

impl ObserverState {
    /// Initializes with zero prior knowledge of the wrench:
    /// `delta(0) = -Lambda(eta_dot(0))`, so `T_hat(0) = 0`.
    pub fn new(state: &SystemState, params: &SystemParams, gains: &ObserverGains) -> Self {
        let k_mat = gain_matrix(state, params, gains);
        Self {
            delta: -k_mat * state.eta_dot(),
            t_hat: Wrench::zero(),
            k_mat,
            t: state.t,
        }
    }

    /// Wrench estimate implied by a new velocity measurement before the next
    /// step runs (the causal estimate the control loop consumes).
    pub fn estimate(&self, eta_dot: &Vec6) -> Wrench {
        Wrench::from_vector(&(self.delta + self.k_mat * eta_dot))
    }

    /// Effective scalar gain of the last step.
    pub fn k_eff(&self) -> f64 {
        self.k_mat[(0, 0)]
    }
}

/// Gain matrix `K(eta, eta_dot)`.
///
/// Adaptive mode: `K = (k0 + k1 |eta_dot|_2 + k2 |M(eta)|_2) I6`; the
/// spectral norm of the block-diagonal inertia is `max(m, lambda_max(J))`.
/// Fixed mode: `K = k0 I6`.
pub fn gain_matrix(state: &SystemState, params: &SystemParams, gains: &ObserverGains) -> Mat6 {
    Mat6::identity() * effective_gain(state, params, gains)
}

/// Scalar factor of [`gain_matrix`].
pub fn effective_gain(state: &SystemState, params: &SystemParams, gains: &ObserverGains) -> f64 {
    match gains.mode {
        GainMode::Fixed => gains.k0,
        GainMode::Adaptive => {
            let j = crate::dynamics::inertia_tensor(&state.xi, params);
            let m_norm = params.m.max(j.symmetric_eigenvalues().max());
            gains.k0 + gains.k1 * state.eta_dot().norm() + gains.k2 * m_norm
        }
    }
}

/// Lyapunov function value `V_e = e^T M(eta) e` of an estimation error.
pub fn lyapunov_value(e: &Vec6, state: &SystemState, params: &SystemParams) -> f64 {
    let m = compact_matrices(state, params).m;
    (e.transpose() * m * e)[0]
}

struct StepMatrices {
    b: Mat6,
    cm: crate::dynamics::CompactMatrices,
}

fn step_matrices(state: &SystemState, params: &SystemParams, k_mat: &Mat6) -> Result<StepMatrices> {
    let cm = compact_matrices(state, params);
    let m_inv = cm.m_inverse().ok_or(Error::SingularInertia)?;
    Ok(StepMatrices {
        b: k_mat * m_inv,
        cm,
    })
}

/// Continuous right-hand side of the auxiliary dynamics, for callers that
/// embed the observer in a dense integration:
/// `delta' = B (C eta_dot + G + A u - K eta_dot - delta)` with the gain
/// matrix supplied frozen.
pub fn delta_rhs(
    delta: &Vec6,
    state: &SystemState,
    u: &Vec4,
    params: &SystemParams,
    k_mat: &Mat6,
) -> Result<Vec6> {
    let sm = step_matrices(state, params, k_mat)?;
    let eta_dot = state.eta_dot();
    let forcing = sm.cm.c * eta_dot + sm.cm.g + sm.cm.a * u - k_mat * eta_dot;
    Ok(sm.b * (forcing - delta))
}

/// Continuous right-hand side of the acceleration-fed form:
/// `T_hat' = B (M eta_ddot + C eta_dot + G + A u - T_hat)`.
pub fn direct_rhs(
    t_hat: &Vec6,
    state: &SystemState,
    u: &Vec4,
    eta_ddot: &Vec6,
    params: &SystemParams,
    k_mat: &Mat6,
) -> Result<Vec6> {
    let sm = step_matrices(state, params, k_mat)?;
    let implied = sm.cm.m * eta_ddot + sm.cm.c * state.eta_dot() + sm.cm.g + sm.cm.a * u;
    Ok(sm.b * (implied - t_hat))
}

/// Advances the acceleration-free observer by one sampled-data step.
///
/// `state` is the measurement at the start of the step (time `obs.t`); the
/// measurement, input, and gain are held constant over `dt` and the linear
/// auxiliary dynamics is integrated with one classical RK4 step. Never reads
/// accelerations.
pub fn observer_step(
    obs: &ObserverState,
    state: &SystemState,
    u: &Vec4,
    params: &SystemParams,
    gains: &ObserverGains,
    dt: f64,
) -> Result<ObserverState> {
    if dt <= 0.0 {
        return Err(Error::NonPositiveDt { dt });
    }
    let eta_dot = state.eta_dot();

    // Pick up the velocity change since the last step with the held gain,
    // then re-base delta under the new gain so T_hat stays continuous.
    let t_hat_now = obs.delta + obs.k_mat * eta_dot;
    let k_mat = gain_matrix(state, params, gains);
    let delta0 = t_hat_now - k_mat * eta_dot;

    let sm = step_matrices(state, params, &k_mat)?;
    let forcing = sm.cm.c * eta_dot + sm.cm.g + sm.cm.a * u - k_mat * eta_dot;
    let delta = rk4_step(|_, d| sm.b * (forcing - d), obs.t, &delta0, dt);

    let t_hat = delta + k_mat * eta_dot;
    if !(delta.iter().all(|v| v.is_finite()) && t_hat.iter().all(|v| v.is_finite())) {
        return Err(Error::NonFinite {
            t: obs.t,
            context: "observer step",
        });
    }
    Ok(ObserverState {
        delta,
        t_hat: Wrench::from_vector(&t_hat),
        k_mat,
        t: obs.t + dt,
    })
}

/// Advances the acceleration-fed observer by one sampled-data step.
///
/// Test-only pathway: requires the true generalized acceleration and exists
/// to validate the acceleration-free form against the original design.
pub fn observer_step_direct(
    obs: &ObserverState,
    state: &SystemState,
    u: &Vec4,
    eta_ddot: &Vec6,
    params: &SystemParams,
    gains: &ObserverGains,
    dt: f64,
) -> Result<ObserverState> {
    if dt <= 0.0 {
        return Err(Error::NonPositiveDt { dt });
    }
    let eta_dot = state.eta_dot();
    let k_mat = gain_matrix(state, params, gains);
    let sm = step_matrices(state, params, &k_mat)?;
    let implied = sm.cm.m * eta_ddot + sm.cm.c * eta_dot + sm.cm.g + sm.cm.a * u;

    let t_hat0 = obs.t_hat.to_vector();
    let t_hat = rk4_step(|_, th| sm.b * (implied - th), obs.t, &t_hat0, dt);
    if !t_hat.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite {
            t: obs.t,
            context: "direct observer step",
        });
    }
    Ok(ObserverState {
        delta: t_hat - k_mat * eta_dot,
        t_hat: Wrench::from_vector(&t_hat),
        k_mat,
        t: obs.t + dt,
    })
}

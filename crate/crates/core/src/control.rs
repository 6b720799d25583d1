//! Loop-closing controllers: admittance reference generation from the
//! estimated wrench and a cascaded tracking controller.
//!
//! The admittance filter renders a virtual mass-damper-spring between the
//! desired trajectory `eta_d` and the reference `eta_r` handed to the
//! tracking controller:
//!
//! ```text
//! M_a (eta_r - eta_d)'' + B_a (eta_r - eta_d)' + K_a (eta_r - eta_d) = T_hat
//! ```
//!
//! Sign convention: a positive estimated wrench displaces the reference along
//! the wrench, so a human push guides the vehicle in the push direction. With
//! `K_a = 0` a constant force `f0` yields a steady reference-velocity offset
//! of magnitude `f0 / B_a` per axis.
//!
//! The tracking controller is deliberately simple plumbing: an outer PD with
//! gravity feedforward producing thrust and tilt commands, and an inner PD on
//! attitude with Coriolis feedforward producing body torque. The estimation
//! results are controller-agnostic as long as the loop is stable; gains were
//! verified once in simulation and frozen in
//! [`ControlGains`](crate::params::ControlGains).

// Provides the float math methods when building without std.
#[allow(unused_imports)]
use num_traits::Float;

use serde::{Deserialize, Serialize};

use crate::dynamics::{coriolis_term, inertia_tensor, rotation_matrix, SystemState, Wrench};
use crate::math::rk4_step;
use crate::params::{AdmittanceParams, ControlGains, SystemParams};
use crate::{Vec3, Vec4, Vec6};

/// Reference trajectory produced by the admittance filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceState {
    /// Reference configuration.
    pub eta_r: Vec6,
    /// Reference velocity.
    pub eta_r_dot: Vec6,
    /// Reference acceleration.
    pub eta_r_ddot: Vec6,
}

impl ReferenceState {
    /// Reference initialized on a desired point.
    pub fn from_desired(desired: &DesiredPoint) -> Self {
        Self {
            eta_r: desired.eta,
            eta_r_dot: desired.eta_dot,
            eta_r_ddot: desired.eta_ddot,
        }
    }
}

/// One point of the desired (operator- or planner-side) trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesiredPoint {
    /// Desired configuration.
    pub eta: Vec6,
    /// Desired velocity.
    pub eta_dot: Vec6,
    /// Desired acceleration.
    pub eta_ddot: Vec6,
}

impl DesiredPoint {
    /// Stationary setpoint at a configuration.
    pub fn hover(eta: Vec6) -> Self {
        Self {
            eta,
            eta_dot: Vec6::zeros(),
            eta_ddot: Vec6::zeros(),
        }
    }
}

/// Advances the admittance filter one step with the wrench estimate held
/// constant over `dt`.
///
/// Axes masked off in [`AdmittanceParams::axes`] track the desired trajectory
/// rigidly.
pub fn admittance_step(
    reference: &ReferenceState,
    desired: &DesiredPoint,
    t_hat: &Wrench,
    adm: &AdmittanceParams,
    dt: f64,
) -> ReferenceState {
    let w = t_hat.to_vector();
    // Compliance state per axis: [offset; offset rate] relative to desired.
    let mut z = nalgebra::SVector::<f64, 12>::zeros();
    for i in 0..6 {
        if adm.axes[i] {
            z[i] = reference.eta_r[i] - desired.eta[i];
            z[6 + i] = reference.eta_r_dot[i] - desired.eta_dot[i];
        }
    }
    let rhs = |_t: f64, z: &nalgebra::SVector<f64, 12>| {
        let mut dz = nalgebra::SVector::<f64, 12>::zeros();
        for i in 0..6 {
            if adm.axes[i] {
                dz[i] = z[6 + i];
                dz[6 + i] = (w[i] - adm.b_a[i] * z[6 + i] - adm.k_a[i] * z[i]) / adm.m_a[i];
            }
        }
        dz
    };
    let z_end = rk4_step(rhs, 0.0, &z, dt);

    let mut out = ReferenceState::from_desired(desired);
    for i in 0..6 {
        if adm.axes[i] {
            out.eta_r[i] = desired.eta[i] + z_end[i];
            out.eta_r_dot[i] = desired.eta_dot[i] + z_end[6 + i];
            out.eta_r_ddot[i] = desired.eta_ddot[i]
                + (w[i] - adm.b_a[i] * z_end[6 + i] - adm.k_a[i] * z_end[i]) / adm.m_a[i];
        }
    }
    out
}

/// Output of the tracking controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingCommand {
    /// Desired total input `[T, tau_x, tau_y, tau_z]` (thrust [N], body
    /// torque [N m]).
    pub desired: Vec4,
    /// Set when the thrust command hit the `[0, 2 T_max]` clip.
    pub thrust_clipped: bool,
}

/// Cascaded small-angle tracking controller.
///
/// Outer loop: PD on position with gravity feedforward gives a commanded
/// specific acceleration; its projection on the current body z axis is the
/// thrust, its lateral components are inverted into roll/pitch setpoints.
/// Inner loop: PD on attitude with Coriolis feedforward gives the body
/// torque. Roll/pitch entries of the reference are owned by the lateral
/// channel; only the yaw reference is tracked directly.
pub fn tracking_control(
    state: &SystemState,
    reference: &ReferenceState,
    params: &SystemParams,
    gains: &ControlGains,
) -> TrackingCommand {
    let r = rotation_matrix(&state.xi);

    let p_ref = reference.eta_r.fixed_rows::<3>(0).into_owned();
    let v_ref = reference.eta_r_dot.fixed_rows::<3>(0).into_owned();
    let a_ref = reference.eta_r_ddot.fixed_rows::<3>(0).into_owned();

    // Commanded specific acceleration (includes gravity compensation).
    let a_cmd = a_ref
        + (p_ref - state.p) * gains.pos_p
        + (v_ref - state.p_dot) * gains.pos_d
        + Vec3::new(0.0, 0.0, params.g);

    let mut thrust = params.m * a_cmd.dot(&(r * Vec3::z()));
    let mut clipped = false;
    let t_limit = 2.0 * params.t_max;
    if thrust < 0.0 {
        thrust = 0.0;
        clipped = true;
    } else if thrust > t_limit {
        thrust = t_limit;
        clipped = true;
    }

    // Small-angle inversion of the lateral channels at the reference yaw.
    let psi_r = reference.eta_r[5];
    let (s_psi, c_psi) = psi_r.sin_cos();
    let theta_des = (c_psi * a_cmd.x + s_psi * a_cmd.y) / params.g;
    let phi_des = (s_psi * a_cmd.x - c_psi * a_cmd.y) / params.g;

    let xi_des = Vec3::new(phi_des, theta_des, psi_r);
    let xi_dot_des = Vec3::new(0.0, 0.0, reference.eta_r_dot[5]);
    let mut xi_ddot_cmd =
        (xi_des - state.xi.as_vector()) * gains.att_p + (xi_dot_des - state.xi_dot) * gains.att_d;
    xi_ddot_cmd.z += reference.eta_r_ddot[5];

    let j = inertia_tensor(&state.xi, params);
    let tau = r.transpose() * (j * xi_ddot_cmd + coriolis_term(&state.xi, &state.xi_dot, params));

    TrackingCommand {
        desired: Vec4::new(thrust, tau.x, tau.y, tau.z),
        thrust_clipped: clipped,
    }
}

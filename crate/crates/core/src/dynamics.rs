//! Kinematics and 6-DOF dynamics of the integrated two-quadrotor/payload
//! system.
//!
//! The generalized configuration is `eta = [p; xi]` with `p` the CoM position
//! in the inertial frame and `xi = (phi, theta, psi)` roll/pitch/yaw Euler
//! angles. Body angular velocity relates to Euler rates through the map
//! `omega = Theta(xi) xi_dot` (see [`euler_rate_map`]), and the rotation
//! matrix follows the ZYX (yaw-pitch-roll) intrinsic composition, the
//! standard quadrotor convention, used consistently across the crate.
//!
//! The equations of motion are
//!
//! ```text
//! m p_ddot     = R T e3 - m g e3 + f_ex
//! J(xi) xi_ddot = R tau - C_r(xi, xi_dot) xi_dot + M_ex
//! ```
//!
//! with `J(xi) = Theta^T I Theta` the attitude-dependent inertia tensor and
//! `u = [T, tau]` the total thrust and body torque produced by the two
//! quadrotors. Rearranged, the external wrench has the unified expression
//! `T_ex = M(eta) eta_ddot + C(eta, eta_dot) eta_dot + G + A(eta) u`
//! implemented by [`inverse_dynamics_wrench`], the exact inverse of
//! [`integrated_dynamics`].

// Provides the float math methods when building without std.
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::math::{skew, symmetric_cond};
use crate::params::{ComponentParams, GyroModel, RotorParams, SystemParams};
use crate::{Error, Mat3, Mat4, Mat6, Mat6x4, Result, Vec3, Vec4, Vec6};

/// Roll/pitch/yaw attitude [rad].
///
/// Valid simulated runs keep `|phi|, |theta| < pi/2`; the harness enforces a
/// tighter 85 deg guard rather than regularizing near-singular kinematics.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EulerAngles {
    /// Roll [rad].
    pub phi: f64,
    /// Pitch [rad].
    pub theta: f64,
    /// Yaw [rad].
    pub psi: f64,
}

impl EulerAngles {
    /// Constructs from roll, pitch, yaw.
    pub fn new(phi: f64, theta: f64, psi: f64) -> Self {
        Self { phi, theta, psi }
    }

    /// Attitude as a 3-vector `(phi, theta, psi)`.
    pub fn as_vector(&self) -> Vec3 {
        Vec3::new(self.phi, self.theta, self.psi)
    }

    /// Constructs from a 3-vector `(phi, theta, psi)`.
    pub fn from_vector(v: &Vec3) -> Self {
        Self::new(v.x, v.y, v.z)
    }

    /// True if roll and pitch magnitudes stay strictly below `limit` [rad].
    pub fn within_guard(&self, limit: f64) -> bool {
        self.phi.abs() < limit && self.theta.abs() < limit
    }

    /// True if all angles are finite.
    pub fn is_finite(&self) -> bool {
        self.phi.is_finite() && self.theta.is_finite() && self.psi.is_finite()
    }
}

/// Full kinematic state of the integrated system at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    /// CoM position, inertial frame [m].
    pub p: Vec3,
    /// Attitude.
    pub xi: EulerAngles,
    /// CoM velocity, inertial frame [m/s].
    pub p_dot: Vec3,
    /// Euler-angle rates [rad/s].
    pub xi_dot: Vec3,
    /// Time [s].
    pub t: f64,
}

impl SystemState {
    /// State at rest at the origin.
    pub fn hover(t: f64) -> Self {
        Self {
            p: Vec3::zeros(),
            xi: EulerAngles::default(),
            p_dot: Vec3::zeros(),
            xi_dot: Vec3::zeros(),
            t,
        }
    }

    /// Generalized configuration `eta = [p; xi]`.
    pub fn eta(&self) -> Vec6 {
        let mut eta = Vec6::zeros();
        eta.fixed_rows_mut::<3>(0).copy_from(&self.p);
        eta.fixed_rows_mut::<3>(3).copy_from(&self.xi.as_vector());
        eta
    }

    /// Generalized velocity `eta_dot = [p_dot; xi_dot]`.
    pub fn eta_dot(&self) -> Vec6 {
        let mut v = Vec6::zeros();
        v.fixed_rows_mut::<3>(0).copy_from(&self.p_dot);
        v.fixed_rows_mut::<3>(3).copy_from(&self.xi_dot);
        v
    }

    /// Rebuilds a state from generalized vectors.
    pub fn from_generalized(eta: &Vec6, eta_dot: &Vec6, t: f64) -> Self {
        Self {
            p: eta.fixed_rows::<3>(0).into_owned(),
            xi: EulerAngles::new(eta[3], eta[4], eta[5]),
            p_dot: eta_dot.fixed_rows::<3>(0).into_owned(),
            xi_dot: eta_dot.fixed_rows::<3>(3).into_owned(),
            t,
        }
    }

    /// True if every entry is finite.
    pub fn is_finite(&self) -> bool {
        self.xi.is_finite()
            && self.p.iter().all(|v| v.is_finite())
            && self.p_dot.iter().all(|v| v.is_finite())
            && self.xi_dot.iter().all(|v| v.is_finite())
            && self.t.is_finite()
    }
}

/// External wrench `[f; mu]`: force in the inertial frame, torque about the
/// CoM.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Wrench {
    /// Force [N].
    pub f: Vec3,
    /// Torque [N m].
    pub mu: Vec3,
}

impl Wrench {
    /// Zero wrench.
    pub fn zero() -> Self {
        Self::default()
    }

    /// Stacked 6-vector `[f; mu]`.
    pub fn to_vector(&self) -> Vec6 {
        let mut w = Vec6::zeros();
        w.fixed_rows_mut::<3>(0).copy_from(&self.f);
        w.fixed_rows_mut::<3>(3).copy_from(&self.mu);
        w
    }

    /// Splits a stacked 6-vector back into force and torque.
    pub fn from_vector(w: &Vec6) -> Self {
        Self {
            f: w.fixed_rows::<3>(0).into_owned(),
            mu: w.fixed_rows::<3>(3).into_owned(),
        }
    }

    /// True if all six entries are finite.
    pub fn is_finite(&self) -> bool {
        self.f.iter().all(|v| v.is_finite()) && self.mu.iter().all(|v| v.is_finite())
    }
}

/// Matrices of the compact form
/// `T_ex = M eta_ddot + C eta_dot + G + A u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompactMatrices {
    /// Generalized inertia `blkdiag(m I3, J(xi))`.
    pub m: Mat6,
    /// Generalized Coriolis `blkdiag(0, C_r)`.
    pub c: Mat6,
    /// Gravity vector `[0, 0, m g, 0, 0, 0]`.
    pub g: Vec6,
    /// Input coefficients `[[-R e3, 0]; [0, -R]]`.
    pub a: Mat6x4,
}

impl CompactMatrices {
    /// Block-wise inverse of the generalized inertia; `None` if the
    /// rotational block is singular.
    pub fn m_inverse(&self) -> Option<Mat6> {
        let m_trans = self.m[(0, 0)];
        if m_trans <= 0.0 {
            return None;
        }
        let j = self.m.fixed_view::<3, 3>(3, 3).into_owned();
        let j_inv = j.try_inverse()?;
        let mut inv = Mat6::zeros();
        inv.fixed_view_mut::<3, 3>(0, 0)
            .copy_from(&(Mat3::identity() / m_trans));
        inv.fixed_view_mut::<3, 3>(3, 3).copy_from(&j_inv);
        Some(inv)
    }
}

/// Euler-rate map `Theta(xi)` relating `omega = Theta xi_dot`:
///
/// ```text
/// [ cos(theta)   0   -sin(theta)          ]
/// [ 0            1    sin(phi)            ]
/// [ sin(theta)   0    cos(phi) cos(theta) ]
/// ```
pub fn euler_rate_map(xi: &EulerAngles) -> Mat3 {
    let (sp, cp) = xi.phi.sin_cos();
    let (st, ct) = xi.theta.sin_cos();
    Mat3::new(ct, 0.0, -st, 0.0, 1.0, sp, st, 0.0, cp * ct)
}

/// Analytic time derivative of [`euler_rate_map`] under the chain rule.
///
/// Finite differences are used only as a test oracle; the simulator always
/// evaluates this closed form.
pub fn euler_rate_map_dot(xi: &EulerAngles, xi_dot: &Vec3) -> Mat3 {
    let (sp, cp) = xi.phi.sin_cos();
    let (st, ct) = xi.theta.sin_cos();
    let (pd, td) = (xi_dot.x, xi_dot.y);
    Mat3::new(
        -st * td,
        0.0,
        -ct * td,
        0.0,
        0.0,
        cp * pd,
        ct * td,
        0.0,
        -sp * pd * ct - cp * st * td,
    )
}

/// Inverse of the Euler-rate map, rejecting attitudes where
/// `|det Theta| < 1e-8`.
pub fn euler_rate_map_inverse(xi: &EulerAngles) -> Result<Mat3> {
    let theta = euler_rate_map(xi);
    let det = theta.determinant();
    if det.abs() < 1e-8 {
        return Err(Error::SingularEulerRateMap { det });
    }
    theta
        .try_inverse()
        .ok_or(Error::SingularEulerRateMap { det })
}

/// Body-to-inertial rotation matrix, ZYX (yaw-pitch-roll) intrinsic
/// composition `R = Rz(psi) Ry(theta) Rx(phi)`.
pub fn rotation_matrix(xi: &EulerAngles) -> Mat3 {
    let (sp, cp) = xi.phi.sin_cos();
    let (st, ct) = xi.theta.sin_cos();
    let (ss, cs) = xi.psi.sin_cos();
    Mat3::new(
        cs * ct,
        cs * st * sp - ss * cp,
        cs * st * cp + ss * sp,
        ss * ct,
        ss * st * sp + cs * cp,
        ss * st * cp - cs * sp,
        -st,
        ct * sp,
        ct * cp,
    )
}

/// Attitude-dependent inertia tensor `J(xi) = Theta^T I Theta`.
///
/// This is the defining relation and the single source of truth for `J`;
/// see [`inertia_tensor_closed_form`] for the expanded entries used as a
/// cross-check.
pub fn inertia_tensor(xi: &EulerAngles, params: &SystemParams) -> Mat3 {
    let theta = euler_rate_map(xi);
    theta.transpose() * params.i_body_matrix() * theta
}

/// Expanded entries of the inertia tensor.
///
/// Matches [`inertia_tensor`] exactly at `phi = 0`; for `phi != 0` the `J13`
/// and `J33` entries of this expansion differ from the defining product (the
/// deviation is reported by the cross-check tests rather than silently
/// reconciled).
pub fn inertia_tensor_closed_form(xi: &EulerAngles, params: &SystemParams) -> Mat3 {
    let (i_xx, i_yy, i_zz) = (params.i_body.x, params.i_body.y, params.i_body.z);
    let (sp, cp) = xi.phi.sin_cos();
    let (st, ct) = xi.theta.sin_cos();
    let j11 = i_xx * ct * ct + i_zz * st * st;
    let j13 = (i_zz - i_xx) * cp * st * ct;
    let j23 = i_yy * sp;
    let j33 = i_xx * cp * cp * st * st + i_zz * cp * cp * ct * ct + i_yy * sp * sp;
    Mat3::new(j11, 0.0, j13, 0.0, i_yy, j23, j13, j23, j33)
}

/// Rate of change of the inertia tensor,
/// `J_dot = Theta_dot^T I Theta + Theta^T I Theta_dot`.
pub fn inertia_tensor_rate(xi: &EulerAngles, xi_dot: &Vec3, params: &SystemParams) -> Mat3 {
    let theta = euler_rate_map(xi);
    let theta_dot = euler_rate_map_dot(xi, xi_dot);
    let i = params.i_body_matrix();
    theta_dot.transpose() * i * theta + theta.transpose() * i * theta_dot
}

/// Coriolis/centrifugal matrix `C_r(xi, xi_dot)` with
/// `C_r xi_dot = J Theta_dot xi_dot + [Theta xi_dot]x (J_g Theta xi_dot)`,
/// where `J_g` is `J(xi)` or the body inertia depending on
/// [`GyroModel`](crate::params::GyroModel).
pub fn coriolis_matrix(xi: &EulerAngles, xi_dot: &Vec3, params: &SystemParams) -> Mat3 {
    let theta = euler_rate_map(xi);
    let theta_dot = euler_rate_map_dot(xi, xi_dot);
    let j = inertia_tensor(xi, params);
    let omega = theta * xi_dot;
    let j_gyro = match params.gyro_model {
        GyroModel::EulerSpace => j,
        GyroModel::Body => params.i_body_matrix(),
    };
    j * theta_dot + skew(&omega) * j_gyro * theta
}

/// Coriolis/centrifugal generalized force `C_r(xi, xi_dot) xi_dot`.
///
/// Exactly quadratic in the rates: scaling `xi_dot` by `a` scales the result
/// by `a^2`.
pub fn coriolis_term(xi: &EulerAngles, xi_dot: &Vec3, params: &SystemParams) -> Vec3 {
    coriolis_matrix(xi, xi_dot, params) * xi_dot
}

/// Assembles the compact-form matrices at the given state.
pub fn compact_matrices(state: &SystemState, params: &SystemParams) -> CompactMatrices {
    let j = inertia_tensor(&state.xi, params);
    let c_r = coriolis_matrix(&state.xi, &state.xi_dot, params);
    let r = rotation_matrix(&state.xi);

    let mut m = Mat6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0)
        .copy_from(&(Mat3::identity() * params.m));
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&j);

    let mut c = Mat6::zeros();
    c.fixed_view_mut::<3, 3>(3, 3).copy_from(&c_r);

    let mut g = Vec6::zeros();
    g[2] = params.m * params.g;

    let mut a = Mat6x4::zeros();
    a.fixed_view_mut::<3, 1>(0, 0)
        .copy_from(&(-(r * Vec3::z())));
    a.fixed_view_mut::<3, 3>(3, 1).copy_from(&(-r));

    CompactMatrices { m, c, g, a }
}

fn checked_inertia(xi: &EulerAngles, params: &SystemParams) -> Result<(Mat3, Mat3)> {
    let j = inertia_tensor(xi, params);
    let cond = symmetric_cond(&j.symmetric_eigenvalues());
    if cond > 1e8 {
        return Err(Error::IllConditionedInertia { cond });
    }
    let j_inv = j.try_inverse().ok_or(Error::SingularInertia)?;
    Ok((j, j_inv))
}

/// Generalized acceleration `eta_ddot` produced by control input
/// `u = [T, tau]` (total thrust [N] along body z and body torque [N m]) and
/// external wrench `t_ex`:
///
/// ```text
/// p_ddot  = (R T e3 - m g e3 + f_ex) / m
/// xi_ddot = J^-1 (R tau - C_r xi_dot + M_ex)
/// ```
pub fn integrated_dynamics(
    state: &SystemState,
    params: &SystemParams,
    u: &Vec4,
    t_ex: &Wrench,
) -> Result<Vec6> {
    let (_, j_inv) = checked_inertia(&state.xi, params)?;
    let r = rotation_matrix(&state.xi);
    let thrust = u[0];
    let tau = Vec3::new(u[1], u[2], u[3]);

    let p_ddot = (r * Vec3::new(0.0, 0.0, thrust) - Vec3::new(0.0, 0.0, params.m * params.g)
        + t_ex.f)
        / params.m;
    let xi_ddot = j_inv * (r * tau - coriolis_term(&state.xi, &state.xi_dot, params) + t_ex.mu);

    let mut acc = Vec6::zeros();
    acc.fixed_rows_mut::<3>(0).copy_from(&p_ddot);
    acc.fixed_rows_mut::<3>(3).copy_from(&xi_ddot);
    Ok(acc)
}

/// Unified inverse dynamics: the external wrench implied by a state,
/// control input, and generalized acceleration,
/// `T_ex = M eta_ddot + C eta_dot + G + A u`.
///
/// Exact algebraic inverse of [`integrated_dynamics`].
pub fn inverse_dynamics_wrench(
    state: &SystemState,
    params: &SystemParams,
    u: &Vec4,
    eta_ddot: &Vec6,
) -> Wrench {
    let cm = compact_matrices(state, params);
    Wrench::from_vector(&(cm.m * eta_ddot + cm.c * state.eta_dot() + cm.g + cm.a * u))
}

/// Rotor mixing matrix mapping four rotor thrusts to `[T_q; tau_q]`:
///
/// ```text
/// [ 1        1        1        1  ]
/// [ 0        r        0       -r  ]
/// [-r        0        r        0  ]
/// [ varrho  -varrho   varrho  -varrho ]
/// ```
pub fn rotor_mixing_matrix(rotor: &RotorParams) -> Mat4 {
    let r = rotor.r;
    let q = rotor.varrho();
    Mat4::new(
        1.0, 1.0, 1.0, 1.0, //
        0.0, r, 0.0, -r, //
        -r, 0.0, r, 0.0, //
        q, -q, q, -q,
    )
}

/// Total thrust and body torque produced by four rotor thrusts.
pub fn rotor_mixing(thrusts: &Vec4, rotor: &RotorParams) -> (f64, Vec3) {
    let out = rotor_mixing_matrix(rotor) * thrusts;
    (out[0], Vec3::new(out[1], out[2], out[3]))
}

/// Rotor thrusts achieving a requested `(T_q, tau_q)`, via the inverse of the
/// mixing matrix.
pub fn rotor_thrusts_for(thrust: f64, tau: &Vec3, rotor: &RotorParams) -> Result<Vec4> {
    let mix = rotor_mixing_matrix(rotor);
    let inv = mix.try_inverse().ok_or(Error::SingularInertia)?;
    Ok(inv * Vec4::new(thrust, tau.x, tau.y, tau.z))
}

/// Rigid-motion snapshot of the three components sharing one angular
/// velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentMotion {
    /// Payload CoM acceleration, inertial frame [m/s^2].
    pub p_ddot_payload: Vec3,
    /// Quadrotor CoM accelerations, inertial frame [m/s^2].
    pub p_ddot_quad: [Vec3; 2],
    /// Shared body angular velocity [rad/s].
    pub omega: Vec3,
    /// Shared body angular acceleration [rad/s^2].
    pub omega_dot: Vec3,
}

/// Thrust and torque commanded on one quadrotor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadrotorInput {
    /// Collective thrust along the body z axis [N].
    pub thrust: f64,
    /// Body torque [N m].
    pub tau: Vec3,
}

/// Internal wrench exchanged between a quadrotor and the payload: force in
/// the inertial frame, torque in the body frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InternalWrench {
    /// Force the quadrotor exerts on the payload [N].
    pub f: Vec3,
    /// Torque the quadrotor exerts on the payload [N m].
    pub mu: Vec3,
}

/// Residual of the component-level Newton-Euler balance summed over the
/// payload and both quadrotors, stacked `[translational; rotational]`.
///
/// For internal wrenches consistent with the rigid motion, the sum of the
/// component equations reproduces the integrated dynamics and the residual
/// vanishes; a mis-specified internal wrench set leaves the imbalance (for a
/// static unpowered setup, exactly the weight `m g e3`).
pub fn component_consistency(
    xi: &EulerAngles,
    motion: &ComponentMotion,
    inputs: &[QuadrotorInput; 2],
    wrenches: &[InternalWrench; 2],
    components: &ComponentParams,
    params: &SystemParams,
) -> Vec6 {
    let r = rotation_matrix(xi);
    let e3 = Vec3::z();
    let g = params.g;
    let s = [params.s1, params.s2];

    // Payload: m_p a_p = (f1 + f2) - m_p g e3
    //          I_p omega_dot = (mu1 + mu2) + sum s_j x f_j - omega x I_p omega
    let mut res_f = components.m_p * motion.p_ddot_payload - (wrenches[0].f + wrenches[1].f)
        + components.m_p * g * e3;
    let mut res_mu = components.i_p * motion.omega_dot - (wrenches[0].mu + wrenches[1].mu)
        + motion.omega.cross(&(components.i_p * motion.omega));
    for j in 0..2 {
        // Internal forces live in the inertial frame; their moments about the
        // payload CoM are taken in the body frame.
        res_mu -= s[j].cross(&(r.transpose() * wrenches[j].f));
    }

    // Quadrotors: m_q a_q = R T e3 - f_j - m_q g e3
    //             I_q omega_dot = tau_j - mu_j - omega x I_q omega
    for j in 0..2 {
        res_f += components.m_q[j] * motion.p_ddot_quad[j] - r * (inputs[j].thrust * e3)
            + wrenches[j].f
            + components.m_q[j] * g * e3;
        res_mu += components.i_q[j] * motion.omega_dot - inputs[j].tau
            + wrenches[j].mu
            + motion.omega.cross(&(components.i_q[j] * motion.omega));
    }

    let mut res = Vec6::zeros();
    res.fixed_rows_mut::<3>(0).copy_from(&res_f);
    res.fixed_rows_mut::<3>(3).copy_from(&res_mu);
    res
}

/// Solves the quadrotor Newton-Euler equations for the internal wrenches
/// given the rigid motion and inputs; used to build consistent test cases and
/// to recover the forces a load cell would see.
pub fn internal_wrenches_from_motion(
    xi: &EulerAngles,
    motion: &ComponentMotion,
    inputs: &[QuadrotorInput; 2],
    components: &ComponentParams,
    params: &SystemParams,
) -> [InternalWrench; 2] {
    let r = rotation_matrix(xi);
    let e3 = Vec3::z();
    let mut out = [InternalWrench {
        f: Vec3::zeros(),
        mu: Vec3::zeros(),
    }; 2];
    for j in 0..2 {
        out[j].f = r * (inputs[j].thrust * e3)
            - components.m_q[j] * (motion.p_ddot_quad[j] + params.g * e3);
        out[j].mu = inputs[j].tau
            - components.i_q[j] * motion.omega_dot
            - motion.omega.cross(&(components.i_q[j] * motion.omega));
    }
    out
}

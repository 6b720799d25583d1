//! Property tests over the kinematics, allocation, and wrench algebra.

use aerowrench_core::allocation::{allocate, allocation_cost, build_gamma};
use aerowrench_core::dynamics::{
    coriolis_term, inertia_tensor, integrated_dynamics, inverse_dynamics_wrench, rotation_matrix,
    EulerAngles, SystemState, Wrench,
};
use aerowrench_core::params::{AllocationConfig, SystemParams};
use aerowrench_core::{Mat3, Vec3, Vec4, Vec6};
use proptest::prelude::*;

fn attitude_strategy(limit: f64) -> impl Strategy<Value = EulerAngles> {
    (
        -limit..limit,
        -limit..limit,
        -core::f64::consts::PI..core::f64::consts::PI,
    )
        .prop_map(|(phi, theta, psi)| EulerAngles::new(phi, theta, psi))
}

proptest! {
    #[test]
    fn rotation_matrices_are_proper_orthogonal(xi in attitude_strategy(3.0)) {
        let r = rotation_matrix(&xi);
        prop_assert!(((r.transpose() * r) - Mat3::identity()).abs().max() < 1e-12);
        prop_assert!((r.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inertia_tensor_is_symmetric_psd_inside_envelope(xi in attitude_strategy(1.0)) {
        let j = inertia_tensor(&xi, &SystemParams::default());
        prop_assert!((j - j.transpose()).abs().max() < 1e-14);
        prop_assert!(j.symmetric_eigenvalues().min() > 0.0);
    }

    #[test]
    fn coriolis_scales_quadratically(
        xi in attitude_strategy(1.0),
        rates in prop::array::uniform3(-2.0..2.0f64),
        a in 0.1..4.0f64,
    ) {
        let params = SystemParams::default();
        let xi_dot = Vec3::from_row_slice(&rates);
        let base = coriolis_term(&xi, &xi_dot, &params);
        let scaled = coriolis_term(&xi, &(xi_dot * a), &params);
        prop_assert!((scaled - base * a * a).abs().max() < 1e-10 * (1.0 + base.abs().max() * a * a));
    }

    #[test]
    fn wrench_round_trips_through_the_dynamics(
        xi in attitude_strategy(0.9),
        rates in prop::array::uniform3(-1.5..1.5f64),
        vel in prop::array::uniform3(-3.0..3.0f64),
        thrust in 0.0..70.0f64,
        tau in prop::array::uniform3(-3.0..3.0f64),
        force in prop::array::uniform3(-6.0..6.0f64),
        torque in prop::array::uniform3(-2.0..2.0f64),
    ) {
        let params = SystemParams::default();
        let state = SystemState {
            p: Vec3::zeros(),
            xi,
            p_dot: Vec3::from_row_slice(&vel),
            xi_dot: Vec3::from_row_slice(&rates),
            t: 0.0,
        };
        let u = Vec4::new(thrust, tau[0], tau[1], tau[2]);
        let t_ex = Wrench {
            f: Vec3::from_row_slice(&force),
            mu: Vec3::from_row_slice(&torque),
        };
        let acc = integrated_dynamics(&state, &params, &u, &t_ex).unwrap();
        let recovered = inverse_dynamics_wrench(&state, &params, &u, &acc);
        prop_assert!((recovered.to_vector() - t_ex.to_vector()).abs().max() < 1e-10);
    }

    #[test]
    fn allocation_satisfies_the_constraint_and_weight_scale_invariance(
        desired in prop::array::uniform4(-20.0..20.0f64),
        weights in prop::array::uniform8(0.2..5.0f64),
        scale in 0.5..10.0f64,
    ) {
        let mut config = AllocationConfig {
            d: weights,
            ..AllocationConfig::default()
        };
        let w = Vec4::from_row_slice(&desired);
        let gamma = build_gamma(&config).unwrap();
        let u1 = allocate(&w, &config).unwrap().u_q;
        prop_assert!((gamma * u1 - w).abs().max() < 1e-9);
        for d in config.d.iter_mut() {
            *d *= scale;
        }
        let u2 = allocate(&w, &config).unwrap().u_q;
        prop_assert!((u1 - u2).abs().max() < 1e-10);
        // The cost value itself scales linearly with the weights.
        let mut unscaled = config;
        for d in unscaled.d.iter_mut() {
            *d /= scale;
        }
        let cost_gap =
            (allocation_cost(&u1, &config) - scale * allocation_cost(&u1, &unscaled)).abs();
        prop_assert!(cost_gap < 1e-9 * (1.0 + allocation_cost(&u1, &config)));
    }

    #[test]
    fn wrench_vector_round_trip(values in prop::array::uniform6(-100.0..100.0f64)) {
        let v = Vec6::from_row_slice(&values);
        prop_assert_eq!(Wrench::from_vector(&v).to_vector(), v);
    }
}

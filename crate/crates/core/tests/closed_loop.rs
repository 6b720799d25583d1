//! Closed-loop integration tests: controller settling, oracle-vs-estimated
//! admittance, scenario boundedness, and ground-truth self-consistency.

use aerowrench_core::allocation::build_gamma;
use aerowrench_core::control::{tracking_control, DesiredPoint, ReferenceState};
use aerowrench_core::dynamics::{
    integrated_dynamics, inverse_dynamics_wrench, SystemState, Wrench,
};
use aerowrench_core::math::rk4_step;
use aerowrench_core::params::{Config, ObserverGains};
use aerowrench_core::scenario::{self};
use aerowrench_core::sim::{
    flags, run_scenario, run_scenario_with, AdmittanceSource, RunOptions, ATTITUDE_GUARD,
};
use aerowrench_core::{Vec3, Vec6};
use nalgebra::SVector;

fn plant_rhs(
    x: &SVector<f64, 12>,
    u: &aerowrench_core::Vec4,
    wrench: &Wrench,
    config: &Config,
) -> SVector<f64, 12> {
    let state = SystemState::from_generalized(
        &x.fixed_rows::<6>(0).into_owned(),
        &x.fixed_rows::<6>(6).into_owned(),
        0.0,
    );
    let acc = integrated_dynamics(&state, &config.system, u, wrench).unwrap();
    let mut dx = SVector::<f64, 12>::zeros();
    dx.fixed_rows_mut::<6>(0).copy_from(&x.fixed_rows::<6>(6));
    dx.fixed_rows_mut::<6>(6).copy_from(&acc);
    dx
}

#[test]
fn hover_recovery_from_half_meter_offset_settles_within_five_seconds() {
    let config = Config::default();
    let reference = ReferenceState::from_desired(&DesiredPoint::hover(Vec6::zeros()));
    let mut x = SVector::<f64, 12>::zeros();
    x[0] = 0.5;

    let dt_c = 0.01;
    let mut last_outside = 0.0;
    for n in 0..(10.0_f64 / dt_c) as usize {
        let t = n as f64 * dt_c;
        let state = SystemState::from_generalized(
            &x.fixed_rows::<6>(0).into_owned(),
            &x.fixed_rows::<6>(6).into_owned(),
            t,
        );
        if state.p.norm() > 0.01 {
            last_outside = t;
        }
        let cmd = tracking_control(&state, &reference, &config.system, &config.control);
        assert!(!cmd.thrust_clipped);
        for _ in 0..10 {
            x = rk4_step(
                |_, x| plant_rhs(x, &cmd.desired, &Wrench::zero(), &config),
                t,
                &x,
                1e-3,
            );
        }
    }
    // 2% of the initial 0.5 m offset is 0.01 m.
    assert!(
        last_outside < 5.0,
        "position settled only at t = {last_outside:.2} s"
    );
    assert!(x.fixed_rows::<6>(0).norm() < 0.01);
}

#[test]
fn estimated_loop_approaches_oracle_loop_as_gain_grows() {
    let spec = scenario::direction_reversal().noiseless();
    let mut diffs = Vec::new();
    for &k0 in &[0.39, 0.78, 1.56] {
        let config = Config {
            observer: ObserverGains {
                k0,
                ..ObserverGains::default()
            },
            ..Config::default()
        };
        let estimated = run_scenario_with(
            &spec,
            &config,
            &RunOptions {
                admittance_source: AdmittanceSource::Agno,
                ..RunOptions::default()
            },
        )
        .unwrap();
        let oracle = run_scenario_with(
            &spec,
            &config,
            &RunOptions {
                admittance_source: AdmittanceSource::TrueWrench,
                ..RunOptions::default()
            },
        )
        .unwrap();
        let diff = estimated
            .rows
            .iter()
            .zip(&oracle.rows)
            .map(|(a, b)| (a.eta.fixed_rows::<3>(0) - b.eta.fixed_rows::<3>(0)).norm())
            .fold(0.0f64, f64::max);
        diffs.push(diff);
    }
    assert!(
        diffs[0] > diffs[1] && diffs[1] > diffs[2],
        "trajectory gap not monotone in k0: {diffs:?}"
    );
}

#[test]
fn shipped_scenarios_stay_within_guard_and_thrust_limits() {
    let config = Config::default();
    for spec in scenario::reference_scenarios() {
        let log =
            run_scenario(&spec, &config).unwrap_or_else(|e| panic!("{} aborted: {e}", spec.name));
        for row in &log.rows {
            assert!(
                row.eta[3].abs() < ATTITUDE_GUARD && row.eta[4].abs() < ATTITUDE_GUARD,
                "{}: attitude excursion at t = {}",
                spec.name,
                row.t
            );
            assert_eq!(
                row.sat_flags
                    & (flags::THRUST_CLIPPED | flags::QUAD1_SATURATED | flags::QUAD2_SATURATED),
                0,
                "{}: saturation at t = {}",
                spec.name,
                row.t
            );
        }
    }
}

#[test]
fn logged_inputs_and_reintegrated_accelerations_recover_the_scripted_wrench() {
    // No leakage between truth and estimator paths: re-integrate the plant
    // open-loop from the logged inputs at a 10x finer step, differentiate the
    // velocities, and push through the inverse dynamics.
    let spec = scenario::smooth_motion().noiseless();
    let config = Config::default();
    let log = run_scenario(&spec, &config).unwrap();
    let gamma = build_gamma(&config.allocation_config()).unwrap();

    let dt = 1e-4;
    let sub = (spec.dt_control / dt).round() as usize;
    let mut x = SVector::<f64, 12>::zeros();
    let mut worst: f64 = 0.0;
    for (n, row) in log.rows.iter().enumerate().take(log.rows.len() - 1) {
        let u = gamma * row.u_q;
        let mut states = Vec::with_capacity(sub + 1);
        for k in 0..sub {
            let t = row.t + k as f64 * dt;
            states.push(x);
            x = rk4_step(
                |tt, x| {
                    let state = SystemState::from_generalized(
                        &x.fixed_rows::<6>(0).into_owned(),
                        &x.fixed_rows::<6>(6).into_owned(),
                        tt,
                    );
                    let w = Wrench::from_vector(&spec.wrench_at(tt));
                    let acc = integrated_dynamics(&state, &config.system, &u, &w).unwrap();
                    let mut dx = SVector::<f64, 12>::zeros();
                    dx.fixed_rows_mut::<6>(0).copy_from(&x.fixed_rows::<6>(6));
                    dx.fixed_rows_mut::<6>(6).copy_from(&acc);
                    dx
                },
                t,
                &x,
                dt,
            );
        }
        states.push(x);
        // Central difference at the period midpoint (input is constant there).
        if n % 10 == 0 {
            let mid = sub / 2;
            let t_mid = row.t + mid as f64 * dt;
            let eta_ddot = (states[mid + 1].fixed_rows::<6>(6)
                - states[mid - 1].fixed_rows::<6>(6))
                / (2.0 * dt);
            let state = SystemState::from_generalized(
                &states[mid].fixed_rows::<6>(0).into_owned(),
                &states[mid].fixed_rows::<6>(6).into_owned(),
                t_mid,
            );
            let recovered =
                inverse_dynamics_wrench(&state, &config.system, &u, &eta_ddot.into_owned());
            let err = (recovered.to_vector() - spec.wrench_at(t_mid)).abs().max();
            worst = worst.max(err);
        }
    }
    assert!(worst < 1e-6, "worst wrench recovery error {worst:.3e}");
    let _ = Vec3::zeros();
}

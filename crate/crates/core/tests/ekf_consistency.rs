//! Statistical consistency of the EKF baseline: 3-sigma convergence on a
//! near-hover run and Monte-Carlo NEES of the wrench block.

use aerowrench_core::allocation::build_gamma;
use aerowrench_core::control::{tracking_control, DesiredPoint, ReferenceState};
use aerowrench_core::dynamics::{integrated_dynamics, SystemState, Wrench};
use aerowrench_core::ekf::{ekf_predict, ekf_update, EkfState, NZ};
use aerowrench_core::math::rk4_step;
use aerowrench_core::params::Config;
use aerowrench_core::scenario::{self, SegmentShape, WrenchSegment};
use aerowrench_core::sim::run_scenario;
use aerowrench_core::{Vec4, Vec6};
use nalgebra::SVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[test]
fn wrench_estimate_converges_within_three_sigma_near_hover() {
    // Constant true wrench, small angles, default noise: the filter must
    // cover its own error with the reported covariance.
    let mut spec = scenario::zero_wrench();
    spec.name = "ekf-3sigma".into();
    spec.duration = 15.0;
    spec.noise = aerowrench_core::params::SensorNoise::default();
    spec.wrench_profile = vec![WrenchSegment {
        t_start: 1.0,
        t_end: 16.0,
        shape: SegmentShape::Step,
        axes: [true, false, true, false, false, false],
        amplitude: 1.5,
        frequency: None,
    }];
    let config = Config::default();
    let log = run_scenario(&spec, &config).unwrap();
    let gamma = build_gamma(&config.allocation_config()).unwrap();

    // Re-run the filter over the logged truth with fresh measurement noise so
    // the covariance is available.
    let mut rng = ChaCha8Rng::seed_from_u64(777);
    let mut ekf: Option<EkfState> = None;
    let mut u_prev = Vec4::new(config.system.m * config.system.g, 0.0, 0.0, 0.0);
    let s = &config.sensor_noise;
    let sigmas: [f64; 12] = [
        s.sigma_pos,
        s.sigma_pos,
        s.sigma_pos, //
        s.sigma_att,
        s.sigma_att,
        s.sigma_att, //
        s.sigma_vel,
        s.sigma_vel,
        s.sigma_vel, //
        s.sigma_rate,
        s.sigma_rate,
        s.sigma_rate,
    ];
    for row in &log.rows {
        let mut z = SVector::<f64, NZ>::zeros();
        z.fixed_rows_mut::<6>(0).copy_from(&row.eta);
        z.fixed_rows_mut::<6>(6).copy_from(&row.eta_dot);
        for i in 0..NZ {
            let n: f64 = StandardNormal.sample(&mut rng);
            z[i] += sigmas[i] * n;
        }
        ekf = Some(match ekf.take() {
            None => EkfState::new(&z, row.t),
            Some(prev) => {
                let pred = ekf_predict(&prev, &u_prev, &config.system, &config.ekf, 0.01).unwrap();
                ekf_update(&pred, &z, &config.ekf).unwrap().0
            }
        });
        u_prev = gamma * row.u_q;

        if row.t >= 8.0 {
            let filt = ekf.as_ref().unwrap();
            let err = filt.wrench().to_vector() - row.tex_true;
            let cov = filt.wrench_covariance();
            for c in 0..6 {
                let three_sigma = 3.0 * cov[(c, c)].sqrt();
                assert!(
                    err[c].abs() <= three_sigma,
                    "t = {}: channel {c} error {:.3} exceeds 3 sigma {:.3}",
                    row.t,
                    err[c],
                    three_sigma
                );
            }
        }
    }
}

#[test]
fn monte_carlo_nees_of_wrench_block_is_chi_square_consistent() {
    // Truth generated from the filter's own model class: wrench states follow
    // the random walk with the filter's PSD, and measurements carry the
    // filter's R. Mean NEES over 50 seeds at a post-convergence time must sit
    // inside the 95% chi-square band for 50 x 6 degrees of freedom:
    // [chi2_0.025(300), chi2_0.975(300)] / 50 = [5.078, 6.998]
    // (Wilson-Hilferty evaluation, frozen).
    const N_SEEDS: u64 = 50;
    const T_CHECK: f64 = 6.0;
    const DURATION: f64 = 9.0;
    let config = Config::default();
    let dt = 0.01;
    let gamma = build_gamma(&config.allocation_config()).unwrap();
    let desired = DesiredPoint::hover(Vec6::zeros());

    let mut nees_at_check = Vec::new();
    let mut nees_all = Vec::new();
    for seed in 0..N_SEEDS {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let mut truth = SystemState::hover(0.0);
        let mut wrench = Vec6::zeros();
        let reference = ReferenceState::from_desired(&desired);
        let mut ekf: Option<EkfState> = None;
        let mut u_prev = Vec4::new(config.system.m * config.system.g, 0.0, 0.0, 0.0);

        let n_ticks = (DURATION / dt).round() as usize;
        for n in 0..=n_ticks {
            let t = n as f64 * dt;
            // Measurement with the filter's noise model.
            let mut z = SVector::<f64, NZ>::zeros();
            z.fixed_rows_mut::<6>(0).copy_from(&truth.eta());
            z.fixed_rows_mut::<6>(6).copy_from(&truth.eta_dot());
            for i in 0..NZ {
                let noise: f64 = StandardNormal.sample(&mut rng);
                z[i] += config.ekf.r_meas[i].sqrt() * noise;
            }
            ekf = Some(match ekf.take() {
                None => EkfState::new(&z, t),
                Some(prev) => {
                    let pred =
                        ekf_predict(&prev, &u_prev, &config.system, &config.ekf, dt).unwrap();
                    ekf_update(&pred, &z, &config.ekf).unwrap().0
                }
            });
            let filt = ekf.as_ref().unwrap();

            if (t - T_CHECK).abs() < 1e-9 || t >= 4.0 {
                let e = filt.wrench().to_vector() - wrench;
                let p_inv = filt.wrench_covariance().try_inverse().unwrap();
                let nees = (e.transpose() * p_inv * e)[0];
                if (t - T_CHECK).abs() < 1e-9 {
                    nees_at_check.push(nees);
                }
                if t >= 4.0 {
                    nees_all.push(nees);
                }
            }

            // Control on the measured state, plant propagation, wrench walk.
            let meas = SystemState::from_generalized(
                &z.fixed_rows::<6>(0).into_owned(),
                &z.fixed_rows::<6>(6).into_owned(),
                t,
            );
            let cmd = tracking_control(&meas, &reference, &config.system, &config.control);
            let quad =
                aerowrench_core::allocation::allocate(&cmd.desired, &config.allocation_config())
                    .unwrap();
            let u = gamma * quad.u_q;
            u_prev = u;

            let w = Wrench::from_vector(&wrench);
            let mut x = SVector::<f64, 12>::zeros();
            x.fixed_rows_mut::<6>(0).copy_from(&truth.eta());
            x.fixed_rows_mut::<6>(6).copy_from(&truth.eta_dot());
            for k in 0..10 {
                x = rk4_step(
                    |_, x: &SVector<f64, 12>| {
                        let state = SystemState::from_generalized(
                            &x.fixed_rows::<6>(0).into_owned(),
                            &x.fixed_rows::<6>(6).into_owned(),
                            0.0,
                        );
                        let acc = integrated_dynamics(&state, &config.system, &u, &w).unwrap();
                        let mut dx = SVector::<f64, 12>::zeros();
                        dx.fixed_rows_mut::<6>(0).copy_from(&x.fixed_rows::<6>(6));
                        dx.fixed_rows_mut::<6>(6).copy_from(&acc);
                        dx
                    },
                    t + k as f64 * 1e-3,
                    &x,
                    1e-3,
                );
            }
            // Truth drawn from the filter's model class: white acceleration
            // noise through the kinematic chain (exact discrete double-
            // integrator covariance) plus the wrench random walk.
            for c in 0..6 {
                let q = config.ekf.q_eta_dd[c];
                let n1: f64 = StandardNormal.sample(&mut rng);
                let n2: f64 = StandardNormal.sample(&mut rng);
                x[6 + c] += (q * dt).sqrt() * n1;
                x[c] += (q * dt.powi(3)).sqrt() * (0.5 * n1 + n2 / (2.0 * 3.0f64.sqrt()));
            }
            truth = SystemState::from_generalized(
                &x.fixed_rows::<6>(0).into_owned(),
                &x.fixed_rows::<6>(6).into_owned(),
                t + dt,
            );
            // Random-walk wrench increment matching the filter's PSD.
            for c in 0..6 {
                let noise: f64 = StandardNormal.sample(&mut rng);
                wrench[c] += (config.ekf.q_wrench[c] * dt).sqrt() * noise;
            }
        }
    }

    let mean_check: f64 = nees_at_check.iter().sum::<f64>() / nees_at_check.len() as f64;
    assert_eq!(nees_at_check.len(), N_SEEDS as usize);
    assert!(
        (5.078..=6.998).contains(&mean_check),
        "mean NEES at t = {T_CHECK}: {mean_check:.3} outside 95% band [5.078, 6.998]"
    );
    // Coarse secondary check: the time-averaged NEES stays in a generous
    // band (samples are time-correlated, so only gross inconsistency trips).
    let mean_all: f64 = nees_all.iter().sum::<f64>() / nees_all.len() as f64;
    assert!(
        (4.5..=7.5).contains(&mean_all),
        "time-averaged NEES {mean_all:.3}"
    );
}

//! Control allocation: distributing a desired total thrust/torque
//! `[T_des, tau_des]` to the two quadrotors' inputs
//! `u_q = [T_q1, tau_11, tau_12, tau_13, T_q2, tau_21, tau_22, tau_23]`.
//!
//! The map `[T; tau] = Gamma u_q` is underdetermined (4 equations, 8
//! unknowns); the shipped solution is the weighted minimum-norm one,
//!
//! ```text
//! u* = O^-2 Gamma^T (Gamma O^-2 Gamma^T)^-1 [T_des; tau_des],
//! ```
//!
//! which minimizes the quadratic cost `J = |O u_q|^2` with
//! `O = sqrt(diag(d))` among all inputs satisfying the constraint exactly.
//! Saturation is reported, never re-solved: scenarios are designed to stay
//! within the per-UAV thrust limit, and the flags make violations visible.

// Provides the float math methods when building without std.
#[allow(unused_imports)]
use num_traits::Float;

use crate::params::AllocationConfig;
use crate::{Error, Mat4x8, Result, Vec4, Vec8};

/// Result of one allocation solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadInputs {
    /// Stacked inputs `[T_q1, tau_11, tau_12, tau_13, T_q2, tau_21, tau_22, tau_23]`.
    pub u_q: Vec8,
    /// Per-quadrotor flag: thrust left `[0, T_max]`.
    pub saturated: [bool; 2],
}

impl QuadInputs {
    /// Thrust of quadrotor `j` (0 or 1) [N].
    pub fn thrust(&self, j: usize) -> f64 {
        self.u_q[4 * j]
    }

    /// Torque vector of quadrotor `j` [N m].
    pub fn tau(&self, j: usize) -> crate::Vec3 {
        crate::Vec3::new(
            self.u_q[4 * j + 1],
            self.u_q[4 * j + 2],
            self.u_q[4 * j + 3],
        )
    }

    /// True if either quadrotor saturates.
    pub fn any_saturated(&self) -> bool {
        self.saturated[0] || self.saturated[1]
    }
}

/// Builds the 4x8 allocation matrix
///
/// ```text
/// [ 1       0  0  0   1       0  0  0 ]
/// [ s1(2)   1  0  0   s2(2)   1  0  0 ]
/// [ -s1(1)  0  1  0   -s2(1)  0  1  0 ]
/// [ 0       0  0  1   0       0  0  1 ]
/// ```
///
/// where `s_j(1), s_j(2)` are the x and y components of the mount offsets.
pub fn build_gamma(config: &AllocationConfig) -> Result<Mat4x8> {
    let gamma = Mat4x8::from_row_slice(&[
        1.0,
        0.0,
        0.0,
        0.0,
        1.0,
        0.0,
        0.0,
        0.0, //
        config.s1.y,
        1.0,
        0.0,
        0.0,
        config.s2.y,
        1.0,
        0.0,
        0.0, //
        -config.s1.x,
        0.0,
        1.0,
        0.0,
        -config.s2.x,
        0.0,
        1.0,
        0.0, //
        0.0,
        0.0,
        0.0,
        1.0,
        0.0,
        0.0,
        0.0,
        1.0,
    ]);
    let eig = (gamma * gamma.transpose()).symmetric_eigenvalues();
    let rank = eig.iter().filter(|&&l| l.abs() > 1e-12).count();
    if rank < 4 {
        return Err(Error::RankDeficientAllocation { rank });
    }
    Ok(gamma)
}

/// Weighted minimum-norm allocation of a desired `[T_des; tau_des]`.
///
/// Solves `(Gamma O^-2 Gamma^T) x = desired` by Cholesky factorization with a
/// condition-number check, then maps back through `u = O^-2 Gamma^T x`.
pub fn allocate(desired: &Vec4, config: &AllocationConfig) -> Result<QuadInputs> {
    config.validate()?;
    let gamma = build_gamma(config)?;

    let mut o_inv2 = nalgebra::SMatrix::<f64, 8, 8>::zeros();
    for i in 0..8 {
        o_inv2[(i, i)] = 1.0 / config.d[i];
    }
    let normal = gamma * o_inv2 * gamma.transpose();
    let eig = normal.symmetric_eigenvalues();
    let cond = {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for i in 0..4 {
            lo = lo.min(eig[i].abs());
            hi = hi.max(eig[i].abs());
        }
        if lo == 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    };
    if cond > 1e10 {
        return Err(Error::IllConditionedAllocation { cond });
    }
    let chol = normal
        .cholesky()
        .ok_or(Error::IllConditionedAllocation { cond })?;
    let x = chol.solve(desired);
    let u_q = o_inv2 * gamma.transpose() * x;

    let in_range = |t: f64| (0.0..=config.t_max).contains(&t);
    Ok(QuadInputs {
        u_q,
        saturated: [!in_range(u_q[0]), !in_range(u_q[4])],
    })
}

/// Quadratic allocation cost
/// `J = sum_j d_j1 T_qj^2 + d_j2 tau_j1^2 + d_j3 tau_j2^2 + d_j4 tau_j3^2`,
/// identical to `|O u_q|^2`.
pub fn allocation_cost(u_q: &Vec8, config: &AllocationConfig) -> f64 {
    let mut cost = 0.0;
    for i in 0..8 {
        cost += config.d[i] * u_q[i] * u_q[i];
    }
    cost
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Vec3;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn default_config() -> AllocationConfig {
        AllocationConfig::default()
    }

    fn random_desired(rng: &mut ChaCha8Rng) -> Vec4 {
        Vec4::new(
            rng.random_range(-40.0..40.0),
            rng.random_range(-10.0..10.0),
            rng.random_range(-10.0..10.0),
            rng.random_range(-10.0..10.0),
        )
    }

    /// Independent equality-constrained least-squares oracle: solves the KKT
    /// system `[2 diag(d), Gamma^T; Gamma, 0] [u; lambda] = [0; w]` densely.
    fn kkt_oracle(desired: &Vec4, config: &AllocationConfig) -> Vec8 {
        let gamma = build_gamma(config).unwrap();
        let mut kkt = DMatrix::<f64>::zeros(12, 12);
        for i in 0..8 {
            kkt[(i, i)] = 2.0 * config.d[i];
        }
        for r in 0..4 {
            for c in 0..8 {
                kkt[(8 + r, c)] = gamma[(r, c)];
                kkt[(c, 8 + r)] = gamma[(r, c)];
            }
        }
        let mut rhs = DVector::<f64>::zeros(12);
        for r in 0..4 {
            rhs[8 + r] = desired[r];
        }
        let sol = kkt.lu().solve(&rhs).expect("KKT system solvable");
        Vec8::from_iterator(sol.iter().take(8).copied())
    }

    #[test]
    fn gamma_layout_matches_mount_geometry() {
        let config = default_config();
        let gamma = build_gamma(&config).unwrap();
        let row2: [f64; 8] = core::array::from_fn(|c| gamma[(1, c)]);
        assert_eq!(row2, [1.0, 1.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0]);
        // Twelve structurally nonzero entries for generic offsets.
        let generic = AllocationConfig {
            s1: Vec3::new(0.3, 1.0, 0.1),
            s2: Vec3::new(-0.2, -0.9, 0.05),
            ..default_config()
        };
        let gamma = build_gamma(&generic).unwrap();
        let nonzero = gamma.iter().filter(|&&v| v != 0.0).count();
        assert_eq!(nonzero, 12);
    }

    #[test]
    fn gamma_with_zero_offsets_passes_torques_through() {
        let config = AllocationConfig {
            s1: Vec3::zeros(),
            s2: Vec3::zeros(),
            ..default_config()
        };
        let gamma = build_gamma(&config).unwrap();
        for r in 1..3 {
            assert_eq!(gamma[(r, 0)], 0.0);
            assert_eq!(gamma[(r, 4)], 0.0);
        }
        let inputs = allocate(&Vec4::new(0.0, 2.0, -1.0, 0.5), &config).unwrap();
        assert_abs_diff_eq!(inputs.tau(0), Vec3::new(1.0, -0.5, 0.25), epsilon = 1e-12);
        assert_abs_diff_eq!(inputs.tau(1), Vec3::new(1.0, -0.5, 0.25), epsilon = 1e-12);
    }

    #[test]
    fn symmetric_hover_splits_thrust_in_half() {
        let inputs = allocate(&Vec4::new(38.259, 0.0, 0.0, 0.0), &default_config()).unwrap();
        assert_relative_eq!(inputs.thrust(0), 19.1295, epsilon = 1e-12);
        assert_relative_eq!(inputs.thrust(1), 19.1295, epsilon = 1e-12);
        assert_relative_eq!(inputs.tau(0).norm(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(inputs.tau(1).norm(), 0.0, epsilon = 1e-12);
        assert!(!inputs.any_saturated());
    }

    #[test]
    fn zero_demand_yields_zero_inputs() {
        let inputs = allocate(&Vec4::zeros(), &default_config()).unwrap();
        assert_relative_eq!(inputs.u_q.norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn constraint_satisfied_for_random_demands() {
        let config = default_config();
        let gamma = build_gamma(&config).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let desired = random_desired(&mut rng);
            let inputs = allocate(&desired, &config).unwrap();
            assert_abs_diff_eq!(gamma * inputs.u_q, desired, epsilon = 1e-9);
        }
    }

    #[test]
    fn matches_kkt_oracle_with_random_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let mut config = default_config();
            for w in config.d.iter_mut() {
                *w = rng.random_range(0.2..5.0);
            }
            let desired = random_desired(&mut rng);
            let inputs = allocate(&desired, &config).unwrap();
            assert_abs_diff_eq!(inputs.u_q, kkt_oracle(&desired, &config), epsilon = 1e-8);
        }
    }

    #[test]
    fn null_space_perturbations_do_not_reduce_cost() {
        let config = default_config();
        let gamma = build_gamma(&config).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        // Orthogonal projector onto the null space of Gamma (unweighted
        // pseudoinverse, independent of the weighted solve path).
        let proj = nalgebra::SMatrix::<f64, 8, 8>::identity()
            - gamma.transpose() * (gamma * gamma.transpose()).try_inverse().unwrap() * gamma;
        for _ in 0..200 {
            let desired = random_desired(&mut rng);
            let u_star = allocate(&desired, &config).unwrap().u_q;
            let base = allocation_cost(&u_star, &config);
            let v = Vec8::from_fn(|_, _| rng.random_range(-1.0..1.0));
            let delta = proj * v;
            assert_abs_diff_eq!(gamma * delta, Vec4::zeros(), epsilon = 1e-10);
            let perturbed = allocation_cost(&(u_star + delta), &config);
            assert!(perturbed >= base - 1e-12);
        }
    }

    #[test]
    fn argmin_is_invariant_to_common_weight_scaling() {
        let mut config = default_config();
        config.d = [1.0, 2.0, 0.5, 3.0, 1.5, 0.8, 2.5, 1.1];
        let desired = Vec4::new(25.0, 1.0, -2.0, 0.5);
        let u1 = allocate(&desired, &config).unwrap().u_q;
        for w in config.d.iter_mut() {
            *w *= 7.3;
        }
        let u2 = allocate(&desired, &config).unwrap().u_q;
        assert_abs_diff_eq!(u1, u2, epsilon = 1e-10);
    }

    #[test]
    fn cost_identities() {
        let config = AllocationConfig {
            d: [1.0; 8],
            ..default_config()
        };
        assert_eq!(allocation_cost(&Vec8::zeros(), &config), 0.0);
        assert_relative_eq!(allocation_cost(&Vec8::repeat(1.0), &config), 8.0);
        // |O u|^2 with O = sqrt(diag(d)).
        let mut weighted = default_config();
        weighted.d = [0.5, 1.5, 2.0, 0.25, 3.0, 1.0, 0.75, 4.0];
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..50 {
            let u = Vec8::from_fn(|_, _| rng.random_range(-3.0..3.0));
            let mut expected = 0.0;
            for i in 0..8 {
                expected += (weighted.d[i].sqrt() * u[i]).powi(2);
            }
            assert_relative_eq!(allocation_cost(&u, &weighted), expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn saturation_is_reported_not_resolved() {
        let config = default_config();
        let desired = Vec4::new(100.0, 0.0, 0.0, 0.0);
        let inputs = allocate(&desired, &config).unwrap();
        assert!(inputs.saturated[0] && inputs.saturated[1]);
        assert_relative_eq!(inputs.thrust(0), 50.0, epsilon = 1e-9);
    }

    #[test]
    fn nonpositive_weights_are_rejected() {
        let mut config = default_config();
        config.d[3] = 0.0;
        assert!(matches!(
            allocate(&Vec4::zeros(), &config),
            Err(Error::InvalidParams(_))
        ));
    }
}

//! Small numerical helpers shared across the crate.

use nalgebra::SVector;

use crate::{Mat3, Vec3};

/// One classical fourth-order Runge-Kutta step of `x' = f(t, x)`.
pub fn rk4_step<const N: usize>(
    mut f: impl FnMut(f64, &SVector<f64, N>) -> SVector<f64, N>,
    t: f64,
    x: &SVector<f64, N>,
    dt: f64,
) -> SVector<f64, N> {
    let k1 = f(t, x);
    let k2 = f(t + 0.5 * dt, &(x + k1 * (0.5 * dt)));
    let k3 = f(t + 0.5 * dt, &(x + k2 * (0.5 * dt)));
    let k4 = f(t + dt, &(x + k3 * dt));
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

/// Fallible variant of [`rk4_step`] for right-hand sides that can reject a
/// state (singular inertia, attitude guard).
pub fn try_rk4_step<const N: usize, E>(
    mut f: impl FnMut(f64, &SVector<f64, N>) -> core::result::Result<SVector<f64, N>, E>,
    t: f64,
    x: &SVector<f64, N>,
    dt: f64,
) -> core::result::Result<SVector<f64, N>, E> {
    let k1 = f(t, x)?;
    let k2 = f(t + 0.5 * dt, &(x + k1 * (0.5 * dt)))?;
    let k3 = f(t + 0.5 * dt, &(x + k2 * (0.5 * dt)))?;
    let k4 = f(t + dt, &(x + k3 * dt))?;
    Ok(x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0))
}

/// Skew-symmetric cross-product matrix `[v]x` with `[v]x w = v x w`.
pub fn skew(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Spectral (2-norm) condition number of a symmetric matrix from its
/// eigenvalues; returns `f64::INFINITY` if the smallest magnitude vanishes.
pub fn symmetric_cond(eigenvalues: &Vec3) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for i in 0..3 {
        let a = eigenvalues[i].abs();
        lo = lo.min(a);
        hi = hi.max(a);
    }
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rk4_integrates_linear_decay_to_fourth_order() {
        // x' = -x, exact solution e^{-t}.
        let mut x = SVector::<f64, 1>::new(1.0);
        let dt = 0.01;
        for i in 0..100 {
            x = rk4_step(|_, x| -x, i as f64 * dt, &x, dt);
        }
        assert_relative_eq!(x[0], (-1.0f64).exp(), epsilon = 1e-10);
    }

    #[test]
    fn skew_matches_cross_product() {
        let v = Vec3::new(1.0, -2.0, 3.0);
        let w = Vec3::new(0.5, 0.25, -1.0);
        assert_relative_eq!((skew(&v) * w - v.cross(&w)).norm(), 0.0, epsilon = 1e-15);
    }
}

use alloc::string::String;

/// Errors surfaced by the dynamics, estimation, and simulation layers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    /// Euler-rate map is singular and cannot be inverted.
    #[error("euler-rate map is singular (|det| = {det:.3e} < 1e-8)")]
    SingularEulerRateMap {
        /// Determinant at the offending attitude.
        det: f64,
    },
    /// Attitude-dependent inertia tensor is too ill-conditioned to invert.
    #[error("inertia tensor ill-conditioned (cond = {cond:.3e} > 1e8)")]
    IllConditionedInertia {
        /// Estimated 2-norm condition number.
        cond: f64,
    },
    /// Inertia matrix of the compact dynamics could not be inverted.
    #[error("generalized inertia matrix is singular")]
    SingularInertia,
    /// Allocation matrix lost row rank.
    #[error("allocation matrix is rank deficient (rank {rank} < 4)")]
    RankDeficientAllocation {
        /// Numerical row rank found.
        rank: usize,
    },
    /// Normal equations of the weighted allocation are near-singular.
    #[error("allocation normal equations ill-conditioned (cond = {cond:.3e} > 1e10)")]
    IllConditionedAllocation {
        /// Estimated 2-norm condition number.
        cond: f64,
    },
    /// Parameter set violates a documented invariant.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    /// Scenario definition violates a documented invariant.
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    /// A step or run produced a non-finite quantity.
    #[error("non-finite value encountered at t = {t:.4} s ({context})")]
    NonFinite {
        /// Simulation time of the failure.
        t: f64,
        /// What was being computed.
        context: &'static str,
    },
    /// Simulated attitude left the small-angle validity region.
    #[error("attitude guard tripped at t = {t:.4} s (|phi| = {phi:.3} rad, |theta| = {theta:.3} rad >= {limit:.3} rad)")]
    AttitudeGuard {
        /// Simulation time of the abort.
        t: f64,
        /// Roll magnitude at abort.
        phi: f64,
        /// Pitch magnitude at abort.
        theta: f64,
        /// Configured guard limit.
        limit: f64,
    },
    /// Step size must be strictly positive.
    #[error("non-positive step size dt = {dt}")]
    NonPositiveDt {
        /// Offending step size.
        dt: f64,
    },
    /// Filter covariance diverged.
    #[error("EKF covariance blow-up (trace = {trace:.3e} > 1e9)")]
    CovarianceBlowUp {
        /// Covariance trace at failure.
        trace: f64,
    },
    /// Innovation covariance could not be inverted.
    #[error("EKF innovation covariance is singular")]
    SingularInnovation,
    /// Metrics requested over an empty time window.
    #[error("metrics window is empty (t_skip = {t_skip} s, log ends at {t_end} s)")]
    EmptyMetricsWindow {
        /// Transient skip requested.
        t_skip: f64,
        /// Last timestamp in the log.
        t_end: f64,
    },
}

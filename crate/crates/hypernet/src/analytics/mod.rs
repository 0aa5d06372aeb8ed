//! Mean-field analytics: the characteristic equation and its solution, the
//! expected hyperdegree trajectory, the stationary hyperdegree
//! distribution, and empirical estimators for comparing simulation against
//! theory.
//!
//! The characteristic value `theta` solves the self-consistency equation
//!
//! ```text
//! theta = 2 (m + a) * int_0^1 ((1+u)/(1-u))^c du,   c = m*m2 / (theta*m1)
//! ```
//!
//! which requires `c < 1` for the integral to exist. The distribution
//! exponent is `g = 1/c`; the stationary distribution's tail then decays
//! as `k^-(g+1)`. All derivations assume aging exponent 1/2; callers gate
//! theory output on that value.

mod empirical;
pub mod quadrature;

use serde::Serialize;
use thiserror::Error;

use crate::stochastic::AttractivenessSpec;

pub use empirical::{
    fit_tail, ks_distance, EmpiricalDistribution, LogBin, TailFit, TailModel,
};

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticsError {
    #[error("aging-kernel integral diverges for exponent c = {c} >= 1")]
    DivergentIntegral { c: f64 },
    #[error("quadrature failed to converge: error {error} after {segments} segments")]
    QuadratureFailed { error: f64, segments: usize },
    #[error("characteristic-equation solver failed: {0}")]
    SolverFailed(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

/// Derived analytic quantities for one parameter set.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TheoryParams {
    pub m: u32,
    pub m2: u32,
    /// Mean batch size.
    pub m1: f64,
    /// Mean attractiveness.
    pub a: f64,
    /// Characteristic value (positive root of the self-consistency
    /// equation).
    pub theta: f64,
    /// Distribution exponent `m1 * theta / (m * m2)`; the pdf tail decays
    /// as `k^-(g+1)`.
    pub g: f64,
    /// Trajectory exponent `1/g`; convergence requires `c < 1`.
    pub c: f64,
}

const QUAD_ABS_TOL: f64 = 1e-12;
const QUAD_REL_TOL: f64 = 1e-10;

/// `int_0^1 ((1+u)/(1-u))^c du` for `0 <= c < 1`, via the substitution
/// `u = 1 - v^2` that tames the endpoint singularity:
/// `int_0^1 2 v^(1-2c) (2 - v^2)^c dv`.
pub fn aging_kernel_integral(c: f64) -> Result<f64, AnalyticsError> {
    if !(c < 1.0) {
        return Err(AnalyticsError::DivergentIntegral { c });
    }
    if !(c >= 0.0) {
        return Err(AnalyticsError::InvalidArgument(format!(
            "kernel exponent must be nonnegative, got {c}"
        )));
    }
    if c == 0.0 {
        return Ok(1.0);
    }
    quadrature::integrate(
        |v| 2.0 * v.powf(1.0 - 2.0 * c) * (2.0 - v * v).powf(c),
        0.0,
        1.0,
        QUAD_ABS_TOL,
        QUAD_REL_TOL,
    )
}

/// Right-hand side of the self-consistency equation at a trial `theta`:
/// `2 (m + a) * int_0^1 ((1+u)/(1-u))^c du` with `c = m*m2/(theta*m1)`.
pub fn selfconsistency_rhs(
    theta: f64,
    m: u32,
    m2: u32,
    m1: f64,
    a: f64,
) -> Result<f64, AnalyticsError> {
    let c = f64::from(m) * f64::from(m2) / (theta * m1);
    let kernel = aging_kernel_integral(c)?;
    Ok(2.0 * (f64::from(m) + a) * kernel)
}

/// Residual of an alternative algebraic form of the characteristic
/// equation, `int_0^1 ((1+x)/(1-x))^c x dx - m*m2/(2 m1 (m+a)) - 1/2`,
/// evaluated for diagnostics. The identity
/// `int ((1+x)/(1-x))^c x dx = c * int ((1+x)/(1-x))^c dx + 1/2` makes
/// this form vanish exactly at the root of the reduced self-consistency
/// equation, so it serves as an independent algebraic route onto the same
/// solution.
pub fn characteristic_residual_variant(
    theta: f64,
    m: u32,
    m2: u32,
    m1: f64,
    a: f64,
) -> Result<f64, AnalyticsError> {
    let c = f64::from(m) * f64::from(m2) / (theta * m1);
    if !(c < 1.0) {
        return Err(AnalyticsError::DivergentIntegral { c });
    }
    let integral = quadrature::integrate(
        |v| 2.0 * v.powf(1.0 - 2.0 * c) * (2.0 - v * v).powf(c) * (1.0 - v * v),
        0.0,
        1.0,
        QUAD_ABS_TOL,
        QUAD_REL_TOL,
    )?;
    Ok(integral - f64::from(m) * f64::from(m2) / (2.0 * m1 * (f64::from(m) + a)) - 0.5)
}

/// Solve the characteristic equation for `theta`.
///
/// The left side grows linearly while the right side is strictly
/// decreasing in `theta` (larger `theta` means smaller `c`), so the
/// positive root is unique. Bisection runs inside the bracket
/// `(m*m2/m1, hi]`, where `hi` doubles until the residual changes sign,
/// until both the relative width reaches `tol` and the fixed-point
/// residual drops below `1e-10 * max(1, theta)`.
pub fn solve_theta(
    m: u32,
    m2: u32,
    m1: f64,
    a: f64,
    tol: f64,
) -> Result<TheoryParams, AnalyticsError> {
    if !(m1 > 0.0) {
        return Err(AnalyticsError::InvalidArgument(format!(
            "mean batch size must be positive, got {m1}"
        )));
    }
    if !(a >= 0.0) {
        return Err(AnalyticsError::InvalidArgument(format!(
            "mean attractiveness must be nonnegative, got {a}"
        )));
    }
    if m == 0 || m2 == 0 {
        return Err(AnalyticsError::InvalidArgument(
            "m and m2 must be at least 1".into(),
        ));
    }
    let theta_min = f64::from(m) * f64::from(m2) / m1;
    let residual = |theta: f64| -> Result<f64, AnalyticsError> {
        Ok(theta - selfconsistency_rhs(theta, m, m2, m1, a)?)
    };

    // lower bracket: walk toward theta_min until the residual goes negative
    let mut lo = f64::NAN;
    let mut shrink = 0.5;
    for _ in 0..48 {
        let cand = theta_min * (1.0 + shrink);
        if residual(cand)? < 0.0 {
            lo = cand;
            break;
        }
        shrink *= 0.5;
    }
    if lo.is_nan() {
        return Err(AnalyticsError::SolverFailed(
            "no sign change near the lower bracket".into(),
        ));
    }
    // upper bracket: double until the residual is positive
    let mut hi = (theta_min * 2.0).max(2.0 * (f64::from(m) + a)) + 1.0;
    let mut expansions = 0;
    while residual(hi)? < 0.0 {
        hi *= 2.0;
        expansions += 1;
        if expansions > 200 {
            return Err(AnalyticsError::SolverFailed(
                "upper bracket expansion did not find a sign change".into(),
            ));
        }
    }
    if hi < lo {
        hi = lo * 2.0;
    }

    let mut mid = 0.5 * (lo + hi);
    for iter in 0..300 {
        mid = 0.5 * (lo + hi);
        let r = residual(mid)?;
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        let width_ok = (hi - lo) / mid.abs() < tol;
        let residual_ok = r.abs() < 1e-10 * mid.abs().max(1.0);
        if width_ok && residual_ok {
            break;
        }
        if iter == 299 {
            return Err(AnalyticsError::SolverFailed(format!(
                "no convergence: width {} residual {r}",
                hi - lo
            )));
        }
    }
    let theta = mid;
    let g = m1 * theta / (f64::from(m) * f64::from(m2));
    let c = 1.0 / g;
    Ok(TheoryParams {
        m,
        m2,
        m1,
        a,
        theta,
        g,
        c,
    })
}

/// Expected hyperdegree at time `t` of a node that arrived at `t_i` with
/// attractiveness `y`:
/// `(m + y) * ((1 + s)/(1 - s))^c - y` with `s = sqrt(1 - t_i/t)`.
/// Computed as `((1+s)^2 / (t_i/t))^c` to stay stable as `t_i/t -> 0`.
pub fn trajectory_k(t_i: f64, t: f64, y: f64, params: &TheoryParams) -> Result<f64, AnalyticsError> {
    if !(t_i > 0.0) {
        return Err(AnalyticsError::InvalidArgument(format!(
            "arrival time must be positive and finite, got {t_i}"
        )));
    }
    if t_i > t {
        return Err(AnalyticsError::InvalidArgument(format!(
            "arrival time {t_i} exceeds observation time {t}"
        )));
    }
    let x = t_i / t;
    let s = (1.0 - x).sqrt();
    let ratio = (1.0 + s) * (1.0 + s) / x;
    let my = f64::from(params.m) + y;
    Ok(my * ratio.powf(params.c) - y)
}

/// Stationary complementary distribution for one attractiveness value:
/// `P(K >= k) = 4AB / (A + B)^2` with `A = (m+y)^g`, `B = (k+y)^g`,
/// evaluated through the overflow-free ratio `t = (A/B) <= 1`.
pub fn theoretical_ccdf(k: f64, y: f64, params: &TheoryParams) -> Result<f64, AnalyticsError> {
    let m = f64::from(params.m);
    if k < m {
        return Err(AnalyticsError::InvalidArgument(format!(
            "hyperdegree {k} below minimum {m}"
        )));
    }
    let t = ((m + y) / (k + y)).powf(params.g);
    let denom = 1.0 + t;
    Ok(4.0 * t / (denom * denom))
}

/// Stationary density for one attractiveness value; the negated derivative
/// of [`theoretical_ccdf`] in `k`:
/// `4 g t (1 - t) / ((k + y)(1 + t)^3)` with `t = ((m+y)/(k+y))^g`.
pub fn theoretical_pk_point(k: f64, y: f64, params: &TheoryParams) -> Result<f64, AnalyticsError> {
    let m = f64::from(params.m);
    if k < m {
        return Err(AnalyticsError::InvalidArgument(format!(
            "hyperdegree {k} below minimum {m}"
        )));
    }
    let t = ((m + y) / (k + y)).powf(params.g);
    let denom = 1.0 + t;
    Ok(4.0 * params.g * t * (1.0 - t) / ((k + y) * denom * denom * denom))
}

/// Average `f(y)` over the attractiveness law (exact for a point mass,
/// quadrature otherwise; the exponential law is truncated where the
/// remaining mass is below 1e-16).
fn mix_over_attractiveness<F: Fn(f64) -> Result<f64, AnalyticsError>>(
    spec: &AttractivenessSpec,
    f: F,
) -> Result<f64, AnalyticsError> {
    match spec {
        AttractivenessSpec::Constant { y } => f(*y),
        AttractivenessSpec::Uniform { lo, hi } => {
            let density = 1.0 / (hi - lo);
            quad_checked(|y| f(y).map(|v| v * density), *lo, *hi)
        }
        AttractivenessSpec::Exponential { rate } => {
            let cutoff = 37.0 / rate;
            quad_checked(|y| f(y).map(|v| v * rate * (-rate * y).exp()), 0.0, cutoff)
        }
        AttractivenessSpec::TablePdf { breaks, densities } => {
            let mut total = 0.0;
            for (w, &d) in breaks.windows(2).zip(densities) {
                if d > 0.0 {
                    total += quad_checked(|y| f(y).map(|v| v * d), w[0], w[1])?;
                }
            }
            Ok(total)
        }
    }
}

/// Quadrature over a fallible integrand: the first inner error aborts.
fn quad_checked<F: Fn(f64) -> Result<f64, AnalyticsError>>(
    f: F,
    a: f64,
    b: f64,
) -> Result<f64, AnalyticsError> {
    use std::cell::RefCell;
    let failure: RefCell<Option<AnalyticsError>> = RefCell::new(None);
    let value = quadrature::integrate(
        |y| match f(y) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        a,
        b,
        QUAD_ABS_TOL,
        QUAD_REL_TOL,
    )?;
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// Stationary density averaged over the attractiveness law.
pub fn theoretical_pk(
    k: f64,
    params: &TheoryParams,
    spec: &AttractivenessSpec,
) -> Result<f64, AnalyticsError> {
    mix_over_attractiveness(spec, |y| theoretical_pk_point(k, y, params))
}

/// Stationary complementary distribution averaged over the attractiveness
/// law.
pub fn theoretical_ccdf_mixture(
    k: f64,
    params: &TheoryParams,
    spec: &AttractivenessSpec,
) -> Result<f64, AnalyticsError> {
    mix_over_attractiveness(spec, |y| theoretical_ccdf(k, y, params))
}

/// Cross-check that the density is the negated `k`-derivative of the
/// complementary distribution: central finite difference (one-sided at the
/// `k = m` boundary) of the mixed ccdf against `-theoretical_pk`, with the
/// difference taken inside the attractiveness average so quadrature error
/// stays relative to the derivative itself. Returns the largest relative
/// deviation over the grid.
pub fn pk_ccdf_consistency_check(
    params: &TheoryParams,
    spec: &AttractivenessSpec,
    grid: &[f64],
    h: f64,
) -> Result<f64, AnalyticsError> {
    let m = f64::from(params.m);
    let mut worst: f64 = 0.0;
    for &k in grid {
        let fd = if k - h >= m {
            mix_over_attractiveness(spec, |y| {
                let hi = theoretical_ccdf(k + h, y, params)?;
                let lo = theoretical_ccdf(k - h, y, params)?;
                Ok((hi - lo) / (2.0 * h))
            })?
        } else {
            mix_over_attractiveness(spec, |y| {
                let hi = theoretical_ccdf(k + h, y, params)?;
                let lo = theoretical_ccdf(k, y, params)?;
                Ok((hi - lo) / h)
            })?
        };
        let pk = theoretical_pk(k, params, spec)?;
        let dev = (fd + pk).abs() / pk.abs().max(f64::MIN_POSITIVE);
        worst = worst.max(dev);
    }
    Ok(worst)
}

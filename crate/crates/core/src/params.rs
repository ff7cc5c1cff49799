//! Scheme parameters and the diffusivity / relaxation-rate correspondence.
//!
//! The collision step relaxes momentum at rate `s_j` and the energy-like
//! moment at rate `s_e`; the grid couples space and time through a fixed
//! lattice velocity `lambda = dx / dt`. The effective diffusivity is
//!
//! ```text
//! mu = (4 + alpha) / 6 * sigma * lambda * dx,    sigma = 1 / s_j - 1 / 2
//! ```
//!
//! which inverts exactly to `s_j = 1 / (sigma + 1/2)`. Admissible ranges:
//! `alpha` in (-4, 2) and both relaxation rates in (0, 2).

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Relative slack allowed when checking that `t_final / dt` is an integer.
pub const TIME_ALIGNMENT_REL_TOL: f64 = 1e-9;

/// Full parameter set for one scheme instance on one grid resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams<T> {
    lambda: T,
    dx: T,
    dt: T,
    alpha: T,
    mu: T,
    sigma: T,
    s_j: T,
    s_e: T,
}

/// Relaxation rate `s_j` that realizes diffusivity `mu` at resolution `dx`.
///
/// Errors if any input is out of range or the resulting rate leaves (0, 2).
pub fn derive_s_j<T: Real>(mu: T, alpha: T, lambda: T, dx: T) -> Result<T> {
    check_positive(mu, "mu")?;
    check_positive(lambda, "lambda")?;
    check_positive(dx, "dx")?;
    check_alpha(alpha)?;
    let six = T::of(6.0);
    let sigma = six * mu / ((T::of(4.0) + alpha) * lambda * dx);
    let s_j = T::one() / (sigma + T::of(0.5));
    check_rate(s_j, "derived s_j")?;
    Ok(s_j)
}

impl<T: Real> SchemeParams<T> {
    /// Builds parameters from a target diffusivity, deriving `s_j`.
    pub fn from_diffusivity(lambda: T, dx: T, alpha: T, mu: T, s_e: T) -> Result<Self> {
        let s_j = derive_s_j(mu, alpha, lambda, dx)?;
        check_rate(s_e, "s_e")?;
        let sigma = T::one() / s_j - T::of(0.5);
        Ok(SchemeParams {
            lambda,
            dx,
            dt: dx / lambda,
            alpha,
            mu,
            sigma,
            s_j,
            s_e,
        })
    }

    /// Builds parameters from an explicit momentum relaxation rate,
    /// deriving the diffusivity it realizes.
    pub fn from_relaxation(lambda: T, dx: T, alpha: T, s_j: T, s_e: T) -> Result<Self> {
        check_positive(lambda, "lambda")?;
        check_positive(dx, "dx")?;
        check_alpha(alpha)?;
        check_rate(s_j, "s_j")?;
        check_rate(s_e, "s_e")?;
        let sigma = T::one() / s_j - T::of(0.5);
        let mu = (T::of(4.0) + alpha) / T::of(6.0) * sigma * lambda * dx;
        Ok(SchemeParams {
            lambda,
            dx,
            dt: dx / lambda,
            alpha,
            mu,
            sigma,
            s_j,
            s_e,
        })
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    /// Henon parameter `1 / s_j - 1 / 2`.
    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn s_j(&self) -> T {
        self.s_j
    }

    pub fn s_e(&self) -> T {
        self.s_e
    }

    /// Coefficient of `rho` in the equilibrium energy moment,
    /// `alpha * lambda^2 / 2`.
    pub fn e_eq_coeff(&self) -> T {
        self.alpha * self.lambda * self.lambda * T::of(0.5)
    }

    /// Sound speed of the associated damped acoustic system,
    /// `lambda * sqrt((4 + alpha) / 6)`.
    pub fn c0(&self) -> T {
        self.lambda * ((T::of(4.0) + self.alpha) / T::of(6.0)).sqrt()
    }

    /// Friction coefficient of the associated damped acoustic system,
    /// `lambda^2 (4 + alpha) / (6 mu)`, equal to `c0^2 / mu`.
    pub fn gamma(&self) -> T {
        self.lambda * self.lambda * (T::of(4.0) + self.alpha) / (T::of(6.0) * self.mu)
    }

    /// Number of steps needed to reach `t_final`, which must be an integer
    /// multiple of `dt` up to a relative slack of `1e-9`.
    pub fn steps_for(&self, t_final: T) -> Result<usize> {
        steps_for(t_final, self.dt)
    }
}

/// Step count for marching to `t_final` with step `dt`.
pub fn steps_for<T: Real>(t_final: T, dt: T) -> Result<usize> {
    let t = t_final.to_f64().unwrap_or(f64::NAN);
    let dt = dt.to_f64().unwrap_or(f64::NAN);
    if !(t >= 0.0) {
        return Err(Error::invalid(format!(
            "t_final must be non-negative: got {t}"
        )));
    }
    let ratio = t / dt;
    let steps = ratio.round();
    if (ratio - steps).abs() > TIME_ALIGNMENT_REL_TOL * ratio.abs().max(1.0) {
        return Err(Error::TimeMisaligned { t_final: t, dt });
    }
    Ok(steps as usize)
}

fn check_positive<T: Real>(value: T, name: &str) -> Result<()> {
    if value > T::zero() && value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{name} must be positive and finite: got {value}"
        )))
    }
}

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if alpha > T::of(-4.0) && alpha < T::of(2.0) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "alpha outside (-4, 2): got {alpha}"
        )))
    }
}

fn check_rate<T: Real>(rate: T, name: &str) -> Result<()> {
    if rate > T::zero() && rate < T::of(2.0) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} outside (0, 2): got {rate}")))
    }
}

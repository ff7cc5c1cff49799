//! Closed-form diffusion solutions and error norms for convergence studies.

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::scalar::Real;

/// Decaying sine wave `sin(pi x) exp(-mu pi^2 t)`, the separated-variables
/// solution of `d rho/dt = mu d^2 rho/dx^2` on a period-2 domain.
pub fn sine_exact<T: Real>(x: T, t: T, mu: T) -> T {
    let pi = T::PI();
    (pi * x).sin() * (-mu * pi * pi * t).exp()
}

/// Spreading Gaussian `(1 + t)^{-1/2} exp(-x^2 / (4 mu (1 + t)))`.
///
/// Solves the same equation on the line; on a wide symmetric domain the
/// boundary values are far below rounding for the diffusivities of
/// interest, so the periodic solver sees it as compactly supported.
pub fn gaussian_exact<T: Real>(x: T, t: T, mu: T) -> T {
    let one = T::one();
    let spread = T::of(4.0) * mu * (one + t);
    (-x * x / spread).exp() / (one + t).sqrt()
}

/// Which closed-form profile an experiment starts from and compares against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Sine,
    Gaussian,
}

/// A closed-form solution bound to a diffusivity and a domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticProfile<T> {
    kind: ProfileKind,
    mu: T,
    x_min: T,
    x_max: T,
}

impl<T: Real> AnalyticProfile<T> {
    /// The sine profile needs a domain spanning a whole number of periods
    /// (an even integer length); the Gaussian needs a symmetric domain so
    /// that both tails are treated alike.
    pub fn new(kind: ProfileKind, mu: T, x_min: T, x_max: T) -> Result<Self> {
        if !(mu > T::zero()) {
            return Err(Error::invalid(format!(
                "mu must be positive and finite: got {mu}"
            )));
        }
        if !(x_min < x_max) {
            return Err(Error::invalid(format!(
                "domain bounds must satisfy x_min < x_max: got [{x_min}, {x_max}]"
            )));
        }
        match kind {
            ProfileKind::Sine => {
                let len = (x_max - x_min).to_f64().unwrap_or(f64::NAN);
                let half_periods = len / 2.0;
                if (half_periods - half_periods.round()).abs() > 1e-12 || half_periods < 0.5 {
                    return Err(Error::invalid(format!(
                        "sine profile needs a domain length that is an even integer: got {len}"
                    )));
                }
            }
            ProfileKind::Gaussian => {
                let asym = (x_min + x_max).abs();
                if asym > T::of(1e-12) * (x_max - x_min) {
                    return Err(Error::invalid(format!(
                        "gaussian profile needs a symmetric domain: got [{x_min}, {x_max}]"
                    )));
                }
            }
        }
        Ok(AnalyticProfile {
            kind,
            mu,
            x_min,
            x_max,
        })
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn x_min(&self) -> T {
        self.x_min
    }

    pub fn x_max(&self) -> T {
        self.x_max
    }

    pub fn at(&self, x: T, t: T) -> T {
        match self.kind {
            ProfileKind::Sine => sine_exact(x, t, self.mu),
            ProfileKind::Gaussian => gaussian_exact(x, t, self.mu),
        }
    }

    pub fn initial(&self, x: T) -> T {
        self.at(x, T::zero())
    }

    /// Samples the profile at time `t` on every node of `grid`.
    pub fn sample(&self, grid: &Grid1D<T>, t: T) -> Vec<T> {
        grid.sample(|x| self.at(x, t))
    }
}

/// Discrete error norms between two fields on a common grid.
///
/// `l2` carries the `sqrt(dx)` quadrature weight so that it approximates
/// the continuous L2 norm; `l2_unweighted` recovers the plain root sum of
/// squares when raw magnitudes are wanted side by side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport<T> {
    pub l2: T,
    pub linf: T,
    pub n: usize,
    pub dx: T,
}

impl<T: Real> ErrorReport<T> {
    pub fn l2_unweighted(&self) -> T {
        self.l2 / self.dx.sqrt()
    }
}

/// Computes the weighted l2 and max norms of `u - v`.
pub fn error_norms<T: Real>(u: &[T], v: &[T], dx: T) -> Result<ErrorReport<T>> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch {
            expected: u.len(),
            got: v.len(),
        });
    }
    if u.is_empty() {
        return Err(Error::invalid("error norms need at least one sample"));
    }
    if !(dx > T::zero()) {
        return Err(Error::invalid(format!("dx must be positive: got {dx}")));
    }
    let mut sum_sq = T::zero();
    let mut linf = T::zero();
    for (&a, &b) in u.iter().zip(v) {
        let d = a - b;
        sum_sq = sum_sq + d * d;
        linf = linf.max(d.abs());
    }
    Ok(ErrorReport {
        l2: (dx * sum_sq).sqrt(),
        linf,
        n: u.len(),
        dx,
    })
}

/// Per-pair observed orders `log(e_i / e_{i+1}) / log(dx_i / dx_{i+1})`.
pub fn convergence_order<T: Real>(dx: &[T], err: &[T]) -> Result<Vec<T>> {
    if dx.len() != err.len() {
        return Err(Error::LengthMismatch {
            expected: dx.len(),
            got: err.len(),
        });
    }
    if dx.len() < 2 {
        return Err(Error::invalid(
            "convergence order needs at least two levels",
        ));
    }
    for (&h, &e) in dx.iter().zip(err) {
        if !(h > T::zero()) || !(e > T::zero()) {
            return Err(Error::invalid(format!(
                "convergence order needs positive spacings and errors: got dx = {h}, err = {e}"
            )));
        }
    }
    Ok(dx
        .windows(2)
        .zip(err.windows(2))
        .map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect())
}

/// Least-squares slope of `ln err` against `ln dx` across all levels.
pub fn fit_order<T: Real>(dx: &[T], err: &[T]) -> Result<T> {
    convergence_order(dx, err)?; // reuse the validation
    let n = T::of(dx.len() as f64);
    let xs: Vec<T> = dx.iter().map(|&h| h.ln()).collect();
    let ys: Vec<T> = err.iter().map(|&e| e.ln()).collect();
    let mean = |v: &[T]| v.iter().copied().sum::<T>() / n;
    let (mx, my) = (mean(&xs), mean(&ys));
    let mut cov = T::zero();
    let mut var = T::zero();
    for (&x, &y) in xs.iter().zip(&ys) {
        cov = cov + (x - mx) * (y - my);
        var = var + (x - mx) * (x - mx);
    }
    if var == T::zero() {
        return Err(Error::invalid(
            "least-squares order needs at least two distinct spacings",
        ));
    }
    Ok(cov / var)
}

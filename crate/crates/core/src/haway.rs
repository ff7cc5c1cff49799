//! Staggered leapfrog solver (HaWAY scheme) for the damped acoustic system
//!
//! ```text
//! d rho / dt + d j / dx                  = 0
//! d j   / dt + c0^2 d rho / dx + gamma j = 0
//! ```
//!
//! which is the system the lattice scheme approaches when the grid is
//! refined while the diffusivity is held fixed. Density lives on integer
//! nodes `x_k` at integer time levels, so it compares against lattice
//! output without interpolation; momentum lives on half-offset nodes
//! `x_{k+1/2}` at half time levels. The damping term is averaged across
//! the two momentum levels, so each momentum update is implicit but
//! pointwise solvable:
//!
//! ```text
//! rho_k^{n+1} = rho_k^n - dt/dx (j_{k+1/2}^{n+1/2} - j_{k-1/2}^{n+1/2})
//! (1/dt + gamma/2) j^{n+3/2} = (1/dt - gamma/2) j^{n+1/2}
//!                              - c0^2/dx (rho_{k+1}^{n+1} - rho_k^{n+1})
//! ```
//!
//! Startup takes a damped half Euler step so that `j` sits at `t = dt/2`
//! consistently with a state that begins at rest.

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::params::SchemeParams;
use crate::scalar::Real;

/// Coefficients of the damped acoustic system plus the grid steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcousticParams<T> {
    c0: T,
    gamma: T,
    dx: T,
    dt: T,
}

impl<T: Real> AcousticParams<T> {
    /// Direct construction. The CFL number `c0 dt / dx` may not exceed 1;
    /// scheme-derived parameters stay strictly below it.
    pub fn new(c0: T, gamma: T, dx: T, dt: T) -> Result<Self> {
        if !(c0 >= T::zero()) || !c0.is_finite() {
            return Err(Error::invalid(format!("c0 must be non-negative: got {c0}")));
        }
        if !(gamma >= T::zero()) || !gamma.is_finite() {
            return Err(Error::invalid(format!(
                "gamma must be non-negative: got {gamma}"
            )));
        }
        if !(dx > T::zero()) {
            return Err(Error::invalid(format!("dx must be positive: got {dx}")));
        }
        if !(dt > T::zero()) {
            return Err(Error::invalid(format!("dt must be positive: got {dt}")));
        }
        let cfl = c0 * dt / dx;
        if cfl > T::one() {
            return Err(Error::invalid(format!(
                "CFL number c0 dt / dx exceeds 1: got {cfl}"
            )));
        }
        Ok(AcousticParams { c0, gamma, dx, dt })
    }

    /// Acoustic coefficients matched to a lattice scheme instance:
    /// `c0 = lambda sqrt((4 + alpha)/6)` and `gamma = c0^2 / mu`, on the
    /// same space and time steps. The CFL number is then
    /// `sqrt((4 + alpha)/6) < 1` for every admissible `alpha`.
    pub fn from_scheme(p: &SchemeParams<T>) -> Self {
        AcousticParams {
            c0: p.c0(),
            gamma: p.gamma(),
            dx: p.dx(),
            dt: p.dt(),
        }
    }

    pub fn c0(&self) -> T {
        self.c0
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn cfl(&self) -> T {
        self.c0 * self.dt / self.dx
    }
}

/// Solver state: `rho[k]` at node `x_k` on an integer time level,
/// `j[k]` at `x_{k+1/2}` on an adjacent half level. Indexing is periodic.
#[derive(Debug, Clone, PartialEq)]
pub struct StaggeredState<T> {
    rho: Vec<T>,
    j: Vec<T>,
}

impl<T: Real> StaggeredState<T> {
    pub fn new(rho: Vec<T>, j: Vec<T>) -> Result<Self> {
        if rho.len() != j.len() {
            return Err(Error::LengthMismatch {
                expected: rho.len(),
                got: j.len(),
            });
        }
        if rho.is_empty() {
            return Err(Error::invalid("staggered state needs at least one node"));
        }
        Ok(StaggeredState { rho, j })
    }

    /// Starting state for a given density: `rho0` as is, momentum from a
    /// damped half Euler step,
    /// `j = -(dt/2) c0^2 D rho0 / dx / (1 + gamma dt / 4)`,
    /// consistent with data at rest at `t = 0`.
    pub fn from_density(rho0: &[T], p: &AcousticParams<T>) -> Result<Self> {
        if rho0.is_empty() {
            return Err(Error::invalid("staggered state needs at least one node"));
        }
        let n = rho0.len();
        let half_dt = p.dt * T::of(0.5);
        let c2_dx = p.c0 * p.c0 / p.dx;
        let denom = T::one() + p.gamma * p.dt * T::of(0.25);
        let mut j = Vec::with_capacity(n);
        for k in 0..n {
            let grad = rho0[(k + 1) % n] - rho0[k];
            j.push(-half_dt * c2_dx * grad / denom);
        }
        Ok(StaggeredState {
            rho: rho0.to_vec(),
            j,
        })
    }

    pub fn n(&self) -> usize {
        self.rho.len()
    }

    pub fn rho(&self) -> &[T] {
        &self.rho
    }

    pub fn j(&self) -> &[T] {
        &self.j
    }
}

/// Samples `rho0` on the grid nodes and builds the starting state, with
/// the momentum a damped half Euler step ahead (see
/// [`StaggeredState::from_density`]).
pub fn haway_init<T: Real>(
    rho0: impl Fn(T) -> T,
    p: &AcousticParams<T>,
    grid: &Grid1D<T>,
) -> StaggeredState<T> {
    StaggeredState::from_density(&grid.sample(rho0), p)
        .expect("a grid always has at least one node")
}

/// Advances the density one full level using the current half-level `j`.
pub fn haway_mass_step<T: Real>(state: &StaggeredState<T>, p: &AcousticParams<T>) -> Vec<T> {
    let n = state.n();
    let r = p.dt / p.dx;
    let mut rho = Vec::with_capacity(n);
    for k in 0..n {
        let jm = state.j[(k + n - 1) % n];
        rho.push(state.rho[k] - r * (state.j[k] - jm));
    }
    rho
}

/// Advances the momentum one full level. Expects a mixed-level state: the
/// density already advanced by [`haway_mass_step`], the momentum still on
/// the earlier half level.
pub fn haway_momentum_step<T: Real>(state: &StaggeredState<T>, p: &AcousticParams<T>) -> Vec<T> {
    let n = state.n();
    let inv_dt = T::one() / p.dt;
    let half_gamma = p.gamma * T::of(0.5);
    let lhs = inv_dt + half_gamma;
    let rhs = inv_dt - half_gamma;
    let c2_dx = p.c0 * p.c0 / p.dx;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let grad = state.rho[(k + 1) % n] - state.rho[k];
        out.push((rhs * state.j[k] - c2_dx * grad) / lhs);
    }
    out
}

/// Marching state for the staggered scheme.
///
/// After each `step` the density sits one full level later and the
/// momentum one full level later on its half grid; the previous momentum
/// level is kept so that `momentum_on_nodes` can average it back onto the
/// integer space-time lattice.
#[derive(Debug, Clone)]
pub struct HawaySolver<T> {
    params: AcousticParams<T>,
    state: StaggeredState<T>,
    j_prev: Vec<T>,
    steps_taken: usize,
}

impl<T: Real> HawaySolver<T> {
    pub fn new(params: AcousticParams<T>, rho0: &[T]) -> Result<Self> {
        let state = StaggeredState::from_density(rho0, &params)?;
        let j_prev = state.j.clone();
        Ok(HawaySolver {
            params,
            state,
            j_prev,
            steps_taken: 0,
        })
    }

    pub fn params(&self) -> &AcousticParams<T> {
        &self.params
    }

    pub fn state(&self) -> &StaggeredState<T> {
        &self.state
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    pub fn step(&mut self) {
        self.state.rho = haway_mass_step(&self.state, &self.params);
        let j = haway_momentum_step(&self.state, &self.params);
        self.j_prev = std::mem::replace(&mut self.state.j, j);
        self.steps_taken += 1;
    }

    pub fn advance(&mut self, steps: usize) {
        for _ in 0..steps {
            self.step();
        }
    }

    pub fn rho(&self) -> &[T] {
        &self.state.rho
    }

    /// Momentum averaged onto integer nodes and the integer time level of
    /// the current density: mean of the two half time levels, then mean of
    /// the two adjacent half nodes.
    pub fn momentum_on_nodes(&self) -> Vec<T> {
        let n = self.state.n();
        let half = T::of(0.5);
        let centered: Vec<T> = (0..n)
            .map(|k| half * (self.state.j[k] + self.j_prev[k]))
            .collect();
        (0..n)
            .map(|k| half * (centered[(k + n - 1) % n] + centered[k]))
            .collect()
    }
}

/// Samples `rho0` on the grid, marches to `t_final` (which must be an
/// integer multiple of `dt`), and returns the state holding the density
/// at `t_final` and the momentum at the half level just past it.
pub fn haway_run<T: Real>(
    rho0: impl Fn(T) -> T,
    p: &AcousticParams<T>,
    grid: &Grid1D<T>,
    t_final: T,
) -> Result<StaggeredState<T>> {
    let steps = crate::params::steps_for(t_final, p.dt)?;
    let mut solver = HawaySolver::new(*p, &grid.sample(rho0))?;
    solver.advance(steps);
    Ok(solver.state)
}

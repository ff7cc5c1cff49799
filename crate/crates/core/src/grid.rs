//! Uniform periodic grid in one dimension.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Periodic grid on `[x_min, x_max)` with `n` cells.
///
/// Node `k` sits at `x_min + k * dx` with `dx = (x_max - x_min) / n`.
/// The right endpoint is identified with the left one, so no node is
/// placed there; index arithmetic wraps modulo `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D<T> {
    x_min: T,
    x_max: T,
    n: usize,
}

impl<T: Real> Grid1D<T> {
    pub fn new(x_min: T, x_max: T, n: usize) -> Result<Self> {
        if !(x_min < x_max) {
            return Err(Error::invalid(format!(
                "domain bounds must satisfy x_min < x_max: got [{x_min}, {x_max}]"
            )));
        }
        if n == 0 {
            return Err(Error::invalid("cell count n must be positive: got 0"));
        }
        Ok(Grid1D { x_min, x_max, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_min(&self) -> T {
        self.x_min
    }

    pub fn x_max(&self) -> T {
        self.x_max
    }

    pub fn length(&self) -> T {
        self.x_max - self.x_min
    }

    pub fn dx(&self) -> T {
        self.length() / T::of(self.n as f64)
    }

    /// Coordinate of node `k`; `k` wraps modulo `n`.
    pub fn node(&self, k: usize) -> T {
        let k = k % self.n;
        self.x_min + T::of(k as f64) * self.dx()
    }

    pub fn nodes(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.n).map(move |k| self.node(k))
    }

    /// Evaluates `f` on every node.
    pub fn sample(&self, f: impl Fn(T) -> T) -> Vec<T> {
        self.nodes().map(f).collect()
    }

    /// Index of the node closest to `x` (no periodic wrapping of `x`).
    pub fn nearest_node(&self, x: T) -> usize {
        let raw = ((x - self.x_min) / self.dx()).round();
        let raw = raw.max(T::zero());
        let k = raw.to_f64().unwrap_or(0.0) as usize;
        k.min(self.n - 1)
    }
}

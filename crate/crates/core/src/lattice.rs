//! D1Q3 collide-and-stream update in moment form.
//!
//! Each node carries three populations `(f_plus, f_zero, f_minus)` moving
//! right, resting, and moving left at lattice velocity `lambda`. Their
//! moments are
//!
//! ```text
//! rho = f_plus + f_zero + f_minus
//! j   = lambda   * (f_plus - f_minus)
//! e   = lambda^2 * (f_plus - 2 f_zero + f_minus)
//! ```
//!
//! A step relaxes `j` toward 0 at rate `s_j` and `e` toward
//! `alpha lambda^2 / 2 * rho` at rate `s_e`, maps back to populations, and
//! shifts `f_plus` one cell right and `f_minus` one cell left (periodic).
//! Mass is conserved exactly in exact arithmetic because the collision
//! leaves `rho` untouched and streaming only permutes values.

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::params::SchemeParams;
use crate::scalar::Real;

/// Per-node populations of the three lattice velocities.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionField<T> {
    f_plus: Vec<T>,
    f_zero: Vec<T>,
    f_minus: Vec<T>,
}

/// Per-node moments `(rho, j, e)` of a distribution field.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentField<T> {
    rho: Vec<T>,
    j: Vec<T>,
    e: Vec<T>,
}

impl<T: Real> DistributionField<T> {
    pub fn zeros(n: usize) -> Self {
        DistributionField {
            f_plus: vec![T::zero(); n],
            f_zero: vec![T::zero(); n],
            f_minus: vec![T::zero(); n],
        }
    }

    pub fn from_channels(f_plus: Vec<T>, f_zero: Vec<T>, f_minus: Vec<T>) -> Result<Self> {
        if f_plus.len() != f_zero.len() || f_plus.len() != f_minus.len() {
            return Err(Error::LengthMismatch {
                expected: f_plus.len(),
                got: f_zero.len().max(f_minus.len()),
            });
        }
        if f_plus.is_empty() {
            return Err(Error::invalid(
                "distribution field must have at least one node",
            ));
        }
        Ok(DistributionField {
            f_plus,
            f_zero,
            f_minus,
        })
    }

    pub fn n(&self) -> usize {
        self.f_plus.len()
    }

    pub fn f_plus(&self) -> &[T] {
        &self.f_plus
    }

    pub fn f_zero(&self) -> &[T] {
        &self.f_zero
    }

    pub fn f_minus(&self) -> &[T] {
        &self.f_minus
    }
}

impl<T: Real> MomentField<T> {
    pub fn from_channels(rho: Vec<T>, j: Vec<T>, e: Vec<T>) -> Result<Self> {
        if rho.len() != j.len() || rho.len() != e.len() {
            return Err(Error::LengthMismatch {
                expected: rho.len(),
                got: j.len().max(e.len()),
            });
        }
        Ok(MomentField { rho, j, e })
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

    pub fn e(&self) -> &[T] {
        &self.e
    }

    pub fn into_rho(self) -> Vec<T> {
        self.rho
    }
}

/// Moment transform matrix `M` mapping `(f_plus, f_zero, f_minus)` to
/// `(rho, j, e)`.
pub fn moment_matrix<T: Real>(lambda: T) -> [[T; 3]; 3] {
    let l2 = lambda * lambda;
    [
        [T::one(), T::one(), T::one()],
        [lambda, T::zero(), -lambda],
        [l2, -T::of(2.0) * l2, l2],
    ]
}

/// Inverse of [`moment_matrix`].
pub fn inverse_moment_matrix<T: Real>(lambda: T) -> [[T; 3]; 3] {
    let third = T::of(1.0 / 3.0);
    let l2 = lambda * lambda;
    let half_l = T::one() / (T::of(2.0) * lambda);
    let sixth_l2 = T::one() / (T::of(6.0) * l2);
    [
        [third, half_l, sixth_l2],
        [third, T::zero(), -T::one() / (T::of(3.0) * l2)],
        [third, -half_l, sixth_l2],
    ]
}

/// Relaxation matrix `R` acting on moments: `rho` is kept, `j` is scaled by
/// `1 - s_j`, and `e` relaxes toward `alpha lambda^2 / 2 * rho`.
pub fn relaxation_matrix<T: Real>(p: &SchemeParams<T>) -> [[T; 3]; 3] {
    let z = T::zero();
    [
        [T::one(), z, z],
        [z, T::one() - p.s_j(), z],
        [p.e_eq_coeff() * p.s_e(), z, T::one() - p.s_e()],
    ]
}

/// Collision matrix `M^-1 R M` in population space.
///
/// The lattice velocity cancels out, so the entries depend only on the
/// relaxation rates and `alpha`. Column sums are exactly 1, which is the
/// matrix form of mass conservation.
pub fn collision_matrix<T: Real>(p: &SchemeParams<T>) -> [[T; 3]; 3] {
    let third = T::of(1.0 / 3.0);
    let sixth = T::of(1.0 / 6.0);
    let u = (T::one() - p.s_j()) * T::of(0.5);
    let g = T::one() - p.s_e();
    let h = p.alpha() * p.s_e() * T::of(0.5);
    let w1 = (h + g) * sixth;
    let w2 = (h - T::of(2.0) * g) * sixth;
    let two = T::of(2.0);
    [
        [third + u + w1, third + w2, third - u + w1],
        [third - two * w1, third - two * w2, third - two * w1],
        [third - u + w1, third + w2, third + u + w1],
    ]
}

/// Computes `(rho, j, e)` for every node.
pub fn moments_from_distributions<T: Real>(
    f: &DistributionField<T>,
    p: &SchemeParams<T>,
) -> MomentField<T> {
    let n = f.n();
    let lambda = p.lambda();
    let l2 = lambda * lambda;
    let two = T::of(2.0);
    let mut rho = Vec::with_capacity(n);
    let mut j = Vec::with_capacity(n);
    let mut e = Vec::with_capacity(n);
    for k in 0..n {
        let (fp, f0, fm) = (f.f_plus[k], f.f_zero[k], f.f_minus[k]);
        rho.push(fp + f0 + fm);
        j.push(lambda * (fp - fm));
        e.push(l2 * (fp - two * f0 + fm));
    }
    MomentField { rho, j, e }
}

/// Inverts the moment transform on every node.
pub fn distributions_from_moments<T: Real>(
    m: &MomentField<T>,
    p: &SchemeParams<T>,
) -> DistributionField<T> {
    let n = m.n();
    let lambda = p.lambda();
    let l2 = lambda * lambda;
    let third = T::of(1.0 / 3.0);
    let six_l2 = T::of(6.0) * l2;
    let two_l = T::of(2.0) * lambda;
    let mut f_plus = Vec::with_capacity(n);
    let mut f_zero = Vec::with_capacity(n);
    let mut f_minus = Vec::with_capacity(n);
    for k in 0..n {
        let (rho, j, e) = (m.rho[k], m.j[k], m.e[k]);
        f_zero.push((rho - e / l2) * third);
        let a = rho * third + e / six_l2;
        let b = j / two_l;
        f_plus.push(a + b);
        f_minus.push(a - b);
    }
    DistributionField {
        f_plus,
        f_zero,
        f_minus,
    }
}

/// Equilibrium moments for a density profile: `(rho, 0, alpha lambda^2/2 rho)`.
pub fn equilibrium<T: Real>(rho: &[T], p: &SchemeParams<T>) -> MomentField<T> {
    let coeff = p.e_eq_coeff();
    MomentField {
        rho: rho.to_vec(),
        j: vec![T::zero(); rho.len()],
        e: rho.iter().map(|&r| coeff * r).collect(),
    }
}

/// Relaxes `(j, e)` toward equilibrium; `rho` is returned unchanged.
pub fn relax<T: Real>(m: &MomentField<T>, p: &SchemeParams<T>) -> MomentField<T> {
    let n = m.n();
    let one_minus_sj = T::one() - p.s_j();
    let s_e = p.s_e();
    let coeff = p.e_eq_coeff();
    let mut j = Vec::with_capacity(n);
    let mut e = Vec::with_capacity(n);
    for k in 0..n {
        j.push(one_minus_sj * m.j[k]);
        e.push(m.e[k] + s_e * (coeff * m.rho[k] - m.e[k]));
    }
    MomentField {
        rho: m.rho.clone(),
        j,
        e,
    }
}

/// Shifts `f_plus` one cell to the right and `f_minus` one cell to the
/// left, both periodic; `f_zero` stays put.
pub fn stream<T: Real>(f: &DistributionField<T>) -> DistributionField<T> {
    let mut out = f.clone();
    out.f_plus.rotate_right(1);
    out.f_minus.rotate_left(1);
    out
}

/// One full update: moments, relaxation, back-transform, streaming.
pub fn lbm_step<T: Real>(f: &DistributionField<T>, p: &SchemeParams<T>) -> DistributionField<T> {
    let m = moments_from_distributions(f, p);
    let m_star = relax(&m, p);
    let f_star = distributions_from_moments(&m_star, p);
    stream(&f_star)
}

/// One full update through the precomputed collision matrix.
///
/// Algebraically identical to [`lbm_step`]; rounding differs by at most a
/// few ulp per entry because the matrix entries are formed up front.
pub fn lbm_step_fused<T: Real>(
    f: &DistributionField<T>,
    p: &SchemeParams<T>,
) -> DistributionField<T> {
    let c = collision_matrix(p);
    let n = f.n();
    let mut out = DistributionField::zeros(n);
    for k in 0..n {
        let (fp, f0, fm) = (f.f_plus[k], f.f_zero[k], f.f_minus[k]);
        out.f_plus[k] = c[0][0] * fp + c[0][1] * f0 + c[0][2] * fm;
        out.f_zero[k] = c[1][0] * fp + c[1][1] * f0 + c[1][2] * fm;
        out.f_minus[k] = c[2][0] * fp + c[2][1] * f0 + c[2][2] * fm;
    }
    out.f_plus.rotate_right(1);
    out.f_minus.rotate_left(1);
    out
}

/// Populations at equilibrium for the sampled initial density.
pub fn init_at_equilibrium<T: Real>(
    rho0: impl Fn(T) -> T,
    grid: &Grid1D<T>,
    p: &SchemeParams<T>,
) -> DistributionField<T> {
    let rho = grid.sample(rho0);
    let m = equilibrium(&rho, p);
    distributions_from_moments(&m, p)
}

/// Marching state for a scheme instance on a grid.
///
/// `step` performs the collision in place with the same arithmetic as the
/// pure [`lbm_step`] composition (bitwise identical results) and then
/// rotates the moving channels, so no node ever mixes pre- and
/// post-collision values.
#[derive(Debug, Clone)]
pub struct Simulation<T> {
    params: SchemeParams<T>,
    grid: Grid1D<T>,
    f: DistributionField<T>,
    steps_taken: usize,
}

impl<T: Real> Simulation<T> {
    /// Starts from equilibrium populations of the sampled density.
    pub fn new(params: SchemeParams<T>, grid: Grid1D<T>, rho0: impl Fn(T) -> T) -> Result<Self> {
        let gdx = grid.dx();
        let rel = ((gdx - params.dx()) / params.dx()).abs();
        if rel > T::of(1e-12) {
            return Err(Error::invalid(format!(
                "grid spacing {gdx} does not match scheme dx {}",
                params.dx()
            )));
        }
        let f = init_at_equilibrium(rho0, &grid, &params);
        Ok(Simulation {
            params,
            grid,
            f,
            steps_taken: 0,
        })
    }

    pub fn params(&self) -> &SchemeParams<T> {
        &self.params
    }

    pub fn grid(&self) -> &Grid1D<T> {
        &self.grid
    }

    pub fn distribution(&self) -> &DistributionField<T> {
        &self.f
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    pub fn step(&mut self) {
        let p = &self.params;
        let lambda = p.lambda();
        let l2 = lambda * lambda;
        let two = T::of(2.0);
        let third = T::of(1.0 / 3.0);
        let six_l2 = T::of(6.0) * l2;
        let two_l = two * lambda;
        let one_minus_sj = T::one() - p.s_j();
        let s_e = p.s_e();
        let coeff = p.e_eq_coeff();
        let n = self.f.n();
        for k in 0..n {
            let (fp, f0, fm) = (self.f.f_plus[k], self.f.f_zero[k], self.f.f_minus[k]);
            let rho = fp + f0 + fm;
            let j = lambda * (fp - fm);
            let e = l2 * (fp - two * f0 + fm);
            let j_star = one_minus_sj * j;
            let e_star = e + s_e * (coeff * rho - e);
            self.f.f_zero[k] = (rho - e_star / l2) * third;
            let a = rho * third + e_star / six_l2;
            let b = j_star / two_l;
            self.f.f_plus[k] = a + b;
            self.f.f_minus[k] = a - b;
        }
        self.f.f_plus.rotate_right(1);
        self.f.f_minus.rotate_left(1);
        self.steps_taken += 1;
    }

    pub fn advance(&mut self, steps: usize) {
        for _ in 0..steps {
            self.step();
        }
    }

    pub fn moments(&self) -> MomentField<T> {
        moments_from_distributions(&self.f, &self.params)
    }

    /// Current density profile.
    pub fn density(&self) -> Vec<T> {
        self.moments().into_rho()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(lambda: f64, alpha: f64, s_j: f64, s_e: f64) -> SchemeParams<f64> {
        SchemeParams::from_relaxation(lambda, 0.25, alpha, s_j, s_e).unwrap()
    }

    fn single_node(fp: f64, f0: f64, fm: f64) -> DistributionField<f64> {
        DistributionField::from_channels(vec![fp], vec![f0], vec![fm]).unwrap()
    }

    /// Solves a 3x3 system by Gaussian elimination with partial pivoting.
    /// Kept test-local so the production inverse stays independently checked.
    fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> [f64; 3] {
        let mut m = [[0.0; 4]; 3];
        for i in 0..3 {
            m[i][..3].copy_from_slice(&a[i]);
            m[i][3] = b[i];
        }
        for col in 0..3 {
            let pivot = (col..3)
                .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
                .unwrap();
            m.swap(col, pivot);
            for row in col + 1..3 {
                let factor = m[row][col] / m[col][col];
                for c in col..4 {
                    m[row][c] -= factor * m[col][c];
                }
            }
        }
        let mut x = [0.0; 3];
        for row in (0..3).rev() {
            let mut acc = m[row][3];
            for c in row + 1..3 {
                acc -= m[row][c] * x[c];
            }
            x[row] = acc / m[row][row];
        }
        x
    }

    fn ulp_distance(a: f64, b: f64) -> u64 {
        fn key(x: f64) -> i64 {
            let bits = x.to_bits() as i64;
            if bits < 0 {
                i64::MIN.wrapping_add(bits.wrapping_neg())
            } else {
                bits
            }
        }
        key(a).abs_diff(key(b))
    }

    #[test]
    fn moments_of_reference_populations() {
        let p1 = params(1.0, 1.0, 0.5, 0.5);
        let m = moments_from_distributions(&single_node(1.0, 1.0, 1.0), &p1);
        assert_eq!((m.rho()[0], m.j()[0], m.e()[0]), (3.0, 0.0, 0.0));

        let p2 = params(2.0, 1.0, 0.5, 0.5);
        let m = moments_from_distributions(&single_node(1.0, 0.0, 0.0), &p2);
        assert_eq!((m.rho()[0], m.j()[0], m.e()[0]), (1.0, 2.0, 4.0));

        let m = moments_from_distributions(&single_node(0.0, 1.0, 0.0), &p1);
        assert_eq!((m.rho()[0], m.j()[0], m.e()[0]), (1.0, 0.0, -2.0));
    }

    #[test]
    fn inverse_transform_matches_a_direct_linear_solve() {
        let p = params(1.0, 1.0, 0.5, 0.5);
        let m = MomentField::from_channels(vec![1.0], vec![0.0], vec![0.5]).unwrap();
        let f = distributions_from_moments(&m, &p);
        assert!((f.f_plus()[0] - 5.0 / 12.0).abs() < 1e-15);
        assert!((f.f_zero()[0] - 1.0 / 6.0).abs() < 1e-15);
        assert!((f.f_minus()[0] - 5.0 / 12.0).abs() < 1e-15);

        let x = solve3(moment_matrix(1.0), [1.0, 0.0, 0.5]);
        assert!((f.f_plus()[0] - x[0]).abs() < 1e-15);
        assert!((f.f_zero()[0] - x[1]).abs() < 1e-15);
        assert!((f.f_minus()[0] - x[2]).abs() < 1e-15);
    }

    #[test]
    fn moment_matrix_times_inverse_is_identity() {
        for &lambda in &[1.0, 2.0] {
            let m = moment_matrix::<f64>(lambda);
            let mi = inverse_moment_matrix::<f64>(lambda);
            for i in 0..3 {
                for j in 0..3 {
                    let mut acc = 0.0;
                    for k in 0..3 {
                        acc += m[i][k] * mi[k][j];
                    }
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (acc - expected).abs() < 1e-14,
                        "lambda = {lambda}, entry ({i}, {j}) = {acc}"
                    );
                }
            }
        }
    }

    #[test]
    fn collision_matrix_agrees_with_the_explicit_product() {
        for &(lambda, alpha, s_j, s_e) in &[
            (1.0, 1.0, 0.5, 1.5),
            (2.0, -1.0, 0.05, 1.5),
            (1.0, 1.9, 1.99, 0.01),
        ] {
            let p = params(lambda, alpha, s_j, s_e);
            let c = collision_matrix(&p);
            let m = moment_matrix(lambda);
            let mi = inverse_moment_matrix(lambda);
            let r = relaxation_matrix(&p);
            // Product M^-1 R M, formed naively.
            let mut rm = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        rm[i][j] += r[i][k] * m[k][j];
                    }
                }
            }
            let mut product = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        product[i][j] += mi[i][k] * rm[k][j];
                    }
                }
            }
            for i in 0..3 {
                for j in 0..3 {
                    assert!(
                        (c[i][j] - product[i][j]).abs() < 1e-14,
                        "entry ({i}, {j}): closed form {} vs product {}",
                        c[i][j],
                        product[i][j]
                    );
                }
            }
            // Mass conservation: columns sum to one.
            for j in 0..3 {
                let sum: f64 = (0..3).map(|i| c[i][j]).sum();
                assert!((sum - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn equilibrium_and_relaxation_reference_values() {
        let p = params(1.0, 1.0, 0.5, 1.5);
        let m = equilibrium(&[1.0], &p);
        assert_eq!((m.rho()[0], m.j()[0], m.e()[0]), (1.0, 0.0, 0.5));

        let m = MomentField::from_channels(vec![1.0], vec![2.0], vec![0.0]).unwrap();
        let relaxed = relax(&m, &p);
        assert_eq!(relaxed.j()[0], 1.0);
        // e relaxes toward alpha/2 * rho = 0.5 at rate 1.5: 0 + 1.5 * 0.5.
        assert_eq!(relaxed.e()[0], 0.75);
        assert_eq!(relaxed.rho()[0], 1.0);
    }

    #[test]
    fn streaming_shifts_each_moving_channel_by_one_cell() {
        let f = DistributionField::from_channels(
            vec![1.0, 2.0, 3.0, 4.0],
            vec![5.0, 6.0, 7.0, 8.0],
            vec![1.0, 2.0, 3.0, 4.0],
        )
        .unwrap();
        let s = stream(&f);
        assert_eq!(s.f_plus(), &[4.0, 1.0, 2.0, 3.0]);
        assert_eq!(s.f_zero(), &[5.0, 6.0, 7.0, 8.0]);
        assert_eq!(s.f_minus(), &[2.0, 3.0, 4.0, 1.0]);
    }

    #[test]
    fn delta_spike_spreads_into_thirds_under_unit_rates() {
        // Single f_plus spike at node 0 with s_j = s_e = 1, alpha = 0:
        // moments (1, 1, 1) relax to (1, 0, 0), giving populations of 1/3
        // each, which then stream apart.
        let p = params(1.0, 0.0, 1.0, 1.0);
        let f =
            DistributionField::from_channels(vec![1.0, 0.0, 0.0, 0.0], vec![0.0; 4], vec![0.0; 4])
                .unwrap();
        let next = lbm_step(&f, &p);
        let third = 1.0 / 3.0;
        assert_eq!(next.f_plus(), &[0.0, third, 0.0, 0.0]);
        assert_eq!(next.f_zero(), &[third, 0.0, 0.0, 0.0]);
        assert_eq!(next.f_minus(), &[0.0, 0.0, 0.0, third]);
    }

    #[test]
    fn uniform_equilibrium_is_a_fixed_point() {
        let p = SchemeParams::from_diffusivity(1.0, 0.25, 1.0, 0.01, 1.5).unwrap();
        let grid = Grid1D::new(-1.0, 1.0, 8).unwrap();
        let mut sim = Simulation::new(p, grid, |_| 0.7).unwrap();
        let before = sim.distribution().clone();
        sim.advance(10);
        assert_eq!(sim.distribution(), &before);
    }

    #[test]
    fn init_at_equilibrium_matches_the_moment_construction() {
        let p = params(1.0, 1.0, 0.5, 1.5);
        let grid = Grid1D::new(-1.0, 1.0, 4).unwrap();
        let f = init_at_equilibrium(|_| 1.0, &grid, &p);
        for k in 0..4 {
            assert!((f.f_plus()[k] - 5.0 / 12.0).abs() < 1e-15);
            assert!((f.f_zero()[k] - 1.0 / 6.0).abs() < 1e-15);
            assert!((f.f_minus()[k] - 5.0 / 12.0).abs() < 1e-15);
        }
    }

    #[test]
    fn simulation_step_is_bitwise_equal_to_the_pure_composition() {
        let p = SchemeParams::from_diffusivity(1.0, 2.0 / 64.0, 1.0, 0.01, 1.5).unwrap();
        let grid = Grid1D::new(-1.0, 1.0, 64).unwrap();
        let mut sim = Simulation::new(p, grid, |x| (std::f64::consts::PI * x).sin()).unwrap();
        let mut pure = sim.distribution().clone();
        for _ in 0..25 {
            sim.step();
            pure = lbm_step(&pure, sim.params());
        }
        assert_eq!(sim.distribution(), &pure);
    }

    #[test]
    fn fused_path_stays_within_five_ulp_of_the_moment_path() {
        for &(lambda, alpha, s_e) in &[(1.0, 1.0, 1.5), (2.0, -1.0, 1.5), (1.0, -1.0, 0.7)] {
            let p = SchemeParams::from_diffusivity(lambda, 1.0 / 32.0, alpha, 0.15, s_e).unwrap();
            let grid = Grid1D::new(-16.0, 16.0, 512).unwrap();
            let f0 = init_at_equilibrium(|x: f64| (-x * x / (4.0 * 0.15)).exp() + 0.25, &grid, &p);
            let a = lbm_step(&f0, &p);
            let b = lbm_step_fused(&f0, &p);
            for k in 0..grid.n() {
                for (x, y) in [
                    (a.f_plus()[k], b.f_plus()[k]),
                    (a.f_zero()[k], b.f_zero()[k]),
                    (a.f_minus()[k], b.f_minus()[k]),
                ] {
                    assert!(
                        ulp_distance(x, y) <= 5,
                        "lambda {lambda} alpha {alpha} node {k}: {x} vs {y} differ by {} ulp",
                        ulp_distance(x, y)
                    );
                }
            }
        }
    }

    #[test]
    fn mass_is_conserved_over_a_thousand_steps() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let p = SchemeParams::from_relaxation(1.0, 0.25, -1.0, 0.8, 1.2).unwrap();
        let n = 64;
        let f = DistributionField::from_channels(
            (0..n).map(|_| rng.gen_range(0.0..1.0)).collect(),
            (0..n).map(|_| rng.gen_range(0.0..1.0)).collect(),
            (0..n).map(|_| rng.gen_range(0.0..1.0)).collect(),
        )
        .unwrap();
        let mass = |f: &DistributionField<f64>| -> f64 {
            moments_from_distributions(f, &p).rho().iter().sum()
        };
        let m0 = mass(&f);
        let mut g = f;
        for _ in 0..1000 {
            g = lbm_step(&g, &p);
        }
        let drift = (mass(&g) - m0).abs();
        assert!(drift <= 1e-12 * m0.abs() + 1e-12, "drift = {drift:e}");
    }

    #[test]
    fn single_precision_steps_stay_finite() {
        let p = SchemeParams::<f32>::from_diffusivity(1.0, 0.25, 1.0, 0.01, 1.5).unwrap();
        let grid = Grid1D::new(-1.0f32, 1.0, 8).unwrap();
        let mut sim = Simulation::new(p, grid, |x| (std::f32::consts::PI * x).sin()).unwrap();
        sim.advance(100);
        assert!(sim.density().iter().all(|r| r.is_finite()));
    }

    proptest! {
        #[test]
        fn moment_round_trip_is_exact_to_ten_ulp(
            fp in proptest::collection::vec(-1.0f64..1.0, 1..32),
            lambda_is_two in proptest::bool::ANY,
        ) {
            let n = fp.len();
            let f0: Vec<f64> = fp.iter().map(|x| 0.5 * x + 0.1).collect();
            let fm: Vec<f64> = fp.iter().rev().cloned().collect();
            let lambda = if lambda_is_two { 2.0 } else { 1.0 };
            let p = params(lambda, 1.0, 0.5, 0.5);
            let f = DistributionField::from_channels(fp, f0, fm).unwrap();
            let back = distributions_from_moments(&moments_from_distributions(&f, &p), &p);
            let tol = 10.0 * f64::EPSILON;
            for k in 0..n {
                prop_assert!((back.f_plus()[k] - f.f_plus()[k]).abs() <= tol);
                prop_assert!((back.f_zero()[k] - f.f_zero()[k]).abs() <= tol);
                prop_assert!((back.f_minus()[k] - f.f_minus()[k]).abs() <= tol);
            }
        }

        #[test]
        fn streaming_is_a_permutation_of_each_channel(
            values in proptest::collection::vec(-10.0f64..10.0, 2..40),
        ) {
            let shifted: Vec<f64> = values.iter().map(|v| v + 0.5).collect();
            let f = DistributionField::from_channels(
                values.clone(),
                shifted.clone(),
                values.iter().rev().cloned().collect(),
            ).unwrap();
            let s = stream(&f);
            for (before, after) in [
                (f.f_plus(), s.f_plus()),
                (f.f_zero(), s.f_zero()),
                (f.f_minus(), s.f_minus()),
            ] {
                let mut a = before.to_vec();
                let mut b = after.to_vec();
                a.sort_by(f64::total_cmp);
                b.sort_by(f64::total_cmp);
                prop_assert_eq!(a, b);
            }
        }

        #[test]
        fn one_step_is_linear_in_the_populations(
            seed in proptest::collection::vec(-1.0f64..1.0, 4..24),
            a in -2.0f64..2.0,
            b in -2.0f64..2.0,
        ) {
            let n = seed.len();
            let p = params(1.0, 1.0, 1.3, 0.7);
            let f = DistributionField::from_channels(
                seed.clone(),
                seed.iter().map(|x| x * 0.3 + 0.2).collect(),
                seed.iter().rev().cloned().collect(),
            ).unwrap();
            let g = DistributionField::from_channels(
                seed.iter().map(|x| 1.0 - x).collect(),
                seed.iter().map(|x| x * x).collect(),
                seed.iter().map(|x| 0.25 * x).collect(),
            ).unwrap();
            let combo = DistributionField::from_channels(
                (0..n).map(|k| a * f.f_plus()[k] + b * g.f_plus()[k]).collect(),
                (0..n).map(|k| a * f.f_zero()[k] + b * g.f_zero()[k]).collect(),
                (0..n).map(|k| a * f.f_minus()[k] + b * g.f_minus()[k]).collect(),
            ).unwrap();
            let lhs = lbm_step(&combo, &p);
            let rf = lbm_step(&f, &p);
            let rg = lbm_step(&g, &p);
            for k in 0..n {
                for (l, x, y) in [
                    (lhs.f_plus()[k], rf.f_plus()[k], rg.f_plus()[k]),
                    (lhs.f_zero()[k], rf.f_zero()[k], rg.f_zero()[k]),
                    (lhs.f_minus()[k], rf.f_minus()[k], rg.f_minus()[k]),
                ] {
                    prop_assert!((l - (a * x + b * y)).abs() <= 1e-12);
                }
            }
        }
    }
}

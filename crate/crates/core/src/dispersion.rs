//! Per-wavenumber analysis of the lattice update.
//!
//! On a periodic grid the combined collide-and-stream step acts on each
//! Fourier mode `exp(i xi k)` through a 3x3 amplification matrix: the
//! collision matrix with its rows phase-shifted by the streaming
//! displacement of the corresponding velocity channel. The eigenvalues of
//! that matrix decide how the mode grows, decays, or oscillates per step;
//! their principal logarithms are the discrete growth rates.
//!
//! The characteristic polynomial always has real coefficients: reversing
//! the sign of `xi` conjugates the matrix entrywise, while flipping the
//! `+`/`-` channels maps it back to the original spectrum. Eigenvalues
//! therefore come as real numbers or exact conjugate pairs, and the
//! classification leans on that structure: a genuinely complex pair means
//! the mode oscillates as it decays (propagative), an all-real spectrum
//! led by a positive root means plain damping (diffusive).
//!
//! For jointly small wavenumbers and momentum relaxation rates the two
//! leading rates follow a damped-oscillator law; [`asymptotic_roots`] and
//! [`discriminant_threshold`] provide that limit in closed form.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::params::SchemeParams;
use crate::scalar::Real;

/// Largest acceptable `||L v - mu v||_2` for a unit eigenvector before
/// the eigenvalue routines report failure instead of returning values.
pub const EIGENVECTOR_RESIDUAL_TOL: f64 = 1e-10;

/// Relative floor below which the imaginary part of a root pair is
/// treated as rounding noise rather than genuine oscillation.
const PAIR_IM_FLOOR: f64 = 1e-13;

/// Minimum per-step phase angle (the imaginary part of `log mu`) for a
/// pair to count as propagative.
const OSCILLATION_ANGLE_FLOOR: f64 = 1e-9;

/// One-step Fourier symbol of the scheme at a reduced wavenumber
/// `xi = k dx` (radians per cell).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplificationMatrix<T> {
    pub entries: [[Complex<T>; 3]; 3],
    pub xi: T,
}

/// Builds the symbol: the collision matrix with row `k` multiplied by the
/// streaming phase of channel `k`, namely `exp(-i xi)`, `1`, `exp(+i xi)`
/// for the `+`, `0`, `-` channels.
pub fn build_amplification<T: Real>(xi: T, p: &SchemeParams<T>) -> AmplificationMatrix<T> {
    debug_assert!(xi.is_finite(), "wavenumber must be finite");
    let c = crate::lattice::collision_matrix(p);
    let phases = [
        Complex::new(xi.cos(), -xi.sin()),
        Complex::one(),
        Complex::new(xi.cos(), xi.sin()),
    ];
    let mut entries = [[Complex::zero(); 3]; 3];
    for (i, phase) in phases.iter().enumerate() {
        for j in 0..3 {
            entries[i][j] = *phase * c[i][j];
        }
    }
    AmplificationMatrix { entries, xi }
}

fn det3<T: Real>(m: &[[Complex<T>; 3]; 3]) -> Complex<T> {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Determinant of the symbol; its modulus is `|(1 - s_j)(1 - s_e)|` at
/// every wavenumber because the streaming phases are unimodular.
pub fn determinant<T: Real>(m: &AmplificationMatrix<T>) -> Complex<T> {
    det3(&m.entries)
}

/// Roots of the characteristic cubic, keeping the structural distinction
/// between an all-real spectrum and one containing a conjugate pair.
#[derive(Debug, Clone, Copy)]
enum CubicRoots<T> {
    ThreeReal([T; 3]),
    /// `pair` carries the positive-imaginary member; its conjugate is the
    /// third root.
    OnePlusPair {
        real: T,
        pair: Complex<T>,
    },
}

/// Monic characteristic coefficients of the symbol:
/// `mu^3 + p2 mu^2 + p1 mu + p0`. The symmetry described in the module
/// docs makes them real; the rounding-level imaginary parts are dropped.
fn char_poly<T: Real>(l: &[[Complex<T>; 3]; 3]) -> (T, T, T) {
    let trace = l[0][0] + l[1][1] + l[2][2];
    let minors = (l[1][1] * l[2][2] - l[1][2] * l[2][1])
        + (l[0][0] * l[2][2] - l[0][2] * l[2][0])
        + (l[0][0] * l[1][1] - l[0][1] * l[1][0]);
    let det = det3(l);
    (-trace.re, minors.re, -det.re)
}

/// Cubic evaluation and derivative in Horner form, shared by the polish
/// steps below.
fn cubic_val<T: Real>(z: Complex<T>, p2: T, p1: T, p0: T) -> (Complex<T>, Complex<T>) {
    let two = T::of(2.0);
    let three = T::of(3.0);
    let f = ((z + p2) * z + p1) * z + p0;
    let df = (z * three + two * p2) * z + p1;
    (f, df)
}

/// A few guarded Newton steps on the monic cubic, keeping the iterate
/// with the smallest residual. Near a double root the iteration is only
/// linearly convergent, hence the generous step budget.
fn polish<T: Real>(z0: Complex<T>, p2: T, p1: T, p0: T) -> Complex<T> {
    let mut best = z0;
    let (mut best_f, _) = cubic_val(z0, p2, p1, p0);
    let mut z = z0;
    for _ in 0..30 {
        let (f, df) = cubic_val(z, p2, p1, p0);
        if f.norm_sqr() < best_f.norm_sqr() {
            best = z;
            best_f = f;
        }
        if f == Complex::zero() || df == Complex::zero() {
            break;
        }
        let step = f / df;
        z = z - step;
        if step.norm_sqr() <= z.norm_sqr() * T::of(1e-60) {
            let (f, _) = cubic_val(z, p2, p1, p0);
            if f.norm_sqr() < best_f.norm_sqr() {
                best = z;
            }
            break;
        }
    }
    best
}

/// Closed-form solution of `mu^3 + p2 mu^2 + p1 mu + p0 = 0` with real
/// coefficients, Newton-polished. The discriminant picks between the
/// trigonometric three-real-roots form and the Cardano one-real-plus-pair
/// form; the boundary (a repeated root) is safe in either branch.
fn solve_real_cubic<T: Real>(p2: T, p1: T, p0: T) -> CubicRoots<T> {
    let third = T::of(1.0 / 3.0);
    let half = T::of(0.5);
    let shift = p2 * third;
    // Depressed form t^3 + a t + b with mu = t - shift.
    let a = p1 - p2 * p2 * third;
    let b = p2 * third * (T::of(2.0) * p2 * p2 * T::of(1.0 / 9.0) - p1) + p0;
    let disc = T::of(-4.0) * a * a * a - T::of(27.0) * b * b;

    let finish_real = |roots: [T; 3]| -> CubicRoots<T> {
        let mut out = [T::zero(); 3];
        for (slot, t) in out.iter_mut().zip(roots) {
            *slot = polish(Complex::new(t - shift, T::zero()), p2, p1, p0).re;
        }
        CubicRoots::ThreeReal(out)
    };

    if disc >= T::zero() {
        if a >= T::zero() {
            // Only reachable with a = b = 0: a triple root at the shift.
            return finish_real([T::zero(); 3]);
        }
        let scale = T::of(2.0) * (-a * third).sqrt();
        let cosarg = (T::of(3.0) * b / (a * scale)).max(-T::one()).min(T::one());
        let phi = cosarg.acos() * third;
        let two_thirds_pi = T::of(2.0) * T::PI() * third;
        return finish_real([
            scale * phi.cos(),
            scale * (phi - two_thirds_pi).cos(),
            scale * (phi - T::of(2.0) * two_thirds_pi).cos(),
        ]);
    }

    // One real root, computed without cancellation between the cube roots.
    let s = (b * b * T::of(0.25) + a * a * a * T::of(1.0 / 27.0)).sqrt();
    let u = if b >= T::zero() {
        (-b * half - s).cbrt()
    } else {
        (-b * half + s).cbrt()
    };
    let t0 = if u == T::zero() {
        u
    } else {
        u - a / (T::of(3.0) * u)
    };
    // Remaining quadratic factor t^2 + t0 t + (a + t0^2).
    let d = T::of(3.0) * t0 * t0 + T::of(4.0) * a;
    if d <= T::zero() {
        // Rounding pushed a repeated real root across the boundary.
        let x = -t0 * half;
        let y = (-d).sqrt() * half;
        return finish_real([t0, x + y, x - y]);
    }
    let real = polish(Complex::new(t0 - shift, T::zero()), p2, p1, p0).re;
    let raw = Complex::new(-t0 * half - shift, d.sqrt() * half);
    let mut pair = polish(raw, p2, p1, p0);
    if pair.im < T::zero() {
        pair = pair.conj();
    }
    CubicRoots::OnePlusPair { real, pair }
}

/// Deterministic order: descending modulus, then descending real part,
/// then descending imaginary part, so the positive-imaginary member of a
/// conjugate pair comes first.
fn sorted_values<T: Real>(roots: &CubicRoots<T>) -> [Complex<T>; 3] {
    let mut v = match *roots {
        CubicRoots::ThreeReal(r) => r.map(|x| Complex::new(x, T::zero())),
        CubicRoots::OnePlusPair { real, pair } => {
            [Complex::new(real, T::zero()), pair, pair.conj()]
        }
    };
    v.sort_by(|a, b| {
        b.norm_sqr()
            .partial_cmp(&a.norm_sqr())
            .unwrap()
            .then(b.re.partial_cmp(&a.re).unwrap())
            .then(b.im.partial_cmp(&a.im).unwrap())
    });
    v
}

/// Bilinear cross product; orthogonality here means a vanishing
/// unconjugated dot product, which is the right notion for null vectors
/// of a complex matrix.
fn cross<T: Real>(a: &[Complex<T>; 3], b: &[Complex<T>; 3]) -> [Complex<T>; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm_sqr3<T: Real>(v: &[Complex<T>; 3]) -> T {
    v[0].norm_sqr() + v[1].norm_sqr() + v[2].norm_sqr()
}

/// Null vector of `l - mu I` via the largest cross product of its rows,
/// falling back to a single-row complement when the rank drops further.
fn null_vector<T: Real>(l: &[[Complex<T>; 3]; 3], mu: Complex<T>) -> [Complex<T>; 3] {
    let mut b = *l;
    for k in 0..3 {
        b[k][k] = b[k][k] - mu;
    }
    let candidates = [
        cross(&b[0], &b[1]),
        cross(&b[0], &b[2]),
        cross(&b[1], &b[2]),
    ];
    let mut v = candidates
        .into_iter()
        .max_by(|u, w| norm_sqr3(u).partial_cmp(&norm_sqr3(w)).unwrap())
        .unwrap();
    if norm_sqr3(&v) <= T::of(1e-40) {
        // Rank at most one: any vector annihilated by the largest row works.
        let row = b
            .into_iter()
            .max_by(|u, w| norm_sqr3(u).partial_cmp(&norm_sqr3(w)).unwrap())
            .unwrap();
        if norm_sqr3(&row) <= T::of(1e-40) {
            return [Complex::one(), Complex::zero(), Complex::zero()];
        }
        let axes = [
            [Complex::one(), Complex::zero(), Complex::zero()],
            [Complex::zero(), Complex::one(), Complex::zero()],
            [Complex::zero(), Complex::zero(), Complex::one()],
        ];
        v = axes
            .into_iter()
            .map(|e| cross(&row, &e))
            .max_by(|u, w| norm_sqr3(u).partial_cmp(&norm_sqr3(w)).unwrap())
            .unwrap();
    }
    let scale = norm_sqr3(&v).sqrt();
    v.map(|c| c / scale)
}

/// One eigenvalue with a unit eigenvector that passed the residual gate.
#[derive(Debug, Clone, Copy)]
pub struct Eigenpair<T> {
    pub value: Complex<T>,
    pub vector: [Complex<T>; 3],
}

fn verified_pairs<T: Real>(
    m: &AmplificationMatrix<T>,
    roots: &CubicRoots<T>,
) -> Result<[Eigenpair<T>; 3]> {
    let values = sorted_values(roots);
    let mut out = [Eigenpair {
        value: Complex::zero(),
        vector: [Complex::zero(); 3],
    }; 3];
    for (slot, mu) in out.iter_mut().zip(values) {
        let v = null_vector(&m.entries, mu);
        let mut residual = T::zero();
        for k in 0..3 {
            let row = m.entries[k][0] * v[0] + m.entries[k][1] * v[1] + m.entries[k][2] * v[2]
                - mu * v[k];
            residual = residual + row.norm_sqr();
        }
        let residual = residual.sqrt();
        if !(residual <= T::of(EIGENVECTOR_RESIDUAL_TOL)) {
            return Err(Error::EigenvalueResidual {
                xi: m.xi.to_f64().unwrap_or(f64::NAN),
                residual: residual.to_f64().unwrap_or(f64::NAN),
                tolerance: EIGENVECTOR_RESIDUAL_TOL,
            });
        }
        *slot = Eigenpair {
            value: mu,
            vector: v,
        };
    }
    Ok(out)
}

fn roots_of<T: Real>(m: &AmplificationMatrix<T>) -> CubicRoots<T> {
    let (p2, p1, p0) = char_poly(&m.entries);
    solve_real_cubic(p2, p1, p0)
}

/// The three eigenvalues of the symbol, each verified against a computed
/// eigenvector to [`EIGENVECTOR_RESIDUAL_TOL`] and sorted as described on
/// [`DispersionResult`]. Fails only close to parameter points where two
/// modes collide and the matrix loses a full eigenbasis.
pub fn eigenvalues<T: Real>(m: &AmplificationMatrix<T>) -> Result<[Complex<T>; 3]> {
    Ok(eigensystem(m)?.map(|pair| pair.value))
}

/// Eigenvalues together with their unit eigenvectors, same order and
/// residual gate as [`eigenvalues`].
pub fn eigensystem<T: Real>(m: &AmplificationMatrix<T>) -> Result<[Eigenpair<T>; 3]> {
    verified_pairs(m, &roots_of(m))
}

/// Coarse character of a mode, read off the spectrum at one wavenumber.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// All eigenvalues real (to rounding) and the dominant one positive:
    /// the mode relaxes without oscillating.
    Diffusive,
    /// A genuinely complex conjugate pair is present: the mode oscillates
    /// as it decays, i.e. it carries a wave.
    Propagative,
    /// Anything else, e.g. an all-real spectrum led by a negative root.
    Other,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::Diffusive => "diffusive",
            Classification::Propagative => "propagative",
            Classification::Other => "other",
        })
    }
}

fn classify<T: Real>(roots: &CubicRoots<T>) -> Classification {
    let as_all_real = |vals: [T; 3]| {
        let dominant = vals
            .into_iter()
            .max_by(|a, b| {
                a.abs()
                    .partial_cmp(&b.abs())
                    .unwrap()
                    .then(a.partial_cmp(b).unwrap())
            })
            .unwrap();
        if dominant > T::zero() {
            Classification::Diffusive
        } else {
            Classification::Other
        }
    };
    match *roots {
        CubicRoots::ThreeReal(vals) => as_all_real(vals),
        CubicRoots::OnePlusPair { real, pair } => {
            let floor = T::of(PAIR_IM_FLOOR) * T::one().max(pair.norm());
            if pair.im <= floor {
                return as_all_real([real, pair.re, pair.re]);
            }
            if pair.arg().abs() > T::of(OSCILLATION_ANGLE_FLOOR) {
                Classification::Propagative
            } else {
                Classification::Other
            }
        }
    }
}

/// Spectrum of one wavenumber: the eigenvalues, their principal
/// logarithms (per-step growth rate and phase), and the classification.
///
/// Eigenvalues are sorted by descending modulus, ties broken by
/// descending real then imaginary part; `zeta[k]` is the logarithm of
/// `eigenvalues[k]`.
#[derive(Debug, Clone, Copy)]
pub struct DispersionResult<T> {
    pub xi: T,
    pub eigenvalues: [Complex<T>; 3],
    pub zeta: [Complex<T>; 3],
    pub classification: Classification,
}

/// Analyzes a single wavenumber; `xi` must lie in `[0, pi]`, the
/// non-redundant half of the Brillouin zone.
pub fn analyze<T: Real>(xi: T, p: &SchemeParams<T>) -> Result<DispersionResult<T>> {
    if !(xi >= T::zero() && xi <= T::PI()) {
        return Err(Error::invalid(format!("xi outside [0, pi]: got {xi}")));
    }
    let m = build_amplification(xi, p);
    let roots = roots_of(&m);
    let eigenvalues = verified_pairs(&m, &roots)?.map(|pair| pair.value);
    Ok(DispersionResult {
        xi,
        eigenvalues,
        zeta: eigenvalues.map(|mu| mu.ln()),
        classification: classify(&roots),
    })
}

/// [`analyze`] over a list of wavenumbers.
pub fn sweep<T: Real>(p: &SchemeParams<T>, xis: &[T]) -> Result<Vec<DispersionResult<T>>> {
    xis.iter().map(|&xi| analyze(xi, p)).collect()
}

/// Inputs of the joint small-wavenumber, small-relaxation-rate limit: the
/// scheme approaches the quadratic rate law
/// `omega^2 + s1 omega + c^2 kappa^2 = 0` with `c^2 = (4 + alpha) / 6`
/// when `s_j = eps s1` and `xi = eps kappa` shrink together.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticInputs<T> {
    pub s1: T,
    pub kappa: T,
    pub alpha: T,
}

fn check_limit_inputs<T: Real>(s1: T, alpha: T) -> Result<T> {
    if !(s1 > T::zero()) || !s1.is_finite() {
        return Err(Error::invalid(format!(
            "s1 must be positive and finite: got {s1}"
        )));
    }
    if !(alpha > T::of(-4.0)) || !alpha.is_finite() {
        return Err(Error::invalid(format!("alpha must exceed -4: got {alpha}")));
    }
    Ok(((T::of(4.0) + alpha) / T::of(6.0)).sqrt())
}

/// Roots of the limit quadratic, `+` branch first: the larger real root,
/// or the positive-imaginary member of the conjugate pair. At
/// `kappa = 0` the roots are exactly `0` and `-s1`.
pub fn asymptotic_roots<T: Real>(inp: &AsymptoticInputs<T>) -> Result<(Complex<T>, Complex<T>)> {
    let c = check_limit_inputs(inp.s1, inp.alpha)?;
    if !inp.kappa.is_finite() {
        return Err(Error::invalid(format!(
            "kappa must be finite: got {}",
            inp.kappa
        )));
    }
    if inp.kappa == T::zero() {
        return Ok((Complex::zero(), Complex::new(-inp.s1, T::zero())));
    }
    let half = T::of(0.5);
    let disc = inp.s1 * inp.s1 - T::of(4.0) * c * c * inp.kappa * inp.kappa;
    if disc >= T::zero() {
        let root = disc.sqrt();
        Ok((
            Complex::new((-inp.s1 + root) * half, T::zero()),
            Complex::new((-inp.s1 - root) * half, T::zero()),
        ))
    } else {
        let x = -inp.s1 * half;
        let y = (-disc).sqrt() * half;
        Ok((Complex::new(x, y), Complex::new(x, -y)))
    }
}

/// Scaled wavenumber at which the limit law of [`asymptotic_roots`]
/// switches from two real rates to a conjugate pair:
/// `kappa = s1 / (2 sqrt((4 + alpha) / 6))`.
pub fn discriminant_threshold<T: Real>(s1: T, alpha: T) -> Result<T> {
    let c = check_limit_inputs(s1, alpha)?;
    Ok(s1 / (T::of(2.0) * c))
}

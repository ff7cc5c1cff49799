//! Experiment presets, convergence tables, and CSV/plot-script emission.
//!
//! The central object is [`ExperimentSpec`]: an initial profile, scheme
//! parameters, a final time, and a list of grid resolutions. Running it
//! marches the lattice solver at every resolution and measures errors
//! against the closed-form diffusion solution, the staggered acoustic
//! solver, or both, on the shared node set. The relaxation rate `s_j` is
//! re-derived at every resolution from the fixed diffusivity, so it
//! shrinks proportionally to the grid spacing; the resulting tables show
//! which reference the lattice solution actually approaches under
//! refinement.
//!
//! Everything here is pinned to `f64`: these are the shipped experiments,
//! not the generic numerics underneath them.

use std::path::Path;

use crate::dispersion::DispersionResult;
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::haway::{AcousticParams, HawaySolver};
use crate::lattice::Simulation;
use crate::params::SchemeParams;
use crate::reference::{self, AnalyticProfile, ErrorReport, ProfileKind};

/// Which references an experiment measures its solution against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReferenceSet {
    pub diffusion_exact: bool,
    pub haway: bool,
}

impl ReferenceSet {
    pub fn both() -> Self {
        ReferenceSet {
            diffusion_exact: true,
            haway: true,
        }
    }

    pub fn diffusion_only() -> Self {
        ReferenceSet {
            diffusion_exact: true,
            haway: false,
        }
    }

    pub fn haway_only() -> Self {
        ReferenceSet {
            diffusion_exact: false,
            haway: true,
        }
    }
}

/// A refinement study: one physical setup run at several resolutions.
///
/// Validation happens at construction; any spec that exists can be run.
/// Levels must be strictly increasing cell counts of at least two cells.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    profile: AnalyticProfile<f64>,
    alpha: f64,
    lambda: f64,
    s_e: f64,
    t_final: f64,
    levels: Vec<usize>,
    references: ReferenceSet,
}

impl ExperimentSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        initial_condition: ProfileKind,
        x_min: f64,
        x_max: f64,
        mu: f64,
        alpha: f64,
        lambda: f64,
        s_e: f64,
        t_final: f64,
        levels: Vec<usize>,
        references: ReferenceSet,
    ) -> Result<Self> {
        let profile = AnalyticProfile::new(initial_condition, mu, x_min, x_max)?;
        if levels.is_empty() {
            return Err(Error::invalid("levels must name at least one resolution"));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!(
                "levels must be strictly increasing: got {levels:?}"
            )));
        }
        if levels[0] < 2 {
            return Err(Error::invalid(format!(
                "levels need at least two cells: got {}",
                levels[0]
            )));
        }
        if !(t_final >= 0.0) || !t_final.is_finite() {
            return Err(Error::invalid(format!(
                "t_final must be finite and non-negative: got {t_final}"
            )));
        }
        let spec = ExperimentSpec {
            profile,
            alpha,
            lambda,
            s_e,
            t_final,
            levels,
            references,
        };
        // Trips the full parameter-window validation (alpha, lambda, s_e,
        // positivity of the derived relaxation rate) at the first level.
        spec.params_at(spec.levels[0])?;
        Ok(spec)
    }

    pub fn profile(&self) -> AnalyticProfile<f64> {
        self.profile
    }

    pub fn initial_condition(&self) -> ProfileKind {
        self.profile.kind()
    }

    pub fn x_min(&self) -> f64 {
        self.profile.x_min()
    }

    pub fn x_max(&self) -> f64 {
        self.profile.x_max()
    }

    pub fn mu(&self) -> f64 {
        self.profile.mu()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn s_e(&self) -> f64 {
        self.s_e
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn references(&self) -> ReferenceSet {
        self.references
    }

    /// The grid this experiment uses at `n` cells.
    pub fn grid_at(&self, n: usize) -> Result<Grid1D<f64>> {
        Grid1D::new(self.x_min(), self.x_max(), n)
    }

    /// Scheme parameters at `n` cells: `s_j` is re-derived from the fixed
    /// diffusivity at the level's grid spacing.
    pub fn params_at(&self, n: usize) -> Result<SchemeParams<f64>> {
        let grid = self.grid_at(n)?;
        SchemeParams::from_diffusivity(self.lambda, grid.dx(), self.alpha, self.mu(), self.s_e)
    }
}

/// One resolution of a convergence study. Error columns are present when
/// the corresponding reference was requested; order columns hold the
/// per-pair observed order against the coarser neighbor row, so the first
/// row never has one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub dx: f64,
    pub s_j: f64,
    pub l2_diff: Option<f64>,
    pub linf_diff: Option<f64>,
    pub l2_haway: Option<f64>,
    pub linf_haway: Option<f64>,
    pub order_l2_haway: Option<f64>,
    pub order_linf_haway: Option<f64>,
}

/// Outcome of [`run_experiment`]: rows ordered by increasing `n`, plus
/// the levels that had to be abandoned and why.
#[derive(Debug, Clone, Default)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub skipped: Vec<(usize, String)>,
}

impl ConvergenceTable {
    /// Least-squares slopes of the acoustic-reference errors against the
    /// grid spacing, `(l2 slope, linf slope)`, over every row that has
    /// them.
    pub fn fitted_orders_vs_haway(&self) -> Result<(f64, f64)> {
        let dx: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.l2_haway.is_some())
            .map(|r| r.dx)
            .collect();
        let l2: Vec<f64> = self.rows.iter().filter_map(|r| r.l2_haway).collect();
        let linf: Vec<f64> = self.rows.iter().filter_map(|r| r.linf_haway).collect();
        Ok((
            reference::fit_order(&dx, &l2)?,
            reference::fit_order(&dx, &linf)?,
        ))
    }
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn run_level(spec: &ExperimentSpec, n: usize) -> std::result::Result<ConvergenceRow, String> {
    let fail = |e: Error| e.to_string();
    let grid = spec.grid_at(n).map_err(fail)?;
    let p = spec.params_at(n).map_err(fail)?;
    let steps = p.steps_for(spec.t_final()).map_err(fail)?;
    let profile = spec.profile();

    let mut sim = Simulation::new(p, grid, |x| profile.initial(x)).map_err(fail)?;
    sim.advance(steps);
    let rho = sim.density();
    if !all_finite(&rho) {
        return Err("lattice density became non-finite (stability violation)".into());
    }

    let mut row = ConvergenceRow {
        n,
        dx: grid.dx(),
        s_j: p.s_j(),
        l2_diff: None,
        linf_diff: None,
        l2_haway: None,
        linf_haway: None,
        order_l2_haway: None,
        order_linf_haway: None,
    };

    if spec.references().diffusion_exact {
        let exact = profile.sample(&grid, spec.t_final());
        let e = reference::error_norms(&rho, &exact, grid.dx()).map_err(fail)?;
        row.l2_diff = Some(e.l2);
        row.linf_diff = Some(e.linf);
    }

    if spec.references().haway {
        let ap = AcousticParams::from_scheme(&p);
        let state = crate::haway::haway_run(|x| profile.initial(x), &ap, &grid, spec.t_final())
            .map_err(fail)?;
        if !all_finite(state.rho()) {
            return Err("acoustic density became non-finite (stability violation)".into());
        }
        let e = reference::error_norms(&rho, state.rho(), grid.dx()).map_err(fail)?;
        row.l2_haway = Some(e.l2);
        row.linf_haway = Some(e.linf);
    }

    Ok(row)
}

fn pair_order(dx_coarse: f64, e_coarse: f64, dx_fine: f64, e_fine: f64) -> Option<f64> {
    reference::convergence_order(&[dx_coarse, dx_fine], &[e_coarse, e_fine])
        .ok()
        .map(|v| v[0])
}

/// Runs every level of an experiment and assembles the table. A level
/// that cannot run to completion (misaligned final time, non-finite
/// fields) is recorded in `skipped` with the reason instead of poisoning
/// the table.
pub fn run_experiment(spec: &ExperimentSpec) -> ConvergenceTable {
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    let mut skipped = Vec::new();
    for &n in spec.levels() {
        match run_level(spec, n) {
            Ok(row) => rows.push(row),
            Err(reason) => skipped.push((n, reason)),
        }
    }
    for i in 1..rows.len() {
        let prev = rows[i - 1];
        let cur = &mut rows[i];
        if let (Some(a), Some(b)) = (prev.l2_haway, cur.l2_haway) {
            cur.order_l2_haway = pair_order(prev.dx, a, cur.dx, b);
        }
        if let (Some(a), Some(b)) = (prev.linf_haway, cur.linf_haway) {
            cur.order_linf_haway = pair_order(prev.dx, a, cur.dx, b);
        }
    }
    ConvergenceTable { rows, skipped }
}

/// A density profile on grid nodes: the computed solution next to the
/// closed-form diffusion value at the same time.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    x: Vec<f64>,
    solution: Vec<f64>,
    reference: Vec<f64>,
}

impl Profile {
    pub fn new(x: Vec<f64>, solution: Vec<f64>, reference: Vec<f64>) -> Result<Self> {
        if x.len() != solution.len() {
            return Err(Error::LengthMismatch {
                expected: x.len(),
                got: solution.len(),
            });
        }
        if x.len() != reference.len() {
            return Err(Error::LengthMismatch {
                expected: x.len(),
                got: reference.len(),
            });
        }
        Ok(Profile {
            x,
            solution,
            reference,
        })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn solution(&self) -> &[f64] {
        &self.solution
    }

    pub fn reference(&self) -> &[f64] {
        &self.reference
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

fn profile_scaffold(
    spec: &ExperimentSpec,
    n: usize,
) -> Result<(Grid1D<f64>, SchemeParams<f64>, usize)> {
    let grid = spec.grid_at(n)?;
    let p = spec.params_at(n)?;
    let steps = p.steps_for(spec.t_final())?;
    Ok((grid, p, steps))
}

/// Lattice solution at `t_final` on `n` cells, with the diffusion
/// solution as the reference column.
pub fn lbm_profile(spec: &ExperimentSpec, n: usize) -> Result<Profile> {
    let (grid, p, steps) = profile_scaffold(spec, n)?;
    let profile = spec.profile();
    let mut sim = Simulation::new(p, grid, |x| profile.initial(x))?;
    sim.advance(steps);
    Profile::new(
        grid.nodes().collect(),
        sim.density(),
        profile.sample(&grid, spec.t_final()),
    )
}

/// Staggered acoustic solution at `t_final` on `n` cells, with the
/// diffusion solution as the reference column.
pub fn haway_profile(spec: &ExperimentSpec, n: usize) -> Result<Profile> {
    let (grid, p, _) = profile_scaffold(spec, n)?;
    let ap = AcousticParams::from_scheme(&p);
    let profile = spec.profile();
    let state = crate::haway::haway_run(|x| profile.initial(x), &ap, &grid, spec.t_final())?;
    Profile::new(
        grid.nodes().collect(),
        state.rho().to_vec(),
        profile.sample(&grid, spec.t_final()),
    )
}

/// Closed-form diffusion solution sampled at `t_final` on `n` cells; the
/// solution and reference columns coincide.
pub fn exact_profile(spec: &ExperimentSpec, n: usize) -> Result<Profile> {
    let grid = spec.grid_at(n)?;
    let values = spec.profile().sample(&grid, spec.t_final());
    Profile::new(grid.nodes().collect(), values.clone(), values)
}

/// Compares the lattice post-collision momentum at `t_final` against the
/// acoustic solver's momentum averaged onto the same nodes and time.
pub fn momentum_comparison(spec: &ExperimentSpec, n: usize) -> Result<ErrorReport<f64>> {
    let (grid, p, steps) = profile_scaffold(spec, n)?;
    let profile = spec.profile();

    let mut sim = Simulation::new(p, grid, |x| profile.initial(x))?;
    sim.advance(steps);
    let factor = 1.0 - p.s_j();
    let j_lattice: Vec<f64> = sim.moments().j().iter().map(|&j| factor * j).collect();

    let ap = AcousticParams::from_scheme(&p);
    let mut solver = HawaySolver::new(ap, &grid.sample(|x| profile.initial(x)))?;
    solver.advance(steps);
    let j_acoustic = solver.momentum_on_nodes();

    reference::error_norms(&j_lattice, &j_acoustic, grid.dx())
}

/// A strict local maximum of a density profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub x: f64,
    pub value: f64,
}

/// Peak structure of a final profile: every strict local maximum within
/// 5% of the global maximum, plus the center and maximum values.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakReport {
    pub peaks: Vec<Peak>,
    pub center_value: f64,
    pub max_value: f64,
}

fn peak_report(profile: &Profile, grid: &Grid1D<f64>) -> PeakReport {
    let v = profile.solution();
    let n = v.len();
    let max_value = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let threshold = 0.95 * max_value;
    let mut peaks = Vec::new();
    for k in 0..n {
        let left = v[(k + n - 1) % n];
        let right = v[(k + 1) % n];
        if v[k] > left && v[k] > right && v[k] >= threshold {
            peaks.push(Peak {
                x: profile.x()[k],
                value: v[k],
            });
        }
    }
    PeakReport {
        peaks,
        center_value: v[grid.nearest_node(0.0)],
        max_value,
    }
}

/// Propagation demonstration: a Gaussian pulse on `[-16, 16]` with 2048
/// cells marched to `t = 6` (384 steps) at `alpha = -1`, `lambda = 1`.
/// Returns the final profile (diffusion solution as reference) and its
/// peak structure. At small diffusivity the pulse stays a single centered
/// peak; at large diffusivity it splits into two symmetric maxima and the
/// center value drops below the peak value.
pub fn propagation_demo(mu: f64) -> Result<(Profile, PeakReport)> {
    let n = 2048;
    let spec = ExperimentSpec::new(
        ProfileKind::Gaussian,
        -16.0,
        16.0,
        mu,
        -1.0,
        1.0,
        1.5,
        6.0,
        vec![n],
        ReferenceSet::diffusion_only(),
    )?;
    let profile = lbm_profile(&spec, n)?;
    let report = peak_report(&profile, &spec.grid_at(n)?);
    Ok((profile, report))
}

/// Sine study at the resolutions where the solution is still visually
/// close to the diffusion solution: `{8, 16, 32, 64}` cells on `[-1, 1]`
/// with `mu = 0.01`, `alpha = 1`, `lambda = 1`, `s_e = 1.5`, `t = 5`.
pub fn sine_coarse() -> ExperimentSpec {
    ExperimentSpec::new(
        ProfileKind::Sine,
        -1.0,
        1.0,
        0.01,
        1.0,
        1.0,
        1.5,
        5.0,
        vec![8, 16, 32, 64],
        ReferenceSet::both(),
    )
    .expect("preset parameters are admissible")
}

/// Sine study continued to `{512, 1024, 2048, 4096}` cells, the range
/// where the distance to the diffusion solution stops shrinking while
/// the distance to the acoustic solver keeps falling at first order.
pub fn sine_fine() -> ExperimentSpec {
    ExperimentSpec::new(
        ProfileKind::Sine,
        -1.0,
        1.0,
        0.01,
        1.0,
        1.0,
        1.5,
        5.0,
        vec![512, 1024, 2048, 4096],
        ReferenceSet::both(),
    )
    .expect("preset parameters are admissible")
}

/// Gaussian study on `[-16, 16]` from 64 to 16384 cells, same physical
/// parameters as the sine studies.
pub fn gaussian_study() -> ExperimentSpec {
    let levels = (6..=14).map(|k| 1usize << k).collect();
    ExperimentSpec::new(
        ProfileKind::Gaussian,
        -16.0,
        16.0,
        0.01,
        1.0,
        1.0,
        1.5,
        5.0,
        levels,
        ReferenceSet::both(),
    )
    .expect("preset parameters are admissible")
}

fn push_float(out: &mut String, v: f64) {
    use std::fmt::Write;
    write!(out, "{v:.16e}").expect("writing to a String cannot fail");
}

fn push_opt(out: &mut String, v: Option<f64>) {
    if let Some(v) = v {
        push_float(out, v);
    }
}

/// Anything the harness can serialize as a CSV file: a header row, one
/// record per row, floats printed with 17 significant digits so that
/// re-parsing reproduces them bit-exactly. Absent optional values become
/// empty fields.
pub trait CsvDocument {
    fn to_csv(&self) -> String;
}

impl CsvDocument for ConvergenceTable {
    fn to_csv(&self) -> String {
        let mut out = String::from(
            "n,dx,s_j,l2_diff,linf_diff,l2_haway,linf_haway,order_l2_haway,order_linf_haway\n",
        );
        for r in &self.rows {
            use std::fmt::Write;
            write!(out, "{},", r.n).unwrap();
            push_float(&mut out, r.dx);
            out.push(',');
            push_float(&mut out, r.s_j);
            out.push(',');
            push_opt(&mut out, r.l2_diff);
            out.push(',');
            push_opt(&mut out, r.linf_diff);
            out.push(',');
            push_opt(&mut out, r.l2_haway);
            out.push(',');
            push_opt(&mut out, r.linf_haway);
            out.push(',');
            push_opt(&mut out, r.order_l2_haway);
            out.push(',');
            push_opt(&mut out, r.order_linf_haway);
            out.push('\n');
        }
        out
    }
}

impl CsvDocument for Profile {
    fn to_csv(&self) -> String {
        let mut out = String::from("x,rho_lbm,rho_ref\n");
        for k in 0..self.len() {
            push_float(&mut out, self.x[k]);
            out.push(',');
            push_float(&mut out, self.solution[k]);
            out.push(',');
            push_float(&mut out, self.reference[k]);
            out.push('\n');
        }
        out
    }
}

impl CsvDocument for [DispersionResult<f64>] {
    fn to_csv(&self) -> String {
        let mut out = String::from("xi,re_ev1,im_ev1,re_ev2,im_ev2,re_ev3,im_ev3,classification\n");
        for r in self {
            push_float(&mut out, r.xi);
            for ev in &r.eigenvalues {
                out.push(',');
                push_float(&mut out, ev.re);
                out.push(',');
                push_float(&mut out, ev.im);
            }
            out.push(',');
            out.push_str(&r.classification.to_string());
            out.push('\n');
        }
        out
    }
}

impl CsvDocument for Vec<DispersionResult<f64>> {
    fn to_csv(&self) -> String {
        self.as_slice().to_csv()
    }
}

/// Writes the document to `path`, reporting I/O failures with the path.
pub fn emit_csv<D: CsvDocument + ?Sized>(doc: &D, path: &Path) -> Result<()> {
    std::fs::write(path, doc.to_csv()).map_err(|e| Error::io(path, e))
}

/// Writes already-rendered text (e.g. a plot script) to `path`.
pub fn emit_text(text: &str, path: &Path) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Gnuplot commands for a convergence CSV: both error norms against both
/// references on log-log axes.
pub fn convergence_plot_script(csv_path: &str) -> String {
    format!(
        "# Convergence study: error norms against grid spacing.\n\
         set datafile separator \",\"\n\
         set key autotitle columnhead\n\
         set logscale xy\n\
         set xlabel \"dx\"\n\
         set ylabel \"error\"\n\
         plot \"{csv_path}\" using \"dx\":\"l2_diff\" with linespoints, \\\n\
         \x20    \"\" using \"dx\":\"linf_diff\" with linespoints, \\\n\
         \x20    \"\" using \"dx\":\"l2_haway\" with linespoints, \\\n\
         \x20    \"\" using \"dx\":\"linf_haway\" with linespoints\n"
    )
}

/// Gnuplot commands for a profile CSV: solution and reference overlaid.
pub fn profile_plot_script(csv_path: &str) -> String {
    format!(
        "# Final density profile with the diffusion reference overlaid.\n\
         set datafile separator \",\"\n\
         set key autotitle columnhead\n\
         set xlabel \"x\"\n\
         set ylabel \"rho\"\n\
         plot \"{csv_path}\" using \"x\":\"rho_lbm\" with lines, \\\n\
         \x20    \"\" using \"x\":\"rho_ref\" with lines dashtype 2\n"
    )
}

/// Gnuplot commands for a dispersion CSV: eigenvalue real and imaginary
/// parts over the wavenumber range.
pub fn dispersion_plot_script(csv_path: &str) -> String {
    format!(
        "# Eigenvalues of the per-wavenumber update matrix.\n\
         set datafile separator \",\"\n\
         set key autotitle columnhead\n\
         set xlabel \"xi\"\n\
         set ylabel \"eigenvalue\"\n\
         plot \"{csv_path}\" using \"xi\":\"re_ev1\" with lines, \\\n\
         \x20    \"\" using \"xi\":\"im_ev1\" with lines, \\\n\
         \x20    \"\" using \"xi\":\"re_ev2\" with lines, \\\n\
         \x20    \"\" using \"xi\":\"im_ev2\" with lines, \\\n\
         \x20    \"\" using \"xi\":\"re_ev3\" with lines, \\\n\
         \x20    \"\" using \"xi\":\"im_ev3\" with lines\n"
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine_spec(t_final: f64, levels: Vec<usize>) -> ExperimentSpec {
        ExperimentSpec::new(
            ProfileKind::Sine,
            -1.0,
            1.0,
            0.01,
            1.0,
            1.0,
            1.5,
            t_final,
            levels,
            ReferenceSet::both(),
        )
        .unwrap()
    }

    #[test]
    fn spec_validation_names_the_constraint() {
        let bad_alpha = ExperimentSpec::new(
            ProfileKind::Sine,
            -1.0,
            1.0,
            0.01,
            3.0,
            1.0,
            1.5,
            5.0,
            vec![8],
            ReferenceSet::both(),
        );
        assert!(bad_alpha.unwrap_err().to_string().contains("alpha"));

        let no_levels = ExperimentSpec::new(
            ProfileKind::Sine,
            -1.0,
            1.0,
            0.01,
            1.0,
            1.0,
            1.5,
            5.0,
            vec![],
            ReferenceSet::both(),
        );
        assert!(no_levels.unwrap_err().to_string().contains("levels"));

        let unsorted = ExperimentSpec::new(
            ProfileKind::Sine,
            -1.0,
            1.0,
            0.01,
            1.0,
            1.0,
            1.5,
            5.0,
            vec![16, 8],
            ReferenceSet::both(),
        );
        assert!(unsorted.unwrap_err().to_string().contains("increasing"));

        let odd_domain = ExperimentSpec::new(
            ProfileKind::Sine,
            0.0,
            1.5,
            0.01,
            1.0,
            1.0,
            1.5,
            5.0,
            vec![8],
            ReferenceSet::both(),
        );
        assert!(odd_domain.unwrap_err().to_string().contains("domain"));

        let negative_time = ExperimentSpec::new(
            ProfileKind::Sine,
            -1.0,
            1.0,
            0.01,
            1.0,
            1.0,
            1.5,
            -1.0,
            vec![8],
            ReferenceSet::both(),
        );
        assert!(negative_time.unwrap_err().to_string().contains("t_final"));
    }

    #[test]
    fn zero_time_runs_reproduce_the_sampled_initial_condition() {
        let table = run_experiment(&sine_spec(0.0, vec![8, 16]));
        assert!(table.skipped.is_empty());
        assert_eq!(table.rows.len(), 2);
        for row in &table.rows {
            assert!(row.l2_diff.unwrap() <= 1e-13);
            assert!(row.linf_diff.unwrap() <= 1e-13);
            assert!(row.l2_haway.unwrap() <= 1e-13);
            assert!(row.linf_haway.unwrap() <= 1e-13);
        }
    }

    #[test]
    fn coarse_sine_errors_shrink_and_s_j_tracks_the_spacing() {
        let table = run_experiment(&sine_spec(1.0, vec![8, 16, 32]));
        assert!(table.skipped.is_empty());
        assert_eq!(table.rows.len(), 3);
        for pair in table.rows.windows(2) {
            assert!(pair[1].linf_diff.unwrap() < pair[0].linf_diff.unwrap());
            assert!(pair[1].l2_diff.unwrap() < pair[0].l2_diff.unwrap());
        }
        for row in &table.rows {
            let expected = crate::params::derive_s_j(0.01, 1.0, 1.0, 2.0 / row.n as f64).unwrap();
            assert_eq!(row.s_j, expected);
            assert!((row.dx - 2.0 / row.n as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn fine_levels_close_on_the_acoustic_solver_while_the_diffusion_gap_persists() {
        let table = run_experiment(&sine_spec(1.0, vec![512, 1024]));
        assert!(table.skipped.is_empty());
        let coarse = &table.rows[0];
        let fine = &table.rows[1];
        // The two lattice solvers converge to each other under refinement.
        assert!(fine.l2_haway.unwrap() < 0.5 * coarse.l2_haway.unwrap());
        assert!(fine.linf_haway.unwrap() < 0.5 * coarse.linf_haway.unwrap());
        // The distance to the diffusion solution saturates instead: at this
        // diffusivity it is dominated by the acoustic correction, which does
        // not shrink with dx when dt is tied to dx.
        assert!(fine.linf_diff.unwrap() > 0.9 * coarse.linf_diff.unwrap());
        // s_j roughly halves when dx does.
        let ratio = fine.s_j / coarse.s_j;
        assert!((0.45..=0.55).contains(&ratio), "ratio = {ratio}");
    }

    #[test]
    fn misaligned_levels_are_skipped_with_a_reason() {
        // dt = dx = 2/n, so t = 0.5 needs n divisible by 8.
        let table = run_experiment(&sine_spec(0.5, vec![8, 10, 16]));
        assert_eq!(table.rows.len(), 2);
        assert_eq!(table.rows[0].n, 8);
        assert_eq!(table.rows[1].n, 16);
        assert_eq!(table.skipped.len(), 1);
        assert_eq!(table.skipped[0].0, 10);
        assert!(table.skipped[0].1.contains("integer multiple"));
        // The surviving rows still get a pair order across the gap.
        assert!(table.rows[1].order_l2_haway.is_some());
    }

    #[test]
    fn csv_output_is_deterministic_and_reparses_bit_exactly() {
        let spec = sine_spec(1.0, vec![8, 16]);
        let a = run_experiment(&spec).to_csv();
        let b = run_experiment(&spec).to_csv();
        assert_eq!(a, b);

        let table = run_experiment(&spec);
        let csv = table.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "n,dx,s_j,l2_diff,linf_diff,l2_haway,linf_haway,order_l2_haway,order_linf_haway"
        );
        for (line, row) in lines.zip(&table.rows) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 9);
            assert_eq!(fields[0].parse::<usize>().unwrap(), row.n);
            assert_eq!(
                fields[1].parse::<f64>().unwrap().to_bits(),
                row.dx.to_bits()
            );
            assert_eq!(
                fields[2].parse::<f64>().unwrap().to_bits(),
                row.s_j.to_bits()
            );
            let opt = |s: &str| {
                if s.is_empty() {
                    None
                } else {
                    Some(s.parse::<f64>().unwrap())
                }
            };
            assert_eq!(
                opt(fields[3]).map(f64::to_bits),
                row.l2_diff.map(f64::to_bits)
            );
            assert_eq!(
                opt(fields[7]).map(f64::to_bits),
                row.order_l2_haway.map(f64::to_bits)
            );
        }
    }

    #[test]
    fn empty_documents_emit_header_only() {
        let table = ConvergenceTable::default();
        assert_eq!(
            table.to_csv(),
            "n,dx,s_j,l2_diff,linf_diff,l2_haway,linf_haway,order_l2_haway,order_linf_haway\n"
        );
        let profile = Profile::new(vec![], vec![], vec![]).unwrap();
        assert_eq!(profile.to_csv(), "x,rho_lbm,rho_ref\n");
        let sweep: Vec<DispersionResult<f64>> = vec![];
        assert_eq!(
            sweep.to_csv(),
            "xi,re_ev1,im_ev1,re_ev2,im_ev2,re_ev3,im_ev3,classification\n"
        );
    }

    #[test]
    fn dispersion_csv_has_one_labeled_record_per_wavenumber() {
        let p = SchemeParams::from_diffusivity(1.0, 1.0 / 64.0, -1.0, 1.5, 1.5).unwrap();
        let results = crate::dispersion::sweep(&p, &[0.0, 0.3]).unwrap();
        let csv = results.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0.0000000000000000e0,"));
        assert!(lines[1].ends_with(",diffusive"));
        assert!(lines[2].ends_with(",propagative"));
    }

    #[test]
    fn profile_runs_agree_on_the_reference_column() {
        let spec = sine_spec(1.0, vec![32]);
        let lbm = lbm_profile(&spec, 32).unwrap();
        let hw = haway_profile(&spec, 32).unwrap();
        let exact = exact_profile(&spec, 32).unwrap();
        assert_eq!(lbm.reference(), hw.reference());
        assert_eq!(lbm.reference(), exact.reference());
        assert_eq!(exact.solution(), exact.reference());
        assert_eq!(lbm.len(), 32);
        // The solver columns genuinely differ from the reference.
        assert!(lbm.solution() != lbm.reference());
    }

    #[test]
    fn demo_profile_is_even_with_a_single_centered_peak_at_low_diffusivity() {
        let (profile, report) = propagation_demo(0.15).unwrap();
        let v = profile.solution();
        let n = v.len();
        assert_eq!(n, 2048);
        // Node k sits at -16 + k dx, so x = 0 is node 1024 and evenness
        // pairs node k with node 2048 - k.
        for k in 1..n {
            assert!(
                (v[k] - v[n - k]).abs() <= 1e-10,
                "parity breaks at node {k}"
            );
        }
        assert_eq!(report.peaks.len(), 1);
        assert!(report.peaks[0].x.abs() < 5.0 * (32.0 / 2048.0));
        assert_eq!(report.max_value, report.peaks[0].value);
        assert!((report.center_value - report.max_value).abs() <= f64::EPSILON);
        assert!(propagation_demo(-0.1).is_err());
    }

    #[test]
    fn momentum_comparison_error_shrinks_under_refinement() {
        let spec = sine_spec(1.0, vec![128, 256]);
        let coarse = momentum_comparison(&spec, 128).unwrap();
        let fine = momentum_comparison(&spec, 256).unwrap();
        assert!(fine.linf < 0.75 * coarse.linf);
        assert!(fine.l2 < 0.75 * coarse.l2);
    }

    #[test]
    fn emit_csv_reports_the_failing_path() {
        let table = ConvergenceTable::default();
        let path = Path::new("/nonexistent-directory-for-sure/out.csv");
        let err = emit_csv(&table, path).unwrap_err();
        assert!(err.to_string().contains("nonexistent-directory-for-sure"));

        let dir = std::env::temp_dir().join("lbdiff-harness-test");
        std::fs::create_dir_all(&dir).unwrap();
        let file = dir.join("empty.csv");
        emit_csv(&table, &file).unwrap();
        assert_eq!(std::fs::read_to_string(&file).unwrap(), table.to_csv());
        std::fs::remove_file(&file).unwrap();
    }

    #[test]
    fn plot_scripts_reference_the_csv_and_its_columns() {
        let s = convergence_plot_script("conv.csv");
        assert!(s.contains("conv.csv"));
        assert!(s.contains("l2_haway"));
        let s = profile_plot_script("profile.csv");
        assert!(s.contains("profile.csv"));
        assert!(s.contains("rho_ref"));
        let s = dispersion_plot_script("disp.csv");
        assert!(s.contains("disp.csv"));
        assert!(s.contains("im_ev3"));
    }

    #[test]
    fn presets_expose_the_documented_resolutions() {
        assert_eq!(sine_coarse().levels(), &[8, 16, 32, 64]);
        assert_eq!(sine_fine().levels(), &[512, 1024, 2048, 4096]);
        let g = gaussian_study();
        assert_eq!(g.levels().first(), Some(&64));
        assert_eq!(g.levels().last(), Some(&16384));
        assert_eq!(g.levels().len(), 9);
        assert_eq!(g.x_min(), -16.0);
        assert_eq!(sine_coarse().t_final(), 5.0);
        assert_eq!(sine_coarse().mu(), 0.01);
    }
}

//! Mesh, time stepping and the reconstruct / predict / correct loop.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{gauss_rule, spatial_mass_reference, taylor, SpaceTimeCoeffs};
use crate::corrector::{cell_mean, corrector_update, interface_fluxes, CorrectorTables};
use crate::equations::{ConservationLaw, MAX_VARS};
use crate::error::{Error, Result};
use crate::predictor::{
    build_structures, constant_in_time, predictor_adaptive, predictor_classic, AdmissibilityCriterion,
    CellGeometry, ClassicStop, PredictorCache, PredictorOutcome,
};
use crate::reconstruction::{ReconstructionMode, Reconstructor};

/// Largest supported predictor degree.
pub const MAX_DEGREE: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub enum Boundary {
    Periodic,
    /// Ghost cells hold these conserved states.
    Dirichlet { left: Vec<f64>, right: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
    pub bc: Boundary,
}

impl Mesh1D {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize, bc: Boundary) -> Result<Self> {
        if n_cells == 0 || !(x_max > x_min) {
            return Err(Error::Config(format!("invalid mesh [{x_min}, {x_max}] with {n_cells} cells")));
        }
        Ok(Self { x_min, x_max, n_cells, bc })
    }

    pub fn h(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_cells as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.h()
    }

    pub fn geometry(&self, i: usize) -> CellGeometry {
        CellGeometry { x_center: self.center(i), h: self.h() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeKind {
    /// Data of the predictor degree.
    Dg,
    /// Cell averages.
    Fv,
    /// Data of degree `n` below the predictor degree.
    Pnpm { n: usize },
}

impl SchemeKind {
    pub fn data_degree(&self, m: usize) -> usize {
        match self {
            Self::Dg => m,
            Self::Fv => 0,
            Self::Pnpm { n } => *n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Variant {
    /// `M + 1` sweeps at degree `M`.
    ClassicFixed,
    /// Sweeps at degree `M` until the change drops below the tolerance.
    ClassicTolerance(f64),
    /// Degree raised by one per sweep.
    AdaptiveU,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scheme: SchemeKind,
    pub variant: Variant,
    pub degree: usize,
    pub cfl: f64,
    pub t_final: f64,
    /// Stop the adaptive predictor at the last admissible iterate.
    pub limiter: bool,
    pub reconstruction: ReconstructionMode,
    /// Worker threads; `1` runs serially.
    pub threads: usize,
}

impl RunConfig {
    pub fn new(scheme: SchemeKind, variant: Variant, degree: usize, t_final: f64) -> Self {
        Self {
            scheme,
            variant,
            degree,
            cfl: 0.5,
            t_final,
            limiter: false,
            reconstruction: ReconstructionMode::Cweno,
            threads: 1,
        }
    }

    pub fn data_degree(&self) -> usize {
        self.scheme.data_degree(self.degree)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.data_degree();
        if self.degree > MAX_DEGREE || n > self.degree {
            return Err(Error::Config(format!("need 0 <= N <= M <= {MAX_DEGREE}, got N = {n}, M = {}", self.degree)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Config(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.t_final >= 0.0) {
            return Err(Error::Config(format!("t_final must be >= 0, got {}", self.t_final)));
        }
        if self.limiter && self.variant != Variant::AdaptiveU {
            return Err(Error::Config("the limiter needs the adaptive predictor".into()));
        }
        if let Variant::ClassicTolerance(tol) = self.variant {
            if !(tol > 0.0) {
                return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepDiagnostics {
    pub step: usize,
    pub time: f64,
    pub dt: f64,
    /// Over cell means after the step; `NaN` for systems without them.
    pub min_density: f64,
    pub min_pressure: f64,
    pub limited_cells: usize,
    pub predictor_iterations: u64,
    pub work_units: u64,
}

/// Degree-N Taylor data of every cell plus the step history.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField {
    /// `data[(i * (N + 1) + k) * n_vars + q]`.
    pub data: Vec<f64>,
    pub n_vars: usize,
    pub data_degree: usize,
    pub time: f64,
    pub step: usize,
    pub diagnostics: Vec<StepDiagnostics>,
}

impl SolutionField {
    /// L2 projection of `f` onto degree-N Taylor polynomials in every cell.
    pub fn project(mesh: &Mesh1D, data_degree: usize, n_vars: usize, f: &dyn Fn(f64) -> Vec<f64>) -> Result<Self> {
        let g = gauss_rule((data_degree + 4).min(crate::basis::MAX_GAUSS_POINTS))?;
        let s_inv = spatial_mass_reference(data_degree)
            .try_inverse()
            .ok_or(Error::Singular("spatial mass matrix"))?;
        let n1 = data_degree + 1;
        let mut data = vec![0.0; mesh.n_cells * n1 * n_vars];
        let h = mesh.h();
        for i in 0..mesh.n_cells {
            let xc = mesh.center(i);
            // Project f - f(xc) so constants come out exact.
            let base = f(xc);
            let mut b = vec![0.0; n1 * n_vars];
            for (s, w) in g.nodes.iter().zip(&g.weights) {
                let xi = s - 0.5;
                let v = f(xc + h * xi);
                for k in 0..n1 {
                    let phi = taylor(k, xi);
                    for q in 0..n_vars {
                        b[k * n_vars + q] += w * phi * (v[q] - base[q]);
                    }
                }
            }
            let cell = &mut data[i * n1 * n_vars..(i + 1) * n1 * n_vars];
            if n1 == 1 {
                cell.copy_from_slice(&b);
            } else {
                for k in 0..n1 {
                    for j in 0..n1 {
                        for q in 0..n_vars {
                            cell[k * n_vars + q] += s_inv[(k, j)] * b[j * n_vars + q];
                        }
                    }
                }
            }
            for q in 0..n_vars {
                cell[q] += base[q];
            }
        }
        Ok(Self { data, n_vars, data_degree, time: 0.0, step: 0, diagnostics: Vec::new() })
    }

    pub fn n_cells(&self) -> usize {
        self.data.len() / self.cell_len()
    }

    fn cell_len(&self) -> usize {
        (self.data_degree + 1) * self.n_vars
    }

    pub fn cell(&self, i: usize) -> &[f64] {
        let l = self.cell_len();
        &self.data[i * l..(i + 1) * l]
    }

    pub fn mean(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n_vars];
        cell_mean(self.cell(i), self.n_vars, &mut out);
        out
    }

    /// Value of the cell polynomial at reference coordinate `xi`.
    pub fn eval(&self, i: usize, xi: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.n_vars];
        crate::basis::eval_spatial(self.cell(i), self.n_vars, xi, &mut out);
        out
    }

    /// `sum_K |K| mean_K` per component.
    pub fn totals(&self, mesh: &Mesh1D) -> Vec<f64> {
        let mut t = vec![0.0; self.n_vars];
        for i in 0..self.n_cells() {
            for (a, b) in t.iter_mut().zip(self.mean(i)) {
                *a += mesh.h() * b;
            }
        }
        t
    }

    /// Minimum density and pressure over cell means.
    pub fn min_density_pressure(&self, sys: &dyn ConservationLaw) -> (f64, f64) {
        let mut out = (f64::INFINITY, f64::INFINITY);
        for i in 0..self.n_cells() {
            match sys.density_pressure(&self.mean(i)) {
                Some((r, p)) => {
                    out.0 = out.0.min(r);
                    out.1 = out.1.min(if p.is_nan() { f64::NEG_INFINITY } else { p });
                }
                None => return (f64::NAN, f64::NAN),
            }
        }
        out
    }
}

/// Aggregate record of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub final_time: f64,
    pub steps: usize,
    pub limited_cells_total: usize,
    pub min_density: f64,
    pub min_pressure: f64,
    pub predictor_iterations: u64,
    pub work_units: u64,
    pub wall_time_s: f64,
}

impl RunSummary {
    pub fn from_field(field: &SolutionField, sys: &dyn ConservationLaw, wall_time_s: f64) -> Self {
        let (mut rho, mut p) = field.min_density_pressure(sys);
        for d in &field.diagnostics {
            rho = rho.min(d.min_density);
            p = p.min(d.min_pressure);
        }
        Self {
            final_time: field.time,
            steps: field.step,
            limited_cells_total: field.diagnostics.iter().map(|d| d.limited_cells).sum(),
            min_density: rho,
            min_pressure: p,
            predictor_iterations: field.diagnostics.iter().map(|d| d.predictor_iterations).sum(),
            work_units: field.diagnostics.iter().map(|d| d.work_units).sum(),
            wall_time_s,
        }
    }
}

/// `cfl h / ((2N + 1) max |lambda|)`, clamped to `t_final - t`.
pub fn compute_dt(
    field: &SolutionField,
    mesh: &Mesh1D,
    sys: &dyn ConservationLaw,
    cfl: f64,
    t_final: f64,
) -> Result<f64> {
    let mut lam: f64 = 0.0;
    for i in 0..field.n_cells() {
        let s = sys
            .max_abs_eigenvalue(&field.mean(i))
            .map_err(|e| Error::Step { step: field.step, cell: i, source: Box::new(e) })?;
        lam = lam.max(s);
    }
    let remaining = (t_final - field.time).max(0.0);
    if lam == 0.0 {
        return Ok(remaining);
    }
    let dt = cfl * mesh.h() / ((2 * field.data_degree + 1) as f64 * lam);
    Ok(dt.min(remaining))
}

/// One full scheme on one mesh.
pub struct Solver {
    pub sys: Arc<dyn ConservationLaw>,
    pub mesh: Mesh1D,
    pub config: RunConfig,
    cache: PredictorCache,
    corrector: CorrectorTables,
    recon: Reconstructor,
    criterion: Option<AdmissibilityCriterion>,
    pool: Option<rayon::ThreadPool>,
}

impl Solver {
    /// `gamma` selects the Euler positivity criterion when the limiter is on;
    /// other systems only check for finite values.
    pub fn new(sys: Arc<dyn ConservationLaw>, mesh: Mesh1D, config: RunConfig, gamma: Option<f64>) -> Result<Self> {
        config.validate()?;
        let m = config.degree;
        let n = config.data_degree();
        let recon = Reconstructor::new(n, m, config.reconstruction)?;
        let width = recon.stencil().len();
        if mesh.n_cells < width {
            return Err(Error::Config(format!("{} cells are fewer than the stencil width {width}", mesh.n_cells)));
        }
        if let Boundary::Dirichlet { left, right } = &mesh.bc {
            if left.len() != sys.n_vars() || right.len() != sys.n_vars() {
                return Err(Error::Config("boundary states have the wrong number of components".into()));
            }
        }
        let criterion = config.limiter.then(|| match gamma {
            Some(g) => AdmissibilityCriterion::euler_positivity(g),
            None => AdmissibilityCriterion::finite_only(),
        });
        let pool = if config.threads > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(config.threads)
                    .build()
                    .map_err(|e| Error::Config(format!("thread pool: {e}")))?,
            )
        } else {
            None
        };
        Ok(Self {
            sys,
            cache: PredictorCache::new(m)?,
            corrector: CorrectorTables::new(n, m)?,
            recon,
            criterion,
            pool,
            mesh,
            config,
        })
    }

    pub fn criterion(&self) -> Option<&AdmissibilityCriterion> {
        self.criterion.as_ref()
    }

    pub fn cache(&self) -> &PredictorCache {
        &self.cache
    }

    /// Degree-N data of cell `i + offset`, ghost cells included.
    fn neighbour<'a>(&'a self, field: &'a SolutionField, ghost: &'a [Vec<f64>; 2], i: usize, offset: isize) -> &'a [f64] {
        let n = self.mesh.n_cells as isize;
        let j = i as isize + offset;
        match &self.mesh.bc {
            Boundary::Periodic => field.cell(j.rem_euclid(n) as usize),
            Boundary::Dirichlet { .. } if j < 0 => &ghost[0],
            Boundary::Dirichlet { .. } if j >= n => &ghost[1],
            Boundary::Dirichlet { .. } => field.cell(j as usize),
        }
    }

    fn ghost_data(&self, n_vars: usize) -> [Vec<f64>; 2] {
        let n1 = self.config.data_degree() + 1;
        let pad = |s: &[f64]| {
            let mut v = vec![0.0; n1 * n_vars];
            v[..n_vars].copy_from_slice(s);
            v
        };
        match &self.mesh.bc {
            Boundary::Periodic => [vec![], vec![]],
            Boundary::Dirichlet { left, right } => [pad(left), pad(right)],
        }
    }

    fn predict_cell(&self, field: &SolutionField, ghost: &[Vec<f64>; 2], i: usize, dt: f64) -> Result<PredictorOutcome> {
        let q = field.n_vars;
        let m = self.config.degree;
        let un_poly: Vec<f64> = if self.recon.is_identity() {
            field.cell(i).to_vec()
        } else {
            let stencil: Vec<&[f64]> =
                self.recon.stencil().iter().map(|&o| self.neighbour(field, ghost, i, o)).collect();
            let mut out = vec![0.0; (m + 1) * q];
            self.recon.reconstruct(&stencil, q, &mut out)?;
            out
        };
        let geometry = self.mesh.geometry(i);
        let sys = self.sys.as_ref();
        match self.config.variant {
            Variant::AdaptiveU => predictor_adaptive(&self.cache, geometry, dt, &un_poly, sys, self.criterion.as_ref()),
            Variant::ClassicFixed | Variant::ClassicTolerance(_) => {
                let structs = build_structures(&self.cache, geometry, dt, &un_poly, q, m)?;
                let stop = match self.config.variant {
                    Variant::ClassicTolerance(tol) => ClassicStop::Tolerance(tol),
                    _ => ClassicStop::FixedIterations(m + 1),
                };
                predictor_classic(&structs, constant_in_time(&un_poly, q, m), sys, stop)
            }
        }
    }

    fn par_map<T: Send>(&self, n: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
        match &self.pool {
            Some(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
            None => (0..n).map(f).collect(),
        }
    }

    /// Advances `field` by one time step and returns every cell's predictor.
    pub fn step_observed(&self, field: &mut SolutionField) -> Result<Vec<PredictorOutcome>> {
        let sys = self.sys.as_ref();
        let q = field.n_vars;
        let n = self.mesh.n_cells;
        let step = field.step;
        let wrap = |cell: usize| move |e: Error| Error::Step { step, cell, source: Box::new(e) };
        let dt = compute_dt(field, &self.mesh, sys, self.config.cfl, self.config.t_final)?;
        if dt <= 0.0 {
            return Ok(Vec::new());
        }
        let ghost = self.ghost_data(q);
        let outcomes = {
            let f: &SolutionField = field;
            self.par_map(n, |i| self.predict_cell(f, &ghost, i, dt).map_err(wrap(i)))?
        };
        let m = self.config.degree;
        let ghost_pred = |s: &[f64]| SpaceTimeCoeffs::constant(m, &s[..q]);
        let (gl, gr) = match &self.mesh.bc {
            Boundary::Periodic => (None, None),
            Boundary::Dirichlet { left, right } => (Some(ghost_pred(left)), Some(ghost_pred(right))),
        };
        let face_pred = |j: isize| -> &SpaceTimeCoeffs {
            let nn = n as isize;
            match (&gl, &gr) {
                (Some(l), _) if j < 0 => l,
                (_, Some(r)) if j >= nn => r,
                _ => &outcomes[j.rem_euclid(nn) as usize].coeffs,
            }
        };
        // Face k sits between cells k - 1 and k.
        let faces = self.par_map(n + 1, |k| {
            interface_fluxes(face_pred(k as isize - 1), face_pred(k as isize), sys, &self.corrector)
                .map_err(wrap(k.min(n - 1)))
        })?;
        let len = (field.data_degree + 1) * q;
        let updated = {
            let f: &SolutionField = field;
            self.par_map(n, |i| {
                let mut out = vec![0.0; len];
                corrector_update(
                    &self.corrector,
                    self.mesh.geometry(i),
                    dt,
                    f.cell(i),
                    &outcomes[i].coeffs,
                    &faces[i],
                    &faces[i + 1],
                    sys,
                    &mut out,
                )
                .map_err(wrap(i))?;
                Ok(out)
            })?
        };
        for (i, cell) in updated.into_iter().enumerate() {
            field.data[i * len..(i + 1) * len].copy_from_slice(&cell);
        }
        field.time = if self.config.t_final - (field.time + dt) <= 1e-14 * self.config.t_final.max(1.0) {
            self.config.t_final
        } else {
            field.time + dt
        };
        field.step += 1;
        let (min_density, min_pressure) = field.min_density_pressure(sys);
        field.diagnostics.push(StepDiagnostics {
            step: field.step,
            time: field.time,
            dt,
            min_density,
            min_pressure,
            limited_cells: outcomes.iter().filter(|o| o.limited).count(),
            predictor_iterations: outcomes.iter().map(|o| o.achieved_iterations as u64).sum(),
            work_units: outcomes.iter().map(|o| o.work_units).sum(),
        });
        Ok(outcomes)
    }

    pub fn step(&self, field: &mut SolutionField) -> Result<()> {
        self.step_observed(field).map(|_| ())
    }

    /// Steps until `t_final`, calling `observe` after every step.
    pub fn run_with(&self, field: &mut SolutionField, mut observe: impl FnMut(&SolutionField)) -> Result<()> {
        while field.time < self.config.t_final {
            let before = field.step;
            self.step(field)?;
            if field.step == before {
                break;
            }
            observe(field);
        }
        Ok(())
    }

    pub fn run(&self, field: &mut SolutionField) -> Result<RunSummary> {
        let start = Instant::now();
        self.run_with(field, |_| {})?;
        Ok(RunSummary::from_field(field, self.sys.as_ref(), start.elapsed().as_secs_f64()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorNorms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// Norms of `u_h - exact` for component `component`, with `n_points` Gauss
/// points per cell.
pub fn error_norms(
    field: &SolutionField,
    mesh: &Mesh1D,
    exact: &dyn Fn(f64) -> Vec<f64>,
    component: usize,
    n_points: usize,
) -> Result<ErrorNorms> {
    let g = gauss_rule(n_points)?;
    let h = mesh.h();
    let (mut l1, mut l2, mut linf) = (0.0, 0.0, 0.0f64);
    let mut v = [0.0; MAX_VARS];
    for i in 0..field.n_cells() {
        let xc = mesh.center(i);
        for (s, w) in g.nodes.iter().zip(&g.weights) {
            let xi = s - 0.5;
            crate::basis::eval_spatial(field.cell(i), field.n_vars, xi, &mut v[..field.n_vars]);
            let e = (v[component] - exact(xc + h * xi)[component]).abs();
            l1 += h * w * e;
            l2 += h * w * e * e;
            linf = linf.max(e);
        }
    }
    Ok(ErrorNorms { l1, l2: l2.sqrt(), linf })
}

/// `log(e1 / e2) / log(h1 / h2)` between consecutive entries; `0` when the
/// errors are identical.
pub fn observed_orders(hs: &[f64], errors: &[f64]) -> Vec<f64> {
    hs.windows(2)
        .zip(errors.windows(2))
        .map(|(h, e)| if e[0] == e[1] { 0.0 } else { (e[0] / e[1]).ln() / (h[0] / h[1]).ln() })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n_cells: usize,
    pub h: f64,
    pub errors: ErrorNorms,
    /// Orders against the previous row; `None` for the first.
    pub orders: Option<ErrorNorms>,
    pub work_units: u64,
}

/// Runs `template` on every mesh size and tabulates errors of `component`.
pub fn convergence_study(
    make_solver: &dyn Fn(usize) -> Result<(Solver, SolutionField)>,
    sizes: &[usize],
    exact: &dyn Fn(f64, f64) -> Vec<f64>,
    component: usize,
) -> Result<Vec<ConvergenceRow>> {
    if sizes.len() < 3 {
        return Err(Error::Config(format!("a convergence study needs at least 3 meshes, got {}", sizes.len())));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &n in sizes {
        let (solver, mut field) = make_solver(n)?;
        let summary = solver.run(&mut field)?;
        let t = field.time;
        let errors = error_norms(&field, &solver.mesh, &|x| exact(x, t), component, solver.config.degree + 2)?;
        let orders = rows.last().map(|prev| {
            let hs = [prev.h, solver.mesh.h()];
            let o = |a: f64, b: f64| observed_orders(&hs, &[a, b])[0];
            ErrorNorms {
                l1: o(prev.errors.l1, errors.l1),
                l2: o(prev.errors.l2, errors.l2),
                linf: o(prev.errors.linf, errors.linf),
            }
        });
        rows.push(ConvergenceRow { n_cells: n, h: solver.mesh.h(), errors, orders, work_units: summary.work_units });
    }
    Ok(rows)
}

/// Writes `x,<output names>` rows at the cell midpoints.
pub fn write_snapshot_csv(
    field: &SolutionField,
    mesh: &Mesh1D,
    sys: &dyn ConservationLaw,
    out: &mut dyn std::io::Write,
) -> Result<()> {
    writeln!(out, "x,{}", sys.output_names().join(","))?;
    for i in 0..field.n_cells() {
        let values = sys.to_output(&field.eval(i, 0.0));
        write!(out, "{:.16e}", mesh.center(i))?;
        for v in values {
            write!(out, ",{v:.16e}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Writes `h,l1,l2,linf,order_l1,order_l2,order_linf`; orders are empty on
/// the coarsest row.
pub fn write_convergence_csv(rows: &[ConvergenceRow], out: &mut dyn std::io::Write) -> Result<()> {
    writeln!(out, "h,l1,l2,linf,order_l1,order_l2,order_linf")?;
    for r in rows {
        let e = &r.errors;
        write!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", r.h, e.l1, e.l2, e.linf)?;
        match &r.orders {
            Some(o) => writeln!(out, ",{:.16e},{:.16e},{:.16e}", o.l1, o.l2, o.linf)?,
            None => writeln!(out, ",,,")?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equations::{advection_system, Euler};
    use std::f64::consts::PI;

    fn periodic(n: usize) -> Mesh1D {
        Mesh1D::new(0.0, 1.0, n, Boundary::Periodic).unwrap()
    }

    fn field_of(mesh: &Mesh1D, n: usize, q: usize, f: impl Fn(f64) -> Vec<f64>) -> SolutionField {
        SolutionField::project(mesh, n, q, &f).unwrap()
    }

    #[test]
    fn dt_examples() {
        let adv = advection_system(1.0);
        let mesh = Mesh1D::new(0.0, 1.0, 100, Boundary::Periodic).unwrap();
        let f0 = field_of(&mesh, 0, 1, |_| vec![1.0]);
        assert!((compute_dt(&f0, &mesh, &adv, 0.5, 10.0).unwrap() - 5e-3).abs() < 1e-15);
        let f2 = field_of(&mesh, 2, 1, |_| vec![1.0]);
        assert!((compute_dt(&f2, &mesh, &adv, 0.5, 10.0).unwrap() - 1e-3).abs() < 1e-15);
        let e = Euler::new(1.4).unwrap();
        let rp2 = Mesh1D::new(-0.5, 0.5, 100, Boundary::Periodic).unwrap();
        let f = field_of(&rp2, 0, 3, |x| e.conservative(1.0, if x < 0.0 { 2.0 } else { -2.0 }, 0.1).to_vec());
        let dt = compute_dt(&f, &rp2, &e, 0.5, 1.0).unwrap();
        assert!((dt - 0.5 * 0.01 / (2.0 + 0.14f64.sqrt())).abs() < 1e-12);
        assert!((dt - 2.1060e-3).abs() < 1e-7);
        // clamped at the final time
        assert_eq!(compute_dt(&f0, &mesh, &adv, 0.5, 1e-4).unwrap(), 1e-4);
        let zero = advection_system(0.0);
        assert_eq!(compute_dt(&f0, &mesh, &zero, 0.5, 0.3).unwrap(), 0.3);
    }

    #[test]
    fn constant_field_is_unchanged_for_every_scheme() {
        let e = Arc::new(Euler::new(1.4).unwrap());
        let state = e.conservative(0.8, 0.3, 1.7).to_vec();
        let schemes = [SchemeKind::Dg, SchemeKind::Fv, SchemeKind::Pnpm { n: 1 }];
        let variants = [Variant::ClassicFixed, Variant::ClassicTolerance(1e-12), Variant::AdaptiveU];
        for m in 1..=4 {
            for scheme in schemes {
                for variant in variants {
                    let mut cfg = RunConfig::new(scheme, variant, m, 1.0);
                    cfg.limiter = variant == Variant::AdaptiveU;
                    let mesh = periodic(12);
                    let solver = Solver::new(e.clone(), mesh.clone(), cfg.clone(), Some(1.4)).unwrap();
                    let s = state.clone();
                    let mut field = field_of(&mesh, cfg.data_degree(), 3, move |_| s.clone());
                    let before = field.data.clone();
                    solver.step(&mut field).unwrap();
                    for (a, b) in field.data.iter().zip(&before) {
                        assert!((a - b).abs() <= 1e-13, "{scheme:?} {variant:?} m={m} {:e}", (a - b).abs());
                    }
                }
            }
        }
    }

    #[test]
    fn one_dg_u_step_on_sine() {
        let adv = Arc::new(advection_system(1.0));
        let mesh = periodic(64);
        let cfg = RunConfig::new(SchemeKind::Dg, Variant::AdaptiveU, 3, 1.0);
        let solver = Solver::new(adv, mesh.clone(), cfg, None).unwrap();
        let mut field = field_of(&mesh, 3, 1, |x| vec![(2.0 * PI * x).sin()]);
        solver.step(&mut field).unwrap();
        let t = field.time;
        let err = error_norms(&field, &mesh, &|x| vec![(2.0 * PI * (x - t)).sin()], 0, 5).unwrap();
        assert!(err.l2 <= 1e-6, "{err:?}");
    }

    #[test]
    fn zero_final_time_returns_initial_field() {
        let adv = Arc::new(advection_system(1.0));
        let mesh = periodic(8);
        let cfg = RunConfig::new(SchemeKind::Fv, Variant::AdaptiveU, 2, 0.0);
        let solver = Solver::new(adv, mesh.clone(), cfg, None).unwrap();
        let mut field = field_of(&mesh, 0, 1, |x| vec![x]);
        let before = field.clone();
        let summary = solver.run(&mut field).unwrap();
        assert_eq!(field, before);
        assert_eq!(summary.steps, 0);
    }

    #[test]
    fn norm_examples() {
        let mesh = periodic(10);
        let field = field_of(&mesh, 2, 1, |x| vec![1.0 + 2.0 * x - x * x]);
        let e = error_norms(&field, &mesh, &|x| vec![1.0 + 2.0 * x - x * x], 0, 4).unwrap();
        assert!(e.l1 <= 1e-12 && e.l2 <= 1e-12 && e.linf <= 1e-12);
        let e = error_norms(&field, &mesh, &|x| vec![1.0 + 2.0 * x - x * x + 0.25], 0, 4).unwrap();
        assert!((e.l1 - 0.25).abs() < 1e-12 && (e.l2 - 0.25).abs() < 1e-12 && (e.linf - 0.25).abs() < 1e-12);
        let zero = field_of(&periodic(50), 0, 1, |_| vec![0.0]);
        let e = error_norms(&zero, &periodic(50), &|x| vec![(2.0 * PI * x).sin()], 0, 8).unwrap();
        assert!((e.l2 - 0.5f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn order_examples() {
        assert!((observed_orders(&[0.1, 0.05], &[1e-2, 1.25e-3])[0] - 3.0).abs() < 1e-12);
        assert_eq!(observed_orders(&[0.1, 0.05], &[1e-3, 1e-3])[0], 0.0);
    }

    #[test]
    fn parallel_matches_serial() {
        let e = Arc::new(Euler::new(1.4).unwrap());
        let mesh = periodic(32);
        let init = |x: f64| vec![1.0 + 0.2 * (2.0 * PI * x).sin(), 1.0 + 0.2 * (2.0 * PI * x).sin(), 3.0];
        let mut cfg = RunConfig::new(SchemeKind::Dg, Variant::AdaptiveU, 3, 0.05);
        let serial = Solver::new(e.clone(), mesh.clone(), cfg.clone(), Some(1.4)).unwrap();
        cfg.threads = 4;
        let parallel = Solver::new(e, mesh.clone(), cfg, Some(1.4)).unwrap();
        let mut a = field_of(&mesh, 3, 3, init);
        let mut b = a.clone();
        serial.run(&mut a).unwrap();
        parallel.run(&mut b).unwrap();
        for (x, y) in a.data.iter().zip(&b.data) {
            assert!((x - y).abs() <= 1e-13 * x.abs().max(1.0));
        }
    }

    #[test]
    fn config_validation() {
        let mut c = RunConfig::new(SchemeKind::Pnpm { n: 3 }, Variant::AdaptiveU, 2, 1.0);
        assert!(c.validate().is_err());
        c.scheme = SchemeKind::Dg;
        c.cfl = 1.5;
        assert!(c.validate().is_err());
        c.cfl = 0.5;
        c.variant = Variant::ClassicFixed;
        c.limiter = true;
        assert!(c.validate().is_err());
        c.limiter = false;
        assert!(c.validate().is_ok());
        c.degree = 6;
        assert!(c.validate().is_err());
    }
}

//! Local space-time predictor.
//!
//! On a control volume `K x [t_n, t_n + dt]` the predictor solves
//! `B u - r + phi(u) = 0` where
//!
//! * `B_jl = int_K theta_l theta_j (t_{n+1}) dx - int_{C_K} theta_l d_t theta_j`,
//! * `r_j = int_K u_n theta_j(t_n) dx`,
//! * `phi_j(u) = int_{C_K} (d_x f(u_h) - s(x, u_h)) theta_j`.
//!
//! Everything is assembled on the reference element `xi in [-1/2, 1/2]`,
//! `tau in [0, 1]`. There `B = h B_ref` with `B_ref` independent of `dt`, so
//! one factorization per degree serves every cell and every step.
//!
//! The classic iteration keeps the degree fixed at `M`. The adaptive one starts
//! from the cell mean, raises the degree by one per iteration (zero padding the
//! modal coefficients) and finishes with one extra sweep at degree `M`. An
//! optional [`AdmissibilityCriterion`] turns it into the DOOM limiter: the
//! first rejected iterate stops the sweep and the last accepted one is
//! returned.

use std::fmt;
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;

use crate::basis::{
    embed_coeffs, factorial, gauss_rule, space_time_len, space_time_modes, spatial_mean, taylor,
    spatial_mass_reference, taylor_cell_integral, taylor_derivative, SpaceTimeCoeffs,
};
use crate::dec::DecOperatorPair;
use crate::equations::{ConservationLaw, MAX_VARS};
use crate::error::{Error, Result};

/// Position of mode `(i, m)` in the total-degree enumeration.
pub fn mode_index(i: usize, m: usize) -> usize {
    let d = i + m;
    d * (d + 1) / 2 + i
}

/// `int_{-1/2}^{1/2} phi_i phi_k dxi` for spatial Taylor functions.
pub fn spatial_moment(i: usize, k: usize) -> f64 {
    taylor_cell_integral(i + k) * factorial(i + k) / (factorial(i) * factorial(k))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGeometry {
    pub x_center: f64,
    pub h: f64,
}

/// Reference-element tables for one predictor degree.
#[derive(Debug, Clone)]
pub struct DegreeTables {
    pub degree: usize,
    pub modes: Vec<(usize, usize)>,
    /// Space-time quadrature nodes `(xi, tau)` and their weights.
    pub nodes: Vec<(f64, f64)>,
    pub weights: Vec<f64>,
    theta: Vec<f64>,
    theta_dxi: Vec<f64>,
    b_ref: DMatrix<f64>,
    b_inv: DMatrix<f64>,
    mass_inv: DMatrix<f64>,
}

impl DegreeTables {
    pub fn new(degree: usize) -> Result<Self> {
        let modes = space_time_modes(degree);
        let len = modes.len();
        let g = gauss_rule(degree + 1)?;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (sx, wx) in g.nodes.iter().zip(&g.weights) {
            for (st, wt) in g.nodes.iter().zip(&g.weights) {
                nodes.push((sx - 0.5, *st));
                weights.push(wx * wt);
            }
        }
        let mut theta = Vec::with_capacity(nodes.len() * len);
        let mut theta_dxi = Vec::with_capacity(nodes.len() * len);
        for &(xi, tau) in &nodes {
            for &(i, m) in &modes {
                theta.push(taylor(i, xi) * taylor(m, tau));
                theta_dxi.push(taylor_derivative(i, xi) * taylor(m, tau));
            }
        }
        let b_ref = reference_b_matrix(degree);
        // Invert in the unnormalized monomials, which are far better conditioned
        // than the 1/(i! m!) scaled ones: B = D B' D.
        let d: Vec<f64> = modes.iter().map(|&(i, m)| factorial(i) * factorial(m)).collect();
        let scaled = DMatrix::from_fn(len, len, |j, l| b_ref[(j, l)] * d[j] * d[l]);
        let inv = scaled.try_inverse().ok_or(Error::Singular("predictor matrix B"))?;
        let b_inv = DMatrix::from_fn(len, len, |j, l| inv[(j, l)] * d[j] * d[l]);
        let mass_inv = spatial_mass_reference(degree)
            .try_inverse()
            .ok_or(Error::Singular("spatial mass matrix"))?;
        Ok(Self { degree, modes, nodes, weights, theta, theta_dxi, b_ref, b_inv, mass_inv })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn b_reference(&self) -> &DMatrix<f64> {
        &self.b_ref
    }

    /// Cost of one predictor sweep at this degree.
    pub fn work_units(&self) -> u64 {
        (self.len() * self.nodes.len()) as u64
    }
}

/// `B_ref` from closed-form moments of the Taylor monomials.
fn reference_b_matrix(degree: usize) -> DMatrix<f64> {
    let modes = space_time_modes(degree);
    let len = modes.len();
    // int_0^1 psi_l psi'_j dtau, psi_m = tau^m / m!
    let time_moment = |ml: usize, mj: usize| -> f64 {
        if mj == 0 {
            0.0
        } else {
            1.0 / (factorial(ml) * factorial(mj - 1) * (ml + mj) as f64)
        }
    };
    DMatrix::from_fn(len, len, |j, l| {
        let (ij, mj) = modes[j];
        let (il, ml) = modes[l];
        let sm = spatial_moment(il, ij);
        sm * (1.0 / (factorial(ml) * factorial(mj)) - time_moment(ml, mj))
    })
}

/// Lazily built tables for degrees `0..=max_degree`, shared by all cells.
///
/// Each degree is built at most once; concurrent first use from several threads
/// is safe and yields the same tables.
#[derive(Debug)]
pub struct PredictorCache {
    max_degree: usize,
    tables: Vec<OnceLock<DegreeTables>>,
    checks: Vec<OnceLock<Vec<(f64, f64)>>>,
}

impl PredictorCache {
    pub fn new(max_degree: usize) -> Result<Self> {
        if max_degree > 6 {
            return Err(Error::Config(format!("predictor degree {max_degree} exceeds 6")));
        }
        Ok(Self {
            max_degree,
            tables: (0..=max_degree).map(|_| OnceLock::new()).collect(),
            checks: (0..=max_degree).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn tables(&self, degree: usize) -> Result<&DegreeTables> {
        let slot = self
            .tables
            .get(degree)
            .ok_or(Error::IndexOutOfRange { index: degree, degree: self.max_degree })?;
        if let Some(t) = slot.get() {
            return Ok(t);
        }
        let built = DegreeTables::new(degree)?;
        Ok(slot.get_or_init(|| built))
    }

    /// Points where an iterate of degree `p` is checked for admissibility:
    /// the degree-`M` quadrature nodes, the nodes of the next sweep, and the
    /// cell faces at the corrector's time nodes.
    pub fn check_points(&self, p: usize) -> Result<&[(f64, f64)]> {
        let slot = self
            .checks
            .get(p)
            .ok_or(Error::IndexOutOfRange { index: p, degree: self.max_degree })?;
        if let Some(c) = slot.get() {
            return Ok(c);
        }
        let mut pts = self.tables(self.max_degree)?.nodes.clone();
        let next = (p + 1).min(self.max_degree);
        if next != self.max_degree {
            pts.extend_from_slice(&self.tables(next)?.nodes);
        }
        pts.extend(face_points(self.max_degree)?);
        Ok(slot.get_or_init(|| pts))
    }
}

/// Cell faces `xi = -1/2, 1/2` at the `M + 1` Gauss times.
pub fn face_points(max_degree: usize) -> Result<Vec<(f64, f64)>> {
    let g = gauss_rule(max_degree + 1)?;
    Ok(g.nodes.iter().flat_map(|&t| [(-0.5, t), (0.5, t)]).collect())
}

/// Assembled predictor system of one cell at one degree.
#[derive(Debug, Clone)]
pub struct PredictorStructures<'a> {
    pub tables: &'a DegreeTables,
    pub geometry: CellGeometry,
    pub dt: f64,
    pub n_vars: usize,
    /// `r / h`, mode-major.
    r_ref: Vec<f64>,
    /// `B^{-1} r`: the spatial L2 projection of `u_n` onto degree `p`,
    /// constant in time. Kept separately so the update avoids the
    /// cancellation of forming `B^{-1} r` numerically.
    base: Vec<f64>,
}

impl PredictorStructures<'_> {
    pub fn degree(&self) -> usize {
        self.tables.degree
    }

    /// Physical `B = h B_ref`.
    pub fn b_matrix(&self) -> DMatrix<f64> {
        &self.tables.b_ref * self.geometry.h
    }

    /// Physical `r`, mode-major `L x Q`.
    pub fn r(&self) -> Vec<f64> {
        self.r_ref.iter().map(|v| v * self.geometry.h).collect()
    }

    fn solve(&self, rhs_ref: &[f64]) -> SpaceTimeCoeffs {
        let len = self.tables.len();
        let q = self.n_vars;
        let mut values = vec![0.0; len * q];
        for j in 0..len {
            for l in 0..len {
                let b = self.tables.b_inv[(j, l)];
                if b != 0.0 {
                    for c in 0..q {
                        values[j * q + c] += b * rhs_ref[l * q + c];
                    }
                }
            }
        }
        SpaceTimeCoeffs { degree: self.degree(), n_vars: q, values }
    }

    /// One fixed-point sweep `B^{-1} (r - phi(prev))`.
    pub fn update(&self, prev: &SpaceTimeCoeffs, sys: &dyn ConservationLaw) -> Result<SpaceTimeCoeffs> {
        let phi = phi_reference(self, prev, sys)?;
        let mut out = self.solve(&phi);
        for (o, b) in out.values.iter_mut().zip(&self.base) {
            *o = b - *o;
        }
        Ok(out)
    }
}

/// Builds `B`, `r` for degree `p` from the spatial polynomial `u_n`
/// (`un_poly[k * n_vars + q]`, any degree).
pub fn build_structures<'a>(
    cache: &'a PredictorCache,
    geometry: CellGeometry,
    dt: f64,
    un_poly: &[f64],
    n_vars: usize,
    p: usize,
) -> Result<PredictorStructures<'a>> {
    if !(dt > 0.0) || !(geometry.h > 0.0) {
        return Err(Error::Config(format!("need dt > 0 and h > 0, got {dt}, {}", geometry.h)));
    }
    let tables = cache.tables(p)?;
    let mut r_ref = vec![0.0; tables.len() * n_vars];
    for (j, &(i, m)) in tables.modes.iter().enumerate() {
        if m != 0 {
            continue;
        }
        for (k, chunk) in un_poly.chunks(n_vars).enumerate() {
            let s = spatial_moment(i, k);
            for (c, v) in chunk.iter().enumerate() {
                r_ref[j * n_vars + c] += s * v;
            }
        }
    }
    let mut base = vec![0.0; tables.len() * n_vars];
    let un_len = un_poly.len() / n_vars.max(1);
    if un_len <= p + 1 {
        for (i, chunk) in un_poly.chunks(n_vars).enumerate() {
            let l = mode_index(i, 0);
            base[l * n_vars..(l + 1) * n_vars].copy_from_slice(chunk);
        }
    } else {
        for i in 0..=p {
            for k in 0..=p {
                let w = tables.mass_inv[(i, k)];
                let row = mode_index(k, 0) * n_vars;
                let l = mode_index(i, 0) * n_vars;
                for c in 0..n_vars {
                    base[l + c] += w * r_ref[row + c];
                }
            }
        }
    }
    Ok(PredictorStructures { tables, geometry, dt, n_vars, r_ref, base })
}

/// `phi / h` on the reference element.
fn phi_reference(
    structs: &PredictorStructures<'_>,
    coeffs: &SpaceTimeCoeffs,
    sys: &dyn ConservationLaw,
) -> Result<Vec<f64>> {
    let t = structs.tables;
    if coeffs.degree != t.degree {
        return Err(Error::Config(format!(
            "coefficients of degree {} used with degree-{} structures",
            coeffs.degree, t.degree
        )));
    }
    let q = structs.n_vars;
    let len = t.len();
    let inv_h = 1.0 / structs.geometry.h;
    let mut phi = vec![0.0; len * q];
    let mut u = [0.0; MAX_VARS];
    let mut du = [0.0; MAX_VARS];
    let mut div = [0.0; MAX_VARS];
    let mut src = [0.0; MAX_VARS];
    let with_source = sys.has_source();
    for (k, &(xi, _)) in t.nodes.iter().enumerate() {
        let row = &t.theta[k * len..(k + 1) * len];
        let drow = &t.theta_dxi[k * len..(k + 1) * len];
        u[..q].fill(0.0);
        du[..q].fill(0.0);
        for l in 0..len {
            for c in 0..q {
                let v = coeffs.values[l * q + c];
                u[c] += v * row[l];
                du[c] += v * drow[l];
            }
        }
        sys.flux_derivative(&u[..q], &du[..q], &mut div[..q])?;
        if with_source {
            sys.source(structs.geometry.x_center + structs.geometry.h * xi, &u[..q], &mut src[..q]);
        }
        let w = structs.dt * t.weights[k];
        for c in 0..q {
            let e = w * (inv_h * div[c] - if with_source { src[c] } else { 0.0 });
            if e != 0.0 {
                for l in 0..len {
                    phi[l * q + c] += e * row[l];
                }
            }
        }
    }
    Ok(phi)
}

/// Physical `phi(u) = int_{C_K} (d_x f(u_h) - s) theta_j`, mode-major.
pub fn assemble_phi(
    structs: &PredictorStructures<'_>,
    coeffs: &SpaceTimeCoeffs,
    sys: &dyn ConservationLaw,
) -> Result<Vec<f64>> {
    let h = structs.geometry.h;
    Ok(phi_reference(structs, coeffs, sys)?.into_iter().map(|v| v * h).collect())
}

/// Space-time polynomial equal to `u_n(x)` at every time.
pub fn constant_in_time(un_poly: &[f64], n_vars: usize, degree: usize) -> SpaceTimeCoeffs {
    let mut c = SpaceTimeCoeffs::zeros(degree, n_vars);
    for (i, chunk) in un_poly.chunks(n_vars).enumerate().take(degree + 1) {
        let l = mode_index(i, 0);
        c.values[l * n_vars..(l + 1) * n_vars].copy_from_slice(chunk);
    }
    c
}

/// One predicate of an [`AdmissibilityCriterion`].
#[derive(Clone)]
pub enum AdmissibilityCheck {
    Finite,
    PositiveDensity,
    PositivePressure { gamma: f64 },
    Custom(Arc<dyn Fn(&[f64]) -> bool + Send + Sync>),
}

impl fmt::Debug for AdmissibilityCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite => write!(f, "Finite"),
            Self::PositiveDensity => write!(f, "PositiveDensity"),
            Self::PositivePressure { gamma } => write!(f, "PositivePressure {{ gamma: {gamma} }}"),
            Self::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl AdmissibilityCheck {
    pub fn accepts(&self, u: &[f64]) -> bool {
        match self {
            Self::Finite => u.iter().all(|v| v.is_finite()),
            Self::PositiveDensity => u[0] > 0.0,
            Self::PositivePressure { gamma } => {
                u[0] > 0.0 && (gamma - 1.0) * (u[2] - 0.5 * u[1] * u[1] / u[0]) > 0.0
            }
            Self::Custom(f) => f(u),
        }
    }
}

/// Physical-admissibility predicates evaluated at quadrature points.
#[derive(Debug, Clone)]
pub struct AdmissibilityCriterion {
    pub checks: Vec<AdmissibilityCheck>,
}

impl AdmissibilityCriterion {
    /// Finite values, positive density and positive pressure.
    pub fn euler_positivity(gamma: f64) -> Self {
        Self {
            checks: vec![
                AdmissibilityCheck::Finite,
                AdmissibilityCheck::PositiveDensity,
                AdmissibilityCheck::PositivePressure { gamma },
            ],
        }
    }

    pub fn finite_only() -> Self {
        Self { checks: vec![AdmissibilityCheck::Finite] }
    }

    pub fn accepts_state(&self, u: &[f64]) -> bool {
        self.checks.iter().all(|c| c.accepts(u))
    }

    /// Checks `coeffs` at every reference point `(xi, tau)`.
    pub fn accepts(&self, coeffs: &SpaceTimeCoeffs, points: &[(f64, f64)]) -> bool {
        if !coeffs.all_finite() {
            return false;
        }
        let mut u = [0.0; MAX_VARS];
        points.iter().all(|&(xi, tau)| {
            coeffs.eval_reference(xi, tau, &mut u[..coeffs.n_vars]);
            self.accepts_state(&u[..coeffs.n_vars])
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictorOutcome {
    pub coeffs: SpaceTimeCoeffs,
    pub achieved_iterations: usize,
    pub limited: bool,
    pub rejected_at: Option<usize>,
    pub work_units: u64,
}

/// Stop rule of the fixed-degree iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassicStop {
    FixedIterations(usize),
    /// Stop when the max-norm change drops below the tolerance; at most
    /// `2 (M + 2)` sweeps.
    Tolerance(f64),
}

/// Fixed-degree fixed-point iteration `u_p = B^{-1} (r - phi(u_{p-1}))`.
pub fn predictor_classic(
    structs: &PredictorStructures<'_>,
    u0: SpaceTimeCoeffs,
    sys: &dyn ConservationLaw,
    stop: ClassicStop,
) -> Result<PredictorOutcome> {
    let work = structs.tables.work_units();
    let mut u = u0;
    match stop {
        ClassicStop::FixedIterations(n) => {
            for p in 1..=n {
                u = structs.update(&u, sys)?;
                if !u.all_finite() {
                    return Err(Error::DivergedIteration { iteration: p });
                }
            }
            Ok(PredictorOutcome {
                coeffs: u,
                achieved_iterations: n,
                limited: false,
                rejected_at: None,
                work_units: work * n as u64,
            })
        }
        ClassicStop::Tolerance(tol) => {
            let cap = 2 * (structs.degree() + 2);
            let mut change = f64::INFINITY;
            for p in 1..=cap {
                let next = structs.update(&u, sys)?;
                if !next.all_finite() {
                    return Err(Error::DivergedIteration { iteration: p });
                }
                change = next.max_abs_diff(&u);
                u = next;
                if change < tol {
                    return Ok(PredictorOutcome {
                        coeffs: u,
                        achieved_iterations: p,
                        limited: false,
                        rejected_at: None,
                        work_units: work * p as u64,
                    });
                }
            }
            Err(Error::NonContraction { iterations: cap, tolerance: tol, last_change: change })
        }
    }
}

/// Degrees used by the adaptive sweeps for final degree `m`: `1, 2, .., m, m`.
pub fn adaptive_schedule(m: usize) -> Vec<usize> {
    (1..=m).chain(std::iter::once(m)).collect()
}

/// Increasing-degree iteration, optionally limited by `criterion`.
///
/// `un_poly` is the (possibly reconstructed) spatial polynomial at `t_n`;
/// the iteration starts from its cell mean.
pub fn predictor_adaptive(
    cache: &PredictorCache,
    geometry: CellGeometry,
    dt: f64,
    un_poly: &[f64],
    sys: &dyn ConservationLaw,
    criterion: Option<&AdmissibilityCriterion>,
) -> Result<PredictorOutcome> {
    let q = sys.n_vars();
    let mut mean = [0.0; MAX_VARS];
    spatial_mean(un_poly, q, &mut mean[..q]);
    let mut u = SpaceTimeCoeffs::constant(0, &mean[..q]);
    let mut work = 0;
    for (k, p) in adaptive_schedule(cache.max_degree()).into_iter().enumerate() {
        let iteration = k + 1;
        let structs = build_structures(cache, geometry, dt, un_poly, q, p)?;
        let embedded = embed_coeffs(&u, p)?;
        work += structs.tables.work_units();
        let rejected = |u: SpaceTimeCoeffs| PredictorOutcome {
            coeffs: u,
            achieved_iterations: iteration - 1,
            limited: true,
            rejected_at: Some(iteration),
            work_units: work,
        };
        let next = match (structs.update(&embedded, sys), criterion) {
            (Ok(next), _) => next,
            (Err(_), Some(_)) => return Ok(rejected(u)),
            (Err(e), None) => return Err(e),
        };
        match criterion {
            Some(c) if !c.accepts(&next, cache.check_points(p)?) => return Ok(rejected(u)),
            None if !next.all_finite() => return Err(Error::DivergedIteration { iteration }),
            _ => {}
        }
        u = next;
    }
    let iterations = cache.max_degree() + 1;
    Ok(PredictorOutcome {
        coeffs: u,
        achieved_iterations: iterations,
        limited: false,
        rejected_at: None,
        work_units: work,
    })
}

/// The fixed-degree predictor written as a deferred-correction operator pair:
/// `L2(u) = u - B^{-1}(r - phi(u))`, `L1(u) = u - B^{-1}(r - phi(u0))`.
pub struct AderDecOperators<'a> {
    structs: PredictorStructures<'a>,
    sys: &'a dyn ConservationLaw,
    explicit_part: SpaceTimeCoeffs,
}

impl<'a> AderDecOperators<'a> {
    pub fn new(
        structs: PredictorStructures<'a>,
        sys: &'a dyn ConservationLaw,
        u0: &SpaceTimeCoeffs,
    ) -> Result<Self> {
        let explicit_part = structs.update(u0, sys)?;
        Ok(Self { structs, sys, explicit_part })
    }

    fn wrap(&self, v: &[f64]) -> SpaceTimeCoeffs {
        SpaceTimeCoeffs { degree: self.structs.degree(), n_vars: self.structs.n_vars, values: v.to_vec() }
    }
}

impl DecOperatorPair for AderDecOperators<'_> {
    fn delta(&self) -> f64 {
        self.structs.dt
    }

    fn apply_l1(&self, u: &[f64]) -> Result<Vec<f64>> {
        Ok(u.iter().zip(&self.explicit_part.values).map(|(a, b)| a - b).collect())
    }

    fn apply_l2(&self, u: &[f64]) -> Result<Vec<f64>> {
        let next = self.structs.update(&self.wrap(u), self.sys)?;
        Ok(u.iter().zip(&next.values).map(|(a, b)| a - b).collect())
    }

    fn solve_l1(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        Ok(rhs.iter().zip(&self.explicit_part.values).map(|(a, b)| a + b).collect())
    }
}

/// Total number of space-time unknowns per component at `degree`.
pub fn dofs(degree: usize) -> usize {
    space_time_len(degree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{embed_coeffs, gauss_rule};
    use crate::dec::{dec_run_classic, DecIterate};
    use crate::equations::{advection_system, burgers_system, Euler};

    fn cell(h: f64) -> CellGeometry {
        CellGeometry { x_center: 0.0, h }
    }

    /// Independent oracle for `B_ref`: exact rational moments of monomials,
    /// no Gauss quadrature and no shared helper.
    fn b_oracle(degree: usize) -> Vec<Vec<f64>> {
        let modes = space_time_modes(degree);
        let fact = |n: usize| (1..=n).map(|k| k as f64).product::<f64>();
        let space = |a: usize| {
            // int_{-1/2}^{1/2} x^a dx
            if a % 2 == 1 { 0.0 } else { 2.0 * 0.5f64.powi(a as i32 + 1) / (a as f64 + 1.0) }
        };
        modes
            .iter()
            .map(|&(ij, mj)| {
                modes
                    .iter()
                    .map(|&(il, ml)| {
                        let sx = space(ij + il) / (fact(ij) * fact(il));
                        let end = 1.0 / (fact(mj) * fact(ml));
                        let vol = if mj == 0 {
                            0.0
                        } else {
                            // int_0^1 t^ml/ml! * t^(mj-1)/(mj-1)! dt
                            1.0 / (fact(ml) * fact(mj - 1) * (ml + mj) as f64)
                        };
                        sx * (end - vol)
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn degree_two_b_matches_oracle() {
        let cache = PredictorCache::new(2).unwrap();
        let s = build_structures(&cache, cell(1.0), 1.0, &[1.0], 1, 2).unwrap();
        let b = s.b_matrix();
        let oracle = b_oracle(2);
        // Frozen spot values of the oracle: theta_0 = 1, theta_1 = tau,
        // theta_2 = xi (ordering (0,0),(0,1),(1,0),...).
        assert!((oracle[0][0] - 1.0).abs() < 1e-15);
        assert!((oracle[1][0] - 0.0).abs() < 1e-15); // 1*1 - int 1 * 1 = 0
        assert!((oracle[1][1] - 0.5).abs() < 1e-15); // 1 - int tau = 1/2
        for j in 0..6 {
            for l in 0..6 {
                assert!((b[(j, l)] - oracle[j][l]).abs() < 1e-14, "({j},{l})");
            }
        }
    }

    #[test]
    fn b_matrix_quadrature_cross_check() {
        // Same integrals through Gauss quadrature of the basis functions.
        for degree in 0..=5 {
            let t = DegreeTables::new(degree).unwrap();
            let g = gauss_rule(degree + 2).unwrap();
            for (j, &(ij, mj)) in t.modes.iter().enumerate() {
                for (l, &(il, ml)) in t.modes.iter().enumerate() {
                    let sx = g.integrate(-0.5, 0.5, |x| taylor(ij, x) * taylor(il, x));
                    let vol = g.integrate(0.0, 1.0, |s| taylor(ml, s) * taylor_derivative(mj, s));
                    let want = sx * (taylor(ml, 1.0) * taylor(mj, 1.0) - vol);
                    assert!((t.b_reference()[(j, l)] - want).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn degree_zero_structures() {
        let cache = PredictorCache::new(0).unwrap();
        let h = 0.3;
        let s = build_structures(&cache, cell(h), 0.01, &[2.0], 1, 0).unwrap();
        assert!((s.b_matrix()[(0, 0)] - h).abs() < 1e-15);
        assert!((s.r()[0] - h * 2.0).abs() < 1e-15);
    }

    #[test]
    fn degree_one_r_of_constant() {
        let cache = PredictorCache::new(1).unwrap();
        let h = 0.25;
        let s = build_structures(&cache, cell(h), 0.1, &[3.0], 1, 1).unwrap();
        let r = s.r();
        assert!((r[0] - h * 3.0).abs() < 1e-15);
        assert_eq!(r[mode_index(1, 0)], 0.0);
        assert_eq!(r[mode_index(0, 1)], 0.0);
    }

    #[test]
    fn b_scales_with_h() {
        let cache = PredictorCache::new(3).unwrap();
        let a = build_structures(&cache, cell(1.0), 0.1, &[1.0], 1, 3).unwrap().b_matrix();
        let b = build_structures(&cache, cell(0.01), 0.2, &[1.0], 1, 3).unwrap().b_matrix();
        assert!((a * 0.01 - b).abs().max() < 1e-15);
    }

    #[test]
    fn phi_of_constant_vanishes() {
        let cache = PredictorCache::new(3).unwrap();
        let adv = advection_system(1.3);
        let s = build_structures(&cache, cell(0.1), 0.05, &[0.7], 1, 3).unwrap();
        let c = SpaceTimeCoeffs::constant(3, &[0.7]);
        assert!(assemble_phi(&s, &c, &adv).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn phi_of_linear_advection_profile() {
        // u_h = s * xi on a cell of length h: d_x u = s / h.
        let cache = PredictorCache::new(1).unwrap();
        let (a, slope, h, dt) = (1.0, 2.0, 0.5, 0.1);
        let adv = advection_system(a);
        let s = build_structures(&cache, cell(h), dt, &[0.0, slope], 1, 1).unwrap();
        let mut c = SpaceTimeCoeffs::zeros(1, 1);
        c.values[mode_index(1, 0)] = slope;
        let phi = assemble_phi(&s, &c, &adv).unwrap();
        // int int a (s/h) dx dt = a s dt
        assert!((phi[0] - a * slope * dt).abs() < 1e-15);
    }

    #[test]
    fn phi_of_burgers_ramp() {
        // u_h = x on the unit cell [-1/2, 1/2]: int int u u_x dx dt = dt [u^2/2] = 0,
        // so shift to u_h = x + 1/2, giving dt * (1/2 - 0) = dt / 2.
        let cache = PredictorCache::new(1).unwrap();
        let dt = 0.3;
        let s = build_structures(&cache, cell(1.0), dt, &[0.5, 1.0], 1, 1).unwrap();
        let mut c = SpaceTimeCoeffs::zeros(1, 1);
        c.values[0] = 0.5;
        c.values[mode_index(1, 0)] = 1.0;
        let phi = assemble_phi(&s, &c, &burgers_system()).unwrap();
        assert!((phi[0] - dt / 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_flux_gives_projection_and_stalls() {
        let cache = PredictorCache::new(2).unwrap();
        let adv = advection_system(0.0);
        let un = [1.0, 0.3, -0.2];
        let s = build_structures(&cache, cell(0.1), 0.05, &un, 1, 2).unwrap();
        let u0 = SpaceTimeCoeffs::zeros(2, 1);
        let one = predictor_classic(&s, u0.clone(), &adv, ClassicStop::FixedIterations(1)).unwrap();
        let three = predictor_classic(&s, u0, &adv, ClassicStop::FixedIterations(3)).unwrap();
        let expect = constant_in_time(&un, 1, 2);
        assert!(one.coeffs.max_abs_diff(&expect) < 1e-13);
        assert!(three.coeffs.max_abs_diff(&one.coeffs) < 1e-15);
    }

    fn exact_translate_coeffs(a: f64, h: f64, dt: f64, slope: f64) -> SpaceTimeCoeffs {
        // u(x, t) = slope * (x - a t) = slope h xi - slope a dt tau
        let mut c = SpaceTimeCoeffs::zeros(1, 1);
        c.values[mode_index(1, 0)] = slope * h;
        c.values[mode_index(0, 1)] = -slope * a * dt;
        c
    }

    #[test]
    fn reproduces_linear_translate() {
        let cache = PredictorCache::new(1).unwrap();
        let (a, h, dt) = (1.0, 1.0, 0.4);
        let adv = advection_system(a);
        let un = [0.0, h];
        let s = build_structures(&cache, cell(h), dt, &un, 1, 1).unwrap();
        let u0 = constant_in_time(&un, 1, 1);
        let out = predictor_classic(&s, u0, &adv, ClassicStop::FixedIterations(2)).unwrap();
        assert!(out.coeffs.max_abs_diff(&exact_translate_coeffs(a, h, dt, 1.0)) <= 1e-12);
    }

    #[test]
    fn polynomial_exactness_up_to_degree_five() {
        // u(x, t) = g(x - a t), g(y) = sum_k g_k y^k; in reference coordinates
        // x = h xi, t = dt tau.
        let (a, h, dt): (f64, f64, f64) = (0.8, 0.2, 0.05);
        let adv = advection_system(a);
        let g = [0.3, -1.1, 2.0, 0.7, -3.0, 1.5];
        for m in 0..=5 {
            let cache = PredictorCache::new(m).unwrap();
            // Spatial Taylor coefficients: g^(k)(0) h^k.
            let un: Vec<f64> = (0..=m).map(|k| g[k] * factorial(k) * h.powi(k as i32)).collect();
            let s = build_structures(&cache, cell(h), dt, &un, 1, m).unwrap();
            let u0 = constant_in_time(&un, 1, m);
            let out = predictor_classic(&s, u0, &adv, ClassicStop::FixedIterations(m + 1)).unwrap();
            let exact = |x: f64, t: f64| (0..=m).map(|k| g[k] * (x - a * t).powi(k as i32)).sum::<f64>();
            let gq = gauss_rule(m + 2).unwrap();
            let mut v = [0.0];
            for &sx in &gq.nodes {
                for &st in &gq.nodes {
                    out.coeffs.eval_reference(sx - 0.5, st, &mut v);
                    let e = exact((sx - 0.5) * h, st * dt);
                    assert!((v[0] - e).abs() <= 1e-11, "m={m}: {} vs {e}", v[0]);
                }
            }
        }
    }

    #[test]
    fn constant_state_is_fixed_point() {
        let e = Euler::new(1.4).unwrap();
        let state = e.conservative(0.9, 0.4, 2.0);
        for m in 0..=4 {
            let cache = PredictorCache::new(m).unwrap();
            let s = build_structures(&cache, cell(0.05), 0.01, &state, 3, m).unwrap();
            let u0 = constant_in_time(&state, 3, m);
            let out = predictor_classic(&s, u0.clone(), &e, ClassicStop::FixedIterations(m + 1)).unwrap();
            assert!(out.coeffs.max_abs_diff(&u0) <= 1e-14);
            let ad = predictor_adaptive(&cache, cell(0.05), 0.01, &state, &e, Some(&AdmissibilityCriterion::euler_positivity(1.4))).unwrap();
            assert!(!ad.limited);
            assert!(embed_coeffs(&ad.coeffs, m).unwrap().max_abs_diff(&u0) <= 1e-14);
        }
    }

    #[test]
    fn adaptive_degree_zero_is_single_sweep() {
        let cache = PredictorCache::new(0).unwrap();
        let adv = advection_system(1.0);
        let out = predictor_adaptive(&cache, cell(0.1), 0.05, &[0.4], &adv, None).unwrap();
        assert_eq!(out.achieved_iterations, 1);
        assert_eq!(out.work_units, 1);
        assert_eq!(out.coeffs.values, vec![0.4]);
        assert_eq!(adaptive_schedule(0), vec![0]);
        assert_eq!(adaptive_schedule(3), vec![1, 2, 3, 3]);
    }

    #[test]
    fn tolerance_mode_reports_non_contraction() {
        // Huge time step relative to h: the sweep cannot contract.
        let cache = PredictorCache::new(2).unwrap();
        let b = burgers_system();
        let un = [1.0, 3.0, 2.0];
        let s = build_structures(&cache, cell(0.01), 1.0, &un, 1, 2).unwrap();
        let r = predictor_classic(&s, constant_in_time(&un, 1, 2), &b, ClassicStop::Tolerance(1e-12));
        assert!(matches!(r, Err(Error::NonContraction { .. }) | Err(Error::DivergedIteration { .. })), "{r:?}");
    }

    #[test]
    fn tolerance_mode_agrees_with_fixed_iterations() {
        let e = Euler::new(1.4).unwrap();
        let m = 2;
        let cache = PredictorCache::new(m).unwrap();
        let h = 0.05;
        // Smooth state: rho = 1 + 0.2 sin, u = 0.5, p = 1 sampled as Taylor data.
        let un = [1.0, 0.5, 2.5 + 0.125, 0.2 * h * 6.283, 0.1 * h * 6.283, 0.025 * h * 6.283, 0.0, 0.0, 0.0];
        let mut diffs = Vec::new();
        for dt in [2e-3, 1e-3, 5e-4] {
            let s = build_structures(&cache, cell(h), dt, &un, 3, m).unwrap();
            let u0 = constant_in_time(&un, 3, m);
            let fixed = predictor_classic(&s, u0.clone(), &e, ClassicStop::FixedIterations(m + 1)).unwrap();
            let tol = predictor_classic(&s, u0, &e, ClassicStop::Tolerance(1e-12)).unwrap();
            assert!(tol.achieved_iterations <= 2 * (m + 2));
            diffs.push(fixed.coeffs.max_abs_diff(&tol.coeffs));
        }
        // O(dt^{M+2}) difference: halving dt divides it by about 2^{M+2}.
        for w in diffs.windows(2) {
            if w[0] > 1e-15 {
                assert!(w[1] <= w[0] / 2f64.powf(m as f64 + 1.5) + 1e-16, "{diffs:?}");
            }
        }
    }

    #[test]
    fn classic_matches_dec_engine() {
        let e = Euler::new(1.4).unwrap();
        let m = 3;
        let cache = PredictorCache::new(m).unwrap();
        let un = [1.0, 0.2, 2.6, 0.05, -0.01, 0.02, 0.0, 0.0, 0.0, 0.001, 0.0, 0.0];
        let s = build_structures(&cache, cell(0.1), 0.01, &un, 3, m).unwrap();
        let u0 = constant_in_time(&un, 3, m);
        let direct = predictor_classic(&s, u0.clone(), &e, ClassicStop::FixedIterations(4)).unwrap();
        let ops = AderDecOperators::new(s.clone(), &e, &u0).unwrap();
        let via_dec = dec_run_classic(&ops, DecIterate::new(u0.values.clone()), 4).unwrap();
        for (a, b) in direct.coeffs.values.iter().zip(&via_dec.coeffs) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn doom_rejects_inadmissible_iterates() {
        // Strong expansion: momentum ramp from -2 to 2 across a cell at low pressure.
        let e = Euler::new(1.4).unwrap();
        let m = 3;
        let cache = PredictorCache::new(m).unwrap();
        let crit = AdmissibilityCriterion::euler_positivity(1.4);
        let un = [1.0, 0.0, 3.0, 0.0, 4.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let out = predictor_adaptive(&cache, cell(0.01), 0.004, &un, &e, Some(&crit)).unwrap();
        assert!(out.limited);
        assert!(out.rejected_at.is_some());
        assert_eq!(out.achieved_iterations + 1, out.rejected_at.unwrap());
        let full = embed_coeffs(&out.coeffs, m).unwrap();
        assert!(crit.accepts(&full, &cache.tables(m).unwrap().nodes));
        assert!(crit.accepts(&full, &face_points(m).unwrap()));
    }

    #[test]
    fn contraction_after_second_sweep() {
        let e = Euler::new(1.4).unwrap();
        let m = 4;
        let cache = PredictorCache::new(m).unwrap();
        let h = 0.02;
        let k = 2.0 * std::f64::consts::PI * h;
        // rho = 1 + 0.2 sin(2 pi x) near x = 0.1, u = 1, p = 1
        let x0: f64 = 0.1 * 2.0 * std::f64::consts::PI;
        let mut un = vec![0.0; (m + 1) * 3];
        for j in 0..=m {
            let d = 0.2 * k.powi(j as i32) * (x0 + j as f64 * std::f64::consts::FRAC_PI_2).sin();
            let rho = if j == 0 { 1.0 + d } else { d };
            un[j * 3] = rho;
            un[j * 3 + 1] = rho; // q = rho * 1
            un[j * 3 + 2] = if j == 0 { 2.5 + 0.5 * rho } else { 0.5 * rho };
        }
        let lam = 1.0 + (1.4f64 / 0.8).sqrt();
        let dt = 0.5 * 0.5 * h / ((2 * m + 1) as f64 * lam);
        let s = build_structures(&cache, cell(h), dt, &un, 3, m).unwrap();
        let mut u = constant_in_time(&un, 3, m);
        let mut changes = Vec::new();
        for _ in 0..7 {
            let next = s.update(&u, &e).unwrap();
            changes.push(next.max_abs_diff(&u));
            u = next;
        }
        // Index p holds the change of sweep p + 1; stop at the round-off floor.
        for p in 1..changes.len() - 1 {
            if changes[p] > 1e-13 {
                assert!(changes[p + 1] <= 0.5 * changes[p], "{changes:?}");
            }
        }
    }
}

//! Explicit corrector step with Rusanov interface fluxes.
//!
//! For cell `K` with degree-N data `c`:
//!
//! `h S (c^{n+1} - c^n)_j = -int (phi_j(1/2) F_R - phi_j(-1/2) F_L) dt
//!     + int int F(u_h) d_xi phi_j dxi dt + h int int s phi_j dxi dt`
//!
//! where `u_h` is the cell's space-time predictor and `F_L`, `F_R` are
//! numerical fluxes between neighbouring predictors. Interface fluxes are
//! evaluated once per face and shared by both cells. The finite-volume
//! corrector is the `N = 0` case.

use nalgebra::DMatrix;

use crate::basis::{gauss_rule, spatial_mass_reference, taylor, taylor_cell_integral, taylor_derivative, SpaceTimeCoeffs};
use crate::equations::{ConservationLaw, MAX_VARS};
use crate::error::{Error, Result};
use crate::predictor::CellGeometry;

/// Local Lax-Friedrichs flux `(F(uL) + F(uR))/2 - s (uR - uL)/2`.
pub fn rusanov_flux(ul: &[f64], ur: &[f64], sys: &dyn ConservationLaw, out: &mut [f64]) -> Result<()> {
    let q = sys.n_vars();
    let mut fl = [0.0; MAX_VARS];
    let mut fr = [0.0; MAX_VARS];
    sys.flux(ul, &mut fl[..q])?;
    sys.flux(ur, &mut fr[..q])?;
    let s = sys.max_abs_eigenvalue(ul)?.max(sys.max_abs_eigenvalue(ur)?);
    for c in 0..q {
        out[c] = 0.5 * (fl[c] + fr[c]) - 0.5 * s * (ur[c] - ul[c]);
    }
    Ok(())
}

/// Quadrature and basis tables of the corrector for data degree `N` and
/// predictor degree `M`.
#[derive(Debug, Clone)]
pub struct CorrectorTables {
    pub data_degree: usize,
    pub predictor_degree: usize,
    /// Gauss times in `[0, 1]` and weights (`M + 1` points).
    pub times: Vec<f64>,
    pub time_weights: Vec<f64>,
    /// Space-time volume nodes `(xi, tau)` with weights and `d_xi phi_j`.
    volume: Vec<(f64, f64, f64)>,
    dphi: Vec<f64>,
    phi: Vec<f64>,
    phi_left: Vec<f64>,
    phi_right: Vec<f64>,
    mass: DMatrix<f64>,
    mass_inv: DMatrix<f64>,
}

impl CorrectorTables {
    pub fn new(data_degree: usize, predictor_degree: usize) -> Result<Self> {
        if data_degree > predictor_degree {
            return Err(Error::Config(format!(
                "data degree {data_degree} exceeds predictor degree {predictor_degree}"
            )));
        }
        let g = gauss_rule(predictor_degree + 1)?;
        let n1 = data_degree + 1;
        let mut volume = Vec::new();
        let mut dphi = Vec::new();
        let mut phi = Vec::new();
        for (sx, wx) in g.nodes.iter().zip(&g.weights) {
            for (st, wt) in g.nodes.iter().zip(&g.weights) {
                let xi = sx - 0.5;
                volume.push((xi, *st, wx * wt));
                dphi.extend((0..n1).map(|j| taylor_derivative(j, xi)));
                phi.extend((0..n1).map(|j| taylor(j, xi)));
            }
        }
        let mass = spatial_mass_reference(data_degree);
        let mass_inv = mass.clone().try_inverse().ok_or(Error::Singular("corrector mass matrix"))?;
        Ok(Self {
            data_degree,
            predictor_degree,
            times: g.nodes.clone(),
            time_weights: g.weights.clone(),
            volume,
            dphi,
            phi,
            phi_left: (0..n1).map(|j| taylor(j, -0.5)).collect(),
            phi_right: (0..n1).map(|j| taylor(j, 0.5)).collect(),
            mass,
            mass_inv,
        })
    }

    /// Reference mass matrix `int phi_i phi_k dxi`; the physical one is `h` times it.
    pub fn mass_reference(&self) -> &DMatrix<f64> {
        &self.mass
    }
}

/// Numerical flux across the face between `left` and `right` predictors at
/// every Gauss time, `times.len() * n_vars` values.
pub fn interface_fluxes(
    left: &SpaceTimeCoeffs,
    right: &SpaceTimeCoeffs,
    sys: &dyn ConservationLaw,
    tables: &CorrectorTables,
) -> Result<Vec<f64>> {
    let q = sys.n_vars();
    let mut out = vec![0.0; tables.times.len() * q];
    let mut ul = [0.0; MAX_VARS];
    let mut ur = [0.0; MAX_VARS];
    for (k, &tau) in tables.times.iter().enumerate() {
        left.eval_reference(0.5, tau, &mut ul[..q]);
        right.eval_reference(-0.5, tau, &mut ur[..q]);
        rusanov_flux(&ul[..q], &ur[..q], sys, &mut out[k * q..(k + 1) * q])?;
    }
    Ok(out)
}

/// Corrector update of one cell given its predictor and the numerical fluxes
/// on its left and right faces. `cn` and `out` hold `(N+1) * n_vars`
/// coefficients.
#[allow(clippy::too_many_arguments)]
pub fn corrector_update(
    tables: &CorrectorTables,
    geometry: CellGeometry,
    dt: f64,
    cn: &[f64],
    own: &SpaceTimeCoeffs,
    flux_left: &[f64],
    flux_right: &[f64],
    sys: &dyn ConservationLaw,
    out: &mut [f64],
) -> Result<()> {
    let q = sys.n_vars();
    let n1 = tables.data_degree + 1;
    let h = geometry.h;
    // Rows j >= 1 see fluxes relative to the flux of the cell mean. The
    // shift integrates to zero against them and removes round-off for
    // nearly constant states. Row 0 keeps the raw face fluxes.
    let mut shift = [0.0; MAX_VARS];
    if n1 > 1 {
        let mut mean = [0.0; MAX_VARS];
        cell_mean(cn, q, &mut mean[..q]);
        if sys.flux(&mean[..q], &mut shift[..q]).is_err() {
            shift = [0.0; MAX_VARS];
        }
    }
    // rhs / h, coefficient-major
    let mut rhs = vec![0.0; n1 * q];
    for (k, w) in tables.time_weights.iter().enumerate() {
        let fl = &flux_left[k * q..(k + 1) * q];
        let fr = &flux_right[k * q..(k + 1) * q];
        for c in 0..q {
            rhs[c] -= dt / h * w * (fr[c] - fl[c]);
        }
        for j in 1..n1 {
            for c in 0..q {
                rhs[j * q + c] -= dt / h
                    * w
                    * (tables.phi_right[j] * (fr[c] - shift[c]) - tables.phi_left[j] * (fl[c] - shift[c]));
            }
        }
    }
    let with_source = sys.has_source();
    if n1 > 1 || with_source {
        let mut u = [0.0; MAX_VARS];
        let mut f = [0.0; MAX_VARS];
        let mut s = [0.0; MAX_VARS];
        for (k, &(xi, tau, w)) in tables.volume.iter().enumerate() {
            own.eval_reference(xi, tau, &mut u[..q]);
            if n1 > 1 {
                sys.flux(&u[..q], &mut f[..q])?;
            }
            if with_source {
                sys.source(geometry.x_center + h * xi, &u[..q], &mut s[..q]);
            }
            for j in 0..n1 {
                let d = tables.dphi[k * n1 + j] * dt / h * w;
                let p = tables.phi[k * n1 + j] * dt * w;
                for c in 0..q {
                    let mut v = 0.0;
                    if j > 0 {
                        v += d * (f[c] - shift[c]);
                    }
                    if with_source {
                        v += p * s[c];
                    }
                    rhs[j * q + c] += v;
                }
            }
        }
    }
    for c in 0..q {
        let mut delta = [0.0; 8];
        for (i, d) in delta.iter_mut().enumerate().take(n1) {
            *d = (0..n1).map(|k| tables.mass_inv[(i, k)] * rhs[k * q + c]).sum();
        }
        // Make the mean row hold exactly so cell averages telescope.
        let rest: f64 = (1..n1).map(|k| tables.mass[(0, k)] * delta[k]).sum();
        delta[0] = rhs[c] - rest;
        for i in 0..n1 {
            out[i * q + c] = cn[i * q + c] + delta[i];
        }
    }
    Ok(())
}

/// DG corrector for one cell from its own and its neighbours' predictors.
#[allow(clippy::too_many_arguments)]
pub fn corrector_dg(
    tables: &CorrectorTables,
    geometry: CellGeometry,
    dt: f64,
    cn: &[f64],
    left: &SpaceTimeCoeffs,
    own: &SpaceTimeCoeffs,
    right: &SpaceTimeCoeffs,
    sys: &dyn ConservationLaw,
) -> Result<Vec<f64>> {
    let fl = interface_fluxes(left, own, sys, tables)?;
    let fr = interface_fluxes(own, right, sys, tables)?;
    let mut out = vec![0.0; cn.len()];
    corrector_update(tables, geometry, dt, cn, own, &fl, &fr, sys, &mut out)?;
    Ok(out)
}

/// Finite-volume corrector: the `N = 0` case, returning the new cell mean.
#[allow(clippy::too_many_arguments)]
pub fn corrector_fv(
    tables: &CorrectorTables,
    geometry: CellGeometry,
    dt: f64,
    mean: &[f64],
    left: &SpaceTimeCoeffs,
    own: &SpaceTimeCoeffs,
    right: &SpaceTimeCoeffs,
    sys: &dyn ConservationLaw,
) -> Result<Vec<f64>> {
    if tables.data_degree != 0 {
        return Err(Error::Config("finite-volume corrector needs data degree 0".into()));
    }
    corrector_dg(tables, geometry, dt, mean, left, own, right, sys)
}

/// Cell average of degree-N Taylor data.
pub fn cell_mean(coeffs: &[f64], n_vars: usize, out: &mut [f64]) {
    out.fill(0.0);
    for (k, chunk) in coeffs.chunks(n_vars).enumerate() {
        let w = taylor_cell_integral(k);
        for (o, c) in out.iter_mut().zip(chunk) {
            *o += w * c;
        }
    }
}

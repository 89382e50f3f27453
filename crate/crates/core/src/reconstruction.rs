//! Degree-M spatial reconstruction from degree-N cell data on a uniform mesh.
//!
//! The central polynomial keeps the centre cell's `N + 1` moments exactly and
//! fits the neighbours' cell averages in the least-squares sense. With `N = 0`
//! and `M + 1` cells this is plain conservative interpolation. Stencils of even
//! width lean one cell to the left.
//!
//! `Cweno` blends the central polynomial with the two one-sided linear
//! polynomials (linear weights 0.7 / 0.15 / 0.15, Jiang-Shu smoothness
//! indicators, `eps = 1e-12`, power 4). Components are reconstructed
//! independently.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::{spatial_mass_reference, spatial_mean, taylor_cell_integral};
use crate::equations::MAX_VARS;
use crate::error::{Error, Result};
use crate::predictor::spatial_moment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ReconstructionMode {
    Central,
    #[default]
    Cweno,
}

pub const CWENO_CENTRAL_WEIGHT: f64 = 0.7;
pub const CWENO_LATERAL_WEIGHT: f64 = 0.15;
pub const CWENO_EPSILON: f64 = 1e-12;
pub const CWENO_POWER: i32 = 4;

/// Mean of the Taylor function `phi_k` over the cell at integer offset `o`,
/// in the centre cell's reference coordinate.
fn offset_mean(k: usize, o: isize) -> f64 {
    if o == 0 {
        return taylor_cell_integral(k);
    }
    let (a, b) = (o as f64 - 0.5, o as f64 + 0.5);
    let f = (1..=k + 1).map(|j| j as f64).product::<f64>();
    (b.powi(k as i32 + 1) - a.powi(k as i32 + 1)) / f
}

/// Precomputed reconstruction operator for one `(N, M, mode)`.
#[derive(Debug, Clone)]
pub struct Reconstructor {
    data_degree: usize,
    degree: usize,
    mode: ReconstructionMode,
    offsets: Vec<isize>,
    central_offsets: Vec<isize>,
    /// Maps `[d_0 .. d_N, means of the other central cells]` to the `M + 1`
    /// Taylor coefficients.
    matrix: DMatrix<f64>,
}

impl Reconstructor {
    pub fn new(data_degree: usize, degree: usize, mode: ReconstructionMode) -> Result<Self> {
        if data_degree > degree {
            return Err(Error::Config(format!("data degree {data_degree} exceeds target degree {degree}")));
        }
        let lo = -(degree.div_ceil(2) as isize);
        let hi = (degree / 2) as isize;
        let central_offsets: Vec<isize> = (lo..=hi).collect();
        let hi_all = if mode == ReconstructionMode::Cweno && degree > data_degree { hi.max(1) } else { hi };
        let lo_all = if mode == ReconstructionMode::Cweno && degree > data_degree { lo.min(-1) } else { lo };
        let offsets = (lo_all..=hi_all).collect();
        let matrix = central_matrix(data_degree, degree, &central_offsets)?;
        Ok(Self { data_degree, degree, mode, offsets, central_offsets, matrix })
    }

    pub fn data_degree(&self) -> usize {
        self.data_degree
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn mode(&self) -> ReconstructionMode {
        self.mode
    }

    /// Cell offsets whose data [`Self::reconstruct`] expects, in order.
    pub fn stencil(&self) -> &[isize] {
        &self.offsets
    }

    pub fn is_identity(&self) -> bool {
        self.data_degree == self.degree
    }

    /// `stencil_data[k]` holds the degree-N coefficients (`(N+1) * n_vars`,
    /// coefficient-major) of the cell at `stencil()[k]`. Writes
    /// `(M+1) * n_vars` coefficients to `out`.
    pub fn reconstruct(&self, stencil_data: &[&[f64]], n_vars: usize, out: &mut [f64]) -> Result<()> {
        if stencil_data.len() != self.offsets.len() {
            return Err(Error::Config(format!(
                "stencil needs {} cells, got {}",
                self.offsets.len(),
                stencil_data.len()
            )));
        }
        let n1 = self.data_degree + 1;
        out.fill(0.0);
        let center = self.position(0);
        if self.is_identity() {
            out.copy_from_slice(&stencil_data[center][..n1 * n_vars]);
            return Ok(());
        }
        let mut means = vec![[0.0; MAX_VARS]; self.offsets.len()];
        for (m, d) in means.iter_mut().zip(stencil_data) {
            spatial_mean(d, n_vars, &mut m[..n_vars]);
        }
        let m1 = self.degree + 1;
        let mut poly = vec![0.0; m1];
        for c in 0..n_vars {
            // data vector for component c
            let mut v: Vec<f64> = (0..n1).map(|k| stencil_data[center][k * n_vars + c]).collect();
            v.extend(
                self.central_offsets
                    .iter()
                    .filter(|&&o| o != 0)
                    .map(|&o| means[self.position(o)][c]),
            );
            for (i, p) in poly.iter_mut().enumerate() {
                *p = (0..v.len()).map(|j| self.matrix[(i, j)] * v[j]).sum();
            }
            if self.mode == ReconstructionMode::Cweno {
                let mean0 = means[center][c];
                let left = mean0 - means[self.position(-1)][c];
                let right = means[self.position(1)][c] - mean0;
                cweno_blend(&mut poly, mean0, left, right);
            }
            for (i, p) in poly.iter().enumerate() {
                out[i * n_vars + c] = *p;
            }
        }
        Ok(())
    }

    fn position(&self, o: isize) -> usize {
        (o - self.offsets[0]) as usize
    }
}

fn central_matrix(n: usize, m: usize, offsets: &[isize]) -> Result<DMatrix<f64>> {
    let m1 = m + 1;
    let n1 = n + 1;
    let neighbours: Vec<isize> = offsets.iter().copied().filter(|&o| o != 0).collect();
    let data_len = n1 + neighbours.len();
    if n == m {
        return Ok(DMatrix::identity(m1, data_len));
    }
    // KKT system of: min |G c - means|^2  s.t.  S_N c = S_NN d.
    let g = DMatrix::from_fn(neighbours.len(), m1, |r, k| offset_mean(k, neighbours[r]));
    let s = spatial_mass_reference(m);
    let size = m1 + n1;
    let mut kkt = DMatrix::zeros(size, size);
    kkt.view_mut((0, 0), (m1, m1)).copy_from(&(g.transpose() * &g * 2.0));
    for i in 0..n1 {
        for k in 0..m1 {
            kkt[(m1 + i, k)] = s[(i, k)];
            kkt[(k, m1 + i)] = s[(i, k)];
        }
    }
    let mut rhs = DMatrix::zeros(size, data_len);
    for i in 0..n1 {
        for k in 0..n1 {
            rhs[(m1 + i, k)] = s[(i, k)];
        }
    }
    rhs.view_mut((0, n1), (m1, neighbours.len())).copy_from(&(g.transpose() * 2.0));
    let sol = kkt.lu().solve(&rhs).ok_or(Error::Singular("reconstruction system"))?;
    Ok(sol.rows(0, m1).into_owned())
}

/// Jiang-Shu indicator `sum_l int (d^l p / dxi^l)^2` of a Taylor polynomial.
pub fn smoothness_indicator(poly: &[f64]) -> f64 {
    let mut is = 0.0;
    for l in 1..poly.len() {
        let d = &poly[l..];
        for (a, ca) in d.iter().enumerate() {
            for (b, cb) in d.iter().enumerate() {
                is += ca * cb * spatial_moment(a, b);
            }
        }
    }
    is
}

/// Nonlinear CWENO weights `(central, left, right)` for the given indicators.
pub fn cweno_weights(is_central: f64, is_left: f64, is_right: f64) -> [f64; 3] {
    let alpha = |d: f64, is: f64| d / (is + CWENO_EPSILON).powi(CWENO_POWER);
    let a = [
        alpha(CWENO_CENTRAL_WEIGHT, is_central),
        alpha(CWENO_LATERAL_WEIGHT, is_left),
        alpha(CWENO_LATERAL_WEIGHT, is_right),
    ];
    let sum: f64 = a.iter().sum();
    if !sum.is_finite() || sum == 0.0 {
        return [CWENO_CENTRAL_WEIGHT, CWENO_LATERAL_WEIGHT, CWENO_LATERAL_WEIGHT];
    }
    a.map(|v| v / sum)
}

/// Replaces the central polynomial `poly` by its CWENO blend with the
/// one-sided linear polynomials `mean + slope * xi`.
fn cweno_blend(poly: &mut [f64], mean: f64, left_slope: f64, right_slope: f64) {
    let lat = CWENO_LATERAL_WEIGHT;
    // P0 = (P_opt - lat P_L - lat P_R) / d0
    let mut p0 = poly.to_vec();
    p0[0] -= 2.0 * lat * mean;
    p0[1] -= lat * (left_slope + right_slope);
    for v in p0.iter_mut() {
        *v /= CWENO_CENTRAL_WEIGHT;
    }
    let w = cweno_weights(
        smoothness_indicator(&p0),
        left_slope * left_slope,
        right_slope * right_slope,
    );
    for (i, p) in poly.iter_mut().enumerate() {
        *p = w[0] * p0[i];
    }
    poly[0] += (w[1] + w[2]) * mean;
    poly[1] += w[1] * left_slope + w[2] * right_slope;
}

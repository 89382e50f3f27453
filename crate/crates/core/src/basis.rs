//! Modal Taylor bases in space and time, Gauss-Legendre quadrature and the
//! zero-padding embedding between space-time spaces of increasing degree.
//!
//! All bases are scaled monomials `((x - center) / scale)^i / i!`. Space-time
//! functions are tensor products `phi_i(x) psi_m(t)` truncated to total degree
//! `i + m <= M` and enumerated by increasing total degree, so the degree-`p`
//! enumeration is a prefix of the degree-`M` one for every `p <= M`.

use crate::error::{Error, Result};

/// `xi^i / i!`.
pub fn taylor(i: usize, xi: f64) -> f64 {
    let mut v = 1.0;
    for k in 1..=i {
        v *= xi / k as f64;
    }
    v
}

/// Derivative of [`taylor`] with respect to `xi`.
pub fn taylor_derivative(i: usize, xi: f64) -> f64 {
    if i == 0 {
        0.0
    } else {
        taylor(i - 1, xi)
    }
}

/// `i!` as a float.
pub fn factorial(i: usize) -> f64 {
    (1..=i).fold(1.0, |acc, k| acc * k as f64)
}

/// One-dimensional modal Taylor basis on a cell or a time slab.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorBasis1D {
    pub degree: usize,
    pub center: f64,
    pub scale: f64,
}

impl TaylorBasis1D {
    pub fn new(degree: usize, center: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::Config(format!("basis scale must be positive, got {scale}")));
        }
        Ok(Self { degree, center, scale })
    }

    fn check(&self, i: usize) -> Result<()> {
        if i > self.degree {
            Err(Error::IndexOutOfRange { index: i, degree: self.degree })
        } else {
            Ok(())
        }
    }

    /// Value of basis function `i` at `x`.
    pub fn eval(&self, i: usize, x: f64) -> Result<f64> {
        self.check(i)?;
        Ok(taylor(i, (x - self.center) / self.scale))
    }

    /// Derivative of basis function `i` with respect to the physical coordinate.
    pub fn eval_derivative(&self, i: usize, x: f64) -> Result<f64> {
        self.check(i)?;
        Ok(taylor_derivative(i, (x - self.center) / self.scale) / self.scale)
    }
}

/// `eval_basis` on a [`TaylorBasis1D`].
pub fn eval_basis(basis: &TaylorBasis1D, i: usize, x: f64) -> Result<f64> {
    basis.eval(i, x)
}

/// Time derivative of a temporal Taylor basis function.
pub fn eval_basis_dt(basis: &TaylorBasis1D, i: usize, t: f64) -> Result<f64> {
    basis.eval_derivative(i, t)
}

/// Quadrature rule on the reference interval `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let len = b - a;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| w * f(a + len * s))
            .sum::<f64>()
            * len
    }
}

pub const MAX_GAUSS_POINTS: usize = 16;

/// Gauss-Legendre rule with `n` points mapped to `[0, 1]`.
pub fn gauss_rule(n: usize) -> Result<QuadratureRule> {
    if n == 0 || n > MAX_GAUSS_POINTS {
        return Err(Error::Config(format!(
            "gauss rule needs 1..={MAX_GAUSS_POINTS} points, got {n}"
        )));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for k in 0..n.div_ceil(2) {
        // Newton on P_n starting from the Chebyshev-like guess.
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // x is the k-th largest root; mirror it.
        nodes[n - 1 - k] = 0.5 * (1.0 + x);
        nodes[k] = 0.5 * (1.0 - x);
        weights[n - 1 - k] = 0.5 * w;
        weights[k] = 0.5 * w;
    }
    Ok(QuadratureRule { nodes, weights })
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Number of space-time modes with total degree `<= degree` in 1D space + time.
pub fn space_time_len(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

/// Pairs `(i, m)` (space index, time index) ordered by total degree, then by `i`.
pub fn space_time_modes(degree: usize) -> Vec<(usize, usize)> {
    let mut modes = Vec::with_capacity(space_time_len(degree));
    for d in 0..=degree {
        for i in 0..=d {
            modes.push((i, d - i));
        }
    }
    modes
}

/// Tensorized space-time Taylor basis truncated by total degree.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeBasis {
    pub space: TaylorBasis1D,
    pub time: TaylorBasis1D,
    pub index_map: Vec<(usize, usize)>,
}

impl SpaceTimeBasis {
    pub fn new(degree: usize, x_center: f64, h: f64, t_start: f64, dt: f64) -> Result<Self> {
        Ok(Self {
            space: TaylorBasis1D::new(degree, x_center, h)?,
            time: TaylorBasis1D::new(degree, t_start, dt)?,
            index_map: space_time_modes(degree),
        })
    }

    /// Reference basis: cell centered at 0 with unit length, slab `[0, 1]`.
    pub fn reference(degree: usize) -> Self {
        Self {
            space: TaylorBasis1D { degree, center: 0.0, scale: 1.0 },
            time: TaylorBasis1D { degree, center: 0.0, scale: 1.0 },
            index_map: space_time_modes(degree),
        }
    }

    pub fn degree(&self) -> usize {
        self.space.degree
    }

    pub fn len(&self) -> usize {
        self.index_map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_map.is_empty()
    }

    pub fn eval(&self, l: usize, x: f64, t: f64) -> Result<f64> {
        let &(i, m) = self
            .index_map
            .get(l)
            .ok_or(Error::IndexOutOfRange { index: l, degree: self.degree() })?;
        Ok(self.space.eval(i, x)? * self.time.eval(m, t)?)
    }
}

/// Coefficients of a space-time polynomial against the degree-`p` enumeration,
/// stored mode-major: `values[l * n_vars + q]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeCoeffs {
    pub degree: usize,
    pub n_vars: usize,
    pub values: Vec<f64>,
}

impl SpaceTimeCoeffs {
    pub fn zeros(degree: usize, n_vars: usize) -> Self {
        Self { degree, n_vars, values: vec![0.0; space_time_len(degree) * n_vars] }
    }

    /// Space-time constant equal to `state`.
    pub fn constant(degree: usize, state: &[f64]) -> Self {
        let mut c = Self::zeros(degree, state.len());
        c.values[..state.len()].copy_from_slice(state);
        c
    }

    pub fn n_modes(&self) -> usize {
        space_time_len(self.degree)
    }

    pub fn mode(&self, l: usize) -> &[f64] {
        &self.values[l * self.n_vars..(l + 1) * self.n_vars]
    }

    /// Evaluates the polynomial at reference coordinates `xi in [-1/2, 1/2]`,
    /// `tau in [0, 1]`.
    pub fn eval_reference(&self, xi: f64, tau: f64, out: &mut [f64]) {
        out.fill(0.0);
        for (l, &(i, m)) in space_time_modes(self.degree).iter().enumerate() {
            let b = taylor(i, xi) * taylor(m, tau);
            for (o, c) in out.iter_mut().zip(self.mode(l)) {
                *o += c * b;
            }
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Zero-padding embedding from degree `src.degree` to `dst_degree`.
pub fn embed_coeffs(src: &SpaceTimeCoeffs, dst_degree: usize) -> Result<SpaceTimeCoeffs> {
    if dst_degree < src.degree {
        return Err(Error::Config(format!(
            "cannot embed degree {} into degree {dst_degree}",
            src.degree
        )));
    }
    let mut dst = SpaceTimeCoeffs::zeros(dst_degree, src.n_vars);
    dst.values[..src.values.len()].copy_from_slice(&src.values);
    Ok(dst)
}

/// `int_{-1/2}^{1/2} xi^k / k! dxi`.
pub fn taylor_cell_integral(k: usize) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        2.0 * 0.5f64.powi(k as i32 + 1) / ((k + 1) as f64 * factorial(k))
    }
}

/// Mean over the reference cell of a spatial Taylor polynomial with
/// coefficients `coeffs[k * n_vars + q]`.
pub fn spatial_mean(coeffs: &[f64], n_vars: usize, out: &mut [f64]) {
    out.fill(0.0);
    for (k, chunk) in coeffs.chunks(n_vars).enumerate() {
        let w = taylor_cell_integral(k);
        for (o, c) in out.iter_mut().zip(chunk) {
            *o += w * c;
        }
    }
}

/// Reference spatial mass matrix `S_ik = int phi_i phi_k dxi` for degree `n`.
pub fn spatial_mass_reference(n: usize) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_fn(n + 1, n + 1, |i, k| {
        taylor_cell_integral(i + k) * factorial(i + k) / (factorial(i) * factorial(k))
    })
}

/// Evaluates a spatial Taylor polynomial at reference coordinate `xi`.
pub fn eval_spatial(coeffs: &[f64], n_vars: usize, xi: f64, out: &mut [f64]) {
    out.fill(0.0);
    for (k, chunk) in coeffs.chunks(n_vars).enumerate() {
        let b = taylor(k, xi);
        for (o, c) in out.iter_mut().zip(chunk) {
            *o += b * c;
        }
    }
}

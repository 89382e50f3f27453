//! Conservation laws `u_t + f(u)_x = s(x, u)` in one space dimension.

use crate::error::{Error, Result};

/// Largest number of conserved components among the shipped systems.
pub const MAX_VARS: usize = 3;

/// Description of a hyperbolic system of conservation laws.
pub trait ConservationLaw: Send + Sync {
    fn name(&self) -> &'static str;

    fn n_vars(&self) -> usize;

    /// Names of the conserved components.
    fn component_names(&self) -> &'static [&'static str];

    fn flux(&self, u: &[f64], out: &mut [f64]) -> Result<()>;

    /// Directional derivative `f'(u) du`.
    fn flux_derivative(&self, u: &[f64], du: &[f64], out: &mut [f64]) -> Result<()>;

    fn source(&self, _x: f64, _u: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }

    fn has_source(&self) -> bool {
        false
    }

    fn max_abs_eigenvalue(&self, u: &[f64]) -> Result<f64>;

    /// Density and pressure for gas dynamics, `None` otherwise.
    fn density_pressure(&self, _u: &[f64]) -> Option<(f64, f64)> {
        None
    }

    /// Names of the quantities written to snapshots.
    fn output_names(&self) -> &'static [&'static str] {
        self.component_names()
    }

    /// Conserved state to snapshot quantities.
    fn to_output(&self, u: &[f64]) -> Vec<f64> {
        u.to_vec()
    }
}

/// `u_t + a u_x = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearAdvection {
    pub speed: f64,
}

pub fn advection_system(speed: f64) -> LinearAdvection {
    LinearAdvection { speed }
}

impl ConservationLaw for LinearAdvection {
    fn name(&self) -> &'static str {
        "advection"
    }
    fn n_vars(&self) -> usize {
        1
    }
    fn component_names(&self) -> &'static [&'static str] {
        &["u"]
    }
    fn flux(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = self.speed * u[0];
        Ok(())
    }
    fn flux_derivative(&self, _u: &[f64], du: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = self.speed * du[0];
        Ok(())
    }
    fn max_abs_eigenvalue(&self, _u: &[f64]) -> Result<f64> {
        Ok(self.speed.abs())
    }
}

/// Inviscid Burgers equation `u_t + (u^2 / 2)_x = 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Burgers;

pub fn burgers_system() -> Burgers {
    Burgers
}

impl ConservationLaw for Burgers {
    fn name(&self) -> &'static str {
        "burgers"
    }
    fn n_vars(&self) -> usize {
        1
    }
    fn component_names(&self) -> &'static [&'static str] {
        &["u"]
    }
    fn flux(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = 0.5 * u[0] * u[0];
        Ok(())
    }
    fn flux_derivative(&self, u: &[f64], du: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = u[0] * du[0];
        Ok(())
    }
    fn max_abs_eigenvalue(&self, u: &[f64]) -> Result<f64> {
        Ok(u[0].abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerParams {
    pub gamma: f64,
}

impl Default for EulerParams {
    fn default() -> Self {
        Self { gamma: 1.4 }
    }
}

impl EulerParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 1.0) {
            return Err(Error::Config(format!("gamma must exceed 1, got {gamma}")));
        }
        Ok(Self { gamma })
    }
}

/// Conserved Euler state: density, momentum, total energy per unit volume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerState {
    pub rho: f64,
    pub q: f64,
    pub energy: f64,
}

impl EulerState {
    pub fn from_primitive(rho: f64, u: f64, p: f64, gamma: f64) -> Self {
        Self { rho, q: rho * u, energy: p / (gamma - 1.0) + 0.5 * rho * u * u }
    }

    pub fn from_slice(u: &[f64]) -> Self {
        Self { rho: u[0], q: u[1], energy: u[2] }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.rho, self.q, self.energy]
    }

    /// `(rho, u, p)`.
    pub fn to_primitive(self, gamma: f64) -> Result<[f64; 3]> {
        let p = euler_pressure(&self, gamma)?;
        Ok([self.rho, self.q / self.rho, p])
    }

    pub fn is_admissible(&self, gamma: f64) -> bool {
        self.rho > 0.0
            && self.q.is_finite()
            && self.energy.is_finite()
            && euler_pressure(self, gamma).map(|p| p > 0.0).unwrap_or(false)
    }
}

/// `p = (gamma - 1) (E - q^2 / (2 rho))`.
pub fn euler_pressure(s: &EulerState, gamma: f64) -> Result<f64> {
    if !(s.rho > 0.0) {
        return Err(Error::InadmissibleState { state: s.to_array().to_vec(), reason: "density <= 0" });
    }
    Ok((gamma - 1.0) * (s.energy - 0.5 * s.q * s.q / s.rho))
}

fn admissible_pressure(s: &EulerState, gamma: f64) -> Result<f64> {
    let p = euler_pressure(s, gamma)?;
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::InadmissibleState { state: s.to_array().to_vec(), reason: "pressure <= 0" });
    }
    Ok(p)
}

/// `(q, q^2/rho + p, (q/rho)(E + p))`.
pub fn euler_flux(s: &EulerState, gamma: f64) -> Result<[f64; 3]> {
    let p = admissible_pressure(s, gamma)?;
    let v = s.q / s.rho;
    Ok([s.q, s.q * v + p, v * (s.energy + p)])
}

/// `|u| + sqrt(gamma p / rho)`.
pub fn euler_max_wavespeed(s: &EulerState, gamma: f64) -> Result<f64> {
    let p = admissible_pressure(s, gamma)?;
    Ok((s.q / s.rho).abs() + (gamma * p / s.rho).sqrt())
}

/// One-dimensional compressible Euler equations with ideal-gas closure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Euler {
    pub params: EulerParams,
}

impl Euler {
    pub fn new(gamma: f64) -> Result<Self> {
        Ok(Self { params: EulerParams::new(gamma)? })
    }

    pub fn gamma(&self) -> f64 {
        self.params.gamma
    }

    pub fn conservative(&self, rho: f64, u: f64, p: f64) -> [f64; 3] {
        EulerState::from_primitive(rho, u, p, self.gamma()).to_array()
    }
}

impl ConservationLaw for Euler {
    fn name(&self) -> &'static str {
        "euler"
    }
    fn n_vars(&self) -> usize {
        3
    }
    fn component_names(&self) -> &'static [&'static str] {
        &["rho", "rho_u", "E"]
    }
    fn flux(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        out.copy_from_slice(&euler_flux(&EulerState::from_slice(u), self.gamma())?);
        Ok(())
    }
    fn flux_derivative(&self, u: &[f64], du: &[f64], out: &mut [f64]) -> Result<()> {
        let s = EulerState::from_slice(u);
        admissible_pressure(&s, self.gamma())?;
        let g = self.gamma();
        let v = s.q / s.rho;
        let e = s.energy / s.rho;
        out[0] = du[1];
        out[1] = 0.5 * (g - 3.0) * v * v * du[0] + (3.0 - g) * v * du[1] + (g - 1.0) * du[2];
        out[2] = v * ((g - 1.0) * v * v - g * e) * du[0]
            + (g * e - 1.5 * (g - 1.0) * v * v) * du[1]
            + g * v * du[2];
        Ok(())
    }
    fn max_abs_eigenvalue(&self, u: &[f64]) -> Result<f64> {
        euler_max_wavespeed(&EulerState::from_slice(u), self.gamma())
    }
    fn density_pressure(&self, u: &[f64]) -> Option<(f64, f64)> {
        let s = EulerState::from_slice(u);
        let p = if s.rho > 0.0 { euler_pressure(&s, self.gamma()).unwrap_or(f64::NAN) } else { f64::NAN };
        Some((s.rho, p))
    }
    fn output_names(&self) -> &'static [&'static str] {
        &["rho", "u", "p"]
    }
    fn to_output(&self, u: &[f64]) -> Vec<f64> {
        let s = EulerState::from_slice(u);
        let p = if s.rho > 0.0 { euler_pressure(&s, self.gamma()).unwrap_or(f64::NAN) } else { f64::NAN };
        vec![s.rho, s.q / s.rho, p]
    }
}

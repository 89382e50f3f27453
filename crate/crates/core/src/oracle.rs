//! Reference solutions: the exact Riemann problem for the Euler equations,
//! periodic linear advection, and a smooth contact wave.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveKind {
    Shock,
    Rarefaction,
}

/// Primitive state `(rho, u, p)`.
pub type Primitive = [f64; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct RiemannSolution {
    pub left: Primitive,
    pub right: Primitive,
    pub gamma: f64,
    pub p_star: f64,
    pub u_star: f64,
    pub rho_star_left: f64,
    pub rho_star_right: f64,
    pub left_wave: WaveKind,
    pub right_wave: WaveKind,
}

fn sound_speed(w: &Primitive, gamma: f64) -> f64 {
    (gamma * w[2] / w[0]).sqrt()
}

/// `f_K(p)` and its derivative for one side.
fn pressure_branch(p: f64, w: &Primitive, gamma: f64) -> (f64, f64) {
    let (rho, pk) = (w[0], w[2]);
    let c = sound_speed(w, gamma);
    if p > pk {
        let a = 2.0 / ((gamma + 1.0) * rho);
        let b = (gamma - 1.0) / (gamma + 1.0) * pk;
        let q = (a / (p + b)).sqrt();
        ((p - pk) * q, q * (1.0 - 0.5 * (p - pk) / (b + p)))
    } else {
        let z = (gamma - 1.0) / (2.0 * gamma);
        let r = (p / pk).powf(z);
        let d = (p / pk).powf(-(gamma + 1.0) / (2.0 * gamma)) / (rho * c);
        (2.0 * c / (gamma - 1.0) * (r - 1.0), d)
    }
}

/// Solves the Riemann problem for primitive states `left`, `right`.
pub fn exact_riemann(left: Primitive, right: Primitive, gamma: f64) -> Result<RiemannSolution> {
    for w in [&left, &right] {
        if !(w[0] > 0.0 && w[2] > 0.0) || w.iter().any(|v| !v.is_finite()) {
            return Err(Error::InadmissibleState { state: w.to_vec(), reason: "Riemann data must have rho > 0 and p > 0" });
        }
    }
    if !(gamma > 1.0) {
        return Err(Error::Config(format!("gamma must exceed 1, got {gamma}")));
    }
    let (cl, cr) = (sound_speed(&left, gamma), sound_speed(&right, gamma));
    let du = right[1] - left[1];
    if 2.0 / (gamma - 1.0) * (cl + cr) <= du {
        return Err(Error::Vacuum);
    }
    let f = |p: f64| {
        let (fl, dl) = pressure_branch(p, &left, gamma);
        let (fr, dr) = pressure_branch(p, &right, gamma);
        (fl + fr + du, dl + dr)
    };
    // Bracket: f is increasing in p.
    let mut lo = 1e-12;
    let rho_bar = 0.5 * (left[0] + right[0]);
    let c_bar = 0.5 * (cl + cr);
    let mut hi = 10.0 * left[2].max(right[2]) + rho_bar * c_bar * du.abs();
    if f(lo).0 > 0.0 {
        return Err(Error::Vacuum);
    }
    while f(hi).0 < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    // Two-rarefaction initial guess.
    let z = (gamma - 1.0) / (2.0 * gamma);
    let guess = ((cl + cr - 0.5 * (gamma - 1.0) * du) / (cl / left[2].powf(z) + cr / right[2].powf(z))).powf(1.0 / z);
    let mut p = if guess > lo && guess < hi { guess } else { 0.5 * (lo + hi) };
    for _ in 0..200 {
        let (val, der) = f(p);
        if val.abs() <= 1e-13 {
            break;
        }
        if val < 0.0 {
            lo = p;
        } else {
            hi = p;
        }
        let newton = p - val / der;
        p = if newton > lo && newton < hi && der > 0.0 { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let (fl, _) = pressure_branch(p, &left, gamma);
    let (fr, _) = pressure_branch(p, &right, gamma);
    let u_star = 0.5 * (left[1] + right[1]) + 0.5 * (fr - fl);
    let star_density = |w: &Primitive| {
        let ratio = p / w[2];
        if p > w[2] {
            let g = (gamma - 1.0) / (gamma + 1.0);
            w[0] * (ratio + g) / (g * ratio + 1.0)
        } else {
            w[0] * ratio.powf(1.0 / gamma)
        }
    };
    let kind = |w: &Primitive| if p > w[2] { WaveKind::Shock } else { WaveKind::Rarefaction };
    Ok(RiemannSolution {
        left,
        right,
        gamma,
        p_star: p,
        u_star,
        rho_star_left: star_density(&left),
        rho_star_right: star_density(&right),
        left_wave: kind(&left),
        right_wave: kind(&right),
    })
}

impl RiemannSolution {
    /// Residual of the pressure equation at `p_star`.
    pub fn pressure_residual(&self) -> f64 {
        let (fl, _) = pressure_branch(self.p_star, &self.left, self.gamma);
        let (fr, _) = pressure_branch(self.p_star, &self.right, self.gamma);
        fl + fr + self.right[1] - self.left[1]
    }

    /// Shock speed of the left wave, if it is a shock.
    pub fn left_shock_speed(&self) -> Option<f64> {
        (self.left_wave == WaveKind::Shock).then(|| self.shock_speed(&self.left, -1.0))
    }

    pub fn right_shock_speed(&self) -> Option<f64> {
        (self.right_wave == WaveKind::Shock).then(|| self.shock_speed(&self.right, 1.0))
    }

    fn shock_speed(&self, w: &Primitive, sign: f64) -> f64 {
        let g = self.gamma;
        let c = sound_speed(w, g);
        w[1] + sign * c * ((g + 1.0) / (2.0 * g) * self.p_star / w[2] + (g - 1.0) / (2.0 * g)).sqrt()
    }

    /// `(head, tail)` speeds of the left rarefaction fan.
    pub fn left_fan(&self) -> Option<(f64, f64)> {
        (self.left_wave == WaveKind::Rarefaction).then(|| {
            let c_star = sound_speed(&self.left, self.gamma) * (self.p_star / self.left[2]).powf((self.gamma - 1.0) / (2.0 * self.gamma));
            (self.left[1] - sound_speed(&self.left, self.gamma), self.u_star - c_star)
        })
    }

    /// `(tail, head)` speeds of the right rarefaction fan.
    pub fn right_fan(&self) -> Option<(f64, f64)> {
        (self.right_wave == WaveKind::Rarefaction).then(|| {
            let c_star = sound_speed(&self.right, self.gamma) * (self.p_star / self.right[2]).powf((self.gamma - 1.0) / (2.0 * self.gamma));
            (self.u_star + c_star, self.right[1] + sound_speed(&self.right, self.gamma))
        })
    }

    /// Primitive state at similarity coordinate `s = x / t`.
    pub fn sample(&self, s: f64) -> Primitive {
        let g = self.gamma;
        if s <= self.u_star {
            let w = &self.left;
            match self.left_wave {
                WaveKind::Shock => {
                    if s <= self.shock_speed(w, -1.0) {
                        *w
                    } else {
                        [self.rho_star_left, self.u_star, self.p_star]
                    }
                }
                WaveKind::Rarefaction => {
                    let (head, tail) = self.left_fan().unwrap_or((0.0, 0.0));
                    if s <= head {
                        *w
                    } else if s >= tail {
                        [self.rho_star_left, self.u_star, self.p_star]
                    } else {
                        let c = sound_speed(w, g);
                        let k = 2.0 / (g + 1.0) + (g - 1.0) / ((g + 1.0) * c) * (w[1] - s);
                        [
                            w[0] * k.powf(2.0 / (g - 1.0)),
                            2.0 / (g + 1.0) * (c + 0.5 * (g - 1.0) * w[1] + s),
                            w[2] * k.powf(2.0 * g / (g - 1.0)),
                        ]
                    }
                }
            }
        } else {
            let w = &self.right;
            match self.right_wave {
                WaveKind::Shock => {
                    if s >= self.shock_speed(w, 1.0) {
                        *w
                    } else {
                        [self.rho_star_right, self.u_star, self.p_star]
                    }
                }
                WaveKind::Rarefaction => {
                    let (tail, head) = self.right_fan().unwrap_or((0.0, 0.0));
                    if s >= head {
                        *w
                    } else if s <= tail {
                        [self.rho_star_right, self.u_star, self.p_star]
                    } else {
                        let c = sound_speed(w, g);
                        let k = 2.0 / (g + 1.0) - (g - 1.0) / ((g + 1.0) * c) * (w[1] - s);
                        [
                            w[0] * k.powf(2.0 / (g - 1.0)),
                            2.0 / (g + 1.0) * (-c + 0.5 * (g - 1.0) * w[1] + s),
                            w[2] * k.powf(2.0 * g / (g - 1.0)),
                        ]
                    }
                }
            }
        }
    }

    /// State at position `x` and time `t` for an initial jump at `x0`.
    pub fn sample_at(&self, x: f64, t: f64, x0: f64) -> Primitive {
        if t <= 0.0 {
            return if x < x0 { self.left } else { self.right };
        }
        self.sample((x - x0) / t)
    }
}

/// Wraps `x` into the periodic interval `[a, b)`.
pub fn wrap_periodic(x: f64, a: f64, b: f64) -> f64 {
    a + (x - a).rem_euclid(b - a)
}

/// `profile(x - a t)` on the periodic domain `[x_min, x_max)`.
pub fn exact_advection(profile: impl Fn(f64) -> f64, a: f64, x: f64, t: f64, domain: (f64, f64)) -> f64 {
    profile(wrap_periodic(x - a * t, domain.0, domain.1))
}

/// Pure contact advection `(rho0(x - u0 t), u0, p0)` on a periodic domain.
pub fn exact_euler_contact(
    rho0: impl Fn(f64) -> f64,
    u0: f64,
    p0: f64,
    x: f64,
    t: f64,
    domain: (f64, f64),
) -> Primitive {
    [rho0(wrap_periodic(x - u0 * t, domain.0, domain.1)), u0, p0]
}

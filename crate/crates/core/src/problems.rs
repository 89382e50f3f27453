//! Named initial conditions with their domains, boundary conditions and,
//! where known, exact solutions.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::driver::{Boundary, Mesh1D, SolutionField};
use crate::equations::{advection_system, burgers_system, ConservationLaw, Euler};
use crate::error::{Error, Result};
use crate::oracle::{exact_advection, exact_euler_contact, exact_riemann, Primitive, RiemannSolution};

/// Riemann problems as `(left, right, t_final)` in primitive variables.
pub const RIEMANN_PROBLEMS: [(Primitive, Primitive, f64); 4] = [
    ([0.445, 0.698, 3.528], [0.5, 0.0, 0.571], 0.14),
    ([1.0, 2.0, 0.1], [1.0, -2.0, 0.1], 0.8),
    ([1.0, -2.0, 0.4], [1.0, 2.0, 0.4], 0.15),
    ([1.0, 0.0, 1000.0], [1.0, 0.0, 100.0], 0.012),
];

pub const PROBLEM_NAMES: [&str; 7] =
    ["rp1", "rp2", "rp3", "rp4", "advection_sine", "burgers_sine", "euler_contact_sine"];

pub type StateFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;
pub type ExactFn = Arc<dyn Fn(f64, f64) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
pub struct Problem {
    pub name: String,
    pub system: Arc<dyn ConservationLaw>,
    /// Adiabatic exponent for gas dynamics.
    pub gamma: Option<f64>,
    pub domain: (f64, f64),
    pub bc: Boundary,
    pub default_t_final: f64,
    /// Conserved initial state.
    pub initial: StateFn,
    /// Conserved exact solution `(x, t)`, if available.
    pub exact: Option<ExactFn>,
    pub riemann: Option<RiemannSolution>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("system", &self.system.name())
            .field("domain", &self.domain)
            .field("bc", &self.bc)
            .finish()
    }
}

impl Problem {
    pub fn mesh(&self, n_cells: usize) -> Result<Mesh1D> {
        Mesh1D::new(self.domain.0, self.domain.1, n_cells, self.bc.clone())
    }

    pub fn initial_field(&self, mesh: &Mesh1D, data_degree: usize) -> Result<SolutionField> {
        let f = self.initial.clone();
        SolutionField::project(mesh, data_degree, self.system.n_vars(), &move |x| f(x))
    }
}

/// Looks up a problem. `gamma` applies to Euler problems, `speed` to
/// advection.
pub fn problem_by_name(name: &str, gamma: f64, speed: f64) -> Result<Problem> {
    let sine = |x: f64| (2.0 * PI * x).sin();
    match name {
        "rp1" | "rp2" | "rp3" | "rp4" => {
            let idx = name[2..].parse::<usize>().map_err(|_| Error::Config(format!("unknown problem {name}")))? - 1;
            let (l, r, tf) = RIEMANN_PROBLEMS[idx];
            let euler = Euler::new(gamma)?;
            let sol = exact_riemann(l, r, gamma)?;
            let (cl, cr) = (euler.conservative(l[0], l[1], l[2]), euler.conservative(r[0], r[1], r[2]));
            let e2 = euler.clone();
            let s2 = sol.clone();
            Ok(Problem {
                name: name.into(),
                system: Arc::new(euler),
                gamma: Some(gamma),
                domain: (-0.5, 0.5),
                bc: Boundary::Dirichlet { left: cl.to_vec(), right: cr.to_vec() },
                default_t_final: tf,
                initial: Arc::new(move |x| if x < 0.0 { cl.to_vec() } else { cr.to_vec() }),
                exact: Some(Arc::new(move |x, t| {
                    let w = s2.sample_at(x, t, 0.0);
                    e2.conservative(w[0], w[1], w[2]).to_vec()
                })),
                riemann: Some(sol),
            })
        }
        "advection_sine" => Ok(Problem {
            name: name.into(),
            system: Arc::new(advection_system(speed)),
            gamma: None,
            domain: (0.0, 1.0),
            bc: Boundary::Periodic,
            default_t_final: 1.0,
            initial: Arc::new(move |x| vec![sine(x)]),
            exact: Some(Arc::new(move |x, t| vec![exact_advection(sine, speed, x, t, (0.0, 1.0))])),
            riemann: None,
        }),
        "burgers_sine" => Ok(Problem {
            name: name.into(),
            system: Arc::new(burgers_system()),
            gamma: None,
            domain: (0.0, 1.0),
            bc: Boundary::Periodic,
            default_t_final: 0.1,
            initial: Arc::new(move |x| vec![1.0 + 0.5 * sine(x)]),
            exact: None,
            riemann: None,
        }),
        "euler_contact_sine" => {
            let euler = Euler::new(gamma)?;
            let rho0 = move |x: f64| 1.0 + 0.5 * sine(x);
            let (e1, e2) = (euler.clone(), euler.clone());
            Ok(Problem {
                name: name.into(),
                system: Arc::new(euler),
                gamma: Some(gamma),
                domain: (0.0, 1.0),
                bc: Boundary::Periodic,
                default_t_final: 1.0,
                initial: Arc::new(move |x| e1.conservative(rho0(x), 1.0, 1.0).to_vec()),
                exact: Some(Arc::new(move |x, t| {
                    let w = exact_euler_contact(rho0, 1.0, 1.0, x, t, (0.0, 1.0));
                    e2.conservative(w[0], w[1], w[2]).to_vec()
                })),
                riemann: None,
            })
        }
        _ => Err(Error::Config(format!("unknown problem `{name}`; known: {}", PROBLEM_NAMES.join(", ")))),
    }
}

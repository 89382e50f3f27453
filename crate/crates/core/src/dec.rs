//! Deferred-correction iteration engine.
//!
//! A pair of operators `L1`, `L2` acting on coefficient vectors defines the
//! iteration `L1(u_p) = L1(u_{p-1}) - L2(u_{p-1})`. `L1` is cheap and exactly
//! invertible, `L2` is the accurate operator whose root we approximate. The
//! adaptive variant changes the space (and operators) at every iteration,
//! embedding the previous iterate into the next space first.

use crate::basis::gauss_rule;
use crate::error::{Error, Result};

/// The two operators of a deferred-correction method.
pub trait DecOperatorPair {
    /// The small parameter (time step, cell size, ...).
    fn delta(&self) -> f64;

    fn apply_l1(&self, u: &[f64]) -> Result<Vec<f64>>;

    fn apply_l2(&self, u: &[f64]) -> Result<Vec<f64>>;

    /// Returns the `u` with `L1(u) = rhs`.
    fn solve_l1(&self, rhs: &[f64]) -> Result<Vec<f64>>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecIterate {
    pub coeffs: Vec<f64>,
    pub iteration_index: usize,
}

impl DecIterate {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs, iteration_index: 0 }
    }
}

/// One stage of the adaptive iteration: operators on `X^(p)` plus the
/// embedding `X^(p-1) -> X^(p)`.
pub struct DecAdaptiveStage<'a> {
    pub operators: Box<dyn DecOperatorPair + 'a>,
    pub embed: Box<dyn Fn(&[f64]) -> Vec<f64> + 'a>,
    pub space_dim: usize,
}

fn check_finite(v: &[f64], iteration: usize) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::DivergedIteration { iteration })
    }
}

fn correction_step(ops: &dyn DecOperatorPair, prev: &[f64], iteration: usize) -> Result<Vec<f64>> {
    let l1 = ops.apply_l1(prev)?;
    let l2 = ops.apply_l2(prev)?;
    check_finite(&l1, iteration)?;
    check_finite(&l2, iteration)?;
    if l1.len() != l2.len() {
        return Err(Error::Config(format!(
            "operator outputs differ in length ({} vs {})",
            l1.len(),
            l2.len()
        )));
    }
    let rhs: Vec<f64> = l1.iter().zip(&l2).map(|(a, b)| a - b).collect();
    let next = ops.solve_l1(&rhs)?;
    check_finite(&next, iteration)?;
    Ok(next)
}

/// `L1(u_p) = L1(u_{p-1}) - L2(u_{p-1})`.
pub fn dec_iterate(ops: &dyn DecOperatorPair, prev: &DecIterate) -> Result<DecIterate> {
    let p = prev.iteration_index + 1;
    let coeffs = correction_step(ops, &prev.coeffs, p)?;
    Ok(DecIterate { coeffs, iteration_index: p })
}

/// `iterations` applications of [`dec_iterate`].
pub fn dec_run_classic(ops: &dyn DecOperatorPair, u0: DecIterate, iterations: usize) -> Result<DecIterate> {
    let mut u = u0;
    for _ in 0..iterations {
        u = dec_iterate(ops, &u)?;
    }
    Ok(u)
}

/// Adaptive iteration: at stage `p` embed `u_{p-1}` into `X^(p)` and apply one
/// correction with the stage-`p` operators.
pub fn dec_run_adaptive(stages: &[DecAdaptiveStage<'_>], u0: DecIterate) -> Result<DecIterate> {
    let mut u = u0;
    for stage in stages {
        let embedded = (stage.embed)(&u.coeffs);
        if embedded.len() != stage.space_dim {
            return Err(Error::Config(format!(
                "embedding produced {} coefficients, stage expects {}",
                embedded.len(),
                stage.space_dim
            )));
        }
        let p = u.iteration_index + 1;
        check_finite(&embedded, p)?;
        let coeffs = correction_step(stage.operators.as_ref(), &embedded, p)?;
        u = DecIterate { coeffs, iteration_index: p };
    }
    Ok(u)
}

/// Scalar ODE `y' = f(t, y)` over one step `[t0, t0 + delta]` discretized by
/// collocation on `subintervals + 1` equispaced nodes.
///
/// Unknowns are the values at every node, including `t0`. `L2` is the full
/// collocation residual `u_m - y0 - delta * sum_r theta_mr f(u_r)`; `L1`
/// chains forward Euler over the subintervals,
/// `u_m - y0 - (delta / S) * sum_{r < m} f(u_r)`.
pub struct OdeCollocation<F> {
    f: F,
    y0: f64,
    delta: f64,
    times: Vec<f64>,
    theta: Vec<Vec<f64>>,
}

impl<F: Fn(f64, f64) -> f64> OdeCollocation<F> {
    pub fn new(f: F, t0: f64, y0: f64, delta: f64, subintervals: usize) -> Result<Self> {
        if subintervals == 0 {
            return Err(Error::Config("collocation needs at least one subinterval".into()));
        }
        let s = subintervals;
        let nodes: Vec<f64> = (0..=s).map(|m| m as f64 / s as f64).collect();
        let g = gauss_rule((s + 2) / 2 + 1)?;
        let theta = nodes
            .iter()
            .map(|&end| {
                (0..=s)
                    .map(|r| g.integrate(0.0, end, |x| lagrange(&nodes, r, x)))
                    .collect()
            })
            .collect();
        Ok(Self {
            f,
            y0,
            delta,
            times: nodes.iter().map(|s| t0 + delta * s).collect(),
            theta,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.times.len()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Constant initial guess `u_m = y0`.
    pub fn initial_guess(&self) -> DecIterate {
        DecIterate::new(vec![self.y0; self.n_nodes()])
    }

    fn rates(&self, u: &[f64]) -> Vec<f64> {
        self.times.iter().zip(u).map(|(&t, &y)| (self.f)(t, y)).collect()
    }

    fn euler_step(&self) -> f64 {
        self.delta / (self.n_nodes() - 1) as f64
    }
}

fn lagrange(nodes: &[f64], r: usize, x: f64) -> f64 {
    nodes
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != r)
        .map(|(_, &xk)| (x - xk) / (nodes[r] - xk))
        .product()
}

/// Values at equispaced nodes of `[0, 1]` interpolated onto `n_new` equispaced nodes.
pub fn interpolate_equispaced(values: &[f64], n_new: usize) -> Vec<f64> {
    if values.len() == 1 {
        return vec![values[0]; n_new];
    }
    let s = (values.len() - 1) as f64;
    let nodes: Vec<f64> = (0..values.len()).map(|m| m as f64 / s).collect();
    let s_new = (n_new.max(2) - 1) as f64;
    (0..n_new)
        .map(|k| {
            let x = k as f64 / s_new;
            values.iter().enumerate().map(|(r, v)| v * lagrange(&nodes, r, x)).sum()
        })
        .collect()
}

impl<F: Fn(f64, f64) -> f64> DecOperatorPair for OdeCollocation<F> {
    fn delta(&self) -> f64 {
        self.delta
    }

    fn apply_l1(&self, u: &[f64]) -> Result<Vec<f64>> {
        let rates = self.rates(u);
        let k = self.euler_step();
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(u.len());
        for (m, &um) in u.iter().enumerate() {
            out.push(um - self.y0 - k * acc);
            acc += rates[m];
        }
        Ok(out)
    }

    fn apply_l2(&self, u: &[f64]) -> Result<Vec<f64>> {
        let rates = self.rates(u);
        Ok(u.iter()
            .zip(&self.theta)
            .map(|(&um, th)| {
                um - self.y0 - self.delta * th.iter().zip(&rates).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect())
    }

    fn solve_l1(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let k = self.euler_step();
        let mut acc = 0.0;
        let mut u = Vec::with_capacity(rhs.len());
        for (m, &z) in rhs.iter().enumerate() {
            let um = z + self.y0 + k * acc;
            acc += (self.f)(self.times[m], um);
            u.push(um);
        }
        Ok(u)
    }
}

/// Builds the adaptive stages for an ODE: stage `p` collocates on `p + 1`
/// nodes and embeds by polynomial interpolation.
pub fn ode_adaptive_stages<'a, F>(
    f: F,
    t0: f64,
    y0: f64,
    delta: f64,
    stages: usize,
) -> Result<Vec<DecAdaptiveStage<'a>>>
where
    F: Fn(f64, f64) -> f64 + Clone + 'a,
{
    (1..=stages)
        .map(|p| {
            let ops = OdeCollocation::new(f.clone(), t0, y0, delta, p)?;
            Ok(DecAdaptiveStage {
                operators: Box::new(ops),
                embed: Box::new(move |prev: &[f64]| interpolate_equispaced(prev, p + 1)),
                space_dim: p + 1,
            })
        })
        .collect()
}

/// Least-squares slope of `log(err)` against `log(delta)`.
pub fn log_log_slope(deltas: &[f64], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

// Fourth-order finite volumes with the positivity-checked adaptive
// predictor on the near-vacuum double rarefaction, compared with the exact
// solution.

use ader1d::driver::{error_norms, RunConfig, SchemeKind, Solver, Variant};
use ader1d::problems::problem_by_name;

pub fn run_example() -> ader1d::Result<()> {
    let problem = problem_by_name("rp3", 1.4, 1.0)?;
    let mut cfg = RunConfig::new(SchemeKind::Fv, Variant::AdaptiveU, 3, problem.default_t_final);
    cfg.limiter = true;
    let mesh = problem.mesh(200)?;
    let mut field = problem.initial_field(&mesh, 0)?;
    let solver = Solver::new(problem.system.clone(), mesh, cfg, problem.gamma)?;
    let mut limited_per_step = Vec::new();
    solver.run_with(&mut field, |f| limited_per_step.push(f.diagnostics.last().unwrap().limited_cells))?;
    let summary = ader1d::driver::RunSummary::from_field(&field, solver.sys.as_ref(), 0.0);
    let exact = problem.exact.clone().unwrap();
    let t = field.time;
    let err = error_norms(&field, &solver.mesh, &|x| exact(x, t), 0, 5)?;
    println!("{} steps to t = {t}", summary.steps);
    println!("limited cells in the first 10 steps: {:?}", &limited_per_step[..10.min(limited_per_step.len())]);
    println!("limited cells in total: {}", summary.limited_cells_total);
    println!("min density {:.4e}, min pressure {:.4e}", summary.min_density, summary.min_pressure);
    println!("density errors: L1 {:.3e}, Linf {:.3e}", err.l1, err.linf);
    Ok(())
}

#[allow(dead_code)]
fn main() -> ader1d::Result<()> {
    run_example()
}

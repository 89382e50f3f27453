// Predictor work of the degree-raising schedule against sweeps to a 1e-12
// tolerance, with the resulting errors, for degrees 0 to 4.

use ader1d::driver::{error_norms, RunConfig, SchemeKind, Solver, Variant};
use ader1d::problems::problem_by_name;

pub fn run_example() -> ader1d::Result<()> {
    let problem = problem_by_name("advection_sine", 1.4, 1.0)?;
    let exact = problem.exact.clone().unwrap();
    println!("{:>2} {:>10} {:>12} {:>12}", "M", "work ratio", "L2 classic", "L2 adaptive");
    for m in 0..=4 {
        let mut out = Vec::new();
        for variant in [Variant::ClassicTolerance(1e-12), Variant::AdaptiveU] {
            let cfg = RunConfig::new(SchemeKind::Dg, variant, m, 0.25);
            let mesh = problem.mesh(32)?;
            let mut field = problem.initial_field(&mesh, m)?;
            let solver = Solver::new(problem.system.clone(), mesh, cfg, None)?;
            let s = solver.run(&mut field)?;
            let e = error_norms(&field, &solver.mesh, &|x| exact(x, 0.25), 0, m + 2)?;
            out.push((s.work_units as f64, e.l2));
        }
        println!("{m:>2} {:>10.3} {:>12.3e} {:>12.3e}", out[1].0 / out[0].0, out[0].1, out[1].1);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> ader1d::Result<()> {
    run_example()
}

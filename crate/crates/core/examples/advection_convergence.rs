// Mesh refinement for the periodic sine wave with the discontinuous
// Galerkin scheme, classic and degree-raising predictors.

use ader1d::driver::{convergence_study, RunConfig, SchemeKind, Variant};
use ader1d::problems::problem_by_name;

pub fn run_example() -> ader1d::Result<()> {
    let problem = problem_by_name("advection_sine", 1.4, 1.0)?;
    let exact = problem.exact.clone().expect("smooth problem");
    for variant in [Variant::ClassicFixed, Variant::AdaptiveU] {
        for m in 1..=3 {
            let cfg = RunConfig::new(SchemeKind::Dg, variant, m, 0.5);
            let rows = convergence_study(
                &|n| {
                    let mesh = problem.mesh(n)?;
                    let field = problem.initial_field(&mesh, cfg.data_degree())?;
                    Ok((ader1d::driver::Solver::new(problem.system.clone(), mesh, cfg.clone(), None)?, field))
                },
                &[16, 32, 64],
                &|x, t| exact(x, t),
                0,
            )?;
            let orders: Vec<String> = rows.iter().filter_map(|r| r.orders).map(|o| format!("{:.2}", o.l2)).collect();
            println!(
                "{variant:?} M={m}: L2 error on 64 cells {:.3e}, orders {}",
                rows.last().unwrap().errors.l2,
                orders.join(" ")
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> ader1d::Result<()> {
    run_example()
}

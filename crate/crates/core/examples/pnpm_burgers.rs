// P1P3 on a steepening Burgers wave: central against CWENO reconstruction,
// with mass and total variation of the cell means.

use ader1d::driver::{RunConfig, SchemeKind, SolutionField, Solver, Variant};
use ader1d::problems::problem_by_name;
use ader1d::reconstruction::ReconstructionMode;

fn total_variation(field: &SolutionField) -> f64 {
    let n = field.n_cells();
    (0..n).map(|i| (field.mean((i + 1) % n)[0] - field.mean(i)[0]).abs()).sum()
}

pub fn run_example() -> ader1d::Result<()> {
    let problem = problem_by_name("burgers_sine", 1.4, 1.0)?;
    for mode in [ReconstructionMode::Central, ReconstructionMode::Cweno] {
        // Past the shock time 1/pi.
        let mut cfg = RunConfig::new(SchemeKind::Pnpm { n: 1 }, Variant::AdaptiveU, 3, 0.4);
        cfg.reconstruction = mode;
        let mesh = problem.mesh(100)?;
        let mut field = problem.initial_field(&mesh, 1)?;
        let solver = Solver::new(problem.system.clone(), mesh, cfg, None)?;
        let (tv0, mass0) = (total_variation(&field), field.totals(&solver.mesh)[0]);
        solver.run(&mut field)?;
        println!(
            "{mode:?}: TV {tv0:.4} -> {:.4}, mass drift {:.1e}",
            total_variation(&field),
            field.totals(&solver.mesh)[0] - mass0
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> ader1d::Result<()> {
    run_example()
}

// Periodic gas dynamics with an advected density wave: conservation of mass,
// momentum and energy, and agreement between serial and threaded runs.

use ader1d::driver::{RunConfig, SchemeKind, Solver, Variant};
use ader1d::problems::problem_by_name;

pub fn run_example() -> ader1d::Result<()> {
    let problem = problem_by_name("euler_contact_sine", 1.4, 1.0)?;
    let mut finals = Vec::new();
    for threads in [1, 4] {
        let mut cfg = RunConfig::new(SchemeKind::Dg, Variant::AdaptiveU, 3, 0.5);
        cfg.threads = threads;
        cfg.limiter = true;
        let mesh = problem.mesh(32)?;
        let mut field = problem.initial_field(&mesh, 3)?;
        let solver = Solver::new(problem.system.clone(), mesh, cfg, problem.gamma)?;
        let before = field.totals(&solver.mesh);
        let summary = solver.run(&mut field)?;
        let after = field.totals(&solver.mesh);
        let drift: Vec<String> = before.iter().zip(&after).map(|(a, b)| format!("{:.1e}", (b - a) / a)).collect();
        println!("{threads} thread(s): {} steps, relative drift [mass, momentum, energy] = [{}]", summary.steps, drift.join(", "));
        finals.push(field.data);
    }
    let diff = finals[0].iter().zip(&finals[1]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("max difference serial vs threaded: {diff:.1e}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> ader1d::Result<()> {
    run_example()
}

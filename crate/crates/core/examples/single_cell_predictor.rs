// One space-time predictor on a single cell of smooth gas-dynamics data:
// fixed sweeps, tolerance-driven sweeps and the degree-raising schedule.

use ader1d::equations::Euler;
use ader1d::predictor::{
    adaptive_schedule, build_structures, constant_in_time, predictor_adaptive, predictor_classic, CellGeometry,
    ClassicStop, PredictorCache,
};

pub fn run_example() -> ader1d::Result<()> {
    let euler = Euler::new(1.4)?;
    let m = 4;
    let (h, dt) = (0.02, 0.004);
    let geom = CellGeometry { x_center: 0.0, h };
    // Taylor data: conserved state plus small scaled slopes and curvatures.
    let mut un = vec![0.0; (m + 1) * 3];
    un[..3].copy_from_slice(&euler.conservative(1.0, 0.5, 1.0));
    for k in 1..=m {
        for q in 0..3 {
            un[k * 3 + q] = 0.3 * (q as f64 + 1.0) * h.powi(k as i32) / (1..=k).product::<usize>() as f64;
        }
    }
    let cache = PredictorCache::new(m)?;
    let structs = build_structures(&cache, geom, dt, &un, 3, m)?;
    let fixed = predictor_classic(&structs, constant_in_time(&un, 3, m), &euler, ClassicStop::FixedIterations(m + 1))?;
    let tol = predictor_classic(&structs, constant_in_time(&un, 3, m), &euler, ClassicStop::Tolerance(1e-12))?;
    let adaptive = predictor_adaptive(&cache, geom, dt, &un, &euler, None)?;
    println!("schedule of degrees: {:?}", adaptive_schedule(m));
    for (name, o) in [("fixed", &fixed), ("tolerance", &tol), ("adaptive", &adaptive)] {
        println!("{name:>10}: {} sweeps, {} work units", o.achieved_iterations, o.work_units);
    }
    println!("max |fixed - tolerance| = {:.2e}", fixed.coeffs.max_abs_diff(&tol.coeffs));
    println!("max |fixed - adaptive|  = {:.2e}", fixed.coeffs.max_abs_diff(&adaptive.coeffs));
    Ok(())
}

#[allow(dead_code)]
fn main() -> ader1d::Result<()> {
    run_example()
}

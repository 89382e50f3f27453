// The deferred-correction engine on `y' = y cos t`: error against the exact
// solution `exp(sin t)` after one step, for the classic and the
// degree-raising iteration.

use ader1d::dec::{dec_run_adaptive, dec_run_classic, log_log_slope, ode_adaptive_stages, DecIterate, OdeCollocation};

pub fn run_example() -> ader1d::Result<()> {
    let f = |t: f64, y: f64| y * t.cos();
    let exact = |t: f64| t.sin().exp();
    let deltas: Vec<f64> = (0..4).map(|k| 0.4 / 2f64.powi(k)).collect();
    println!("{:>3} {:>10} {:>12} {:>12}", "P", "delta", "classic", "adaptive");
    for p in 1..=4 {
        let (mut ec, mut ea) = (Vec::new(), Vec::new());
        for &d in &deltas {
            let ode = OdeCollocation::new(f, 0.0, 1.0, d, p.max(2))?;
            let u = dec_run_classic(&ode, ode.initial_guess(), p)?;
            ec.push((u.coeffs.last().unwrap() - exact(d)).abs());
            let stages = ode_adaptive_stages(f, 0.0, 1.0, d, p)?;
            let v = dec_run_adaptive(&stages, DecIterate::new(vec![1.0]))?;
            ea.push((v.coeffs.last().unwrap() - exact(d)).abs());
            println!("{p:>3} {d:>10.4} {:>12.3e} {:>12.3e}", ec.last().unwrap(), ea.last().unwrap());
        }
        println!("    slopes: classic {:.2}, adaptive {:.2}", log_log_slope(&deltas, &ec), log_log_slope(&deltas, &ea));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> ader1d::Result<()> {
    run_example()
}

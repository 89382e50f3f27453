// Exact Riemann solutions for the four shock-tube problems: star states,
// wave types and a sampled density profile.

use ader1d::oracle::exact_riemann;
use ader1d::problems::RIEMANN_PROBLEMS;

pub fn run_example() -> ader1d::Result<()> {
    for (k, (left, right, t_final)) in RIEMANN_PROBLEMS.iter().enumerate() {
        let sol = exact_riemann(*left, *right, 1.4)?;
        println!(
            "rp{}: p* = {:.6}, u* = {:.6}, rho*_L = {:.6}, rho*_R = {:.6}, waves {:?} / {:?}, residual {:.1e}",
            k + 1,
            sol.p_star,
            sol.u_star,
            sol.rho_star_left,
            sol.rho_star_right,
            sol.left_wave,
            sol.right_wave,
            sol.pressure_residual()
        );
        let profile: Vec<String> =
            (0..=10).map(|i| format!("{:.3}", sol.sample_at(-0.5 + 0.1 * i as f64, *t_final, 0.0)[0])).collect();
        println!("    rho(x, {t_final}) on x = -0.5..0.5: {}", profile.join(" "));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> ader1d::Result<()> {
    run_example()
}

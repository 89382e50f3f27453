// Reconstructing cubics from cell means: a smooth profile keeps the central
// polynomial, a jump pushes weight onto the one-sided linear fits.

use ader1d::reconstruction::{ReconstructionMode, Reconstructor};

fn cell_means(f: impl Fn(f64) -> f64, offsets: &[isize]) -> Vec<Vec<f64>> {
    // Five-point Gauss rule on each unit cell.
    let (x, w) = (
        [-0.453_089_922_969_332_3, -0.269_234_655_052_841_4, 0.0, 0.269_234_655_052_841_4, 0.453_089_922_969_332_3],
        [0.118_463_442_528_094_5, 0.239_314_335_249_683_2, 0.284_444_444_444_444_4, 0.239_314_335_249_683_2, 0.118_463_442_528_094_5],
    );
    offsets.iter().map(|&o| vec![(0..5).map(|k| w[k] * f(o as f64 + x[k])).sum()]).collect()
}

pub fn run_example() -> ader1d::Result<()> {
    for mode in [ReconstructionMode::Central, ReconstructionMode::Cweno] {
        let rec = Reconstructor::new(0, 3, mode)?;
        for (name, f) in [("smooth", (|x: f64| (0.3 * x).sin()) as fn(f64) -> f64), ("jump", |x: f64| if x < 0.3 { 1.0 } else { 0.0 })] {
            let means = cell_means(f, rec.stencil());
            let data: Vec<&[f64]> = means.iter().map(Vec::as_slice).collect();
            let mut out = vec![0.0; 4];
            rec.reconstruct(&data, 1, &mut out)?;
            let at = |xi: f64| out.iter().enumerate().map(|(k, c)| c * xi.powi(k as i32)).sum::<f64>();
            println!("{mode:?} {name:>6}: stencil {:?}, u(-1/2) = {:.4}, u(1/2) = {:.4}", rec.stencil(), at(-0.5), at(0.5));
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> ader1d::Result<()> {
    run_example()
}

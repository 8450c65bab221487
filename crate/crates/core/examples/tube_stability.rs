//! Jacobi spectrum of CMC tubes and the stability threshold.

use std::f64::consts::PI;

use renvol::tube::{
    jacobi_eigenvalues, jacobi_eigenvalues_fd_extrapolated, second_eigenvalue, stability_threshold,
    BoundaryCondition, TubeSpec,
};

fn main() -> renvol::Result<()> {
    for bc in [BoundaryCondition::Neumann, BoundaryCondition::Periodic] {
        let th = stability_threshold(PI, bc)?;
        println!("{bc}: a_max = {:.12}, R_min = {:.12}", th.a_max, th.r_min);
        for a in [0.5 * th.a_max, th.a_max, 1.5 * th.a_max] {
            let spec = TubeSpec::new(a, PI, bc)?;
            println!("  a = {a:.4}: λ₂ = {:>10.3e}", second_eigenvalue(&spec));
        }
        let spec = TubeSpec::new(1.0, PI, bc)?;
        let exact = jacobi_eigenvalues(&spec, 6, 6)?;
        let fd = jacobi_eigenvalues_fd_extrapolated(&spec, 1024, 6)?;
        for (e, f) in exact.iter().zip(&fd) {
            println!("    {e:>12.8} {f:>12.8}");
        }
    }
    Ok(())
}

//! Polyakov differences, their path-integral form and the area-constrained corollary.

use renvol::hyp3::BoundaryPoint;
use renvol::sphere::{corollary_gap, mobius_factor, polyakov_diff, polyakov_path_integral, ConformalFactor};

fn main() -> renvol::Result<()> {
    let omega = ConformalFactor::random(5, 0.2, 3);
    let p = polyakov_diff(&omega);
    let path = polyakov_path_integral(&omega, 16);
    println!("polyakov_diff = {p:.12}, path integral = {path:.12}");
    println!("constant ω = 0.4: {:.12}", polyakov_diff(&ConformalFactor::constant(0.4)));

    let normalized = omega.area_normalized();
    let g = corollary_gap(&normalized)?;
    println!("area-normalized: gap = {:.6e}, ∫ω = {:.6e}", g.gap, g.mean_integral);
    for t in [0.2, 0.5] {
        let g = corollary_gap(&mobius_factor(t, BoundaryPoint::north())?)?;
        println!("Möbius t = {t}: gap = {:.3e}", g.gap);
    }
    Ok(())
}

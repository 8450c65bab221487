//! Closed-form geodesic balls against the spectral surface quadrature.

use std::f64::consts::PI;

use renvol::hyp3::ball_closed_form;
use renvol::surfaces::RadialSurface;

fn main() -> renvol::Result<()> {
    println!("{:>5} {:>14} {:>14} {:>10}", "r", "W closed", "W quadrature", "W + 2πr");
    for r in [0.5, 1.0, 2.0, 5.0] {
        let w = ball_closed_form(r)?.w_volume();
        let q = RadialSurface::sphere(r)?.w_volume();
        println!("{r:>5} {w:>14.10} {q:>14.10} {:>10.2e}", q + 2.0 * PI * r);
    }
    Ok(())
}

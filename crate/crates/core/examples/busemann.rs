//! Busemann functions along a geodesic ray and on a horosphere.

use renvol::hyp3::{busemann, horosphere, BoundaryPoint, SpacePoint};

fn main() -> renvol::Result<()> {
    let b = BoundaryPoint::from_polar(0.7, 1.9);
    for t in [-3.0, 0.0, 1.0, 4.0] {
        // B_b grows at unit rate along the ray toward b.
        let x = SpacePoint::along(b, t);
        println!("t = {t:>4}: B_b = {:.12}", busemann(&x, &b)?);
    }
    let (center, radius) = horosphere(&b, 1.5);
    println!("horosphere B_b = 1.5: Euclidean center {center:?}, radius {radius:.6}");
    Ok(())
}

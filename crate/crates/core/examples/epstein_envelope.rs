//! Horosphere envelope of a zonal conformal factor and its W-volume duality.

use renvol::epstein::{duality_report, envelope, EnvelopeProblem};
use renvol::sphere::ConformalFactor;

fn main() -> renvol::Result<()> {
    let omega = ConformalFactor::zonal(&[0.0, 0.03, 0.05]);
    for t in [1.0, 2.0] {
        let problem = EnvelopeProblem::new(omega.clone(), t)?;
        let s = envelope(&problem)?;
        let d = duality_report(&problem)?;
        println!(
            "t = {t}: radius ∈ [{:.6}, {:.6}], h-convexity margin {:.4}",
            s.min_radius(),
            s.max_radius(),
            s.hconvexity_margin()
        );
        println!("  ΔW = {:.10}, polyakov = {:.10}, discrepancy {:.2e}", d.geometric, d.polyakov, d.discrepancy);
    }
    Ok(())
}

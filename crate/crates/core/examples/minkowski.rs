//! Slack of the Minkowski-type inequalities: zero on spheres, positive otherwise.

use renvol::foliation::minkowski_report;
use renvol::surfaces::RadialSurface;

fn main() -> renvol::Result<()> {
    let surfaces = [
        ("sphere r=1", RadialSurface::sphere(1.0)?),
        ("1 + 0.05 P2", RadialSurface::from_legendre(&[1.0, 0.0, 0.05])?),
        ("1.5 + 0.2 P2", RadialSurface::from_legendre(&[1.5, 0.0, 0.2])?),
        ("1.2 + 0.1 P3", RadialSurface::from_legendre(&[1.2, 0.0, 0.0, 0.1])?),
    ];
    for (name, s) in &surfaces {
        let m = minkowski_report(s)?;
        println!("{name:<14} slack_log = {:>10.3e}  slack_combined = {:>10.3e}", m.slack_log, m.slack_combined);
    }
    Ok(())
}

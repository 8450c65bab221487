//! Isoperimetric profile of a Fuchsian end and the limits read off its tail.

use renvol::profile::{foliation_profile_checks, fuchsian_profile, geometric_grid, vr_from_profile};

fn main() -> renvol::Result<()> {
    let p = fuchsian_profile(-2, &geometric_grid(10.0, 1e4, 400))?;
    let f = foliation_profile_checks(&p)?;
    println!("I/V at V = 1e4: {:.8}, extrapolated {:.10}", f.ratio_last, f.ratio_limit);
    println!("I′ > I/V from V* = {:?}", f.v_star);
    let vr = vr_from_profile(&p)?;
    println!("v_r = {:.3e} (tail spread {:.1e})", vr.v_r, vr.tail_spread);
    Ok(())
}

//! Equidistant flow of a perturbed sphere: W-invariance and the limits at infinity.

use std::f64::consts::PI;

use renvol::foliation::{boundary_metric_area, flow, h_defect_limit, vr_limit};
use renvol::surfaces::RadialSurface;

fn main() -> renvol::Result<()> {
    let s = RadialSurface::from_legendre(&[1.0, 0.0, 0.08, -0.02])?;
    for r in [0.0, 1.0, 2.0, 4.0, 6.0] {
        let st = flow(&s, r)?;
        println!(
            "r = {r}: area = {:>12.4}  ∫H = {:>12.4}  W + 2πr = {:.10}",
            st.totals.area,
            st.totals.int_h,
            st.w_volume() + 2.0 * PI * r
        );
    }
    let hd = h_defect_limit(&s, 8.0)?;
    println!("∫(H − 1) at r = 8: {:.8}, extrapolated {:.10} (2π = {:.10})", hd.value, hd.limit, 2.0 * PI);
    let bm = boundary_metric_area(&s)?;
    println!("area of the metric at infinity: β = {:.10}, from the flow {:.10}", bm.beta, bm.flow_limit);
    let vr = vr_limit(&s)?;
    println!("renormalized volume {:.10} (tail spread {:.1e})", vr.v_r, vr.tail_spread);
    Ok(())
}

//! Area-normalized Ricci flow of a random conformal factor on the sphere.

use renvol::sphere::{ricci_flow, ConformalFactor, RicciOptions};

fn main() -> renvol::Result<()> {
    let omega = ConformalFactor::random(6, 0.25, 7).area_normalized();
    let tr = ricci_flow(&omega, &RicciOptions::default())?;
    for rec in tr.records.iter().step_by((tr.records.len() / 10).max(1)) {
        println!("t = {:>7.3}  W_rel = {:>12.4e}  max|K − K̄| = {:.3e}", rec.t, rec.w_rel, rec.max_curv_dev);
    }
    let last = tr.last();
    println!(
        "converged = {} after {} steps ({} rejected), area drift {:.2e}",
        tr.converged,
        tr.records.len() - 1,
        tr.rejected_steps,
        tr.max_area_drift()
    );
    println!("final W_rel = {:.10}", last.w_rel);
    Ok(())
}

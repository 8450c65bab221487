//! Hawking mass along Fuchsian and sub-Fuchsian profiles.

use renvol::profile::{fuchsian_profile, geometric_grid, hawking_mass};

fn main() -> renvol::Result<()> {
    let base = fuchsian_profile(-2, &geometric_grid(0.1, 1e3, 9))?;
    for c in [0.0, 0.5] {
        let t = hawking_mass(&base.shifted(-c)?);
        println!("I = I_TG − {c}: monotone {}, nonpositive {}", t.monotone_ok, t.sign_ok);
        for (v, m) in t.v.iter().zip(&t.m_h) {
            println!("  V = {v:>8.2}  m_H = {m:>12.4e}");
        }
    }
    Ok(())
}

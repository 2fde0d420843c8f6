//! Effective-mass conversion between dot width and confinement frequency.
//!
//! ```text
//! cargo run --example unit_conversion -- 10
//! ```

use hooke::sweep::{convert_units, Material, UnitInput};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let width: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(10.0);
    for material in [Material::GaAs, Material::CdSe] {
        let c = material.constants()?;
        let u = convert_units(material, UnitInput::DotWidthNm(width))?;
        println!(
            "{material:?}: m* = {}, ε_r = {}, a* = {:.3} nm; a {width} nm dot has ω = {:.4} effective Hartrees",
            c.effective_mass,
            c.epsilon_r,
            material.bohr_radius_nm()?,
            u.omega_eff
        );
        for omega in [0.01, 0.1, 1.0] {
            let back = convert_units(material, UnitInput::Omega(omega))?;
            println!("    ω = {omega:<5} ↔ width {:.2} nm", back.dot_width_nm);
        }
    }
    Ok(())
}

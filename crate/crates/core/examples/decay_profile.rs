//! Exponential decay of E|G(1,1+d)|^s along a W = 2 band.

use bandloc::ensemble::{BandMatrixSpec, SymmetryClass};
use bandloc::moments::{decay_profile, MonteCarlo};

fn main() -> bandloc::Result<()> {
    let spec = BandMatrixSpec::gaussian_band(2, 50, SymmetryClass::Complex, 1);
    let distances: Vec<usize> = (0..100).step_by(9).collect();
    let profile = decay_profile(&spec, 0.0, 0.5, 1, &distances, 6, MonteCarlo::new(2_000))?;
    for p in &profile.points {
        println!("d = {:>3}  E|G|^s = {:.4e} ± {:.1e}", p.dist, p.estimate.value, p.estimate.stderr);
    }
    let fit = profile.require_fit()?;
    println!(
        "slope {:.4} ± {:.4}, R² {:.4}, ξ = 1/(s·|slope|) = {:.2}",
        fit.slope, fit.slope_stderr, fit.r_squared, fit.xi
    );
    Ok(())
}

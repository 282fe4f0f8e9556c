//! σ-normalized eigenvalue histogram against the semicircle.

use bandloc::ensemble::{BandMatrixSpec, SymmetryClass};
use bandloc::moments::MonteCarlo;
use bandloc::spectra::dos_histogram;

fn main() -> bandloc::Result<()> {
    let spec = BandMatrixSpec::gaussian_band(16, 32, SymmetryClass::Complex, 2);
    let h = dos_histogram(&spec, 24, 2.2, 1.8, MonteCarlo::new(10))?;
    for k in 0..h.density.len() {
        let mid = 0.5 * (h.edges[k] + h.edges[k + 1]);
        let bar = "#".repeat((h.density[k] * 120.0) as usize);
        println!("{mid:+.2} {:.3} {:.3} {bar}", h.density[k], h.reference[k]);
    }
    println!("σ = {:.4}, sup deviation {:.4}, L1 {:.4}", h.sigma, h.sup_deviation, h.l1_deviation);
    Ok(())
}

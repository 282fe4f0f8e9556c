//! E sup over eigenvalues in [-r, r] of |v(i) v(j)|, as a function of |i - j|.

use bandloc::ensemble::{BandMatrixSpec, SymmetryClass};
use bandloc::moments::MonteCarlo;
use bandloc::spectra::eigenvector_correlator;

fn main() -> bandloc::Result<()> {
    let spec = BandMatrixSpec::gaussian_band(2, 40, SymmetryClass::Complex, 6);
    let pairs: Vec<(usize, usize)> = (0..80).step_by(6).map(|d| (1, 1 + d)).collect();
    let rep = eigenvector_correlator(&spec, 1.0, &pairs, 6, MonteCarlo::new(500))?;
    for p in &rep.points {
        println!("|i-j| = {:>2}  {:.3e}", p.dist, p.estimate.value);
    }
    match &rep.fit {
        Ok(fit) => println!("slope {:.4}, R² {:.4}", fit.slope, fit.r_squared),
        Err(f) => println!("no fit: {f}"),
    }
    println!("draws with no eigenvalue in the window: {}", rep.empty_draws);
    Ok(())
}

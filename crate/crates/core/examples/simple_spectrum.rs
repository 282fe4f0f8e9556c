//! Smallest eigenvalue gaps over many draws.

use bandloc::ensemble::{BandMatrixSpec, SymmetryClass};
use bandloc::moments::MonteCarlo;
use bandloc::spectra::{simplicity_scan, GAP_THRESHOLD};

fn main() -> bandloc::Result<()> {
    let spec = BandMatrixSpec::gaussian_band(4, 16, SymmetryClass::Complex, 11);
    let rep = simplicity_scan(&spec, MonteCarlo::new(2_000))?;
    println!(
        "{} draws, smallest gap {:.3e}, gaps below {GAP_THRESHOLD:e}: {}",
        rep.min_gaps.len(),
        rep.smallest,
        rep.degenerate_gaps
    );
    Ok(())
}

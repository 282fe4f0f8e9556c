//! Nearest-neighbour spacings: Poisson for a diagonal matrix, Wigner surmise
//! for a full GUE block.

use bandloc::ensemble::{BandMatrixSpec, SymmetryClass};
use bandloc::moments::MonteCarlo;
use bandloc::spectra::{map_spectra, spacing_distribution, Unfolding};

fn report(label: &str, spec: &BandMatrixSpec, draws: usize) -> bandloc::Result<()> {
    let spectra = map_spectra(spec, false, MonteCarlo::new(draws), |s| s.eigenvalues)?;
    let refs: Vec<&[f64]> = spectra.iter().map(Vec::as_slice).collect();
    let r = spacing_distribution(&refs, 0.0, 1.0, Unfolding::Empirical, None)?;
    println!(
        "{label}: {} spacings, KS to Poisson {:.4}, KS to surmise {:.4}",
        r.spacings.len(),
        r.ks_poisson,
        r.ks_surmise
    );
    Ok(())
}

fn main() -> bandloc::Result<()> {
    report("W = 1, N = 1000", &BandMatrixSpec::gaussian_band(1, 1000, SymmetryClass::Complex, 4), 20)?;
    report("W = N = 200   ", &BandMatrixSpec::gaussian_band(200, 1, SymmetryClass::Complex, 4), 50)?;
    Ok(())
}

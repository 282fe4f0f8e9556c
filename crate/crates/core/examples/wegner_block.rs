//! Tail of 1/dist(0, spec(V - A)) for one block and for two coupled blocks.

use bandloc::ensemble::{DiagonalBlockLaw, SymmetryClass};
use bandloc::moments::MonteCarlo;
use bandloc::spectra::wegner_block_tail;
use faer::Mat;

fn main() -> bandloc::Result<()> {
    let w = 4;
    let shift = Mat::from_fn(w, w, |i, j| faer::c64::new(if i == j { 0.3 } else { 0.0 }, 0.0));
    let coupling = Mat::from_fn(w, w, |i, j| faer::c64::new(if i == j { 0.5 } else { 0.0 }, 0.0));
    let curve = wegner_block_tail(
        &DiagonalBlockLaw::GaussianWigner,
        w,
        SymmetryClass::Real,
        shift.as_ref(),
        Some(coupling.as_ref()),
        &[1.0, 2.0, 4.0, 8.0, 16.0],
        MonteCarlo::new(20_000),
        1,
    )?;
    println!("κ = 2π sup h = {:.4}", curve.kappa);
    for (s, d) in curve.single.iter().zip(curve.two_block.iter().flatten()) {
        println!(
            "t = {:>4}  single {:.4} (≤ {:.3})  two-block {:.4} (≤ {:.3})",
            s.t,
            s.probability,
            s.reference.unwrap_or(f64::NAN),
            d.probability,
            d.reference.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}

//! E|G(0,0)|^s for a Cauchy scalar at λ = 0. Since 1/X is again Cauchy,
//! E|G|^{1/2} = E|X|^{1/2} = √2.

use bandloc::ensemble::{BandMatrixSpec, DiagonalBlockLaw, OffDiagonalBlockLaw, ScalarLaw, SymmetryClass};
use bandloc::moments::{fractional_moment, MonteCarlo};

fn main() -> bandloc::Result<()> {
    let spec = BandMatrixSpec {
        w: 1,
        n: 1,
        symmetry: SymmetryClass::Real,
        diag_law: DiagonalBlockLaw::ScalarDensity { law: ScalarLaw::Cauchy },
        offdiag_law: OffDiagonalBlockLaw::zero(1),
        seed: 3,
    };
    let e = fractional_moment(&spec, 0.0, 1, 1, 0.5, MonteCarlo::new(100_000))?;
    println!(
        "E|G|^(1/2) = {:.5} ± {:.5}  (exact {:.5}, reliable: {})",
        e.value,
        e.stderr,
        2f64.sqrt(),
        e.reliable
    );
    Ok(())
}

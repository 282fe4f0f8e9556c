//! P(|G(0,0)| > t) for a uniform(-1,1) scalar, which is exactly 1/t.

use bandloc::ensemble::{BandMatrixSpec, DiagonalBlockLaw, OffDiagonalBlockLaw, ScalarLaw, SymmetryClass};
use bandloc::moments::{tail_probability, MonteCarlo};

fn main() -> bandloc::Result<()> {
    let spec = BandMatrixSpec {
        w: 1,
        n: 1,
        symmetry: SymmetryClass::Real,
        diag_law: DiagonalBlockLaw::ScalarDensity {
            law: ScalarLaw::Uniform { a: -1.0, b: 1.0 },
        },
        offdiag_law: OffDiagonalBlockLaw::zero(1),
        seed: 5,
    };
    let grid = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];
    let curve = tail_probability(&spec, 0.0, 1, 1, &grid, None, MonteCarlo::new(100_000))?;
    println!("{:>4} {:>10} {:>10} {:>10}", "t", "P", "SE", "1/t");
    for p in &curve.points {
        println!("{:>4} {:>10.5} {:>10.5} {:>10.5}", p.t, p.probability, p.stderr, 1.0 / p.t);
    }
    Ok(())
}

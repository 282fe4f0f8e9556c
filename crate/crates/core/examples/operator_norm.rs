//! ‖V‖ of a large Wigner block approaches 2σ.

use bandloc::ensemble::{operator_norm_statistic, BlockLaw, DiagonalBlockLaw, SymmetryClass};
use bandloc::rng::SeedSequence;

fn main() -> bandloc::Result<()> {
    let law = DiagonalBlockLaw::GaussianWigner;
    for w in [32, 128, 512] {
        let s = operator_norm_statistic(&law, w, SymmetryClass::Complex, 10, &SeedSequence::new(10))?;
        println!(
            "W = {w:>3}  mean ‖V‖ = {:.4} ± {:.4}  (2σ = {:.4})",
            s.mean,
            s.stderr,
            2.0 * law.edge_variance(SymmetryClass::Complex).unwrap().sqrt()
        );
    }
    Ok(())
}

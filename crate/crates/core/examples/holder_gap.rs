//! Hölder gap (r/s) ln E e^{sX} - ln E e^{rX}, directly and as the weighted
//! integral of tilted variances. For unit Gaussians it is r(s-r)/2.

use bandloc::harness::run::draw_scalar_samples;
use bandloc::harness::SampleLaw;
use bandloc::moments::holder_gap;

fn main() -> bandloc::Result<()> {
    let laws = [
        ("gaussian(0,1)", SampleLaw::Gaussian { mean: 0.0, sd: 1.0 }),
        ("gaussian(5,1)", SampleLaw::Gaussian { mean: 5.0, sd: 1.0 }),
        ("uniform(0,1)", SampleLaw::Uniform { a: 0.0, b: 1.0 }),
        ("two-point", SampleLaw::TwoPoint { a: 0.0, b: 1.0, p: 0.5 }),
    ];
    for (name, law) in laws {
        let xs = draw_scalar_samples(law, 200_000, 4)?;
        let h = holder_gap(&xs, 0.25, 0.5, 64)?;
        println!(
            "{name:<14} direct {:.6} ± {:.6}  integral {:.6}",
            h.h_direct, h.h_direct_stderr, h.h_integral
        );
    }
    println!("Gaussian reference 1/32 = {:.6}", 1.0 / 32.0);
    Ok(())
}

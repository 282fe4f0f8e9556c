//! Run the acceptance suite, or a single criterion: `acceptance_suite [id]`.

use bandloc::harness::acceptance::{self, DEFAULT_SEED};

fn main() {
    let only: Option<u8> = std::env::args().nth(1).and_then(|a| a.parse().ok());
    let workers = 1;
    let seed = DEFAULT_SEED;
    let report = match only {
        None => acceptance::run_suite_with_progress(workers, seed, true, |c| println!("{}", c.line())),
        Some(id) => {
            let c = match id {
                1 => acceptance::resolvent_oracle(workers, seed),
                2 => acceptance::wegner_scalar_tail(workers, seed),
                3 => acceptance::cauchy_moment(workers, seed),
                4 => acceptance::holder_identity(seed),
                5 => acceptance::decay_and_scan(workers, seed),
                6 => acceptance::semicircle_dos(workers, seed),
                7 => acceptance::spacing_crossover(workers, seed),
                8 => acceptance::minami_scaling(workers, seed),
                9 => acceptance::domination(workers, seed),
                10 => acceptance::bai_yin(seed),
                11 => acceptance::simplicity(workers, seed),
                _ => {
                    eprintln!("criterion id must be 1-11");
                    std::process::exit(1);
                }
            };
            println!("{}", c.line());
            acceptance::SuiteReport { workers, seed, criteria: vec![c] }
        }
    };
    if !report.passed() {
        std::process::exit(3);
    }
}

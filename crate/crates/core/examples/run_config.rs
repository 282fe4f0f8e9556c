//! Run a JSON experiment config through the harness:
//! `run_config configs/moment.json [output_dir]`.

use bandloc::harness::{self, ExperimentConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| {
        eprintln!("usage: run_config <config.json> [output_dir]");
        std::process::exit(1);
    });
    let text = std::fs::read_to_string(&path).expect("readable config");
    let mut config = match ExperimentConfig::from_json(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    };
    config.apply_overrides(None, None, args.next().as_deref(), None);
    match harness::run(&config) {
        Ok((manifest, _)) => {
            println!("{}", serde_json::to_string_pretty(&manifest).unwrap());
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}

//! Drives the command-line front end in-process: `check` and `estimate` on a
//! small sine-table configuration.

use std::path::Path;

fn main() {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs/sine_table.json");
    let out = std::env::temp_dir().join("fracuq-cli-example");
    let (config, out) = (config.to_str().unwrap(), out.to_str().unwrap());
    for cmd in ["check", "estimate"] {
        let code = fracuq::cli::run(["fracuq", cmd, "--config", config, "--out", out, "--threads", "2"], &mut std::io::stdout(), &mut std::io::stderr());
        println!("{cmd}: exit {code}");
    }
}

//! Space-time convergence at y = 0 under simultaneous halving of h and τ.

use fracuq::estimator::{output, spacetime_refinement_study, RunConfig};

fn main() -> fracuq::Result<()> {
    let mut c = RunConfig::default();
    c.space.n_div = 8;
    c.time.steps = 10;
    let rows = spacetime_refinement_study(&c, 3, &[])?;
    print!("{}", output::refinement_csv(&rows));
    Ok(())
}

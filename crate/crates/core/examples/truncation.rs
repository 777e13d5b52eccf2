//! Dimension-truncation error |E_z(T) − E_zref(T)| for the example field.

use fracuq::estimator::{output, truncation_study, Problem, RunConfig};

fn main() -> fracuq::Result<()> {
    let mut c = RunConfig::default();
    c.space.n_div = 16;
    c.time.steps = 50;
    c.qmc.m = 7;
    let p = Problem::new(&c)?;
    let z = [1, 3, 6, 10, 15, 21, 28, 36, 45, 55, 66, 78, 91, 105, 120, 136, 153, 171, 190, 210, 231, 253];
    let s = truncation_study(&p, &z, c.qmc.m, std::thread::available_parallelism().map_or(1, |n| n.get()))?;
    print!("{}", output::truncation_csv(&s));
    println!("log-log slope {:.3}", s.slope);
    Ok(())
}

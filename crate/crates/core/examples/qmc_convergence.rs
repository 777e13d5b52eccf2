//! QMC convergence table at desk scale: N = 16..128 against N = 512.

use fracuq::estimator::{convergence_table, output, FieldSpec, Problem, RunConfig};

fn main() -> fracuq::Result<()> {
    let mut c = RunConfig::default();
    c.field = FieldSpec::PaperExample { q: 10, scaling: Default::default() };
    c.space.n_div = 24;
    c.time.steps = 50;
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let t0 = std::time::Instant::now();
    let p = Problem::new(&c)?;
    let table = convergence_table(&p, &[16, 32, 64, 128], 512, threads)?;
    print!("{}", output::table_csv(&table.rows, &table.reference));
    eprintln!("{:.1} s", t0.elapsed().as_secs_f64());
    Ok(())
}

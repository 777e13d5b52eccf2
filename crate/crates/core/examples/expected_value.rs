//! E(t_n) ± 3σ at desk scale, written as CSV with a gnuplot script.

use fracuq::estimator::{output, FieldSpec, Problem, RunConfig};

fn main() -> fracuq::Result<()> {
    let mut c = RunConfig::default();
    c.field = FieldSpec::PaperExample { q: 10, scaling: Default::default() };
    c.space.n_div = 24;
    c.time.steps = 50;
    c.qmc.m = 7;
    let p = Problem::new(&c)?;
    let s = p.estimate(std::thread::available_parallelism().map_or(1, |n| n.get()))?;
    let dir = std::env::temp_dir().join("fracuq-expected-value");
    output::write_text(&dir.join("series.csv"), &output::series_csv(&s))?;
    output::write_text(&dir.join("series.gp"), &output::gnuplot_script("series.csv", "series.png"))?;
    for n in [0, 10, 25, 50] {
        println!("t = {:.4e}: E = {:.6}, σ = {:.3e}", s.times[n], s.mean[n], s.std[n]);
    }
    println!("wrote {}", dir.display());
    Ok(())
}

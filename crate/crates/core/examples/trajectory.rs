//! One deterministic trajectory (y = 0) with the direct and the
//! exponential-sum history, plus the binary state dump.

use fracuq::estimator::{output, Problem, RunConfig};
use fracuq::tfrac::{read_states, write_states};

fn main() -> fracuq::Result<()> {
    let mut c = RunConfig::default();
    c.space.n_div = 24;
    c.time.steps = 400;
    let direct = Problem::new(&c)?;
    let t0 = std::time::Instant::now();
    let a = direct.trajectory(&[], true)?;
    let ta = t0.elapsed();
    c.time.solver.fast_history = Some(1e-8);
    let fast = Problem::new(&c)?;
    let t1 = std::time::Instant::now();
    let b = fast.trajectory(&[], false)?;
    let tb = t1.elapsed();
    let (ua, ub) = (a.functional.last().unwrap(), b.functional.last().unwrap());
    println!("L(u_h(T)): direct {ua}, fast {ub}, rel diff {:.2e}", (ua - ub).abs() / ua.abs());
    println!("time: direct {:.2?}, fast {:.2?} ({} exponentials)", ta, tb, fast.scheme().expsum().map_or(0, |e| e.len()));
    print!("{}", output::trajectory_csv(&a).lines().take(4).collect::<Vec<_>>().join("\n"));
    println!("\n...");

    let path = std::env::temp_dir().join("fracuq-trajectory-example.bin");
    let states = a.states.unwrap();
    write_states(&path, &states)?;
    println!("state dump round trip: {}", read_states(&path)? == states);
    Ok(())
}

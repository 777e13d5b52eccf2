//! CBC construction of an interlaced polynomial lattice rule, its points, and
//! the generating-vector file round trip.

use fracuq::field::{ExampleScaling, RandomField};
use fracuq::qmc::{load_gen_vector, save_gen_vector, InterlacedLatticeRule, SpodWeights};

fn main() -> fracuq::Result<()> {
    let field = RandomField::example(4, ExampleScaling::Normalized)?;
    let weights = SpodWeights::from_field(&field);
    let rule = InterlacedLatticeRule::cbc(2, 6, 2, field.len(), &weights)?;
    println!("modulus {}  generators:", rule.modulus());
    for g in rule.gen_vector() {
        println!("  {g}");
    }
    let pts = rule.points()?;
    println!("{} points in {} dims; point 5 = {:?}", pts.n_points(), pts.dim(), pts.point(5));
    // smooth product integrand with the same decay as the weights
    let f = |x: &[f64]| x.iter().zip(weights.decay()).map(|(t, b)| 1.0 + b * ((t - 0.5) * (t - 0.5) - 1.0 / 12.0)).product::<f64>();
    for m in [4, 6, 8, 10] {
        let r = InterlacedLatticeRule::cbc(2, m, 2, field.len(), &weights)?;
        println!("N = {:>4}: |Q(f) − 1| = {:.3e}", r.n_points(), (r.points()?.integrate(f) - 1.0).abs());
    }
    let dir = std::env::temp_dir().join("fracuq-lattice-example");
    std::fs::create_dir_all(&dir).map_err(|e| fracuq::Error::Io { path: dir.clone(), source: e })?;
    let path = dir.join("rule.txt");
    save_gen_vector(&rule, &path)?;
    let back = load_gen_vector(&path)?;
    println!("reloaded rule has the same points: {}", back.points()?.to_csv() == pts.to_csv());
    Ok(())
}

//! The example diffusivity: mode norms, truncation tail and a sampled bounds check.

use fracuq::field::{ExampleScaling, ParameterVector, RandomField};

fn main() -> fracuq::Result<()> {
    let field = RandomField::example(22, ExampleScaling::Normalized)?;
    println!("z = {}  declared κ range {:?}", field.len(), field.declared_bounds());
    for z in [10, 55, 120, 200] {
        println!("tail bound after {z:>3} modes: {:.3e}", field.tail_bound(z)?);
    }
    let y = ParameterVector::new(vec![0.5; field.len()])?;
    println!("κ(½,½; y = ½) = {}", field.evaluate_kappa([0.5, 0.5], &y)?);
    let report = field.verify_bounds(41, 32, 7)?;
    println!("observed [{:.4}, {:.4}], {} violations", report.observed_min, report.observed_max, report.violation_count);

    // the literal amplitudes allow κ < 0 near the centre
    let raw = RandomField::example(22, ExampleScaling::AsPrinted)?;
    let r = raw.verify_bounds(41, 32, 7)?;
    println!("as printed: observed min {:.4}, {} violations", r.observed_min, r.violation_count);
    Ok(())
}

//! Graded time levels, the convolution weights of the Caputo scheme and the
//! exponential-sum surrogate of the kernel.

use fracuq::tfrac::{toeplitz_generator, uniform_scale, ExpSum, GradedTimeMesh, HistoryWeights};

fn main() -> fracuq::Result<()> {
    let alpha = 0.5;
    let mesh = GradedTimeMesh::new(1.0, 150, 2.0 / alpha)?;
    println!("t_1 = {:.4e}, τ_1 = {:.3e}, τ_150 = {:.3e}", mesh.t(1), mesh.min_step(), mesh.max_step());
    let w = HistoryWeights::new(&mesh, alpha)?;
    println!("row 150: ω_nn = {:.4}, ω_n1 = {:.4e}, ω_n,n−1 = {:.4}", w.diagonal(150), w.get(150, 1), w.get(150, 149));

    let uni = GradedTimeMesh::uniform(1.0, 10)?;
    let wu = HistoryWeights::new(&uni, alpha)?;
    let s = uniform_scale(alpha, 0.1);
    for j in 1..4 {
        println!("g_{j} = {:.6}  ω_10,{} / ω = {:.6}", toeplitz_generator(alpha, j), 10 - j, wu.get(10, 10 - j) / s);
    }

    for tol in [1e-6, 1e-8, 1e-10] {
        let e = ExpSum::new(alpha, mesh.min_step(), 1.0, tol, 4000)?;
        println!("exp sum tol {tol:e}: {} terms, max rel error {:.2e}", e.len(), e.max_rel_error);
    }
    Ok(())
}

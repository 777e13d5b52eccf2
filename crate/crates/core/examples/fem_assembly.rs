//! P1 mass and stiffness on the structured mesh, the Ritz projection of the
//! initial datum and the mean-value functional.

use std::sync::Arc;

use fracuq::fem::{Dofs, FemSpace, InitialData, TriMesh};

fn main() -> fracuq::Result<()> {
    for n in [8, 16, 32, 64] {
        let space = FemSpace::new(Arc::new(TriMesh::unit_square(n)?), Dofs::Interior)?;
        let kappa = |x: [f64; 2]| (2.0 + x[0] * x[1]) / 10.0;
        let kq: Vec<f64> = space.quadrature_points().into_iter().map(kappa).collect();
        let d = space.stiffness_from_quadrature(&kq)?;
        let u0 = space.ritz_projection_with(&d, &kq, &InitialData::Bump)?;
        let ones = vec![1.0; space.n_dofs()];
        println!(
            "n_div {n:>3}: dofs {:>5}, 1ᵀM1 = {:.6}, L(R_h g) = {:.8}",
            space.n_dofs(),
            space.mass().quadratic_form(&ones),
            space.apply_functional(&u0)
        );
    }
    Ok(())
}

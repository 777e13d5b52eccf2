//! Interlaced polynomial lattice rules: GF(b) arithmetic, point generation,
//! digit interlacing, fast CBC construction and generating-vector files.

pub mod cbc;
pub mod genvec;
pub mod gf;
pub mod points;

pub use cbc::{cbc_construct, figure_of_merit, walsh_kernel, CbcResult, SpodWeights};
pub use genvec::{format_gen_vector, load_gen_vector, parse_gen_vector, save_gen_vector};
pub use gf::{default_modulus, GFPoly};
pub use points::{classical_points, interlace, shift_to_centered, InterlacedLatticeRule, PointSet, VectorSource};

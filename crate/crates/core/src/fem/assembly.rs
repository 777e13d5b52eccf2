//! P1 assembly on a [`TriMesh`]: mass, κ-weighted stiffness, loads, the Ritz
//! projection and the mean-value functional.

use std::sync::Arc;

use super::cholesky::{EnvelopeCholesky, EnvelopeSymbolic};
use super::mesh::TriMesh;
use super::sparse::{Pattern, SparseSymMatrix};
use crate::error::{Error, Result};
use crate::field::{ParameterVector, RandomField};

/// Coefficient vector on the interior (or all) vertices.
pub type DofVector = Vec<f64>;

/// Barycentric coordinates of the 3-point Gauss rule (degree 2), weights area/3.
pub const GAUSS_BARY: [[f64; 3]; 3] = [[2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0]];

/// Which vertices carry unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dofs {
    /// Interior vertices only (homogeneous Dirichlet conditions).
    Interior,
    /// Every vertex, for untrimmed matrices.
    All,
}

#[derive(Debug, Clone)]
struct Element {
    area: f64,
    /// area · ∇λ_a · ∇λ_b
    stiff: [[f64; 3]; 3],
    grads: [[f64; 2]; 3],
    gauss: [[f64; 2]; 3],
    dofs: [Option<usize>; 3],
    /// pattern slot of (dof_a, dof_b)
    slots: [[usize; 3]; 3],
}

/// Right-hand side f(x, t).
#[derive(Clone)]
pub enum Source {
    Zero,
    Constant(f64),
    Function(Arc<dyn Fn([f64; 2], f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Source::Zero => write!(f, "Zero"),
            Source::Constant(c) => write!(f, "Constant({c})"),
            Source::Function(_) => write!(f, "Function(..)"),
        }
    }
}

/// Initial datum g with an optional exact gradient.
#[derive(Clone)]
pub enum InitialData {
    Zero,
    /// 144 x₁²(1−x₁) x₂²(1−x₂), whose mean over the unit square is 1.
    Bump,
    Function {
        value: Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>,
        gradient: Option<Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>>,
    },
}

impl std::fmt::Debug for InitialData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InitialData::Zero => write!(f, "Zero"),
            InitialData::Bump => write!(f, "Bump"),
            InitialData::Function { gradient, .. } => write!(f, "Function {{ exact_gradient: {} }}", gradient.is_some()),
        }
    }
}

impl InitialData {
    pub fn value(&self, x: [f64; 2]) -> f64 {
        match self {
            InitialData::Zero => 0.0,
            InitialData::Bump => 144.0 * x[0] * x[0] * (1.0 - x[0]) * x[1] * x[1] * (1.0 - x[1]),
            InitialData::Function { value, .. } => value(x),
        }
    }

    fn exact_gradient(&self, x: [f64; 2]) -> Option<[f64; 2]> {
        match self {
            InitialData::Zero => Some([0.0, 0.0]),
            InitialData::Bump => {
                let (a, b) = (x[0] * x[0] * (1.0 - x[0]), x[1] * x[1] * (1.0 - x[1]));
                let (da, db) = (2.0 * x[0] - 3.0 * x[0] * x[0], 2.0 * x[1] - 3.0 * x[1] * x[1]);
                Some([144.0 * da * b, 144.0 * a * db])
            }
            InitialData::Function { gradient, .. } => gradient.as_ref().map(|g| g(x)),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, InitialData::Zero)
    }
}

/// Mesh plus everything about P1 assembly that does not depend on κ.
#[derive(Debug, Clone)]
pub struct FemSpace {
    mesh: Arc<TriMesh>,
    dofs: Dofs,
    dof_of_vertex: Vec<Option<usize>>,
    n: usize,
    pattern: Arc<Pattern>,
    elements: Vec<Element>,
    mass: SparseSymMatrix,
    /// ∫ φ_p over Ω
    basis_integrals: Vec<f64>,
    symbolic: Arc<EnvelopeSymbolic>,
}

impl FemSpace {
    pub fn new(mesh: Arc<TriMesh>, dofs: Dofs) -> Result<Self> {
        let (dof_of_vertex, n) = match dofs {
            Dofs::Interior => (mesh.interior_index().to_vec(), mesh.n_dofs()),
            Dofs::All => ((0..mesh.n_vertices()).map(Some).collect(), mesh.n_vertices()),
        };
        let mut pairs = Vec::new();
        for t in mesh.triangles() {
            for a in t {
                for b in t {
                    if let (Some(p), Some(q)) = (dof_of_vertex[*a], dof_of_vertex[*b]) {
                        pairs.push((p, q));
                    }
                }
            }
        }
        for p in 0..n {
            pairs.push((p, p));
        }
        let pattern = Arc::new(Pattern::from_pairs(n, pairs));
        let mut elements = Vec::with_capacity(mesh.triangles().len());
        for (index, t) in mesh.triangles().iter().enumerate() {
            let [a, b, c] = t.map(|v| mesh.vertices()[v]);
            let area = mesh.area(index);
            if !(area > 0.0) {
                return Err(Error::DegenerateElement { index, area });
            }
            // ∇λ_k = rot(edge opposite k) / (2·area)
            let grads = [
                [(b[1] - c[1]) / (2.0 * area), (c[0] - b[0]) / (2.0 * area)],
                [(c[1] - a[1]) / (2.0 * area), (a[0] - c[0]) / (2.0 * area)],
                [(a[1] - b[1]) / (2.0 * area), (b[0] - a[0]) / (2.0 * area)],
            ];
            let mut stiff = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    stiff[i][j] = area * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                }
            }
            let gauss = GAUSS_BARY.map(|l| [l[0] * a[0] + l[1] * b[0] + l[2] * c[0], l[0] * a[1] + l[1] * b[1] + l[2] * c[1]]);
            let edofs = t.map(|v| dof_of_vertex[v]);
            let mut slots = [[usize::MAX; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    if let (Some(p), Some(q)) = (edofs[i], edofs[j]) {
                        slots[i][j] = pattern.slot(p, q).unwrap();
                    }
                }
            }
            elements.push(Element { area, stiff, grads, gauss, dofs: edofs, slots });
        }
        let mut mass = SparseSymMatrix::zeros(pattern.clone());
        let mut basis_integrals = vec![0.0; n];
        for e in &elements {
            for i in 0..3 {
                if let Some(p) = e.dofs[i] {
                    basis_integrals[p] += e.area / 3.0;
                }
                for j in 0..3 {
                    if e.slots[i][j] != usize::MAX {
                        mass.values_mut()[e.slots[i][j]] += e.area / 12.0 * if i == j { 2.0 } else { 1.0 };
                    }
                }
            }
        }
        let symbolic = Arc::new(EnvelopeSymbolic::new(pattern.clone()));
        Ok(Self { mesh, dofs, dof_of_vertex, n, pattern, elements, mass, basis_integrals, symbolic })
    }

    pub fn mesh(&self) -> &Arc<TriMesh> {
        &self.mesh
    }

    pub fn dofs(&self) -> Dofs {
        self.dofs
    }

    pub fn n_dofs(&self) -> usize {
        self.n
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn pattern(&self) -> &Arc<Pattern> {
        &self.pattern
    }

    pub fn symbolic(&self) -> &Arc<EnvelopeSymbolic> {
        &self.symbolic
    }

    pub fn mass(&self) -> &SparseSymMatrix {
        &self.mass
    }

    /// ∫_Ω φ_p for each dof.
    pub fn basis_integrals(&self) -> &[f64] {
        &self.basis_integrals
    }

    /// Quadrature points, three per element in element order.
    pub fn quadrature_points(&self) -> Vec<[f64; 2]> {
        self.elements.iter().flat_map(|e| e.gauss).collect()
    }

    /// D = Σ_K κ̄_K ∫_K ∇φ_p·∇φ_q where κ̄_K is the mean of κ over the three
    /// quadrature points of K; `kappa_q` holds κ at every quadrature point.
    pub fn stiffness_from_quadrature(&self, kappa_q: &[f64]) -> Result<SparseSymMatrix> {
        let mut d = SparseSymMatrix::zeros(self.pattern.clone());
        self.stiffness_into(kappa_q, &mut d, true)?;
        Ok(d)
    }

    pub(crate) fn stiffness_into(&self, kappa_q: &[f64], d: &mut SparseSymMatrix, check: bool) -> Result<()> {
        assert_eq!(kappa_q.len(), 3 * self.elements.len());
        let vals = d.values_mut();
        vals.iter_mut().for_each(|v| *v = 0.0);
        for (k, e) in self.elements.iter().enumerate() {
            let kq = &kappa_q[3 * k..3 * k + 3];
            if check {
                if let Some(v) = kq.iter().find(|v| !(**v > 0.0)) {
                    return Err(Error::NonPositiveKappa { element: k, value: *v });
                }
            }
            let kbar = (kq[0] + kq[1] + kq[2]) / 3.0;
            for i in 0..3 {
                for j in 0..3 {
                    let s = e.slots[i][j];
                    if s != usize::MAX {
                        vals[s] += kbar * e.stiff[i][j];
                    }
                }
            }
        }
        Ok(())
    }

    /// Stiffness for a closure κ(x).
    pub fn stiffness_with(&self, kappa: impl Fn([f64; 2]) -> f64) -> Result<SparseSymMatrix> {
        let kq: Vec<f64> = self.quadrature_points().into_iter().map(kappa).collect();
        self.stiffness_from_quadrature(&kq)
    }

    /// ⟨f̄, φ_p⟩ with f̄ the time average of f over (t_a, t_b): exact for
    /// time-independent f, two-point Gauss in time otherwise; the three-point
    /// rule in space.
    pub fn load_vector(&self, f: &Source, t_a: f64, t_b: f64) -> Result<DofVector> {
        if !(t_a < t_b) {
            return Err(Error::invalid("t_a", "the time interval must satisfy t_a < t_b"));
        }
        let mut out = vec![0.0; self.n];
        match f {
            Source::Zero => {}
            Source::Constant(c) => {
                for (o, w) in out.iter_mut().zip(&self.basis_integrals) {
                    *o = c * w;
                }
            }
            Source::Function(func) => {
                let (mid, half) = (0.5 * (t_a + t_b), 0.5 * (t_b - t_a));
                let d = half / 3f64.sqrt();
                for e in &self.elements {
                    for (q, x) in e.gauss.iter().enumerate() {
                        let fbar = 0.5 * (func(*x, mid - d) + func(*x, mid + d));
                        for i in 0..3 {
                            if let Some(p) = e.dofs[i] {
                                out[p] += e.area / 3.0 * fbar * GAUSS_BARY[q][i];
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Nodal interpolant on the dofs.
    pub fn interpolate(&self, g: impl Fn([f64; 2]) -> f64) -> DofVector {
        let mut out = vec![0.0; self.n];
        for (v, d) in self.dof_of_vertex.iter().enumerate() {
            if let Some(p) = d {
                out[*p] = g(self.mesh.vertices()[v]);
            }
        }
        out
    }

    /// rhs_p = ∫ κ ∇g·∇φ_p with the stiffness quadrature; ∇g is exact where
    /// available, otherwise the gradient of the nodal interpolant of g.
    pub fn ritz_rhs(&self, kappa_q: &[f64], g: &InitialData) -> DofVector {
        let mut rhs = vec![0.0; self.n];
        if g.is_zero() {
            return rhs;
        }
        let verts = self.mesh.vertices();
        for (k, (e, t)) in self.elements.iter().zip(self.mesh.triangles()).enumerate() {
            let interp_grad = || {
                let mut gr = [0.0; 2];
                for i in 0..3 {
                    let gv = g.value(verts[t[i]]);
                    gr[0] += gv * e.grads[i][0];
                    gr[1] += gv * e.grads[i][1];
                }
                gr
            };
            for q in 0..3 {
                let gr = g.exact_gradient(e.gauss[q]).unwrap_or_else(interp_grad);
                let w = e.area / 3.0 * kappa_q[3 * k + q];
                for i in 0..3 {
                    if let Some(p) = e.dofs[i] {
                        rhs[p] += w * (gr[0] * e.grads[i][0] + gr[1] * e.grads[i][1]);
                    }
                }
            }
        }
        rhs
    }

    /// R_h g: solves D U = rhs.
    pub fn ritz_projection_with(&self, d: &SparseSymMatrix, kappa_q: &[f64], g: &InitialData) -> Result<DofVector> {
        if g.is_zero() {
            return Ok(vec![0.0; self.n]);
        }
        let rhs = self.ritz_rhs(kappa_q, g);
        let chol = EnvelopeCholesky::factor(&self.symbolic, d)?;
        Ok(chol.solve(&rhs))
    }

    /// L(u_h) = ∫_Ω u_h = Σ_p U_p ∫ φ_p.
    pub fn apply_functional(&self, coeffs: &[f64]) -> f64 {
        coeffs.iter().zip(&self.basis_integrals).map(|(u, w)| u * w).sum()
    }

    /// Vertex values of a dof vector (zero on non-dof vertices).
    pub fn vertex_values(&self, coeffs: &[f64]) -> Vec<f64> {
        self.dof_of_vertex.iter().map(|d| d.map_or(0.0, |p| coeffs[p])).collect()
    }
}

/// ψ_j and κ₀ tabulated at the quadrature points of a mesh.
#[derive(Debug, Clone)]
pub struct QuadratureField {
    kappa0: Vec<f64>,
    /// psi[q * z + j]
    psi: Vec<f64>,
    z: usize,
}

impl QuadratureField {
    /// Tabulates the first `z` modes of `field`.
    pub fn new(space: &FemSpace, field: &RandomField, z: usize) -> Result<Self> {
        if z > field.len() {
            return Err(Error::Config(format!("truncation dimension {z} exceeds the {} available modes", field.len())));
        }
        let pts = space.quadrature_points();
        let kappa0 = pts.iter().map(|x| field.mean_value(*x)).collect();
        let mut psi = Vec::with_capacity(pts.len() * z);
        for x in &pts {
            for j in 0..z {
                psi.push(field.basis_value(j, *x));
            }
        }
        Ok(Self { kappa0, psi, z })
    }

    pub fn z(&self) -> usize {
        self.z
    }

    /// κ(x_q, y) at every quadrature point; y may be shorter than z.
    pub fn kappa(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() > self.z {
            return Err(Error::Config(format!("parameter vector of length {} exceeds the tabulated {} modes", y.len(), self.z)));
        }
        Ok(self
            .kappa0
            .iter()
            .enumerate()
            .map(|(q, k0)| {
                let row = &self.psi[q * self.z..q * self.z + y.len()];
                k0 + row.iter().zip(y).map(|(p, yj)| p * yj).sum::<f64>()
            })
            .collect())
    }

    /// Σ_j y_j ψ_j at the quadrature points (no κ₀).
    pub fn fluctuation(&self, y: &[f64]) -> Result<Vec<f64>> {
        let k = self.kappa(y)?;
        Ok(k.iter().zip(&self.kappa0).map(|(a, b)| a - b).collect())
    }
}

/// Structured unit-square mesh with n_div divisions per side.
pub fn triangulate_unit_square(n_div: usize) -> Result<TriMesh> {
    TriMesh::unit_square(n_div)
}

/// Mass matrix on the interior dofs.
pub fn assemble_mass(mesh: &TriMesh) -> Result<SparseSymMatrix> {
    Ok(FemSpace::new(Arc::new(mesh.clone()), Dofs::Interior)?.mass().clone())
}

/// Stiffness D(y) on the interior dofs.
pub fn assemble_stiffness(mesh: &TriMesh, field: &RandomField, y: &ParameterVector) -> Result<SparseSymMatrix> {
    let space = FemSpace::new(Arc::new(mesh.clone()), Dofs::Interior)?;
    let qf = QuadratureField::new(&space, field, y.dim())?;
    space.stiffness_from_quadrature(&qf.kappa(y.coords())?)
}

pub fn load_vector(mesh: &TriMesh, f: &Source, t_a: f64, t_b: f64) -> Result<DofVector> {
    FemSpace::new(Arc::new(mesh.clone()), Dofs::Interior)?.load_vector(f, t_a, t_b)
}

pub fn ritz_projection(mesh: &TriMesh, field: &RandomField, y: &ParameterVector, g: &InitialData) -> Result<DofVector> {
    let space = FemSpace::new(Arc::new(mesh.clone()), Dofs::Interior)?;
    let qf = QuadratureField::new(&space, field, y.dim())?;
    let kq = qf.kappa(y.coords())?;
    let d = space.stiffness_from_quadrature(&kq)?;
    space.ritz_projection_with(&d, &kq, g)
}

pub fn apply_functional(mesh: &TriMesh, coeffs: &[f64]) -> f64 {
    let mut s = vec![0.0; mesh.n_dofs()];
    for (k, t) in mesh.triangles().iter().enumerate() {
        for v in t {
            if let Some(p) = mesh.interior_index()[*v] {
                s[p] += mesh.area(k) / 3.0;
            }
        }
    }
    coeffs.iter().zip(&s).map(|(u, w)| u * w).sum()
}

//! Classical polynomial lattice points, digit interlacing and the interlaced rule.

use std::path::PathBuf;

use super::gf::GFPoly;
use crate::error::{Error, Result};
use crate::field::ParameterVector;

/// Points stored as integer mantissas: coordinate = mantissa / b^digits.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    base: u32,
    digits: usize,
    n_points: usize,
    dim: usize,
    mantissas: Vec<u64>,
    provenance: String,
}

/// Largest digit count whose b^digits is exactly representable as f64.
fn max_digits(base: u32) -> usize {
    let mut d = 0;
    let mut p: u64 = 1;
    while let Some(q) = p.checked_mul(base as u64) {
        if q > 1u64 << 53 {
            break;
        }
        p = q;
        d += 1;
    }
    d
}

fn pow(base: u32, e: usize) -> u64 {
    (base as u64).pow(e as u32)
}

impl PointSet {
    /// Row-major mantissas (`n_points` rows of `dim` entries).
    pub fn from_mantissas(base: u32, digits: usize, dim: usize, mantissas: Vec<u64>, provenance: impl Into<String>) -> Result<Self> {
        if digits > max_digits(base) {
            return Err(Error::DigitDepth { base, digits });
        }
        if dim == 0 || mantissas.len() % dim != 0 {
            return Err(Error::invalid("mantissas", "length is not a multiple of the dimension"));
        }
        let limit = pow(base, digits);
        if mantissas.iter().any(|v| *v >= limit) {
            return Err(Error::invalid("mantissas", format!("entries must be below {base}^{digits}")));
        }
        Ok(Self { base, digits, n_points: mantissas.len() / dim, dim, mantissas, provenance: provenance.into() })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    /// Number of base-b digits per coordinate.
    pub fn digits(&self) -> usize {
        self.digits
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn mantissa(&self, i: usize, j: usize) -> u64 {
        self.mantissas[i * self.dim + j]
    }

    pub fn coordinate(&self, i: usize, j: usize) -> f64 {
        self.mantissa(i, j) as f64 / pow(self.base, self.digits) as f64
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        (0..self.dim).map(|j| self.coordinate(i, j)).collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_points).map(|i| self.coordinate(i, j)).collect()
    }

    /// Equal-weight cubature (1/N) Σ f(point_i).
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        let vals: Vec<f64> = (0..self.n_points).map(|i| f(&self.point(i))).collect();
        crate::numeric::pairwise_sum(&vals) / self.n_points as f64
    }

    /// One point per line, comma separated.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for i in 0..self.n_points {
            let row: Vec<String> = (0..self.dim).map(|j| self.coordinate(i, j).to_string()).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

/// The GF(b)-linear map from a polynomial h (deg h < m) to the integer
/// mantissa of v_m(h / P), i.e. the first m Laurent digits of h/P.
#[derive(Debug, Clone)]
pub(crate) struct LaurentDigits {
    base: u32,
    m: usize,
    /// mantissa images of x^r (or of x^r g when composed with a generator)
    columns: Vec<u64>,
}

/// Laurent digits t_1..t_m of h/P, most significant first.
fn laurent(h: &GFPoly, modulus: &GFPoly, m: usize) -> Vec<u32> {
    let b = modulus.base();
    let x = GFPoly::x(b);
    let lead = modulus.coeff(m);
    let inv = (1..b).find(|i| (i * lead) % b == 1).unwrap();
    let mut r = h.clone();
    let mut out = Vec::with_capacity(m);
    for _ in 0..m {
        r = r.mul(&x);
        let t = (r.coeff(m) * inv) % b;
        out.push(t);
        if t != 0 {
            r = r.sub(&modulus.mul(&GFPoly::new(b, vec![t]).unwrap()));
        }
    }
    out
}

fn digits_to_mantissa(base: u32, digits: &[u32]) -> u64 {
    digits.iter().fold(0u64, |acc, d| acc * base as u64 + *d as u64)
}

fn mantissa_digits(base: u32, mut v: u64, n: usize) -> Vec<u32> {
    let mut d = vec![0u32; n];
    for slot in d.iter_mut().rev() {
        *slot = (v % base as u64) as u32;
        v /= base as u64;
    }
    d
}

impl LaurentDigits {
    /// Map n ↦ v_m(n(x) g(x) / P(x)) for index polynomials n.
    pub(crate) fn new(modulus: &GFPoly, g: &GFPoly) -> Self {
        let b = modulus.base();
        let m = modulus.degree().unwrap();
        let columns = (0..m)
            .map(|r| {
                let xr = GFPoly::from_index(b, pow(b, r));
                let h = xr.mul_mod(g, modulus);
                digits_to_mantissa(b, &laurent(&h, modulus, m))
            })
            .collect();
        Self { base: b, m, columns }
    }

    pub(crate) fn apply(&self, mut index: u64) -> u64 {
        if self.base == 2 {
            let mut acc = 0u64;
            let mut r = 0;
            while index != 0 {
                if index & 1 == 1 {
                    acc ^= self.columns[r];
                }
                index >>= 1;
                r += 1;
            }
            return acc;
        }
        let b = self.base;
        let mut acc = vec![0u32; self.m];
        let mut r = 0;
        while index != 0 {
            let d = (index % b as u64) as u32;
            if d != 0 {
                for (a, c) in acc.iter_mut().zip(mantissa_digits(b, self.columns[r], self.m)) {
                    *a = (*a + d * c) % b;
                }
            }
            index /= b as u64;
            r += 1;
        }
        digits_to_mantissa(b, &acc)
    }
}

fn validate_modulus(modulus: &GFPoly, m: usize) -> Result<()> {
    if modulus.degree() != Some(m) {
        return Err(Error::DegreeMismatch(format!("modulus {modulus} does not have degree {m}")));
    }
    if !modulus.is_irreducible() {
        return Err(Error::ReducibleModulus { base: modulus.base() });
    }
    Ok(())
}

fn validate_generator(g: &GFPoly, modulus: &GFPoly, m: usize, i: usize) -> Result<()> {
    if g.base() != modulus.base() {
        return Err(Error::DegreeMismatch(format!("generator {i} is over GF({}) but the modulus over GF({})", g.base(), modulus.base())));
    }
    match g.degree() {
        None => Err(Error::DegreeMismatch(format!("generator {i} is the zero polynomial"))),
        Some(d) if d >= m => Err(Error::DegreeMismatch(format!("generator {i} has degree {d} ≥ m = {m}"))),
        _ => Ok(()),
    }
}

/// Classical polynomial lattice points v_m(n g_i / P), n = 0..b^m−1, one column per generator.
pub fn classical_points(b: u32, m: usize, modulus: &GFPoly, g: &[GFPoly]) -> Result<PointSet> {
    if modulus.base() != b {
        return Err(Error::DegreeMismatch(format!("modulus is over GF({}) not GF({b})", modulus.base())));
    }
    validate_modulus(modulus, m)?;
    for (i, gi) in g.iter().enumerate() {
        validate_generator(gi, modulus, m, i)?;
    }
    if g.is_empty() {
        return Err(Error::invalid("g", "at least one generator is required"));
    }
    let maps: Vec<LaurentDigits> = g.iter().map(|gi| LaurentDigits::new(modulus, gi)).collect();
    let n = pow(b, m);
    let mut mant = Vec::with_capacity(n as usize * g.len());
    for idx in 0..n {
        for map in &maps {
            mant.push(map.apply(idx));
        }
    }
    PointSet::from_mantissas(b, m, g.len(), mant, "classical")
}

/// Digit interlacing of consecutive blocks of β columns: digit i of the
/// j-th column of a block becomes digit j + (i−1)β of the output coordinate.
pub fn interlace(raw: &PointSet, beta: usize) -> Result<PointSet> {
    if beta == 0 || raw.dim % beta != 0 {
        return Err(Error::BlockSize { columns: raw.dim, beta });
    }
    let (b, m) = (raw.base, raw.digits);
    let digits = beta * m;
    if digits > max_digits(b) {
        return Err(Error::DigitDepth { base: b, digits });
    }
    let z = raw.dim / beta;
    let mut out = Vec::with_capacity(raw.n_points * z);
    let mut block = vec![vec![0u32; m]; beta];
    for i in 0..raw.n_points {
        for j in 0..z {
            for (k, d) in block.iter_mut().enumerate() {
                *d = mantissa_digits(b, raw.mantissa(i, j * beta + k), m);
            }
            let mut v = 0u64;
            for pos in 0..m {
                for d in &block {
                    v = v * b as u64 + d[pos] as u64;
                }
            }
            out.push(v);
        }
    }
    PointSet::from_mantissas(b, digits, z, out, raw.provenance.clone())
}

/// t ↦ t − ½ in every coordinate.
pub fn shift_to_centered(points: &PointSet) -> Vec<ParameterVector> {
    (0..points.n_points)
        .map(|i| ParameterVector::new(points.point(i).into_iter().map(|t| t - 0.5).collect()).expect("coordinates lie in [0,1)"))
        .collect()
}

/// Where a generating vector came from.
#[derive(Debug, Clone, PartialEq)]
pub enum VectorSource {
    Cbc,
    File(PathBuf),
    Given,
}

impl std::fmt::Display for VectorSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VectorSource::Cbc => write!(f, "cbc"),
            VectorSource::File(p) => write!(f, "file:{}", p.display()),
            VectorSource::Given => write!(f, "given"),
        }
    }
}

/// Interlaced polynomial lattice rule of order β with b^m points in z dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct InterlacedLatticeRule {
    b: u32,
    m: usize,
    beta: usize,
    z: usize,
    modulus: GFPoly,
    gen_vector: Vec<GFPoly>,
    source: VectorSource,
}

impl InterlacedLatticeRule {
    pub fn new(b: u32, m: usize, beta: usize, z: usize, modulus: GFPoly, gen_vector: Vec<GFPoly>, source: VectorSource) -> Result<Self> {
        if beta == 0 {
            return Err(Error::invalid("beta", "must be at least 1"));
        }
        if z == 0 {
            return Err(Error::invalid("z", "must be at least 1"));
        }
        if modulus.base() != b {
            return Err(Error::DegreeMismatch(format!("modulus is over GF({}) not GF({b})", modulus.base())));
        }
        validate_modulus(&modulus, m)?;
        if gen_vector.len() != beta * z {
            return Err(Error::BlockSize { columns: gen_vector.len(), beta });
        }
        for (i, g) in gen_vector.iter().enumerate() {
            validate_generator(g, &modulus, m, i)?;
        }
        if beta * m > max_digits(b) {
            return Err(Error::DigitDepth { base: b, digits: beta * m });
        }
        Ok(Self { b, m, beta, z, modulus, gen_vector, source })
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn beta(&self) -> usize {
        self.beta
    }

    pub fn z(&self) -> usize {
        self.z
    }

    pub fn n_points(&self) -> usize {
        pow(self.b, self.m) as usize
    }

    pub fn modulus(&self) -> &GFPoly {
        &self.modulus
    }

    pub fn gen_vector(&self) -> &[GFPoly] {
        &self.gen_vector
    }

    pub fn source(&self) -> &VectorSource {
        &self.source
    }

    /// Rule in the first z' dimensions (prefix of the generating vector).
    pub fn truncated(&self, z: usize) -> Result<Self> {
        if z > self.z {
            return Err(Error::Config(format!("rule has {} dimensions, {z} requested", self.z)));
        }
        Self::new(self.b, self.m, self.beta, z, self.modulus.clone(), self.gen_vector[..self.beta * z].to_vec(), self.source.clone())
    }

    pub fn classical_points(&self) -> Result<PointSet> {
        classical_points(self.b, self.m, &self.modulus, &self.gen_vector)
    }

    /// Interlaced points in [0,1)^z.
    pub fn points(&self) -> Result<PointSet> {
        let mut p = interlace(&self.classical_points()?, self.beta)?;
        p.provenance = self.source.to_string();
        Ok(p)
    }

    /// Shifted points in [−½, ½)^z.
    pub fn parameter_vectors(&self) -> Result<Vec<ParameterVector>> {
        Ok(shift_to_centered(&self.points()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p2(bits: u64) -> GFPoly {
        GFPoly::from_index(2, bits)
    }

    #[test]
    fn first_index_is_origin() {
        let p = classical_points(2, 3, &p2(0b1011), &[p2(1), p2(3), p2(5)]).unwrap();
        assert!(p.point(0).iter().all(|c| *c == 0.0));
    }

    #[test]
    fn single_digit_example() {
        // 1/(x+1) = x^{-1} + x^{-2} + ... so v_1 gives 1/2
        let p = classical_points(2, 1, &p2(0b11), &[p2(1)]).unwrap();
        assert_eq!(p.coordinate(1, 0), 0.5);
    }

    #[test]
    fn laurent_digits_by_hand() {
        // 1/(x^2+x+1) = x^{-2} + x^{-3} + x^{-5} + ... : digits 0,1
        assert_eq!(laurent(&p2(1), &p2(0b111), 2), vec![0, 1]);
        // x/(x^2+x+1) = x^{-1} + x^{-2} + x^{-4} + ...
        assert_eq!(laurent(&p2(0b10), &p2(0b111), 2), vec![1, 1]);
    }

    #[test]
    fn columns_are_permutations() {
        for m in 1..=4 {
            let modulus = super::super::gf::default_modulus(2, m).unwrap();
            let n = 1u64 << m;
            let g: Vec<GFPoly> = (1..n).map(p2).collect();
            let p = classical_points(2, m, &modulus, &g).unwrap();
            for j in 0..p.dim() {
                let mut col: Vec<u64> = (0..p.n_points()).map(|i| p.mantissa(i, j)).collect();
                col.sort();
                assert_eq!(col, (0..n).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn ternary_columns_are_permutations() {
        let modulus = super::super::gf::default_modulus(3, 2).unwrap();
        let g: Vec<GFPoly> = (1..9).map(|i| GFPoly::from_index(3, i)).collect();
        let p = classical_points(3, 2, &modulus, &g).unwrap();
        for j in 0..p.dim() {
            let mut col: Vec<u64> = (0..9).map(|i| p.mantissa(i, j)).collect();
            col.sort();
            assert_eq!(col, (0..9).collect::<Vec<_>>());
        }
    }

    #[test]
    fn interlace_examples() {
        let raw = PointSet::from_mantissas(2, 1, 2, vec![1, 1, 0, 0], "t").unwrap();
        let out = interlace(&raw, 2).unwrap();
        assert_eq!(out.coordinate(0, 0), 0.75);
        assert_eq!(out.coordinate(1, 0), 0.0);
        let same = interlace(&raw, 1).unwrap();
        assert_eq!(same, raw);
        assert!(matches!(interlace(&raw, 3), Err(Error::BlockSize { .. })));
    }

    #[test]
    fn interlace_digit_positions() {
        // block (0.101, 0.011) in binary -> digits a1 b1 a2 b2 a3 b3 = 1 0 0 1 1 1
        let raw = PointSet::from_mantissas(2, 3, 2, vec![0b101, 0b011], "t").unwrap();
        assert_eq!(interlace(&raw, 2).unwrap().mantissa(0, 0), 0b100111);
    }

    #[test]
    fn digit_depth_is_enforced() {
        let raw = PointSet::from_mantissas(2, 20, 3, vec![0, 0, 0], "t").unwrap();
        assert!(matches!(interlace(&raw, 3), Err(Error::DigitDepth { .. })));
    }

    #[test]
    fn rule_validation() {
        let g = vec![p2(1), p2(3)];
        assert!(matches!(
            InterlacedLatticeRule::new(2, 2, 1, 2, p2(0b100), g.clone(), VectorSource::Given),
            Err(Error::ReducibleModulus { .. })
        ));
        assert!(matches!(
            InterlacedLatticeRule::new(2, 2, 1, 2, p2(0b111), vec![p2(1), p2(4)], VectorSource::Given),
            Err(Error::DegreeMismatch(_))
        ));
        assert!(matches!(
            InterlacedLatticeRule::new(2, 2, 2, 2, p2(0b111), g.clone(), VectorSource::Given),
            Err(Error::BlockSize { .. })
        ));
        let r = InterlacedLatticeRule::new(2, 2, 2, 1, p2(0b111), g, VectorSource::Given).unwrap();
        assert_eq!(r.points().unwrap().n_points(), 4);
    }

    #[test]
    fn shift_values() {
        let raw = PointSet::from_mantissas(2, 4, 1, (0..16).collect(), "t").unwrap();
        let y = shift_to_centered(&raw);
        assert_eq!(y[0].coords()[0], -0.5);
        assert_eq!(y[8].coords()[0], 0.0);
        assert_eq!(y[15].coords()[0], 0.4375);
    }

    #[test]
    fn constant_integrand_is_exact() {
        let r = InterlacedLatticeRule::new(2, 3, 2, 2, p2(0b1011), vec![p2(1), p2(2), p2(3), p2(5)], VectorSource::Given).unwrap();
        assert_eq!(r.points().unwrap().integrate(|_| 1.0), 1.0);
    }
}

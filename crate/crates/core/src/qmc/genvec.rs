//! Text format for generating vectors.
//!
//! ```text
//! # comment lines and trailing comments start with '#'
//! b m beta z
//! P c_0 c_1 ... c_m          (modulus, ascending degree)
//! c_0 c_1 ... c_{m-1}        (one line per generator, beta*z lines)
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::gf::GFPoly;
use super::points::{InterlacedLatticeRule, VectorSource};
use crate::error::{Error, Result};

pub fn format_gen_vector(rule: &InterlacedLatticeRule) -> String {
    let coeffs = |p: &GFPoly, n: usize| (0..n).map(|i| p.coeff(i).to_string()).collect::<Vec<_>>().join(" ");
    let mut s = String::new();
    writeln!(s, "# interlaced polynomial lattice rule ({})", rule.source()).unwrap();
    writeln!(s, "{} {} {} {}", rule.b(), rule.m(), rule.beta(), rule.z()).unwrap();
    writeln!(s, "P {}", coeffs(rule.modulus(), rule.m() + 1)).unwrap();
    for g in rule.gen_vector() {
        writeln!(s, "{}", coeffs(g, rule.m())).unwrap();
    }
    s
}

pub fn save_gen_vector(rule: &InterlacedLatticeRule, path: &Path) -> Result<()> {
    std::fs::write(path, format_gen_vector(rule)).map_err(|e| Error::io(path, e))
}

pub fn load_gen_vector(path: &Path) -> Result<InterlacedLatticeRule> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_gen_vector(&text, path)
}

/// Parses and validates; errors name the offending line of `origin`.
pub fn parse_gen_vector(text: &str, origin: &Path) -> Result<InterlacedLatticeRule> {
    let perr = |line: usize, message: String| Error::Parse { path: origin.to_path_buf(), line, message };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap().trim()))
        .filter(|(_, l)| !l.is_empty());

    let ints = |line: usize, s: &str| -> Result<Vec<u64>> {
        s.split_whitespace().map(|t| t.parse::<u64>().map_err(|_| perr(line, format!("`{t}` is not a nonnegative integer")))).collect()
    };

    let (hl, header) = lines.next().ok_or_else(|| perr(0, "missing header `b m beta z`".into()))?;
    let h = ints(hl, header)?;
    if h.len() != 4 {
        return Err(perr(hl, "header must be `b m beta z`".into()));
    }
    let (b, m, beta, z) = (h[0] as u32, h[1] as usize, h[2] as usize, h[3] as usize);
    let poly = |line: usize, c: Vec<u64>| -> Result<GFPoly> {
        let c: Vec<u32> = c.into_iter().map(|v| u32::try_from(v).unwrap_or(u32::MAX)).collect();
        GFPoly::new(b, c).map_err(|e| perr(line, e.to_string()))
    };

    let (pl, pline) = lines.next().ok_or_else(|| perr(hl, "missing modulus line".into()))?;
    let body = pline.strip_prefix('P').ok_or_else(|| perr(pl, "modulus line must start with `P`".into()))?;
    let modulus = poly(pl, ints(pl, body)?)?;
    if modulus.degree() != Some(m) {
        return Err(perr(pl, format!("modulus has degree {:?}, expected {m}", modulus.degree())));
    }
    if !modulus.is_irreducible() {
        return Err(perr(pl, format!("modulus {modulus} is reducible over GF({b})")));
    }

    let mut gens = Vec::new();
    for (gl, line) in lines {
        let g = poly(gl, ints(gl, line.strip_prefix('g').unwrap_or(line))?)?;
        match g.degree() {
            None => return Err(perr(gl, "generator is the zero polynomial".into())),
            Some(d) if d >= m => return Err(perr(gl, format!("generator has degree {d} ≥ m = {m}"))),
            _ => {}
        }
        gens.push(g);
    }
    if gens.len() != beta * z {
        return Err(perr(hl, format!("expected {} generators, found {}", beta * z, gens.len())));
    }
    InterlacedLatticeRule::new(b, m, beta, z, modulus, gens, VectorSource::File(origin.to_path_buf()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn origin() -> &'static Path {
        Path::new("test.gv")
    }

    #[test]
    fn parses_minimal_file() {
        let r = parse_gen_vector("# demo\n2 2 1 2\nP 1 1 1\n1 0\n1 1 # x+1\n", origin()).unwrap();
        assert_eq!(r.gen_vector()[1].index(), 3);
        assert_eq!(r.n_points(), 4);
    }

    #[test]
    fn reducible_modulus_is_rejected_with_line() {
        let e = parse_gen_vector("2 2 1 1\nP 0 0 1\n1\n", origin()).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
    }

    #[test]
    fn high_degree_generator_is_rejected() {
        let e = parse_gen_vector("2 2 1 2\nP 1 1 1\n1\n0 0 1\n", origin()).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 4, .. }), "{e}");
    }

    #[test]
    fn wrong_count_and_garbage() {
        assert!(parse_gen_vector("2 2 1 2\nP 1 1 1\n1\n", origin()).is_err());
        assert!(matches!(parse_gen_vector("2 x 1 2\n", origin()), Err(Error::Parse { line: 1, .. })));
        assert!(parse_gen_vector("", origin()).is_err());
    }

    #[test]
    fn round_trip() {
        let r = parse_gen_vector("3 2 2 1\nP 1 2 1\n2 1\n0 2\n", origin());
        // x^2 + 2x + 1 = (x+1)^2 is reducible over GF(3)
        assert!(r.is_err());
        let r = parse_gen_vector("3 2 2 1\nP 2 2 1\n2 1\n0 2\n", origin()).unwrap();
        let again = parse_gen_vector(&format_gen_vector(&r), origin()).unwrap();
        assert_eq!(r, again);
    }
}

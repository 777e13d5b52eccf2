//! Polynomials over GF(b) for prime b.

use std::fmt;

use crate::error::{Error, Result};

/// Polynomial over GF(b), coefficients lowest degree first, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GFPoly {
    base: u32,
    coeffs: Vec<u32>,
}

pub fn is_prime(b: u32) -> bool {
    b >= 2 && (2..).take_while(|d| d * d <= b).all(|d| b % d != 0)
}

fn check_base(base: u32) -> Result<()> {
    if is_prime(base) {
        Ok(())
    } else {
        Err(Error::invalid("b", format!("base {base} is not prime")))
    }
}

impl GFPoly {
    pub fn new(base: u32, coeffs: Vec<u32>) -> Result<Self> {
        check_base(base)?;
        if let Some(c) = coeffs.iter().find(|c| **c >= base) {
            return Err(Error::invalid("coefficients", format!("coefficient {c} is not below the base {base}")));
        }
        Ok(Self::trimmed(base, coeffs))
    }

    fn trimmed(base: u32, mut coeffs: Vec<u32>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Self { base, coeffs }
    }

    pub fn zero(base: u32) -> Self {
        Self { base, coeffs: Vec::new() }
    }

    pub fn one(base: u32) -> Self {
        Self { base, coeffs: vec![1] }
    }

    /// x
    pub fn x(base: u32) -> Self {
        Self { base, coeffs: vec![0, 1] }
    }

    /// Polynomial whose coefficients are the base-b digits of `index`
    /// (least significant digit is the constant term).
    pub fn from_index(base: u32, mut index: u64) -> Self {
        let mut coeffs = Vec::new();
        while index > 0 {
            coeffs.push((index % base as u64) as u32);
            index /= base as u64;
        }
        Self { base, coeffs }
    }

    /// Inverse of [`from_index`](Self::from_index).
    pub fn index(&self) -> u64 {
        self.coeffs.iter().rev().fold(0u64, |acc, c| acc * self.base as u64 + *c as u64)
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> u32 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    fn inv(&self, a: u32) -> u32 {
        // a^{b-2} mod b
        let b = self.base as u64;
        let (mut r, mut p, mut e) = (1u64, a as u64 % b, b - 2);
        while e > 0 {
            if e & 1 == 1 {
                r = r * p % b;
            }
            p = p * p % b;
            e >>= 1;
        }
        r as u32
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n).map(|i| (self.coeff(i) + other.coeff(i)) % self.base).collect();
        Self::trimmed(self.base, c)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n).map(|i| (self.coeff(i) + self.base - other.coeff(i)) % self.base).collect();
        Self::trimmed(self.base, c)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.base);
        }
        let b = self.base as u64;
        let mut c = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, d) in other.coeffs.iter().enumerate() {
                c[i + j] = (c[i + j] + *a as u64 * *d as u64) % b;
            }
        }
        Self::trimmed(self.base, c.into_iter().map(|v| v as u32).collect())
    }

    /// (quotient, remainder) of division by a nonzero `d`.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by the zero polynomial");
        let lead_inv = self.inv(d.coeffs[dd]);
        let b = self.base;
        let mut r = self.coeffs.clone();
        let mut q = vec![0u32; self.coeffs.len().saturating_sub(dd)];
        while r.len() > dd {
            let top = r.len() - 1;
            let f = (*r.last().unwrap() as u64 * lead_inv as u64 % b as u64) as u32;
            if f != 0 {
                let shift = top - dd;
                q[shift] = f;
                for (i, c) in d.coeffs.iter().enumerate() {
                    let s = (f as u64 * *c as u64 % b as u64) as u32;
                    r[shift + i] = (r[shift + i] + b - s) % b;
                }
            }
            r.pop();
            while r.last() == Some(&0) && r.len() > dd {
                r.pop();
            }
        }
        (Self::trimmed(b, q), Self::trimmed(b, r))
    }

    pub fn rem(&self, d: &Self) -> Self {
        self.div_rem(d).1
    }

    pub fn mul_mod(&self, other: &Self, modulus: &Self) -> Self {
        self.mul(other).rem(modulus)
    }

    pub fn pow_mod(&self, mut e: u64, modulus: &Self) -> Self {
        let mut r = Self::one(self.base).rem(modulus);
        let mut p = self.rem(modulus);
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul_mod(&p, modulus);
            }
            p = p.mul_mod(&p, modulus);
            e >>= 1;
        }
        r
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a
    }

    /// Rabin's test: P of degree m is irreducible iff x^{b^m} ≡ x (mod P) and
    /// gcd(x^{b^{m/r}} − x, P) = 1 for every prime r dividing m.
    pub fn is_irreducible(&self) -> bool {
        let m = match self.degree() {
            None | Some(0) => return false,
            Some(m) => m,
        };
        if m == 1 {
            return true;
        }
        let x = Self::x(self.base);
        // x^{b^k} mod P by repeated b-th powers
        let frob = |k: usize| (0..k).fold(x.rem(self), |acc, _| acc.pow_mod(self.base as u64, self));
        if frob(m).sub(&x).rem(self).degree().is_some() {
            return false;
        }
        prime_factors(m as u64).into_iter().all(|r| {
            let h = frob(m / r as usize).sub(&x);
            h.gcd(self).degree() == Some(0)
        })
    }
}

impl fmt::Display for GFPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| **c != 0)
            .map(|(i, c)| match (i, *c) {
                (0, c) => c.to_string(),
                (1, 1) => "x".into(),
                (1, c) => format!("{c}x"),
                (i, 1) => format!("x^{i}"),
                (i, c) => format!("{c}x^{i}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Smallest (by index) monic irreducible polynomial of degree m over GF(b).
pub fn smallest_irreducible(base: u32, m: usize) -> Result<GFPoly> {
    check_base(base)?;
    if m == 0 {
        return Err(Error::invalid("m", "must be at least 1"));
    }
    let lead = (base as u64).checked_pow(m as u32).ok_or_else(|| Error::invalid("m", "b^m overflows"))?;
    (0..lead)
        .map(|low| GFPoly::from_index(base, lead + low))
        .find(|p| p.is_irreducible())
        .ok_or_else(|| Error::ReducibleModulus { base })
}

/// Table of moduli for b = 2 and m = 1..=20, built once on first use.
pub fn binary_modulus_table() -> &'static [GFPoly] {
    static TABLE: std::sync::OnceLock<Vec<GFPoly>> = std::sync::OnceLock::new();
    TABLE.get_or_init(|| (1..=20).map(|m| smallest_irreducible(2, m).expect("irreducible exists")).collect())
}

/// Default modulus for (b, m): the table entry for b = 2, m ≤ 20, otherwise a search.
pub fn default_modulus(base: u32, m: usize) -> Result<GFPoly> {
    if base == 2 && (1..=20).contains(&m) {
        Ok(binary_modulus_table()[m - 1].clone())
    } else {
        smallest_irreducible(base, m)
    }
}

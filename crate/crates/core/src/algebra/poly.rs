//! Dense univariate polynomials over a prime field.
//!
//! Coefficients are stored in increasing degree order and kept normalized:
//! the highest stored coefficient is non-zero and the zero polynomial is the
//! empty vector, so `deg` returns `None` for zero (the -infinity sentinel).

use crate::error::{Error, Result};

use super::field::{Fe, FieldConfig};
use super::ntt;

/// Products where the shorter operand has at most this many coefficients go
/// through schoolbook convolution; transform overhead dominates below it.
const SCHOOLBOOK_CUTOFF: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    coeffs: Vec<Fe>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { coeffs: Vec::new() }
    }

    pub fn from_coeffs(coeffs: Vec<Fe>) -> Poly {
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    pub fn constant(c: Fe) -> Poly {
        Poly::from_coeffs(vec![c])
    }

    /// `c * X^k`.
    pub fn monomial(c: Fe, k: usize) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![Fe::ZERO; k + 1];
        coeffs[k] = c;
        Poly { coeffs }
    }

    pub fn one(f: &FieldConfig) -> Poly {
        Poly::constant(f.one())
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    #[inline]
    pub fn deg(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of `X^k` (zero beyond the stored length).
    #[inline]
    pub fn coeff(&self, k: usize) -> Fe {
        self.coeffs.get(k).copied().unwrap_or(Fe::ZERO)
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.coeffs
    }

    /// Least exponent with a non-zero coefficient; `None` for zero.
    pub fn min_nonzero_degree(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn add(&self, f: &FieldConfig, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(f.add(self.coeff(k), other.coeff(k)));
        }
        Poly::from_coeffs(out)
    }

    pub fn sub(&self, f: &FieldConfig, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(f.sub(self.coeff(k), other.coeff(k)));
        }
        Poly::from_coeffs(out)
    }

    pub fn neg(&self, f: &FieldConfig) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|&c| f.neg(c)).collect(),
        }
    }

    pub fn scale(&self, f: &FieldConfig, c: Fe) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly::from_coeffs(self.coeffs.iter().map(|&a| f.mul(a, c)).collect())
    }

    /// Multiply by `X^k`.
    pub fn shift_up(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![Fe::ZERO; k + self.coeffs.len()];
        coeffs[k..].copy_from_slice(&self.coeffs);
        Poly { coeffs }
    }

    pub fn mul(&self, f: &FieldConfig, other: &Poly) -> Result<Poly> {
        if self.is_zero() || other.is_zero() {
            return Ok(Poly::zero());
        }
        let (short, long) = if self.coeffs.len() <= other.coeffs.len() {
            (self, other)
        } else {
            (other, self)
        };
        let out_len = short.coeffs.len() + long.coeffs.len() - 1;
        // Near-monomial operands (graph encodings are all monomials) and
        // short ones convolve directly.
        if short.coeffs.len() <= SCHOOLBOOK_CUTOFF {
            let mut out = vec![Fe::ZERO; out_len];
            for (i, &a) in short.coeffs.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (j, &b) in long.coeffs.iter().enumerate() {
                    out[i + j] = f.add(out[i + j], f.mul(a, b));
                }
            }
            return Ok(Poly::from_coeffs(out));
        }
        let out = ntt::ntt_mul(f, &short.coeffs, &long.coeffs, out_len)?;
        Ok(Poly::from_coeffs(out))
    }

    /// Exact quotient `self / divisor`. A non-zero remainder means an
    /// algebraic invariant was broken upstream and is reported as an error.
    pub fn exact_div(&self, f: &FieldConfig, divisor: &Poly) -> Result<Poly> {
        if divisor.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(Poly::zero());
        }
        let da = self.deg().unwrap();
        let db = divisor.deg().unwrap();
        if da < db {
            return Err(Error::NotDivisible);
        }
        let lead_inv = f.inv(*divisor.coeffs.last().unwrap())?;
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Fe::ZERO; da - db + 1];
        for k in (0..quot.len()).rev() {
            let c = f.mul(rem[k + db], lead_inv);
            quot[k] = c;
            if c.is_zero() {
                continue;
            }
            for (off, &d) in divisor.coeffs.iter().enumerate() {
                rem[k + off] = f.sub(rem[k + off], f.mul(c, d));
            }
        }
        if rem.iter().any(|c| !c.is_zero()) {
            return Err(Error::NotDivisible);
        }
        Ok(Poly::from_coeffs(quot))
    }

    /// Horner evaluation.
    pub fn eval(&self, f: &FieldConfig, x: Fe) -> Fe {
        let mut acc = Fe::ZERO;
        for &c in self.coeffs.iter().rev() {
            acc = f.add(f.mul(acc, x), c);
        }
        acc
    }

    pub fn eval_many(&self, f: &FieldConfig, points: &[Fe]) -> Vec<Fe> {
        points.iter().map(|&x| self.eval(f, x)).collect()
    }

    /// `self^e` by square-and-multiply. Test support for identity checks.
    pub fn pow(&self, f: &FieldConfig, mut e: u64) -> Result<Poly> {
        let mut base = self.clone();
        let mut acc = Poly::one(f);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(f, &base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(f, &base)?;
            }
        }
        Ok(acc)
    }
}

/// Unique interpolating polynomial of degree < points.len() through the given
/// (x, y) pairs, by Newton divided differences. Abscissas must be distinct.
pub fn interpolate(f: &FieldConfig, points: &[(Fe, Fe)]) -> Result<Poly> {
    let n = points.len();
    if n == 0 {
        return Ok(Poly::zero());
    }
    for i in 0..n {
        for j in i + 1..n {
            if points[i].0 == points[j].0 {
                return Err(Error::DuplicatePoint);
            }
        }
    }
    // Divided-difference table, in place.
    let xs: Vec<Fe> = points.iter().map(|p| p.0).collect();
    let mut coef: Vec<Fe> = points.iter().map(|p| p.1).collect();
    for level in 1..n {
        for i in (level..n).rev() {
            let num = f.sub(coef[i], coef[i - 1]);
            let den = f.sub(xs[i], xs[i - level]);
            coef[i] = f.mul(num, f.inv(den)?);
        }
    }
    // Assemble sum coef[i] * prod_{j<i} (X - x_j) without re-multiplying the
    // basis from scratch each round.
    let mut result = vec![Fe::ZERO; n];
    let mut basis = vec![Fe::ZERO; n];
    basis[0] = f.one();
    let mut basis_len = 1;
    for (i, &c) in coef.iter().enumerate() {
        if i > 0 {
            // basis *= (X - x_{i-1})
            let neg_x = f.neg(xs[i - 1]);
            basis_len += 1;
            for k in (0..basis_len).rev() {
                let keep = if k > 0 { basis[k - 1] } else { Fe::ZERO };
                basis[k] = f.add(f.mul(basis[k], neg_x), keep);
            }
        }
        if !c.is_zero() {
            for k in 0..basis_len {
                result[k] = f.add(result[k], f.mul(basis[k], c));
            }
        }
    }
    Ok(Poly::from_coeffs(result))
}

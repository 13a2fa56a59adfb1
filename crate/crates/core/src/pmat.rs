//! Polynomial-matrix algebra.
//!
//! [`PolyMatrix`] is a dense grid of polynomials. Determinants go through
//! evaluation-interpolation: evaluate the matrix at enough distinct points,
//! take scalar determinants, interpolate the result. The adjoint works the
//! same way entry-wise, using the pointwise identity `adj(B)(x) = adj(B(x))`,
//! which holds at every point including roots of `det`. That explicit
//! adjoint is the reference the fast oracle is tested against, and also the
//! warm-up preprocessing mode of the update engine.

use crate::algebra::{interpolate, Fe, FieldConfig, Poly};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalarMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Fe>,
}

impl ScalarMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ScalarMatrix {
            rows,
            cols,
            entries: vec![Fe::ZERO; rows * cols],
        }
    }

    pub fn identity(f: &FieldConfig, n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, f.one());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Fe {
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Fe) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn mul(&self, f: &FieldConfig, other: &ScalarMatrix) -> Result<ScalarMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = ScalarMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = f.add(out.get(i, j), f.mul(a, other.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    fn square_check(&self) -> Result<usize> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "square matrix required, got {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(self.rows)
    }

    /// Determinant by Gaussian elimination with pivoting. det of the empty
    /// matrix is 1.
    pub fn det(&self, f: &FieldConfig) -> Result<Fe> {
        let n = self.square_check()?;
        let mut m = self.clone();
        let mut det = f.one();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m.get(r, col).is_zero());
            let Some(pivot) = pivot else {
                return Ok(Fe::ZERO);
            };
            if pivot != col {
                for j in 0..n {
                    let a = m.get(col, j);
                    let b = m.get(pivot, j);
                    m.set(col, j, b);
                    m.set(pivot, j, a);
                }
                det = f.neg(det);
            }
            let p = m.get(col, col);
            det = f.mul(det, p);
            let p_inv = f.inv(p)?;
            for r in col + 1..n {
                let factor = f.mul(m.get(r, col), p_inv);
                if factor.is_zero() {
                    continue;
                }
                for j in col..n {
                    let v = f.sub(m.get(r, j), f.mul(factor, m.get(col, j)));
                    m.set(r, j, v);
                }
            }
        }
        Ok(det)
    }

    /// Inverse by Gauss-Jordan; `None` when singular.
    pub fn inverse(&self, f: &FieldConfig) -> Result<Option<ScalarMatrix>> {
        let n = self.square_check()?;
        let mut m = self.clone();
        let mut inv = ScalarMatrix::identity(f, n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m.get(r, col).is_zero());
            let Some(pivot) = pivot else {
                return Ok(None);
            };
            if pivot != col {
                for j in 0..n {
                    let (a, b) = (m.get(col, j), m.get(pivot, j));
                    m.set(col, j, b);
                    m.set(pivot, j, a);
                    let (a, b) = (inv.get(col, j), inv.get(pivot, j));
                    inv.set(col, j, b);
                    inv.set(pivot, j, a);
                }
            }
            let p_inv = f.inv(m.get(col, col))?;
            for j in 0..n {
                m.set(col, j, f.mul(m.get(col, j), p_inv));
                inv.set(col, j, f.mul(inv.get(col, j), p_inv));
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = m.get(r, col);
                if factor.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let v = f.sub(m.get(r, j), f.mul(factor, m.get(col, j)));
                    m.set(r, j, v);
                    let v = f.sub(inv.get(r, j), f.mul(factor, inv.get(col, j)));
                    inv.set(r, j, v);
                }
            }
        }
        Ok(Some(inv))
    }

    /// Adjugate. `det * inverse` when non-singular; cofactor-by-minors when
    /// singular, so the result is exact in every case.
    pub fn adjoint(&self, f: &FieldConfig) -> Result<ScalarMatrix> {
        let n = self.square_check()?;
        if n == 0 {
            return Ok(ScalarMatrix::zeros(0, 0));
        }
        if n == 1 {
            let mut out = ScalarMatrix::zeros(1, 1);
            out.set(0, 0, f.one());
            return Ok(out);
        }
        let det = self.det(f)?;
        if !det.is_zero() {
            let inv = self.inverse(f)?.expect("non-zero det");
            let mut out = ScalarMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    out.set(i, j, f.mul(det, inv.get(i, j)));
                }
            }
            return Ok(out);
        }
        // adj(M)_{i,j} = (-1)^{i+j} det(M without row j, column i)
        let mut out = ScalarMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut minor = ScalarMatrix::zeros(n - 1, n - 1);
                let mut rr = 0;
                for r in 0..n {
                    if r == j {
                        continue;
                    }
                    let mut cc = 0;
                    for c in 0..n {
                        if c == i {
                            continue;
                        }
                        minor.set(rr, cc, self.get(r, c));
                        cc += 1;
                    }
                    rr += 1;
                }
                let d = minor.det(f)?;
                out.set(i, j, if (i + j) % 2 == 0 { d } else { f.neg(d) });
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Poly>,
}

impl PolyMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        PolyMatrix {
            rows,
            cols,
            entries: vec![Poly::zero(); rows * cols],
        }
    }

    pub fn identity(f: &FieldConfig, n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            *m.get_mut(i, i) = Poly::one(f);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut gen: impl FnMut(usize, usize) -> Poly) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                *m.get_mut(i, j) = gen(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut Poly {
        &mut self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Poly] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|p| p.is_zero())
    }

    /// Largest entry degree, `None` when the whole matrix is zero.
    pub fn deg(&self) -> Option<usize> {
        self.entries.iter().filter_map(|p| p.deg()).max()
    }

    /// Per-column maximum degree; `None` marks a zero column.
    pub fn col_degrees(&self) -> Vec<Option<usize>> {
        (0..self.cols)
            .map(|j| (0..self.rows).filter_map(|i| self.get(i, j).deg()).max())
            .collect()
    }

    pub fn submatrix(
        &self,
        row_range: std::ops::Range<usize>,
        col_range: std::ops::Range<usize>,
    ) -> PolyMatrix {
        let mut out = PolyMatrix::zeros(row_range.len(), col_range.len());
        for (oi, i) in row_range.enumerate() {
            for (oj, j) in col_range.clone().enumerate() {
                *out.get_mut(oi, oj) = self.get(i, j).clone();
            }
        }
        out
    }

    /// Paste `other` side by side on the right.
    pub fn hconcat(&self, other: &PolyMatrix) -> Result<PolyMatrix> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "hconcat {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = PolyMatrix::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *out.get_mut(i, j) = self.get(i, j).clone();
            }
            for j in 0..other.cols {
                *out.get_mut(i, self.cols + j) = other.get(i, j).clone();
            }
        }
        Ok(out)
    }

    pub fn add(&self, f: &FieldConfig, other: &PolyMatrix) -> Result<PolyMatrix> {
        self.zip_with(other, |a, b| Ok(a.add(f, b)))
    }

    pub fn sub(&self, f: &FieldConfig, other: &PolyMatrix) -> Result<PolyMatrix> {
        self.zip_with(other, |a, b| Ok(a.sub(f, b)))
    }

    fn zip_with(
        &self,
        other: &PolyMatrix,
        mut op: impl FnMut(&Poly, &Poly) -> Result<Poly>,
    ) -> Result<PolyMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = PolyMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *out.get_mut(i, j) = op(self.get(i, j), other.get(i, j))?;
            }
        }
        Ok(out)
    }

    /// Entry-wise product with a single polynomial.
    pub fn mul_poly(&self, f: &FieldConfig, p: &Poly) -> Result<PolyMatrix> {
        let mut out = PolyMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *out.get_mut(i, j) = self.get(i, j).mul(f, p)?;
            }
        }
        Ok(out)
    }

    pub fn mul(&self, f: &FieldConfig, other: &PolyMatrix) -> Result<PolyMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = PolyMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let prod = a.mul(f, b)?;
                    let cur = out.get(i, j).add(f, &prod);
                    *out.get_mut(i, j) = cur;
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix: `v` has one entry per row of `self`.
    pub fn vec_mul(&self, f: &FieldConfig, v: &[Poly]) -> Result<Vec<Poly>> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "vector of {} vs {} rows",
                v.len(),
                self.rows
            )));
        }
        let mut out = vec![Poly::zero(); self.cols];
        for (k, vk) in v.iter().enumerate() {
            if vk.is_zero() {
                continue;
            }
            for j in 0..self.cols {
                let b = self.get(k, j);
                if b.is_zero() {
                    continue;
                }
                let prod = vk.mul(f, b)?;
                out[j] = out[j].add(f, &prod);
            }
        }
        Ok(out)
    }

    /// Entry-wise evaluation at a point.
    pub fn eval(&self, f: &FieldConfig, x: Fe) -> ScalarMatrix {
        let mut out = ScalarMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).eval(f, x));
            }
        }
        out
    }

    fn square_check(&self) -> Result<usize> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "square matrix required, got {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(self.rows)
    }

    fn eval_points(f: &FieldConfig, count: u128) -> Result<Vec<Fe>> {
        if count > f.modulus() as u128 {
            return Err(Error::EvalCapacity {
                p: f.modulus(),
                needed: count,
            });
        }
        Ok((0..count as u64).map(|x| f.from_u64(x)).collect())
    }

    /// Determinant as a polynomial, by evaluation at `sum(col_degrees) + 1`
    /// consecutive points and interpolation.
    pub fn det(&self, f: &FieldConfig) -> Result<Poly> {
        let n = self.square_check()?;
        if n == 0 {
            return Ok(Poly::one(f));
        }
        let bound: u128 = self
            .col_degrees()
            .iter()
            .map(|d| d.unwrap_or(0) as u128)
            .sum();
        let points = Self::eval_points(f, bound + 1)?;
        let values: Vec<(Fe, Fe)> = points
            .iter()
            .map(|&x| Ok((x, self.eval(f, x).det(f)?)))
            .collect::<Result<_>>()?;
        interpolate(f, &values)
    }

    /// Full adjugate via entry-wise evaluation-interpolation at
    /// `deg(B)*(n-1) + 1` points. Valid for singular matrices too.
    pub fn adjoint(&self, f: &FieldConfig) -> Result<PolyMatrix> {
        let n = self.square_check()?;
        if n == 0 {
            return Ok(PolyMatrix::zeros(0, 0));
        }
        let d = self.deg().unwrap_or(0) as u128;
        let count = d * (n as u128 - 1) + 1;
        let points = Self::eval_points(f, count)?;
        let mut per_entry: Vec<Vec<(Fe, Fe)>> = vec![Vec::with_capacity(points.len()); n * n];
        for &x in &points {
            let adj_x = self.eval(f, x).adjoint(f)?;
            for i in 0..n {
                for j in 0..n {
                    per_entry[i * n + j].push((x, adj_x.get(i, j)));
                }
            }
        }
        let mut out = PolyMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                *out.get_mut(i, j) = interpolate(f, &per_entry[i * n + j])?;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::select_field;
    use crate::rng::SplitMix64;

    fn field() -> FieldConfig {
        select_field(8, 4).unwrap()
    }

    fn random_scalar_matrix(f: &FieldConfig, rng: &mut SplitMix64, n: usize) -> ScalarMatrix {
        let mut m = ScalarMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, f.random_element(rng));
            }
        }
        m
    }

    fn random_poly_matrix(
        f: &FieldConfig,
        rng: &mut SplitMix64,
        n: usize,
        max_deg: usize,
    ) -> PolyMatrix {
        PolyMatrix::from_fn(n, n, |_, _| {
            let len = rng.next_below(max_deg as u64 + 2) as usize;
            Poly::from_coeffs((0..len).map(|_| f.random_element(rng)).collect())
        })
    }

    fn x_poly(f: &FieldConfig) -> Poly {
        Poly::monomial(f.one(), 1)
    }

    #[test]
    fn mul_identity() {
        let f = field();
        let mut rng = SplitMix64::new(5);
        let a = random_poly_matrix(&f, &mut rng, 4, 2);
        let id = PolyMatrix::identity(&f, 4);
        assert_eq!(a.mul(&f, &id).unwrap(), a);
    }

    #[test]
    fn mul_x_times_x() {
        let f = field();
        let mut a = PolyMatrix::zeros(1, 1);
        *a.get_mut(0, 0) = x_poly(&f);
        let sq = a.mul(&f, &a).unwrap();
        assert_eq!(*sq.get(0, 0), Poly::monomial(f.one(), 2));
    }

    #[test]
    fn mul_matches_schoolbook_sum_of_products() {
        let f = field();
        let mut rng = SplitMix64::new(17);
        for _ in 0..10 {
            let a = random_poly_matrix(&f, &mut rng, 3, 2);
            let b = random_poly_matrix(&f, &mut rng, 3, 2);
            let got = a.mul(&f, &b).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    let mut acc = Poly::zero();
                    for k in 0..3 {
                        acc = acc.add(&f, &a.get(i, k).mul(&f, b.get(k, j)).unwrap());
                    }
                    assert_eq!(*got.get(i, j), acc);
                }
            }
        }
    }

    #[test]
    fn eval_at_zero_gives_constant_terms() {
        let f = field();
        let mut rng = SplitMix64::new(23);
        let a = random_poly_matrix(&f, &mut rng, 3, 3);
        let ev = a.eval(&f, Fe::ZERO);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(ev.get(i, j), a.get(i, j).coeff(0));
            }
        }
        let id = PolyMatrix::identity(&f, 3);
        assert_eq!(id.eval(&f, f.from_u64(9)), ScalarMatrix::identity(&f, 3));
    }

    #[test]
    fn det_eval_commutes() {
        let f = field();
        let mut rng = SplitMix64::new(29);
        for _ in 0..5 {
            let a = random_poly_matrix(&f, &mut rng, 3, 2);
            let det = a.det(&f).unwrap();
            for k in 0..6 {
                let x = f.from_u64(1000 + k);
                assert_eq!(det.eval(&f, x), a.eval(&f, x).det(&f).unwrap());
            }
        }
    }

    #[test]
    fn scalar_adjoint_two_by_two() {
        let f = field();
        let mut rng = SplitMix64::new(31);
        let m = random_scalar_matrix(&f, &mut rng, 2);
        let adj = m.adjoint(&f).unwrap();
        assert_eq!(adj.get(0, 0), m.get(1, 1));
        assert_eq!(adj.get(0, 1), f.neg(m.get(0, 1)));
        assert_eq!(adj.get(1, 0), f.neg(m.get(1, 0)));
        assert_eq!(adj.get(1, 1), m.get(0, 0));
    }

    #[test]
    fn scalar_det_identity() {
        let f = field();
        assert_eq!(ScalarMatrix::identity(&f, 5).det(&f).unwrap(), f.one());
    }

    #[test]
    fn scalar_defining_identity() {
        let f = field();
        let mut rng = SplitMix64::new(37);
        for _ in 0..5 {
            let m = random_scalar_matrix(&f, &mut rng, 5);
            let det = m.det(&f).unwrap();
            let adj = m.adjoint(&f).unwrap();
            let prod = m.mul(&f, &adj).unwrap();
            let mut expect = ScalarMatrix::zeros(5, 5);
            for i in 0..5 {
                expect.set(i, i, det);
            }
            assert_eq!(prod, expect);
        }
    }

    #[test]
    fn scalar_adjoint_singular_matrix() {
        let f = field();
        // rank-1 3x3: adj must satisfy M*adj = 0 and match cofactors
        let mut m = ScalarMatrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                m.set(i, j, f.from_u64(((i + 1) * (j + 2)) as u64));
            }
        }
        assert_eq!(m.det(&f).unwrap(), Fe::ZERO);
        let adj = m.adjoint(&f).unwrap();
        let prod = m.mul(&f, &adj).unwrap();
        assert_eq!(prod, ScalarMatrix::zeros(3, 3));
    }

    #[test]
    fn det_poly_examples() {
        let f = field();
        let mut diag_x = PolyMatrix::zeros(2, 2);
        *diag_x.get_mut(0, 0) = x_poly(&f);
        *diag_x.get_mut(1, 1) = x_poly(&f);
        assert_eq!(diag_x.det(&f).unwrap(), Poly::monomial(f.one(), 2));

        let id = PolyMatrix::identity(&f, 4);
        assert_eq!(id.det(&f).unwrap(), Poly::one(&f));
    }

    #[test]
    fn det_poly_matches_cofactor_expansion() {
        let f = field();
        let mut rng = SplitMix64::new(41);
        for _ in 0..5 {
            let a = random_poly_matrix(&f, &mut rng, 3, 2);
            // symbolic cofactor oracle over F[X]
            let c = |i: usize, j: usize| a.get(i, j);
            let mul = |p: &Poly, q: &Poly| p.mul(&f, q).unwrap();
            let det2 = |r0: usize, r1: usize, c0: usize, c1: usize| {
                mul(c(r0, c0), c(r1, c1)).sub(&f, &mul(c(r0, c1), c(r1, c0)))
            };
            let expect = mul(c(0, 0), &det2(1, 2, 1, 2))
                .sub(&f, &mul(c(0, 1), &det2(1, 2, 0, 2)))
                .add(&f, &mul(c(0, 2), &det2(1, 2, 0, 1)));
            assert_eq!(a.det(&f).unwrap(), expect);
        }
    }

    #[test]
    fn adjoint_identity_and_diag() {
        let f = field();
        let id = PolyMatrix::identity(&f, 3);
        assert_eq!(id.adjoint(&f).unwrap(), id);

        let mut diag_x = PolyMatrix::zeros(2, 2);
        *diag_x.get_mut(0, 0) = x_poly(&f);
        *diag_x.get_mut(1, 1) = x_poly(&f);
        assert_eq!(diag_x.adjoint(&f).unwrap(), diag_x);
    }

    #[test]
    fn adjoint_defining_identity_random() {
        let f = field();
        let mut rng = SplitMix64::new(43);
        for n in [2usize, 4, 6] {
            for d in [0usize, 2, 3] {
                let b = random_poly_matrix(&f, &mut rng, n, d);
                let adj = b.adjoint(&f).unwrap();
                let det = b.det(&f).unwrap();
                let left = b.mul(&f, &adj).unwrap();
                let right = adj.mul(&f, &b).unwrap();
                let mut expect = PolyMatrix::zeros(n, n);
                for i in 0..n {
                    *expect.get_mut(i, i) = det.clone();
                }
                assert_eq!(left, expect);
                assert_eq!(right, expect);
            }
        }
    }

    #[test]
    fn adjoint_degree_bounds() {
        let f = field();
        let mut rng = SplitMix64::new(47);
        for _ in 0..5 {
            let n = 4;
            let d = 2;
            let b = random_poly_matrix(&f, &mut rng, n, d);
            let actual_d = b.deg().unwrap_or(0);
            let adj = b.adjoint(&f).unwrap();
            let det = b.det(&f).unwrap();
            assert!(adj.deg().unwrap_or(0) <= actual_d * (n - 1));
            assert!(det.deg().unwrap_or(0) <= actual_d * n);
        }
    }
}

//! Kernel basis decomposition adjoint oracle.
//!
//! For a non-singular polynomial matrix `B`, preprocessing builds a chain of
//! block-diagonal matrices `A_1, ..., A_L` (L = ceil(log2 n)) such that
//! `B * A_1 * ... * A_L = D` is diagonal. Each level halves its blocks: a
//! block `C` is split into top rows `T` and bottom rows `Bo`, and the level
//! factor for that block is `[N_l | N_r]` where `N_l` is a kernel basis of
//! `Bo` (zeroing the bottom-left product block) and `N_r` is a kernel basis
//! of `T` (zeroing the top-right block). The new diagonal blocks are `T*N_l`
//! and `Bo*N_r`.
//!
//! Since `adj(B) = (prod_i A_i) * det(B) * D^{-1}`, a row query sweeps a
//! vector through the chain left to right, and an element query (i, j) only
//! ever needs, at each level, the one diagonal block whose column range
//! contains `j` — all other blocks are multiplied by zero rows. Element
//! queries get cheaper when a prefix `M_k = prod_{i<=k} A_i` is stored
//! explicitly: the query starts from a row of `M_k` restricted to the
//! level-(k+1) block of `j` and walks only the remaining levels. The
//! trade-off parameter `mu` in [0, 1] picks `k = ceil(log2(n^mu))`, trading
//! preprocessing work and memory for per-query work.
//!
//! Kernel bases are computed by linearization: fix a shifted-degree budget,
//! expand `Bpart * v = 0` into a scalar linear system over the coefficient
//! grid, and read kernel vectors out of its nullspace in increasing shifted
//! degree, keeping those that grow the rank over F(X). The budget starts at
//! the average shifted column degree and doubles until the kernel is
//! captured; the sum of shifted column degrees of every returned basis is
//! checked against the sum of the input shifts.

use crate::algebra::{Fe, FieldConfig, Poly};
use crate::error::{Error, Result};
use crate::pmat::PolyMatrix;
use crate::rng::SplitMix64;

/// Shifted column degrees: `cdeg_s(M)_j = max_i s_i + deg(M_{i,j})`, with
/// `None` for an all-zero column.
pub fn cdeg_shifted(m: &PolyMatrix, shift: &[usize]) -> Result<Vec<Option<usize>>> {
    if shift.len() != m.rows() {
        return Err(Error::DimensionMismatch(format!(
            "shift of {} entries against {} rows",
            shift.len(),
            m.rows()
        )));
    }
    Ok((0..m.cols())
        .map(|j| {
            (0..m.rows())
                .filter_map(|i| m.get(i, j).deg().map(|d| shift[i] + d))
                .max()
        })
        .collect())
}

fn cdeg_sum(cdegs: &[Option<usize>]) -> usize {
    cdegs.iter().map(|d| d.unwrap_or(0)).sum()
}

/// Minimal kernel basis of `bpart` (p x m, full row rank) under the given
/// column-degree shift: returns `N` (m x (m-p)) with `bpart * N = 0`, columns
/// independent over F(X), and `sum_j cdeg_s(N)_j <= sum_j s_j`.
pub fn minimal_kernel_basis(
    f: &FieldConfig,
    bpart: &PolyMatrix,
    shift: &[usize],
) -> Result<PolyMatrix> {
    let p = bpart.rows();
    let m = bpart.cols();
    if shift.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "shift of {} entries against {} columns",
            shift.len(),
            m
        )));
    }
    for (j, d) in bpart.col_degrees().iter().enumerate() {
        if d.unwrap_or(0) > shift[j] {
            return Err(Error::InvalidInput(format!(
                "shift {} does not bound column {} of degree {:?}",
                shift[j], j, d
            )));
        }
    }
    if p > m {
        return Err(Error::RankDegeneracy {
            expected: 0,
            found: p - m,
        });
    }
    let kdim = m - p;
    if kdim == 0 {
        return Ok(PolyMatrix::zeros(m, 0));
    }
    if p == 0 {
        return Ok(PolyMatrix::identity(f, m));
    }

    let sum_shift: usize = shift.iter().sum();
    let mut budget = sum_shift.div_ceil(m);
    let mut last_found = 0;
    loop {
        if let Some(basis) = kernel_at_budget(f, bpart, shift, budget, kdim, &mut last_found)? {
            let cdegs = cdeg_shifted(&basis, shift)?;
            if cdeg_sum(&cdegs) <= sum_shift {
                #[cfg(debug_assertions)]
                if m <= 8 {
                    debug_assert!(bpart.mul(f, &basis)?.is_zero());
                }
                return Ok(basis);
            }
        }
        if budget >= sum_shift {
            return Err(Error::RankDegeneracy {
                expected: kdim,
                found: last_found,
            });
        }
        budget = (budget.max(1) * 2).min(sum_shift);
    }
}

/// One linearization round: all kernel vectors of shifted column degree at
/// most `budget`, graded so that low-degree vectors come out first, greedily
/// filtered to F(X)-independent ones.
fn kernel_at_budget(
    f: &FieldConfig,
    bpart: &PolyMatrix,
    shift: &[usize],
    budget: usize,
    kdim: usize,
    last_found: &mut usize,
) -> Result<Option<PolyMatrix>> {
    let p = bpart.rows();
    let m = bpart.cols();

    // Unknown x_{i,e} = coefficient of X^e in v_i, admitted when
    // shift_i + e <= budget, ordered by that shifted degree.
    let mut unknowns: Vec<(usize, usize)> = Vec::new();
    for i in 0..m {
        for e in 0..=budget.saturating_sub(shift[i]) {
            if shift[i] + e <= budget {
                unknowns.push((i, e));
            }
        }
    }
    if unknowns.is_empty() {
        return Ok(None);
    }
    unknowns.sort_by_key(|&(i, e)| (shift[i] + e, i, e));
    let cols = unknowns.len();

    // Equations: coefficient c in 0..=budget of row r of bpart * v.
    // deg((bpart * v)_r) <= budget because shift bounds the column degrees.
    let rows = p * (budget + 1);
    let mut mat = vec![Fe::ZERO; rows * cols];
    for (u, &(i, e)) in unknowns.iter().enumerate() {
        for r in 0..p {
            let entry = bpart.get(r, i);
            if entry.is_zero() {
                continue;
            }
            for (k, &coef) in entry.coeffs().iter().enumerate() {
                if coef.is_zero() {
                    continue;
                }
                let c = e + k;
                debug_assert!(c <= budget);
                mat[(r * (budget + 1) + c) * cols + u] = coef;
            }
        }
    }

    // Row echelon form, columns processed in grading order.
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, col)
    let mut free_cols: Vec<usize> = Vec::new();
    let mut next_row = 0;
    for col in 0..cols {
        if next_row == rows {
            free_cols.push(col);
            continue;
        }
        let mut pivot_row = None;
        for r in next_row..rows {
            if !mat[r * cols + col].is_zero() {
                pivot_row = Some(r);
                break;
            }
        }
        let Some(pr) = pivot_row else {
            free_cols.push(col);
            continue;
        };
        if pr != next_row {
            for c in col..cols {
                mat.swap(pr * cols + c, next_row * cols + c);
            }
        }
        let inv = f.inv(mat[next_row * cols + col])?;
        for r in next_row + 1..rows {
            let factor = f.mul(mat[r * cols + col], inv);
            if factor.is_zero() {
                continue;
            }
            let (pivot_slice, rest) = mat.split_at_mut((next_row + 1) * cols);
            let prow = &pivot_slice[next_row * cols..next_row * cols + cols];
            let rrow = &mut rest[(r - next_row - 1) * cols..(r - next_row - 1) * cols + cols];
            for c in col..cols {
                if !prow[c].is_zero() {
                    rrow[c] = f.sub(rrow[c], f.mul(factor, prow[c]));
                }
            }
        }
        pivots.push((next_row, col));
        next_row += 1;
    }

    // Greedy selection: walk free columns in grading order; back-substitute a
    // kernel vector for each and keep it when it is independent over F(X) of
    // the ones already kept, judged by rank at a deterministic random point.
    let mut probe_rng = SplitMix64::new(0x6b62_645f_7261_6e6b);
    let theta = f.random_element(&mut probe_rng);
    let mut eval_rows: Vec<Vec<Fe>> = Vec::new(); // echelonized evaluations
    let mut eval_pivots: Vec<usize> = Vec::new();
    let mut selected: Vec<Vec<Poly>> = Vec::new();

    for &c in &free_cols {
        if selected.len() == kdim {
            break;
        }
        // Back-substitution: support of the vector is {c} plus pivots < c.
        let mut support: Vec<(usize, Fe)> = vec![(c, f.one())];
        for &(pr, pc) in pivots.iter().rev() {
            if pc > c {
                continue;
            }
            let mut acc = Fe::ZERO;
            for &(q, xq) in &support {
                if q > pc {
                    let a = mat[pr * cols + q];
                    if !a.is_zero() && !xq.is_zero() {
                        acc = f.add(acc, f.mul(a, xq));
                    }
                }
            }
            if !acc.is_zero() {
                let val = f.neg(f.mul(acc, f.inv(mat[pr * cols + pc])?));
                support.push((pc, val));
            }
        }
        // Assemble the polynomial vector.
        let mut vec_poly = vec![Poly::zero(); m];
        let mut coeff_grid: Vec<Vec<Fe>> = vec![Vec::new(); m];
        for &(u, xu) in &support {
            let (i, e) = unknowns[u];
            if coeff_grid[i].len() <= e {
                coeff_grid[i].resize(e + 1, Fe::ZERO);
            }
            coeff_grid[i][e] = xu;
        }
        for (i, coeffs) in coeff_grid.into_iter().enumerate() {
            vec_poly[i] = Poly::from_coeffs(coeffs);
        }
        // Rank probe at theta.
        let mut ev: Vec<Fe> = vec_poly.iter().map(|p| p.eval(f, theta)).collect();
        for (row, &pc) in eval_rows.iter().zip(eval_pivots.iter()) {
            if !ev[pc].is_zero() {
                let factor = ev[pc];
                for (x, &r) in ev.iter_mut().zip(row.iter()) {
                    *x = f.sub(*x, f.mul(factor, r));
                }
            }
        }
        if let Some(pc) = ev.iter().position(|x| !x.is_zero()) {
            let inv = f.inv(ev[pc])?;
            for x in ev.iter_mut() {
                *x = f.mul(*x, inv);
            }
            eval_rows.push(ev);
            eval_pivots.push(pc);
            selected.push(vec_poly);
        }
    }

    *last_found = (*last_found).max(selected.len());
    if selected.len() < kdim {
        return Ok(None);
    }
    let mut basis = PolyMatrix::zeros(m, kdim);
    for (j, col) in selected.into_iter().enumerate() {
        for (i, poly) in col.into_iter().enumerate() {
            *basis.get_mut(i, j) = poly;
        }
    }
    Ok(Some(basis))
}

/// One diagonal block of a chain level: the factor `[N_l | N_r]` occupying
/// rows and columns `start..end`, with `split` columns in the left kernel
/// basis, plus the shift under which the kernels were computed.
#[derive(Debug, Clone)]
pub struct LevelBlock {
    pub start: usize,
    pub split: usize,
    pub end: usize,
    pub mat: PolyMatrix,
    pub shift_in: Vec<usize>,
}

/// One level `A_i` of the chain, stored block by block. Blocks tile `0..n`.
#[derive(Debug, Clone)]
pub struct BlockDiagonalLevel {
    pub index: usize,
    pub blocks: Vec<LevelBlock>,
}

impl BlockDiagonalLevel {
    fn block_containing(&self, col: usize) -> &LevelBlock {
        let idx = self
            .blocks
            .partition_point(|b| b.end <= col)
            .min(self.blocks.len() - 1);
        &self.blocks[idx]
    }

    /// Materialize the full n x n level matrix.
    pub fn to_matrix(&self, n: usize) -> PolyMatrix {
        let mut out = PolyMatrix::zeros(n, n);
        for blk in &self.blocks {
            for i in 0..blk.mat.rows() {
                for j in 0..blk.mat.cols() {
                    *out.get_mut(blk.start + i, blk.start + j) = blk.mat.get(i, j).clone();
                }
            }
        }
        out
    }
}

struct ActiveBlock {
    start: usize,
    end: usize,
    mat: PolyMatrix,
    shift: Vec<usize>,
}

/// The preprocessed oracle: chain levels, the diagonal `D`, `det(B)`, and an
/// explicitly stored prefix product controlled by `mu`.
#[derive(Debug, Clone)]
pub struct KbdOracle {
    n: usize,
    shift: Vec<usize>,
    levels: Vec<BlockDiagonalLevel>,
    diag: Vec<Poly>,
    det_b: Poly,
    mu: f64,
    prefix_len: usize,
    prefix: PolyMatrix,
    partition: Vec<(usize, usize)>,
}

impl KbdOracle {
    /// Build the chain for a non-singular `b`, with no prefix (`mu = 0`).
    /// `shift` must bound `b`'s column degrees; pass the exact column
    /// degrees for the tightest budgets.
    pub fn build_chain(f: &FieldConfig, b: &PolyMatrix, shift: &[usize]) -> Result<KbdOracle> {
        if b.rows() != b.cols() || b.rows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "square non-empty matrix required, got {}x{}",
                b.rows(),
                b.cols()
            )));
        }
        let n = b.rows();
        if shift.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "shift of {} entries against {} columns",
                shift.len(),
                n
            )));
        }
        let det_b = b.det(f)?;
        if det_b.is_zero() {
            return Err(Error::Singular);
        }

        let mut active = vec![ActiveBlock {
            start: 0,
            end: n,
            mat: b.clone(),
            shift: shift.to_vec(),
        }];
        let mut levels: Vec<BlockDiagonalLevel> = Vec::new();
        while active.iter().any(|blk| blk.end - blk.start >= 2) {
            let mut level_blocks = Vec::new();
            let mut next_active = Vec::new();
            for blk in active {
                let m = blk.end - blk.start;
                let m_top = m.div_ceil(2);
                let top = blk.mat.submatrix(0..m_top, 0..m);
                let bottom = blk.mat.submatrix(m_top..m, 0..m);
                // N_l kills the bottom rows, N_r kills the top rows, so the
                // product block pattern is diag(T*N_l, Bo*N_r).
                let n_l = minimal_kernel_basis(f, &bottom, &blk.shift)?;
                let n_r = minimal_kernel_basis(f, &top, &blk.shift)?;
                let c_left = top.mul(f, &n_l)?;
                let c_right = bottom.mul(f, &n_r)?;
                let t_left = unwrap_cdegs(cdeg_shifted(&n_l, &blk.shift)?)?;
                let t_right = unwrap_cdegs(cdeg_shifted(&n_r, &blk.shift)?)?;
                let a_blk = n_l.hconcat(&n_r)?;
                level_blocks.push(LevelBlock {
                    start: blk.start,
                    split: m_top,
                    end: blk.end,
                    mat: a_blk,
                    shift_in: blk.shift,
                });
                next_active.push(ActiveBlock {
                    start: blk.start,
                    end: blk.start + m_top,
                    mat: c_left,
                    shift: t_left,
                });
                if m - m_top > 0 {
                    next_active.push(ActiveBlock {
                        start: blk.start + m_top,
                        end: blk.end,
                        mat: c_right,
                        shift: t_right,
                    });
                }
            }
            levels.push(BlockDiagonalLevel {
                index: levels.len() + 1,
                blocks: level_blocks,
            });
            active = next_active;
        }

        let mut diag = Vec::with_capacity(n);
        for blk in &active {
            let d = blk.mat.get(0, 0).clone();
            if d.is_zero() {
                return Err(Error::Invariant(
                    "kernel chain produced a zero diagonal entry".into(),
                ));
            }
            diag.push(d);
        }

        let mut oracle = KbdOracle {
            n,
            shift: shift.to_vec(),
            levels,
            diag,
            det_b,
            mu: 0.0,
            prefix_len: 0,
            prefix: PolyMatrix::identity(f, n),
            partition: Vec::new(),
        };
        oracle.partition = oracle.partition_at(0);
        Ok(oracle)
    }

    /// Build chain and prefix in one go.
    pub fn build(f: &FieldConfig, b: &PolyMatrix, shift: &[usize], mu: f64) -> Result<KbdOracle> {
        let mut oracle = Self::build_chain(f, b, shift)?;
        oracle.set_prefix(f, mu)?;
        Ok(oracle)
    }

    /// Same chain, different trade-off: recompute the stored prefix for `mu`.
    pub fn with_mu(&self, f: &FieldConfig, mu: f64) -> Result<KbdOracle> {
        let mut oracle = self.clone();
        oracle.set_prefix(f, mu)?;
        Ok(oracle)
    }

    /// `k = ceil(log2(n^mu))`, clamped to the number of levels.
    pub fn prefix_levels_for(n: usize, mu: f64, level_count: usize) -> usize {
        if n <= 1 {
            return 0;
        }
        let k = (mu * (n as f64).log2()).ceil() as usize;
        k.min(level_count)
    }

    fn set_prefix(&mut self, f: &FieldConfig, mu: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::InvalidInput(format!("mu = {mu} outside [0, 1]")));
        }
        let k = Self::prefix_levels_for(self.n, mu, self.levels.len());
        let mut prefix = PolyMatrix::identity(f, self.n);
        for level in &self.levels[..k] {
            prefix = mul_by_level(f, &prefix, level)?;
        }
        self.mu = mu;
        self.prefix_len = k;
        self.prefix = prefix;
        self.partition = self.partition_at(k);
        Ok(())
    }

    /// Column partition of the stored prefix: the block ranges of level k+1,
    /// or singletons past the last level.
    fn partition_at(&self, k: usize) -> Vec<(usize, usize)> {
        if k < self.levels.len() {
            self.levels[k]
                .blocks
                .iter()
                .map(|b| (b.start, b.end))
                .collect()
        } else {
            (0..self.n).map(|j| (j, j + 1)).collect()
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn prefix_level_count(&self) -> usize {
        self.prefix_len
    }

    pub fn levels(&self) -> &[BlockDiagonalLevel] {
        &self.levels
    }

    pub fn diag(&self) -> &[Poly] {
        &self.diag
    }

    pub fn det(&self) -> &Poly {
        &self.det_b
    }

    pub fn shift(&self) -> &[usize] {
        &self.shift
    }

    pub fn prefix(&self) -> &PolyMatrix {
        &self.prefix
    }

    pub fn partition(&self) -> &[(usize, usize)] {
        &self.partition
    }

    /// `adj(B)_{i,j}`: walk the masked chain from the prefix row, scale by
    /// `det(B)`, divide exactly by `D_{j,j}`.
    pub fn query_entry(&self, f: &FieldConfig, i: usize, j: usize) -> Result<Poly> {
        if i >= self.n || j >= self.n {
            return Err(Error::DimensionMismatch(format!(
                "entry ({i}, {j}) outside {0}x{0}",
                self.n
            )));
        }
        let (mut lo, mut hi) = self.partition[self
            .partition
            .partition_point(|&(_, end)| end <= j)
            .min(self.partition.len() - 1)];
        let mut u: Vec<Poly> = (lo..hi).map(|c| self.prefix.get(i, c).clone()).collect();
        for idx in self.prefix_len..self.levels.len() {
            let blk = self.levels[idx].block_containing(j);
            debug_assert!(blk.start == lo && blk.end == hi);
            u = blk.mat.vec_mul(f, &u)?;
            let (nlo, nhi) = if idx + 1 < self.levels.len() {
                let nb = self.levels[idx + 1].block_containing(j);
                (nb.start, nb.end)
            } else {
                (j, j + 1)
            };
            u = u[nlo - lo..nhi - lo].to_vec();
            lo = nlo;
            hi = nhi;
        }
        debug_assert_eq!(u.len(), 1);
        let numerator = u.remove(0).mul(f, &self.det_b)?;
        numerator
            .exact_div(f, &self.diag[j])
            .map_err(|_| Error::Invariant(format!("adjoint entry not divisible by D_{j},{j}")))
    }

    /// `v^T adj(B)` for a full row vector: sweep the whole chain, then scale
    /// and divide column-wise.
    pub fn query_row(&self, f: &FieldConfig, v: &[Poly]) -> Result<Vec<Poly>> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "row vector of {} against n = {}",
                v.len(),
                self.n
            )));
        }
        let mut w = v.to_vec();
        for level in &self.levels {
            for blk in &level.blocks {
                let seg = w[blk.start..blk.end].to_vec();
                let prod = blk.mat.vec_mul(f, &seg)?;
                w[blk.start..blk.end].clone_from_slice(&prod);
            }
        }
        for (j, entry) in w.iter_mut().enumerate() {
            let numerator = entry.mul(f, &self.det_b)?;
            *entry = numerator.exact_div(f, &self.diag[j]).map_err(|_| {
                Error::Invariant(format!("adjoint row entry not divisible by D_{j},{j}"))
            })?;
        }
        Ok(w)
    }

    /// Exact check that `b * A_1 * ... * A_L` equals `diag(D)`. The chain is
    /// exact by construction; this recomputes the product from scratch.
    pub fn verify_chain(&self, f: &FieldConfig, b: &PolyMatrix) -> Result<bool> {
        let mut prod = PolyMatrix::identity(f, self.n);
        for level in &self.levels {
            prod = mul_by_level(f, &prod, level)?;
        }
        let full = b.mul(f, &prod)?;
        for i in 0..self.n {
            for j in 0..self.n {
                let expect = if i == j {
                    self.diag[j].clone()
                } else {
                    Poly::zero()
                };
                if *full.get(i, j) != expect {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

fn unwrap_cdegs(cdegs: Vec<Option<usize>>) -> Result<Vec<usize>> {
    cdegs
        .into_iter()
        .map(|d| d.ok_or_else(|| Error::Invariant("kernel basis has a zero column".into())))
        .collect()
}

/// `m * A_level` exploiting the block-diagonal structure: only the columns
/// inside each block's range change, fed by the same column range of `m`.
fn mul_by_level(f: &FieldConfig, m: &PolyMatrix, level: &BlockDiagonalLevel) -> Result<PolyMatrix> {
    let n = m.rows();
    let mut out = PolyMatrix::zeros(n, m.cols());
    for blk in &level.blocks {
        let sub = m.submatrix(0..n, blk.start..blk.end);
        let prod = sub.mul(f, &blk.mat)?;
        for i in 0..n {
            for j in 0..prod.cols() {
                *out.get_mut(i, blk.start + j) = prod.get(i, j).clone();
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::select_field;
    use crate::rng::SplitMix64;

    fn field() -> FieldConfig {
        select_field(16, 4).unwrap()
    }

    fn xmono(f: &FieldConfig, c: i64, k: usize) -> Poly {
        Poly::monomial(f.from_i64(c), k)
    }

    fn random_nonsingular(f: &FieldConfig, rng: &mut SplitMix64, n: usize, d: usize) -> PolyMatrix {
        loop {
            let b = PolyMatrix::from_fn(n, n, |_, _| {
                Poly::from_coeffs((0..=d).map(|_| f.random_element(rng)).collect())
            });
            if !b.det(f).unwrap().is_zero() {
                return b;
            }
        }
    }

    fn shifts_of(b: &PolyMatrix) -> Vec<usize> {
        b.col_degrees().iter().map(|d| d.unwrap_or(0)).collect()
    }

    #[test]
    fn cdeg_examples() {
        let f = field();
        let mut m = PolyMatrix::zeros(1, 1);
        *m.get_mut(0, 0) = Poly::monomial(f.one(), 2);
        assert_eq!(cdeg_shifted(&m, &[0]).unwrap(), vec![Some(2)]);

        let id = PolyMatrix::identity(&f, 2);
        assert_eq!(cdeg_shifted(&id, &[1, 3]).unwrap(), vec![Some(1), Some(3)]);
    }

    #[test]
    fn cdeg_bounds_vector_products() {
        let f = field();
        let mut rng = SplitMix64::new(3);
        for _ in 0..10 {
            let m = PolyMatrix::from_fn(3, 4, |_, _| {
                Poly::from_coeffs((0..3).map(|_| f.random_element(&mut rng)).collect())
            });
            let shift = vec![2usize, 2, 2];
            let v: Vec<Poly> = (0..3)
                .map(|i| {
                    Poly::from_coeffs((0..=shift[i]).map(|_| f.random_element(&mut rng)).collect())
                })
                .collect();
            let prod = m.vec_mul(&f, &v).unwrap();
            let cd = cdeg_shifted(&m, &shift).unwrap();
            for (j, entry) in prod.iter().enumerate() {
                if let Some(d) = entry.deg() {
                    assert!(d <= cd[j].unwrap());
                }
            }
        }
    }

    #[test]
    fn kernel_of_coordinate_row() {
        let f = field();
        let mut bpart = PolyMatrix::zeros(1, 2);
        *bpart.get_mut(0, 0) = Poly::one(&f);
        let n = minimal_kernel_basis(&f, &bpart, &[0, 0]).unwrap();
        assert_eq!((n.rows(), n.cols()), (2, 1));
        assert!(n.get(0, 0).is_zero());
        assert!(!n.get(1, 0).is_zero());
    }

    #[test]
    fn kernel_of_symmetric_cancellation() {
        let f = field();
        let mut bpart = PolyMatrix::zeros(1, 2);
        *bpart.get_mut(0, 0) = xmono(&f, 1, 1);
        *bpart.get_mut(0, 1) = xmono(&f, -1, 1);
        let n = minimal_kernel_basis(&f, &bpart, &[1, 1]).unwrap();
        assert_eq!((n.rows(), n.cols()), (2, 1));
        assert!(bpart.mul(&f, &n).unwrap().is_zero());
        // constant kernel vector proportional to (1, 1)
        assert_eq!(n.get(0, 0).deg(), Some(0));
        assert_eq!(n.get(0, 0), n.get(1, 0));
    }

    #[test]
    fn kernel_random_wide_matrix() {
        let f = field();
        let mut rng = SplitMix64::new(13);
        for trial in 0..10 {
            let bpart = PolyMatrix::from_fn(2, 4, |_, _| {
                Poly::from_coeffs((0..2).map(|_| f.random_element(&mut rng)).collect())
            });
            let shift = bpart
                .col_degrees()
                .iter()
                .map(|d| d.unwrap_or(0))
                .collect::<Vec<_>>();
            let n = minimal_kernel_basis(&f, &bpart, &shift).unwrap();
            assert_eq!((n.rows(), n.cols()), (4, 2), "trial {trial}");
            assert!(bpart.mul(&f, &n).unwrap().is_zero());
            // rank 2 over F(X): evaluate at two points and check rank there
            for probe in [5u64, 1234] {
                let ev = n.eval(&f, f.from_u64(probe));
                let m01 = f.sub(
                    f.mul(ev.get(0, 0), ev.get(1, 1)),
                    f.mul(ev.get(0, 1), ev.get(1, 0)),
                );
                let m23 = f.sub(
                    f.mul(ev.get(2, 0), ev.get(3, 1)),
                    f.mul(ev.get(2, 1), ev.get(3, 0)),
                );
                let m02 = f.sub(
                    f.mul(ev.get(0, 0), ev.get(2, 1)),
                    f.mul(ev.get(0, 1), ev.get(2, 0)),
                );
                if !(m01.is_zero() && m23.is_zero() && m02.is_zero()) {
                    // some 2x2 minor is non-zero: rank 2
                    continue;
                }
                panic!("kernel basis rank deficient at probe {probe}");
            }
            // degree-sum contract
            let cd = cdeg_shifted(&n, &shift).unwrap();
            let total: usize = cd.iter().map(|d| d.unwrap()).sum();
            assert!(total <= shift.iter().sum::<usize>());
        }
    }

    #[test]
    fn chain_of_identity() {
        let f = field();
        let id = PolyMatrix::identity(&f, 2);
        let oracle = KbdOracle::build(&f, &id, &[0, 0], 0.0).unwrap();
        assert!(oracle.verify_chain(&f, &id).unwrap());
        for d in oracle.diag() {
            assert_eq!(d.deg(), Some(0));
        }
        assert_eq!(*oracle.det(), Poly::one(&f));
    }

    #[test]
    fn chain_of_diagonal_x() {
        let f = field();
        let mut b = PolyMatrix::zeros(2, 2);
        *b.get_mut(0, 0) = xmono(&f, 1, 1);
        *b.get_mut(1, 1) = xmono(&f, 1, 1);
        let oracle = KbdOracle::build(&f, &b, &[1, 1], 0.0).unwrap();
        assert!(oracle.verify_chain(&f, &b).unwrap());
        for d in oracle.diag() {
            // associate to X up to the chain's scaling
            assert_eq!(d.min_nonzero_degree(), Some(1));
            assert_eq!(d.deg(), Some(1));
        }
    }

    #[test]
    fn chain_random_4x4() {
        let f = field();
        let mut rng = SplitMix64::new(99);
        let b = random_nonsingular(&f, &mut rng, 4, 1);
        let oracle = KbdOracle::build(&f, &b, &shifts_of(&b), 0.0).unwrap();
        assert!(oracle.verify_chain(&f, &b).unwrap());
        assert_eq!(oracle.levels().len(), 2);
    }

    #[test]
    fn prefix_extremes() {
        let f = field();
        let mut rng = SplitMix64::new(7);
        let b = random_nonsingular(&f, &mut rng, 4, 1);
        let s = shifts_of(&b);
        let oracle = KbdOracle::build(&f, &b, &s, 0.0).unwrap();
        assert_eq!(oracle.prefix_level_count(), 0);
        assert_eq!(*oracle.prefix(), PolyMatrix::identity(&f, 4));

        // mu = 1: B * prefix = diag(D)
        let full = oracle.with_mu(&f, 1.0).unwrap();
        assert_eq!(full.prefix_level_count(), full.levels().len());
        let prod = b.mul(&f, full.prefix()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if i == j {
                    assert_eq!(prod.get(i, j), &full.diag()[j]);
                } else {
                    assert!(prod.get(i, j).is_zero());
                }
            }
        }

        // n = 4, mu = 0.5 -> k = 1 and prefix = A_1
        let half = oracle.with_mu(&f, 0.5).unwrap();
        assert_eq!(half.prefix_level_count(), 1);
        let a1 = half.levels()[0].to_matrix(4);
        assert_eq!(*half.prefix(), a1);
    }

    #[test]
    fn query_entry_identity() {
        let f = field();
        let id = PolyMatrix::identity(&f, 3);
        let oracle = KbdOracle::build(&f, &id, &[0, 0, 0], 0.5).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let e = oracle.query_entry(&f, i, j).unwrap();
                if i == j {
                    assert_eq!(e, Poly::one(&f));
                } else {
                    assert!(e.is_zero());
                }
            }
        }
    }

    #[test]
    fn query_entry_triangular_closed_form() {
        let f = field();
        let mut b = PolyMatrix::zeros(2, 2);
        *b.get_mut(0, 0) = Poly::one(&f);
        *b.get_mut(0, 1) = Poly::one(&f);
        *b.get_mut(1, 1) = Poly::one(&f);
        let oracle = KbdOracle::build(&f, &b, &[0, 0], 0.0).unwrap();
        let e = oracle.query_entry(&f, 0, 1).unwrap();
        assert_eq!(e, Poly::constant(f.from_i64(-1)));
    }

    #[test]
    fn query_matches_adjoint_reference() {
        let f = field();
        let mut rng = SplitMix64::new(1234);
        let b = random_nonsingular(&f, &mut rng, 8, 2);
        let adj = b.adjoint(&f).unwrap();
        let oracle = KbdOracle::build(&f, &b, &shifts_of(&b), 0.5).unwrap();
        for _ in 0..20 {
            let i = rng.next_below(8) as usize;
            let j = rng.next_below(8) as usize;
            assert_eq!(oracle.query_entry(&f, i, j).unwrap(), *adj.get(i, j));
        }
    }

    #[test]
    fn query_row_examples() {
        let f = field();
        let id = PolyMatrix::identity(&f, 3);
        let oracle = KbdOracle::build(&f, &id, &[0, 0, 0], 0.0).unwrap();
        let mut e1 = vec![Poly::zero(); 3];
        e1[1] = Poly::one(&f);
        assert_eq!(oracle.query_row(&f, &e1).unwrap(), e1);

        let zero = vec![Poly::zero(); 3];
        assert_eq!(oracle.query_row(&f, &zero).unwrap(), zero);
    }

    #[test]
    fn query_row_matches_adjoint_reference() {
        let f = field();
        let mut rng = SplitMix64::new(777);
        let b = random_nonsingular(&f, &mut rng, 6, 2);
        let adj = b.adjoint(&f).unwrap();
        let oracle = KbdOracle::build(&f, &b, &shifts_of(&b), 0.0).unwrap();
        let v: Vec<Poly> = (0..6)
            .map(|_| Poly::from_coeffs((0..3).map(|_| f.random_element(&mut rng)).collect()))
            .collect();
        let got = oracle.query_row(&f, &v).unwrap();
        let expect = adj.vec_mul(&f, &v).unwrap();
        assert_eq!(got, expect);
    }

    #[test]
    fn mu_consistency() {
        let f = field();
        let mut rng = SplitMix64::new(2024);
        let b = random_nonsingular(&f, &mut rng, 6, 1);
        let base = KbdOracle::build_chain(&f, &b, &shifts_of(&b)).unwrap();
        let mus = [0.0, 0.25, 0.5, 0.75, 1.0];
        let oracles: Vec<KbdOracle> = mus.iter().map(|&m| base.with_mu(&f, m).unwrap()).collect();
        for _ in 0..10 {
            let i = rng.next_below(6) as usize;
            let j = rng.next_below(6) as usize;
            let reference = oracles[0].query_entry(&f, i, j).unwrap();
            for o in &oracles[1..] {
                assert_eq!(o.query_entry(&f, i, j).unwrap(), reference);
            }
        }
    }

    #[test]
    fn levels_tile_contiguously() {
        let f = field();
        let mut rng = SplitMix64::new(5150);
        for n in [2usize, 3, 5, 8] {
            let b = random_nonsingular(&f, &mut rng, n, 1);
            let oracle = KbdOracle::build_chain(&f, &b, &shifts_of(&b)).unwrap();
            assert_eq!(oracle.levels().len(), (n as f64).log2().ceil() as usize);
            for level in oracle.levels() {
                let mut pos = 0;
                for blk in &level.blocks {
                    assert_eq!(blk.start, pos);
                    assert!(blk.split >= 1 && blk.split <= blk.end - blk.start);
                    pos = blk.end;
                }
                assert_eq!(pos, n);
            }
        }
    }

    #[test]
    fn degree_sums_bounded_along_chain() {
        let f = field();
        let mut rng = SplitMix64::new(909);
        let b = random_nonsingular(&f, &mut rng, 8, 2);
        let s = shifts_of(&b);
        let total: usize = s.iter().sum();
        let oracle = KbdOracle::build_chain(&f, &b, &s).unwrap();
        for level in oracle.levels() {
            for blk in &level.blocks {
                let m = blk.end - blk.start;
                let left = blk.mat.submatrix(0..m, 0..blk.split);
                let right = blk.mat.submatrix(0..m, blk.split..m);
                let sum_l = cdeg_sum(&cdeg_shifted(&left, &blk.shift_in).unwrap());
                let sum_r = cdeg_sum(&cdeg_shifted(&right, &blk.shift_in).unwrap());
                assert!(sum_l <= total, "left factor degree sum {sum_l} > {total}");
                assert!(sum_r <= total);
                let sum_block = cdeg_sum(&cdeg_shifted(&blk.mat, &blk.shift_in).unwrap());
                assert!(sum_block <= 2 * total);
            }
        }
    }

    #[test]
    fn structured_matrices_match_reference() {
        let f = field();
        let mut rng = SplitMix64::new(0x57A6);

        // monomial-scaled permutation matrices
        for n in [3usize, 6] {
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                let j = rng.next_below(i as u64 + 1) as usize;
                perm.swap(i, j);
            }
            let mut b = PolyMatrix::zeros(n, n);
            for (i, &pi) in perm.iter().enumerate() {
                let k = rng.next_below(4) as usize;
                *b.get_mut(i, pi) = Poly::monomial(f.random_nonzero(&mut rng), k);
            }
            let adj = b.adjoint(&f).unwrap();
            let o = KbdOracle::build(&f, &b, &shifts_of(&b), 0.5).unwrap();
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(o.query_entry(&f, i, j).unwrap(), *adj.get(i, j));
                }
            }
        }

        // upper-triangular monomial matrix: very skewed kernel degrees
        let n = 5;
        let mut b = PolyMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                if i == j || rng.next_below(2) == 0 {
                    let k = rng.next_below(3) as usize;
                    *b.get_mut(i, j) = Poly::monomial(f.random_nonzero(&mut rng), k);
                }
            }
        }
        let adj = b.adjoint(&f).unwrap();
        let o = KbdOracle::build(&f, &b, &shifts_of(&b), 0.5).unwrap();
        assert!(o.verify_chain(&f, &b).unwrap());
        for i in 0..n {
            for j in 0..n {
                assert_eq!(o.query_entry(&f, i, j).unwrap(), *adj.get(i, j));
            }
        }

        // one dense high-degree row among constants: unbalanced shifts
        let n = 6;
        let b = loop {
            let mut b =
                PolyMatrix::from_fn(n, n, |_, _| Poly::constant(f.random_element(&mut rng)));
            for j in 0..n {
                *b.get_mut(2, j) =
                    Poly::from_coeffs((0..=6).map(|_| f.random_element(&mut rng)).collect());
            }
            if !b.det(&f).unwrap().is_zero() {
                break b;
            }
        };
        let adj = b.adjoint(&f).unwrap();
        let o = KbdOracle::build(&f, &b, &shifts_of(&b), 0.5).unwrap();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(o.query_entry(&f, i, j).unwrap(), *adj.get(i, j));
            }
        }
    }

    #[test]
    fn odd_dimensions_match_reference() {
        let f = field();
        let mut rng = SplitMix64::new(31337);
        for n in [3usize, 5, 7] {
            let b = random_nonsingular(&f, &mut rng, n, 2);
            let adj = b.adjoint(&f).unwrap();
            for mu in [0.0, 0.5, 1.0] {
                let oracle = KbdOracle::build(&f, &b, &shifts_of(&b), mu).unwrap();
                for i in 0..n {
                    for j in 0..n {
                        assert_eq!(
                            oracle.query_entry(&f, i, j).unwrap(),
                            *adj.get(i, j),
                            "n={n} mu={mu} ({i},{j})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn one_by_one_matrix() {
        let f = field();
        let mut b = PolyMatrix::zeros(1, 1);
        *b.get_mut(0, 0) = Poly::from_coeffs(vec![f.from_u64(3), f.from_u64(2)]);
        let oracle = KbdOracle::build(&f, &b, &[1], 1.0).unwrap();
        assert_eq!(oracle.levels().len(), 0);
        assert_eq!(oracle.query_entry(&f, 0, 0).unwrap(), Poly::one(&f));
    }
}

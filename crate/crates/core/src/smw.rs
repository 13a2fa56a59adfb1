//! Batched low-rank adjoint updates.
//!
//! Preprocess a non-singular matrix `A` once, then absorb a batch of `f`
//! entry replacements as a rank-`f` patch `A + U V^T`, where `U` and `V`
//! have one non-zero entry per column. With
//! `M := det(A) * I + V^T adj(A) U`, every entry of the updated adjoint is
//!
//! ```text
//! adj(A + UV^T)_{i,j}
//!   = (adj(A)_{i,j} det(M) - (e_i^T adj(A) U) adj(M) (V^T adj(A) e_j)) / det(A)^f
//! ```
//!
//! and `det(A + UV^T) = det(M) / det(A)^{f-1}`. The sandwich vectors are `f`
//! base-adjoint reads each, the grid inside `M` is `f^2` reads, and all
//! divisions are exact — a non-exact division means a broken invariant and
//! is reported, never truncated.
//!
//! The base adjoint is served either from an explicitly computed adjoint
//! (warm-up mode, and the scalar degree-0 fast path) or from a
//! [`KbdOracle`] with its preprocessing/query trade-off `mu`.

use crate::algebra::{Fe, FieldConfig, Poly};
use crate::error::{Error, Result};
use crate::kbd::KbdOracle;
use crate::pmat::{PolyMatrix, ScalarMatrix};

/// How `preprocess` serves base-adjoint entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AdjMode {
    /// Store `adj(A)` explicitly.
    Naive,
    /// Kernel basis decomposition with trade-off parameter `mu`.
    Oracle { mu: f64 },
}

#[derive(Debug, Clone)]
enum PolyAdjAccess {
    Explicit(PolyMatrix),
    Kbd(Box<KbdOracle>),
}

#[derive(Debug, Clone)]
enum BaseRepr {
    /// Degree-0 fast path: everything is a plain field element.
    Scalar {
        a: ScalarMatrix,
        det_a: Fe,
        adj_a: ScalarMatrix,
    },
    Poly {
        a: PolyMatrix,
        deg_bound: usize,
        det_a: Poly,
        adj: PolyAdjAccess,
    },
}

/// Preprocessed base matrix: `det(A)` plus adjoint access.
#[derive(Debug, Clone)]
pub struct BaseState {
    n: usize,
    repr: BaseRepr,
}

impl BaseState {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_scalar(&self) -> bool {
        matches!(self.repr, BaseRepr::Scalar { .. })
    }

    /// Entry degree bound `d` of the base matrix (0 in scalar mode).
    pub fn deg_bound(&self) -> usize {
        match &self.repr {
            BaseRepr::Scalar { .. } => 0,
            BaseRepr::Poly { deg_bound, .. } => *deg_bound,
        }
    }

    pub fn det_a(&self, f: &FieldConfig) -> Poly {
        match &self.repr {
            BaseRepr::Scalar { det_a, .. } => {
                let _ = f;
                Poly::constant(*det_a)
            }
            BaseRepr::Poly { det_a, .. } => det_a.clone(),
        }
    }

    /// The kernel-basis oracle behind this base, when one is in use.
    pub fn kbd(&self) -> Option<&KbdOracle> {
        match &self.repr {
            BaseRepr::Poly {
                adj: PolyAdjAccess::Kbd(o),
                ..
            } => Some(o),
            _ => None,
        }
    }

    /// The preprocessed matrix, polynomial representation only.
    pub fn poly_matrix(&self) -> Option<&PolyMatrix> {
        match &self.repr {
            BaseRepr::Poly { a, .. } => Some(a),
            BaseRepr::Scalar { .. } => None,
        }
    }

    /// The preprocessed matrix, scalar representation only.
    pub fn scalar_matrix(&self) -> Option<&ScalarMatrix> {
        match &self.repr {
            BaseRepr::Scalar { a, .. } => Some(a),
            BaseRepr::Poly { .. } => None,
        }
    }

    /// `adj(A)_{i,j}` of the unpatched base.
    pub fn adj_entry(&self, f: &FieldConfig, i: usize, j: usize) -> Result<Poly> {
        self.check_index(i, j)?;
        match &self.repr {
            BaseRepr::Scalar { adj_a, .. } => Ok(Poly::constant(adj_a.get(i, j))),
            BaseRepr::Poly { adj, .. } => match adj {
                PolyAdjAccess::Explicit(m) => Ok(m.get(i, j).clone()),
                PolyAdjAccess::Kbd(o) => o.query_entry(f, i, j),
            },
        }
    }

    fn adj_entry_scalar(&self, i: usize, j: usize) -> Result<Fe> {
        match &self.repr {
            BaseRepr::Scalar { adj_a, .. } => Ok(adj_a.get(i, j)),
            BaseRepr::Poly { .. } => Err(Error::InvalidInput(
                "scalar adjoint access on a polynomial base".into(),
            )),
        }
    }

    fn check_index(&self, i: usize, j: usize) -> Result<()> {
        if i >= self.n || j >= self.n {
            return Err(Error::DimensionMismatch(format!(
                "entry ({i}, {j}) outside {0}x{0}",
                self.n
            )));
        }
        Ok(())
    }
}

/// Preprocess a polynomial matrix. Degree-0 matrices in naive mode drop to
/// the scalar representation. The degree bound for later batches is the
/// realized matrix degree; use [`preprocess_with_degree_bound`] when the
/// instance declares a larger cap.
pub fn preprocess(f: &FieldConfig, a: &PolyMatrix, mode: AdjMode) -> Result<BaseState> {
    preprocess_with_degree_bound(f, a, mode, a.deg().unwrap_or(0))
}

/// Preprocess with an explicitly declared entry degree bound `d >= deg(a)`.
/// Batched changes may then carry any entry of degree up to `d`.
pub fn preprocess_with_degree_bound(
    f: &FieldConfig,
    a: &PolyMatrix,
    mode: AdjMode,
    deg_bound: usize,
) -> Result<BaseState> {
    if a.rows() != a.cols() || a.rows() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "square non-empty matrix required, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if a.deg().unwrap_or(0) > deg_bound {
        return Err(Error::InvalidInput(format!(
            "declared degree bound {} below matrix degree {:?}",
            deg_bound,
            a.deg()
        )));
    }
    let n = a.rows();
    if matches!(mode, AdjMode::Naive) && deg_bound == 0 {
        return preprocess_scalar(f, &a.eval(f, Fe::ZERO));
    }
    let det_a = a.det(f)?;
    if det_a.is_zero() {
        return Err(Error::Singular);
    }
    let adj = match mode {
        AdjMode::Naive => PolyAdjAccess::Explicit(a.adjoint(f)?),
        AdjMode::Oracle { mu } => {
            let shift: Vec<usize> = a.col_degrees().iter().map(|d| d.unwrap_or(0)).collect();
            PolyAdjAccess::Kbd(Box::new(KbdOracle::build(f, a, &shift, mu)?))
        }
    };
    Ok(BaseState {
        n,
        repr: BaseRepr::Poly {
            a: a.clone(),
            deg_bound,
            det_a,
            adj,
        },
    })
}

/// Preprocess a scalar matrix: explicit `det` and `adj`.
pub fn preprocess_scalar(f: &FieldConfig, a: &ScalarMatrix) -> Result<BaseState> {
    if a.rows() != a.cols() || a.rows() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "square non-empty matrix required, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let det_a = a.det(f)?;
    if det_a.is_zero() {
        return Err(Error::Singular);
    }
    let adj_a = a.adjoint(f)?;
    Ok(BaseState {
        n: a.rows(),
        repr: BaseRepr::Scalar {
            a: a.clone(),
            det_a,
            adj_a,
        },
    })
}

#[derive(Debug, Clone)]
enum PatchRepr {
    Scalar {
        det_m: Fe,
        adj_m: ScalarMatrix,
        m: ScalarMatrix,
    },
    Poly {
        det_m: Poly,
        adj_m: PolyMatrix,
        m: PolyMatrix,
    },
}

/// One absorbed batch of entry replacements. Holds `U`, `V` (sparse, one
/// non-zero per column), `M`, `det(M)`, and the explicit `adj(M)`.
#[derive(Debug, Clone)]
pub struct UpdatePatch {
    entries: Vec<(usize, usize, Poly)>,
    /// Column c of U: row index i_c and the delta against the base entry.
    u_cols: Vec<(usize, Poly)>,
    /// Column c of V: the unit position j_c.
    v_cols: Vec<usize>,
    repr: PatchRepr,
}

impl UpdatePatch {
    pub fn batch_size(&self) -> usize {
        self.u_cols.len()
    }

    /// The absolute (row, col, new value) assignments of this batch.
    pub fn entries(&self) -> &[(usize, usize, Poly)] {
        &self.entries
    }

    pub fn det_m(&self, f: &FieldConfig) -> Poly {
        match &self.repr {
            PatchRepr::Scalar { det_m, .. } => {
                let _ = f;
                Poly::constant(*det_m)
            }
            PatchRepr::Poly { det_m, .. } => det_m.clone(),
        }
    }

    pub fn m_deg(&self) -> Option<usize> {
        match &self.repr {
            PatchRepr::Scalar { .. } => Some(0),
            PatchRepr::Poly { m, .. } => m.deg(),
        }
    }

    /// Dimension of the capacitance matrix `M`; equals the batch size.
    pub fn m_dim(&self) -> usize {
        match &self.repr {
            PatchRepr::Scalar { m, .. } => m.rows(),
            PatchRepr::Poly { m, .. } => m.rows(),
        }
    }
}

/// Absorb a batch of entry assignments `(i, j, new value)` against the base.
/// One assignment per position; degrees must stay within the base bound.
pub fn apply_batch(
    f: &FieldConfig,
    base: &BaseState,
    changes: &[(usize, usize, Poly)],
) -> Result<UpdatePatch> {
    let n = base.dim();
    let mut seen = std::collections::BTreeSet::new();
    for &(i, j, ref val) in changes {
        if i >= n || j >= n {
            return Err(Error::DimensionMismatch(format!(
                "change at ({i}, {j}) outside {n}x{n}"
            )));
        }
        if !seen.insert((i, j)) {
            return Err(Error::InvalidInput(format!(
                "two changes target entry ({i}, {j})"
            )));
        }
        if val.deg().unwrap_or(0) > base.deg_bound() {
            return Err(Error::InvalidInput(format!(
                "change at ({i}, {j}) has degree {:?} above the base bound {}",
                val.deg(),
                base.deg_bound()
            )));
        }
    }

    let fsize = changes.len();
    let entries: Vec<(usize, usize, Poly)> = changes.to_vec();
    match &base.repr {
        BaseRepr::Scalar { a, det_a, adj_a } => {
            let mut u_cols = Vec::with_capacity(fsize);
            let mut v_cols = Vec::with_capacity(fsize);
            let mut deltas = Vec::with_capacity(fsize);
            for &(i, j, ref val) in changes {
                let delta = f.sub(val.coeff(0), a.get(i, j));
                u_cols.push((i, Poly::constant(delta)));
                v_cols.push(j);
                deltas.push(delta);
            }
            let mut m = ScalarMatrix::zeros(fsize, fsize);
            for r in 0..fsize {
                for c in 0..fsize {
                    let grid = f.mul(adj_a.get(v_cols[r], changes[c].0), deltas[c]);
                    let val = if r == c { f.add(grid, *det_a) } else { grid };
                    m.set(r, c, val);
                }
            }
            let det_m = m.det(f)?;
            if fsize > 0 && det_m.is_zero() {
                return Err(Error::SingularAfterUpdate);
            }
            let adj_m = m.adjoint(f)?;
            Ok(UpdatePatch {
                entries,
                u_cols,
                v_cols,
                repr: PatchRepr::Scalar { det_m, adj_m, m },
            })
        }
        BaseRepr::Poly { a, det_a, .. } => {
            let mut u_cols = Vec::with_capacity(fsize);
            let mut v_cols = Vec::with_capacity(fsize);
            for &(i, j, ref val) in changes {
                let delta = val.sub(f, a.get(i, j));
                u_cols.push((i, delta));
                v_cols.push(j);
            }
            let mut m = PolyMatrix::zeros(fsize, fsize);
            for r in 0..fsize {
                for c in 0..fsize {
                    let adj_entry = base.adj_entry(f, v_cols[r], u_cols[c].0)?;
                    let grid = adj_entry.mul(f, &u_cols[c].1)?;
                    *m.get_mut(r, c) = if r == c { grid.add(f, det_a) } else { grid };
                }
            }
            let det_m = m.det(f)?;
            if fsize > 0 && det_m.is_zero() {
                return Err(Error::SingularAfterUpdate);
            }
            let adj_m = m.adjoint(f)?;
            Ok(UpdatePatch {
                entries,
                u_cols,
                v_cols,
                repr: PatchRepr::Poly { det_m, adj_m, m },
            })
        }
    }
}

/// `adj(A + UV^T)_{i,j}` through the patch; `None` or an empty batch reads
/// the base adjoint directly.
pub fn query_adj_entry(
    f: &FieldConfig,
    base: &BaseState,
    patch: Option<&UpdatePatch>,
    i: usize,
    j: usize,
) -> Result<Poly> {
    base.check_index(i, j)?;
    let Some(patch) = patch.filter(|p| p.batch_size() > 0) else {
        return base.adj_entry(f, i, j);
    };
    match (&base.repr, &patch.repr) {
        (BaseRepr::Scalar { det_a, .. }, PatchRepr::Scalar { det_m, adj_m, .. }) => {
            let fsize = patch.batch_size();
            let adj_ij = base.adj_entry_scalar(i, j)?;
            let u: Vec<Fe> = patch
                .u_cols
                .iter()
                .map(|&(ic, ref delta)| Ok(f.mul(base.adj_entry_scalar(i, ic)?, delta.coeff(0))))
                .collect::<Result<_>>()?;
            let v: Vec<Fe> = patch
                .v_cols
                .iter()
                .map(|&jr| base.adj_entry_scalar(jr, j))
                .collect::<Result<_>>()?;
            let mut sandwich = Fe::ZERO;
            for (c, &uc) in u.iter().enumerate() {
                if uc.is_zero() {
                    continue;
                }
                for (r, &vr) in v.iter().enumerate() {
                    sandwich = f.add(sandwich, f.mul(f.mul(uc, adj_m.get(c, r)), vr));
                }
            }
            let num = f.sub(f.mul(adj_ij, *det_m), sandwich);
            let det_a_pow_inv = f.inv(f.pow(*det_a, fsize as u64))?;
            Ok(Poly::constant(f.mul(num, det_a_pow_inv)))
        }
        (BaseRepr::Poly { det_a, .. }, PatchRepr::Poly { det_m, adj_m, .. }) => {
            let adj_ij = base.adj_entry(f, i, j)?;
            let u: Vec<Poly> = patch
                .u_cols
                .iter()
                .map(|&(ic, ref delta)| base.adj_entry(f, i, ic)?.mul(f, delta))
                .collect::<Result<_>>()?;
            let v: Vec<Poly> = patch
                .v_cols
                .iter()
                .map(|&jr| base.adj_entry(f, jr, j))
                .collect::<Result<_>>()?;
            // u^T adj(M) v, assembled row-first.
            let mut w = vec![Poly::zero(); patch.batch_size()];
            for (c, uc) in u.iter().enumerate() {
                if uc.is_zero() {
                    continue;
                }
                for (r, wr) in w.iter_mut().enumerate() {
                    let term = uc.mul(f, adj_m.get(c, r))?;
                    *wr = wr.add(f, &term);
                }
            }
            let mut sandwich = Poly::zero();
            for (r, vr) in v.iter().enumerate() {
                if vr.is_zero() {
                    continue;
                }
                sandwich = sandwich.add(f, &w[r].mul(f, vr)?);
            }
            let mut num = adj_ij.mul(f, det_m)?.sub(f, &sandwich);
            for _ in 0..patch.batch_size() {
                num = num.exact_div(f, det_a).map_err(|_| {
                    Error::Invariant("updated adjoint entry not divisible by det(A)".into())
                })?;
            }
            Ok(num)
        }
        _ => Err(Error::InvalidInput(
            "patch representation does not match the base".into(),
        )),
    }
}

/// Scalar fast-path query; base and patch must be in scalar mode.
pub fn query_adj_entry_scalar(
    f: &FieldConfig,
    base: &BaseState,
    patch: Option<&UpdatePatch>,
    i: usize,
    j: usize,
) -> Result<Fe> {
    let p = query_adj_entry(f, base, patch, i, j)?;
    Ok(p.coeff(0))
}

/// `det(A + UV^T) = det(M) / det(A)^{f-1}`, by successive exact divisions.
pub fn current_det(f: &FieldConfig, base: &BaseState, patch: Option<&UpdatePatch>) -> Result<Poly> {
    let Some(patch) = patch.filter(|p| p.batch_size() > 0) else {
        return Ok(base.det_a(f));
    };
    match (&base.repr, &patch.repr) {
        (BaseRepr::Scalar { det_a, .. }, PatchRepr::Scalar { det_m, .. }) => {
            let fsize = patch.batch_size() as u64;
            let div = f.inv(f.pow(*det_a, fsize - 1))?;
            Ok(Poly::constant(f.mul(*det_m, div)))
        }
        (BaseRepr::Poly { det_a, .. }, PatchRepr::Poly { det_m, .. }) => {
            let mut det = det_m.clone();
            for _ in 0..patch.batch_size() - 1 {
                det = det
                    .exact_div(f, det_a)
                    .map_err(|_| Error::Invariant("det(M) not divisible by det(A)^{f-1}".into()))?;
            }
            Ok(det)
        }
        _ => Err(Error::InvalidInput(
            "patch representation does not match the base".into(),
        )),
    }
}

/// Test support: verify the update identity on both sides, explicitly.
/// `u_cols` and `v_cols` give the single non-zero entry of each column of
/// `U` and `V` as (row, value). Returns false on any mismatch.
pub fn smw_identity_check(
    f: &FieldConfig,
    a: &PolyMatrix,
    u_cols: &[(usize, Poly)],
    v_cols: &[(usize, Poly)],
) -> Result<bool> {
    if a.rows() != a.cols() {
        return Err(Error::DimensionMismatch("square matrix required".into()));
    }
    if u_cols.len() != v_cols.len() {
        return Err(Error::DimensionMismatch(
            "U and V need the same number of columns".into(),
        ));
    }
    let n = a.rows();
    let fsize = u_cols.len();

    let mut updated = a.clone();
    for c in 0..fsize {
        let (iu, du) = (&u_cols[c].0, &u_cols[c].1);
        let (jv, dv) = (&v_cols[c].0, &v_cols[c].1);
        let add = du.mul(f, dv)?;
        *updated.get_mut(*iu, *jv) = updated.get(*iu, *jv).add(f, &add);
    }

    let adj_a = a.adjoint(f)?;
    let det_a = a.det(f)?;
    let mut m = PolyMatrix::zeros(fsize, fsize);
    for r in 0..fsize {
        for c in 0..fsize {
            let core = adj_a.get(v_cols[r].0, u_cols[c].0);
            let grid = v_cols[r].1.mul(f, core)?.mul(f, &u_cols[c].1)?;
            *m.get_mut(r, c) = if r == c { grid.add(f, &det_a) } else { grid };
        }
    }
    let det_m = m.det(f)?;
    let adj_m = m.adjoint(f)?;

    // adj(A)U and V^T adj(A), using the sparsity of U and V.
    let mut adj_a_u = PolyMatrix::zeros(n, fsize);
    for c in 0..fsize {
        for i in 0..n {
            *adj_a_u.get_mut(i, c) = adj_a.get(i, u_cols[c].0).mul(f, &u_cols[c].1)?;
        }
    }
    let mut vt_adj_a = PolyMatrix::zeros(fsize, n);
    for r in 0..fsize {
        for j in 0..n {
            *vt_adj_a.get_mut(r, j) = v_cols[r].1.mul(f, adj_a.get(v_cols[r].0, j))?;
        }
    }

    let lhs = updated
        .adjoint(f)?
        .mul_poly(f, &det_a.pow(f, fsize as u64)?)?;
    let mid = adj_a_u.mul(f, &adj_m)?.mul(f, &vt_adj_a)?;
    let rhs = adj_a.mul_poly(f, &det_m)?.sub(f, &mid)?;
    Ok(lhs == rhs)
}

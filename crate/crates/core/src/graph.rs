//! Graph layer: encodings and the sensitive oracles.
//!
//! A weighted digraph with weights in `[-W, W]` becomes the n x n polynomial
//! matrix with `A_{i,i} = X^W` and `A_{i,j} = a_{i,j} X^{W + c_{i,j}}` for
//! every edge `(i, j)` of weight `c_{i,j}`, where each `a_{i,j}` is an
//! independent uniformly random field element. With high probability the
//! distance from `i` to `j` is the least exponent appearing in
//! `adj(A)_{i,j}` minus `W(n-1)`, and the graph has a negative cycle exactly
//! when `det(A)` carries a monomial of degree below `W*n`. Both statements
//! are Monte Carlo with failure probability around `deg * n / p` per query,
//! below 2^-40 for the built-in 62-bit primes.
//!
//! Reachability reduces to the same picture with all weights zero, so the
//! matrix is scalar. Nodes are split (`v_in -> v_out` carries a liveness
//! coefficient) so that deleting a node is a single entry update, keeping a
//! batch of `f` mixed edge/node updates a rank-`f` patch.

use std::collections::BTreeMap;

use crate::algebra::{select_field, FieldConfig, Poly};
use crate::error::{Error, Result};
use crate::pmat::{PolyMatrix, ScalarMatrix};
use crate::rng::SplitMix64;
use crate::smw::{self, AdjMode, BaseState, UpdatePatch};

/// A weighted digraph. Nodes are 1-based; at most one edge per ordered
/// pair; no self-loops (the diagonal carries the `X^W` encoding).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSpec {
    n: usize,
    w_bound: i64,
    edges: BTreeMap<(usize, usize), i64>,
}

impl GraphSpec {
    pub fn new(n: usize, w_bound: i64) -> Result<GraphSpec> {
        if n == 0 {
            return Err(Error::InvalidInput("graph needs at least one node".into()));
        }
        if w_bound < 0 {
            return Err(Error::InvalidInput("weight bound must be >= 0".into()));
        }
        Ok(GraphSpec {
            n,
            w_bound,
            edges: BTreeMap::new(),
        })
    }

    pub fn add_edge(&mut self, u: usize, v: usize, w: i64) -> Result<()> {
        self.check_nodes(u, v)?;
        self.check_weight(w)?;
        if self.edges.insert((u, v), w).is_some() {
            return Err(Error::InvalidInput(format!("duplicate edge ({u}, {v})")));
        }
        Ok(())
    }

    fn check_nodes(&self, u: usize, v: usize) -> Result<()> {
        if u < 1 || u > self.n || v < 1 || v > self.n {
            return Err(Error::InvalidInput(format!(
                "edge ({u}, {v}) outside nodes 1..={}",
                self.n
            )));
        }
        if u == v {
            return Err(Error::InvalidInput(format!("self-loop at node {u}")));
        }
        Ok(())
    }

    fn check_weight(&self, w: i64) -> Result<()> {
        if w.abs() > self.w_bound {
            return Err(Error::InvalidInput(format!(
                "weight {w} outside [-{0}, {0}]",
                self.w_bound
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn w_bound(&self) -> i64 {
        self.w_bound
    }

    pub fn edges(&self) -> &BTreeMap<(usize, usize), i64> {
        &self.edges
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains_key(&(u, v))
    }
}

/// One update operation. Node deletion is only legal in reach mode, where
/// node splitting turns it into a single entry update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateOp {
    Insert { u: usize, v: usize, w: i64 },
    Delete { u: usize, v: usize },
    Reweight { u: usize, v: usize, w: i64 },
    DeleteNode { v: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UpdateBatch {
    pub ops: Vec<UpdateOp>,
}

impl UpdateBatch {
    pub fn new(ops: Vec<UpdateOp>) -> UpdateBatch {
        UpdateBatch { ops }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Semantic validation against the spec this batch will be applied to:
    /// inserts need the edge absent, deletes/reweights need it present,
    /// weights must respect the bound, one operation per matrix slot, and
    /// node deletions only where the caller supports them.
    pub fn validate(&self, spec: &GraphSpec, allow_node_deletes: bool) -> Result<()> {
        let mut edge_slots = std::collections::BTreeSet::new();
        let mut node_slots = std::collections::BTreeSet::new();
        for op in &self.ops {
            match *op {
                UpdateOp::Insert { u, v, w } => {
                    spec.check_nodes(u, v)?;
                    spec.check_weight(w)?;
                    if spec.has_edge(u, v) {
                        return Err(Error::InvalidInput(format!(
                            "insert of existing edge ({u}, {v})"
                        )));
                    }
                    if !edge_slots.insert((u, v)) {
                        return Err(Error::InvalidInput(format!(
                            "two operations on edge slot ({u}, {v})"
                        )));
                    }
                }
                UpdateOp::Delete { u, v } | UpdateOp::Reweight { u, v, .. } => {
                    spec.check_nodes(u, v)?;
                    if let UpdateOp::Reweight { w, .. } = *op {
                        spec.check_weight(w)?;
                    }
                    if !spec.has_edge(u, v) {
                        return Err(Error::InvalidInput(format!(
                            "operation on absent edge ({u}, {v})"
                        )));
                    }
                    if !edge_slots.insert((u, v)) {
                        return Err(Error::InvalidInput(format!(
                            "two operations on edge slot ({u}, {v})"
                        )));
                    }
                }
                UpdateOp::DeleteNode { v } => {
                    if !allow_node_deletes {
                        return Err(Error::InvalidInput(
                            "node deletion is only supported in reach mode".into(),
                        ));
                    }
                    if v < 1 || v > spec.n() {
                        return Err(Error::InvalidInput(format!(
                            "node {v} outside 1..={}",
                            spec.n()
                        )));
                    }
                    if !node_slots.insert(v) {
                        return Err(Error::InvalidInput(format!("two deletions of node {v}")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Answer to a single query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryAnswer {
    Dist(i64),
    Unreachable,
    NegativeCycle,
    Reach(bool),
}

/// The randomized distance encoding, drawn deterministically from the seed.
pub fn encode_distance(f: &FieldConfig, spec: &GraphSpec, seed: u64) -> PolyMatrix {
    let mut rng = SplitMix64::new(seed);
    encode_distance_with(f, spec, &mut rng)
}

fn encode_distance_with(f: &FieldConfig, spec: &GraphSpec, rng: &mut SplitMix64) -> PolyMatrix {
    let n = spec.n();
    let w = spec.w_bound();
    let mut a = PolyMatrix::zeros(n, n);
    for i in 0..n {
        *a.get_mut(i, i) = Poly::monomial(f.one(), w as usize);
    }
    for (&(u, v), &c) in spec.edges() {
        let coeff = f.random_element(rng);
        *a.get_mut(u - 1, v - 1) = Poly::monomial(coeff, (w + c) as usize);
    }
    a
}

/// Sensitive distance oracle: preprocess, absorb one batch, answer
/// distance / unreachable / negative-cycle queries on the updated graph.
///
/// ```
/// use sensoracle_core::graph::{DistanceOracle, GraphSpec, QueryAnswer, UpdateBatch, UpdateOp};
///
/// let mut spec = GraphSpec::new(3, 1)?;
/// spec.add_edge(1, 2, 1)?;
/// spec.add_edge(2, 3, 1)?;
///
/// let mut oracle = DistanceOracle::build(spec, 0.5, 7)?;
/// oracle.update(&UpdateBatch::new(vec![UpdateOp::Delete { u: 2, v: 3 }]))?;
/// assert_eq!(oracle.query(1, 3)?, QueryAnswer::Unreachable);
/// assert_eq!(oracle.query(1, 2)?, QueryAnswer::Dist(1));
/// # Ok::<(), sensoracle_core::Error>(())
/// ```
#[derive(Debug, Clone)]
pub struct DistanceOracle {
    spec: GraphSpec,
    seed: u64,
    mu: f64,
    field: FieldConfig,
    base: BaseState,
    patch: Option<UpdatePatch>,
    rng: SplitMix64,
    current_det: Poly,
    negative_cycle: bool,
}

impl DistanceOracle {
    pub fn build(spec: GraphSpec, mu: f64, seed: u64) -> Result<DistanceOracle> {
        let field = select_field(spec.n(), 2 * spec.w_bound() as usize)?;
        Self::build_with_field(spec, mu, seed, field)
    }

    /// Build over a caller-chosen field, e.g. a user-supplied prime. The
    /// field must satisfy the same size and two-adicity constraints
    /// `select_field` enforces.
    pub fn build_with_field(
        spec: GraphSpec,
        mu: f64,
        seed: u64,
        field: FieldConfig,
    ) -> Result<DistanceOracle> {
        check_field_capacity(&field, spec.n(), 2 * spec.w_bound() as usize)?;
        let mut rng = SplitMix64::new(seed);
        let a = encode_distance_with(&field, &spec, &mut rng);
        // declared entry degree bound d = 2W: an update may raise an entry
        // to X^{W + W} even if no current edge reaches that degree
        let base = smw::preprocess_with_degree_bound(
            &field,
            &a,
            AdjMode::Oracle { mu },
            2 * spec.w_bound() as usize,
        )
        .map_err(|e| match e {
            Error::Singular => Error::SingularEncoding,
            other => other,
        })?;
        let current_det = base.det_a(&field);
        let negative_cycle = det_has_negative_cycle(&current_det, &spec);
        Ok(DistanceOracle {
            spec,
            seed,
            mu,
            field,
            base,
            patch: None,
            rng,
            current_det,
            negative_cycle,
        })
    }

    pub fn spec(&self) -> &GraphSpec {
        &self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn field(&self) -> &FieldConfig {
        &self.field
    }

    pub fn base(&self) -> &BaseState {
        &self.base
    }

    pub fn patch(&self) -> Option<&UpdatePatch> {
        self.patch.as_ref()
    }

    /// Determinant of the updated encoding. Cached at update time.
    pub fn current_det(&self) -> &Poly {
        &self.current_det
    }

    pub fn has_negative_cycle(&self) -> bool {
        self.negative_cycle
    }

    /// Absorb one batch. A repeated call replaces the previous batch; the
    /// operations always apply against the preprocessed graph.
    pub fn update(&mut self, batch: &UpdateBatch) -> Result<()> {
        batch.validate(&self.spec, false)?;
        let w = self.spec.w_bound();
        let changes: Vec<(usize, usize, Poly)> = batch
            .ops
            .iter()
            .map(|op| match *op {
                UpdateOp::Insert { u, v, w: c } | UpdateOp::Reweight { u, v, w: c } => {
                    let coeff = self.field.random_element(&mut self.rng);
                    (u - 1, v - 1, Poly::monomial(coeff, (w + c) as usize))
                }
                UpdateOp::Delete { u, v } => (u - 1, v - 1, Poly::zero()),
                UpdateOp::DeleteNode { .. } => unreachable!("rejected by validate"),
            })
            .collect();
        let patch = smw::apply_batch(&self.field, &self.base, &changes)?;
        self.current_det = smw::current_det(&self.field, &self.base, Some(&patch))?;
        self.negative_cycle = det_has_negative_cycle(&self.current_det, &self.spec);
        self.patch = Some(patch);
        Ok(())
    }

    /// Distance from `u` to `v` (1-based) in the updated graph.
    pub fn query(&self, u: usize, v: usize) -> Result<QueryAnswer> {
        let n = self.spec.n();
        if u < 1 || u > n || v < 1 || v > n {
            return Err(Error::InvalidInput(format!(
                "query ({u}, {v}) outside nodes 1..={n}"
            )));
        }
        if self.negative_cycle {
            return Ok(QueryAnswer::NegativeCycle);
        }
        if u == v {
            return Ok(QueryAnswer::Dist(0));
        }
        let entry =
            smw::query_adj_entry(&self.field, &self.base, self.patch.as_ref(), u - 1, v - 1)?;
        match entry.min_nonzero_degree() {
            None => Ok(QueryAnswer::Unreachable),
            Some(min_deg) => {
                let w = self.spec.w_bound();
                Ok(QueryAnswer::Dist(min_deg as i64 - w * (n as i64 - 1)))
            }
        }
    }
}

fn det_has_negative_cycle(det: &Poly, spec: &GraphSpec) -> bool {
    match det.min_nonzero_degree() {
        Some(d) => (d as i64) < spec.w_bound() * spec.n() as i64,
        None => false,
    }
}

/// The constraints `select_field` guarantees, re-checked for user fields:
/// `p >= dim^3` and transforms long enough for the instance's products.
pub fn check_field_capacity(field: &FieldConfig, dim: usize, degree_bound: usize) -> Result<()> {
    let need_points = 2u128 * degree_bound as u128 * dim as u128 + 2;
    if (field.modulus() as u128) < (dim as u128).pow(3)
        || (1u128 << field.two_adicity()) < need_points
    {
        return Err(Error::FieldCapacity {
            n: dim,
            degree_bound,
        });
    }
    Ok(())
}

/// Index of `v_in` in the split reachability matrix (0-based).
pub fn reach_in(v: usize) -> usize {
    v - 1
}

/// Index of `v_out` in the split reachability matrix (0-based).
pub fn reach_out(n: usize, v: usize) -> usize {
    n + v - 1
}

/// Sensitive reachability oracle over the 2n x 2n scalar split encoding:
/// identity diagonal, a liveness coefficient on `(v_in, v_out)` per node,
/// and a random coefficient on `(u_out, v_in)` per edge. Edge weights are
/// ignored. Supports node deletions.
#[derive(Debug, Clone)]
pub struct ReachOracle {
    spec: GraphSpec,
    seed: u64,
    field: FieldConfig,
    base: BaseState,
    patch: Option<UpdatePatch>,
    rng: SplitMix64,
}

impl ReachOracle {
    pub fn build(spec: GraphSpec, seed: u64) -> Result<ReachOracle> {
        let field = select_field(2 * spec.n(), 0)?;
        Self::build_with_field(spec, seed, field)
    }

    /// Build over a caller-chosen field; see
    /// [`DistanceOracle::build_with_field`].
    pub fn build_with_field(spec: GraphSpec, seed: u64, field: FieldConfig) -> Result<ReachOracle> {
        let n = spec.n();
        check_field_capacity(&field, 2 * n, 0)?;
        let mut rng = SplitMix64::new(seed);
        let mut m = ScalarMatrix::identity(&field, 2 * n);
        for v in 1..=n {
            m.set(reach_in(v), reach_out(n, v), field.random_nonzero(&mut rng));
        }
        for &(u, v) in spec.edges().keys() {
            m.set(reach_out(n, u), reach_in(v), field.random_nonzero(&mut rng));
        }
        let base = smw::preprocess_scalar(&field, &m).map_err(|e| match e {
            Error::Singular => Error::SingularEncoding,
            other => other,
        })?;
        Ok(ReachOracle {
            spec,
            seed,
            field,
            base,
            patch: None,
            rng,
        })
    }

    pub fn spec(&self) -> &GraphSpec {
        &self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn field(&self) -> &FieldConfig {
        &self.field
    }

    pub fn base(&self) -> &BaseState {
        &self.base
    }

    pub fn update(&mut self, batch: &UpdateBatch) -> Result<()> {
        batch.validate(&self.spec, true)?;
        let n = self.spec.n();
        let changes: Vec<(usize, usize, Poly)> = batch
            .ops
            .iter()
            .map(|op| match *op {
                UpdateOp::Insert { u, v, .. } | UpdateOp::Reweight { u, v, .. } => {
                    let coeff = self.field.random_nonzero(&mut self.rng);
                    (reach_out(n, u), reach_in(v), Poly::constant(coeff))
                }
                UpdateOp::Delete { u, v } => (reach_out(n, u), reach_in(v), Poly::zero()),
                UpdateOp::DeleteNode { v } => (reach_in(v), reach_out(n, v), Poly::zero()),
            })
            .collect();
        let patch = smw::apply_batch(&self.field, &self.base, &changes)?;
        self.patch = Some(patch);
        Ok(())
    }

    /// Is there a path from `u` to `v` (1-based) in the updated graph?
    /// `u == v` answers true exactly when `u` is still alive.
    pub fn query(&self, u: usize, v: usize) -> Result<QueryAnswer> {
        let n = self.spec.n();
        if u < 1 || u > n || v < 1 || v > n {
            return Err(Error::InvalidInput(format!(
                "query ({u}, {v}) outside nodes 1..={n}"
            )));
        }
        let e = smw::query_adj_entry_scalar(
            &self.field,
            &self.base,
            self.patch.as_ref(),
            reach_in(u),
            reach_out(n, v),
        )?;
        Ok(QueryAnswer::Reach(!e.is_zero()))
    }
}

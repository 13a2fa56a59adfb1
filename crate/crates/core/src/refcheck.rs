//! Independent brute-force oracles used by tests and the CLI's verify mode.
//!
//! Nothing here shares code with the algebraic path: distances come from
//! Bellman-Ford, reachability from BFS, tiny adjoints from literal cofactor
//! expansion. Correctness only; performance is a non-goal.

use crate::algebra::{FieldConfig, Poly};
use crate::error::{Error, Result};
use crate::graph::{GraphSpec, UpdateBatch, UpdateOp};
use crate::pmat::PolyMatrix;

/// Adjacency-list view of the literally updated graph, 0-based.
#[derive(Debug, Clone)]
pub struct RefGraph {
    n: usize,
    adj: Vec<Vec<(usize, i64)>>,
}

impl RefGraph {
    pub fn new(n: usize) -> RefGraph {
        RefGraph {
            n,
            adj: vec![Vec::new(); n],
        }
    }

    pub fn add_edge(&mut self, u: usize, v: usize, w: i64) {
        self.adj[u].push((v, w));
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Apply the batch to the spec literally and return the updated
    /// distance graph.
    pub fn distance_graph(spec: &GraphSpec, batch: &UpdateBatch) -> Result<RefGraph> {
        let mut edges = spec.edges().clone();
        for op in &batch.ops {
            match *op {
                UpdateOp::Insert { u, v, w } | UpdateOp::Reweight { u, v, w } => {
                    edges.insert((u, v), w);
                }
                UpdateOp::Delete { u, v } => {
                    edges.remove(&(u, v));
                }
                UpdateOp::DeleteNode { .. } => {
                    return Err(Error::InvalidInput(
                        "node deletion is only supported in reach mode".into(),
                    ));
                }
            }
        }
        let mut g = RefGraph::new(spec.n());
        for ((u, v), w) in edges {
            g.add_edge(u - 1, v - 1, w);
        }
        Ok(g)
    }

    /// The updated split graph on 2n nodes used by reach mode: node v maps
    /// to `v_in = v-1` and `v_out = n+v-1`, with a liveness edge between
    /// them unless the node was deleted.
    pub fn reach_split_graph(spec: &GraphSpec, batch: &UpdateBatch) -> RefGraph {
        let n = spec.n();
        let mut edges: std::collections::BTreeSet<(usize, usize)> =
            spec.edges().keys().copied().collect();
        let mut alive = vec![true; n + 1];
        for op in &batch.ops {
            match *op {
                UpdateOp::Insert { u, v, .. } | UpdateOp::Reweight { u, v, .. } => {
                    edges.insert((u, v));
                }
                UpdateOp::Delete { u, v } => {
                    edges.remove(&(u, v));
                }
                UpdateOp::DeleteNode { v } => alive[v] = false,
            }
        }
        let mut g = RefGraph::new(2 * n);
        for v in 1..=n {
            if alive[v] {
                g.add_edge(v - 1, n + v - 1, 0);
            }
        }
        for (u, v) in edges {
            g.add_edge(n + u - 1, v - 1, 0);
        }
        g
    }
}

/// Bellman-Ford outcome: either the graph has a negative cycle anywhere
/// (the global criterion), or exact distances from the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BfOutcome {
    NegativeCycle,
    Distances(Vec<Option<i64>>),
}

/// Exact single-source shortest paths with global negative-cycle detection.
/// The detection pass seeds every node with distance 0, which is equivalent
/// to a virtual super-source reaching all nodes: any negative cycle in the
/// graph still relaxes in round n.
pub fn bellman_ford_all(g: &RefGraph, src: usize) -> BfOutcome {
    let n = g.n;
    if n == 0 {
        return BfOutcome::Distances(Vec::new());
    }
    let mut probe = vec![0i64; n];
    for round in 0..n {
        let mut changed = false;
        for u in 0..n {
            for &(v, w) in &g.adj[u] {
                if probe[u] + w < probe[v] {
                    probe[v] = probe[u] + w;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
        if round == n - 1 {
            return BfOutcome::NegativeCycle;
        }
    }

    let mut dist: Vec<Option<i64>> = vec![None; n];
    dist[src] = Some(0);
    for _ in 0..n.saturating_sub(1) {
        let mut changed = false;
        for u in 0..n {
            let Some(du) = dist[u] else { continue };
            for &(v, w) in &g.adj[u] {
                if dist[v].is_none_or(|dv| du + w < dv) {
                    dist[v] = Some(du + w);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    BfOutcome::Distances(dist)
}

/// Plain breadth-first reachability.
pub fn bfs_reach(g: &RefGraph, u: usize, v: usize) -> bool {
    if u == v {
        return true;
    }
    let mut seen = vec![false; g.n];
    let mut queue = std::collections::VecDeque::new();
    seen[u] = true;
    queue.push_back(u);
    while let Some(x) = queue.pop_front() {
        for &(y, _) in &g.adj[x] {
            if y == v {
                return true;
            }
            if !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    false
}

/// Adjoint by literal cofactor expansion over the polynomial ring.
/// Factorial cost; capped at 5x5.
pub fn cofactor_adjoint(f: &FieldConfig, b: &PolyMatrix) -> Result<PolyMatrix> {
    let n = b.rows();
    if b.cols() != n {
        return Err(Error::DimensionMismatch("square matrix required".into()));
    }
    if n > 5 {
        return Err(Error::InvalidInput(
            "cofactor adjoint is capped at 5x5".into(),
        ));
    }
    if n == 0 {
        return Ok(PolyMatrix::zeros(0, 0));
    }
    if n == 1 {
        let mut out = PolyMatrix::zeros(1, 1);
        *out.get_mut(0, 0) = Poly::one(f);
        return Ok(out);
    }
    let mut out = PolyMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            // delete row j and column i
            let rows: Vec<usize> = (0..n).filter(|&r| r != j).collect();
            let cols: Vec<usize> = (0..n).filter(|&c| c != i).collect();
            let minor = cofactor_det(f, b, &rows, &cols)?;
            *out.get_mut(i, j) = if (i + j) % 2 == 0 {
                minor
            } else {
                minor.neg(f)
            };
        }
    }
    Ok(out)
}

fn cofactor_det(f: &FieldConfig, b: &PolyMatrix, rows: &[usize], cols: &[usize]) -> Result<Poly> {
    if rows.is_empty() {
        return Ok(Poly::one(f));
    }
    let mut acc = Poly::zero();
    let r = rows[0];
    for (k, &c) in cols.iter().enumerate() {
        let entry = b.get(r, c);
        if entry.is_zero() {
            continue;
        }
        let sub_cols: Vec<usize> = cols.iter().copied().filter(|&cc| cc != c).collect();
        let sub = cofactor_det(f, b, &rows[1..], &sub_cols)?;
        let term = entry.mul(f, &sub)?;
        acc = if k % 2 == 0 {
            acc.add(f, &term)
        } else {
            acc.sub(f, &term)
        };
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{select_field, Fe};
    use crate::rng::SplitMix64;

    #[test]
    fn bellman_ford_path() {
        let mut g = RefGraph::new(3);
        g.add_edge(0, 1, 1);
        g.add_edge(1, 2, 1);
        match bellman_ford_all(&g, 0) {
            BfOutcome::Distances(d) => {
                assert_eq!(d[2], Some(2));
                assert_eq!(d[0], Some(0));
            }
            _ => panic!("no negative cycle here"),
        }
    }

    #[test]
    fn bellman_ford_unreachable() {
        let g = RefGraph::new(2);
        match bellman_ford_all(&g, 0) {
            BfOutcome::Distances(d) => assert_eq!(d[1], None),
            _ => panic!(),
        }
    }

    #[test]
    fn bellman_ford_detects_any_negative_cycle() {
        // cycle 1 -> 2 -> 1 with total weight -1, unreachable from node 0
        let mut g = RefGraph::new(3);
        g.add_edge(1, 2, 1);
        g.add_edge(2, 1, -2);
        assert_eq!(bellman_ford_all(&g, 0), BfOutcome::NegativeCycle);
    }

    #[test]
    fn bellman_ford_triangle_inequality() {
        let mut rng = SplitMix64::new(77);
        let n = 10;
        let mut g = RefGraph::new(n);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in 0..n {
                if u != v && rng.next_below(4) == 0 {
                    let w = rng.next_below(9) as i64 - 2;
                    g.add_edge(u, v, w);
                    edges.push((u, v, w));
                }
            }
        }
        match bellman_ford_all(&g, 0) {
            BfOutcome::NegativeCycle => {}
            BfOutcome::Distances(d) => {
                for &(u, v, w) in &edges {
                    if let (Some(du), Some(dv)) = (d[u], d[v]) {
                        assert!(dv <= du + w, "edge ({u},{v},{w}) violates relaxation");
                    }
                }
            }
        }
    }

    #[test]
    fn bfs_examples() {
        let mut g = RefGraph::new(2);
        g.add_edge(0, 1, 0);
        assert!(bfs_reach(&g, 0, 0));
        assert!(bfs_reach(&g, 0, 1));
        assert!(!bfs_reach(&g, 1, 0));
    }

    #[test]
    fn bfs_matches_boolean_matrix_closure() {
        let mut rng = SplitMix64::new(321);
        let n = 12;
        let mut g = RefGraph::new(n);
        let mut m = vec![vec![false; n]; n];
        for u in 0..n {
            for v in 0..n {
                if u != v && rng.next_below(5) == 0 {
                    g.add_edge(u, v, 0);
                    m[u][v] = true;
                }
            }
        }
        for i in 0..n {
            m[i][i] = true;
        }
        // transitive closure by repeated boolean squaring
        for _ in 0..4 {
            let mut sq = vec![vec![false; n]; n];
            for i in 0..n {
                for k in 0..n {
                    if m[i][k] {
                        for j in 0..n {
                            sq[i][j] |= m[k][j];
                        }
                    }
                }
            }
            m = sq;
        }
        for u in 0..n {
            for v in 0..n {
                assert_eq!(bfs_reach(&g, u, v), m[u][v]);
            }
        }
    }

    #[test]
    fn cofactor_adjoint_examples() {
        let f = select_field(8, 2).unwrap();
        let id = PolyMatrix::identity(&f, 3);
        assert_eq!(cofactor_adjoint(&f, &id).unwrap(), id);

        let mut rng = SplitMix64::new(11);
        let m = PolyMatrix::from_fn(2, 2, |_, _| Poly::constant(f.random_element(&mut rng)));
        let adj = cofactor_adjoint(&f, &m).unwrap();
        assert_eq!(adj.get(0, 0), m.get(1, 1));
        assert_eq!(*adj.get(0, 1), m.get(0, 1).neg(&f));
        assert_eq!(*adj.get(1, 0), m.get(1, 0).neg(&f));
        assert_eq!(adj.get(1, 1), m.get(0, 0));
    }

    #[test]
    fn cofactor_adjoint_matches_evaluation_route() {
        let f = select_field(8, 2).unwrap();
        let mut rng = SplitMix64::new(13);
        let b = PolyMatrix::from_fn(4, 4, |_, _| {
            Poly::from_coeffs(vec![f.random_element(&mut rng), f.random_element(&mut rng)])
        });
        assert_eq!(cofactor_adjoint(&f, &b).unwrap(), b.adjoint(&f).unwrap());
    }

    #[test]
    fn cofactor_adjoint_defining_identity() {
        let f = select_field(8, 2).unwrap();
        let mut rng = SplitMix64::new(17);
        let b = PolyMatrix::from_fn(3, 3, |_, _| {
            Poly::from_coeffs(vec![f.random_element(&mut rng), f.random_element(&mut rng)])
        });
        let adj = cofactor_adjoint(&f, &b).unwrap();
        let det = b.det(&f).unwrap();
        let prod = adj.mul(&f, &b).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    assert_eq!(prod.get(i, j), &det);
                } else {
                    assert!(prod.get(i, j).is_zero());
                }
            }
        }
        let _ = Fe::ZERO;
    }

    #[test]
    fn size_cap_enforced() {
        let f = select_field(8, 2).unwrap();
        let b = PolyMatrix::identity(&f, 6);
        assert!(cofactor_adjoint(&f, &b).is_err());
    }
}

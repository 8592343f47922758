//! Graph representation, random/synthetic generators, dataset ingestion,
//! Laplacians, permutations, the disagreement metric, and the known-topology
//! identifiability scan.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected weighted graph on `n` nodes, stored as a dense symmetric
/// adjacency matrix with zero diagonal.
///
/// Unweighted families (Erdős–Rényi, preferential attachment, edge-sampled)
/// keep entries in {0, 1}; the Gaussian Wigner family carries signed real
/// weights, so no sign restriction is imposed here.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    weights: DMatrix<f64>,
}

impl Graph {
    /// Builds a graph from an adjacency matrix, validating squareness, exact
    /// symmetry, a zero diagonal, and finite entries.
    pub fn from_weights(weights: DMatrix<f64>) -> Result<Self> {
        let n = weights.nrows();
        if n == 0 {
            return Err(Error::invalid("graph must have at least one node"));
        }
        if weights.ncols() != n {
            return Err(Error::invalid(format!(
                "adjacency matrix must be square, got {}x{}",
                n,
                weights.ncols()
            )));
        }
        for k in 0..n {
            if weights[(k, k)] != 0.0 {
                return Err(Error::invalid(format!(
                    "adjacency diagonal must be zero, entry ({k},{k}) is {}",
                    weights[(k, k)]
                )));
            }
            for l in 0..n {
                let w = weights[(k, l)];
                if !w.is_finite() {
                    return Err(Error::invalid(format!("non-finite weight at ({k},{l})")));
                }
                if w != weights[(l, k)] {
                    return Err(Error::invalid(format!(
                        "adjacency must be symmetric; entries ({k},{l}) and ({l},{k}) differ"
                    )));
                }
            }
        }
        Ok(Graph { n, weights })
    }

    /// Node count.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Symmetric adjacency matrix.
    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    /// Number of unordered node pairs with a nonzero weight.
    pub fn edge_count(&self) -> usize {
        let mut count = 0;
        for k in 0..self.n {
            for l in (k + 1)..self.n {
                if self.weights[(k, l)] != 0.0 {
                    count += 1;
                }
            }
        }
        count
    }

    /// Weighted degree vector (row sums of the adjacency matrix).
    pub fn degrees(&self) -> DVector<f64> {
        DVector::from_iterator(self.n, self.weights.row_iter().map(|r| r.sum()))
    }

    /// True when every node is reachable from node 0 through nonzero weights.
    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(k) = stack.pop() {
            for (l, s) in seen.iter_mut().enumerate() {
                if !*s && self.weights[(k, l)] != 0.0 {
                    *s = true;
                    stack.push(l);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Renders the graph in the plain-text edge-list format accepted by
    /// [`load_edge_list`]: a `% base=0` header followed by one
    /// `u v weight` line per edge. Weights use shortest round-trip
    /// formatting, so a write/read cycle reproduces the graph exactly.
    pub fn to_edge_list_string(&self) -> String {
        let mut out = String::from("% base=0\n");
        for k in 0..self.n {
            for l in (k + 1)..self.n {
                let w = self.weights[(k, l)];
                if w != 0.0 {
                    out.push_str(&format!("{k} {l} {w}\n"));
                }
            }
        }
        // Isolated trailing nodes carry no edge line; record the node count so
        // the reader can reconstruct the exact node set.
        out.push_str(&format!("# nodes={}\n", self.n));
        out
    }
}

/// Graph Laplacian `L = diag(A·1) − A`; symmetric with zero row sums.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix {
    entries: DMatrix<f64>,
}

impl LaplacianMatrix {
    /// Node count.
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    /// The dense symmetric matrix.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }
}

/// Node relabeling π on `{0, …, n−1}` with matrix semantics
/// `P[k][l] = 1` iff `π(k) = l`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    /// Identity permutation on `n` nodes.
    pub fn identity(n: usize) -> Self {
        Permutation { map: (0..n).collect() }
    }

    /// Transposition swapping nodes `a` and `b`.
    pub fn transposition(n: usize, a: usize, b: usize) -> Result<Self> {
        if a >= n || b >= n {
            return Err(Error::invalid(format!(
                "transposition indices ({a},{b}) out of range for n={n}"
            )));
        }
        if a == b {
            return Err(Error::invalid("transposition indices must differ"));
        }
        let mut map: Vec<usize> = (0..n).collect();
        map.swap(a, b);
        Ok(Permutation { map })
    }

    /// Builds a permutation from an explicit image list, validating that it
    /// is a bijection on `{0, …, n−1}`.
    pub fn from_map(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        if n == 0 {
            return Err(Error::invalid("permutation must be non-empty"));
        }
        let mut seen = vec![false; n];
        for &v in &map {
            if v >= n {
                return Err(Error::invalid(format!("image {v} out of range for n={n}")));
            }
            if seen[v] {
                return Err(Error::invalid(format!("image {v} repeated; not a bijection")));
            }
            seen[v] = true;
        }
        Ok(Permutation { map })
    }

    /// Uniformly random permutation drawn from the given generator.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut map: Vec<usize> = (0..n).collect();
        map.shuffle(rng);
        Permutation { map }
    }

    /// Number of nodes.
    pub fn n(&self) -> usize {
        self.map.len()
    }

    /// Image π(k).
    pub fn apply(&self, k: usize) -> usize {
        self.map[k]
    }

    /// The image list `[π(0), …, π(n−1)]`.
    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    /// Inverse permutation.
    pub fn inverse(&self) -> Self {
        let mut inv = vec![0usize; self.map.len()];
        for (k, &v) in self.map.iter().enumerate() {
            inv[v] = k;
        }
        Permutation { map: inv }
    }

    /// Composition "self first, then `other`": `(self.then(other))(k) = other(self(k))`.
    pub fn then(&self, other: &Permutation) -> Result<Self> {
        if self.n() != other.n() {
            return Err(Error::invalid("composing permutations of different sizes"));
        }
        Ok(Permutation {
            map: self.map.iter().map(|&v| other.map[v]).collect(),
        })
    }

    /// Dense permutation matrix with `P[k][l] = 1` iff `π(k) = l`.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for (k, &v) in self.map.iter().enumerate() {
            m[(k, v)] = 1.0;
        }
        m
    }

    /// Applies the permutation matrix to a vector: `(P·x)[k] = x[π(k)]`.
    pub fn permute_vector(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.n(), self.map.iter().map(|&v| x[v]))
    }

    /// Two-column pairing `(source node, matched node)` for export.
    pub fn to_pairs(&self) -> Vec<(usize, usize)> {
        self.map.iter().enumerate().map(|(k, &v)| (k, v)).collect()
    }
}

/// Configuration for a correlated Gaussian Wigner graph pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WignerPairConfig {
    /// Node count.
    pub n: usize,
    /// Correlation control in (0, 1); smaller means more similar graphs.
    pub beta: f64,
    /// RNG seed.
    pub seed: u64,
}

impl WignerPairConfig {
    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("wigner pair needs at least one node"));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::invalid(format!(
                "beta must lie strictly in (0,1), got {}",
                self.beta
            )));
        }
        Ok(())
    }
}

/// All draws behind a Wigner pair, exposed so tests can recompute the pair
/// identity from the captured pieces.
#[derive(Debug, Clone)]
pub struct WignerPairParts {
    /// First graph, a symmetric matrix with i.i.d. standard normal strict
    /// upper triangle and zero diagonal.
    pub a1: Graph,
    /// Independent Wigner noise matrix mixed into the second graph.
    pub z_prime: DMatrix<f64>,
    /// Ground-truth relabeling between the two graphs.
    pub p_star: Permutation,
    /// Second graph: the entries of `√(1−β²)·A₁ + β·Z′` relocated by `p_star`.
    pub a2: Graph,
}

/// Erdős–Rényi random graph: every unordered pair is an edge independently
/// with probability `p`. Deterministic for a fixed seed.
pub fn gen_er(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(Error::invalid("gen_er requires n >= 1"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("edge probability must lie in [0,1], got {p}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = DMatrix::zeros(n, n);
    for k in 0..n {
        for l in (k + 1)..n {
            if rng.random_bool(p) {
                w[(k, l)] = 1.0;
                w[(l, k)] = 1.0;
            }
        }
    }
    Graph::from_weights(w)
}

/// Preferential-attachment random graph.
///
/// Convention: the seed component is an empty graph on `m0` nodes; the first
/// growth node connects to all `m0` seed nodes (degree-proportional sampling
/// is undefined on an empty seed); each later node attaches to `m_attach`
/// distinct existing nodes chosen with probability proportional to current
/// degree. For `n > m0` the edge count is exactly
/// `m0 + (n − m0 − 1) · m_attach`; for `n == m0` the graph is empty.
pub fn gen_ba(n: usize, m0: usize, m_attach: usize, seed: u64) -> Result<Graph> {
    if m_attach < 1 {
        return Err(Error::invalid("gen_ba requires m_attach >= 1"));
    }
    if m0 < m_attach {
        return Err(Error::invalid(format!(
            "gen_ba requires m0 >= m_attach, got m0={m0}, m_attach={m_attach}"
        )));
    }
    if n < m0 {
        return Err(Error::invalid(format!("gen_ba requires n >= m0, got n={n}, m0={m0}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = DMatrix::zeros(n, n);
    // Ends of every placed edge; sampling an index uniformly from this list
    // is degree-proportional sampling.
    let mut edge_ends: Vec<usize> = Vec::new();
    let add_edge = |w: &mut DMatrix<f64>, ends: &mut Vec<usize>, a: usize, b: usize| {
        w[(a, b)] = 1.0;
        w[(b, a)] = 1.0;
        ends.push(a);
        ends.push(b);
    };
    if n > m0 {
        for s in 0..m0 {
            add_edge(&mut w, &mut edge_ends, m0, s);
        }
    }
    for v in (m0 + 1)..n {
        let mut targets: Vec<usize> = Vec::with_capacity(m_attach);
        while targets.len() < m_attach {
            let candidate = edge_ends[rng.random_range(0..edge_ends.len())];
            if !targets.contains(&candidate) {
                targets.push(candidate);
            }
        }
        for t in targets {
            add_edge(&mut w, &mut edge_ends, v, t);
        }
    }
    Graph::from_weights(w)
}

fn wigner_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for k in 0..n {
        for l in (k + 1)..n {
            let x: f64 = rng.sample(StandardNormal);
            m[(k, l)] = x;
            m[(l, k)] = x;
        }
    }
    m
}

/// Correlated Gaussian Wigner pair with every internal draw exposed.
///
/// The second adjacency holds the entries of `√(1−β²)·A₁ + β·Z′` relocated by
/// the ground-truth permutation: `A₂[π(k)][π(l)] = B[k][l]`, which equals the
/// matrix product `P*ᵀ·B·P*` exactly.
pub fn wigner_pair_with_parts(cfg: &WignerPairConfig) -> Result<WignerPairParts> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let a1 = wigner_matrix(cfg.n, &mut rng);
    let z_prime = wigner_matrix(cfg.n, &mut rng);
    let p_star = Permutation::random(cfg.n, &mut rng);
    let blend = a1.map(|x| x * (1.0 - cfg.beta * cfg.beta).sqrt()) + z_prime.map(|x| x * cfg.beta);
    let mut a2 = DMatrix::zeros(cfg.n, cfg.n);
    for k in 0..cfg.n {
        for l in 0..cfg.n {
            a2[(p_star.apply(k), p_star.apply(l))] = blend[(k, l)];
        }
    }
    for k in 0..cfg.n {
        a2[(k, k)] = 0.0;
    }
    Ok(WignerPairParts {
        a1: Graph::from_weights(a1)?,
        z_prime,
        p_star,
        a2: Graph::from_weights(a2)?,
    })
}

/// Correlated Gaussian Wigner pair plus its ground-truth permutation.
pub fn gen_wigner_pair(cfg: &WignerPairConfig) -> Result<(Graph, Graph, Permutation)> {
    let parts = wigner_pair_with_parts(cfg)?;
    Ok((parts.a1, parts.a2, parts.p_star))
}

/// Keeps each edge of `g` independently with probability `q`; the node set is
/// unchanged. Deterministic for a fixed seed.
pub fn edge_sample(g: &Graph, q: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::invalid(format!("sampling probability must lie in [0,1], got {q}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = g.n();
    let mut w = DMatrix::zeros(n, n);
    for k in 0..n {
        for l in (k + 1)..n {
            let weight = g.weights()[(k, l)];
            if weight != 0.0 && rng.random_bool(q) {
                w[(k, l)] = weight;
                w[(l, k)] = weight;
            }
        }
    }
    Graph::from_weights(w)
}

/// Loads a plain-text edge list.
///
/// Format: whitespace-separated `u v [weight]` lines; `#` starts a comment
/// (full-line or trailing); an optional header directive `% base=0` or
/// `% base=1` (default 0) declares the node-id base and must precede every
/// edge line. Duplicate edges collapse with the last weight winning.
/// Self-loops are rejected as data errors rather than silently dropped.
/// The node count is one past the largest id seen (after base adjustment);
/// a `# nodes=N` trailer comment emitted by [`Graph::to_edge_list_string`]
/// is recognized to preserve trailing isolated nodes.
pub fn load_edge_list(path: &Path) -> Result<Graph> {
    let text = std::fs::read_to_string(path)?;
    let mut base: usize = 0;
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut max_id: usize = 0;
    let mut declared_nodes: Option<usize> = None;
    let mut saw_edge = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => {
                let comment = raw[pos + 1..].trim();
                if let Some(v) = comment.strip_prefix("nodes=") {
                    declared_nodes = Some(v.trim().parse().map_err(|_| Error::Format {
                        line: line_no,
                        message: format!("invalid node-count trailer '{comment}'"),
                    })?);
                }
                &raw[..pos]
            }
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(directive) = line.strip_prefix('%') {
            if saw_edge {
                return Err(Error::Format {
                    line: line_no,
                    message: "header directive must precede edge lines".into(),
                });
            }
            match directive.trim() {
                "base=0" => base = 0,
                "base=1" => base = 1,
                other => {
                    return Err(Error::Format {
                        line: line_no,
                        message: format!("unknown directive '%{other}'; expected '% base=0|1'"),
                    })
                }
            }
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 2 && tokens.len() != 3 {
            return Err(Error::Format {
                line: line_no,
                message: format!("expected 'u v [weight]', got {} fields", tokens.len()),
            });
        }
        let parse_id = |tok: &str| -> Result<usize> {
            let id: usize = tok.parse().map_err(|_| Error::Format {
                line: line_no,
                message: format!("invalid node id '{tok}'"),
            })?;
            if id < base {
                return Err(Error::Format {
                    line: line_no,
                    message: format!("node id {id} below declared base {base}"),
                });
            }
            Ok(id - base)
        };
        let u = parse_id(tokens[0])?;
        let v = parse_id(tokens[1])?;
        let w: f64 = if tokens.len() == 3 {
            let w: f64 = tokens[2].parse().map_err(|_| Error::Format {
                line: line_no,
                message: format!("invalid weight '{}'", tokens[2]),
            })?;
            if !w.is_finite() {
                return Err(Error::Format {
                    line: line_no,
                    message: format!("non-finite weight '{}'", tokens[2]),
                });
            }
            w
        } else {
            1.0
        };
        if u == v {
            return Err(Error::data(format!("self-loop on node {u} at line {line_no}")));
        }
        saw_edge = true;
        max_id = max_id.max(u).max(v);
        edges.push((u, v, w));
    }
    if edges.is_empty() && declared_nodes.is_none() {
        return Err(Error::data("edge list contains no edges"));
    }
    let n = declared_nodes.unwrap_or(0).max(max_id + 1);
    let mut w = DMatrix::zeros(n, n);
    for (u, v, weight) in edges {
        w[(u, v)] = weight;
        w[(v, u)] = weight;
    }
    Graph::from_weights(w)
}

/// Graph Laplacian `L = diag(A·1) − A`.
pub fn laplacian(g: &Graph) -> LaplacianMatrix {
    let degrees = g.degrees();
    let mut entries = -g.weights().clone();
    for k in 0..g.n() {
        entries[(k, k)] = degrees[k];
    }
    LaplacianMatrix { entries }
}

/// Relabels a graph by `p`: the returned adjacency is exactly `Pᵀ·A·P`,
/// realized by entry relocation `A'[π(k)][π(l)] = A[k][l]` so the identity
/// `laplacian(permute_graph(g, p)) == Pᵀ·laplacian(g)·P` holds without
/// rounding.
pub fn permute_graph(g: &Graph, p: &Permutation) -> Result<Graph> {
    if p.n() != g.n() {
        return Err(Error::invalid(format!(
            "permutation size {} does not match graph size {}",
            p.n(),
            g.n()
        )));
    }
    let n = g.n();
    let mut w = DMatrix::zeros(n, n);
    for k in 0..n {
        for l in 0..n {
            w[(p.apply(k), p.apply(l))] = g.weights()[(k, l)];
        }
    }
    Graph::from_weights(w)
}

/// Matching disagreement `‖L⁽²⁾ − Pᵀ·L⁽¹⁾·P‖²_F`.
pub fn disagreement(l1: &LaplacianMatrix, l2: &LaplacianMatrix, p: &Permutation) -> Result<f64> {
    let n = l1.n();
    if l2.n() != n || p.n() != n {
        return Err(Error::invalid(format!(
            "size mismatch: L1 is {n}, L2 is {}, P is {}",
            l2.n(),
            p.n()
        )));
    }
    let mut sum = 0.0;
    for k in 0..n {
        for l in 0..n {
            let diff = l2.matrix()[(p.apply(k), p.apply(l))] - l1.matrix()[(k, l)];
            sum += diff * diff;
        }
    }
    Ok(sum)
}

/// `‖X − Sᵀ·X·S‖²_F` for the transposition `S` swapping `a` and `b`, for
/// symmetric `X`, in O(n): only rows/columns `a, b` change under the swap.
pub(crate) fn swap_self_distance_sq(x: &DMatrix<f64>, a: usize, b: usize) -> f64 {
    let n = x.nrows();
    let mut off = 0.0;
    for c in 0..n {
        if c != a && c != b {
            let d = x[(a, c)] - x[(b, c)];
            off += d * d;
        }
    }
    let dd = x[(a, a)] - x[(b, b)];
    4.0 * off + 2.0 * dd * dd
}

/// Verdict of the known-topology identifiability scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum KnownVerdict {
    /// Every transposition strictly changes both graphs.
    Identifiable,
    /// Graph 1 is invariant (within tolerance) under at least one swap.
    SymmetricG1 { offending: Vec<(usize, usize)> },
    /// Graph 1 passed but graph 2 is invariant under at least one swap.
    SymmetricG2 { offending: Vec<(usize, usize)> },
}

/// Known-topology identifiability: the matching is identifiable exactly when
/// `dis(L, L, P) > 0` for every transposition `P` and both graphs. Strict
/// positivity is tested against the tolerance `τ = 1e−9 · ‖L‖²_F`, since
/// Frobenius sums of exactly symmetric graphs are not exactly zero in floats.
pub fn is_identifiable_known(l1: &LaplacianMatrix, l2: &LaplacianMatrix) -> KnownVerdict {
    for (which, l) in [(1u8, l1), (2u8, l2)] {
        let m = l.matrix();
        let tol = 1e-9 * m.iter().map(|x| x * x).sum::<f64>();
        let n = l.n();
        let mut offending = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                if swap_self_distance_sq(m, a, b) <= tol {
                    offending.push((a, b));
                }
            }
        }
        if !offending.is_empty() {
            return match which {
                1 => KnownVerdict::SymmetricG1 { offending },
                _ => KnownVerdict::SymmetricG2 { offending },
            };
        }
    }
    KnownVerdict::Identifiable
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn path3() -> Graph {
        let mut w = DMatrix::zeros(3, 3);
        w[(0, 1)] = 1.0;
        w[(1, 0)] = 1.0;
        w[(1, 2)] = 1.0;
        w[(2, 1)] = 1.0;
        Graph::from_weights(w).unwrap()
    }

    fn star(n: usize) -> Graph {
        let mut w = DMatrix::zeros(n, n);
        for l in 1..n {
            w[(0, l)] = 1.0;
            w[(l, 0)] = 1.0;
        }
        Graph::from_weights(w).unwrap()
    }

    fn cycle(n: usize) -> Graph {
        let mut w = DMatrix::zeros(n, n);
        for k in 0..n {
            let l = (k + 1) % n;
            w[(k, l)] = 1.0;
            w[(l, k)] = 1.0;
        }
        Graph::from_weights(w).unwrap()
    }

    #[test]
    fn er_edge_count_concentrates() {
        let g = gen_er(50, 0.4, 7).unwrap();
        let pairs: f64 = 50.0 * 49.0 / 2.0;
        let mean = pairs * 0.4;
        let sd = (pairs * 0.4 * 0.6).sqrt();
        let e = g.edge_count() as f64;
        assert!((e - mean).abs() <= 4.0 * sd, "edge count {e} too far from {mean}");
    }

    #[test]
    fn er_probability_extremes() {
        assert_eq!(gen_er(5, 0.0, 1).unwrap().edge_count(), 0);
        assert_eq!(gen_er(5, 1.0, 1).unwrap().edge_count(), 10);
        assert!(matches!(gen_er(0, 0.5, 1), Err(Error::InvalidArgument(_))));
        assert!(matches!(gen_er(5, 1.5, 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn er_is_reproducible_and_unweighted() {
        let a = gen_er(30, 0.3, 99).unwrap();
        let b = gen_er(30, 0.3, 99).unwrap();
        assert_eq!(a.weights(), b.weights());
        for k in 0..30 {
            for l in 0..30 {
                let w = a.weights()[(k, l)];
                assert!(w == 0.0 || w == 1.0);
            }
        }
        let c = gen_er(30, 0.3, 100).unwrap();
        assert_ne!(a.weights(), c.weights());
    }

    #[test]
    fn ba_exact_edge_counts() {
        let g = gen_ba(50, 4, 4, 3).unwrap();
        assert_eq!(g.edge_count(), 4 + 45 * 4);
        assert!(g.is_connected());

        let seed_only = gen_ba(4, 4, 4, 1).unwrap();
        assert_eq!(seed_only.edge_count(), 0);

        let tree = gen_ba(6, 2, 1, 9).unwrap();
        assert_eq!(tree.edge_count(), 5);
        assert!(tree.is_connected(), "5 edges on 6 connected nodes form a tree");
    }

    #[test]
    fn ba_rejects_bad_parameters() {
        assert!(matches!(gen_ba(10, 2, 3, 1), Err(Error::InvalidArgument(_))));
        assert!(matches!(gen_ba(3, 4, 2, 1), Err(Error::InvalidArgument(_))));
        assert!(matches!(gen_ba(10, 2, 0, 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn ba_is_reproducible() {
        let a = gen_ba(40, 3, 2, 5).unwrap();
        let b = gen_ba(40, 3, 2, 5).unwrap();
        assert_eq!(a.weights(), b.weights());
    }

    #[test]
    fn wigner_pair_correlation_tracks_beta() {
        let cfg = WignerPairConfig { n: 50, beta: 0.1, seed: 11 };
        let (a1, a2, p) = gen_wigner_pair(&cfg).unwrap();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for k in 0..50 {
            for l in (k + 1)..50 {
                xs.push(a1.weights()[(k, l)]);
                ys.push(a2.weights()[(p.apply(k), p.apply(l))]);
            }
        }
        let m = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / m;
        let my = ys.iter().sum::<f64>() / m;
        let mut cov = 0.0;
        let mut vx = 0.0;
        let mut vy = 0.0;
        for (x, y) in xs.iter().zip(&ys) {
            cov += (x - mx) * (y - my);
            vx += (x - mx) * (x - mx);
            vy += (y - my) * (y - my);
        }
        let corr = cov / (vx.sqrt() * vy.sqrt());
        let expected = (1.0f64 - 0.01).sqrt();
        assert!(
            (corr - expected).abs() <= 0.02,
            "correlation {corr} should be within 0.02 of {expected}"
        );
    }

    #[test]
    fn wigner_pair_beta_to_zero_is_isomorphism() {
        let cfg = WignerPairConfig { n: 20, beta: 1e-9, seed: 4 };
        let (a1, a2, p) = gen_wigner_pair(&cfg).unwrap();
        let relabeled = permute_graph(&a1, &p).unwrap();
        let max_diff = (a2.weights() - relabeled.weights())
            .iter()
            .fold(0.0f64, |acc, x| acc.max(x.abs()));
        assert!(max_diff <= 1e-6, "max entrywise difference {max_diff}");
    }

    #[test]
    fn wigner_pair_identity_recomputes_exactly() {
        let cfg = WignerPairConfig { n: 3, beta: 0.5, seed: 2 };
        let parts = wigner_pair_with_parts(&cfg).unwrap();
        let s = (1.0f64 - 0.25).sqrt();
        let blend =
            parts.a1.weights().map(|x| x * s) + parts.z_prime.map(|x| x * 0.5);
        for k in 0..3 {
            for l in 0..3 {
                let expected = if k == l { 0.0 } else { blend[(k, l)] };
                let got = parts.a2.weights()[(parts.p_star.apply(k), parts.p_star.apply(l))];
                assert_eq!(got, expected, "entry ({k},{l}) must match bit-for-bit");
            }
        }
    }

    #[test]
    fn wigner_rejects_bad_beta() {
        for beta in [0.0, 1.0, -0.5, 1.5] {
            let cfg = WignerPairConfig { n: 5, beta, seed: 1 };
            assert!(gen_wigner_pair(&cfg).is_err(), "beta={beta} must be rejected");
        }
    }

    #[test]
    fn edge_sample_extremes_and_concentration() {
        let g = gen_er(40, 0.5, 8).unwrap();
        let same = edge_sample(&g, 1.0, 3).unwrap();
        assert_eq!(same.weights(), g.weights());
        let empty = edge_sample(&g, 0.0, 3).unwrap();
        assert_eq!(empty.edge_count(), 0);
        assert_eq!(empty.n(), g.n());

        let e = g.edge_count() as f64;
        let kept = edge_sample(&g, 0.9, 5).unwrap().edge_count() as f64;
        let sd = (e * 0.9 * 0.1).sqrt();
        assert!((kept - 0.9 * e).abs() <= 4.0 * sd);
    }

    #[test]
    fn edge_list_happy_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.edges");
        std::fs::write(&path, "0 1\n1 2\n").unwrap();
        let g = load_edge_list(&path).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.weights()[(0, 1)], 1.0);
        assert_eq!(g.weights()[(1, 2)], 1.0);
        assert_eq!(g.weights()[(0, 2)], 0.0);
    }

    #[test]
    fn edge_list_self_loop_is_data_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.edges");
        std::fs::write(&path, "0 0\n").unwrap();
        assert!(matches!(load_edge_list(&path), Err(Error::Data(_))));
    }

    #[test]
    fn edge_list_parses_directives_comments_weights() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.edges");
        std::fs::write(
            &path,
            "# a comment\n% base=1\n\n1 2 0.5  # trailing comment\n2 3 2.0\n2 3 4.0\n",
        )
        .unwrap();
        let g = load_edge_list(&path).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.weights()[(0, 1)], 0.5);
        assert_eq!(g.weights()[(1, 2)], 4.0, "duplicate edge: last weight wins");
    }

    #[test]
    fn edge_list_reports_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.edges");
        std::fs::write(&path, "0 1\nnot numbers\n").unwrap();
        match load_edge_list(&path) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected format error, got {other:?}"),
        }
        std::fs::write(&path, "0 1\n% base=1\n").unwrap();
        assert!(matches!(load_edge_list(&path), Err(Error::Format { line: 2, .. })));
        assert!(matches!(
            load_edge_list(&dir.path().join("missing.edges")),
            Err(Error::Io(_))
        ));
    }

    #[test]
    fn edge_list_round_trip_preserves_graph() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.edges");
        let (a1, _, _) =
            gen_wigner_pair(&WignerPairConfig { n: 8, beta: 0.3, seed: 17 }).unwrap();
        std::fs::write(&path, a1.to_edge_list_string()).unwrap();
        let back = load_edge_list(&path).unwrap();
        assert_eq!(back.weights(), a1.weights());
    }

    #[test]
    fn laplacian_of_path_and_extremes() {
        let l = laplacian(&path3());
        assert_eq!(l.matrix()[(0, 0)], 1.0);
        assert_eq!(l.matrix()[(1, 1)], 2.0);
        assert_eq!(l.matrix()[(2, 2)], 1.0);
        assert_eq!(l.matrix()[(0, 1)], -1.0);
        for k in 0..3 {
            assert_eq!(l.matrix().row(k).sum(), 0.0);
        }
        let empty = Graph::from_weights(DMatrix::zeros(4, 4)).unwrap();
        assert_eq!(laplacian(&empty).matrix(), &DMatrix::zeros(4, 4));
    }

    #[test]
    fn laplacian_rows_sum_to_zero_on_random_graphs() {
        for seed in 0..20 {
            let g = gen_er(15, 0.5, seed).unwrap();
            let l = laplacian(&g);
            let scale = l.matrix().iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1.0);
            for k in 0..15 {
                assert!(l.matrix().row(k).sum().abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn permute_graph_examples() {
        let g = path3();
        let id = Permutation::identity(3);
        assert_eq!(permute_graph(&g, &id).unwrap().weights(), g.weights());

        let swap12 = Permutation::transposition(3, 1, 2).unwrap();
        let h = permute_graph(&g, &swap12).unwrap();
        assert_eq!(h.weights()[(0, 2)], 1.0);
        assert_eq!(h.weights()[(2, 1)], 1.0);
        assert_eq!(h.weights()[(0, 1)], 0.0);

        let back = permute_graph(&h, &swap12).unwrap();
        assert_eq!(back.weights(), g.weights());

        let too_small = Permutation::identity(2);
        assert!(permute_graph(&g, &too_small).is_err());
    }

    #[test]
    fn permute_graph_matches_matrix_conjugation_exactly() {
        let g = gen_er(7, 0.6, 21).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = Permutation::random(7, &mut rng);
        let lp = laplacian(&permute_graph(&g, &p).unwrap());
        let pm = p.matrix();
        let conj = pm.transpose() * laplacian(&g).matrix() * pm;
        assert_eq!(lp.matrix(), &conj);
    }

    #[test]
    fn disagreement_examples() {
        let l = laplacian(&path3());
        let id = Permutation::identity(3);
        assert_eq!(disagreement(&l, &l, &id).unwrap(), 0.0);

        let g = gen_er(10, 0.5, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = Permutation::random(10, &mut rng);
        let g2 = permute_graph(&g, &p).unwrap();
        assert_eq!(
            disagreement(&laplacian(&g), &laplacian(&g2), &p).unwrap(),
            0.0,
            "exact isomorphism must give exactly zero disagreement"
        );

        let swap01 = Permutation::transposition(3, 0, 1).unwrap();
        assert_eq!(disagreement(&l, &l, &swap01).unwrap(), 6.0);
    }

    #[test]
    fn swap_distance_matches_dense_disagreement() {
        let g = gen_er(9, 0.5, 14).unwrap();
        let l = laplacian(&g);
        for a in 0..9 {
            for b in (a + 1)..9 {
                let p = Permutation::transposition(9, a, b).unwrap();
                let dense = disagreement(&l, &l, &p).unwrap();
                let fast = swap_self_distance_sq(l.matrix(), a, b);
                assert!((dense - fast).abs() <= 1e-12 * dense.max(1.0));
            }
        }
    }

    #[test]
    fn known_identifiability_examples() {
        let s = laplacian(&star(4));
        match is_identifiable_known(&s, &s) {
            KnownVerdict::SymmetricG1 { offending } => {
                assert!(offending.contains(&(1, 2)), "leaf swap must be reported");
            }
            other => panic!("star must be symmetric, got {other:?}"),
        }

        let c4 = laplacian(&cycle(4));
        match is_identifiable_known(&c4, &c4) {
            KnownVerdict::SymmetricG1 { offending } => {
                assert!(offending.contains(&(0, 2)), "opposite-node swap must be reported");
            }
            other => panic!("C4 must be symmetric, got {other:?}"),
        }

        let g = gen_er(50, 0.4, 12).unwrap();
        let l1 = laplacian(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = Permutation::random(50, &mut rng);
        let l2 = laplacian(&permute_graph(&g, &p).unwrap());
        assert_eq!(is_identifiable_known(&l1, &l2), KnownVerdict::Identifiable);

        match is_identifiable_known(&l1, &s) {
            KnownVerdict::SymmetricG2 { .. } => {}
            other => panic!("second-graph symmetry must be reported, got {other:?}"),
        }
    }

    #[test]
    fn permutation_basics() {
        let p = Permutation::from_map(vec![2, 0, 1]).unwrap();
        let inv = p.inverse();
        let composed = p.then(&inv).unwrap();
        assert_eq!(composed, Permutation::identity(3));
        assert!(Permutation::from_map(vec![0, 0, 1]).is_err());
        assert!(Permutation::from_map(vec![0, 3, 1]).is_err());
        assert!(Permutation::transposition(3, 1, 1).is_err());
        assert!(Permutation::transposition(3, 1, 5).is_err());

        let m = p.matrix();
        for k in 0..3 {
            for l in 0..3 {
                let expected = if p.apply(k) == l { 1.0 } else { 0.0 };
                assert_eq!(m[(k, l)], expected);
            }
        }

        let x = DVector::from_vec(vec![10.0, 20.0, 30.0]);
        let px = p.permute_vector(&x);
        assert_eq!(px, &m * &x);
    }
}

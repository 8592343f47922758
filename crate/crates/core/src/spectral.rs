//! Deterministic symmetric eigendecomposition, numerical rank, the shared
//! line search that picks how many eigenvectors to match on, absolute-value
//! eigenvector bases, and the blind identifiability scan over transpositions.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::swap_self_distance_sq;

/// Eigendecomposition of a symmetric matrix with a deterministic
/// presentation: eigenvalues descending (ties keep solver order), and each
/// eigenvector's largest-magnitude entry (lowest index on ties) made
/// positive.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenBasis {
    vectors: DMatrix<f64>,
    values: Vec<f64>,
}

impl EigenBasis {
    /// Matrix dimension.
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Orthonormal eigenvectors, one per column, ordered to match
    /// [`values`](Self::values).
    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    /// Eigenvalues in descending order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Assembles a basis directly from parts, bypassing the decomposition;
    /// the caller guarantees orthonormal columns and descending values.
    #[cfg(test)]
    pub(crate) fn from_parts_for_tests(vectors: DMatrix<f64>, values: Vec<f64>) -> Self {
        EigenBasis { vectors, values }
    }

    /// Rebuilds `V·diag(values)·Vᵀ`, for round-trip checks.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut scaled = self.vectors.clone();
        for (j, &v) in self.values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(v);
        }
        &scaled * self.vectors.transpose()
    }
}

/// Symmetric eigendecomposition with descending eigenvalues and canonical
/// signs.
///
/// The input must be symmetric within `1e−8 · max|entry|`; it is exactly
/// symmetrized as `(M + Mᵀ)/2` before decomposition so the result never
/// depends on which triangle carried rounding noise. Identical input bytes
/// produce identical output bytes.
pub fn eig_sym(matrix: &DMatrix<f64>) -> Result<EigenBasis> {
    let n = matrix.nrows();
    if n == 0 {
        return Err(Error::invalid("eig_sym needs a non-empty matrix"));
    }
    if matrix.ncols() != n {
        return Err(Error::invalid(format!(
            "eig_sym needs a square matrix, got {n}x{}",
            matrix.ncols()
        )));
    }
    let mut max_abs = 0.0f64;
    for &x in matrix.iter() {
        if !x.is_finite() {
            return Err(Error::invalid("eig_sym input has non-finite entries"));
        }
        max_abs = max_abs.max(x.abs());
    }
    let mut max_asym = 0.0f64;
    for k in 0..n {
        for l in (k + 1)..n {
            max_asym = max_asym.max((matrix[(k, l)] - matrix[(l, k)]).abs());
        }
    }
    if max_asym > 1e-8 * max_abs {
        return Err(Error::invalid(format!(
            "matrix is not symmetric: max asymmetry {max_asym:e} exceeds tolerance"
        )));
    }
    let sym = (matrix + matrix.transpose()).map(|x| 0.5 * x);
    let eig = nalgebra::SymmetricEigen::try_new(sym, f64::EPSILON, 100_000)
        .ok_or_else(|| Error::numeric("symmetric eigendecomposition did not converge"))?;

    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort: equal eigenvalues keep the solver's column order.
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        // Canonical sign: the entry of largest magnitude (lowest index on
        // ties) is made positive.
        let mut best_abs = -1.0;
        let mut best_idx = 0;
        for (i, &x) in col.iter().enumerate() {
            if x.abs() > best_abs {
                best_abs = x.abs();
                best_idx = i;
            }
        }
        let flip = if col[best_idx] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vectors[(i, dst)] = flip * col[i];
        }
    }
    Ok(EigenBasis { vectors, values })
}

/// Number of eigenvalues exceeding `1e−10` times the largest one. Expects a
/// descending list; returns 0 for an empty list.
pub fn numerical_rank(values: &[f64]) -> usize {
    match values.first() {
        None => 0,
        Some(&top) => {
            let thr = 1e-10 * top;
            values.iter().filter(|&&v| v > thr).count()
        }
    }
}

fn check_descending(values: &[f64], which: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::invalid(format!("{which} eigenvalue list is empty")));
    }
    for w in values.windows(2) {
        // NaN anywhere must fail the check, so test the ordering positively.
        if !matches!(w[0].partial_cmp(&w[1]), Some(Ordering::Greater | Ordering::Equal)) {
            return Err(Error::invalid(format!(
                "{which} eigenvalue list is not descending ({} < {})",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// Line search for the shared spectral dimension `K`.
///
/// Starting at `K = 1`, stop at the first `K` where the worse of the two
/// normalized gaps `(λ̂_K − λ̂_{K+1})/√K` falls to `varsigma` or below;
/// otherwise stop at the cap `max(1, min(rank_cap1, rank_cap2, len−1))`,
/// where `len` is the shorter list length (the gap at `K` needs `λ̂_{K+1}`;
/// values past the end of a list count as 0). Returns the stopping `K`.
pub fn select_k(
    values1: &[f64],
    values2: &[f64],
    varsigma: f64,
    rank_cap1: usize,
    rank_cap2: usize,
) -> Result<usize> {
    check_descending(values1, "first")?;
    check_descending(values2, "second")?;
    if !varsigma.is_finite() || varsigma <= 0.0 {
        return Err(Error::invalid(format!(
            "gap threshold must be a positive finite real, got {varsigma}"
        )));
    }
    if rank_cap1 == 0 || rank_cap2 == 0 {
        return Err(Error::invalid("rank caps must be at least 1"));
    }
    let len = values1.len().min(values2.len());
    let cap = rank_cap1.min(rank_cap2).min(len.saturating_sub(1)).max(1);
    let get = |v: &[f64], idx: usize| v.get(idx).copied().unwrap_or(0.0);
    for k in 1..cap {
        let sqrt_k = (k as f64).sqrt();
        let gap1 = (get(values1, k - 1) - get(values1, k)) / sqrt_k;
        let gap2 = (get(values2, k - 1) - get(values2, k)) / sqrt_k;
        if gap1.min(gap2) <= varsigma {
            return Ok(k);
        }
    }
    Ok(cap)
}

/// The first `K` eigenvector columns with entrywise absolute values applied —
/// the sign-ambiguity-free object the blind matcher aligns. Keeps the signed
/// columns and source eigenvalues alongside, which the identifiability scan
/// needs for degenerate eigenvalue clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectedBasis {
    abs_vectors: DMatrix<f64>,
    source_values: Vec<f64>,
    signed: Option<DMatrix<f64>>,
}

impl SelectedBasis {
    /// Number of rows (nodes).
    pub fn n(&self) -> usize {
        self.abs_vectors.nrows()
    }

    /// Number of selected columns.
    pub fn k(&self) -> usize {
        self.abs_vectors.ncols()
    }

    /// The entrywise-absolute eigenvector block (n × K, all entries ≥ 0).
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.abs_vectors
    }

    /// Eigenvalues the selected columns belong to, descending.
    pub fn source_values(&self) -> &[f64] {
        &self.source_values
    }

    /// Builds a selected basis from an already-absolute block and its
    /// eigenvalues. Without signed columns, the identifiability scan falls
    /// back to treating every column independently (degenerate clusters need
    /// signed vectors to form projectors).
    pub fn from_parts(abs_vectors: DMatrix<f64>, source_values: Vec<f64>) -> Result<Self> {
        let k = abs_vectors.ncols();
        if k == 0 || abs_vectors.nrows() == 0 {
            return Err(Error::invalid("selected basis must be non-empty"));
        }
        if k > abs_vectors.nrows() {
            return Err(Error::invalid(format!(
                "selected basis has more columns ({k}) than rows ({})",
                abs_vectors.nrows()
            )));
        }
        if source_values.len() != k {
            return Err(Error::invalid(format!(
                "expected {k} source eigenvalues, got {}",
                source_values.len()
            )));
        }
        check_descending(&source_values, "source")?;
        for &x in abs_vectors.iter() {
            if !x.is_finite() || x < 0.0 {
                return Err(Error::invalid(
                    "absolute basis entries must be finite and non-negative",
                ));
            }
        }
        Ok(SelectedBasis { abs_vectors, source_values, signed: None })
    }
}

/// Takes the first `k` columns of an eigenbasis and applies entrywise
/// absolute value, carrying the signed columns along for the scan.
pub fn abs_basis(basis: &EigenBasis, k: usize) -> Result<SelectedBasis> {
    if k == 0 || k > basis.n() {
        return Err(Error::invalid(format!(
            "selected dimension must satisfy 1 <= k <= {}, got {k}",
            basis.n()
        )));
    }
    let signed = basis.vectors.columns(0, k).into_owned();
    Ok(SelectedBasis {
        abs_vectors: signed.map(f64::abs),
        source_values: basis.values[..k].to_vec(),
        signed: Some(signed),
    })
}

/// Which test decides blind identifiability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlindMode {
    /// Default: each graph is scanned against its own basis — a swap with a
    /// small self-distance statistic signals a structural symmetry that makes
    /// the matching non-unique.
    SelfSwap,
    /// Literal cross-graph reading: identifiable only if the cross-basis
    /// distance stays within `eps` for every transposition.
    CrossGraph,
}

impl std::str::FromStr for BlindMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "self_swap" => Ok(BlindMode::SelfSwap),
            "cross_graph" => Ok(BlindMode::CrossGraph),
            other => Err(Error::invalid(format!(
                "unknown identifiability mode '{other}' (expected self_swap or cross_graph)"
            ))),
        }
    }
}

/// One transposition flagged by the blind scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffendingSwap {
    /// Basis the swap was applied to (1 or 2); cross-graph distances always
    /// swap rows of basis 1.
    pub graph: u8,
    /// Smaller swapped node index.
    pub a: usize,
    /// Larger swapped node index.
    pub b: usize,
    /// The statistic that triggered the flag.
    pub distance: f64,
}

/// Outcome of the blind identifiability scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum BlindVerdict {
    /// No transposition crossed the threshold. `closest_statistic` is the
    /// statistic that came nearest to it: the minimum self-swap statistic, or
    /// the maximum cross-graph distance.
    Identifiable { closest_statistic: f64 },
    /// At least one transposition crossed the threshold.
    Ambiguous { offending: Vec<OffendingSwap> },
}

impl BlindVerdict {
    /// True for the identifiable variant.
    pub fn is_identifiable(&self) -> bool {
        matches!(self, BlindVerdict::Identifiable { .. })
    }
}

/// Groups selected indices whose adjacent eigenvalues nearly coincide:
/// indices `k−1` and `k` share a cluster when
/// `λ_{k−1} − λ_k ≤ 1e−2 · max(|λ_{k−1}|, 1e−300)`.
fn degenerate_clusters(values: &[f64]) -> Vec<Vec<usize>> {
    let mut clusters = Vec::new();
    let mut current = vec![0usize];
    for k in 1..values.len() {
        if values[k - 1] - values[k] <= 1e-2 * values[k - 1].abs().max(1e-300) {
            current.push(k);
        } else {
            clusters.push(std::mem::take(&mut current));
            current = vec![k];
        }
    }
    clusters.push(current);
    clusters
}

/// Per-swap self-distance statistics for one basis, every pair `(a, b)` with
/// `a < b`, in lexicographic order.
///
/// The statistic for a swap is `√(n · s²)` where `s²` accumulates, per
/// eigenvalue cluster: for a well-separated column `k`, twice the squared
/// difference of the absolute entries, `2(Ū[a,k] − Ū[b,k])²`; for a
/// near-degenerate cluster `c`, the conjugation distance of its spectral
/// projector, `‖Π_c − Pᵀ·Π_c·P‖²_F`, which is invariant to the arbitrary
/// basis rotation inside the cluster. When no signed columns are available,
/// every column is treated as well-separated.
fn self_swap_statistics(basis: &SelectedBasis) -> Vec<(usize, usize, f64)> {
    let n = basis.n();
    let abs = &basis.abs_vectors;
    let mut clusters = degenerate_clusters(&basis.source_values);
    if basis.signed.is_none() {
        clusters = (0..basis.k()).map(|k| vec![k]).collect();
    }
    let projectors: Vec<(usize, DMatrix<f64>)> = clusters
        .iter()
        .enumerate()
        .filter(|(_, c)| c.len() > 1)
        .map(|(ci, c)| {
            let signed = basis.signed.as_ref().expect("clusters require signed columns");
            let mut block = DMatrix::zeros(n, c.len());
            for (j, &k) in c.iter().enumerate() {
                block.set_column(j, &signed.column(k));
            }
            (ci, &block * block.transpose())
        })
        .collect();
    let singleton_cols: Vec<usize> = clusters
        .iter()
        .filter(|c| c.len() == 1)
        .map(|c| c[0])
        .collect();

    (0..n)
        .into_par_iter()
        .map(|a| {
            let mut row = Vec::with_capacity(n - a - 1);
            for b in (a + 1)..n {
                let mut s2 = 0.0;
                for &k in &singleton_cols {
                    let d = abs[(a, k)] - abs[(b, k)];
                    s2 += 2.0 * d * d;
                }
                for (_, pi) in &projectors {
                    s2 += swap_self_distance_sq(pi, a, b);
                }
                row.push((a, b, (n as f64 * s2).sqrt()));
            }
            row
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Cross-basis distances `‖Ū⁽²⁾ − Pᵀ·Ū⁽¹⁾‖_F` for every transposition `P`,
/// in lexicographic pair order. A transposition only exchanges two rows, so
/// each distance is an O(K) update of the unswapped baseline.
fn cross_swap_distances(b1: &SelectedBasis, b2: &SelectedBasis) -> Vec<(usize, usize, f64)> {
    let n = b1.n();
    let k = b1.k();
    let u1 = &b1.abs_vectors;
    let u2 = &b2.abs_vectors;
    let row_diff_sq = |r2: usize, r1: usize| -> f64 {
        let mut s = 0.0;
        for j in 0..k {
            let d = u2[(r2, j)] - u1[(r1, j)];
            s += d * d;
        }
        s
    };
    let matched: Vec<f64> = (0..n).map(|r| row_diff_sq(r, r)).collect();
    let base: f64 = matched.iter().sum();
    (0..n)
        .into_par_iter()
        .map(|a| {
            let mut row = Vec::with_capacity(n - a - 1);
            for b in (a + 1)..n {
                let d2 = base - matched[a] - matched[b]
                    + row_diff_sq(a, b)
                    + row_diff_sq(b, a);
                row.push((a, b, d2.max(0.0).sqrt()));
            }
            row
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Decides, from the two selected bases alone, whether the matching is
/// identifiable at threshold `eps` (`+∞` is allowed and makes the self-swap
/// test flag everything).
pub fn identifiability_blind(
    b1: &SelectedBasis,
    b2: &SelectedBasis,
    eps: f64,
    mode: BlindMode,
) -> Result<BlindVerdict> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::invalid(format!("threshold must be positive, got {eps}")));
    }
    if b1.n() != b2.n() || b1.k() != b2.k() {
        return Err(Error::invalid(format!(
            "basis dimensions must match: {}x{} vs {}x{}",
            b1.n(),
            b1.k(),
            b2.n(),
            b2.k()
        )));
    }
    if b1.n() < 2 {
        return Ok(BlindVerdict::Identifiable { closest_statistic: f64::INFINITY });
    }
    match mode {
        BlindMode::SelfSwap => {
            let mut offending = Vec::new();
            let mut closest = f64::INFINITY;
            for (graph, basis) in [(1u8, b1), (2u8, b2)] {
                for (a, b, distance) in self_swap_statistics(basis) {
                    closest = closest.min(distance);
                    if distance <= eps {
                        offending.push(OffendingSwap { graph, a, b, distance });
                    }
                }
            }
            if offending.is_empty() {
                Ok(BlindVerdict::Identifiable { closest_statistic: closest })
            } else {
                Ok(BlindVerdict::Ambiguous { offending })
            }
        }
        BlindMode::CrossGraph => {
            let mut offending = Vec::new();
            let mut closest = 0.0f64;
            for (a, b, distance) in cross_swap_distances(b1, b2) {
                closest = closest.max(distance);
                if distance > eps {
                    offending.push(OffendingSwap { graph: 1, a, b, distance });
                }
            }
            if offending.is_empty() {
                Ok(BlindVerdict::Identifiable { closest_statistic: closest })
            } else {
                Ok(BlindVerdict::Ambiguous { offending })
            }
        }
    }
}

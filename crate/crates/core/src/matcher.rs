//! Linear assignment solvers (exact Hungarian, greedy, factorial oracle) and
//! the two matching pipelines: the known-topology spectral matcher and the
//! blind pipeline that works from sample covariances alone.

use std::collections::BinaryHeap;
use std::time::Instant;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{disagreement, KnownVerdict, LaplacianMatrix, Permutation};
use crate::signal::{sample_covariance, CovarianceEstimate, SignalBatch};
use crate::spectral::{
    abs_basis, eig_sym, identifiability_blind, numerical_rank, select_k, BlindMode, BlindVerdict,
    SelectedBasis,
};

/// Square profit matrix `G` for the assignment problem
/// `max_P tr(Pᵀ·G) = max_π Σ_k G[k][π(k)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfitMatrix {
    entries: DMatrix<f64>,
}

impl ProfitMatrix {
    /// Wraps a square matrix of finite profits.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 || entries.ncols() != n {
            return Err(Error::invalid("profit matrix must be square and non-empty"));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("profit matrix entries must be finite"));
        }
        Ok(ProfitMatrix { entries })
    }

    /// Profit `G = Ū⁽¹⁾·(Ū⁽²⁾)ᵀ` from two selected bases.
    pub fn from_factors(b1: &SelectedBasis, b2: &SelectedBasis) -> Result<Self> {
        if b1.n() != b2.n() || b1.k() != b2.k() {
            return Err(Error::invalid(format!(
                "factor dimensions must match: {}x{} vs {}x{}",
                b1.n(),
                b1.k(),
                b2.n(),
                b2.k()
            )));
        }
        ProfitMatrix::new(b1.matrix() * b2.matrix().transpose())
    }

    /// Problem size.
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    /// The profit entries.
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }
}

/// The assignment objective `tr(Pᵀ·G) = Σ_k G[k][π(k)]`.
pub fn trace_objective(profit: &ProfitMatrix, p: &Permutation) -> Result<f64> {
    if p.n() != profit.n() {
        return Err(Error::invalid(format!(
            "permutation size {} does not match profit size {}",
            p.n(),
            profit.n()
        )));
    }
    Ok((0..profit.n()).map(|k| profit.entries[(k, p.apply(k))]).sum())
}

/// Exact maximum-profit assignment via shortest augmenting paths with dual
/// potentials, O(n³). Deterministic: scan order breaks ties.
pub fn hungarian(profit: &ProfitMatrix) -> Permutation {
    let n = profit.n();
    // Minimize cost = −profit; potentials absorb the sign change exactly.
    let cost = |i: usize, j: usize| -profit.entries[(i, j)];
    // 1-based arrays; index 0 is the virtual unmatched column.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut matched_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut map = vec![0usize; n];
    for j in 1..=n {
        map[matched_row[j] - 1] = j - 1;
    }
    Permutation::from_map(map).expect("augmenting paths produce a bijection")
}

#[derive(Debug)]
struct Candidate {
    value: f64,
    row: usize,
    col: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.value.total_cmp(&other.value).is_eq() && self.row == other.row && self.col == other.col
    }
}

impl Eq for Candidate {}

impl Ord for Candidate {
    // Max-heap preference: larger value, then smaller row, then smaller column.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.value
            .total_cmp(&other.value)
            .then_with(|| other.row.cmp(&self.row))
            .then_with(|| other.col.cmp(&self.col))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Greedy assignment: repeatedly take the largest uncovered entry (ties:
/// smallest row, then column) and cover its row and column. Each row's
/// columns are pre-sorted once and covered columns are skipped lazily, so a
/// row keeps exactly one live heap candidate.
pub fn greedy_assign(profit: &ProfitMatrix) -> Permutation {
    let n = profit.n();
    let g = profit.entries();
    let row_order: Vec<Vec<usize>> = (0..n)
        .map(|r| {
            let mut cols: Vec<usize> = (0..n).collect();
            cols.sort_by(|&a, &b| g[(r, b)].total_cmp(&g[(r, a)]).then(a.cmp(&b)));
            cols
        })
        .collect();
    let mut ptr = vec![0usize; n];
    let mut row_covered = vec![false; n];
    let mut col_covered = vec![false; n];
    let mut heap: BinaryHeap<Candidate> = (0..n)
        .map(|r| Candidate { value: g[(r, row_order[r][0])], row: r, col: row_order[r][0] })
        .collect();
    let mut map = vec![0usize; n];
    let mut assigned = 0usize;
    while assigned < n {
        let cand = heap.pop().expect("an uncovered row always has a live candidate");
        if row_covered[cand.row] {
            continue;
        }
        if col_covered[cand.col] {
            let r = cand.row;
            loop {
                ptr[r] += 1;
                let c = row_order[r][ptr[r]];
                if !col_covered[c] {
                    heap.push(Candidate { value: g[(r, c)], row: r, col: c });
                    break;
                }
            }
            continue;
        }
        map[cand.row] = cand.col;
        row_covered[cand.row] = true;
        col_covered[cand.col] = true;
        assigned += 1;
    }
    Permutation::from_map(map).expect("greedy covers each row and column once")
}

/// Factorial-enumeration oracle: tries every permutation in lexicographic
/// order and keeps the first maximizer, so ties resolve to the
/// lexicographically smallest image vector. Guarded to n ≤ 10.
pub fn exhaustive_assign(profit: &ProfitMatrix) -> Result<Permutation> {
    let n = profit.n();
    if n > 10 {
        return Err(Error::invalid(format!(
            "exhaustive enumeration is limited to n <= 10, got {n}"
        )));
    }
    let g = profit.entries();
    let mut best_obj = f64::NEG_INFINITY;
    let mut best_map: Vec<usize> = Vec::new();
    let mut current: Vec<usize> = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn recurse(
        g: &DMatrix<f64>,
        n: usize,
        current: &mut Vec<usize>,
        used: &mut Vec<bool>,
        partial: f64,
        best_obj: &mut f64,
        best_map: &mut Vec<usize>,
    ) {
        if current.len() == n {
            if partial > *best_obj {
                *best_obj = partial;
                *best_map = current.clone();
            }
            return;
        }
        let row = current.len();
        for col in 0..n {
            if !used[col] {
                used[col] = true;
                current.push(col);
                recurse(g, n, current, used, partial + g[(row, col)], best_obj, best_map);
                current.pop();
                used[col] = false;
            }
        }
    }
    recurse(g, n, &mut current, &mut used, 0.0, &mut best_obj, &mut best_map);
    Permutation::from_map(best_map)
}

/// Assignment solver choice; `Auto` resolves to Hungarian below 100 nodes and
/// greedy at or above it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Hungarian,
    Greedy,
    Auto,
}

impl Solver {
    /// The concrete solver `Auto` falls to at problem size `n`.
    pub fn resolve(self, n: usize) -> Solver {
        match self {
            Solver::Auto => {
                if n < 100 {
                    Solver::Hungarian
                } else {
                    Solver::Greedy
                }
            }
            other => other,
        }
    }

    fn solve(self, profit: &ProfitMatrix) -> Permutation {
        match self.resolve(profit.n()) {
            Solver::Hungarian => hungarian(profit),
            Solver::Greedy => greedy_assign(profit),
            Solver::Auto => unreachable!("resolve never returns Auto"),
        }
    }
}

impl std::str::FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hungarian" => Ok(Solver::Hungarian),
            "greedy" => Ok(Solver::Greedy),
            "auto" => Ok(Solver::Auto),
            other => Err(Error::invalid(format!(
                "unknown solver '{other}' (expected hungarian, greedy, or auto)"
            ))),
        }
    }
}

/// Identifiability evidence attached to a match report.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "source", content = "verdict", rename_all = "snake_case")]
pub enum IdentifiabilityReport {
    /// The pipeline did not run a scan (known-topology matcher).
    NotChecked,
    /// Verdict of the known-topology transposition scan.
    Known(KnownVerdict),
    /// Verdict of the blind scan on the selected bases.
    Blind(BlindVerdict),
}

/// Wall-clock seconds spent in each pipeline stage.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct WallTimes {
    pub covariance_s: f64,
    pub eigendecomposition_s: f64,
    pub identifiability_s: f64,
    pub selection_s: f64,
    pub assignment_s: f64,
    pub total_s: f64,
}

/// Everything a matching run produces.
#[derive(Debug, Clone, Serialize)]
pub struct MatchReport {
    /// Recovered mapping from graph-1 nodes to graph-2 nodes.
    pub permutation: Permutation,
    /// Assignment objective `tr(P̂ᵀ·G)`.
    pub objective: f64,
    /// `‖L⁽²⁾ − P̂ᵀL⁽¹⁾P̂‖²_F` when both Laplacians were available.
    pub disagreement: Option<f64>,
    /// Fraction of nodes mapped as the ground truth maps them, when known.
    pub fraction_correct: Option<f64>,
    /// Identifiability evidence gathered along the way.
    pub identifiability: IdentifiabilityReport,
    /// Spectral dimension the assignment was solved over.
    pub k_used: usize,
    /// The solver that actually ran (never `auto`).
    pub solver: Solver,
    /// Per-stage wall-clock timings.
    pub wall_times: WallTimes,
    /// Human-readable warnings (non-distinct eigenvalues, ambiguity, …).
    pub notes: Vec<String>,
}

impl MatchReport {
    /// Fills `fraction_correct` against a ground-truth permutation.
    pub fn set_ground_truth(&mut self, p_star: &Permutation) -> Result<()> {
        self.fraction_correct = Some(crate::analysis::fraction_correct(&self.permutation, p_star)?);
        Ok(())
    }
}

fn distinctness_note(which: u8, values: &[f64]) -> Option<String> {
    let scale = values.iter().fold(0.0f64, |a, &x| a.max(x.abs())).max(1e-300);
    let min_gap = values
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(f64::INFINITY, f64::min);
    if min_gap <= 1e-9 * scale {
        Some(format!(
            "graph {which} eigenvalues are not distinct (min gap {min_gap:.3e}); \
             the matching may be non-unique"
        ))
    } else {
        None
    }
}

/// Known-topology spectral matcher: aligns the entrywise-absolute full
/// Laplacian eigenbases (descending eigenvalue order on both sides) and
/// solves the assignment over `V̄⁽¹⁾(V̄⁽²⁾)ᵀ`.
pub fn spectral_match_known(
    l1: &LaplacianMatrix,
    l2: &LaplacianMatrix,
    solver: Solver,
) -> Result<MatchReport> {
    if l1.n() != l2.n() {
        return Err(Error::invalid(format!(
            "graph sizes must match, got {} and {}",
            l1.n(),
            l2.n()
        )));
    }
    let n = l1.n();
    let t_total = Instant::now();
    let t_eig = Instant::now();
    let e1 = eig_sym(l1.matrix())?;
    let e2 = eig_sym(l2.matrix())?;
    let eig_s = t_eig.elapsed().as_secs_f64();

    let mut notes = Vec::new();
    for (which, e) in [(1u8, &e1), (2u8, &e2)] {
        if let Some(note) = distinctness_note(which, e.values()) {
            notes.push(note);
        }
    }

    let b1 = abs_basis(&e1, n)?;
    let b2 = abs_basis(&e2, n)?;
    let profit = ProfitMatrix::from_factors(&b1, &b2)?;
    let t_assign = Instant::now();
    let p_hat = solver.solve(&profit);
    let assign_s = t_assign.elapsed().as_secs_f64();
    let objective = trace_objective(&profit, &p_hat)?;
    let dis = disagreement(l1, l2, &p_hat)?;

    Ok(MatchReport {
        permutation: p_hat,
        objective,
        disagreement: Some(dis),
        fraction_correct: None,
        identifiability: IdentifiabilityReport::NotChecked,
        k_used: n,
        solver: solver.resolve(n),
        wall_times: WallTimes {
            covariance_s: 0.0,
            eigendecomposition_s: eig_s,
            identifiability_s: 0.0,
            selection_s: 0.0,
            assignment_s: assign_s,
            total_s: t_total.elapsed().as_secs_f64(),
        },
        notes,
    })
}

/// Tuning knobs for the blind pipeline.
#[derive(Debug, Clone)]
pub struct BlindParams {
    /// Identifiability threshold ε.
    pub eps: f64,
    /// Gap threshold ς for the spectral-dimension line search.
    pub varsigma: f64,
    /// Assignment solver.
    pub solver: Solver,
    /// Which identifiability test to run.
    pub identifiability_mode: BlindMode,
    /// Skip the line search and match on exactly this many eigenvectors.
    pub k_override: Option<usize>,
}

/// Blind pipeline from covariance estimates: eigendecompose, select K, scan
/// identifiability, and solve the assignment over `Ū_K⁽¹⁾(Ū_K⁽²⁾)ᵀ`. An
/// ambiguous verdict is recorded in the report, not fatal — the caller
/// decides whether to discard the match.
pub fn blind_match_from_covariances(
    c1: &CovarianceEstimate,
    c2: &CovarianceEstimate,
    params: &BlindParams,
) -> Result<MatchReport> {
    if c1.n() != c2.n() {
        return Err(Error::invalid(format!(
            "covariance sizes must match, got {} and {}",
            c1.n(),
            c2.n()
        )));
    }
    let n = c1.n();
    let t_total = Instant::now();

    let t_eig = Instant::now();
    let e1 = eig_sym(c1.matrix())?;
    let e2 = eig_sym(c2.matrix())?;
    let eig_s = t_eig.elapsed().as_secs_f64();

    let t_select = Instant::now();
    let k = match params.k_override {
        Some(k) => {
            if k == 0 || k > n {
                return Err(Error::invalid(format!(
                    "k_override must satisfy 1 <= k <= {n}, got {k}"
                )));
            }
            k
        }
        None => select_k(
            e1.values(),
            e2.values(),
            params.varsigma,
            numerical_rank(e1.values()),
            numerical_rank(e2.values()),
        )?,
    };
    let select_s = t_select.elapsed().as_secs_f64();

    let b1 = abs_basis(&e1, k)?;
    let b2 = abs_basis(&e2, k)?;

    let t_ident = Instant::now();
    let verdict = identifiability_blind(&b1, &b2, params.eps, params.identifiability_mode)?;
    let ident_s = t_ident.elapsed().as_secs_f64();
    let mut notes = Vec::new();
    if let BlindVerdict::Ambiguous { offending } = &verdict {
        notes.push(format!(
            "identifiability scan flagged {} swap(s); the matching may be unreliable",
            offending.len()
        ));
    }

    let profit = ProfitMatrix::from_factors(&b1, &b2)?;
    let t_assign = Instant::now();
    let p_hat = params.solver.solve(&profit);
    let assign_s = t_assign.elapsed().as_secs_f64();
    let objective = trace_objective(&profit, &p_hat)?;

    Ok(MatchReport {
        permutation: p_hat,
        objective,
        disagreement: None,
        fraction_correct: None,
        identifiability: IdentifiabilityReport::Blind(verdict),
        k_used: k,
        solver: params.solver.resolve(n),
        wall_times: WallTimes {
            covariance_s: 0.0,
            eigendecomposition_s: eig_s,
            identifiability_s: ident_s,
            selection_s: select_s,
            assignment_s: assign_s,
            total_s: t_total.elapsed().as_secs_f64(),
        },
        notes,
    })
}

/// Blind matcher: recovers the node correspondence of two unseen graphs from
/// raw signal batches alone.
pub fn blind_match(
    batch1: &SignalBatch,
    batch2: &SignalBatch,
    params: &BlindParams,
) -> Result<MatchReport> {
    if batch1.n() != batch2.n() {
        return Err(Error::invalid(format!(
            "signal batches must share the node count, got {} and {}",
            batch1.n(),
            batch2.n()
        )));
    }
    if batch1.m() < 2 || batch2.m() < 2 {
        return Err(Error::InsufficientData(format!(
            "covariance estimation needs at least 2 samples per graph, got {} and {}",
            batch1.m(),
            batch2.m()
        )));
    }
    let t_total = Instant::now();
    let t_cov = Instant::now();
    let c1 = sample_covariance(batch1)?;
    let c2 = sample_covariance(batch2)?;
    let cov_s = t_cov.elapsed().as_secs_f64();
    let mut report = blind_match_from_covariances(&c1, &c2, params)?;
    report.wall_times.covariance_s = cov_s;
    report.wall_times.total_s = t_total.elapsed().as_secs_f64();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_er, laplacian, permute_graph};
    use crate::signal::{generate_signals, true_covariance, Excitation, GraphFilter, SignalModel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn profit(rows: &[&[f64]]) -> ProfitMatrix {
        let n = rows.len();
        let flat: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        ProfitMatrix::new(DMatrix::from_row_slice(n, n, &flat)).unwrap()
    }

    #[test]
    fn hungarian_examples() {
        let p = profit(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let m = hungarian(&p);
        assert_eq!(m.as_slice(), &[0, 1]);
        assert_eq!(trace_objective(&p, &m).unwrap(), 4.0);

        let p = profit(&[&[0.9, 0.8], &[0.8, 0.1]]);
        let m = hungarian(&p);
        assert_eq!(m.as_slice(), &[1, 0]);
        assert!((trace_objective(&p, &m).unwrap() - 1.6).abs() <= 1e-15);

        let p = profit(&[&[-1.0, 0.0], &[0.0, -1.0]]);
        let m = hungarian(&p);
        assert_eq!(trace_objective(&p, &m).unwrap(), 0.0, "negative profits handled");
    }

    #[test]
    fn hungarian_matches_factorial_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        for trial in 0..100 {
            let n = 6;
            let entries = DMatrix::from_fn(n, n, |_, _| {
                rand::Rng::random_range(&mut rng, -1.0..1.0)
            });
            let p = ProfitMatrix::new(entries).unwrap();
            let fast = hungarian(&p);
            let oracle = exhaustive_assign(&p).unwrap();
            let fast_obj = trace_objective(&p, &fast).unwrap();
            let oracle_obj = trace_objective(&p, &oracle).unwrap();
            assert!(
                (fast_obj - oracle_obj).abs() <= 1e-12,
                "trial {trial}: {fast_obj} vs oracle {oracle_obj}"
            );
            assert_eq!(fast, oracle, "trial {trial}: continuous profits have a unique optimum");
        }
    }

    #[test]
    fn greedy_examples_and_tie_breaks() {
        let p = profit(&[&[2.0, 1.0], &[1.0, 2.0]]);
        assert_eq!(greedy_assign(&p).as_slice(), &[0, 1]);

        let p = profit(&[&[0.9, 0.8], &[0.8, 0.1]]);
        let m = greedy_assign(&p);
        assert_eq!(m.as_slice(), &[0, 1], "0.9 is taken first, leaving 0.1");
        assert!((trace_objective(&p, &m).unwrap() - 1.0).abs() <= 1e-15);

        let p = profit(&[&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0]]);
        assert_eq!(greedy_assign(&p).as_slice(), &[0, 1, 2], "ties resolve lexicographically");
    }

    #[test]
    fn greedy_never_beats_hungarian() {
        let mut rng = ChaCha8Rng::seed_from_u64(200);
        for _ in 0..50 {
            let n = 8;
            let entries = DMatrix::from_fn(n, n, |_, _| {
                rand::Rng::random_range(&mut rng, 0.0..1.0)
            });
            let p = ProfitMatrix::new(entries).unwrap();
            let g = trace_objective(&p, &greedy_assign(&p)).unwrap();
            let h = trace_objective(&p, &hungarian(&p)).unwrap();
            assert!(g <= h + 1e-12, "greedy {g} must not exceed optimal {h}");
        }
    }

    #[test]
    fn exhaustive_guard_and_tie_break() {
        let big = ProfitMatrix::new(DMatrix::zeros(11, 11)).unwrap();
        assert!(matches!(exhaustive_assign(&big), Err(Error::InvalidArgument(_))));
        let flat = profit(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert_eq!(
            exhaustive_assign(&flat).unwrap().as_slice(),
            &[0, 1],
            "ties resolve to the lexicographically smallest map"
        );
    }

    #[test]
    fn profit_matrix_validates() {
        assert!(ProfitMatrix::new(DMatrix::zeros(0, 0)).is_err());
        assert!(ProfitMatrix::new(DMatrix::zeros(2, 3)).is_err());
        let nan = DMatrix::from_row_slice(1, 1, &[f64::NAN]);
        assert!(ProfitMatrix::new(nan).is_err());
    }

    #[test]
    fn solver_parsing_and_auto_resolution() {
        assert_eq!("hungarian".parse::<Solver>().unwrap(), Solver::Hungarian);
        assert_eq!("greedy".parse::<Solver>().unwrap(), Solver::Greedy);
        assert_eq!("auto".parse::<Solver>().unwrap(), Solver::Auto);
        assert!("fast".parse::<Solver>().is_err());
        assert_eq!(Solver::Auto.resolve(99), Solver::Hungarian);
        assert_eq!(Solver::Auto.resolve(100), Solver::Greedy);
        assert_eq!(Solver::Greedy.resolve(5), Solver::Greedy);
    }

    #[test]
    fn known_matcher_recovers_exact_isomorphism() {
        let g = gen_er(20, 0.4, 12).unwrap();
        let l1 = laplacian(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let p_star = Permutation::random(20, &mut rng);
        let l2 = laplacian(&permute_graph(&g, &p_star).unwrap());
        let mut report = spectral_match_known(&l1, &l2, Solver::Hungarian).unwrap();
        assert_eq!(report.permutation, p_star);
        assert_eq!(report.disagreement, Some(0.0));
        assert!(report.notes.is_empty(), "distinct spectrum expected: {:?}", report.notes);
        assert_eq!(report.k_used, 20);
        assert_eq!(report.solver, Solver::Hungarian);
        report.set_ground_truth(&p_star).unwrap();
        assert_eq!(report.fraction_correct, Some(1.0));
        let profit = {
            let e1 = eig_sym(l1.matrix()).unwrap();
            let e2 = eig_sym(l2.matrix()).unwrap();
            ProfitMatrix::from_factors(
                &abs_basis(&e1, 20).unwrap(),
                &abs_basis(&e2, 20).unwrap(),
            )
            .unwrap()
        };
        let recomputed = trace_objective(&profit, &report.permutation).unwrap();
        assert!((report.objective - recomputed).abs() <= 1e-9, "objective invariant");
    }

    #[test]
    fn known_matcher_on_identical_graphs_reaches_the_ceiling() {
        let g = gen_er(12, 0.5, 40).unwrap();
        let l = laplacian(&g);
        let report = spectral_match_known(&l, &l, Solver::Hungarian).unwrap();
        assert!((report.objective - 12.0).abs() <= 1e-9, "objective must reach n");
        assert_eq!(report.permutation, Permutation::identity(12));
    }

    #[test]
    fn known_matcher_flags_degenerate_spectra_and_size_mismatch() {
        let mut w = DMatrix::zeros(4, 4);
        for l in 1..4 {
            w[(0, l)] = 1.0;
            w[(l, 0)] = 1.0;
        }
        let star = laplacian(&crate::graph::Graph::from_weights(w).unwrap());
        let report = spectral_match_known(&star, &star, Solver::Hungarian).unwrap();
        assert!(!report.notes.is_empty(), "repeated eigenvalues must be flagged");

        let small = laplacian(&gen_er(3, 0.5, 1).unwrap());
        assert!(spectral_match_known(&star, &small, Solver::Hungarian).is_err());
    }

    #[test]
    fn trace_ceiling_holds_for_random_permutations() {
        let g1 = gen_er(8, 0.5, 3).unwrap();
        let g2 = gen_er(8, 0.5, 4).unwrap();
        let e1 = eig_sym(laplacian(&g1).matrix()).unwrap();
        let e2 = eig_sym(laplacian(&g2).matrix()).unwrap();
        let full = ProfitMatrix::from_factors(
            &abs_basis(&e1, 8).unwrap(),
            &abs_basis(&e2, 8).unwrap(),
        )
        .unwrap();
        let selected = ProfitMatrix::from_factors(
            &abs_basis(&e1, 3).unwrap(),
            &abs_basis(&e2, 3).unwrap(),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let p = Permutation::random(8, &mut rng);
            assert!(trace_objective(&full, &p).unwrap() <= 8.0 + 1e-9);
            assert!(trace_objective(&selected, &p).unwrap() <= 3.0 + 1e-9);
        }
    }

    fn blind_params() -> BlindParams {
        BlindParams {
            eps: 0.5,
            varsigma: 1.0 / (10.0f64 * 10.0).powi(2),
            solver: Solver::Hungarian,
            identifiability_mode: BlindMode::SelfSwap,
            k_override: None,
        }
    }

    #[test]
    fn blind_match_recovers_a_small_instance() {
        let n = 10;
        let g1 = gen_er(n, 0.5, 77).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(78);
        let p_star = Permutation::random(n, &mut rng);
        let g2 = permute_graph(&g1, &p_star).unwrap();
        let model1 = SignalModel {
            filter: GraphFilter::Resolvent { alpha: 0.1 },
            sigma2: 0.01,
            excitation: Excitation::StandardNormal,
        };
        let model2 = SignalModel {
            filter: GraphFilter::Resolvent { alpha: 0.3 },
            sigma2: 0.01,
            excitation: Excitation::StandardNormal,
        };
        let y1 = generate_signals(&model1, &laplacian(&g1), 50_000, 1001).unwrap();
        let y2 = generate_signals(&model2, &laplacian(&g2), 50_000, 1002).unwrap();
        let mut report = blind_match(&y1, &y2, &blind_params()).unwrap();
        report.set_ground_truth(&p_star).unwrap();
        assert_eq!(
            report.fraction_correct,
            Some(1.0),
            "expected perfect recovery, got {:?} (k={}, notes: {:?})",
            report.permutation,
            report.k_used,
            report.notes
        );
        assert!(report.k_used >= 1 && report.k_used <= n);
        assert!(report.disagreement.is_none(), "blind matcher never sees topology");
        assert!(matches!(report.identifiability, IdentifiabilityReport::Blind(_)));
    }

    #[test]
    fn blind_match_validates_inputs() {
        let l = laplacian(&gen_er(5, 0.6, 2).unwrap());
        let model = SignalModel {
            filter: GraphFilter::Resolvent { alpha: 0.1 },
            sigma2: 0.01,
            excitation: Excitation::StandardNormal,
        };
        let y5 = generate_signals(&model, &l, 10, 1).unwrap();
        let l4 = laplacian(&gen_er(4, 0.6, 2).unwrap());
        let y4 = generate_signals(&model, &l4, 10, 1).unwrap();
        assert!(matches!(
            blind_match(&y5, &y4, &blind_params()),
            Err(Error::InvalidArgument(_))
        ));
        let y1 = generate_signals(&model, &l, 1, 1).unwrap();
        assert!(matches!(
            blind_match(&y5, &y1, &blind_params()),
            Err(Error::InsufficientData(_))
        ));
        let mut params = blind_params();
        params.k_override = Some(9);
        let y = generate_signals(&model, &l, 100, 1).unwrap();
        assert!(matches!(
            blind_match(&y, &y, &params),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn true_covariances_reduce_blind_to_known_matching() {
        let n = 8;
        let g1 = gen_er(n, 0.5, 21).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let p_star = Permutation::random(n, &mut rng);
        let g2 = permute_graph(&g1, &p_star).unwrap();
        let l1 = laplacian(&g1);
        let l2 = laplacian(&g2);
        let f = GraphFilter::Resolvent { alpha: 0.3 };
        let c1 = true_covariance(&f, &l1).unwrap();
        let c2 = true_covariance(&f, &l2).unwrap();
        let mut params = blind_params();
        params.k_override = Some(n);
        let blind = blind_match_from_covariances(&c1, &c2, &params).unwrap();
        let known = spectral_match_known(&l1, &l2, Solver::Hungarian).unwrap();
        assert_eq!(blind.permutation, known.permutation);
        assert_eq!(blind.permutation, p_star);
    }
}

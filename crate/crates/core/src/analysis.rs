//! Evaluators for every diagnostic quantity the matching theory uses:
//! spectral gaps, perturbation norms, effective ranks, leakage margins, the
//! noise ceiling, the optimality-gap and error-probability bounds, and
//! empirical checks of the supporting inequalities.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Permutation;
use crate::matcher::{trace_objective, ProfitMatrix};
use crate::signal::{CovarianceEstimate, SignalBatch};
use crate::spectral::{abs_basis, eig_sym, EigenBasis, SelectedBasis};

/// Fraction of nodes that `p_hat` maps exactly as `p_star` does.
pub fn fraction_correct(p_hat: &Permutation, p_star: &Permutation) -> Result<f64> {
    if p_hat.n() != p_star.n() {
        return Err(Error::invalid(format!(
            "permutation sizes must match, got {} and {}",
            p_hat.n(),
            p_star.n()
        )));
    }
    let n = p_hat.n();
    let hits = (0..n).filter(|&j| p_hat.apply(j) == p_star.apply(j)).count();
    Ok(hits as f64 / n as f64)
}

/// Two-sided spectral gaps δ_k = min(λ_{k−1} − λ_k, λ_k − λ_{k+1}) with the
/// boundary convention λ₀ = +∞ and λ_{n+1} = −∞. `values` must be in
/// descending order (as every eigendecomposition here produces).
pub fn gaps(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|k| {
            let above = if k == 0 { f64::INFINITY } else { values[k - 1] - values[k] };
            let below = if k + 1 == n { f64::INFINITY } else { values[k] - values[k + 1] };
            above.min(below)
        })
        .collect()
}

/// Spectral structure of a matched pair: gaps of the true spectra, the
/// perturbation norms of the covariance estimates, and effective ranks.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralDiagnostics {
    /// Gaps of graph 1's true spectrum.
    pub gaps1: Vec<f64>,
    /// Gaps of graph 2's true spectrum.
    pub gaps2: Vec<f64>,
    /// Minimum gap over the leading K positions of both graphs.
    pub delta_min_k: f64,
    /// Operator norms (‖Ĉ⁽¹⁾ − C⁽¹⁾‖₂, ‖Ĉ⁽²⁾ − C⁽²⁾‖₂).
    pub delta_norms: (f64, f64),
    /// Effective ranks tr(C)/‖C‖₂ of the true covariances.
    pub effective_ranks: (f64, f64),
    /// Per-eigenpair moment estimate, filled by `kappa_hat_estimate` callers.
    pub kappa_hat: Option<f64>,
}

fn operator_norm_sym(matrix: &DMatrix<f64>) -> Result<f64> {
    // Differences of symmetric matrices carry rounding-level asymmetry that
    // a relative tolerance cannot excuse when the difference itself is tiny;
    // symmetrize exactly before decomposing.
    let sym = (matrix + matrix.transpose()) * 0.5;
    let e = eig_sym(&sym)?;
    let values = e.values();
    if values.is_empty() {
        return Ok(0.0);
    }
    Ok(values[0].abs().max(values[values.len() - 1].abs()))
}

fn effective_rank(values: &[f64]) -> f64 {
    let trace: f64 = values.iter().sum();
    let norm = values
        .iter()
        .fold(0.0f64, |a, &x| a.max(x.abs()));
    if norm == 0.0 {
        0.0
    } else {
        trace / norm
    }
}

/// Computes the gap/perturbation/rank diagnostics for one matched pair.
/// `trueN` are eigendecompositions of the noiseless covariances; `estN` the
/// sample estimates. `kappa_hat` is left unset.
pub fn spectral_diagnostics(
    true1: &EigenBasis,
    true2: &EigenBasis,
    est1: &CovarianceEstimate,
    est2: &CovarianceEstimate,
    k: usize,
) -> Result<SpectralDiagnostics> {
    let n = true1.n();
    if true2.n() != n || est1.n() != n || est2.n() != n {
        return Err(Error::invalid("diagnostic inputs must share one size"));
    }
    if k == 0 || k > n {
        return Err(Error::invalid(format!("K must satisfy 1 <= K <= {n}, got {k}")));
    }
    let gaps1 = gaps(true1.values());
    let gaps2 = gaps(true2.values());
    let delta_min_k = gaps1[..k]
        .iter()
        .chain(&gaps2[..k])
        .fold(f64::INFINITY, |a, &g| a.min(g));
    let diff1 = est1.matrix().clone() - true1.reconstruct();
    let diff2 = est2.matrix().clone() - true2.reconstruct();
    Ok(SpectralDiagnostics {
        gaps1,
        gaps2,
        delta_min_k,
        delta_norms: (operator_norm_sym(&diff1)?, operator_norm_sym(&diff2)?),
        effective_ranks: (effective_rank(true1.values()), effective_rank(true2.values())),
        kappa_hat: None,
    })
}

/// Per-eigenpair alignment predicate |λ̂_k − λ_k| < δ_k/2, one flag per
/// position. `true_gaps` must be the gaps of `true_values`.
pub fn eigenvalue_alignment(
    est_values: &[f64],
    true_values: &[f64],
    true_gaps: &[f64],
) -> Result<Vec<bool>> {
    let n = true_values.len();
    if est_values.len() != n || true_gaps.len() != n {
        return Err(Error::invalid("alignment inputs must share one length"));
    }
    Ok((0..n)
        .map(|k| (est_values[k] - true_values[k]).abs() < true_gaps[k] / 2.0)
        .collect())
}

/// Empirical fourth-moment estimate for eigenpair `k` (1-based):
/// κ̂_k = (1/M)·Σ_m ‖y_m·(y_mᵀ·v_k)‖² − λ_k. An estimate of the population
/// moment, not the exact quantity.
pub fn kappa_hat_estimate(batch: &SignalBatch, basis: &EigenBasis, k: usize) -> Result<f64> {
    let n = basis.n();
    if batch.n() != n {
        return Err(Error::invalid(format!(
            "batch width {} does not match basis size {n}",
            batch.n()
        )));
    }
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k must satisfy 1 <= k <= {n}, got {k}")));
    }
    if batch.m() == 0 {
        return Err(Error::InsufficientData(
            "need at least one sample to estimate moments".into(),
        ));
    }
    let v = basis.vectors().column(k - 1);
    let lambda = basis.values()[k - 1];
    let samples = batch.samples();
    let mut acc = 0.0f64;
    for m in 0..batch.m() {
        let row = samples.row(m);
        let proj: f64 = row.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
        let norm_sq: f64 = row.iter().map(|a| a * a).sum();
        acc += proj * proj * norm_sq;
    }
    Ok(acc / batch.m() as f64 - lambda)
}

/// Which row the per-column maximum ℓ_j excludes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowExclusion {
    /// Exclude the matched row of column j — the reading consistent with c_j.
    MatchedRow,
    /// Exclude row j literally, even when the matched row differs.
    LiteralJ,
}

/// Spectral-leakage margins of a basis pair under a ground-truth matching.
#[derive(Debug, Clone, Serialize)]
pub struct LeakageProfile {
    /// Matched products: for each graph-2 node j, the entry of
    /// `V̄_K⁽¹⁾(V̄_K⁽²⁾)ᵀ` at column j and the row of the graph-1 node that
    /// the ground truth maps to j (so c_j = 1 on isomorphic pairs at K = n).
    pub c: Vec<f64>,
    /// Largest competing product ℓ_j in column j (excluded row per mode).
    pub l: Vec<f64>,
    /// Worst margin ρ = min_j (c_j − ℓ_j).
    pub rho: f64,
}

/// Computes the leakage profile of `V̄⁽¹⁾(V̄⁽²⁾)ᵀ` under `p_star` (oriented
/// graph1 → graph2, so column j's matched row is π*⁻¹(j)). With a single
/// node there are no competing rows and ℓ_j is reported as 0.
pub fn leakage_profile(
    vbar1: &SelectedBasis,
    vbar2: &SelectedBasis,
    p_star: &Permutation,
    exclusion: RowExclusion,
) -> Result<LeakageProfile> {
    let n = vbar1.n();
    if vbar2.n() != n || p_star.n() != n {
        return Err(Error::invalid("leakage inputs must share one node count"));
    }
    if vbar1.k() != vbar2.k() {
        return Err(Error::invalid(format!(
            "bases must share K, got {} and {}",
            vbar1.k(),
            vbar2.k()
        )));
    }
    let inverse = p_star.inverse();
    let g = vbar1.matrix() * vbar2.matrix().transpose();
    let mut c = Vec::with_capacity(n);
    let mut l = Vec::with_capacity(n);
    for j in 0..n {
        let matched = inverse.apply(j);
        c.push(g[(matched, j)]);
        let excluded = match exclusion {
            RowExclusion::MatchedRow => matched,
            RowExclusion::LiteralJ => j,
        };
        let best = (0..n)
            .filter(|&i| i != excluded)
            .map(|i| g[(i, j)])
            .fold(f64::NEG_INFINITY, f64::max);
        l.push(if best.is_finite() { best } else { 0.0 });
    }
    let rho = c
        .iter()
        .zip(&l)
        .map(|(cj, lj)| cj - lj)
        .fold(f64::INFINITY, f64::min);
    Ok(LeakageProfile { c, l, rho })
}

/// Largest noise variance the recovery guarantee tolerates:
/// σ̄² = ρ·δ²/(16K + 8·√(2K)·δ). A nonpositive ρ yields a nonpositive
/// ceiling, reported as-is.
pub fn noise_ceiling(rho: f64, delta_min_k: f64, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("K must be at least 1"));
    }
    if delta_min_k.is_nan() || delta_min_k < 0.0 {
        return Err(Error::invalid(format!(
            "the minimum spectral gap must be nonnegative, got {delta_min_k}"
        )));
    }
    if !rho.is_finite() || !delta_min_k.is_finite() {
        return Err(Error::invalid("noise-ceiling inputs must be finite"));
    }
    let kf = k as f64;
    Ok(rho * delta_min_k * delta_min_k / (16.0 * kf + 8.0 * (2.0 * kf).sqrt() * delta_min_k))
}

/// Bound on the assignment-objective deficit caused by covariance estimation
/// error:
/// (2n√(2K)/δ)(‖Δ⁽¹⁾‖+‖Δ⁽²⁾‖) + (4K/δ²)(‖Δ⁽¹⁾‖² + ‖Δ⁽²⁾‖² + 2(n+1)‖Δ⁽¹⁾‖‖Δ⁽²⁾‖).
pub fn optimality_gap_bound(diag: &SpectralDiagnostics, k: usize, n: usize) -> Result<f64> {
    if k == 0 || n == 0 {
        return Err(Error::invalid("K and n must be at least 1"));
    }
    let delta = diag.delta_min_k;
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::Numeric(format!(
            "the optimality-gap bound needs a positive minimum spectral gap, got {delta}"
        )));
    }
    let (d1, d2) = diag.delta_norms;
    let kf = k as f64;
    let nf = n as f64;
    let linear = 2.0 * nf * (2.0 * kf).sqrt() / delta * (d1 + d2);
    let quadratic = 4.0 * kf / (delta * delta) * (d1 * d1 + d2 * d2 + 2.0 * (nf + 1.0) * d1 * d2);
    Ok(linear + quadratic)
}

/// The realized objective deficit K − tr(P̂ᵀ·G) against a profit matrix built
/// from the true bases at dimension K.
pub fn optimality_gap_realized(
    profit_true: &ProfitMatrix,
    p_hat: &Permutation,
    k: usize,
) -> Result<f64> {
    Ok(k as f64 - trace_objective(profit_true, p_hat)?)
}

/// User-supplied constants of the error-probability bound. The constants are
/// not identifiable from data; defaults make the bound a shape statement.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundParams {
    /// Concentration constant C > 0.
    pub c_const: f64,
    /// Minimum sample count M₀ the bound requires.
    pub m0: u64,
}

impl Default for BoundParams {
    fn default() -> Self {
        BoundParams { c_const: 1.0, m0: 1 }
    }
}

/// Matching-error probability bound 2n·exp(−(M/(n·C))·(σ̄² − σ²)²), clipped
/// to [0, 1] for reporting.
pub fn error_probability_bound(
    m: u64,
    n: usize,
    sigma2: f64,
    sigma_bar2: f64,
    params: &BoundParams,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if !params.c_const.is_finite() || params.c_const <= 0.0 {
        return Err(Error::invalid(format!(
            "the concentration constant must be positive and finite, got {}",
            params.c_const
        )));
    }
    if !sigma2.is_finite() || !sigma_bar2.is_finite() || sigma2 < 0.0 {
        return Err(Error::invalid("noise variances must be finite and nonnegative"));
    }
    if sigma2 > sigma_bar2 {
        return Err(Error::invalid(format!(
            "noise variance {sigma2} exceeds the noise ceiling {sigma_bar2}; \
             the error bound does not apply"
        )));
    }
    if m < params.m0 {
        return Err(Error::invalid(format!(
            "sample count {m} is below the bound's minimum threshold {}",
            params.m0
        )));
    }
    let margin = sigma_bar2 - sigma2;
    let raw = 2.0 * n as f64 * (-(m as f64 / (n as f64 * params.c_const)) * margin * margin).exp();
    Ok(raw.clamp(0.0, 1.0))
}

/// Numerically stable sine of the principal angle between unit vectors:
/// sin∠(u, v) = ‖u − v(vᵀu)‖₂.
fn sin_angle(u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    let proj = v.dot(u);
    (u - v * proj).norm()
}

fn check_unit(name: &str, x: &DVector<f64>) -> Result<()> {
    if x.iter().any(|e| !e.is_finite()) {
        return Err(Error::invalid(format!("{name} must be finite")));
    }
    if (x.norm() - 1.0).abs() > 1e-6 {
        return Err(Error::invalid(format!(
            "{name} must be a unit vector, got norm {}",
            x.norm()
        )));
    }
    Ok(())
}

/// Outcome of a two-sided inequality check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

fn check_bases_quad(
    u1: &EigenBasis,
    u2: &EigenBasis,
    v1: &EigenBasis,
    v2: &EigenBasis,
    k: usize,
) -> Result<usize> {
    let n = u1.n();
    if u2.n() != n || v1.n() != n || v2.n() != n {
        return Err(Error::invalid("bases must share one size"));
    }
    if k == 0 || k > n {
        return Err(Error::invalid(format!("K must satisfy 1 <= K <= {n}, got {k}")));
    }
    Ok(n)
}

/// Checks that the alignment deficit of the estimated bases across the
/// matching is controlled by the per-column angles to the true bases:
/// K − Σ_k |(u_k⁽¹⁾)ᵀ·P*·u_k⁽²⁾| ≤ Σ_k (sin∠(u_k⁽¹⁾,v_k⁽¹⁾) + sin∠(u_k⁽²⁾,v_k⁽²⁾))².
pub fn check_alignment_deficit_bound(
    u1: &EigenBasis,
    u2: &EigenBasis,
    v1: &EigenBasis,
    v2: &EigenBasis,
    k: usize,
    p_star: &Permutation,
) -> Result<BoundCheck> {
    let n = check_bases_quad(u1, u2, v1, v2, k)?;
    if p_star.n() != n {
        return Err(Error::invalid("ground-truth permutation size must match"));
    }
    let mut aligned = 0.0f64;
    let mut rhs = 0.0f64;
    for col in 0..k {
        let u1k = DVector::from_column_slice(u1.vectors().column(col).as_slice());
        let u2k = DVector::from_column_slice(u2.vectors().column(col).as_slice());
        let v1k = DVector::from_column_slice(v1.vectors().column(col).as_slice());
        let v2k = DVector::from_column_slice(v2.vectors().column(col).as_slice());
        let permuted = p_star.permute_vector(&u2k);
        aligned += u1k.dot(&permuted).abs();
        let s = sin_angle(&u1k, &v1k) + sin_angle(&u2k, &v2k);
        rhs += s * s;
    }
    let lhs = k as f64 - aligned;
    Ok(BoundCheck { lhs, rhs, holds: lhs <= rhs + 1e-9 })
}

/// Checks the max-norm bound on the profit-matrix perturbation
/// ‖Ū_K⁽¹⁾(Ū_K⁽²⁾)ᵀ − V̄_K⁽¹⁾(V̄_K⁽²⁾)ᵀ‖_max ≤ 2s₁s₂ + √2(s₁+s₂) with
/// s_i = √(Σ_k sin²∠(u_k⁽ⁱ⁾, v_k⁽ⁱ⁾)).
pub fn check_product_maxnorm_bound(
    u1: &EigenBasis,
    u2: &EigenBasis,
    v1: &EigenBasis,
    v2: &EigenBasis,
    k: usize,
) -> Result<BoundCheck> {
    check_bases_quad(u1, u2, v1, v2, k)?;
    let ubar1 = abs_basis(u1, k)?;
    let ubar2 = abs_basis(u2, k)?;
    let vbar1 = abs_basis(v1, k)?;
    let vbar2 = abs_basis(v2, k)?;
    let diff = ubar1.matrix() * ubar2.matrix().transpose()
        - vbar1.matrix() * vbar2.matrix().transpose();
    let lhs = diff.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let mut s1_sq = 0.0f64;
    let mut s2_sq = 0.0f64;
    for col in 0..k {
        let u1k = DVector::from_column_slice(u1.vectors().column(col).as_slice());
        let u2k = DVector::from_column_slice(u2.vectors().column(col).as_slice());
        let v1k = DVector::from_column_slice(v1.vectors().column(col).as_slice());
        let v2k = DVector::from_column_slice(v2.vectors().column(col).as_slice());
        s1_sq += sin_angle(&u1k, &v1k).powi(2);
        s2_sq += sin_angle(&u2k, &v2k).powi(2);
    }
    let (s1, s2) = (s1_sq.sqrt(), s2_sq.sqrt());
    let rhs = 2.0 * s1 * s2 + std::f64::consts::SQRT_2 * (s1 + s2);
    Ok(BoundCheck { lhs, rhs, holds: lhs <= rhs + 1e-9 })
}

/// Outcome of the eigenvector-rotation check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AngleCheck {
    pub sin_angle: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Checks the eigenvector perturbation inequality
/// sin∠(u_k, v_k) ≤ 2‖Δ‖₂/δ_k for one eigenpair.
pub fn davis_kahan_check(
    u_k: &DVector<f64>,
    v_k: &DVector<f64>,
    delta_norm: f64,
    gap_k: f64,
) -> Result<AngleCheck> {
    check_unit("u_k", u_k)?;
    check_unit("v_k", v_k)?;
    if u_k.len() != v_k.len() {
        return Err(Error::invalid("vectors must share one length"));
    }
    if gap_k.is_nan() || gap_k <= 0.0 {
        return Err(Error::invalid(format!("the gap must be positive, got {gap_k}")));
    }
    if !delta_norm.is_finite() || delta_norm < 0.0 {
        return Err(Error::invalid(format!(
            "the perturbation norm must be finite and nonnegative, got {delta_norm}"
        )));
    }
    let sin = sin_angle(u_k, v_k);
    let bound = 2.0 * delta_norm / gap_k;
    Ok(AngleCheck { sin_angle: sin, bound, holds: sin <= bound + 1e-9 })
}

/// Outcome of the empirical tail-splitting check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailSplitCheck {
    pub p_sum: f64,
    pub p_x: f64,
    pub p_y: f64,
    pub holds: bool,
}

/// Empirical union-bound split of a sum tail:
/// Pr(x+y ≥ t) ≤ Pr(x ≥ ζt) + Pr(y ≥ (1−ζ)t). On paired draws the
/// inequality holds samplewise; three binomial standard errors of slack
/// cover unpaired usage.
pub fn check_sum_tail_split(xs: &[f64], ys: &[f64], t: f64, zeta: f64) -> Result<TailSplitCheck> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::invalid("need equally many draws of x and y, at least one"));
    }
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(Error::invalid(format!("zeta must lie strictly in (0,1), got {zeta}")));
    }
    if !t.is_finite() {
        return Err(Error::invalid("the threshold t must be finite"));
    }
    let n = xs.len() as f64;
    let count = |pred: &dyn Fn(usize) -> bool| {
        (0..xs.len()).filter(|&i| pred(i)).count() as f64 / n
    };
    let p_sum = count(&|i| xs[i] + ys[i] >= t);
    let p_x = count(&|i| xs[i] >= zeta * t);
    let p_y = count(&|i| ys[i] >= (1.0 - zeta) * t);
    let se = |p: f64| (p * (1.0 - p) / n).sqrt();
    let slack = 3.0 * (se(p_sum) + se(p_x) + se(p_y));
    Ok(TailSplitCheck {
        p_sum,
        p_x,
        p_y,
        holds: p_sum <= p_x + p_y + slack + 1e-12,
    })
}

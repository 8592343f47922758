//! Graph filters, filtered-signal synthesis, and covariance estimation.
//!
//! Signals are generated as `y = H(L)·x + σ·w` with white excitation `x`,
//! Gaussian sensor noise `w`, and a graph filter `H(L)` defined through a
//! scalar transfer function applied to the Laplacian spectrum. The sample
//! covariance of such signals concentrates around `H² + σ²·I`, which is all
//! the blind matcher ever sees.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::LaplacianMatrix;
use crate::spectral::eig_sym;

/// Scalar transfer function evaluated on Laplacian eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphFilter {
    /// `h(γ) = Σ_t coeffs[t]·γ^t`.
    Polynomial { coeffs: Vec<f64> },
    /// `h(γ) = 1/(1 + α·γ)`.
    Resolvent { alpha: f64 },
    /// `h(γ) = (1 − α·γ)^t_d`.
    Power { alpha: f64, t_d: u32 },
    /// `h(γ) = α₁ / (1 − α₂·(1 − γ))`.
    Arma { alpha1: f64, alpha2: f64 },
}

impl GraphFilter {
    fn validate(&self) -> Result<()> {
        let params: Vec<f64> = match self {
            GraphFilter::Polynomial { coeffs } => {
                if coeffs.is_empty() {
                    return Err(Error::invalid("polynomial filter needs at least one coefficient"));
                }
                coeffs.clone()
            }
            GraphFilter::Resolvent { alpha } => vec![*alpha],
            GraphFilter::Power { alpha, .. } => vec![*alpha],
            GraphFilter::Arma { alpha1, alpha2 } => vec![*alpha1, *alpha2],
        };
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("filter parameters must be finite"));
        }
        Ok(())
    }

    /// Evaluates the transfer function at one frequency `gamma`.
    pub fn response(&self, gamma: f64) -> Result<f64> {
        self.validate()?;
        if !gamma.is_finite() {
            return Err(Error::invalid(format!("frequency must be finite, got {gamma}")));
        }
        let h = match self {
            GraphFilter::Polynomial { coeffs } => {
                coeffs.iter().rev().fold(0.0, |acc, &c| acc * gamma + c)
            }
            GraphFilter::Resolvent { alpha } => {
                let den = 1.0 + alpha * gamma;
                if den == 0.0 {
                    return Err(Error::numeric(format!(
                        "resolvent filter has a pole at frequency {gamma}"
                    )));
                }
                1.0 / den
            }
            GraphFilter::Power { alpha, t_d } => (1.0 - alpha * gamma).powi(*t_d as i32),
            GraphFilter::Arma { alpha1, alpha2 } => {
                let den = 1.0 - alpha2 * (1.0 - gamma);
                if den == 0.0 {
                    return Err(Error::numeric(format!(
                        "rational filter has a pole at frequency {gamma}"
                    )));
                }
                alpha1 / den
            }
        };
        if !h.is_finite() {
            return Err(Error::numeric(format!(
                "filter response overflowed at frequency {gamma}"
            )));
        }
        Ok(h)
    }
}

/// The transfer function evaluated at each frequency in turn.
pub fn frequency_response(filter: &GraphFilter, frequencies: &[f64]) -> Result<Vec<f64>> {
    frequencies.iter().map(|&g| filter.response(g)).collect()
}

/// Dense filter matrix `H = V·diag(h(γ))·Vᵀ` over the Laplacian eigenbasis.
pub fn filter_matrix(filter: &GraphFilter, l: &LaplacianMatrix) -> Result<DMatrix<f64>> {
    let e = eig_sym(l.matrix())?;
    let responses = frequency_response(filter, e.values())?;
    let mut scaled = e.vectors().clone();
    for (j, &h) in responses.iter().enumerate() {
        scaled.column_mut(j).scale_mut(h);
    }
    let mut h = &scaled * e.vectors().transpose();
    mirror_upper(&mut h);
    Ok(h)
}

/// White excitation law driving the filter input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Excitation {
    /// i.i.d. N(0, 1) entries.
    StandardNormal,
    /// i.i.d. uniform ±1 entries.
    Rademacher,
}

/// Everything that defines the observation law: the filter shaping the
/// excitation, the sensor-noise variance, and the excitation law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalModel {
    pub filter: GraphFilter,
    pub sigma2: f64,
    pub excitation: Excitation,
}

impl SignalModel {
    fn validate(&self) -> Result<()> {
        self.filter.validate()?;
        if !self.sigma2.is_finite() || self.sigma2 < 0.0 {
            return Err(Error::invalid(format!(
                "noise variance must be finite and non-negative, got {}",
                self.sigma2
            )));
        }
        Ok(())
    }
}

/// M filtered-signal observations, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalBatch {
    samples: DMatrix<f64>,
}

const FILE_MAGIC: &[u8; 8] = b"SIGBATCH";

/// Samples per RNG block. Each block draws from its own pair of RNG streams,
/// so the generated batch never depends on thread count, and shorter batches
/// are exact prefixes of longer ones.
const GEN_BLOCK: usize = 4096;

impl SignalBatch {
    /// Wraps an M×n sample matrix (one observation per row).
    pub fn from_samples(samples: DMatrix<f64>) -> Result<Self> {
        if samples.nrows() == 0 || samples.ncols() == 0 {
            return Err(Error::invalid("signal batch must be non-empty"));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("signal batch has non-finite entries"));
        }
        Ok(SignalBatch { samples })
    }

    /// Number of observations.
    pub fn m(&self) -> usize {
        self.samples.nrows()
    }

    /// Number of nodes.
    pub fn n(&self) -> usize {
        self.samples.ncols()
    }

    /// The M×n sample matrix.
    pub fn samples(&self) -> &DMatrix<f64> {
        &self.samples
    }

    /// Writes the batch as little-endian binary: an 8-byte magic, `n` and `M`
    /// as u64, then the samples row-major as f64. The encoding is exact,
    /// so a save/load round trip is bit-identical.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        w.write_all(FILE_MAGIC)?;
        w.write_all(&(self.n() as u64).to_le_bytes())?;
        w.write_all(&(self.m() as u64).to_le_bytes())?;
        for r in 0..self.m() {
            for c in 0..self.n() {
                w.write_all(&self.samples[(r, c)].to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a batch written by [`save`](Self::save), rejecting wrong magic
    /// bytes, truncated payloads, and trailing garbage as data errors.
    pub fn load(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        if bytes.len() < 24 {
            return Err(Error::data("signal file too short for its header"));
        }
        if &bytes[..8] != FILE_MAGIC {
            return Err(Error::data("signal file has the wrong magic bytes"));
        }
        let read_u64 =
            |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"));
        let n = read_u64(8) as usize;
        let m = read_u64(16) as usize;
        if n == 0 || m == 0 {
            return Err(Error::data("signal file declares an empty batch"));
        }
        let count = m
            .checked_mul(n)
            .ok_or_else(|| Error::data("signal file dimensions overflow"))?;
        let expected = 24usize
            .checked_add(count.checked_mul(8).ok_or_else(|| Error::data("size overflow"))?)
            .ok_or_else(|| Error::data("size overflow"))?;
        if bytes.len() != expected {
            return Err(Error::data(format!(
                "signal file length {} does not match header ({} expected)",
                bytes.len(),
                expected
            )));
        }
        let mut samples = DMatrix::zeros(m, n);
        let mut at = 24;
        for r in 0..m {
            for c in 0..n {
                samples[(r, c)] =
                    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"));
                at += 8;
            }
        }
        SignalBatch::from_samples(samples)
    }
}

fn draw_excitation<R: Rng + ?Sized>(rng: &mut R, law: Excitation) -> f64 {
    match law {
        Excitation::StandardNormal => rng.sample(StandardNormal),
        Excitation::Rademacher => {
            if rng.random_bool(0.5) {
                1.0
            } else {
                -1.0
            }
        }
    }
}

/// Draws `m` observations `y = H·x + σ·w` on the given topology.
///
/// Samples are produced in fixed blocks of 4096; block `b` draws its
/// excitation from RNG stream `2b` and its noise from stream `2b+1` of the
/// same seed. Consequences: the output is independent of thread count, a
/// batch is an exact prefix of any longer batch with the same seed, and the
/// excitation draws do not move when only `sigma2` changes.
pub fn generate_signals(
    model: &SignalModel,
    l: &LaplacianMatrix,
    m: usize,
    seed: u64,
) -> Result<SignalBatch> {
    model.validate()?;
    if m == 0 {
        return Err(Error::invalid("at least one sample is required"));
    }
    let n = l.n();
    let h = filter_matrix(&model.filter, l)?;
    let sigma = model.sigma2.sqrt();
    let n_blocks = m.div_ceil(GEN_BLOCK);
    let blocks: Vec<DMatrix<f64>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let rows = GEN_BLOCK.min(m - b * GEN_BLOCK);
            let mut x_rng = ChaCha8Rng::seed_from_u64(seed);
            x_rng.set_stream(2 * b as u64);
            let mut x = DMatrix::zeros(n, rows);
            for c in 0..rows {
                for r in 0..n {
                    x[(r, c)] = draw_excitation(&mut x_rng, model.excitation);
                }
            }
            let mut y = &h * x;
            if sigma > 0.0 {
                let mut w_rng = ChaCha8Rng::seed_from_u64(seed);
                w_rng.set_stream(2 * b as u64 + 1);
                for c in 0..rows {
                    for r in 0..n {
                        let w: f64 = w_rng.sample(StandardNormal);
                        y[(r, c)] += sigma * w;
                    }
                }
            }
            y
        })
        .collect();
    let mut samples = DMatrix::zeros(m, n);
    for (b, block) in blocks.iter().enumerate() {
        for c in 0..block.ncols() {
            let row = b * GEN_BLOCK + c;
            for r in 0..n {
                samples[(row, r)] = block[(r, c)];
            }
        }
    }
    SignalBatch::from_samples(samples)
}

/// A covariance matrix plus the number of samples that produced it
/// (`m_used = 0` marks an exact population covariance).
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceEstimate {
    matrix: DMatrix<f64>,
    m_used: usize,
}

impl CovarianceEstimate {
    /// Wraps a covariance matrix, requiring symmetry within
    /// `1e−12 · max|entry|`.
    pub fn new(matrix: DMatrix<f64>, m_used: usize) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n {
            return Err(Error::invalid("covariance must be square and non-empty"));
        }
        let mut max_abs = 0.0f64;
        for &x in matrix.iter() {
            if !x.is_finite() {
                return Err(Error::invalid("covariance has non-finite entries"));
            }
            max_abs = max_abs.max(x.abs());
        }
        for k in 0..n {
            for j in (k + 1)..n {
                if (matrix[(k, j)] - matrix[(j, k)]).abs() > 1e-12 * max_abs {
                    return Err(Error::invalid(format!(
                        "covariance is asymmetric at ({k},{j})"
                    )));
                }
            }
        }
        Ok(CovarianceEstimate { matrix, m_used })
    }

    /// Matrix dimension.
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    /// The symmetric covariance matrix.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Samples behind the estimate; 0 for an exact population covariance.
    pub fn m_used(&self) -> usize {
        self.m_used
    }
}

fn mirror_upper(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for k in 0..n {
        for j in (k + 1)..n {
            m[(j, k)] = m[(k, j)];
        }
    }
}

/// Second-moment sample covariance `(1/M)·Σ_m y_m·y_mᵀ` (no mean
/// subtraction — the signal model is zero-mean by construction).
///
/// Accumulated block by block in a fixed order, so the result is independent
/// of thread count; the upper triangle is mirrored for exact symmetry.
pub fn sample_covariance(batch: &SignalBatch) -> Result<CovarianceEstimate> {
    let m = batch.m();
    let n = batch.n();
    let partials: Vec<DMatrix<f64>> = (0..m.div_ceil(GEN_BLOCK))
        .into_par_iter()
        .map(|b| {
            let rows = GEN_BLOCK.min(m - b * GEN_BLOCK);
            let chunk = batch.samples().rows(b * GEN_BLOCK, rows);
            chunk.transpose() * chunk
        })
        .collect();
    let mut c = DMatrix::zeros(n, n);
    for p in partials {
        c += p;
    }
    c.scale_mut(1.0 / m as f64);
    mirror_upper(&mut c);
    CovarianceEstimate::new(c, m)
}

/// Population covariance of the noiseless filtered signal,
/// `C = V·diag(h(γ)²)·Vᵀ` (the expected sample covariance is `C + σ²·I`).
pub fn true_covariance(filter: &GraphFilter, l: &LaplacianMatrix) -> Result<CovarianceEstimate> {
    let e = eig_sym(l.matrix())?;
    let responses = frequency_response(filter, e.values())?;
    let mut scaled = e.vectors().clone();
    for (j, &h) in responses.iter().enumerate() {
        scaled.column_mut(j).scale_mut(h);
    }
    let mut c = &scaled * scaled.transpose();
    mirror_upper(&mut c);
    CovarianceEstimate::new(c, 0)
}

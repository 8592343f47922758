//! Subcommand implementations: synthetic instance plumbing, on-disk file
//! formats, and the Monte Carlo sweep engine.
//!
//! Every writing command leaves behind enough provenance to reproduce its
//! outputs bit-exactly: the canonical config hash, the resolved master seed,
//! and the binary version. No output embeds wall-clock timestamps.

use std::fs;
use std::path::Path;

use graphmatch_core::{
    abs_basis, blind_match, blind_match_from_covariances, disagreement, edge_sample, eig_sym,
    error_probability_bound, gen_ba, gen_er, gen_wigner_pair, is_identifiable_known,
    kappa_hat_estimate, laplacian, leakage_profile, load_edge_list, noise_ceiling,
    optimality_gap_bound, optimality_gap_realized, permute_graph, sample_covariance,
    spectral_diagnostics, spectral_match_known, true_covariance, BlindParams, BoundParams,
    Graph, GraphFilter, IdentifiabilityReport, KnownVerdict, LaplacianMatrix, LeakageProfile,
    MatchReport, Permutation, ProfitMatrix, RowExclusion, SignalBatch, SignalModel,
    SpectralDiagnostics,
};
use graphmatch_core::Excitation;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, GraphModel, MRule, SweepAxis};
use crate::{CliError, CliResult};

/// Mixing constant that derives the ground-truth-permutation stream from the
/// instance seed without colliding with the graph generator's own stream.
const SEED_SPLIT: u64 = 0x9e37_79b9_7f4a_7c15;

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance block embedded in every report and manifest.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub version: &'static str,
}

impl Provenance {
    fn new(cfg: &ExperimentConfig) -> Self {
        Provenance { config_hash: cfg.config_hash.clone(), seed: cfg.seed, version: VERSION }
    }
}

/// One fully synthesized problem instance.
pub struct Instance {
    pub g1: Graph,
    pub g2: Graph,
    pub p_star: Permutation,
    pub l1: LaplacianMatrix,
    pub l2: LaplacianMatrix,
    pub y1: SignalBatch,
    pub y2: SignalBatch,
}

/// Draws a graph pair with ground-truth correspondence from a model.
///
/// Synthetic families produce exactly isomorphic pairs (the second graph is
/// a relabeling of the first); the Wigner family produces correlated pairs
/// with its own built-in relabeling; datasets are edge-subsampled twice and
/// the second subsample is relabeled, so the pair is only approximately
/// isomorphic — exactly the regime the error-free baseline is measured in.
pub fn synth_graph_pair(model: &GraphModel, seed: u64) -> CliResult<(Graph, Graph, Permutation)> {
    match model {
        GraphModel::Er { n, p } => {
            let g1 = gen_er(*n, *p, seed)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ SEED_SPLIT);
            let p_star = Permutation::random(*n, &mut rng);
            let g2 = permute_graph(&g1, &p_star)?;
            Ok((g1, g2, p_star))
        }
        GraphModel::Ba { n, m0, m_attach } => {
            let g1 = gen_ba(*n, *m0, *m_attach, seed)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ SEED_SPLIT);
            let p_star = Permutation::random(*n, &mut rng);
            let g2 = permute_graph(&g1, &p_star)?;
            Ok((g1, g2, p_star))
        }
        GraphModel::Wigner { n, beta } => {
            let cfg = graphmatch_core::WignerPairConfig { n: *n, beta: *beta, seed };
            let (g1, g2, p_star) = gen_wigner_pair(&cfg)?;
            Ok((g1, g2, p_star))
        }
        GraphModel::Dataset { path, sample_q } => {
            let base = load_edge_list(path)?;
            let sub1 = edge_sample(&base, *sample_q, seed.wrapping_add(1))?;
            let sub2 = edge_sample(&base, *sample_q, seed.wrapping_add(2))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ SEED_SPLIT);
            let p_star = Permutation::random(base.n(), &mut rng);
            let g2 = permute_graph(&sub2, &p_star)?;
            Ok((sub1, g2, p_star))
        }
    }
}

/// Synthesizes a full instance: graph pair plus one signal batch per graph.
pub fn synth_instance(
    model: &GraphModel,
    filter1: &GraphFilter,
    filter2: &GraphFilter,
    sigma2: f64,
    m: u64,
    seed: u64,
) -> CliResult<Instance> {
    let (g1, g2, p_star) = synth_graph_pair(model, seed)?;
    let l1 = laplacian(&g1);
    let l2 = laplacian(&g2);
    let model1 =
        SignalModel { filter: filter1.clone(), sigma2, excitation: Excitation::StandardNormal };
    let model2 =
        SignalModel { filter: filter2.clone(), sigma2, excitation: Excitation::StandardNormal };
    let y1 = graphmatch_core::generate_signals(
        &model1,
        &l1,
        m as usize,
        seed.wrapping_mul(2).wrapping_add(1),
    )?;
    let y2 = graphmatch_core::generate_signals(
        &model2,
        &l2,
        m as usize,
        seed.wrapping_mul(2).wrapping_add(2),
    )?;
    Ok(Instance { g1, g2, p_star, l1, l2, y1, y2 })
}

/// Blind-pipeline parameters with config defaults resolved for size `n`.
fn blind_params(cfg: &ExperimentConfig, n: usize) -> BlindParams {
    BlindParams {
        eps: cfg.eps.resolve_eps(n),
        varsigma: cfg.varsigma.resolve_varsigma(n),
        solver: cfg.solver,
        identifiability_mode: cfg.identifiability_mode,
        k_override: cfg.k_override,
    }
}

fn identifiable_flag(report: &IdentifiabilityReport) -> bool {
    match report {
        IdentifiabilityReport::Blind(v) => v.is_identifiable(),
        IdentifiabilityReport::Known(v) => matches!(v, KnownVerdict::Identifiable),
        IdentifiabilityReport::NotChecked => false,
    }
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text)
        .map_err(|e| CliError::Data(format!("cannot write '{}': {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Data(format!("cannot serialize '{}': {e}", path.display())))?;
    text.push('\n');
    write_text(path, &text)
}

fn p_star_csv(p: &Permutation) -> String {
    let mut out = String::from("from,to\n");
    for (from, to) in p.to_pairs() {
        out.push_str(&format!("{from},{to}\n"));
    }
    out
}

fn read_p_star(path: &Path) -> CliResult<Permutation> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read '{}': {e}", path.display())))?;
    let mut entries: Vec<(usize, usize)> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (idx == 0 && line == "from,to") {
            continue;
        }
        let (a, b) = line.split_once(',').ok_or_else(|| {
            CliError::Data(format!("'{}' line {}: expected from,to", path.display(), idx + 1))
        })?;
        let parse = |s: &str| {
            s.trim().parse::<usize>().map_err(|_| {
                CliError::Data(format!(
                    "'{}' line {}: bad node index '{s}'",
                    path.display(),
                    idx + 1
                ))
            })
        };
        entries.push((parse(a)?, parse(b)?));
    }
    let n = entries.len();
    let mut map = vec![usize::MAX; n];
    for (from, to) in entries {
        if from >= n || map[from] != usize::MAX {
            return Err(CliError::Data(format!(
                "'{}': rows must list each source node exactly once",
                path.display()
            )));
        }
        map[from] = to;
    }
    Ok(Permutation::from_map(map)?)
}

/// Manifest written next to generated data files.
#[derive(Serialize)]
struct GenerateManifest {
    provenance: Provenance,
    command: &'static str,
    model: serde_json::Value,
    n: usize,
    m: u64,
    sigma2: f64,
    filter1: GraphFilter,
    filter2: GraphFilter,
    files: Vec<&'static str>,
}

/// `generate`: synthesize one instance and write it to the output directory.
pub fn cmd_generate(cfg: &ExperimentConfig, out: &Path) -> CliResult<serde_json::Value> {
    let m = cfg.resolved_m()?;
    let inst = synth_instance(&cfg.model, &cfg.filter1, &cfg.filter2, cfg.sigma2, m, cfg.seed)?;
    fs::create_dir_all(out)
        .map_err(|e| CliError::Data(format!("cannot create '{}': {e}", out.display())))?;
    write_text(&out.join("graph1.edges"), &inst.g1.to_edge_list_string())?;
    write_text(&out.join("graph2.edges"), &inst.g2.to_edge_list_string())?;
    write_text(&out.join("p_star.csv"), &p_star_csv(&inst.p_star))?;
    inst.y1.save(&out.join("signals1.bin"))?;
    inst.y2.save(&out.join("signals2.bin"))?;
    let manifest = GenerateManifest {
        provenance: Provenance::new(cfg),
        command: "generate",
        model: cfg.model.to_json(),
        n: inst.g1.n(),
        m,
        sigma2: cfg.sigma2,
        filter1: cfg.filter1.clone(),
        filter2: cfg.filter2.clone(),
        files: vec![
            "graph1.edges",
            "graph2.edges",
            "p_star.csv",
            "signals1.bin",
            "signals2.bin",
        ],
    };
    write_json(&out.join("manifest.json"), &manifest)?;
    Ok(serde_json::to_value(&manifest).expect("manifest serializes"))
}

#[derive(Serialize)]
struct MatchOutput {
    provenance: Provenance,
    command: &'static str,
    blind: MatchReport,
    error_free_baseline: MatchReport,
}

/// `match`: run the blind matcher on a generated directory; also run the
/// known-topology baseline since the graphs are on disk next to the signals.
pub fn cmd_match(cfg: &ExperimentConfig, dir: &Path) -> CliResult<serde_json::Value> {
    for name in ["graph1.edges", "graph2.edges", "signals1.bin", "signals2.bin"] {
        if !dir.join(name).is_file() {
            return Err(CliError::Data(format!(
                "missing input file '{}' (run the generate command first)",
                dir.join(name).display()
            )));
        }
    }
    let g1 = load_edge_list(&dir.join("graph1.edges"))?;
    let g2 = load_edge_list(&dir.join("graph2.edges"))?;
    let y1 = SignalBatch::load(&dir.join("signals1.bin"))?;
    let y2 = SignalBatch::load(&dir.join("signals2.bin"))?;
    let p_star_path = dir.join("p_star.csv");
    let p_star = if p_star_path.is_file() { Some(read_p_star(&p_star_path)?) } else { None };

    let n = g1.n();
    let mut blind = blind_match(&y1, &y2, &blind_params(cfg, n))?;
    let (l1, l2) = (laplacian(&g1), laplacian(&g2));
    let mut known = spectral_match_known(&l1, &l2, cfg.solver)?;
    if let Some(p) = &p_star {
        blind.set_ground_truth(p)?;
        known.set_ground_truth(p)?;
    }

    let output = MatchOutput {
        provenance: Provenance::new(cfg),
        command: "match",
        blind,
        error_free_baseline: known,
    };
    write_json(&dir.join("match_blind.json"), &output.blind)?;
    write_json(&dir.join("match_known.json"), &output.error_free_baseline)?;
    Ok(serde_json::to_value(&output).expect("match output serializes"))
}

/// One grid point of a sweep: the fully resolved per-point parameters.
struct SweepPoint {
    idx: usize,
    axis_value: f64,
    model: GraphModel,
    filter1: GraphFilter,
    filter2: GraphFilter,
    sigma2: f64,
    m: u64,
}

/// Expands the configured sweep axis into grid points.
fn build_points(cfg: &ExperimentConfig) -> CliResult<(SweepAxis, Vec<SweepPoint>)> {
    let axis = cfg.sweep_axis.unwrap_or(SweepAxis::M);
    let base = |idx: usize, axis_value: f64| SweepPoint {
        idx,
        axis_value,
        model: cfg.model.clone(),
        filter1: cfg.filter1.clone(),
        filter2: cfg.filter2.clone(),
        sigma2: cfg.sigma2,
        m: cfg.m_samples[0],
    };
    let fixed_m = || -> CliResult<u64> { Ok(cfg.resolved_m()?) };
    let points = match axis {
        SweepAxis::M => {
            if cfg.m_rule == MRule::NLnN {
                return Err(CliError::Config(
                    "m_rule=n_ln_n conflicts with sweep_axis=m (the axis sets M directly)".into(),
                ));
            }
            cfg.m_samples
                .iter()
                .enumerate()
                .map(|(i, &m)| {
                    let mut pt = base(i, m as f64);
                    pt.m = m;
                    pt
                })
                .collect()
        }
        SweepAxis::Sigma2 => {
            let list = cfg.sigma2_list.as_ref().ok_or_else(|| {
                CliError::Config("sweep_axis=sigma2 requires the sigma2_list key".into())
            })?;
            let m = fixed_m()?;
            list.iter()
                .enumerate()
                .map(|(i, &s)| {
                    let mut pt = base(i, s);
                    pt.sigma2 = s;
                    pt.m = m;
                    pt
                })
                .collect()
        }
        SweepAxis::N => {
            let list = cfg
                .n_list
                .as_ref()
                .ok_or_else(|| CliError::Config("sweep_axis=n requires the n_list key".into()))?;
            let fixed = {
                if cfg.m_samples.len() != 1 {
                    return Err(CliError::Config(
                        "m_samples lists belong to sweep_axis=m; the n axis needs a single \
                         value (or m_rule=n_ln_n)"
                            .into(),
                    ));
                }
                cfg.m_samples[0]
            };
            let mut pts = Vec::with_capacity(list.len());
            for (i, &n) in list.iter().enumerate() {
                let mut pt = base(i, n as f64);
                pt.model = cfg.model.with_n(n)?;
                pt.m = cfg.m_rule.samples_for(n, fixed);
                pts.push(pt);
            }
            pts
        }
        SweepAxis::Alpha => {
            let list = cfg.alpha_list.as_ref().ok_or_else(|| {
                CliError::Config("sweep_axis=alpha requires the alpha_list key".into())
            })?;
            let bas = match cfg.filter1 {
                GraphFilter::Resolvent { alpha } => alpha,
                _ => {
                    return Err(CliError::Config(
                        "sweep_axis=alpha requires filter1=resolvent:<alpha>; the second \
                         filter becomes resolvent:(alpha+offset) at each point"
                            .into(),
                    ));
                }
            };
            let m = fixed_m()?;
            list.iter()
                .enumerate()
                .map(|(i, &a)| {
                    let mut pt = base(i, a);
                    pt.filter2 = GraphFilter::Resolvent { alpha: bas + a };
                    pt.m = m;
                    pt
                })
                .collect()
        }
        SweepAxis::Beta => {
            let list = cfg.beta_list.as_ref().ok_or_else(|| {
                CliError::Config("sweep_axis=beta requires the beta_list key".into())
            })?;
            let m = fixed_m()?;
            let mut pts = Vec::with_capacity(list.len());
            for (i, &b) in list.iter().enumerate() {
                let mut pt = base(i, b);
                pt.model = cfg.model.with_beta(b)?;
                pt.m = m;
                pts.push(pt);
            }
            pts
        }
    };
    Ok((axis, points))
}

/// One trial's flat record; a line of `trials.jsonl`.
#[derive(Serialize)]
struct TrialRecord {
    point: usize,
    trial: usize,
    axis: &'static str,
    axis_value: f64,
    n: usize,
    m: u64,
    sigma2: f64,
    seed: u64,
    fraction_correct: f64,
    matching_error: f64,
    disagreement: f64,
    identifiable: bool,
    k_used: usize,
    objective: f64,
    wall_total_s: f64,
}

/// Aggregate statistics for one grid point; a row of `sweep.csv`.
#[derive(Serialize)]
struct AggregateRow {
    point: usize,
    axis: &'static str,
    axis_value: f64,
    n: usize,
    m: u64,
    sigma2: f64,
    trials: usize,
    mean_fraction_correct: f64,
    std_fraction_correct: f64,
    mean_matching_error: f64,
    std_matching_error: f64,
    mean_disagreement: f64,
    std_disagreement: f64,
    identifiable_rate: f64,
    mean_k: f64,
    mean_wall_total_s: f64,
}

/// Sample mean and standard deviation (ddof = 1; zero for a single value).
fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn run_trial(
    cfg: &ExperimentConfig,
    axis: SweepAxis,
    point: &SweepPoint,
    trial: usize,
    seed: u64,
) -> CliResult<TrialRecord> {
    let inst =
        synth_instance(&point.model, &point.filter1, &point.filter2, point.sigma2, point.m, seed)?;
    let n = inst.g1.n();
    let mut report = blind_match(&inst.y1, &inst.y2, &blind_params(cfg, n))?;
    report.set_ground_truth(&inst.p_star)?;
    let dis = disagreement(&inst.l1, &inst.l2, &report.permutation)?;
    let fraction = report.fraction_correct.unwrap_or(0.0);
    Ok(TrialRecord {
        point: point.idx,
        trial,
        axis: axis.label(),
        axis_value: point.axis_value,
        n,
        m: point.m,
        sigma2: point.sigma2,
        seed,
        fraction_correct: fraction,
        matching_error: 1.0 - fraction,
        disagreement: dis,
        identifiable: identifiable_flag(&report.identifiability),
        k_used: report.k_used,
        objective: report.objective,
        wall_total_s: report.wall_times.total_s,
    })
}

#[derive(Serialize)]
struct SweepManifest {
    provenance: Provenance,
    command: &'static str,
    axis: SweepAxis,
    points: usize,
    trials_per_point: usize,
    files: Vec<&'static str>,
}

/// `sweep`: Monte Carlo over the configured grid. Every trial owns the
/// derived seed `seed + 10000·point + trial`, so results are independent of
/// scheduling; aggregation runs in slot order over the collected records.
pub fn cmd_sweep(cfg: &ExperimentConfig, out: &Path) -> CliResult<serde_json::Value> {
    let (axis, points) = build_points(cfg)?;
    fs::create_dir_all(out)
        .map_err(|e| CliError::Data(format!("cannot create '{}': {e}", out.display())))?;

    let mut specs: Vec<(usize, usize, u64)> = Vec::with_capacity(points.len() * cfg.trials);
    for point in &points {
        for trial in 0..cfg.trials {
            let seed = cfg
                .seed
                .wrapping_add(10_000u64.wrapping_mul(point.idx as u64))
                .wrapping_add(trial as u64);
            specs.push((point.idx, trial, seed));
        }
    }
    let records: Vec<CliResult<TrialRecord>> = specs
        .par_iter()
        .map(|&(pi, trial, seed)| run_trial(cfg, axis, &points[pi], trial, seed))
        .collect();
    let mut rows: Vec<TrialRecord> = Vec::with_capacity(records.len());
    for rec in records {
        rows.push(rec?);
    }

    let mut jsonl = String::new();
    for row in &rows {
        jsonl.push_str(
            &serde_json::to_string(row)
                .map_err(|e| CliError::Data(format!("cannot serialize trial record: {e}")))?,
        );
        jsonl.push('\n');
    }
    write_text(&out.join("trials.jsonl"), &jsonl)?;

    let mut csv_writer = csv::Writer::from_writer(Vec::new());
    for point in &points {
        let slice: Vec<&TrialRecord> = rows.iter().filter(|r| r.point == point.idx).collect();
        let collect = |f: fn(&TrialRecord) -> f64| -> Vec<f64> {
            slice.iter().map(|r| f(r)).collect()
        };
        let (mean_fraction, std_fraction) = mean_std(&collect(|r| r.fraction_correct));
        let (mean_error, std_error) = mean_std(&collect(|r| r.matching_error));
        let (mean_dis, std_dis) = mean_std(&collect(|r| r.disagreement));
        let identifiable_rate = slice.iter().filter(|r| r.identifiable).count() as f64
            / slice.len() as f64;
        let (mean_k, _) = mean_std(&collect(|r| r.k_used as f64));
        let (mean_wall, _) = mean_std(&collect(|r| r.wall_total_s));
        csv_writer
            .serialize(AggregateRow {
                point: point.idx,
                axis: axis.label(),
                axis_value: point.axis_value,
                n: slice.first().map_or(0, |r| r.n),
                m: point.m,
                sigma2: point.sigma2,
                trials: slice.len(),
                mean_fraction_correct: mean_fraction,
                std_fraction_correct: std_fraction,
                mean_matching_error: mean_error,
                std_matching_error: std_error,
                mean_disagreement: mean_dis,
                std_disagreement: std_dis,
                identifiable_rate,
                mean_k,
                mean_wall_total_s: mean_wall,
            })
            .map_err(|e| CliError::Data(format!("cannot write aggregate row: {e}")))?;
    }
    let csv_bytes = csv_writer
        .into_inner()
        .map_err(|e| CliError::Data(format!("cannot finish aggregate csv: {e}")))?;
    fs::write(out.join("sweep.csv"), csv_bytes)
        .map_err(|e| CliError::Data(format!("cannot write sweep.csv: {e}")))?;

    let manifest = SweepManifest {
        provenance: Provenance::new(cfg),
        command: "sweep",
        axis,
        points: points.len(),
        trials_per_point: cfg.trials,
        files: vec!["sweep.csv", "trials.jsonl"],
    };
    write_json(&out.join("sweep_manifest.json"), &manifest)?;
    Ok(serde_json::to_value(&manifest).expect("sweep manifest serializes"))
}

#[derive(Serialize)]
struct BoundsReport {
    provenance: Provenance,
    command: &'static str,
    n: usize,
    m: u64,
    k: usize,
    sigma2: f64,
    eps: f64,
    varsigma: f64,
    diagnostics: SpectralDiagnostics,
    /// Leakage margins from the true covariance bases and ground truth.
    leakage_true: LeakageProfile,
    /// Surrogate margins from the estimated bases and the recovered matching.
    leakage_blind_surrogate: LeakageProfile,
    noise_ceiling: f64,
    /// `None` when the minimum gap is zero (the bound needs a positive gap).
    optimality_gap_bound: Option<f64>,
    optimality_gap_realized: f64,
    /// Whether the realized gap respects the bound (when the bound exists).
    bound_holds: Option<bool>,
    /// `None` when the noise variance exceeds the ceiling (bound undefined).
    error_probability_bound: Option<f64>,
    /// Second-largest and smallest true covariance eigenvalues of graph 2 —
    /// the gap summary most predictive of matching precision.
    lambda2_graph2: f64,
    lambda_n_graph2: f64,
    blind: MatchReport,
    notes: Vec<String>,
}

/// Loads a generated directory when complete, otherwise synthesizes from the
/// config; used by the diagnostic commands.
fn load_or_synth(cfg: &ExperimentConfig, dir: Option<&Path>) -> CliResult<(Instance, u64)> {
    if let Some(dir) = dir {
        let names =
            ["graph1.edges", "graph2.edges", "p_star.csv", "signals1.bin", "signals2.bin"];
        if names.iter().all(|n| dir.join(n).is_file()) {
            let g1 = load_edge_list(&dir.join("graph1.edges"))?;
            let g2 = load_edge_list(&dir.join("graph2.edges"))?;
            let p_star = read_p_star(&dir.join("p_star.csv"))?;
            let y1 = SignalBatch::load(&dir.join("signals1.bin"))?;
            let y2 = SignalBatch::load(&dir.join("signals2.bin"))?;
            let m = y1.m() as u64;
            let (l1, l2) = (laplacian(&g1), laplacian(&g2));
            return Ok((Instance { g1, g2, p_star, l1, l2, y1, y2 }, m));
        }
    }
    let m = cfg.resolved_m()?;
    let inst = synth_instance(&cfg.model, &cfg.filter1, &cfg.filter2, cfg.sigma2, m, cfg.seed)?;
    Ok((inst, m))
}

/// `bounds`: evaluate every diagnostic the recovery theory defines on one
/// instance — spectral gaps and perturbations, leakage margins, the noise
/// ceiling, the optimality-gap bound against its realized value, and the
/// error-probability bound shape.
pub fn cmd_bounds(cfg: &ExperimentConfig, out: Option<&Path>) -> CliResult<serde_json::Value> {
    let (inst, m) = load_or_synth(cfg, out)?;
    let n = inst.g1.n();
    let mut notes = Vec::new();

    let c1 = true_covariance(&cfg.filter1, &inst.l1)?;
    let c2 = true_covariance(&cfg.filter2, &inst.l2)?;
    let true1 = eig_sym(c1.matrix())?;
    let true2 = eig_sym(c2.matrix())?;
    let est1 = sample_covariance(&inst.y1)?;
    let est2 = sample_covariance(&inst.y2)?;

    let mut blind = blind_match_from_covariances(&est1, &est2, &blind_params(cfg, n))?;
    blind.set_ground_truth(&inst.p_star)?;
    let k = blind.k_used;

    let mut diagnostics = spectral_diagnostics(&true1, &true2, &est1, &est2, k)?;
    diagnostics.kappa_hat = Some(kappa_hat_estimate(&inst.y1, &true1, k)?);

    let vbar1 = abs_basis(&true1, k)?;
    let vbar2 = abs_basis(&true2, k)?;
    let leakage_true = leakage_profile(&vbar1, &vbar2, &inst.p_star, RowExclusion::MatchedRow)?;
    let ebasis1 = eig_sym(est1.matrix())?;
    let ebasis2 = eig_sym(est2.matrix())?;
    let leakage_blind = leakage_profile(
        &abs_basis(&ebasis1, k)?,
        &abs_basis(&ebasis2, k)?,
        &blind.permutation,
        RowExclusion::MatchedRow,
    )?;

    let ceiling = noise_ceiling(leakage_true.rho, diagnostics.delta_min_k, k)?;
    let gap_bound = match optimality_gap_bound(&diagnostics, k, n) {
        Ok(b) => Some(b),
        Err(e) => {
            notes.push(format!("optimality-gap bound unavailable: {e}"));
            None
        }
    };
    let profit_true = ProfitMatrix::from_factors(&vbar1, &vbar2)?;
    let realized = optimality_gap_realized(&profit_true, &blind.permutation, k)?;
    let error_bound = match error_probability_bound(m, n, cfg.sigma2, ceiling, &BoundParams::default())
    {
        Ok(b) => Some(b),
        Err(e) => {
            notes.push(format!("error-probability bound unavailable: {e}"));
            None
        }
    };

    let report = BoundsReport {
        provenance: Provenance::new(cfg),
        command: "bounds",
        n,
        m,
        k,
        sigma2: cfg.sigma2,
        eps: cfg.eps.resolve_eps(n),
        varsigma: cfg.varsigma.resolve_varsigma(n),
        diagnostics,
        leakage_true,
        leakage_blind_surrogate: leakage_blind,
        noise_ceiling: ceiling,
        optimality_gap_bound: gap_bound,
        optimality_gap_realized: realized,
        bound_holds: gap_bound.map(|b| realized <= b),
        error_probability_bound: error_bound,
        lambda2_graph2: true2.values()[1.min(n - 1)],
        lambda_n_graph2: true2.values()[n - 1],
        blind,
        notes,
    };
    if let Some(dir) = out {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Data(format!("cannot create '{}': {e}", dir.display())))?;
        write_json(&dir.join("bounds.json"), &report)?;
    }
    Ok(serde_json::to_value(&report).expect("bounds report serializes"))
}

#[derive(Serialize)]
struct IdentifyReport {
    provenance: Provenance,
    command: &'static str,
    n: usize,
    m: u64,
    k_used: usize,
    eps: f64,
    /// Blind scan verdict from the estimated bases alone.
    blind: IdentifiabilityReport,
    /// Exact transposition scan on the Laplacians (topology is available
    /// here; a truly blind deployment would omit this block).
    exact: KnownVerdict,
    /// Whether the blind scan and the exact scan reach the same verdict.
    agree: bool,
}

/// `identify`: blind identifiability scan plus the exact known-topology
/// oracle, reporting whether they agree.
pub fn cmd_identify(cfg: &ExperimentConfig, out: Option<&Path>) -> CliResult<serde_json::Value> {
    let (inst, m) = load_or_synth(cfg, out)?;
    let n = inst.g1.n();
    let blind = blind_match(&inst.y1, &inst.y2, &blind_params(cfg, n))?;
    let exact = is_identifiable_known(&inst.l1, &inst.l2);
    let blind_flag = identifiable_flag(&blind.identifiability);
    let exact_flag = matches!(exact, KnownVerdict::Identifiable);
    let report = IdentifyReport {
        provenance: Provenance::new(cfg),
        command: "identify",
        n,
        m,
        k_used: blind.k_used,
        eps: cfg.eps.resolve_eps(n),
        blind: blind.identifiability,
        exact,
        agree: blind_flag == exact_flag,
    };
    if let Some(dir) = out {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Data(format!("cannot create '{}': {e}", dir.display())))?;
        write_json(&dir.join("identify.json"), &report)?;
    }
    Ok(serde_json::to_value(&report).expect("identify report serializes"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::OrDefault;

    fn tiny_cfg() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::defaults_without_model();
        cfg.model = GraphModel::Er { n: 8, p: 0.5 };
        cfg.m_samples = vec![500];
        cfg.trials = 2;
        cfg.seed = 11;
        cfg
    }

    #[test]
    fn permutation_csv_roundtrips() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = Permutation::random(9, &mut rng);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p_star.csv");
        fs::write(&path, p_star_csv(&p)).unwrap();
        assert_eq!(read_p_star(&path).unwrap(), p);
    }

    #[test]
    fn malformed_permutation_csv_is_a_data_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p_star.csv");
        fs::write(&path, "from,to\n0,1\n0,0\n").unwrap();
        match read_p_star(&path) {
            Err(CliError::Data(msg)) => assert!(msg.contains("exactly once"), "{msg}"),
            other => panic!("expected data error, got {other:?}"),
        }
    }

    #[test]
    fn synth_pairs_are_isomorphic_relabelings() {
        let cfg = tiny_cfg();
        let (g1, g2, p_star) = synth_graph_pair(&cfg.model, 3).unwrap();
        let dis = disagreement(&laplacian(&g1), &laplacian(&g2), &p_star).unwrap();
        assert!(dis.abs() < 1e-9, "relabeled pair should have zero disagreement, got {dis}");
        assert_eq!(g1.n(), g2.n());
    }

    #[test]
    fn sweep_points_expand_each_axis() {
        let mut cfg = tiny_cfg();
        cfg.m_samples = vec![100, 200, 300];
        cfg.sweep_axis = Some(SweepAxis::M);
        let (_, pts) = build_points(&cfg).unwrap();
        assert_eq!(pts.len(), 3);
        assert_eq!(pts[2].m, 300);

        let mut cfg = tiny_cfg();
        cfg.sweep_axis = Some(SweepAxis::Sigma2);
        cfg.sigma2_list = Some(vec![0.01, 0.1]);
        let (_, pts) = build_points(&cfg).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[1].sigma2, 0.1);

        let mut cfg = tiny_cfg();
        cfg.sweep_axis = Some(SweepAxis::N);
        cfg.n_list = Some(vec![10, 20]);
        cfg.m_rule = MRule::NLnN;
        let (_, pts) = build_points(&cfg).unwrap();
        assert_eq!(pts[0].m, (750.0 * 10.0 * 10.0f64.ln()).ceil() as u64);
        assert_eq!(pts[1].model.n_hint(), Some(20));

        let mut cfg = tiny_cfg();
        cfg.sweep_axis = Some(SweepAxis::Alpha);
        cfg.alpha_list = Some(vec![0.0, 0.2]);
        let (_, pts) = build_points(&cfg).unwrap();
        match pts[1].filter2 {
            GraphFilter::Resolvent { alpha } => assert!((alpha - 0.3).abs() < 1e-12),
            ref other => panic!("expected resolvent, got {other:?}"),
        }

        let mut cfg = tiny_cfg();
        cfg.sweep_axis = Some(SweepAxis::Beta);
        cfg.model = GraphModel::Wigner { n: 10, beta: 0.1 };
        cfg.beta_list = Some(vec![0.1, 0.4]);
        let (_, pts) = build_points(&cfg).unwrap();
        assert_eq!(pts[1].model, GraphModel::Wigner { n: 10, beta: 0.4 });
    }

    #[test]
    fn sweep_axis_misconfigurations_are_config_errors() {
        let mut cfg = tiny_cfg();
        cfg.sweep_axis = Some(SweepAxis::Sigma2);
        assert!(matches!(build_points(&cfg), Err(CliError::Config(_))));

        let mut cfg = tiny_cfg();
        cfg.sweep_axis = Some(SweepAxis::Beta);
        cfg.beta_list = Some(vec![0.2]);
        // ER model cannot take a beta axis.
        assert!(matches!(build_points(&cfg), Err(CliError::Config(_))));

        let mut cfg = tiny_cfg();
        cfg.sweep_axis = Some(SweepAxis::M);
        cfg.m_rule = MRule::NLnN;
        assert!(matches!(build_points(&cfg), Err(CliError::Config(_))));

        let mut cfg = tiny_cfg();
        cfg.sweep_axis = Some(SweepAxis::Alpha);
        cfg.alpha_list = Some(vec![0.1]);
        cfg.filter1 = GraphFilter::Polynomial { coeffs: vec![1.0] };
        assert!(matches!(build_points(&cfg), Err(CliError::Config(_))));
    }

    #[test]
    fn blind_params_resolve_defaults_from_size() {
        let mut cfg = tiny_cfg();
        cfg.eps = OrDefault::Default;
        cfg.varsigma = OrDefault::Value(1e-3);
        let params = blind_params(&cfg, 40);
        assert!((params.eps - 2.0).abs() < 1e-12);
        assert!((params.varsigma - 1e-3).abs() < 1e-15);
    }
}

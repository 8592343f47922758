//! Flat key=value experiment configuration.
//!
//! The format is a human-editable text file: one `key = value` per line,
//! `#` starts a comment, blank lines are skipped. Parsing is typed, rejects
//! unknown and duplicate keys exhaustively, and produces a canonical SHA-256
//! hash of the accepted pairs so every run's manifest pins the exact
//! configuration that produced it.

use std::collections::BTreeMap;
use std::path::PathBuf;

use graphmatch_core::{BlindMode, GraphFilter, Solver};
use sha2::{Digest, Sha256};

/// Configuration-level failure with a field-oriented message. The harness
/// maps it to the config-error exit code.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConfigError(msg.into()))
}

/// Which graph family (or user-supplied dataset) drives an experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphModel {
    /// Erdős–Rényi: every unordered pair is an edge with probability `p`.
    Er { n: usize, p: f64 },
    /// Barabási–Albert preferential attachment.
    Ba { n: usize, m0: usize, m_attach: usize },
    /// Correlated Gaussian Wigner pair; `beta` controls how far apart the
    /// two graphs are.
    Wigner { n: usize, beta: f64 },
    /// Edge list on disk, subsampled twice with keep-probability `sample_q`.
    Dataset { path: PathBuf, sample_q: f64 },
}

impl GraphModel {
    /// Node count for synthetic families; `None` for datasets (the file
    /// decides).
    pub fn n_hint(&self) -> Option<usize> {
        match self {
            GraphModel::Er { n, .. }
            | GraphModel::Ba { n, .. }
            | GraphModel::Wigner { n, .. } => Some(*n),
            GraphModel::Dataset { .. } => None,
        }
    }

    /// Same family with the node count replaced (for size sweeps).
    pub fn with_n(&self, n: usize) -> Result<GraphModel> {
        match self {
            GraphModel::Er { p, .. } => Ok(GraphModel::Er { n, p: *p }),
            GraphModel::Ba { m0, m_attach, .. } => {
                Ok(GraphModel::Ba { n, m0: *m0, m_attach: *m_attach })
            }
            GraphModel::Wigner { beta, .. } => Ok(GraphModel::Wigner { n, beta: *beta }),
            GraphModel::Dataset { .. } => {
                err("the size sweep axis does not apply to dataset models")
            }
        }
    }

    /// Same family with the Wigner correlation parameter replaced.
    pub fn with_beta(&self, beta: f64) -> Result<GraphModel> {
        match self {
            GraphModel::Wigner { n, .. } => Ok(GraphModel::Wigner { n: *n, beta }),
            _ => err("the beta sweep axis requires model=wigner"),
        }
    }

    /// Structured JSON echo for manifests.
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            GraphModel::Er { n, p } => serde_json::json!({"kind": "er", "n": n, "p": p}),
            GraphModel::Ba { n, m0, m_attach } => {
                serde_json::json!({"kind": "ba", "n": n, "m0": m0, "m_attach": m_attach})
            }
            GraphModel::Wigner { n, beta } => {
                serde_json::json!({"kind": "wigner", "n": n, "beta": beta})
            }
            GraphModel::Dataset { path, sample_q } => serde_json::json!({
                "kind": "dataset",
                "path": path.display().to_string(),
                "sample_q": sample_q,
            }),
        }
    }
}

/// A real parameter that may defer to its size-dependent default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrDefault {
    Default,
    Value(f64),
}

impl OrDefault {
    /// Identifiability threshold: default ε = n/20.
    pub fn resolve_eps(self, n: usize) -> f64 {
        match self {
            OrDefault::Default => n as f64 / 20.0,
            OrDefault::Value(v) => v,
        }
    }

    /// Dimension-selection gap threshold: default ς = (10n)⁻².
    pub fn resolve_varsigma(self, n: usize) -> f64 {
        match self {
            OrDefault::Default => 1.0 / (10.0 * n as f64).powi(2),
            OrDefault::Value(v) => v,
        }
    }
}

/// Sweep axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    M,
    Sigma2,
    N,
    Alpha,
    Beta,
}

impl SweepAxis {
    pub fn label(self) -> &'static str {
        match self {
            SweepAxis::M => "m",
            SweepAxis::Sigma2 => "sigma2",
            SweepAxis::N => "n",
            SweepAxis::Alpha => "alpha",
            SweepAxis::Beta => "beta",
        }
    }
}

/// How the sample count is chosen at each sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MRule {
    /// Use the configured `m_samples` value.
    Fixed,
    /// Scale with graph size: M = ⌈750·n·ln n⌉.
    NLnN,
}

impl MRule {
    /// Sample count for a graph of `n` nodes under this rule.
    pub fn samples_for(self, n: usize, fixed_m: u64) -> u64 {
        match self {
            MRule::Fixed => fixed_m,
            MRule::NLnN => (750.0 * n as f64 * (n as f64).ln()).ceil() as u64,
        }
    }
}

/// One fully parsed experiment configuration with every knob typed.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model: GraphModel,
    pub filter1: GraphFilter,
    pub filter2: GraphFilter,
    pub sigma2: f64,
    /// Sample counts; a single entry for plain runs, several for M-sweeps.
    pub m_samples: Vec<u64>,
    pub trials: usize,
    pub seed: u64,
    pub solver: Solver,
    pub eps: OrDefault,
    pub varsigma: OrDefault,
    pub identifiability_mode: BlindMode,
    pub outputs: Option<PathBuf>,
    pub sweep_axis: Option<SweepAxis>,
    pub sigma2_list: Option<Vec<f64>>,
    pub n_list: Option<Vec<usize>>,
    pub alpha_list: Option<Vec<f64>>,
    pub beta_list: Option<Vec<f64>>,
    pub m_rule: MRule,
    pub k_override: Option<usize>,
    /// SHA-256 over the canonicalized accepted pairs (sorted `key=value`
    /// lines, `outputs` excluded so relocating results keeps the hash).
    pub config_hash: String,
}

const KNOWN_KEYS: &[&str] = &[
    "model",
    "n",
    "p",
    "m0",
    "m_attach",
    "beta",
    "dataset_path",
    "sample_q",
    "filter1",
    "filter2",
    "sigma2",
    "m_samples",
    "trials",
    "seed",
    "solver",
    "eps",
    "varsigma",
    "identifiability_mode",
    "outputs",
    "sweep_axis",
    "sigma2_list",
    "n_list",
    "alpha_list",
    "beta_list",
    "m_rule",
    "k_override",
];

/// Parses a filter spec string: `resolvent:0.1`, `poly:1,0.5`,
/// `power:0.1,3`, or `arma:0.5,0.8`.
pub fn parse_filter(spec: &str) -> Result<GraphFilter> {
    let (kind, args) = match spec.split_once(':') {
        Some(pair) => pair,
        None => return err(format!("filter spec '{spec}' needs the form kind:args")),
    };
    let nums: Vec<f64> = {
        let mut out = Vec::new();
        for part in args.split(',') {
            match part.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => out.push(v),
                _ => return err(format!("filter spec '{spec}': bad number '{part}'")),
            }
        }
        out
    };
    match kind.trim() {
        "resolvent" => {
            if nums.len() != 1 {
                return err(format!("resolvent filter takes one parameter, got {}", nums.len()));
            }
            Ok(GraphFilter::Resolvent { alpha: nums[0] })
        }
        "poly" => {
            if nums.is_empty() {
                return err("poly filter needs at least one coefficient");
            }
            Ok(GraphFilter::Polynomial { coeffs: nums })
        }
        "power" => {
            if nums.len() != 2 {
                return err(format!("power filter takes alpha,steps; got {} values", nums.len()));
            }
            if nums[1] < 0.0 || nums[1].fract() != 0.0 || nums[1] > u32::MAX as f64 {
                return err(format!("power filter steps must be a nonnegative integer, got {}", nums[1]));
            }
            Ok(GraphFilter::Power { alpha: nums[0], t_d: nums[1] as u32 })
        }
        "arma" => {
            if nums.len() != 2 {
                return err(format!("arma filter takes two parameters, got {}", nums.len()));
            }
            Ok(GraphFilter::Arma { alpha1: nums[0], alpha2: nums[1] })
        }
        other => err(format!(
            "unknown filter kind '{other}' (expected resolvent, poly, power, or arma)"
        )),
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => err(format!("key '{key}': expected a finite number, got '{v}'")),
    }
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse::<usize>()
        .map_err(|_| ConfigError(format!("key '{key}': expected a nonnegative integer, got '{v}'")))
}

fn parse_u64(key: &str, v: &str) -> Result<u64> {
    v.parse::<u64>()
        .map_err(|_| ConfigError(format!("key '{key}': expected a nonnegative integer, got '{v}'")))
}

fn parse_f64_list(key: &str, v: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for part in v.split(',') {
        out.push(parse_f64(key, part.trim())?);
    }
    if out.is_empty() {
        return err(format!("key '{key}': list must be non-empty"));
    }
    Ok(out)
}

fn parse_usize_list(key: &str, v: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in v.split(',') {
        out.push(parse_usize(key, part.trim())?);
    }
    if out.is_empty() {
        return err(format!("key '{key}': list must be non-empty"));
    }
    Ok(out)
}

/// Splits a compact model spec `family(arg1,arg2,...)` into its parts.
fn split_compact(v: &str) -> Option<(&str, Vec<&str>)> {
    let open = v.find('(')?;
    let close = v.rfind(')')?;
    if close != v.len() - 1 || close < open {
        return None;
    }
    let family = v[..open].trim();
    let args: Vec<&str> = v[open + 1..close].split(',').map(str::trim).collect();
    Some((family, args))
}

struct ModelFields<'a> {
    pairs: &'a BTreeMap<String, (usize, String)>,
}

impl<'a> ModelFields<'a> {
    fn take(&self, key: &str) -> Result<&'a str> {
        match self.pairs.get(key) {
            Some((_, v)) => Ok(v.as_str()),
            None => err(format!("model requires key '{key}'")),
        }
    }

    fn forbid_compact_leftovers(&self, family: &str) -> Result<()> {
        for k in ["n", "p", "m0", "m_attach", "beta", "dataset_path", "sample_q"] {
            if self.pairs.contains_key(k) {
                return err(format!(
                    "model '{family}' was given in compact form; remove the flat key '{k}'"
                ));
            }
        }
        Ok(())
    }
}

fn build_model(raw: &str, fields: &ModelFields<'_>) -> Result<GraphModel> {
    if let Some((family, args)) = split_compact(raw) {
        fields.forbid_compact_leftovers(family)?;
        return match family {
            "er" => {
                if args.len() != 2 {
                    return err("model er(n,p) takes two arguments");
                }
                finish_er(parse_usize("model.n", args[0])?, parse_f64("model.p", args[1])?)
            }
            "ba" => {
                if args.len() != 3 {
                    return err("model ba(n,m0,m) takes three arguments");
                }
                finish_ba(
                    parse_usize("model.n", args[0])?,
                    parse_usize("model.m0", args[1])?,
                    parse_usize("model.m", args[2])?,
                )
            }
            "wigner" => {
                if args.len() != 2 {
                    return err("model wigner(n,beta) takes two arguments");
                }
                finish_wigner(parse_usize("model.n", args[0])?, parse_f64("model.beta", args[1])?)
            }
            "dataset" => {
                if args.len() != 2 {
                    return err("model dataset(path,sample_q) takes two arguments");
                }
                finish_dataset(args[0], parse_f64("model.sample_q", args[1])?)
            }
            other => err(format!(
                "unknown model family '{other}' (expected er, ba, wigner, or dataset)"
            )),
        };
    }
    match raw {
        "er" => finish_er(
            parse_usize("n", fields.take("n")?)?,
            parse_f64("p", fields.take("p")?)?,
        ),
        "ba" => finish_ba(
            parse_usize("n", fields.take("n")?)?,
            parse_usize("m0", fields.take("m0")?)?,
            parse_usize("m_attach", fields.take("m_attach")?)?,
        ),
        "wigner" => finish_wigner(
            parse_usize("n", fields.take("n")?)?,
            parse_f64("beta", fields.take("beta")?)?,
        ),
        "dataset" => finish_dataset(
            fields.take("dataset_path")?,
            parse_f64("sample_q", fields.take("sample_q")?)?,
        ),
        other => err(format!(
            "unknown model family '{other}' (expected er, ba, wigner, or dataset)"
        )),
    }
}

fn finish_er(n: usize, p: f64) -> Result<GraphModel> {
    if n < 2 {
        return err("er model needs n >= 2");
    }
    if !(0.0..=1.0).contains(&p) {
        return err(format!("er edge probability must lie in [0,1], got {p}"));
    }
    Ok(GraphModel::Er { n, p })
}

fn finish_ba(n: usize, m0: usize, m_attach: usize) -> Result<GraphModel> {
    if n < 2 {
        return err("ba model needs n >= 2");
    }
    if m_attach < 1 || m0 < m_attach || m0 > n {
        return err(format!(
            "ba model needs 1 <= m <= m0 <= n, got n={n}, m0={m0}, m={m_attach}"
        ));
    }
    Ok(GraphModel::Ba { n, m0, m_attach })
}

fn finish_wigner(n: usize, beta: f64) -> Result<GraphModel> {
    if n < 2 {
        return err("wigner model needs n >= 2");
    }
    if !(beta > 0.0 && beta < 1.0) {
        return err(format!("wigner beta must lie strictly in (0,1), got {beta}"));
    }
    Ok(GraphModel::Wigner { n, beta })
}

fn finish_dataset(path: &str, sample_q: f64) -> Result<GraphModel> {
    if path.is_empty() {
        return err("dataset model needs a non-empty path");
    }
    if !(0.0..=1.0).contains(&sample_q) {
        return err(format!("dataset sample_q must lie in [0,1], got {sample_q}"));
    }
    Ok(GraphModel::Dataset { path: PathBuf::from(path), sample_q })
}

impl ExperimentConfig {
    /// Parses a config file's text. Every diagnostic names the offending key
    /// (and line, for lexical problems).
    pub fn parse(text: &str) -> Result<Self> {
        // Lexical pass: key=value pairs, comments, duplicate/unknown keys.
        let mut pairs: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = match line.split_once('=') {
                Some((k, v)) => (k.trim().to_string(), v.trim().to_string()),
                None => {
                    return err(format!("line {line_no}: expected key = value, got '{line}'"));
                }
            };
            if key.is_empty() {
                return err(format!("line {line_no}: empty key"));
            }
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return err(format!("line {line_no}: unknown key '{key}'"));
            }
            if value.is_empty() {
                return err(format!("line {line_no}: key '{key}' has an empty value"));
            }
            if let Some((first_line, _)) = pairs.get(&key) {
                return err(format!(
                    "line {line_no}: duplicate key '{key}' (first set on line {first_line})"
                ));
            }
            pairs.insert(key, (line_no, value));
        }

        let get = |key: &str| pairs.get(key).map(|(_, v)| v.as_str());

        // Model comes first; several defaults depend on its node count.
        let model_raw = match get("model") {
            Some(v) => v,
            None => return err("missing required key 'model'"),
        };
        let model = build_model(model_raw, &ModelFields { pairs: &pairs })?;

        let filter1 = match get("filter1") {
            Some(v) => parse_filter(v)?,
            None => GraphFilter::Resolvent { alpha: 0.1 },
        };
        let filter2 = match get("filter2") {
            Some(v) => parse_filter(v)?,
            None => GraphFilter::Resolvent { alpha: 0.3 },
        };

        let sigma2 = match get("sigma2") {
            Some(v) => {
                let x = parse_f64("sigma2", v)?;
                if x < 0.0 {
                    return err(format!("sigma2 must be nonnegative, got {x}"));
                }
                x
            }
            None => 0.01,
        };

        let m_samples = match get("m_samples") {
            Some(v) => {
                let mut out = Vec::new();
                for part in v.split(',') {
                    let m = parse_u64("m_samples", part.trim())?;
                    if m < 2 {
                        return err(format!("m_samples entries must be >= 2, got {m}"));
                    }
                    out.push(m);
                }
                out
            }
            None => vec![100_000],
        };

        let trials = match get("trials") {
            Some(v) => parse_usize("trials", v)?,
            None => 50,
        };
        if trials < 1 {
            return err("trials must be at least 1");
        }
        if trials > 10_000 {
            return err("trials must be at most 10000 so per-point seed blocks stay disjoint");
        }

        let seed = match get("seed") {
            Some(v) => parse_u64("seed", v)?,
            None => 0,
        };

        let solver = match get("solver") {
            Some(v) => v
                .parse::<Solver>()
                .map_err(|e| ConfigError(format!("key 'solver': {e}")))?,
            None => Solver::Auto,
        };

        let parse_or_default = |key: &str| -> Result<OrDefault> {
            match get(key) {
                None => Ok(OrDefault::Default),
                Some("default") => Ok(OrDefault::Default),
                Some(v) => {
                    let x = parse_f64(key, v)?;
                    if x <= 0.0 {
                        return err(format!("key '{key}' must be positive, got {x}"));
                    }
                    Ok(OrDefault::Value(x))
                }
            }
        };
        let eps = parse_or_default("eps")?;
        let varsigma = parse_or_default("varsigma")?;

        let identifiability_mode = match get("identifiability_mode") {
            Some(v) => v
                .parse::<BlindMode>()
                .map_err(|e| ConfigError(format!("key 'identifiability_mode': {e}")))?,
            None => BlindMode::SelfSwap,
        };

        let outputs = get("outputs").map(PathBuf::from);

        let sweep_axis = match get("sweep_axis") {
            None => None,
            Some("m") => Some(SweepAxis::M),
            Some("sigma2") => Some(SweepAxis::Sigma2),
            Some("n") => Some(SweepAxis::N),
            Some("alpha") => Some(SweepAxis::Alpha),
            Some("beta") => Some(SweepAxis::Beta),
            Some(other) => {
                return err(format!(
                    "key 'sweep_axis': unknown axis '{other}' (expected m, sigma2, n, alpha, or beta)"
                ));
            }
        };

        let sigma2_list = match get("sigma2_list") {
            Some(v) => {
                let xs = parse_f64_list("sigma2_list", v)?;
                if xs.iter().any(|&x| x < 0.0) {
                    return err("sigma2_list entries must be nonnegative");
                }
                Some(xs)
            }
            None => None,
        };
        let n_list = match get("n_list") {
            Some(v) => {
                let xs = parse_usize_list("n_list", v)?;
                if xs.iter().any(|&x| x < 2) {
                    return err("n_list entries must be >= 2");
                }
                Some(xs)
            }
            None => None,
        };
        let alpha_list = get("alpha_list").map(|v| parse_f64_list("alpha_list", v)).transpose()?;
        let beta_list = match get("beta_list") {
            Some(v) => {
                let xs = parse_f64_list("beta_list", v)?;
                if xs.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
                    return err("beta_list entries must lie strictly in (0,1)");
                }
                Some(xs)
            }
            None => None,
        };

        let m_rule = match get("m_rule") {
            None | Some("fixed") => MRule::Fixed,
            Some("n_ln_n") => MRule::NLnN,
            Some(other) => {
                return err(format!(
                    "key 'm_rule': unknown rule '{other}' (expected fixed or n_ln_n)"
                ));
            }
        };

        let k_override = match get("k_override") {
            Some(v) => {
                let k = parse_usize("k_override", v)?;
                if k < 1 {
                    return err("k_override must be at least 1");
                }
                Some(k)
            }
            None => None,
        };

        // Canonical hash: sorted key=value lines, excluding `outputs` (where
        // results land does not change what the experiment is).
        let mut hasher = Sha256::new();
        for (key, (_, value)) in &pairs {
            if key == "outputs" {
                continue;
            }
            hasher.update(key.as_bytes());
            hasher.update(b"=");
            hasher.update(value.as_bytes());
            hasher.update(b"\n");
        }
        let config_hash: String =
            hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();

        Ok(ExperimentConfig {
            model,
            filter1,
            filter2,
            sigma2,
            m_samples,
            trials,
            seed,
            solver,
            eps,
            varsigma,
            identifiability_mode,
            outputs,
            sweep_axis,
            sigma2_list,
            n_list,
            alpha_list,
            beta_list,
            m_rule,
            k_override,
            config_hash,
        })
    }

    /// Sample count for single-instance commands: the one configured value,
    /// scaled by the n·ln n rule when selected. Lists are reserved for the
    /// M-sweep axis.
    pub fn resolved_m(&self) -> Result<u64> {
        if self.m_samples.len() != 1 {
            return err(
                "m_samples lists belong to sweep_axis=m; this command needs a single value",
            );
        }
        let m = self.m_samples[0];
        match self.m_rule {
            MRule::Fixed => Ok(m),
            MRule::NLnN => match self.model.n_hint() {
                Some(n) => Ok(MRule::NLnN.samples_for(n, m)),
                None => err(
                    "m_rule=n_ln_n needs a synthetic model with a declared size (dataset sizes \
                     come from the file)",
                ),
            },
        }
    }

    /// Reads and parses a config file from disk.
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ConfigError(format!("cannot read config file '{}': {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    /// A permissive configuration for commands run without a config file
    /// (everything at its default; the model is irrelevant and unused).
    pub fn defaults_without_model() -> Self {
        ExperimentConfig {
            model: GraphModel::Er { n: 2, p: 0.5 },
            filter1: GraphFilter::Resolvent { alpha: 0.1 },
            filter2: GraphFilter::Resolvent { alpha: 0.3 },
            sigma2: 0.01,
            m_samples: vec![100_000],
            trials: 50,
            seed: 0,
            solver: Solver::Auto,
            eps: OrDefault::Default,
            varsigma: OrDefault::Default,
            identifiability_mode: BlindMode::SelfSwap,
            outputs: None,
            sweep_axis: None,
            sigma2_list: None,
            n_list: None,
            alpha_list: None,
            beta_list: None,
            m_rule: MRule::Fixed,
            k_override: None,
            config_hash: String::from("(no config file)"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_config() {
        let cfg = ExperimentConfig::parse(
            "# experiment\n\
             model = er(50,0.4)\n\
             filter1 = resolvent:0.1\n\
             filter2 = resolvent:0.3\n\
             sigma2 = 0.01\n\
             m_samples = 1000,10000,100000\n\
             trials = 20\n\
             seed = 7\n\
             solver = hungarian\n\
             eps = default\n\
             varsigma = 0.0004\n\
             identifiability_mode = self_swap\n\
             sweep_axis = m\n",
        )
        .unwrap();
        assert_eq!(cfg.model, GraphModel::Er { n: 50, p: 0.4 });
        assert_eq!(cfg.m_samples, vec![1000, 10000, 100000]);
        assert_eq!(cfg.trials, 20);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.solver, Solver::Hungarian);
        assert_eq!(cfg.eps, OrDefault::Default);
        assert_eq!(cfg.varsigma, OrDefault::Value(0.0004));
        assert_eq!(cfg.sweep_axis, Some(SweepAxis::M));
        assert_eq!(cfg.eps.resolve_eps(50), 2.5);
        assert!((cfg.varsigma.resolve_varsigma(50) - 0.0004).abs() < 1e-15);
    }

    #[test]
    fn flat_model_fields_work() {
        let cfg = ExperimentConfig::parse("model = ba\nn = 30\nm0 = 5\nm_attach = 3\n").unwrap();
        assert_eq!(cfg.model, GraphModel::Ba { n: 30, m0: 5, m_attach: 3 });
        let cfg = ExperimentConfig::parse(
            "model = dataset\ndataset_path = data/x.edges\nsample_q = 0.98\n",
        )
        .unwrap();
        assert_eq!(
            cfg.model,
            GraphModel::Dataset { path: PathBuf::from("data/x.edges"), sample_q: 0.98 }
        );
    }

    #[test]
    fn rejects_unknown_duplicate_and_malformed_keys() {
        let e = ExperimentConfig::parse("model = er(10,0.5)\nbogus = 3\n").unwrap_err();
        assert!(e.0.contains("unknown key 'bogus'"), "{e}");
        let e = ExperimentConfig::parse("model = er(10,0.5)\nseed = 1\nseed = 2\n").unwrap_err();
        assert!(e.0.contains("duplicate key 'seed'"), "{e}");
        let e = ExperimentConfig::parse("model er(10,0.5)\n").unwrap_err();
        assert!(e.0.contains("expected key = value"), "{e}");
        let e = ExperimentConfig::parse("model = er(10,0.5)\ntrials = 0\n").unwrap_err();
        assert!(e.0.contains("trials"), "{e}");
        let e = ExperimentConfig::parse("model = er(10,0.5)\nn = 10\n").unwrap_err();
        assert!(e.0.contains("compact form"), "{e}");
    }

    #[test]
    fn rejects_missing_or_invalid_model() {
        let e = ExperimentConfig::parse("seed = 1\n").unwrap_err();
        assert!(e.0.contains("missing required key 'model'"), "{e}");
        let e = ExperimentConfig::parse("model = ring(5)\n").unwrap_err();
        assert!(e.0.contains("unknown model family"), "{e}");
        let e = ExperimentConfig::parse("model = er(10,1.5)\n").unwrap_err();
        assert!(e.0.contains("[0,1]"), "{e}");
        let e = ExperimentConfig::parse("model = wigner\nn = 10\n").unwrap_err();
        assert!(e.0.contains("model requires key 'beta'"), "{e}");
    }

    #[test]
    fn parses_every_filter_kind_and_rejects_bad_specs() {
        assert_eq!(parse_filter("resolvent:0.25").unwrap(), GraphFilter::Resolvent { alpha: 0.25 });
        assert_eq!(
            parse_filter("poly:1,0.5").unwrap(),
            GraphFilter::Polynomial { coeffs: vec![1.0, 0.5] }
        );
        assert_eq!(
            parse_filter("power:0.1,3").unwrap(),
            GraphFilter::Power { alpha: 0.1, t_d: 3 }
        );
        assert_eq!(
            parse_filter("arma:0.5,0.8").unwrap(),
            GraphFilter::Arma { alpha1: 0.5, alpha2: 0.8 }
        );
        assert!(parse_filter("resolvent").is_err());
        assert!(parse_filter("power:0.1,2.5").is_err());
        assert!(parse_filter("lowpass:1").is_err());
    }

    #[test]
    fn hash_ignores_outputs_but_not_science_keys() {
        let a = ExperimentConfig::parse("model = er(10,0.5)\nseed = 1\n").unwrap();
        let b =
            ExperimentConfig::parse("model = er(10,0.5)\nseed = 1\noutputs = /tmp/x\n").unwrap();
        let c = ExperimentConfig::parse("model = er(10,0.5)\nseed = 2\n").unwrap();
        assert_eq!(a.config_hash, b.config_hash);
        assert_ne!(a.config_hash, c.config_hash);
        // Key order does not matter; the canonical form is sorted.
        let d = ExperimentConfig::parse("seed = 1\nmodel = er(10,0.5)\n").unwrap();
        assert_eq!(a.config_hash, d.config_hash);
    }

    #[test]
    fn m_rule_scales_sample_counts() {
        assert_eq!(MRule::Fixed.samples_for(100, 5000), 5000);
        let m = MRule::NLnN.samples_for(100, 5000);
        assert_eq!(m, (750.0 * 100.0 * (100.0f64).ln()).ceil() as u64);
    }
}

//! Experiment configuration.
//!
//! A config is a TOML document with a `[profile]` table, an optional
//! `[torus]` table, exactly one `[experiment.<name>]` table and an optional
//! `[output]` table. Unknown keys are rejected. The full grammar is in the
//! repository README.

use std::fmt;
use std::path::{Path, PathBuf};

use degenlab_core::profile::ProfileDescriptor;
use degenlab_core::torus::HeatScheme;
use degenlab_core::torus_spec::Variant;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// A malformed or out-of-range config entry.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigError {
    /// Dotted key, e.g. `torus.nt`.
    pub key: String,
    /// 1-based line of the key in the source, when it appears there.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "config error at line {l}, key `{}`: {}", self.key, self.message),
            None => write!(f, "config error, key `{}`: {}", self.key, self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub profile: ProfileSection,
    #[serde(default)]
    pub torus: TorusSection,
    pub experiment: ExperimentTable,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Constant,
    Polynomial,
    Tabulated,
}

/// A coefficient given as one number or as a list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coeffs {
    Scalar(f64),
    List(Vec<f64>),
}

impl Default for Coeffs {
    fn default() -> Self {
        Coeffs::Scalar(0.0)
    }
}

impl Coeffs {
    fn to_vec(&self) -> Vec<f64> {
        match self {
            Coeffs::Scalar(v) => vec![*v],
            Coeffs::List(v) => v.clone(),
        }
    }

    fn all_finite(&self) -> bool {
        self.to_vec().iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    pub kind: ProfileKind,
    pub alpha: Coeffs,
    #[serde(default)]
    pub beta: Coeffs,
    #[serde(default = "one")]
    pub m: u32,
}

fn one() -> u32 {
    1
}

/// Every field is optional; each experiment supplies its own defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusSection {
    pub period_x: Option<f64>,
    pub period_t: Option<f64>,
    pub nx: Option<usize>,
    pub nt: Option<usize>,
    pub variant: Option<Variant>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentTable {
    pub spectrum: Option<SpectrumParams>,
    pub model: Option<ModelParams>,
    pub singular: Option<SingularParams>,
    pub probe: Option<ProbeParams>,
    pub heat: Option<HeatParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumParams {
    pub w_max: f64,
    pub max_count: usize,
}

impl Default for SpectrumParams {
    fn default() -> Self {
        Self { w_max: 200.0, max_count: 8 }
    }
}

/// Manufactured-solution run of the model Dirichlet problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    pub s: f64,
    pub nx: usize,
    pub u_min: f64,
    pub u_max: f64,
    pub n_tau: usize,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self { s: 1.0, nx: 513, u_min: -20.0, u_max: 6.0, n_tau: 4096 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SingularParams {
    pub j: usize,
    pub t1: f64,
    pub t2: f64,
    /// Defaults to `0, 1/2, s_j - 1/2, s_j`.
    pub r_values: Option<Vec<f64>>,
    /// Defaults to `10^{1 + k/4}`, `k = 0..=16`.
    pub cutoffs: Option<Vec<f64>>,
    pub gevrey_window: [f64; 2],
    pub gevrey_samples: usize,
    pub ladder_order: usize,
    pub ladder_t_max: f64,
    pub w_max: f64,
}

impl Default for SingularParams {
    fn default() -> Self {
        Self {
            j: 0,
            t1: 0.5,
            t2: 1.0,
            r_values: None,
            cutoffs: None,
            gevrey_window: [50.0, 5000.0],
            gevrey_samples: 60,
            ladder_order: 6,
            ladder_t_max: 0.01,
            w_max: 200.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeParams {
    pub s_values: Vec<f64>,
    /// Added to `s₀` of the profile and appended to `s_values`.
    pub s0_offsets: Vec<f64>,
    pub eps: Vec<f64>,
}

impl Default for ProbeParams {
    fn default() -> Self {
        Self { s_values: vec![0.0, 1.0, 2.0], s0_offsets: vec![0.5], eps: dyadic_eps(6) }
    }
}

/// `2⁻¹, …, 2⁻ⁿ`.
pub fn dyadic_eps(n: i32) -> Vec<f64> {
    (1..=n).map(|k| 2f64.powi(-k)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeatParams {
    pub scheme: HeatScheme,
    pub dt: f64,
    pub tau_max: f64,
    pub s_values: Vec<f64>,
    pub s0_offsets: Vec<f64>,
    /// Squeeze factor of the initial bump.
    pub eps: f64,
    pub record_every: usize,
    pub gap: bool,
    pub semigroup: bool,
    /// Horizon of the semigroup check in units of `1/λ₁`.
    pub semigroup_horizon: f64,
    pub semigroup_steps: usize,
}

impl Default for HeatParams {
    fn default() -> Self {
        Self {
            scheme: HeatScheme::ImplicitEuler,
            dt: 0.01,
            tau_max: 1.2,
            s_values: vec![0.0, 1.0],
            s0_offsets: vec![0.5],
            eps: 0.125,
            record_every: 1,
            gap: true,
            semigroup: false,
            semigroup_horizon: 12.0,
            semigroup_steps: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Bin,
    Triplets,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
    pub plot: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), formats: vec![Format::Csv, Format::Json], plot: true }
    }
}

impl OutputSection {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

/// The selected experiment with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    Spectrum(SpectrumParams),
    Model(ModelParams),
    Singular(SingularParams),
    Probe(ProbeParams),
    Heat(HeatParams),
}

pub const EXPERIMENTS: [&str; 5] = ["spectrum", "model", "singular", "probe", "heat"];

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Spectrum(_) => "spectrum",
            Experiment::Model(_) => "model",
            Experiment::Singular(_) => "singular",
            Experiment::Probe(_) => "probe",
            Experiment::Heat(_) => "heat",
        }
    }

    /// Defaults for the experiment called `name`.
    pub fn default_for(name: &str) -> Option<Self> {
        Some(match name {
            "spectrum" => Experiment::Spectrum(Default::default()),
            "model" => Experiment::Model(Default::default()),
            "singular" => Experiment::Singular(Default::default()),
            "probe" => Experiment::Probe(Default::default()),
            "heat" => Experiment::Heat(Default::default()),
            _ => return None,
        })
    }
}

impl ExperimentTable {
    fn selected(&self) -> Vec<Experiment> {
        let mut out = Vec::new();
        if let Some(p) = &self.spectrum {
            out.push(Experiment::Spectrum(p.clone()));
        }
        if let Some(p) = &self.model {
            out.push(Experiment::Model(p.clone()));
        }
        if let Some(p) = &self.singular {
            out.push(Experiment::Singular(p.clone()));
        }
        if let Some(p) = &self.probe {
            out.push(Experiment::Probe(p.clone()));
        }
        if let Some(p) = &self.heat {
            out.push(Experiment::Heat(p.clone()));
        }
        out
    }

    pub fn from_experiment(e: Experiment) -> Self {
        let mut t = Self::default();
        match e {
            Experiment::Spectrum(p) => t.spectrum = Some(p),
            Experiment::Model(p) => t.model = Some(p),
            Experiment::Singular(p) => t.singular = Some(p),
            Experiment::Probe(p) => t.probe = Some(p),
            Experiment::Heat(p) => t.heat = Some(p),
        }
        t
    }
}

/// Torus parameters after defaults are filled in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorusParams {
    pub period_x: f64,
    pub period_t: f64,
    pub nx: usize,
    pub nt: usize,
    pub variant: Variant,
}

/// A parsed and validated config together with its source text.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub experiment: Experiment,
    pub source: String,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// 1-based line of `key` inside the table `section` (`""` for the root).
/// Dotted section names match `[a.b]` headers literally.
pub fn locate_key(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if let Some(h) = line.strip_prefix('[') {
            current = h.trim_end_matches(']').trim().to_string();
            if key.is_empty() && current == section {
                return Some(n + 1);
            }
            continue;
        }
        if current == section && !key.is_empty() {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim().trim_matches('"') == key {
                    return Some(n + 1);
                }
            }
        }
    }
    None
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Key named by the line containing `offset`: the left side of `=`, or the
/// table header.
fn key_at(text: &str, offset: usize) -> String {
    let start = text[..offset.min(text.len())].rfind('\n').map_or(0, |p| p + 1);
    let line = text[start..].lines().next().unwrap_or("").trim();
    let mut section = String::new();
    for l in text[..start].lines() {
        let l = l.split('#').next().unwrap_or("").trim();
        if let Some(h) = l.strip_prefix('[') {
            section = h.trim_end_matches(']').trim().to_string();
        }
    }
    if let Some(h) = line.strip_prefix('[') {
        return h.trim_end_matches(']').trim().to_string();
    }
    let key = line.split_once('=').map_or(line, |(k, _)| k).trim().trim_matches('"');
    if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    }
}

fn parse_error(text: &str, e: toml::de::Error) -> ConfigError {
    let message = e.message().trim().to_string();
    match e.span() {
        Some(span) => {
            // unknown-field errors point at the offending key itself
            let mut key = key_at(text, span.start);
            if let Some(name) = message.strip_prefix("unknown field `").and_then(|m| m.split('`').next()) {
                if !key.ends_with(name) {
                    key = format!("{key}.{name}");
                }
            }
            ConfigError { key, line: Some(line_of_offset(text, span.start)), message }
        }
        None => ConfigError { key: "<document>".into(), line: None, message },
    }
}

/// Validation context: knows the source so it can cite lines.
struct Checker<'a> {
    text: &'a str,
}

impl Checker<'_> {
    fn err(&self, section: &str, key: &str, message: impl Into<String>) -> ConfigError {
        let line = locate_key(self.text, section, key).or_else(|| locate_key(self.text, section, ""));
        let dotted = match (section.is_empty(), key.is_empty()) {
            (true, _) => key.to_string(),
            (false, true) => section.to_string(),
            (false, false) => format!("{section}.{key}"),
        };
        ConfigError { key: dotted, line, message: message.into() }
    }

    fn ensure(&self, ok: bool, section: &str, key: &str, message: impl FnOnce() -> String) -> Result<(), ConfigError> {
        if ok {
            Ok(())
        } else {
            Err(self.err(section, key, message()))
        }
    }
}

const MAX_NODES: usize = 4096;
const S_MIN: f64 = -4.0;
const S_MAX: f64 = 8.0;

fn in_s_range(v: &[f64]) -> bool {
    v.iter().all(|s| s.is_finite() && (S_MIN..=S_MAX).contains(s))
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

impl ExperimentConfig {
    pub fn profile_descriptor(&self) -> Result<ProfileDescriptor, ConfigError> {
        let p = &self.profile;
        Ok(match p.kind {
            ProfileKind::Constant => match (&p.alpha, &p.beta) {
                (Coeffs::Scalar(alpha), Coeffs::Scalar(beta)) => {
                    ProfileDescriptor::Constant { alpha: *alpha, beta: *beta }
                }
                _ => {
                    return Err(ConfigError {
                        key: "profile.alpha".into(),
                        line: None,
                        message: "a constant profile takes scalar alpha and beta".into(),
                    })
                }
            },
            ProfileKind::Polynomial => ProfileDescriptor::Polynomial { alpha: p.alpha.to_vec(), beta: p.beta.to_vec() },
            ProfileKind::Tabulated => ProfileDescriptor::Tabulated { alpha: p.alpha.to_vec(), beta: p.beta.to_vec() },
        })
    }

    /// Torus parameters for `exp` with the config's overrides applied.
    pub fn torus_params(&self, exp: &Experiment) -> TorusParams {
        use degenlab_core::torus::probe::{DEFAULT_NODES, DEFAULT_PERIOD_T, DEFAULT_PERIOD_X};
        let d = match exp {
            Experiment::Probe(_) => TorusParams {
                period_x: DEFAULT_PERIOD_X,
                period_t: DEFAULT_PERIOD_T,
                nx: DEFAULT_NODES,
                nt: DEFAULT_NODES,
                variant: Variant::Invertible,
            },
            _ => TorusParams { period_x: 2.0, period_t: 1.0, nx: 128, nt: 256, variant: Variant::Diffusion },
        };
        let t = &self.torus;
        TorusParams {
            period_x: t.period_x.unwrap_or(d.period_x),
            period_t: t.period_t.unwrap_or(d.period_t),
            nx: t.nx.unwrap_or(d.nx),
            nt: t.nt.unwrap_or(d.nt),
            variant: t.variant.unwrap_or(d.variant),
        }
    }
}

fn validate(cfg: &ExperimentConfig, text: &str) -> Result<Experiment, ConfigError> {
    let c = Checker { text };
    let p = &cfg.profile;
    c.ensure(p.alpha.all_finite(), "profile", "alpha", || "coefficients must be finite".into())?;
    c.ensure(p.beta.all_finite(), "profile", "beta", || "coefficients must be finite".into())?;
    c.ensure((1..=8).contains(&p.m), "profile", "m", || format!("vanishing order must lie in 1..=8, got {}", p.m))?;
    if let Err(e) = cfg.profile_descriptor() {
        return Err(c.err("profile", "alpha", e.message));
    }

    let t = &cfg.torus;
    if let Some(px) = t.period_x {
        c.ensure(px.is_finite() && px > 1.0 && px <= 64.0, "torus", "period_x", || {
            format!("must lie in (1, 64] so the strip around J embeds, got {px}")
        })?;
    }
    if let Some(pt) = t.period_t {
        c.ensure(pt.is_finite() && pt > 0.0 && pt <= 64.0, "torus", "period_t", || {
            format!("must lie in (0, 64], got {pt}")
        })?;
    }
    for (key, v) in [("nx", t.nx), ("nt", t.nt)] {
        if let Some(n) = v {
            c.ensure((16..=MAX_NODES).contains(&n), "torus", key, || format!("must lie in 16..={MAX_NODES}, got {n}"))?;
        }
    }
    if let Some(nt) = t.nt {
        c.ensure(nt % 2 == 0, "torus", "nt", || format!("must be even so that t = 0 is a node, got {nt}"))?;
    }

    let o = &cfg.output;
    c.ensure(!o.dir.as_os_str().is_empty(), "output", "dir", || "must not be empty".into())?;
    c.ensure(!o.formats.is_empty(), "output", "formats", || "list at least one format".into())?;

    let chosen = cfg.experiment.selected();
    if chosen.len() != 1 {
        let names: Vec<&str> = chosen.iter().map(|e| e.name()).collect();
        return Err(c.err(
            "experiment",
            "",
            format!("exactly one of {} must be given, found {:?}", EXPERIMENTS.join(", "), names),
        ));
    }
    let exp = chosen.into_iter().next().expect("one experiment");
    let sec = format!("experiment.{}", exp.name());
    let sec = sec.as_str();
    match &exp {
        Experiment::Spectrum(s) => {
            c.ensure(s.w_max.is_finite() && s.w_max > 0.0 && s.w_max <= 1e5, sec, "w_max", || {
                format!("must lie in (0, 1e5], got {}", s.w_max)
            })?;
            c.ensure((1..=200).contains(&s.max_count), sec, "max_count", || {
                format!("must lie in 1..=200, got {}", s.max_count)
            })?;
        }
        Experiment::Model(m) => {
            c.ensure(m.s.is_finite() && (S_MIN..=S_MAX).contains(&m.s), sec, "s", || {
                format!("must lie in [{S_MIN}, {S_MAX}], got {}", m.s)
            })?;
            c.ensure((65..=8193).contains(&m.nx), sec, "nx", || format!("must lie in 65..=8193, got {}", m.nx))?;
            c.ensure(m.n_tau.is_power_of_two() && (8..=1 << 16).contains(&m.n_tau), sec, "n_tau", || {
                format!("must be a power of two in 8..=65536, got {}", m.n_tau)
            })?;
            c.ensure(m.u_min.is_finite() && m.u_max.is_finite() && m.u_min < m.u_max, sec, "u_min", || {
                format!("need u_min < u_max, got [{}, {}]", m.u_min, m.u_max)
            })?;
        }
        Experiment::Singular(s) => {
            c.ensure(s.j < 64, sec, "j", || format!("must be below 64, got {}", s.j))?;
            c.ensure(s.t1 > 0.0 && s.t1 < s.t2 && s.t2.is_finite(), sec, "t1", || {
                format!("need 0 < t1 < t2, got [{}, {}]", s.t1, s.t2)
            })?;
            if let Some(r) = &s.r_values {
                c.ensure(
                    !r.is_empty() && r.iter().all(|v| v.is_finite() && (0.0..=S_MAX).contains(v)),
                    sec,
                    "r_values",
                    || format!("need a nonempty list in [0, {S_MAX}]"),
                )?;
            }
            if let Some(k) = &s.cutoffs {
                c.ensure(!k.is_empty() && k[0] > 0.0 && k.windows(2).all(|w| w[1] > w[0]), sec, "cutoffs", || {
                    "need positive, strictly increasing cutoffs".into()
                })?;
            }
            let [a, b] = s.gevrey_window;
            c.ensure(a > 0.0 && a < b && b.is_finite(), sec, "gevrey_window", || {
                format!("need 0 < lo < hi, got [{a}, {b}]")
            })?;
            c.ensure((8..=10_000).contains(&s.gevrey_samples), sec, "gevrey_samples", || {
                format!("must lie in 8..=10000, got {}", s.gevrey_samples)
            })?;
            c.ensure(s.ladder_order <= 12, sec, "ladder_order", || {
                format!("must be at most 12, got {}", s.ladder_order)
            })?;
            c.ensure(s.ladder_t_max > 0.0 && s.ladder_t_max < s.t1, sec, "ladder_t_max", || {
                format!("must lie in (0, t1), got {}", s.ladder_t_max)
            })?;
            c.ensure(s.w_max.is_finite() && s.w_max > 0.0, sec, "w_max", || {
                format!("must be positive, got {}", s.w_max)
            })?;
        }
        Experiment::Probe(p) => {
            c.ensure(in_s_range(&p.s_values), sec, "s_values", || format!("every s must lie in [{S_MIN}, {S_MAX}]"))?;
            c.ensure(p.s0_offsets.iter().all(|v| v.is_finite() && v.abs() <= 4.0), sec, "s0_offsets", || {
                "offsets must lie in [-4, 4]".into()
            })?;
            c.ensure(!p.s_values.is_empty() || !p.s0_offsets.is_empty(), sec, "s_values", || {
                "give at least one s".into()
            })?;
            c.ensure(!p.eps.is_empty() && p.eps.iter().all(|e| *e > 0.0 && *e <= 1.0), sec, "eps", || {
                "need a nonempty list in (0, 1]".into()
            })?;
            c.ensure(strictly_decreasing(&p.eps), sec, "eps", || "must be strictly decreasing".into())?;
            let tp = cfg.torus_params(&exp);
            c.ensure(tp.variant == Variant::Invertible, "torus", "variant", || {
                "the probe inverts L and needs the invertible variant".into()
            })?;
        }
        Experiment::Heat(h) => {
            c.ensure(h.dt.is_finite() && h.dt > 0.0, sec, "dt", || format!("must be positive, got {}", h.dt))?;
            c.ensure(h.tau_max.is_finite() && h.tau_max >= h.dt, sec, "tau_max", || {
                format!("must be at least dt, got {}", h.tau_max)
            })?;
            c.ensure(h.tau_max / h.dt <= 1e6, sec, "tau_max", || "more than 1e6 steps".into())?;
            c.ensure(in_s_range(&h.s_values), sec, "s_values", || format!("every s must lie in [{S_MIN}, {S_MAX}]"))?;
            c.ensure(h.s0_offsets.iter().all(|v| v.is_finite() && v.abs() <= 4.0), sec, "s0_offsets", || {
                "offsets must lie in [-4, 4]".into()
            })?;
            c.ensure(h.eps > 0.0 && h.eps <= 1.0, sec, "eps", || format!("must lie in (0, 1], got {}", h.eps))?;
            c.ensure(h.record_every >= 1, sec, "record_every", || "must be at least 1".into())?;
            c.ensure(h.semigroup_horizon > 0.0 && h.semigroup_horizon <= 64.0, sec, "semigroup_horizon", || {
                format!("must lie in (0, 64], got {}", h.semigroup_horizon)
            })?;
            c.ensure(h.semigroup_steps >= 1, sec, "semigroup_steps", || "must be at least 1".into())?;
            let tp = cfg.torus_params(&exp);
            if (h.gap || h.semigroup) && tp.variant != Variant::Diffusion {
                return Err(c.err(
                    "torus",
                    "variant",
                    "the spectral gap and semigroup checks need the diffusion variant",
                ));
            }
        }
    }
    Ok(exp)
}

impl LoadedConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| parse_error(text, e))?;
        let experiment = validate(&config, text)?;
        Ok(Self { config, experiment, source: text.to_string(), sha256: sha256_hex(text.as_bytes()) })
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            key: "<file>".into(),
            line: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    /// The built-in config for `name`: constant profile, defaults everywhere.
    pub fn builtin(name: &str) -> Result<Self, ConfigError> {
        let exp = Experiment::default_for(name).ok_or_else(|| ConfigError {
            key: "experiment".into(),
            line: None,
            message: format!("unknown experiment `{name}`"),
        })?;
        let cfg = ExperimentConfig {
            seed: 0,
            profile: ProfileSection {
                kind: ProfileKind::Constant,
                alpha: Coeffs::Scalar(1.0),
                beta: Coeffs::Scalar(0.0),
                m: 1,
            },
            torus: TorusSection::default(),
            experiment: ExperimentTable::from_experiment(exp),
            output: OutputSection::default(),
        };
        let text = toml::to_string(&cfg).map_err(|e| ConfigError {
            key: "<document>".into(),
            line: None,
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Error for a key of this config, with its line when present.
    pub fn key_error(&self, section: &str, key: &str, message: impl Into<String>) -> ConfigError {
        Checker { text: &self.source }.err(section, key, message)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"
seed = 3

[profile]
kind = "polynomial"
alpha = [1.0, 0.0, 0.25]
beta = 0.3

[experiment.spectrum]
w_max = 60.0
"#;

    #[test]
    fn parses_scalar_and_list_coefficients() {
        let c = LoadedConfig::parse(GOOD).unwrap();
        assert_eq!(c.config.seed, 3);
        assert_eq!(c.experiment, Experiment::Spectrum(SpectrumParams { w_max: 60.0, max_count: 8 }));
        assert_eq!(
            c.config.profile_descriptor().unwrap(),
            ProfileDescriptor::Polynomial { alpha: vec![1.0, 0.0, 0.25], beta: vec![0.3] }
        );
        assert_eq!(c.sha256.len(), 64);
    }

    #[test]
    fn unknown_key_is_named_with_its_line() {
        let text = GOOD.replace("w_max = 60.0", "w_max = 60.0\nwmax = 3");
        let e = LoadedConfig::parse(&text).unwrap_err();
        assert_eq!(e.line, Some(11));
        assert!(e.key.ends_with("wmax"), "{e}");
    }

    #[test]
    fn range_error_is_named_with_its_line() {
        let text = GOOD.replace("w_max = 60.0", "w_max = -1.0");
        let e = LoadedConfig::parse(&text).unwrap_err();
        assert_eq!(e.key, "experiment.spectrum.w_max");
        assert_eq!(e.line, Some(10));
    }

    #[test]
    fn wrong_type_points_at_the_key() {
        let text = GOOD.replace("seed = 3", "seed = \"three\"");
        let e = LoadedConfig::parse(&text).unwrap_err();
        assert_eq!(e.key, "seed");
        assert_eq!(e.line, Some(2));
    }

    #[test]
    fn exactly_one_experiment() {
        let two = format!("{GOOD}\n[experiment.model]\ns = 1.0\n");
        let e = LoadedConfig::parse(&two).unwrap_err();
        assert_eq!(e.key, "experiment");
        let none = "[profile]\nkind = \"constant\"\nalpha = 1.0\n[experiment]\n";
        assert!(LoadedConfig::parse(none).unwrap_err().message.contains("exactly one"));
    }

    #[test]
    fn builtins_round_trip_for_every_experiment() {
        for name in EXPERIMENTS {
            let c = LoadedConfig::builtin(name).unwrap();
            assert_eq!(c.experiment.name(), name);
            assert_eq!(LoadedConfig::parse(&c.source).unwrap().config, c.config);
        }
    }

    #[test]
    fn probe_refuses_the_diffusion_variant() {
        let text =
            "[profile]\nkind = \"constant\"\nalpha = 1.0\n[torus]\nvariant = \"diffusion\"\n[experiment.probe]\n";
        let e = LoadedConfig::parse(text).unwrap_err();
        assert_eq!((e.key.as_str(), e.line), ("torus.variant", Some(5)));
    }
}

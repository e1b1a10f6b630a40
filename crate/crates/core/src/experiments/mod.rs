//! Scenario sweeps over neuron counts, instance deviations and seeds.
//!
//! Every random draw in a run comes from a stream derived from the master
//! seed and the cell coordinates, so a cell's result does not depend on
//! which other cells run or in what order:
//!
//! - base neurons: `(BASE_NEURONS, N, seed)`
//! - initial centroids: `(CENTROIDS, N, seed)`, neuron-major; a run with
//!   `k` centroids uses the first `k` draws, so nD templates and realistic
//!   k-means centroids start from the same shapes
//! - spike stream: `(STREAM, N, seed, dev)`
//! - probabilistic search: `(SEARCH, N, seed, dev, p)`
//!
//! Instance deviations are integer multiples of 1/16.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::dendrite::{DendriteConfig, DendriteError, Search};
use crate::kmeans::{KMeansConfig, KMeansError};
use crate::metrics::MetricsError;
use crate::synth::{RateModel, Shape, SynthError, BASE_DEV, DEFAULT_MEANS, FEATURES, LEVELS};

mod report;
mod run;

pub use report::{Cell, Metric, OpRow, Report, TracePoint};
pub use run::run;

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("unknown scenario `{0}` (see `list`)")]
    UnknownScenario(String),
    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },
    #[error(transparent)]
    Dendrite(#[from] DendriteError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    KMeans(#[from] KMeansError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

fn config_err(key: &str, message: impl Into<String>) -> ExperimentError {
    ExperimentError::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    KmeansIdeal,
    KmeansRealistic,
    KmeansDiscretized,
    NdBaseline,
    NdNoSearch,
    NdProbSearch,
    NdAdapt,
    ZipfNd,
    ZipfKmeans,
    MaaCount,
    CidMismatch,
    CidMergePurity,
    OpCount,
}

impl Scenario {
    pub const ALL: [Scenario; 13] = [
        Scenario::KmeansIdeal,
        Scenario::KmeansRealistic,
        Scenario::KmeansDiscretized,
        Scenario::NdBaseline,
        Scenario::NdNoSearch,
        Scenario::NdProbSearch,
        Scenario::NdAdapt,
        Scenario::ZipfNd,
        Scenario::ZipfKmeans,
        Scenario::MaaCount,
        Scenario::CidMismatch,
        Scenario::CidMergePurity,
        Scenario::OpCount,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Scenario::KmeansIdeal => "kmeans-ideal",
            Scenario::KmeansRealistic => "kmeans-realistic",
            Scenario::KmeansDiscretized => "kmeans-discretized",
            Scenario::NdBaseline => "nd-baseline",
            Scenario::NdNoSearch => "nd-no-search",
            Scenario::NdProbSearch => "nd-prob-search",
            Scenario::NdAdapt => "nd-adapt",
            Scenario::ZipfNd => "zipf-nd",
            Scenario::ZipfKmeans => "zipf-kmeans",
            Scenario::MaaCount => "maa-count",
            Scenario::CidMismatch => "cid-mismatch",
            Scenario::CidMergePurity => "cid-merge-purity",
            Scenario::OpCount => "op-count",
        }
    }

    /// What the scenario measures and which plot its `plot.csv` feeds.
    pub fn description(self) -> &'static str {
        match self {
            Scenario::KmeansIdeal => {
                "k-means accuracy vs instance deviation, centroids initialized at the true base neurons (upper bound)"
            }
            Scenario::KmeansRealistic => {
                "k-means accuracy vs instance deviation, centroids drawn around the canonical shape"
            }
            Scenario::KmeansDiscretized => {
                "realistic k-means on 32-level discretized features instead of raw floats"
            }
            Scenario::NdBaseline => {
                "nD accuracy vs instance deviation, scored after the warmup spikes"
            }
            Scenario::NdNoSearch => "nD accuracy with the search update disabled",
            Scenario::NdProbSearch => {
                "nD accuracy with probabilistic search (increment 1 with probability 1/16)"
            }
            Scenario::NdAdapt => {
                "windowed nD accuracy when every neuron is replaced mid-stream"
            }
            Scenario::ZipfNd => "nD accuracy vs instance deviation with zipf spike rates",
            Scenario::ZipfKmeans => {
                "realistic k-means accuracy vs instance deviation with zipf spike rates"
            }
            Scenario::MaaCount => {
                "neurons sorted at minimum acceptable accuracy 0.8 and 0.9, zipf spike rates"
            }
            Scenario::CidMismatch => "nD accuracy for 8 neurons and 6 to 12 CIDs, zipf spike rates",
            Scenario::CidMergePurity => {
                "purity (accuracy after optimal CID merging) for 8 neurons and 6 to 12 CIDs"
            }
            Scenario::OpCount => {
                "additions per step: closed form, measured with bypass, bypass with probabilistic search"
            }
        }
    }

    pub fn uses_zipf(self) -> bool {
        matches!(
            self,
            Scenario::ZipfNd
                | Scenario::ZipfKmeans
                | Scenario::MaaCount
                | Scenario::CidMismatch
                | Scenario::CidMergePurity
        )
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Scenario {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.id() == s)
            .ok_or_else(|| ExperimentError::UnknownScenario(s.to_string()))
    }
}

/// nD hyperparameters in weight units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NdParams {
    pub w_max: u16,
    pub w_base: u16,
    pub capture: u16,
    pub backoff: u16,
    pub search: Search,
    pub radius: u16,
}

impl NdParams {
    /// Tuned for instance deviations up to 4/16.
    pub const SMALL_DEV: NdParams = NdParams {
        w_max: 32,
        w_base: 28,
        capture: 3,
        backoff: 2,
        search: Search::sixteenth(),
        radius: 3,
    };

    /// Tuned for instance deviations of 5/16 and above.
    pub const LARGE_DEV: NdParams = NdParams {
        w_max: 32,
        w_base: 28,
        capture: 4,
        backoff: 1,
        search: Search::sixteenth(),
        radius: 3,
    };

    pub fn dendrite_config(&self, templates: usize) -> DendriteConfig {
        DendriteConfig {
            templates,
            features: FEATURES,
            values: LEVELS,
            radius: self.radius,
            w_max: self.w_max,
            w_base: self.w_base,
            capture: self.capture,
            backoff: self.backoff,
            search: self.search,
        }
    }
}

/// Largest deviation, in sixteenths, that uses the small-deviation
/// hyperparameters.
pub const SMALL_DEV_LIMIT: u32 = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    pub neurons: Vec<usize>,
    /// Instance deviations in sixteenths.
    pub devs: Vec<u32>,
    /// Template / centroid counts. Empty means one per neuron.
    pub cids: Vec<usize>,
    pub seeds: usize,
    pub master_seed: u64,
    pub stream_length: usize,
    /// Leading spikes excluded from scoring (nD) or used for training
    /// (k-means).
    pub warmup: usize,
    pub base_dev: f64,
    pub means: Shape,
    pub rate: RateModel,
    pub small: NdParams,
    pub large: NdParams,
    pub kmeans: KMeansConfig,
    pub switch_at: usize,
    pub window: usize,
    pub maa: Vec<f64>,
}

impl ExperimentSpec {
    /// Defaults for `scenario`.
    pub fn new(scenario: Scenario) -> Self {
        let mut spec = ExperimentSpec {
            scenario,
            neurons: (4..=12).collect(),
            devs: (1..=8).collect(),
            cids: Vec::new(),
            seeds: 16,
            master_seed: 0x5eed,
            stream_length: 10_000,
            warmup: 5_000,
            base_dev: BASE_DEV,
            means: DEFAULT_MEANS,
            rate: RateModel::Uniform,
            small: NdParams::SMALL_DEV,
            large: NdParams::LARGE_DEV,
            kmeans: KMeansConfig::default(),
            switch_at: 5_000,
            window: 100,
            maa: vec![0.8, 0.9],
        };
        if scenario.uses_zipf() {
            spec.rate = RateModel::Zipf { exponent: 1.0 };
        }
        match scenario {
            Scenario::NdNoSearch => spec.set_search(Search::Off),
            Scenario::NdProbSearch => spec.set_search(Search::probabilistic_sixteenth()),
            Scenario::NdAdapt => {
                spec.neurons = vec![6];
                spec.devs = vec![2];
            }
            Scenario::CidMismatch | Scenario::CidMergePurity => {
                spec.neurons = vec![8];
                spec.cids = (6..=12).collect();
            }
            Scenario::OpCount => {
                spec.neurons = vec![8];
                spec.devs = vec![2];
                spec.seeds = 1;
            }
            _ => {}
        }
        spec
    }

    pub fn params(&self, dev: u32) -> &NdParams {
        if dev <= SMALL_DEV_LIMIT {
            &self.small
        } else {
            &self.large
        }
    }

    fn set_search(&mut self, search: Search) {
        self.small.search = search;
        self.large.search = search;
    }

    /// Switch fractional search to probabilistic search with the same
    /// expected increment. Other search settings are left alone.
    pub fn use_probabilistic_search(&mut self) {
        for params in [&mut self.small, &mut self.large] {
            if let Search::Fractional { .. } = params.search {
                params.search = Search::Probabilistic {
                    probability: params.search.expected_increment(),
                };
            }
        }
    }

    /// Template counts to run for `neurons`.
    pub fn cid_counts(&self, neurons: usize) -> Vec<usize> {
        if self.cids.is_empty() {
            vec![neurons]
        } else {
            self.cids.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.neurons.is_empty() || self.neurons.contains(&0) {
            return Err(config_err("neurons", "need at least one positive count"));
        }
        if self.devs.is_empty() {
            return Err(config_err("devs", "need at least one deviation"));
        }
        if self.cids.contains(&0) {
            return Err(config_err("cids", "counts must be positive"));
        }
        if self.seeds == 0 {
            return Err(config_err("seeds", "need at least one seed"));
        }
        if self.warmup >= self.stream_length {
            return Err(config_err("warmup", "must be shorter than the stream"));
        }
        if self.scenario == Scenario::NdAdapt && self.switch_at >= self.stream_length {
            return Err(config_err("switch_at", "must fall inside the stream"));
        }
        if self.window == 0 {
            return Err(config_err("window", "must be positive"));
        }
        if let Some(&m) = self.maa.iter().find(|&&m| !(m > 0.0 && m <= 1.0)) {
            return Err(config_err("maa", format!("{m} not in (0, 1]")));
        }
        for dev in &self.devs {
            for p in self.cids.iter().copied().chain([1]) {
                self.params(*dev).dendrite_config(p).validate()?;
            }
        }
        Ok(())
    }

    /// Apply one `key = value` setting. Hyperparameter keys without a
    /// `small.` / `large.` prefix set both columns.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "neurons" => self.neurons = parse_counts(key, value)?,
            "devs" | "dev" => self.devs = parse_devs(key, value)?,
            "cids" | "p" => self.cids = parse_counts(key, value)?,
            "seeds" => self.seeds = parse(key, value)?,
            "master_seed" | "seed" => self.master_seed = parse(key, value)?,
            "stream_length" => self.stream_length = parse(key, value)?,
            "warmup" => self.warmup = parse(key, value)?,
            "base_dev" => self.base_dev = parse(key, value)?,
            "means" => {
                let means: Vec<f64> = parse_list(key, value)?;
                self.means = means
                    .try_into()
                    .map_err(|_| config_err(key, format!("need {FEATURES} values")))?;
            }
            "rate" => self.rate = parse_rate(key, value)?,
            "kmeans.min_convergence" => self.kmeans.min_convergence = parse(key, value)?,
            "kmeans.max_iters" => self.kmeans.max_iters = parse(key, value)?,
            "switch_at" => self.switch_at = parse(key, value)?,
            "window" => self.window = parse(key, value)?,
            "maa" => self.maa = parse_list(key, value)?,
            "prob_search" => {
                if parse::<bool>(key, value)? {
                    self.use_probabilistic_search();
                }
            }
            _ => {
                let (columns, field): (&[bool], &str) = match key.split_once('.') {
                    Some(("small", f)) => (&[true], f),
                    Some(("large", f)) => (&[false], f),
                    Some(_) => return Err(config_err(key, "unknown key")),
                    None => (&[true, false], key),
                };
                for &small in columns {
                    let params = if small { &mut self.small } else { &mut self.large };
                    set_param(params, key, field, value)?;
                }
            }
        }
        Ok(())
    }

    /// Every setting, in a stable order, as accepted by [`ExperimentSpec::set`].
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = vec![
            ("scenario".into(), self.scenario.to_string()),
            ("neurons".into(), join(&self.neurons)),
            (
                "devs".into(),
                self.devs
                    .iter()
                    .map(|d| format!("{d}/16"))
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("cids".into(), join(&self.cids)),
            ("seeds".into(), self.seeds.to_string()),
            ("master_seed".into(), self.master_seed.to_string()),
            ("stream_length".into(), self.stream_length.to_string()),
            ("warmup".into(), self.warmup.to_string()),
            ("base_dev".into(), format!("{:?}", self.base_dev)),
            (
                "means".into(),
                self.means
                    .iter()
                    .map(|m| format!("{m:?}"))
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            (
                "rate".into(),
                match self.rate {
                    RateModel::Uniform => "uniform".into(),
                    RateModel::Zipf { exponent } => format!("zipf:{exponent:?}"),
                },
            ),
        ];
        for (prefix, p) in [("small", &self.small), ("large", &self.large)] {
            out.push((format!("{prefix}.w_max"), p.w_max.to_string()));
            out.push((format!("{prefix}.w_base"), p.w_base.to_string()));
            out.push((format!("{prefix}.capture"), p.capture.to_string()));
            out.push((format!("{prefix}.backoff"), p.backoff.to_string()));
            out.push((format!("{prefix}.search"), p.search.to_string()));
            out.push((format!("{prefix}.radius"), p.radius.to_string()));
        }
        out.extend([
            (
                "kmeans.min_convergence".into(),
                format!("{:?}", self.kmeans.min_convergence),
            ),
            ("kmeans.max_iters".into(), self.kmeans.max_iters.to_string()),
            ("switch_at".into(), self.switch_at.to_string()),
            ("window".into(), self.window.to_string()),
            (
                "maa".into(),
                self.maa
                    .iter()
                    .map(|m| format!("{m:?}"))
                    .collect::<Vec<_>>()
                    .join(","),
            ),
        ]);
        out
    }

    pub fn write_config<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (key, value) in self.echo() {
            writeln!(out, "{key} = {value}")?;
        }
        Ok(())
    }

    /// Rebuild a spec from `key = value` pairs; `scenario` must be present.
    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self> {
        let scenario = pairs
            .iter()
            .find(|(k, _)| k == "scenario")
            .ok_or_else(|| config_err("scenario", "missing"))?
            .1
            .parse()?;
        let mut spec = ExperimentSpec::new(scenario);
        for (k, v) in pairs.iter().filter(|(k, _)| k != "scenario") {
            spec.set(k, v)?;
        }
        Ok(spec)
    }
}

/// Parse the flat config format: one `key = value` per line, `#` starts a
/// comment, blank lines are ignored.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| config_err(&format!("line {}", i + 1), "expected `key = value`"))?;
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

fn set_param(params: &mut NdParams, key: &str, field: &str, value: &str) -> Result<()> {
    match field {
        "w_max" | "wmax" => params.w_max = parse(key, value)?,
        "w_base" | "wbase" => params.w_base = parse(key, value)?,
        "capture" => params.capture = parse(key, value)?,
        "backoff" => params.backoff = parse(key, value)?,
        "radius" => params.radius = parse(key, value)?,
        "search" => params.search = parse_search(key, value)?,
        _ => return Err(config_err(key, "unknown key")),
    }
    Ok(())
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| config_err(key, format!("cannot parse `{value}`")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| parse(key, v.trim())).collect()
}

fn join(values: &[usize]) -> String {
    values
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

/// `4..12` (inclusive), `4,6,8`, or a single count.
pub fn parse_counts(key: &str, value: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once("..") {
            Some((lo, hi)) => {
                let lo: usize = parse(key, lo.trim())?;
                let hi: usize = parse(key, hi.trim().trim_start_matches('='))?;
                if lo > hi {
                    return Err(config_err(key, format!("empty range `{item}`")));
                }
                out.extend(lo..=hi);
            }
            None => out.push(parse(key, item)?),
        }
    }
    Ok(out)
}

/// A deviation written as `a/b` or as a decimal; it must be a whole
/// number of sixteenths. Returns sixteenths.
pub fn parse_dev(key: &str, value: &str) -> Result<u32> {
    let x = match value.split_once('/') {
        Some((a, b)) => {
            let a: f64 = parse(key, a.trim())?;
            let b: f64 = parse(key, b.trim())?;
            a / b
        }
        None => parse(key, value)?,
    };
    let sixteenths = x * 16.0;
    if !(sixteenths.is_finite() && sixteenths >= 0.0)
        || (sixteenths - sixteenths.round()).abs() > 1e-9
    {
        return Err(config_err(key, format!("`{value}` is not a multiple of 1/16")));
    }
    Ok(sixteenths.round() as u32)
}

/// Comma list of deviations; `a..b` ranges are in sixteenths.
pub fn parse_devs(key: &str, value: &str) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once("..") {
            Some((lo, hi)) => {
                let lo: u32 = parse(key, lo.trim())?;
                let hi: u32 = parse(key, hi.trim().trim_start_matches('='))?;
                if lo > hi {
                    return Err(config_err(key, format!("empty range `{item}`")));
                }
                out.extend(lo..=hi);
            }
            None => out.push(parse_dev(key, item)?),
        }
    }
    Ok(out)
}

/// `off`, `a/b` (fractional) or `prob:<probability>`.
pub fn parse_search(key: &str, value: &str) -> Result<Search> {
    if value == "off" || value == "0" {
        return Ok(Search::Off);
    }
    if let Some(p) = value.strip_prefix("prob:") {
        return Ok(Search::Probabilistic {
            probability: parse(key, p.trim())?,
        });
    }
    let (a, b) = value
        .split_once('/')
        .ok_or_else(|| config_err(key, format!("expected off, a/b or prob:<p>, got `{value}`")))?;
    Ok(Search::Fractional {
        numerator: parse(key, a.trim())?,
        denominator: parse(key, b.trim())?,
    })
}

fn parse_rate(key: &str, value: &str) -> Result<RateModel> {
    match value {
        "uniform" => Ok(RateModel::Uniform),
        "zipf" => Ok(RateModel::Zipf { exponent: 1.0 }),
        _ => match value.strip_prefix("zipf:") {
            Some(s) => Ok(RateModel::Zipf {
                exponent: parse(key, s.trim())?,
            }),
            None => Err(config_err(key, format!("expected uniform or zipf[:s], got `{value}`"))),
        },
    }
}

//! Neuromorphic dendrite: an online integer clustering unit.
//!
//! A dendrite holds `p` templates over an `m x n` discretized feature space,
//! stored as one `p x m x n` weight array. Every input goes through an
//! inference step (score each template, pick the winner) followed by an
//! update step: the winner's addressed weights are raised by `capture`, its
//! remaining weights are lowered by `backoff`, and the addressed weights of
//! every losing template creep up by `search` until they reach `w_base`.
//!
//! Feature values are ordered, so each value `v` addresses the window
//! `v - r ..= v + r` (similarity coding). A window that would cross `1` or
//! `n` is slid back inside the range, so every feature always addresses
//! exactly `2r + 1` weights and the closed-form operation counts are exact
//! upper bounds.
//!
//! Weights are unsigned fixed-point integers. With a fractional search
//! increment of `a / b` every weight carries a scale of `b`, so `1/16` adds
//! four fractional bits; off and probabilistic search keep a scale of 1.

mod ops;
mod snapshot;

pub use ops::{AccountingMode, OpCounters, OpCounts};

use std::fmt;
use std::ops::Range;

use rand::Rng;
use rand_distr::{Bernoulli, Distribution};

/// Errors raised by dendrite construction, inference and update.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DendriteError {
    #[error("invalid dendrite config: {0}")]
    InvalidConfig(String),
    #[error("input has {found} features, expected {expected}")]
    WrongLength { expected: usize, found: usize },
    #[error("feature {feature} has value {value}, outside 1..={max}")]
    ValueOutOfRange { feature: usize, value: u16, max: u16 },
    #[error("cluster id {cid} out of range for {templates} templates")]
    CidOutOfRange { cid: usize, templates: usize },
    #[error("expected {expected} centroids, got {found}")]
    CentroidCount { expected: usize, found: usize },
    #[error("accounting mode {0} requires probabilistic search")]
    AccountingMismatch(AccountingMode),
    #[error("malformed snapshot: {0}")]
    Snapshot(String),
}

pub type Result<T> = std::result::Result<T, DendriteError>;

/// Cluster identifier: the index of a template.
///
/// Stored zero-based; [`Cid::number`] gives the one-based label used in
/// reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cid(usize);

impl Cid {
    pub const fn from_index(index: usize) -> Self {
        Cid(index)
    }

    pub const fn index(self) -> usize {
        self.0
    }

    pub const fn number(self) -> usize {
        self.0 + 1
    }
}

impl fmt::Display for Cid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// How losing templates are primed toward the current input.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Search {
    Off,
    /// Add `numerator / denominator` weight units to every addressed weight
    /// of every losing template, capped at `w_base`.
    Fractional { numerator: u16, denominator: u16 },
    /// Add one weight unit, but only with the given probability, drawn
    /// independently per addressed weight.
    Probabilistic { probability: f64 },
}

impl Search {
    /// Fixed-point scale of the weight grid.
    pub fn scale(&self) -> u16 {
        match *self {
            Search::Fractional { denominator, .. } => denominator,
            _ => 1,
        }
    }

    /// The search increment in whole weight units.
    pub fn increment(&self) -> f64 {
        match *self {
            Search::Off => 0.0,
            Search::Fractional {
                numerator,
                denominator,
            } => f64::from(numerator) / f64::from(denominator),
            Search::Probabilistic { .. } => 1.0,
        }
    }

    /// Mean increment per addressed weight per step.
    pub fn expected_increment(&self) -> f64 {
        match *self {
            Search::Probabilistic { probability } => probability,
            other => other.increment(),
        }
    }

    pub fn is_probabilistic(&self) -> bool {
        matches!(self, Search::Probabilistic { .. })
    }

    /// Search with a fractional increment of `1/16`.
    pub const fn sixteenth() -> Self {
        Search::Fractional {
            numerator: 1,
            denominator: 16,
        }
    }

    /// Search of one unit applied `1/16` of the time.
    pub const fn probabilistic_sixteenth() -> Self {
        Search::Probabilistic {
            probability: 1.0 / 16.0,
        }
    }
}

impl fmt::Display for Search {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Search::Off => write!(f, "off"),
            Search::Fractional {
                numerator,
                denominator,
            } => write!(f, "{numerator}/{denominator}"),
            Search::Probabilistic { probability } => write!(f, "prob:{probability}"),
        }
    }
}

/// Dendrite shape and update hyperparameters.
///
/// `w_max`, `w_base`, `capture` and `backoff` are in whole weight units.
/// Ties in inference always go to the lowest template index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DendriteConfig {
    /// Number of templates `p`.
    pub templates: usize,
    /// Features per input `m`.
    pub features: usize,
    /// Values per feature `n`.
    pub values: u16,
    /// Similarity radius `r`.
    pub radius: u16,
    pub w_max: u16,
    pub w_base: u16,
    pub capture: u16,
    pub backoff: u16,
    pub search: Search,
}

impl DendriteConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(DendriteError::InvalidConfig(msg));
        if self.templates == 0 {
            return bad("templates must be at least 1".into());
        }
        if self.features == 0 {
            return bad("features must be at least 1".into());
        }
        if self.values < 2 {
            return bad("values per feature must be at least 2".into());
        }
        if 2 * u32::from(self.radius) + 1 > u32::from(self.values) {
            return bad(format!(
                "radius {} too large for {} values",
                self.radius, self.values
            ));
        }
        if !(0 < self.w_base && self.w_base < self.w_max) {
            return bad(format!(
                "need 0 < w_base < w_max, got w_base={} w_max={}",
                self.w_base, self.w_max
            ));
        }
        if self.capture == 0 {
            return bad("capture must be positive".into());
        }
        match self.search {
            Search::Off => {}
            Search::Fractional {
                numerator,
                denominator,
            } => {
                if denominator == 0 {
                    return bad("search denominator must be positive".into());
                }
                if numerator == 0 {
                    return bad("use Search::Off for a zero search increment".into());
                }
            }
            Search::Probabilistic { probability } => {
                if !(probability > 0.0 && probability <= 1.0) {
                    return bad(format!("search probability {probability} not in (0, 1]"));
                }
            }
        }
        if self.search.expected_increment() >= f64::from(self.capture) {
            return bad(format!(
                "search increment {} must be well below capture {}",
                self.search, self.capture
            ));
        }
        if u32::from(self.w_max) * u32::from(self.search.scale()) > u32::from(u16::MAX) {
            return bad("w_max does not fit the fixed-point weight grid".into());
        }
        Ok(())
    }

    /// Number of addressed positions for a feature whose window is not
    /// clipped by the edge of the value range: `2r + 1`.
    pub fn window_width(&self) -> usize {
        2 * usize::from(self.radius) + 1
    }

    /// Zero-based weight indices addressed by `value`. Near either end of
    /// the value range the window slides inward so it always spans `2r + 1`
    /// values.
    pub(crate) fn window(&self, value: u16) -> Range<usize> {
        let lo = value
            .saturating_sub(self.radius)
            .clamp(1, self.values - 2 * self.radius);
        let start = usize::from(lo) - 1;
        start..start + self.window_width()
    }
}

/// One discretized input: `m` integer feature values in `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FeatureVector(Vec<u16>);

impl FeatureVector {
    pub fn new(values: Vec<u16>) -> Self {
        FeatureVector(values)
    }

    pub fn values(&self) -> &[u16] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn validate(&self, config: &DendriteConfig) -> Result<()> {
        check_len(config, self.0.len())?;
        for (feature, &value) in self.0.iter().enumerate() {
            check_value(config, feature, value)?;
        }
        Ok(())
    }
}

impl From<Vec<u16>> for FeatureVector {
    fn from(values: Vec<u16>) -> Self {
        FeatureVector(values)
    }
}

impl<const N: usize> From<[u16; N]> for FeatureVector {
    fn from(values: [u16; N]) -> Self {
        FeatureVector(values.to_vec())
    }
}

/// An input where each feature may hold several values at once.
///
/// Stored as the list of active values per feature, which is the sparse
/// form of an `m x n` binary indicator array.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureArray(Vec<Vec<u16>>);

impl FeatureArray {
    pub fn new(active: Vec<Vec<u16>>) -> Self {
        FeatureArray(active)
    }

    pub fn active(&self) -> &[Vec<u16>] {
        &self.0
    }

    pub fn validate(&self, config: &DendriteConfig) -> Result<()> {
        check_len(config, self.0.len())?;
        for (feature, values) in self.0.iter().enumerate() {
            for &value in values {
                check_value(config, feature, value)?;
            }
        }
        Ok(())
    }
}

impl From<&FeatureVector> for FeatureArray {
    fn from(x: &FeatureVector) -> Self {
        FeatureArray(x.values().iter().map(|&v| vec![v]).collect())
    }
}

fn check_len(config: &DendriteConfig, found: usize) -> Result<()> {
    if found != config.features {
        return Err(DendriteError::WrongLength {
            expected: config.features,
            found,
        });
    }
    Ok(())
}

fn check_value(config: &DendriteConfig, feature: usize, value: u16) -> Result<()> {
    if value < 1 || value > config.values {
        return Err(DendriteError::ValueOutOfRange {
            feature,
            value,
            max: config.values,
        });
    }
    Ok(())
}

/// Outcome of scoring one input against every template.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inference {
    pub cid: Cid,
    /// Summed addressed weights per template, in raw fixed-point units.
    pub scores: Vec<u32>,
}

impl Inference {
    fn from_scores(scores: Vec<u32>) -> Self {
        let mut best = 0;
        for (i, &s) in scores.iter().enumerate().skip(1) {
            if s > scores[best] {
                best = i;
            }
        }
        Inference {
            cid: Cid(best),
            scores,
        }
    }

    pub fn winning_score(&self) -> u32 {
        self.scores[self.cid.0]
    }
}

/// The complete learned state: configuration plus the weight array.
#[derive(Clone, Debug, PartialEq)]
pub struct Dendrite {
    config: DendriteConfig,
    scale: u16,
    /// Template-major `p x m x n` weights on the fixed-point grid.
    weights: Vec<u16>,
}

impl Dendrite {
    /// A dendrite with every weight at zero.
    pub fn new(config: DendriteConfig) -> Result<Self> {
        config.validate()?;
        let len = config.templates * config.features * usize::from(config.values);
        Ok(Dendrite {
            scale: config.search.scale(),
            config,
            weights: vec![0; len],
        })
    }

    /// Initial templates derived from cluster centroids: template `i` gets
    /// `stamp` weight units over the window of each of `centroids[i]`'s
    /// feature values and zero elsewhere. `None` stamps `w_base`.
    pub fn from_centroids(
        config: DendriteConfig,
        centroids: &[FeatureVector],
        stamp: Option<u16>,
    ) -> Result<Self> {
        let mut dendrite = Dendrite::new(config)?;
        if centroids.len() != config.templates {
            return Err(DendriteError::CentroidCount {
                expected: config.templates,
                found: centroids.len(),
            });
        }
        let stamp = stamp.unwrap_or(config.w_base).min(config.w_max);
        let raw = stamp * dendrite.scale;
        for (i, centroid) in centroids.iter().enumerate() {
            centroid.validate(&config)?;
            for (j, &v) in centroid.values().iter().enumerate() {
                let row = dendrite.row_mut(i, j);
                for w in &mut row[config.window(v)] {
                    *w = raw;
                }
            }
        }
        Ok(dendrite)
    }

    pub(crate) fn from_parts(config: DendriteConfig, weights: Vec<u16>) -> Result<Self> {
        let mut dendrite = Dendrite::new(config)?;
        if weights.len() != dendrite.weights.len() {
            return Err(DendriteError::Snapshot(format!(
                "expected {} weights, found {}",
                dendrite.weights.len(),
                weights.len()
            )));
        }
        let max = dendrite.raw_w_max();
        if let Some(w) = weights.iter().find(|&&w| w > max) {
            return Err(DendriteError::Snapshot(format!(
                "weight {w} exceeds w_max {max}"
            )));
        }
        dendrite.weights = weights;
        Ok(dendrite)
    }

    pub fn config(&self) -> &DendriteConfig {
        &self.config
    }

    /// Raw weight units per whole weight unit.
    pub fn scale(&self) -> u16 {
        self.scale
    }

    /// All weights, template-major, in raw fixed-point units.
    pub fn weights(&self) -> &[u16] {
        &self.weights
    }

    /// Raw weight of `template` at `feature` for the one-based `value`.
    pub fn weight(&self, template: usize, feature: usize, value: u16) -> u16 {
        self.row(template, feature)[usize::from(value) - 1]
    }

    pub fn set_weight(&mut self, template: usize, feature: usize, value: u16, raw: u16) {
        let max = self.raw_w_max();
        self.row_mut(template, feature)[usize::from(value) - 1] = raw.min(max);
    }

    /// Weights of one template, feature-major.
    pub fn template(&self, template: usize) -> &[u16] {
        let len = self.config.features * usize::from(self.config.values);
        &self.weights[template * len..(template + 1) * len]
    }

    /// Sum of all raw weights in one template.
    pub fn template_mass(&self, template: usize) -> u32 {
        self.template(template).iter().map(|&w| u32::from(w)).sum()
    }

    pub(crate) fn raw_w_max(&self) -> u16 {
        self.config.w_max * self.scale
    }

    fn raw_w_base(&self) -> u16 {
        self.config.w_base * self.scale
    }

    fn row(&self, template: usize, feature: usize) -> &[u16] {
        let n = usize::from(self.config.values);
        let start = (template * self.config.features + feature) * n;
        &self.weights[start..start + n]
    }

    fn row_mut(&mut self, template: usize, feature: usize) -> &mut [u16] {
        let n = usize::from(self.config.values);
        let start = (template * self.config.features + feature) * n;
        &mut self.weights[start..start + n]
    }

    fn check_cid(&self, z: Cid) -> Result<()> {
        if z.0 >= self.config.templates {
            return Err(DendriteError::CidOutOfRange {
                cid: z.number(),
                templates: self.config.templates,
            });
        }
        Ok(())
    }

    /// Score `x` against every template and pick the winner.
    pub fn infer(&self, x: &FeatureVector) -> Result<Inference> {
        x.validate(&self.config)?;
        Ok(self.infer_unchecked(x))
    }

    fn infer_unchecked(&self, x: &FeatureVector) -> Inference {
        let windows: Vec<Range<usize>> = x.values().iter().map(|&v| self.config.window(v)).collect();
        let scores = (0..self.config.templates)
            .map(|i| {
                windows
                    .iter()
                    .enumerate()
                    .map(|(j, win)| {
                        self.row(i, j)[win.clone()]
                            .iter()
                            .map(|&w| u32::from(w))
                            .sum::<u32>()
                    })
                    .sum()
            })
            .collect();
        Inference::from_scores(scores)
    }

    /// Inference for inputs with several simultaneous values per feature.
    ///
    /// A weight is addressed when it lies within the similarity window of
    /// any active value of its feature; each addressed weight counts once.
    pub fn infer_multi(&self, x: &FeatureArray) -> Result<Inference> {
        x.validate(&self.config)?;
        let masks = self.address_masks(x);
        let scores = (0..self.config.templates)
            .map(|i| {
                masks
                    .iter()
                    .enumerate()
                    .map(|(j, mask)| {
                        self.row(i, j)
                            .iter()
                            .zip(mask)
                            .filter(|(_, &on)| on)
                            .map(|(&w, _)| u32::from(w))
                            .sum::<u32>()
                    })
                    .sum()
            })
            .collect();
        Ok(Inference::from_scores(scores))
    }

    fn address_masks(&self, x: &FeatureArray) -> Vec<Vec<bool>> {
        let n = usize::from(self.config.values);
        x.active()
            .iter()
            .map(|values| {
                let mut mask = vec![false; n];
                for &v in values {
                    mask[self.config.window(v)].fill(true);
                }
                mask
            })
            .collect()
    }

    /// Capture and backoff on the winning template `z`.
    pub fn update_winner(&mut self, x: &FeatureVector, z: Cid) -> Result<()> {
        x.validate(&self.config)?;
        self.check_cid(z)?;
        self.capture_backoff(x, z);
        Ok(())
    }

    /// Returns the number of weights actually raised and actually lowered.
    fn capture_backoff(&mut self, x: &FeatureVector, z: Cid) -> (u64, u64) {
        let capture = self.config.capture * self.scale;
        let backoff = self.config.backoff * self.scale;
        let max = self.raw_w_max();
        let (mut raised, mut lowered) = (0, 0);
        for (j, &v) in x.values().iter().enumerate() {
            let win = self.config.window(v);
            for (k, w) in self.row_mut(z.0, j).iter_mut().enumerate() {
                if win.contains(&k) {
                    if *w < max {
                        *w = w.saturating_add(capture).min(max);
                        raised += 1;
                    }
                } else if *w > 0 && backoff > 0 {
                    *w = w.saturating_sub(backoff);
                    lowered += 1;
                }
            }
        }
        (raised, lowered)
    }

    /// Search update on every template other than `z`. Randomness (for
    /// probabilistic search) comes only from `rng`.
    pub fn update_search<R: Rng + ?Sized>(
        &mut self,
        x: &FeatureVector,
        z: Cid,
        rng: &mut R,
    ) -> Result<()> {
        x.validate(&self.config)?;
        self.check_cid(z)?;
        self.search_losers(x, z, rng);
        Ok(())
    }

    /// Returns the number of weights actually raised.
    fn search_losers<R: Rng + ?Sized>(&mut self, x: &FeatureVector, z: Cid, rng: &mut R) -> u64 {
        let base = self.raw_w_base();
        let (increment, trigger) = match self.config.search {
            Search::Off => return 0,
            Search::Fractional { numerator, .. } => (numerator, None),
            Search::Probabilistic { probability } => (
                1,
                Some(Bernoulli::new(probability).expect("probability validated with config")),
            ),
        };
        let windows: Vec<Range<usize>> = x.values().iter().map(|&v| self.config.window(v)).collect();
        let mut raised = 0;
        for i in (0..self.config.templates).filter(|&i| i != z.0) {
            for (j, win) in windows.iter().enumerate() {
                for w in &mut self.row_mut(i, j)[win.clone()] {
                    if let Some(trigger) = &trigger {
                        if !trigger.sample(rng) {
                            continue;
                        }
                    }
                    if *w < base {
                        *w = w.saturating_add(increment).min(base);
                        raised += 1;
                    }
                }
            }
        }
        raised
    }

    /// One online clustering step: infer, then update the winner, then
    /// search on the losers.
    pub fn step<R: Rng + ?Sized>(&mut self, x: &FeatureVector, rng: &mut R) -> Result<Cid> {
        x.validate(&self.config)?;
        let z = self.infer_unchecked(x).cid;
        self.capture_backoff(x, z);
        self.search_losers(x, z, rng);
        Ok(z)
    }

    /// As [`Dendrite::step`], also charging the step's additions to
    /// `counters`.
    pub fn step_counted<R: Rng + ?Sized>(
        &mut self,
        x: &FeatureVector,
        rng: &mut R,
        counters: &mut OpCounters,
    ) -> Result<Cid> {
        x.validate(&self.config)?;
        if counters.mode() == AccountingMode::BypassProbabilistic
            && !self.config.search.is_probabilistic()
        {
            return Err(DendriteError::AccountingMismatch(counters.mode()));
        }
        let inference = self.infer_unchecked(x);
        let z = inference.cid;
        if counters.mode() == AccountingMode::Formula {
            self.capture_backoff(x, z);
            self.search_losers(x, z, rng);
            counters.record(OpCounts::formula(&self.config));
        } else {
            let inference_adds = self.nonzero_inference_adds(x);
            let (capture, backoff) = self.capture_backoff(x, z);
            let search = self.search_losers(x, z, rng);
            counters.record(OpCounts {
                inference: inference_adds,
                capture,
                backoff,
                search,
            });
        }
        Ok(z)
    }

    /// Additions needed to score `x` when zero addends are skipped.
    fn nonzero_inference_adds(&self, x: &FeatureVector) -> u64 {
        (0..self.config.templates)
            .map(|i| {
                let nonzero: u64 = x
                    .values()
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        self.row(i, j)[self.config.window(v)]
                            .iter()
                            .filter(|&&w| w > 0)
                            .count() as u64
                    })
                    .sum();
                nonzero.saturating_sub(1)
            })
            .sum()
    }
}

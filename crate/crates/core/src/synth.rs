//! Synthetic spike shapes with ground-truth labels.
//!
//! A canonical spike is six positive feature means. Base neurons deviate
//! from the canonical means, and every spike instance deviates from its
//! neuron's base shape. Both deviations are normal with a standard
//! deviation relative to the canonical mean of each feature
//! (`sigma_j = dev * mean_j`).
//!
//! Draw order is part of the contract: base shapes are drawn neuron-major,
//! feature-minor. Each stream step draws the neuron first, then its six
//! feature deviations.

use std::io::{Read, Write};

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dendrite::FeatureVector;
use crate::seeding::{self, purpose};

pub const FEATURES: usize = 6;

/// Discretized feature values lie in `1..=LEVELS`.
pub const LEVELS: u16 = 32;

/// Default base deviation, relative to the canonical means.
pub const BASE_DEV: f64 = 0.375;

/// One spike shape as six real features.
pub type Shape = [f64; FEATURES];

/// Default canonical means, in arbitrary units normalized so the trough
/// depth is 1. Clustering on discretized features does not depend on the
/// means; Euclidean k-means on raw features does, and close means keep
/// the raw feature space nearly isotropic.
pub const DEFAULT_MEANS: Shape = [1.0, 0.96, 1.04, 0.98, 1.02, 0.94];

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("canonical means must be finite and positive, got {0:?}")]
    BadMeans(Shape),
    #[error("{name} must be finite and non-negative, got {value}")]
    BadDeviation { name: &'static str, value: f64 },
    #[error("base deviation must be positive to discretize, got {0}")]
    ZeroWindow(f64),
    #[error("need at least one neuron")]
    NoNeurons,
    #[error("stream length must be at least 1")]
    EmptyStream,
    #[error("zipf exponent must be finite and non-negative, got {0}")]
    BadExponent(f64),
    #[error("switch step {switch_at} outside stream of {len}")]
    BadSwitch { switch_at: usize, len: usize },
    #[error("stream csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("stream csv: {0}")]
    Format(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CanonicalShape {
    means: Shape,
}

impl CanonicalShape {
    pub fn new(means: Shape) -> Result<Self, SynthError> {
        if means.iter().all(|m| m.is_finite() && *m > 0.0) {
            Ok(CanonicalShape { means })
        } else {
            Err(SynthError::BadMeans(means))
        }
    }

    pub fn means(&self) -> &Shape {
        &self.means
    }
}

impl Default for CanonicalShape {
    fn default() -> Self {
        CanonicalShape {
            means: DEFAULT_MEANS,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaseNeuron {
    /// One-based neuron label.
    pub id: usize,
    pub features: Shape,
}

fn check_dev(name: &'static str, value: f64) -> Result<(), SynthError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(SynthError::BadDeviation { name, value })
    }
}

/// Draw `count` shapes around the canonical means, neuron-major.
pub fn draw_shapes<R: Rng + ?Sized>(
    canonical: &CanonicalShape,
    count: usize,
    dev: f64,
    rng: &mut R,
) -> Result<Vec<Shape>, SynthError> {
    check_dev("deviation", dev)?;
    Ok((0..count)
        .map(|_| {
            canonical.means.map(|mean| {
                let z: f64 = StandardNormal.sample(rng);
                mean + dev * mean * z
            })
        })
        .collect())
}

pub fn gen_base_neurons<R: Rng + ?Sized>(
    canonical: &CanonicalShape,
    count: usize,
    base_dev: f64,
    rng: &mut R,
) -> Result<Vec<BaseNeuron>, SynthError> {
    if count == 0 {
        return Err(SynthError::NoNeurons);
    }
    check_dev("base deviation", base_dev)?;
    Ok(draw_shapes(canonical, count, base_dev, rng)?
        .into_iter()
        .enumerate()
        .map(|(i, features)| BaseNeuron { id: i + 1, features })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RateModel {
    Uniform,
    /// `P(neuron i) ∝ 1 / i^exponent` over one-based ids.
    Zipf { exponent: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorConfig {
    pub neurons: usize,
    pub base_dev: f64,
    pub instance_dev: f64,
    pub rate: RateModel,
    pub stream_length: usize,
    pub seed: u64,
    /// From this step on, spikes come from an independent second set of
    /// base neurons.
    pub switch_at: Option<usize>,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            neurons: 8,
            base_dev: BASE_DEV,
            instance_dev: 2.0 / 16.0,
            rate: RateModel::Uniform,
            stream_length: 10_000,
            seed: 0,
            switch_at: None,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.neurons == 0 {
            return Err(SynthError::NoNeurons);
        }
        if self.stream_length == 0 {
            return Err(SynthError::EmptyStream);
        }
        check_dev("instance deviation", self.instance_dev)?;
        if !(self.base_dev.is_finite() && self.base_dev > 0.0) {
            return Err(SynthError::ZeroWindow(self.base_dev));
        }
        if let RateModel::Zipf { exponent } = self.rate {
            if !(exponent.is_finite() && exponent >= 0.0) {
                return Err(SynthError::BadExponent(exponent));
            }
        }
        if let Some(s) = self.switch_at {
            if s >= self.stream_length {
                return Err(SynthError::BadSwitch {
                    switch_at: s,
                    len: self.stream_length,
                });
            }
        }
        Ok(())
    }
}

/// Maps raw features onto `1..=LEVELS`.
///
/// Feature `j` maps linearly from `mean_j ± 3 * base_dev * mean_j` onto
/// `[1, LEVELS]`, rounds half up and clamps out-of-window values to the
/// ends. A raw value exactly at the mean lands on 17.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Discretizer {
    low: Shape,
    span: Shape,
}

impl Discretizer {
    pub fn new(canonical: &CanonicalShape, base_dev: f64) -> Result<Self, SynthError> {
        if !(base_dev.is_finite() && base_dev > 0.0) {
            return Err(SynthError::ZeroWindow(base_dev));
        }
        let sigma = canonical.means.map(|m| base_dev * m);
        let mut low = [0.0; FEATURES];
        for j in 0..FEATURES {
            low[j] = canonical.means[j] - 3.0 * sigma[j];
        }
        Ok(Discretizer {
            low,
            span: sigma.map(|s| 6.0 * s),
        })
    }

    pub fn value(&self, feature: usize, raw: f64) -> u16 {
        let top = f64::from(LEVELS - 1);
        let scaled = 1.0 + (raw - self.low[feature]) / self.span[feature] * top;
        (scaled + 0.5).floor().clamp(1.0, f64::from(LEVELS)) as u16
    }

    pub fn discretize(&self, raw: &Shape) -> FeatureVector {
        FeatureVector::new((0..FEATURES).map(|j| self.value(j, raw[j])).collect())
    }

    /// A discretized vector back as reals, for k-means on the integer grid.
    pub fn as_reals(x: &FeatureVector) -> Shape {
        let mut out = [0.0; FEATURES];
        for (o, &v) in out.iter_mut().zip(x.values()) {
            *o = f64::from(v);
        }
        out
    }
}

/// Shorthand for a one-off discretization.
pub fn discretize(
    raw: &Shape,
    canonical: &CanonicalShape,
    base_dev: f64,
) -> Result<FeatureVector, SynthError> {
    Ok(Discretizer::new(canonical, base_dev)?.discretize(raw))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spike {
    /// One-based label of the emitting neuron.
    pub neuron: usize,
    /// 0 before the switch step, 1 from it on.
    pub base_set: u8,
    pub raw: Shape,
    pub discrete: FeatureVector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledStream {
    pub spikes: Vec<Spike>,
}

impl LabeledStream {
    pub fn len(&self) -> usize {
        self.spikes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spikes.is_empty()
    }

    /// Zero-based neuron labels.
    pub fn labels(&self) -> Vec<usize> {
        self.spikes.iter().map(|s| s.neuron - 1).collect()
    }

    /// CSV with header `step,true_neuron,f1..f6,d1..d6`. Reals are written
    /// in shortest round-trip form, so output is bit-exact per seed.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), SynthError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["step".to_string(), "true_neuron".to_string()];
        header.extend((1..=FEATURES).map(|j| format!("f{j}")));
        header.extend((1..=FEATURES).map(|j| format!("d{j}")));
        w.write_record(&header)?;
        for (step, s) in self.spikes.iter().enumerate() {
            let mut row = vec![step.to_string(), s.neuron.to_string()];
            row.extend(s.raw.iter().map(|f| format!("{f:?}")));
            row.extend(s.discrete.values().iter().map(u16::to_string));
            w.write_record(&row)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Reads the format written by [`LabeledStream::write_csv`]. The
    /// base-set marker is not stored and reads back as 0.
    pub fn read_csv<R: Read>(input: R) -> Result<Self, SynthError> {
        let mut r = csv::Reader::from_reader(input);
        let bad = |m: String| SynthError::Format(m);
        let mut spikes = Vec::new();
        for (i, record) in r.records().enumerate() {
            let record = record?;
            if record.len() != 2 + 2 * FEATURES {
                return Err(bad(format!("row {i} has {} fields", record.len())));
            }
            let field = |k: usize| record.get(k).unwrap_or_default();
            let neuron = field(1)
                .parse()
                .map_err(|e| bad(format!("row {i} neuron: {e}")))?;
            let mut raw = [0.0; FEATURES];
            for (j, v) in raw.iter_mut().enumerate() {
                *v = field(2 + j)
                    .parse()
                    .map_err(|e| bad(format!("row {i} f{}: {e}", j + 1)))?;
            }
            let discrete = (0..FEATURES)
                .map(|j| {
                    field(2 + FEATURES + j)
                        .parse()
                        .map_err(|e| bad(format!("row {i} d{}: {e}", j + 1)))
                })
                .collect::<Result<Vec<u16>, _>>()?;
            spikes.push(Spike {
                neuron,
                base_set: 0,
                raw,
                discrete: FeatureVector::new(discrete),
            });
        }
        Ok(LabeledStream { spikes })
    }
}

enum Selector {
    Uniform(usize),
    Weighted(WeightedIndex<f64>),
}

impl Selector {
    fn new(rate: RateModel, neurons: usize) -> Self {
        match rate {
            RateModel::Uniform => Selector::Uniform(neurons),
            RateModel::Zipf { exponent } => Selector::Weighted(
                WeightedIndex::new((1..=neurons).map(|i| (i as f64).powf(-exponent)))
                    .expect("zipf weights are positive and finite"),
            ),
        }
    }

    fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match self {
            Selector::Uniform(n) => rng.random_range(0..*n),
            Selector::Weighted(w) => w.sample(rng),
        }
    }
}

/// Generate a labeled stream from the given base neurons.
///
/// All draws come from streams derived from `cfg.seed`. With `switch_at`
/// set, a second, independent base set of the same size (derived from the
/// same seed under a different tag) emits every spike from that step on;
/// labels stay in `1..=N`.
pub fn gen_stream(
    canonical: &CanonicalShape,
    neurons: &[BaseNeuron],
    cfg: &GeneratorConfig,
) -> Result<LabeledStream, SynthError> {
    cfg.validate()?;
    if neurons.is_empty() {
        return Err(SynthError::NoNeurons);
    }
    let discretizer = Discretizer::new(canonical, cfg.base_dev)?;
    let second = match cfg.switch_at {
        Some(_) => gen_base_neurons(
            canonical,
            neurons.len(),
            cfg.base_dev,
            &mut seeding::rng_for(cfg.seed, &[purpose::SWITCH_NEURONS]),
        )?,
        None => Vec::new(),
    };
    let selector = Selector::new(cfg.rate, neurons.len());
    let mut rng = seeding::rng_for(cfg.seed, &[purpose::STREAM]);
    let sigma = canonical.means.map(|m| cfg.instance_dev * m);

    let spikes = (0..cfg.stream_length)
        .map(|step| {
            let switched = cfg.switch_at.is_some_and(|s| step >= s);
            let set = if switched { &second } else { neurons };
            let neuron = &set[selector.pick(&mut rng)];
            let mut raw = neuron.features;
            for (f, s) in raw.iter_mut().zip(sigma) {
                let z: f64 = StandardNormal.sample(&mut rng);
                *f += s * z;
            }
            Spike {
                neuron: neuron.id,
                base_set: u8::from(switched),
                discrete: discretizer.discretize(&raw),
                raw,
            }
        })
        .collect();
    Ok(LabeledStream { spikes })
}

use rayon::prelude::*;

use super::report::{Cell, Metric, OpRow, Report, TracePoint};
use super::{ExperimentSpec, Result, Scenario};
use crate::dendrite::{AccountingMode, Dendrite, OpCounters, Search};
use crate::kmeans::{self, KMeansModel};
use crate::metrics::{self, ContingencyTable};
use crate::seeding::{derive_seed, purpose, rng_for};
use crate::synth::{
    self, BaseNeuron, CanonicalShape, Discretizer, GeneratorConfig, LabeledStream, Shape,
};

/// One `(neurons, cids, dev, seed)` coordinate.
#[derive(Clone, Copy, Debug)]
struct Job {
    neurons: usize,
    cids: usize,
    dev: u32,
    seed: usize,
}

impl ExperimentSpec {
    fn canonical(&self) -> Result<CanonicalShape> {
        Ok(CanonicalShape::new(self.means)?)
    }

    pub fn base_neurons(&self, neurons: usize, seed: usize) -> Result<Vec<BaseNeuron>> {
        let mut rng = rng_for(
            self.master_seed,
            &[purpose::BASE_NEURONS, neurons as u64, seed as u64],
        );
        Ok(synth::gen_base_neurons(
            &self.canonical()?,
            neurons,
            self.base_dev,
            &mut rng,
        )?)
    }

    /// The first `count` realistic initial centroids for a cell.
    pub fn initial_centroids(&self, neurons: usize, seed: usize, count: usize) -> Result<Vec<Shape>> {
        let mut rng = rng_for(
            self.master_seed,
            &[purpose::CENTROIDS, neurons as u64, seed as u64],
        );
        Ok(synth::draw_shapes(
            &self.canonical()?,
            count,
            self.base_dev,
            &mut rng,
        )?)
    }

    pub fn generator(&self, neurons: usize, dev: u32, seed: usize) -> GeneratorConfig {
        GeneratorConfig {
            neurons,
            base_dev: self.base_dev,
            instance_dev: f64::from(dev) / 16.0,
            rate: self.rate,
            stream_length: self.stream_length,
            seed: derive_seed(
                self.master_seed,
                &[purpose::STREAM, neurons as u64, seed as u64, u64::from(dev)],
            ),
            switch_at: (self.scenario == Scenario::NdAdapt).then_some(self.switch_at),
        }
    }

    /// The labeled stream for one cell.
    pub fn stream(&self, neurons: usize, dev: u32, seed: usize) -> Result<LabeledStream> {
        let base = self.base_neurons(neurons, seed)?;
        Ok(synth::gen_stream(
            &self.canonical()?,
            &base,
            &self.generator(neurons, dev, seed),
        )?)
    }

    fn jobs(&self) -> Vec<Job> {
        let mut jobs = Vec::new();
        for &neurons in &self.neurons {
            for cids in self.cid_counts(neurons) {
                for &dev in &self.devs {
                    for seed in 0..self.seeds {
                        jobs.push(Job {
                            neurons,
                            cids,
                            dev,
                            seed,
                        });
                    }
                }
            }
        }
        jobs
    }
}

/// Run a scenario. Cells run in parallel; results are collected in job
/// order, so output does not depend on scheduling.
pub fn run(spec: &ExperimentSpec) -> Result<Report> {
    spec.validate()?;
    let jobs = spec.jobs();
    let mut report = Report::new(spec.clone());
    match spec.scenario {
        Scenario::NdAdapt => {
            let traces = jobs
                .par_iter()
                .map(|job| adapt_job(spec, job))
                .collect::<Result<Vec<_>>>()?;
            report.trace = merge_traces(spec, &jobs, traces);
        }
        Scenario::OpCount => {
            let counts = jobs
                .par_iter()
                .map(|job| op_job(spec, job))
                .collect::<Result<Vec<_>>>()?;
            report.ops = merge_ops(&jobs, counts);
        }
        _ => {
            let values = jobs
                .par_iter()
                .map(|job| sweep_job(spec, job))
                .collect::<Result<Vec<_>>>()?;
            report.cells = merge_cells(spec, &jobs, values);
        }
    }
    Ok(report)
}

fn sweep_job(spec: &ExperimentSpec, job: &Job) -> Result<Vec<(Metric, f64)>> {
    match spec.scenario {
        Scenario::KmeansIdeal
        | Scenario::KmeansRealistic
        | Scenario::KmeansDiscretized
        | Scenario::ZipfKmeans => kmeans_job(spec, job),
        _ => nd_job(spec, job),
    }
}

/// Cluster the whole stream online; returns the CId index per spike.
fn run_nd(
    spec: &ExperimentSpec,
    job: &Job,
    stream: &LabeledStream,
    counters: Option<&mut OpCounters>,
    search: Option<Search>,
) -> Result<Vec<usize>> {
    let mut params = *spec.params(job.dev);
    if let Some(search) = search {
        params.search = search;
    }
    let config = params.dendrite_config(job.cids);
    let discretizer = Discretizer::new(&spec.canonical()?, spec.base_dev)?;
    let templates: Vec<_> = spec
        .initial_centroids(job.neurons, job.seed, job.cids)?
        .iter()
        .map(|c| discretizer.discretize(c))
        .collect();
    let mut dendrite = Dendrite::from_centroids(config, &templates, None)?;
    let mut rng = rng_for(
        spec.master_seed,
        &[
            purpose::SEARCH,
            job.neurons as u64,
            job.seed as u64,
            u64::from(job.dev),
            job.cids as u64,
        ],
    );
    let mut cids = Vec::with_capacity(stream.len());
    match counters {
        Some(counters) => {
            for spike in &stream.spikes {
                cids.push(dendrite.step_counted(&spike.discrete, &mut rng, counters)?.index());
            }
        }
        None => {
            for spike in &stream.spikes {
                cids.push(dendrite.step(&spike.discrete, &mut rng)?.index());
            }
        }
    }
    Ok(cids)
}

fn nd_job(spec: &ExperimentSpec, job: &Job) -> Result<Vec<(Metric, f64)>> {
    let stream = spec.stream(job.neurons, job.dev, job.seed)?;
    let cids = run_nd(spec, job, &stream, None, None)?;
    let labels = stream.labels();
    let table = ContingencyTable::from_labels(&labels[spec.warmup..], &cids[spec.warmup..])?;
    let mut out = vec![(
        Metric::Accuracy,
        metrics::sorting_accuracy(&table)?.accuracy(),
    )];
    match spec.scenario {
        Scenario::MaaCount => {
            for &maa in &spec.maa {
                let count = metrics::accurate_neuron_count(&table, maa)?;
                out.push((Metric::AccurateNeurons(maa), count as f64));
            }
        }
        Scenario::CidMismatch | Scenario::CidMergePurity => {
            out.push((Metric::Purity, metrics::purity(&table)?));
        }
        _ => {}
    }
    Ok(out)
}

fn kmeans_job(spec: &ExperimentSpec, job: &Job) -> Result<Vec<(Metric, f64)>> {
    let stream = spec.stream(job.neurons, job.dev, job.seed)?;
    let discretized = spec.scenario == Scenario::KmeansDiscretized;
    let features: Vec<Shape> = if discretized {
        stream
            .spikes
            .iter()
            .map(|s| Discretizer::as_reals(&s.discrete))
            .collect()
    } else {
        stream.spikes.iter().map(|s| s.raw).collect()
    };
    let initial: Vec<Shape> = if spec.scenario == Scenario::KmeansIdeal {
        spec.base_neurons(job.neurons, job.seed)?
            .into_iter()
            .map(|n| n.features)
            .collect()
    } else {
        let centroids = spec.initial_centroids(job.neurons, job.seed, job.cids)?;
        if discretized {
            let discretizer = Discretizer::new(&spec.canonical()?, spec.base_dev)?;
            centroids
                .iter()
                .map(|c| Discretizer::as_reals(&discretizer.discretize(c)))
                .collect()
        } else {
            centroids
        }
    };
    let (train, test) = features.split_at(spec.warmup);
    let model: KMeansModel<{ synth::FEATURES }> = kmeans::fit(train, initial, &spec.kmeans)?;
    let assigned = model.assign(test);
    let labels = stream.labels();
    let table = ContingencyTable::from_labels(&labels[spec.warmup..], &assigned)?;
    Ok(vec![
        (
            Metric::Accuracy,
            metrics::sorting_accuracy(&table)?.accuracy(),
        ),
        (Metric::Iterations, model.iterations as f64),
    ])
}

fn adapt_job(spec: &ExperimentSpec, job: &Job) -> Result<Vec<f64>> {
    let stream = spec.stream(job.neurons, job.dev, job.seed)?;
    let cids = run_nd(spec, job, &stream, None, None)?;
    Ok(metrics::windowed_accuracy(&stream.labels(), &cids, spec.window)?
        .into_iter()
        .map(|(_, acc)| acc)
        .collect())
}

fn op_job(spec: &ExperimentSpec, job: &Job) -> Result<Vec<OpCounters>> {
    let stream = spec.stream(job.neurons, job.dev, job.seed)?;
    let configured = spec.params(job.dev).search;
    let probabilistic = Search::Probabilistic {
        probability: configured.expected_increment(),
    };
    let modes = [
        (AccountingMode::Formula, None),
        (AccountingMode::Bypass, None),
        (AccountingMode::BypassProbabilistic, Some(probabilistic)),
    ];
    let mut out = Vec::new();
    for (mode, search) in modes {
        let mut counters = OpCounters::new(mode);
        run_nd(spec, job, &stream, Some(&mut counters), search)?;
        out.push(counters);
    }
    Ok(out)
}

fn merge_cells(spec: &ExperimentSpec, jobs: &[Job], values: Vec<Vec<(Metric, f64)>>) -> Vec<Cell> {
    let mut cells: Vec<Cell> = Vec::new();
    for chunk in jobs
        .iter()
        .zip(values)
        .collect::<Vec<_>>()
        .chunks(spec.seeds)
    {
        let job = chunk[0].0;
        let metrics: Vec<Metric> = chunk[0].1.iter().map(|(m, _)| *m).collect();
        for (i, metric) in metrics.into_iter().enumerate() {
            cells.push(Cell {
                neurons: job.neurons,
                cids: job.cids,
                dev: job.dev,
                metric,
                per_seed: chunk.iter().map(|(_, v)| v[i].1).collect(),
            });
        }
    }
    cells
}

fn merge_traces(spec: &ExperimentSpec, jobs: &[Job], traces: Vec<Vec<f64>>) -> Vec<TracePoint> {
    let mut points = Vec::new();
    for (chunk_jobs, chunk) in jobs.chunks(spec.seeds).zip(traces.chunks(spec.seeds)) {
        let job = chunk_jobs[0];
        let windows = chunk[0].len();
        for w in 0..windows {
            points.push(TracePoint {
                neurons: job.neurons,
                cids: job.cids,
                dev: job.dev,
                window: w,
                start: w * spec.window,
                per_seed: chunk.iter().map(|t| t[w]).collect(),
            });
        }
    }
    points
}

fn merge_ops(jobs: &[Job], counts: Vec<Vec<OpCounters>>) -> Vec<OpRow> {
    jobs.iter()
        .zip(counts)
        .flat_map(|(job, counters)| {
            counters.into_iter().map(move |c| OpRow {
                mode: c.mode(),
                neurons: job.neurons,
                cids: job.cids,
                dev: job.dev,
                seed: job.seed,
                totals: c.totals(),
                steps: c.steps(),
            })
        })
        .collect()
}

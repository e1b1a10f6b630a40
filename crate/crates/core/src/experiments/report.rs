use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{ExperimentSpec, Result, Scenario};
use crate::dendrite::{AccountingMode, OpCounts};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Metric {
    Accuracy,
    Purity,
    /// k-means centroid updates until convergence.
    Iterations,
    /// Neurons whose recall is at least the given threshold.
    AccurateNeurons(f64),
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Accuracy => f.write_str("accuracy"),
            Metric::Purity => f.write_str("purity"),
            Metric::Iterations => f.write_str("iterations"),
            Metric::AccurateNeurons(maa) => write!(f, "accurate@{maa}"),
        }
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// One metric over all seeds of one `(neurons, cids, dev)` cell.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub neurons: usize,
    pub cids: usize,
    /// Instance deviation in sixteenths.
    pub dev: u32,
    pub metric: Metric,
    pub per_seed: Vec<f64>,
}

impl Cell {
    pub fn mean(&self) -> f64 {
        mean(&self.per_seed)
    }
}

/// Windowed accuracy for one window of one cell.
#[derive(Clone, Debug, PartialEq)]
pub struct TracePoint {
    pub neurons: usize,
    pub cids: usize,
    pub dev: u32,
    pub window: usize,
    /// First stream step in the window.
    pub start: usize,
    pub per_seed: Vec<f64>,
}

impl TracePoint {
    pub fn mean(&self) -> f64 {
        mean(&self.per_seed)
    }
}

/// Addition counts of one accounting mode over one stream.
#[derive(Clone, Debug, PartialEq)]
pub struct OpRow {
    pub mode: AccountingMode,
    pub neurons: usize,
    pub cids: usize,
    pub dev: u32,
    pub seed: usize,
    pub totals: OpCounts,
    pub steps: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub spec: ExperimentSpec,
    pub cells: Vec<Cell>,
    pub trace: Vec<TracePoint>,
    pub ops: Vec<OpRow>,
}

fn per_step(totals: &OpCounts, steps: u64) -> [f64; 5] {
    let s = steps.max(1) as f64;
    [
        totals.inference,
        totals.capture,
        totals.backoff,
        totals.search,
        totals.total(),
    ]
    .map(|c| c as f64 / s)
}

fn dev_value(dev: u32) -> f64 {
    f64::from(dev) / 16.0
}

impl Report {
    pub fn new(spec: ExperimentSpec) -> Self {
        Report {
            spec,
            cells: Vec::new(),
            trace: Vec::new(),
            ops: Vec::new(),
        }
    }

    pub fn cell(&self, neurons: usize, cids: usize, dev: u32, metric: Metric) -> Option<&Cell> {
        self.cells.iter().find(|c| {
            c.neurons == neurons && c.cids == cids && c.dev == dev && c.metric == metric
        })
    }

    /// Mean of `metric` for the cell with one CId per neuron.
    pub fn mean(&self, neurons: usize, dev: u32, metric: Metric) -> Option<f64> {
        self.cells
            .iter()
            .find(|c| c.neurons == neurons && c.dev == dev && c.metric == metric)
            .map(Cell::mean)
    }

    /// Per-step additions per accounting mode, pooled over all streams:
    /// `[inference, capture, backoff, search, total]`.
    pub fn op_summary(&self) -> Vec<(AccountingMode, [f64; 5])> {
        let mut modes: Vec<AccountingMode> = Vec::new();
        for row in &self.ops {
            if !modes.contains(&row.mode) {
                modes.push(row.mode);
            }
        }
        modes
            .into_iter()
            .map(|mode| {
                let mut totals = OpCounts::default();
                let mut steps = 0;
                for row in self.ops.iter().filter(|r| r.mode == mode) {
                    totals += row.totals;
                    steps += row.steps;
                }
                (mode, per_step(&totals, steps))
            })
            .collect()
    }

    /// Write `results.csv`, `per_seed.csv`, `plot.csv` and `config.txt`
    /// into `dir`, creating it if needed.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let open = |name: &str| -> Result<BufWriter<File>> {
            Ok(BufWriter::new(File::create(dir.join(name))?))
        };
        let mut w = open("results.csv")?;
        self.write_results(&mut w)?;
        w.flush()?;
        let mut w = open("per_seed.csv")?;
        self.write_per_seed(&mut w)?;
        w.flush()?;
        let mut w = open("plot.csv")?;
        self.write_plot(&mut w)?;
        w.flush()?;
        let mut w = open("config.txt")?;
        self.spec.write_config(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_results<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        match self.spec.scenario {
            Scenario::OpCount => {
                writeln!(out, "mode,inference,capture,backoff,search,total")?;
                for (mode, v) in self.op_summary() {
                    writeln!(out, "{mode},{},{},{},{},{}", v[0], v[1], v[2], v[3], v[4])?;
                }
            }
            Scenario::NdAdapt => {
                writeln!(out, "neurons,cids,instance_dev,window,start,accuracy")?;
                for t in &self.trace {
                    writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        t.neurons,
                        t.cids,
                        dev_value(t.dev),
                        t.window,
                        t.start,
                        t.mean()
                    )?;
                }
            }
            _ => {
                writeln!(out, "neurons,cids,instance_dev,metric,mean,seeds")?;
                for c in &self.cells {
                    writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        c.neurons,
                        c.cids,
                        dev_value(c.dev),
                        c.metric,
                        c.mean(),
                        c.per_seed.len()
                    )?;
                }
            }
        }
        Ok(())
    }

    pub fn write_per_seed<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        match self.spec.scenario {
            Scenario::OpCount => {
                writeln!(
                    out,
                    "mode,neurons,cids,instance_dev,seed,steps,inference,capture,backoff,search,total"
                )?;
                for r in &self.ops {
                    let t = &r.totals;
                    writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},{},{},{}",
                        r.mode,
                        r.neurons,
                        r.cids,
                        dev_value(r.dev),
                        r.seed,
                        r.steps,
                        t.inference,
                        t.capture,
                        t.backoff,
                        t.search,
                        t.total()
                    )?;
                }
            }
            Scenario::NdAdapt => {
                writeln!(out, "neurons,cids,instance_dev,window,start,seed,accuracy")?;
                for t in &self.trace {
                    for (seed, v) in t.per_seed.iter().enumerate() {
                        writeln!(
                            out,
                            "{},{},{},{},{},{seed},{v}",
                            t.neurons,
                            t.cids,
                            dev_value(t.dev),
                            t.window,
                            t.start
                        )?;
                    }
                }
            }
            _ => {
                writeln!(out, "neurons,cids,instance_dev,metric,seed,value")?;
                for c in &self.cells {
                    for (seed, v) in c.per_seed.iter().enumerate() {
                        writeln!(
                            out,
                            "{},{},{},{},{seed},{v}",
                            c.neurons,
                            c.cids,
                            dev_value(c.dev),
                            c.metric
                        )?;
                    }
                }
            }
        }
        Ok(())
    }

    /// The x/y series a plot of this scenario needs.
    pub fn write_plot<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        match self.spec.scenario {
            Scenario::OpCount => {
                writeln!(out, "mode,category,additions_per_step")?;
                for (mode, v) in self.op_summary() {
                    for (name, x) in ["inference", "capture", "backoff", "search", "total"]
                        .iter()
                        .zip(v)
                    {
                        writeln!(out, "{mode},{name},{x}")?;
                    }
                }
            }
            Scenario::NdAdapt => {
                writeln!(out, "step,accuracy")?;
                for t in &self.trace {
                    writeln!(out, "{},{}", t.start, t.mean())?;
                }
            }
            Scenario::MaaCount => {
                writeln!(out, "instance_dev,neurons,maa,accurate_neurons")?;
                for c in &self.cells {
                    if let Metric::AccurateNeurons(maa) = c.metric {
                        writeln!(out, "{},{},{maa},{}", dev_value(c.dev), c.neurons, c.mean())?;
                    }
                }
            }
            Scenario::CidMismatch | Scenario::CidMergePurity => {
                let (metric, name) = if self.spec.scenario == Scenario::CidMismatch {
                    (Metric::Accuracy, "accuracy")
                } else {
                    (Metric::Purity, "purity")
                };
                writeln!(out, "cids,instance_dev,neurons,{name}")?;
                for c in self.cells.iter().filter(|c| c.metric == metric) {
                    writeln!(
                        out,
                        "{},{},{},{}",
                        c.cids,
                        dev_value(c.dev),
                        c.neurons,
                        c.mean()
                    )?;
                }
            }
            _ => {
                writeln!(out, "instance_dev,neurons,accuracy")?;
                for c in self.cells.iter().filter(|c| c.metric == Metric::Accuracy) {
                    writeln!(out, "{},{},{}", dev_value(c.dev), c.neurons, c.mean())?;
                }
            }
        }
        Ok(())
    }
}

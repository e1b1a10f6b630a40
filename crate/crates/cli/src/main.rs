use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ndsort::dendrite::OpCounts;
use ndsort::experiments::{self, parse_config, ExperimentSpec, Scenario};
use ndsort::metrics::{self, table_from_array, WORKED_TABLE, WORKED_TABLE_RECONCILED};

/// Online spike sorting with neuromorphic dendrites: synthetic benchmark
/// runner.
#[derive(Parser)]
#[command(name = "ndsort", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one labeled synthetic stream as CSV.
    Generate {
        #[command(flatten)]
        settings: Settings,
        /// Seed index within the sweep.
        #[arg(long, default_value_t = 0)]
        seed_index: usize,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one scenario and write results, per-seed values, plot data and
    /// the resolved config.
    Run {
        /// Scenario id (see `list`).
        #[arg(id = "scenario_id", value_name = "SCENARIO")]
        scenario: Option<String>,
        #[command(flatten)]
        settings: Settings,
        /// Output directory; defaults to `out/<scenario>`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the built-in oracles.
    Verify,
    /// List scenarios.
    List,
}

#[derive(Args, Default)]
struct Settings {
    #[arg(long)]
    scenario: Option<String>,
    /// Flat `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Neuron counts, e.g. `6` or `4..12`.
    #[arg(long)]
    neurons: Option<String>,
    /// Instance deviations, e.g. `2/16`, `0.25` or `1/16,3/16`.
    #[arg(long)]
    dev: Option<String>,
    #[arg(long)]
    seeds: Option<String>,
    /// Master seed.
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    stream_length: Option<String>,
    #[arg(long)]
    warmup: Option<String>,
    /// `uniform`, `zipf` or `zipf:<exponent>`.
    #[arg(long)]
    rate: Option<String>,
    #[arg(long)]
    capture: Option<String>,
    #[arg(long)]
    backoff: Option<String>,
    /// `off`, `a/b` or `prob:<p>`.
    #[arg(long)]
    search: Option<String>,
    #[arg(long)]
    wmax: Option<String>,
    #[arg(long)]
    wbase: Option<String>,
    #[arg(long)]
    radius: Option<String>,
    /// Replace fractional search by probabilistic search with the same
    /// expected increment.
    #[arg(long)]
    prob_search: bool,
    /// Templates per nD (and centroids per k-means run).
    #[arg(long, conflicts_with = "cids")]
    p: Option<String>,
    /// Template counts to sweep, e.g. `6..12`.
    #[arg(long)]
    cids: Option<String>,
}

impl Settings {
    fn resolve(&self, positional: Option<&str>) -> Result<ExperimentSpec> {
        let file_pairs = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                parse_config(&text)?
            }
            None => Vec::new(),
        };
        let from_file = file_pairs
            .iter()
            .find(|(k, _)| k == "scenario")
            .map(|(_, v)| v.as_str());
        let name = match (positional, self.scenario.as_deref()) {
            (Some(a), Some(b)) if a != b => bail!("scenario given twice: `{a}` and `{b}`"),
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => from_file.unwrap_or("nd-baseline"),
        };
        let mut spec = ExperimentSpec::new(name.parse()?);
        for (key, value) in file_pairs.iter().filter(|(k, _)| k != "scenario") {
            spec.set(key, value)?;
        }
        let flags = [
            ("neurons", &self.neurons),
            ("devs", &self.dev),
            ("seeds", &self.seeds),
            ("master_seed", &self.seed),
            ("stream_length", &self.stream_length),
            ("warmup", &self.warmup),
            ("rate", &self.rate),
            ("capture", &self.capture),
            ("backoff", &self.backoff),
            ("search", &self.search),
            ("w_max", &self.wmax),
            ("w_base", &self.wbase),
            ("radius", &self.radius),
            ("cids", &self.p),
            ("cids", &self.cids),
        ];
        for (key, value) in flags {
            if let Some(value) = value {
                spec.set(key, value)?;
            }
        }
        if self.prob_search {
            spec.use_probabilistic_search();
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn generate(settings: &Settings, seed_index: usize, out: Option<PathBuf>) -> Result<()> {
    let spec = settings.resolve(None)?;
    let neurons = spec.neurons[0];
    let dev = spec.devs[0];
    let stream = spec.stream(neurons, dev, seed_index)?;
    match out {
        Some(path) => {
            let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            stream.write_csv(BufWriter::new(file))?;
        }
        None => stream.write_csv(io::stdout().lock())?,
    }
    Ok(())
}

fn run(scenario: Option<String>, settings: &Settings, out: Option<PathBuf>) -> Result<()> {
    let spec = settings.resolve(scenario.as_deref())?;
    let dir = out.unwrap_or_else(|| PathBuf::from("out").join(spec.scenario.id()));
    let report = experiments::run(&spec)?;
    report
        .write_dir(&dir)
        .with_context(|| format!("writing results to {}", dir.display()))?;
    let mut stdout = io::stdout().lock();
    report.write_results(&mut stdout)?;
    writeln!(stdout, "# wrote {}", dir.display())?;
    Ok(())
}

fn check(name: &str, ok: bool, detail: String) -> bool {
    println!("{} {name}: {detail}", if ok { "ok  " } else { "FAIL" });
    ok
}

fn verify() -> Result<bool> {
    let mut all = true;

    let reconciled = table_from_array(&WORKED_TABLE_RECONCILED);
    let sa = metrics::sorting_accuracy(&reconciled)?;
    all &= check(
        "worked table sorting accuracy",
        sa.matched == 4120 && sa.accuracy() == 0.824,
        format!("sum {} of {}, accuracy {}", sa.matched, sa.total, sa.accuracy()),
    );

    let printed = table_from_array(&WORKED_TABLE);
    let sp = metrics::sorting_accuracy(&printed)?;
    println!(
        "note worked table as printed: sum {} of {}, accuracy {} (one misplaced cell; corrected above)",
        sp.matched,
        sp.total,
        sp.accuracy()
    );

    for (name, table) in [("reconciled", &reconciled), ("as printed", &printed)] {
        let purity = metrics::purity(table)?;
        all &= check(
            &format!("worked table purity ({name})"),
            purity == 0.9322,
            format!("{purity}"),
        );
    }

    let config = ExperimentSpec::new(Scenario::OpCount).small.dendrite_config(8);
    let ops = OpCounts::formula(&config);
    all &= check(
        "op-count formula (p=8, m=6, n=32, r=3)",
        [ops.inference, ops.capture, ops.backoff, ops.search, ops.total()]
            == [328, 42, 150, 294, 814],
        format!(
            "{},{},{},{},{}",
            ops.inference,
            ops.capture,
            ops.backoff,
            ops.search,
            ops.total()
        ),
    );
    Ok(all)
}

fn list() {
    for s in Scenario::ALL {
        println!("{:<18} {}", s.id(), s.description());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate {
            settings,
            seed_index,
            out,
        } => generate(&settings, seed_index, out),
        Command::Run {
            scenario,
            settings,
            out,
        } => run(scenario, &settings, out),
        Command::Verify => match verify() {
            Ok(true) => Ok(()),
            Ok(false) => Err(anyhow::anyhow!("verification failed")),
            Err(e) => Err(e),
        },
        Command::List => {
            list();
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

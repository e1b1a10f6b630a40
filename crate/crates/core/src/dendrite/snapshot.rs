//! Text snapshot of a dendrite.
//!
//! Layout, version 1 (one item per line, space separated):
//!
//! ```text
//! ndsort-dendrite 1
//! templates <p>
//! features <m>
//! values <n>
//! radius <r>
//! w_max <units>
//! w_base <units>
//! capture <units>
//! backoff <units>
//! search off | search fractional <num> <den> | search probabilistic <prob>
//! scale <raw units per weight unit>
//! weights
//! <n raw weights>        (p * m lines, template-major then feature)
//! end
//! ```
//!
//! Weights are raw fixed-point integers, so a write/read round trip is exact.
//! The probability is written in Rust's shortest round-trip float form.

use std::io::{BufRead, Write};

use super::{Dendrite, DendriteConfig, DendriteError, Result, Search};

const MAGIC: &str = "ndsort-dendrite";
const VERSION: u32 = 1;

impl Dendrite {
    pub fn write_snapshot<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let c = &self.config;
        writeln!(out, "{MAGIC} {VERSION}")?;
        writeln!(out, "templates {}", c.templates)?;
        writeln!(out, "features {}", c.features)?;
        writeln!(out, "values {}", c.values)?;
        writeln!(out, "radius {}", c.radius)?;
        writeln!(out, "w_max {}", c.w_max)?;
        writeln!(out, "w_base {}", c.w_base)?;
        writeln!(out, "capture {}", c.capture)?;
        writeln!(out, "backoff {}", c.backoff)?;
        match c.search {
            Search::Off => writeln!(out, "search off")?,
            Search::Fractional {
                numerator,
                denominator,
            } => writeln!(out, "search fractional {numerator} {denominator}")?,
            Search::Probabilistic { probability } => {
                writeln!(out, "search probabilistic {probability:?}")?
            }
        }
        writeln!(out, "scale {}", self.scale)?;
        writeln!(out, "weights")?;
        for row in self.weights.chunks(usize::from(c.values)) {
            let line: Vec<String> = row.iter().map(u16::to_string).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        writeln!(out, "end")
    }

    pub fn read_snapshot<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines().map(|l| l.map_err(|e| err(e.to_string())));
        let mut next = || -> Result<String> {
            lines.next().unwrap_or_else(|| Err(err("unexpected end of snapshot")))
        };

        let header = next()?;
        if header != format!("{MAGIC} {VERSION}") {
            return Err(err(format!("unsupported header {header:?}")));
        }
        let templates = field(&next()?, "templates")?;
        let features = field(&next()?, "features")?;
        let values = field(&next()?, "values")?;
        let radius = field(&next()?, "radius")?;
        let w_max = field(&next()?, "w_max")?;
        let w_base = field(&next()?, "w_base")?;
        let capture = field(&next()?, "capture")?;
        let backoff = field(&next()?, "backoff")?;
        let search = parse_search(&next()?)?;
        let scale: u16 = field(&next()?, "scale")?;
        let config = DendriteConfig {
            templates,
            features,
            values,
            radius,
            w_max,
            w_base,
            capture,
            backoff,
            search,
        };
        config.validate()?;
        if scale != search.scale() {
            return Err(err(format!(
                "scale {scale} does not match search {search}"
            )));
        }
        if next()? != "weights" {
            return Err(err("missing weights section"));
        }
        let mut weights = Vec::with_capacity(templates * features * usize::from(values));
        for _ in 0..templates * features {
            let line = next()?;
            let row = line
                .split_whitespace()
                .map(|t| t.parse::<u16>().map_err(|e| err(format!("bad weight {t:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if row.len() != usize::from(values) {
                return Err(err(format!("weight row has {} entries", row.len())));
            }
            weights.extend(row);
        }
        if next()? != "end" {
            return Err(err("missing end marker"));
        }
        Dendrite::from_parts(config, weights)
    }
}

fn err(msg: impl Into<String>) -> DendriteError {
    DendriteError::Snapshot(msg.into())
}

fn field<T: std::str::FromStr>(line: &str, key: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let mut parts = line.split_whitespace();
    if parts.next() != Some(key) {
        return Err(err(format!("expected {key:?}, found {line:?}")));
    }
    let value = parts.next().ok_or_else(|| err(format!("{key} has no value")))?;
    value
        .parse()
        .map_err(|e| err(format!("bad {key} {value:?}: {e}")))
}

fn parse_search(line: &str) -> Result<Search> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    let num = |s: &str| s.parse::<u16>().map_err(|e| err(format!("bad search {s:?}: {e}")));
    match parts.as_slice() {
        ["search", "off"] => Ok(Search::Off),
        ["search", "fractional", a, b] => Ok(Search::Fractional {
            numerator: num(a)?,
            denominator: num(b)?,
        }),
        ["search", "probabilistic", p] => Ok(Search::Probabilistic {
            probability: p
                .parse()
                .map_err(|e| err(format!("bad probability {p:?}: {e}")))?,
        }),
        _ => Err(err(format!("bad search line {line:?}"))),
    }
}

//! Addition counts as a proxy for energy.
//!
//! The closed-form counts assume every addressed weight is touched. The
//! measured modes skip increments of saturated weights, decrements of zero
//! weights, search increments that cannot change a weight, and zero addends
//! during inference.

use std::fmt;
use std::ops::AddAssign;

use super::DendriteConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AccountingMode {
    /// Closed-form per-step counts.
    Formula,
    /// Measured counts with bypassing.
    Bypass,
    /// Measured counts with bypassing on a dendrite using probabilistic
    /// search.
    BypassProbabilistic,
}

impl AccountingMode {
    pub fn label(self) -> &'static str {
        match self {
            AccountingMode::Formula => "formula-baseline",
            AccountingMode::Bypass => "bypass",
            AccountingMode::BypassProbabilistic => "bypass+probabilistic",
        }
    }
}

impl fmt::Display for AccountingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Two-input additions per category.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub inference: u64,
    pub capture: u64,
    pub backoff: u64,
    pub search: u64,
}

impl OpCounts {
    /// Per-step counts when nothing is bypassed:
    /// inference `p(m(2r+1) - 1)`, capture `m(2r+1)`,
    /// backoff `m(n - (2r+1))`, search `(p-1) m(2r+1)`.
    pub fn formula(config: &DendriteConfig) -> Self {
        let p = config.templates as u64;
        let m = config.features as u64;
        let n = u64::from(config.values);
        let width = config.window_width() as u64;
        OpCounts {
            inference: p * (m * width - 1),
            capture: m * width,
            backoff: m * (n - width),
            search: (p - 1) * m * width,
        }
    }

    pub fn total(&self) -> u64 {
        self.inference + self.capture + self.backoff + self.search
    }

    /// True when every category is at most the corresponding one in `other`.
    pub fn within(&self, other: &OpCounts) -> bool {
        self.inference <= other.inference
            && self.capture <= other.capture
            && self.backoff <= other.backoff
            && self.search <= other.search
    }
}

impl AddAssign for OpCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.inference += rhs.inference;
        self.capture += rhs.capture;
        self.backoff += rhs.backoff;
        self.search += rhs.search;
    }
}

/// Running totals over a stream.
#[derive(Clone, Debug, PartialEq)]
pub struct OpCounters {
    mode: AccountingMode,
    totals: OpCounts,
    steps: u64,
}

impl OpCounters {
    pub fn new(mode: AccountingMode) -> Self {
        OpCounters {
            mode,
            totals: OpCounts::default(),
            steps: 0,
        }
    }

    pub fn mode(&self) -> AccountingMode {
        self.mode
    }

    pub fn totals(&self) -> OpCounts {
        self.totals
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub(crate) fn record(&mut self, step: OpCounts) {
        self.totals += step;
        self.steps += 1;
    }

    /// Mean additions per step as `[inference, capture, backoff, search]`.
    pub fn per_step(&self) -> [f64; 4] {
        let steps = self.steps.max(1) as f64;
        let t = &self.totals;
        [t.inference, t.capture, t.backoff, t.search].map(|c| c as f64 / steps)
    }
}

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::search::SearchOutcome;
use crate::square::FrequencySquare;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    /// Two symbols: a balanced diagonal exists unless the square is a
    /// rearrangement of `A_{2 lambda}` with `lambda` odd.
    M2,
    /// Three symbols: a balanced diagonal always exists.
    M3,
    /// `B_n(lambda)` has a balanced diagonal iff `(n - 1) lambda` is even.
    Bgrid,
    /// A balanced diagonal exists whenever `(m - 1) lambda` is even.
    Conjecture,
    /// In `F(3 lambda; lambda^3)` a `k x k` subarray missing a symbol has `k <= 3 lambda / 2`.
    SubarrayBound,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::M2 => "m2",
            Target::M3 => "m3",
            Target::Bgrid => "bgrid",
            Target::Conjecture => "conjecture",
            Target::SubarrayBound => "subarray-bound",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exhaustive,
    Sampled,
}

/// A square on which the checked claim failed, re-confirmed from the stored grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// Enumeration index (exhaustive) or sample index (sampled).
    pub index: u64,
    pub square: FrequencySquare,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<SearchOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub canonical_key: Option<Vec<u8>>,
}

/// One row of a per-case table, e.g. one `(n, lambda)` pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Case {
    pub label: String,
    pub expected: String,
    pub observed: String,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub target: Target,
    pub parameters: BTreeMap<String, u64>,
    pub mode: Mode,
    pub total_checked: u64,
    pub violations: Vec<Violation>,
    pub summary: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cases: Vec<Case>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Wall-clock time. Left out of serialized output so reports are byte-stable.
    #[serde(skip)]
    pub elapsed_ms: Option<f64>,
}

impl VerificationReport {
    pub fn new(target: Target, mode: Mode) -> Self {
        Self {
            target,
            parameters: BTreeMap::new(),
            mode,
            total_checked: 0,
            violations: Vec::new(),
            summary: BTreeMap::new(),
            cases: Vec::new(),
            notes: Vec::new(),
            seed: None,
            elapsed_ms: None,
        }
    }

    pub fn held(&self) -> bool {
        self.violations.is_empty() && self.cases.iter().all(|c| c.ok)
    }

    pub fn param(mut self, key: &str, value: u64) -> Self {
        self.parameters.insert(key.to_string(), value);
        self
    }

    pub fn summary_value(&self, key: &str) -> u64 {
        self.summary.get(key).copied().unwrap_or(0)
    }

    /// Human-readable table. Contains no timing.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let params: Vec<String> = self.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(out, "target     {}", self.target);
        let _ = writeln!(out, "parameters {}", params.join(" "));
        let _ = writeln!(
            out,
            "mode       {}",
            match self.mode {
                Mode::Exhaustive => "exhaustive",
                Mode::Sampled => "sampled",
            }
        );
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "seed       {seed}");
        }
        let _ = writeln!(out, "checked    {}", self.total_checked);
        if !self.cases.is_empty() {
            let w = self.cases.iter().map(|c| c.label.len()).max().unwrap_or(0).max(4);
            let we = self.cases.iter().map(|c| c.expected.len()).max().unwrap_or(0).max(8);
            let wo = self.cases.iter().map(|c| c.observed.len()).max().unwrap_or(0).max(8);
            let _ = writeln!(out);
            let _ = writeln!(out, "{:<w$}  {:<we$}  {:<wo$}  ok", "case", "expected", "observed");
            for c in &self.cases {
                let _ = writeln!(
                    out,
                    "{:<w$}  {:<we$}  {:<wo$}  {}",
                    c.label,
                    c.expected,
                    c.observed,
                    if c.ok { "yes" } else { "NO" }
                );
            }
        }
        if !self.summary.is_empty() {
            let _ = writeln!(out);
            for (k, v) in &self.summary {
                let _ = writeln!(out, "{k:<28} {v}");
            }
        }
        for note in &self.notes {
            let _ = writeln!(out, "# {note}");
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "violations {}", self.violations.len());
        for v in &self.violations {
            let _ = writeln!(out, "- index {}: {}", v.index, v.detail);
            for line in v.square.to_text().lines() {
                let _ = writeln!(out, "    {line}");
            }
        }
        let _ = writeln!(out, "result     {}", if self.held() { "HELD" } else { "VIOLATED" });
        out
    }
}

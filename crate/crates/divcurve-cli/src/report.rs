//! Serializable analysis reports emitted by the CLI's `--json` mode.
//! Reports round-trip losslessly through JSON (float_roundtrip is enabled),
//! so numeric fields survive save/load exactly.

use serde::{Deserialize, Serialize};

use divcurve::analysis::Regime;
use divcurve::market::ScalarSummary;

/// Everything a single CLI invocation computed. Sections are optional so
/// each subcommand only reports what it derived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub scalars: ScalarSummary,
    /// Risk-free rate the report was computed with, when one applies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_f: Option<f64>,
    /// Sharpe scalar S at `mu_f`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sharpe_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime: Option<Regime>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub portfolio: Option<PortfolioBlock>,
}

impl AnalysisReport {
    pub fn new(scalars: ScalarSummary) -> Self {
        AnalysisReport {
            scalars,
            mu_f: None,
            sharpe_s: None,
            regime: None,
            portfolio: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text =
            serde_json::to_string_pretty(self).expect("report serialization cannot fail");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

/// An optimal portfolio at one requested risk tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortfolioBlock {
    pub tau: f64,
    pub labels: Vec<String>,
    /// Risky-asset weights (the (1 - w_f)-scaled leg when composite).
    pub weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub risk_free_weight: Option<f64>,
    /// Total weight including the risk-free leg.
    pub sum: f64,
    pub variance: f64,
    pub edm: f64,
}

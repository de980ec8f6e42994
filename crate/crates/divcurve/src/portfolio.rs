//! Closed-form mean-variance portfolios and the EDM diversification measure.
//!
//! Short sales are unrestricted throughout: the closed forms require it and
//! weights may be negative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, solve_spd};
use crate::market::{AssetUniverse, ScalarSummary};

/// Absolute tolerance on the budget identity (weights summing to 1).
pub const WEIGHT_SUM_ABS_TOL: f64 = 1e-10;

/// The tangent portfolio is declared undefined when |B - C*mu_f| falls below
/// this multiple of max(|B|, C*|mu_f|, 1).
pub const TANGENT_REL_TOL: f64 = 1e-10;

/// Investor risk tolerance tau = 1/gamma, finite and >= 0. tau = 0 is the
/// pure minimum-variance (or pure risk-free) investor; gamma is then
/// undefined and operations needing it require tau > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskTolerance {
    tau: f64,
}

impl RiskTolerance {
    pub fn new(tau: f64) -> Result<Self> {
        if !tau.is_finite() || tau < 0.0 {
            return Err(Error::InvalidInput(format!(
                "risk tolerance must be finite and >= 0, got {tau}"
            )));
        }
        Ok(RiskTolerance { tau })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Risk aversion gamma = 1/tau; `None` at tau = 0.
    pub fn gamma(&self) -> Option<f64> {
        (self.tau > 0.0).then(|| 1.0 / self.tau)
    }
}

/// Whether a portfolio is risky-only or carries a risk-free leg at `rate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PortfolioKind {
    RiskyOnly,
    Composite { rate: f64 },
}

/// A portfolio over the universe's risky assets, optionally combined with a
/// risk-free position. For `Composite`, `weights` is the risky leg already
/// scaled by (1 - risk_free_weight), so total weight is
/// risk_free_weight + sum(weights) = 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortfolioWeights {
    weights: Vec<f64>,
    kind: PortfolioKind,
    risk_free_weight: f64,
}

impl PortfolioWeights {
    /// A risky-only portfolio; weights must sum to 1.
    pub fn risky(weights: Vec<f64>) -> Result<Self> {
        Self::build(weights, PortfolioKind::RiskyOnly, 0.0)
    }

    /// A composite portfolio; `risky_leg` is the (1 - w_f)-scaled tangent leg
    /// and risk_free_weight + sum(risky_leg) must equal 1.
    pub fn composite(risky_leg: Vec<f64>, risk_free_weight: f64, rate: f64) -> Result<Self> {
        Self::build(risky_leg, PortfolioKind::Composite { rate }, risk_free_weight)
    }

    fn build(weights: Vec<f64>, kind: PortfolioKind, risk_free_weight: f64) -> Result<Self> {
        if !weights.iter().all(|w| w.is_finite()) || !risk_free_weight.is_finite() {
            return Err(Error::InvalidInput(
                "portfolio weights must be finite".into(),
            ));
        }
        let total = risk_free_weight + weights.iter().sum::<f64>();
        if (total - 1.0).abs() > WEIGHT_SUM_ABS_TOL {
            return Err(Error::InvalidInput(format!(
                "portfolio weights sum to {total}, expected 1"
            )));
        }
        Ok(PortfolioWeights {
            weights,
            kind,
            risk_free_weight,
        })
    }

    /// Weights over the risky assets (the (1 - w_f)-scaled leg for Composite).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kind(&self) -> PortfolioKind {
        self.kind
    }

    /// Weight in the risk-free asset; 0 for RiskyOnly.
    pub fn risk_free_weight(&self) -> f64 {
        self.risk_free_weight
    }
}

fn check_dim(u: &AssetUniverse, w: &PortfolioWeights) -> Result<()> {
    if w.weights().len() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            actual: w.weights().len(),
        });
    }
    Ok(())
}

/// The MV-optimal risky portfolio
/// w = tau * (S^-1 mu - (B/C) S^-1 1) + S^-1 1 / C.
/// At tau = 0 this is the global minimum-variance portfolio S^-1 1 / C.
pub fn optimal_weights(
    s: &ScalarSummary,
    u: &AssetUniverse,
    tau: RiskTolerance,
) -> Result<PortfolioWeights> {
    let ones = vec![1.0; u.dim()];
    let x_mu = solve_spd(u.sigma(), u.mu())?;
    let x_ones = solve_spd(u.sigma(), &ones)?;
    let bc = s.b / s.c;
    let weights = x_mu
        .iter()
        .zip(&x_ones)
        .map(|(m, o)| tau.tau() * (m - bc * o) + o / s.c)
        .collect();
    PortfolioWeights::risky(weights)
}

/// Portfolio variance w' S w of the risky leg (the risk-free asset
/// contributes no variance).
pub fn portfolio_variance(u: &AssetUniverse, w: &PortfolioWeights) -> Result<f64> {
    check_dim(u, w)?;
    Ok(u.sigma().quadratic_form(w.weights()))
}

/// Mean-variance utility E(R_w) - (gamma/2) V(R_w). The composite kind adds
/// risk_free_weight * rate to the mean.
pub fn mv_utility(u: &AssetUniverse, w: &PortfolioWeights, gamma: f64) -> Result<f64> {
    if gamma <= 0.0 || !gamma.is_finite() {
        return Err(Error::NonPositiveGamma { gamma });
    }
    check_dim(u, w)?;
    let mut mean = dot(u.mu(), w.weights());
    if let PortfolioKind::Composite { rate } = w.kind() {
        mean += w.risk_free_weight() * rate;
    }
    let variance = u.sigma().quadratic_form(w.weights());
    Ok(mean - 0.5 * gamma * variance)
}

/// The diversification measure EDM(w) = sum_i w_i sigma_i^2 - w' S w.
/// For Composite the sum runs over the scaled risky leg and the risk-free
/// asset contributes zero variance.
pub fn edm(u: &AssetUniverse, w: &PortfolioWeights) -> Result<f64> {
    check_dim(u, w)?;
    let sigma2 = u.asset_variances();
    Ok(dot(w.weights(), &sigma2) - u.sigma().quadratic_form(w.weights()))
}

/// Per-asset EDM terms w_i (sigma_i^2 - sigma^2(w)); they sum to `edm`.
/// For Composite an extra final entry w_f (0 - sigma^2(w)) carries the
/// risk-free asset's term so the sum identity still holds.
pub fn edm_decomposition(u: &AssetUniverse, w: &PortfolioWeights) -> Result<Vec<f64>> {
    check_dim(u, w)?;
    let pv = u.sigma().quadratic_form(w.weights());
    let sigma2 = u.asset_variances();
    let mut terms: Vec<f64> = w
        .weights()
        .iter()
        .zip(&sigma2)
        .map(|(wi, s2)| wi * (s2 - pv))
        .collect();
    if matches!(w.kind(), PortfolioKind::Composite { .. }) {
        terms.push(w.risk_free_weight() * (0.0 - pv));
    }
    Ok(terms)
}

/// The utility benefit of diversification, (gamma/2) * EDM(w). Equals the
/// gap between the utility of the portfolio and the weighted average utility
/// of its assets held alone.
pub fn diversification_gain(u: &AssetUniverse, w: &PortfolioWeights, gamma: f64) -> Result<f64> {
    if gamma <= 0.0 || !gamma.is_finite() {
        return Err(Error::NonPositiveGamma { gamma });
    }
    Ok(0.5 * gamma * edm(u, w)?)
}

/// Errors with `TangentUndefined` when mu_f coincides with the
/// minimum-variance return B/C (relative tolerance `TANGENT_REL_TOL`).
pub fn ensure_tangent_defined(s: &ScalarSummary, mu_f: f64) -> Result<()> {
    let denom = s.b - s.c * mu_f;
    let scale = s.b.abs().max(s.c * mu_f.abs()).max(1.0);
    if denom.abs() <= TANGENT_REL_TOL * scale {
        return Err(Error::TangentUndefined {
            mu_f,
            gmv_return: s.gmv_return(),
        });
    }
    Ok(())
}

/// The tangent portfolio S^-1 (mu - mu_f 1) / (B - C mu_f), undefined when
/// mu_f coincides with the minimum-variance return B/C.
pub fn tangent_weights(
    s: &ScalarSummary,
    u: &AssetUniverse,
    mu_f: f64,
) -> Result<PortfolioWeights> {
    ensure_tangent_defined(s, mu_f)?;
    let denom = s.b - s.c * mu_f;
    let excess: Vec<f64> = u.mu().iter().map(|m| m - mu_f).collect();
    let x = solve_spd(u.sigma(), &excess)?;
    PortfolioWeights::risky(x.iter().map(|xi| xi / denom).collect())
}

/// Weight held in the risk-free asset, w_f = 1 - (B - C mu_f) tau.
pub fn risk_free_weight(s: &ScalarSummary, mu_f: f64, tau: RiskTolerance) -> f64 {
    1.0 - (s.b - s.c * mu_f) * tau.tau()
}

/// The MV-optimal composite portfolio (w_f, (1 - w_f) w^tg). Its variance is
/// (1 - w_f)^2 sigma^2(w^tg) = tau^2 S^2.
pub fn composite_portfolio(
    s: &ScalarSummary,
    u: &AssetUniverse,
    mu_f: f64,
    tau: RiskTolerance,
) -> Result<PortfolioWeights> {
    let tangent = tangent_weights(s, u, mu_f)?;
    let w_f = risk_free_weight(s, mu_f, tau);
    let leg = tangent
        .weights()
        .iter()
        .map(|w| (1.0 - w_f) * w)
        .collect();
    PortfolioWeights::composite(leg, w_f, mu_f)
}

//! Closed-form mean-variance portfolio machinery and risk-diversification
//! curve analysis.
//!
//! Given a universe of N risky assets (expected returns `mu`, covariance
//! `sigma`, optionally a risk-free rate), the crate computes:
//!
//! - the scalar summary A..F of the universe and the Sharpe scalar S,
//! - MV-optimal portfolios along the efficient set, parametrized by the
//!   investor's risk tolerance tau = 1/gamma (risky-only and composite
//!   tangent + risk-free forms),
//! - the diversification measure EDM(w) = sum_i w_i sigma_i^2 - w' sigma w,
//! - EDM as a closed-form curve in tau and in portfolio variance, with
//!   derivatives, critical points, and the regime split between
//!   decreasing-concave and inverted-U behavior,
//! - brute-force oracles (grid argmax, random perturbations, finite
//!   differences) that verify the closed forms independently.
//!
//! # Example
//!
//! ```
//! use divcurve::linalg::Matrix;
//! use divcurve::market::AssetUniverse;
//! use divcurve::analysis::{classify_risky, RegimeLabel};
//!
//! let universe = AssetUniverse::new(
//!     vec!["a".into(), "b".into()],
//!     vec![0.12, 0.08],
//!     Matrix::from_rows(vec![vec![0.04, 0.01], vec![0.01, 0.09]]).unwrap(),
//!     None,
//! )
//! .unwrap()
//! .validated()
//! .unwrap();
//! let scalars = universe.scalars().unwrap();
//! let regime = classify_risky(&scalars).unwrap();
//! assert!(matches!(
//!     regime.label,
//!     RegimeLabel::DecreasingConcaveInTau | RegimeLabel::InvertedUInTau
//! ));
//! ```

pub mod analysis;
pub mod error;
pub mod linalg;
pub mod market;
pub mod portfolio;
pub mod verify;

pub use analysis::{
    classify_risky, classify_riskfree, edm_of_tau_risky, edm_of_tau_riskfree,
    edm_of_variance_risky, edm_of_variance_riskfree, sample_curve, tau_from_variance,
    variance_from_tau, CurveFamily, CurveSample, Plane, Regime, RegimeLabel, Setting,
};
pub use error::{Error, Result};
pub use linalg::{solve_spd, CholeskyFactor, Matrix};
pub use market::{
    AssetUniverse, ReturnsSample, ScalarSummary, SharpeScalar, ValidationReport,
};
pub use portfolio::{
    composite_portfolio, diversification_gain, edm, edm_decomposition, mv_utility,
    optimal_weights, portfolio_variance, risk_free_weight, tangent_weights, PortfolioKind,
    PortfolioWeights, RiskTolerance,
};
pub use verify::{
    finite_difference_check, grid_argmax_edm_tau, perturbation_optimality_check,
    perturbation_optimality_check_with, random_universe, FdReport, OptimalityReport,
    OracleConfig,
};

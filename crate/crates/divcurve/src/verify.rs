//! Independent brute-force oracles: grid search for curve maxima, random
//! zero-sum perturbations against the closed-form optimum, and central
//! finite differences against the analytic derivatives.
//!
//! The oracles deliberately avoid the formulas they check: the grid argmax
//! never looks at a derivative, and the perturbation check only ever calls
//! the utility function.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{CurveFamily, Plane};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::market::AssetUniverse;
use crate::portfolio::{mv_utility, optimal_weights, PortfolioWeights, RiskTolerance};

/// A perturbed portfolio may beat the closed-form optimum by at most this
/// much utility before the optimality check fails.
pub const OPTIMALITY_SLACK: f64 = 1e-12;

/// Absolute tolerance of the finite-difference check on tau-plane curves.
pub const FD_TAU_ABS_TOL: f64 = 1e-5;

/// Absolute tolerance of the finite-difference check on variance-plane
/// curves (looser: the square root amplifies rounding near the boundary).
pub const FD_VARIANCE_ABS_TOL: f64 = 1e-4;

/// Knobs for the oracle suite. A fixed seed makes every oracle reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Grid resolution for argmax searches (>= 101).
    pub grid_points: usize,
    /// Number of random zero-sum directions per optimality check (>= 100).
    pub perturbation_count: usize,
    /// Base relative step of the central finite difference.
    pub fd_step: f64,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            grid_points: 1001,
            perturbation_count: 100,
            fd_step: 1e-5,
            seed: 42,
        }
    }
}

impl OracleConfig {
    fn validate(&self) -> Result<()> {
        if self.grid_points < 101 {
            return Err(Error::InvalidInput(format!(
                "oracle grid needs at least 101 points, got {}",
                self.grid_points
            )));
        }
        if self.perturbation_count < 100 {
            return Err(Error::InvalidInput(format!(
                "oracle needs at least 100 perturbations, got {}",
                self.perturbation_count
            )));
        }
        if self.fd_step <= 0.0 || !self.fd_step.is_finite() {
            return Err(Error::InvalidInput(format!(
                "finite-difference step must be positive, got {}",
                self.fd_step
            )));
        }
        Ok(())
    }
}

/// Abscissa of the maximal sampled EDM over a uniform grid on `domain`.
/// Ties keep the smallest abscissa, so a decreasing curve returns `lo`.
pub fn grid_argmax_edm_tau(
    family: CurveFamily<'_>,
    domain: (f64, f64),
    cfg: &OracleConfig,
) -> Result<f64> {
    cfg.validate()?;
    let (lo, hi) = domain;
    if !lo.is_finite() || !hi.is_finite() || lo >= hi || lo < 0.0 {
        return Err(Error::InvalidInput(format!(
            "argmax domain must satisfy 0 <= lo < hi, got [{lo}, {hi}]"
        )));
    }
    let step = (hi - lo) / (cfg.grid_points - 1) as f64;
    let mut best_x = lo;
    let mut best = f64::NEG_INFINITY;
    for i in 0..cfg.grid_points {
        let x = if i + 1 == cfg.grid_points {
            hi
        } else {
            lo + step * i as f64
        };
        let y = family.edm_at(x)?;
        if y > best {
            best = y;
            best_x = x;
        }
    }
    Ok(best_x)
}

/// Outcome of a perturbation optimality check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalityReport {
    pub pass: bool,
    /// Largest utility gain any perturbed portfolio achieved over the
    /// candidate (negative when every perturbation is worse).
    pub best_improvement: f64,
    /// Number of direction vectors tried (each at two scales).
    pub directions: usize,
}

/// Checks the closed-form optimum at `tau` against random perturbations.
pub fn perturbation_optimality_check(
    u: &AssetUniverse,
    tau: RiskTolerance,
    cfg: &OracleConfig,
) -> Result<OptimalityReport> {
    let s = u.scalars()?;
    let w = optimal_weights(&s, u, tau)?;
    perturbation_optimality_check_with(u, tau, &w, cfg)
}

/// Checks an arbitrary candidate portfolio for MV optimality at `tau`:
/// perturbs it along random zero-sum directions at scales 1e-3 and 1e-1 and
/// passes iff no perturbation improves utility by more than
/// `OPTIMALITY_SLACK`.
pub fn perturbation_optimality_check_with(
    u: &AssetUniverse,
    tau: RiskTolerance,
    candidate: &PortfolioWeights,
    cfg: &OracleConfig,
) -> Result<OptimalityReport> {
    cfg.validate()?;
    let gamma = tau.gamma().ok_or(Error::NonPositiveGamma {
        gamma: f64::INFINITY,
    })?;
    let base = mv_utility(u, candidate, gamma)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = u.dim();
    let mut best_improvement = f64::NEG_INFINITY;
    for _ in 0..cfg.perturbation_count {
        let v = random_zero_sum_direction(n, &mut rng);
        for scale in [1e-3, 1e-1] {
            let perturbed: Vec<f64> = candidate
                .weights()
                .iter()
                .zip(&v)
                .map(|(w, d)| w + scale * d)
                .collect();
            let trial = PortfolioWeights::risky(perturbed)?;
            let utility = mv_utility(u, &trial, gamma)?;
            best_improvement = best_improvement.max(utility - base);
        }
    }
    Ok(OptimalityReport {
        pass: best_improvement <= OPTIMALITY_SLACK,
        best_improvement,
        directions: cfg.perturbation_count,
    })
}

fn random_zero_sum_direction(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let mean = v.iter().sum::<f64>() / n as f64;
        for x in v.iter_mut() {
            *x -= mean;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            for x in v.iter_mut() {
                *x /= norm;
            }
            return v;
        }
    }
}

/// Outcome of a finite-difference derivative check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdReport {
    pub analytic: f64,
    pub numeric: f64,
    pub abs_diff: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compares the analytic derivative of a curve at `point` against a central
/// finite difference with step fd_step * max(1, |point|). The point must sit
/// strictly inside the curve domain with room for the stencil.
pub fn finite_difference_check(
    family: CurveFamily<'_>,
    point: f64,
    cfg: &OracleConfig,
) -> Result<FdReport> {
    cfg.validate()?;
    let h = cfg.fd_step * point.abs().max(1.0);
    let minimum = family.domain_min();
    if point - h < minimum {
        return Err(Error::BoundarySingularity { point, minimum });
    }
    let analytic = family.derivative_at(point)?;
    let numeric = (family.edm_at(point + h)? - family.edm_at(point - h)?) / (2.0 * h);
    let abs_diff = (analytic - numeric).abs();
    let tolerance = match family.plane() {
        Plane::TauPlane => FD_TAU_ABS_TOL,
        Plane::VariancePlane => FD_VARIANCE_ABS_TOL,
    };
    Ok(FdReport {
        analytic,
        numeric,
        abs_diff,
        tolerance,
        pass: abs_diff <= tolerance,
    })
}

/// A random valid universe: sigma = M'M + 0.1 I with M entries uniform in
/// [-1, 1], mu uniform in [0, 0.2], rejection-sampled until D is comfortably
/// positive so every closed form downstream is well defined.
pub fn random_universe(n: usize, rng: &mut impl Rng) -> AssetUniverse {
    assert!(n >= 2, "universe needs at least 2 assets");
    loop {
        let mut sigma = Matrix::identity(n).scaled(0.1);
        let m: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        for i in 0..n {
            for j in 0..n {
                let mut dot = 0.0;
                for k in 0..n {
                    dot += m[k * n + i] * m[k * n + j];
                }
                sigma.set(i, j, sigma.get(i, j) + dot);
            }
        }
        let mu: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..=0.2)).collect();
        let labels = (0..n).map(|i| format!("a{i}")).collect();
        let universe = AssetUniverse::new(labels, mu, sigma, None)
            .expect("construction shapes agree")
            .validated()
            .expect("M'M + 0.1I is SPD");
        let s = universe.scalars().expect("SPD universe has scalars");
        if s.ensure_d_positive().is_ok() {
            return universe;
        }
    }
}

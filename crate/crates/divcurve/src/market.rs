//! Asset-universe data model: validation, the scalar summary A..F that every
//! closed form downstream consumes, and ingestion from JSON files or
//! historical returns.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, solve_spd, CholeskyFactor, Matrix};

/// Relative symmetry tolerance: max |S_ij - S_ji| / max|S| must not exceed
/// this. Tolerates round-trip serialization noise; anything worse is treated
/// as a data error rather than silently averaged away.
pub const SYMMETRY_REL_TOL: f64 = 1e-12;

/// D is declared effectively zero (mu proportional to ones, degenerate
/// efficient set) when D <= this multiple of A*C.
pub const DEGENERATE_D_REL_TOL: f64 = 1e-10;

// ---------------------------------------------------------------------------
// AssetUniverse
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct RawUniverse {
    labels: Vec<String>,
    mu: Vec<f64>,
    sigma: Matrix,
    #[serde(default)]
    risk_free: Option<f64>,
}

/// A market of N risky assets: expected returns, covariance, and an optional
/// risk-free rate. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawUniverse")]
pub struct AssetUniverse {
    labels: Vec<String>,
    mu: Vec<f64>,
    sigma: Matrix,
    risk_free: Option<f64>,
}

impl TryFrom<RawUniverse> for AssetUniverse {
    type Error = Error;

    fn try_from(raw: RawUniverse) -> Result<Self> {
        AssetUniverse::new(raw.labels, raw.mu, raw.sigma, raw.risk_free)
    }
}

impl AssetUniverse {
    /// Builds a universe, checking only shape agreement. Run [`validate`]
    /// or use [`validated`] to enforce the numerical invariants.
    ///
    /// [`validate`]: AssetUniverse::validate
    /// [`validated`]: AssetUniverse::validated
    pub fn new(
        labels: Vec<String>,
        mu: Vec<f64>,
        sigma: Matrix,
        risk_free: Option<f64>,
    ) -> Result<Self> {
        if mu.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                actual: mu.len(),
            });
        }
        if sigma.dim() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                actual: sigma.dim(),
            });
        }
        Ok(AssetUniverse {
            labels,
            mu,
            sigma,
            risk_free,
        })
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &Matrix {
        &self.sigma
    }

    pub fn risk_free(&self) -> Option<f64> {
        self.risk_free
    }

    /// Per-asset variances: the diagonal of sigma.
    pub fn asset_variances(&self) -> Vec<f64> {
        self.sigma.diagonal()
    }

    /// Checks every universe invariant and reports all violations.
    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        let n = self.dim();
        if n < 2 {
            issues.push(format!("universe must hold at least 2 assets, got {n}"));
        }
        if !self.mu.iter().all(|x| x.is_finite()) {
            issues.push("mu contains a non-finite entry".to_string());
        }
        let sigma_finite = self.sigma.is_finite();
        if !sigma_finite {
            issues.push("sigma contains a non-finite entry".to_string());
        }
        if let Some(rf) = self.risk_free {
            if !rf.is_finite() {
                issues.push("risk_free is not finite".to_string());
            }
        }
        if sigma_finite {
            let gap = self.sigma.symmetry_gap();
            let scale = self.sigma.max_abs();
            if gap > SYMMETRY_REL_TOL * scale {
                issues.push(format!(
                    "sigma is asymmetric: max |S_ij - S_ji| = {gap:e} exceeds {SYMMETRY_REL_TOL:e} * max|S|"
                ));
            } else {
                let mut sym = self.sigma.clone();
                sym.symmetrize();
                if let Err(Error::NotPositiveDefinite { pivot, value }) =
                    CholeskyFactor::factor(&sym)
                {
                    issues.push(format!(
                        "sigma is not positive definite (pivot {pivot} is {value:e})"
                    ));
                }
            }
        }
        ValidationReport { issues }
    }

    /// Validates and, on success, symmetrizes sigma to (S + S^T)/2 so that
    /// downstream algebra sees an exactly symmetric matrix.
    pub fn validated(mut self) -> Result<Self> {
        let report = self.validate();
        if !report.passed() {
            return Err(Error::InvalidUniverse(report));
        }
        self.sigma.symmetrize();
        Ok(self)
    }

    /// Loads and validates a universe from a JSON file:
    /// `{"labels": [...], "mu": [...], "sigma": [[...], ...], "risk_free": number|null}`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path.as_ref())?;
        let u: AssetUniverse = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidInput(format!("universe JSON: {e}")))?;
        u.validated()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidInput(format!("universe serialization: {e}")))?;
        text.push('\n');
        fs::write(path.as_ref(), text)?;
        Ok(())
    }

    /// Computes the scalar summary of this universe.
    pub fn scalars(&self) -> Result<ScalarSummary> {
        ScalarSummary::compute(self)
    }
}

/// Outcome of universe validation; empty `issues` means every invariant holds.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            write!(f, "all invariants satisfied")
        } else {
            write!(f, "{}", self.issues.join("; "))
        }
    }
}

// ---------------------------------------------------------------------------
// ScalarSummary
// ---------------------------------------------------------------------------

/// The six quadratic-form scalars of a universe, with sigma2 the vector of
/// asset variances:
///
/// - `a` = mu' S^-1 mu
/// - `b` = mu' S^-1 1
/// - `c` = 1' S^-1 1
/// - `d` = a*c - b^2
/// - `e` = mu' S^-1 sigma2
/// - `f` = 1' S^-1 sigma2
///
/// Everything downstream (weights, curves, regimes) is a function of these.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarSummary {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl ScalarSummary {
    /// Computes the summary via three SPD solves (never an explicit inverse).
    pub fn compute(u: &AssetUniverse) -> Result<Self> {
        let n = u.dim();
        let ones = vec![1.0; n];
        let sigma2 = u.asset_variances();
        let x_mu = solve_spd(u.sigma(), u.mu())?;
        let x_ones = solve_spd(u.sigma(), &ones)?;
        let x_var = solve_spd(u.sigma(), &sigma2)?;
        let a = dot(u.mu(), &x_mu);
        let b = dot(u.mu(), &x_ones);
        let c = dot(&ones, &x_ones);
        let e = dot(u.mu(), &x_var);
        let f = dot(&ones, &x_var);
        Ok(ScalarSummary {
            a,
            b,
            c,
            d: a * c - b * b,
            e,
            f,
        })
    }

    /// E*C - F*B, the sign quantity of the risky-only regime split.
    pub fn ec_minus_fb(&self) -> f64 {
        self.e * self.c - self.f * self.b
    }

    /// Return of the global minimum-variance portfolio, B/C.
    pub fn gmv_return(&self) -> f64 {
        self.b / self.c
    }

    /// Variance of the global minimum-variance portfolio, 1/C.
    pub fn gmv_variance(&self) -> f64 {
        1.0 / self.c
    }

    /// Threshold below which D is treated as zero.
    pub fn d_threshold(&self) -> f64 {
        DEGENERATE_D_REL_TOL * self.a * self.c
    }

    /// Errors with `DegenerateD` when the efficient set collapses
    /// (mu effectively proportional to ones).
    pub fn ensure_d_positive(&self) -> Result<()> {
        if self.d <= self.d_threshold() {
            return Err(Error::DegenerateD {
                d: self.d,
                threshold: self.d_threshold(),
            });
        }
        Ok(())
    }

    /// Binds a risk-free rate, yielding the Sharpe scalar S.
    pub fn sharpe(&self, mu_f: f64) -> Result<SharpeScalar> {
        let radicand = self.c * mu_f * mu_f - 2.0 * self.b * mu_f + self.a;
        if radicand <= 0.0 || radicand.is_nan() {
            return Err(Error::DegenerateSharpe { radicand, mu_f });
        }
        Ok(SharpeScalar {
            s: radicand.sqrt(),
            mu_f,
        })
    }
}

/// S = sqrt(C*mu_f^2 - 2*B*mu_f + A), bound to the mu_f it was built from.
/// Strictly positive whenever D > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpeScalar {
    s: f64,
    mu_f: f64,
}

impl SharpeScalar {
    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn s_squared(&self) -> f64 {
        self.s * self.s
    }

    pub fn mu_f(&self) -> f64 {
        self.mu_f
    }
}

// ---------------------------------------------------------------------------
// ReturnsSample
// ---------------------------------------------------------------------------

/// Historical per-period returns: T observation rows over N labeled assets.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnsSample {
    labels: Vec<String>,
    observations: Vec<Vec<f64>>,
}

impl ReturnsSample {
    pub fn new(labels: Vec<String>, observations: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidInput("returns sample has no assets".into()));
        }
        if observations.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "returns sample needs at least 2 observation rows, got {}",
                observations.len()
            )));
        }
        for (t, row) in observations.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput(format!(
                    "observation row {t} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if !row.iter().all(|x| x.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "observation row {t} contains a non-finite entry"
                )));
            }
        }
        Ok(ReturnsSample {
            labels,
            observations,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_assets(&self) -> usize {
        self.labels.len()
    }

    pub fn n_observations(&self) -> usize {
        self.observations.len()
    }

    /// Parses a CSV with a header row of asset labels and one row of decimal
    /// returns per period.
    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let labels: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::InvalidInput(format!("returns CSV header: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut observations = Vec::new();
        for (t, record) in rdr.records().enumerate() {
            let record = record
                .map_err(|e| Error::InvalidInput(format!("returns CSV row {}: {e}", t + 1)))?;
            let mut row = Vec::with_capacity(labels.len());
            for (j, field) in record.iter().enumerate() {
                let value: f64 = field.parse().map_err(|_| {
                    Error::InvalidInput(format!(
                        "returns CSV row {}, column {} ({}): not a number: {field:?}",
                        t + 1,
                        j + 1,
                        labels.get(j).map(String::as_str).unwrap_or("?")
                    ))
                })?;
                row.push(value);
            }
            observations.push(row);
        }
        ReturnsSample::new(labels, observations)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = fs::File::open(path.as_ref())?;
        Self::from_csv_reader(file)
    }

    /// Estimates a universe: column means for mu, unbiased sample covariance
    /// (divisor T-1) for sigma. Requires T >= N+1 for an SPD covariance.
    pub fn estimate_universe(&self, risk_free: Option<f64>) -> Result<AssetUniverse> {
        let t = self.n_observations();
        let n = self.n_assets();
        if t <= n {
            return Err(Error::InsufficientData {
                observations: t,
                assets: n,
            });
        }
        let mut mu = vec![0.0; n];
        for row in &self.observations {
            for (m, x) in mu.iter_mut().zip(row) {
                *m += x;
            }
        }
        for m in mu.iter_mut() {
            *m /= t as f64;
        }
        let mut sigma = Matrix::identity(n).scaled(0.0);
        for row in &self.observations {
            for i in 0..n {
                let di = row[i] - mu[i];
                for j in i..n {
                    let dj = row[j] - mu[j];
                    sigma.set(i, j, sigma.get(i, j) + di * dj);
                }
            }
        }
        let divisor = (t - 1) as f64;
        for i in 0..n {
            for j in i..n {
                let v = sigma.get(i, j) / divisor;
                sigma.set(i, j, v);
                sigma.set(j, i, v);
            }
        }
        if CholeskyFactor::factor(&sigma).is_err() {
            return Err(Error::DegenerateSample);
        }
        AssetUniverse::new(self.labels.clone(), mu, sigma, risk_free)?.validated()
    }
}

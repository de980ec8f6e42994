//! Risk-diversification curves: EDM along the efficient set as a function of
//! risk tolerance or of portfolio variance, their derivatives, and the
//! regime classification (decreasing-concave vs inverted-U).
//!
//! Risky-only curves are driven by the sign of EC - FB; with a risk-free
//! asset the sign quantity is E - F*mu_f. All curves here are closed forms
//! in the scalar summary; none touch the covariance matrix again.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{ScalarSummary, SharpeScalar};
use crate::portfolio::ensure_tangent_defined;

/// Regime sign comparisons treat |q| at or below this multiple of the term
/// scale as the <= 0 branch (matching the weak-inequality case placement).
pub const SIGN_DEAD_ZONE_REL: f64 = 1e-12;

/// Relative slack below the domain minimum accepted by variance-plane
/// operations before `VarianceBelowMinimum` is raised; absorbs rounding in
/// externally computed 1/C values.
pub const VARIANCE_MIN_REL_SLACK: f64 = 1e-12;

/// Whether an analysis is over risky assets only or includes the risk-free
/// asset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Setting {
    RiskyOnly,
    WithRiskFree,
}

/// Shape of EDM as a function of risk tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeLabel {
    DecreasingConcaveInTau,
    InvertedUInTau,
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegimeLabel::DecreasingConcaveInTau => write!(f, "decreasing concave in tau"),
            RegimeLabel::InvertedUInTau => write!(f, "inverted U in tau"),
        }
    }
}

/// Classification of a universe's risk-diversification behavior. The
/// critical fields are present exactly when the label is `InvertedUInTau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub setting: Setting,
    /// EC - FB for RiskyOnly, E - F*mu_f for WithRiskFree.
    pub sign_quantity: f64,
    pub label: RegimeLabel,
    /// Risk tolerance of maximal diversification.
    pub tau_star: Option<f64>,
    /// Portfolio variance at tau_star.
    pub variance_star: Option<f64>,
    /// EDM at tau_star.
    pub edm_max: Option<f64>,
}

impl Regime {
    pub fn is_inverted_u(&self) -> bool {
        self.label == RegimeLabel::InvertedUInTau
    }

    /// Default tau window for sampling: [0, 2*tau_star] when the curve has
    /// an interior maximum, otherwise [0, 50].
    pub fn default_tau_domain(&self) -> (f64, f64) {
        match self.tau_star {
            Some(t) => (0.0, 2.0 * t),
            None => (0.0, 50.0),
        }
    }
}

/// Abscissa interpretation of a sampled curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Plane {
    TauPlane,
    VariancePlane,
}

/// One point of a sampled risk-diversification curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub abscissa: f64,
    pub edm: f64,
    pub kind: Plane,
}

// ---------------------------------------------------------------------------
// Tau plane
// ---------------------------------------------------------------------------

/// EDM of the optimal risky portfolio at risk tolerance tau:
/// -(D/C) tau^2 + ((EC-FB)/C) tau + (F-1)/C.
pub fn edm_of_tau_risky(s: &ScalarSummary, tau: f64) -> f64 {
    -(s.d / s.c) * tau * tau + (s.ec_minus_fb() / s.c) * tau + (s.f - 1.0) / s.c
}

/// d EDM / d tau in the risky-only setting: -2(D/C) tau + (EC-FB)/C.
pub fn d_edm_d_tau_risky(s: &ScalarSummary, tau: f64) -> f64 {
    -2.0 * (s.d / s.c) * tau + s.ec_minus_fb() / s.c
}

/// Second tau derivative, the constant -2D/C (< 0 when D > 0).
pub fn d2_edm_d_tau2_risky(s: &ScalarSummary) -> f64 {
    -2.0 * s.d / s.c
}

/// EDM of the optimal composite portfolio at risk tolerance tau:
/// tau (E - F mu_f) - tau^2 S^2.
pub fn edm_of_tau_riskfree(s: &ScalarSummary, sh: &SharpeScalar, tau: f64) -> Result<f64> {
    ensure_tangent_defined(s, sh.mu_f())?;
    let q = s.e - s.f * sh.mu_f();
    // + 0.0 folds IEEE -0.0 (tau = 0, q < 0) back to +0.0
    Ok(tau * q - tau * tau * sh.s_squared() + 0.0)
}

/// d EDM / d tau in the risk-free setting: (E - F mu_f) - 2 tau S^2.
pub fn d_edm_d_tau_riskfree(s: &ScalarSummary, sh: &SharpeScalar, tau: f64) -> Result<f64> {
    ensure_tangent_defined(s, sh.mu_f())?;
    Ok(s.e - s.f * sh.mu_f() - 2.0 * tau * sh.s_squared())
}

/// Second tau derivative in the risk-free setting, the constant -2S^2.
pub fn d2_edm_d_tau2_riskfree(sh: &SharpeScalar) -> f64 {
    -2.0 * sh.s_squared()
}

// ---------------------------------------------------------------------------
// Regime classification
// ---------------------------------------------------------------------------

fn build_regime(setting: Setting, q: f64, scale: f64, vertex: Option<(f64, f64, f64)>) -> Regime {
    match vertex {
        Some((tau_star, variance_star, edm_max)) if q > SIGN_DEAD_ZONE_REL * scale => Regime {
            setting,
            sign_quantity: q,
            label: RegimeLabel::InvertedUInTau,
            tau_star: Some(tau_star),
            variance_star: Some(variance_star),
            edm_max: Some(edm_max),
        },
        _ => Regime {
            setting,
            sign_quantity: q,
            label: RegimeLabel::DecreasingConcaveInTau,
            tau_star: None,
            variance_star: None,
            edm_max: None,
        },
    }
}

/// Classifies the risky-only curve by the sign of EC - FB. In the inverted-U
/// case the maximum sits at tau* = (EC-FB)/(2D) with variance
/// 1/C + (EC-FB)^2/(4DC).
pub fn classify_risky(s: &ScalarSummary) -> Result<Regime> {
    s.ensure_d_positive()?;
    let q = s.ec_minus_fb();
    let scale = (s.e * s.c).abs().max((s.f * s.b).abs());
    let tau_star = q / (2.0 * s.d);
    let variance_star = 1.0 / s.c + q * q / (4.0 * s.d * s.c);
    let edm_max = edm_of_tau_risky(s, tau_star);
    Ok(build_regime(
        Setting::RiskyOnly,
        q,
        scale,
        Some((tau_star, variance_star, edm_max)),
    ))
}

/// Classifies the risk-free-setting curve by the sign of E - F*mu_f. In the
/// inverted-U case the maximum sits at tau* = (E - F mu_f)/(2S^2), where the
/// portfolio variance and the EDM both equal (E - F mu_f)^2/(4S^2).
pub fn classify_riskfree(s: &ScalarSummary, sh: &SharpeScalar) -> Regime {
    let q = s.e - s.f * sh.mu_f();
    let scale = s.e.abs().max((s.f * sh.mu_f()).abs());
    let s2 = sh.s_squared();
    let tau_star = q / (2.0 * s2);
    let peak = q * q / (4.0 * s2);
    build_regime(
        Setting::WithRiskFree,
        q,
        scale,
        Some((tau_star, peak, peak)),
    )
}

// ---------------------------------------------------------------------------
// Variance plane
// ---------------------------------------------------------------------------

/// Variance of the optimal risky portfolio at risk tolerance tau:
/// (D/C) tau^2 + 1/C.
pub fn variance_from_tau(s: &ScalarSummary, tau: f64) -> f64 {
    (s.d / s.c) * tau * tau + 1.0 / s.c
}

fn ensure_variance_at_least(v: f64, minimum: f64) -> Result<()> {
    if v < minimum * (1.0 - VARIANCE_MIN_REL_SLACK) - f64::MIN_POSITIVE {
        return Err(Error::VarianceBelowMinimum {
            variance: v,
            minimum,
        });
    }
    Ok(())
}

/// Inverse of `variance_from_tau` on tau >= 0: sqrt((Cv - 1)/D).
pub fn tau_from_variance(s: &ScalarSummary, v: f64) -> Result<f64> {
    s.ensure_d_positive()?;
    ensure_variance_at_least(v, 1.0 / s.c)?;
    // rounding can push (Cv - 1) a hair negative exactly at v = 1/C
    Ok(((s.c * v - 1.0) / s.d).max(0.0).sqrt())
}

/// EDM of the optimal risky portfolio as a function of its variance
/// (v >= 1/C): ((EC-FB)/C) sqrt((Cv-1)/D) - v + F/C.
pub fn edm_of_variance_risky(s: &ScalarSummary, v: f64) -> Result<f64> {
    let tau = tau_from_variance(s, v)?;
    Ok((s.ec_minus_fb() / s.c) * tau - v + s.f / s.c)
}

/// EDM of the optimal composite portfolio as a function of its variance
/// (v >= 0): -v + ((E - F mu_f)/S) sqrt(v).
pub fn edm_of_variance_riskfree(s: &ScalarSummary, sh: &SharpeScalar, v: f64) -> Result<f64> {
    ensure_tangent_defined(s, sh.mu_f())?;
    ensure_variance_at_least(v, 0.0)?;
    let q = s.e - s.f * sh.mu_f();
    // + 0.0 folds IEEE -0.0 (v = 0, q < 0) back to +0.0
    Ok(-v.max(0.0) + (q / sh.s()) * v.max(0.0).sqrt() + 0.0)
}

fn ensure_interior(v: f64, minimum: f64) -> Result<()> {
    if v <= minimum {
        return Err(Error::BoundarySingularity { point: v, minimum });
    }
    Ok(())
}

/// d EDM / dv in the risky setting: (EC-FB) / (2 sqrt(D (Cv - 1))) - 1.
/// Undefined at the boundary v = 1/C where the slope is infinite.
pub fn d_edm_d_variance_risky(s: &ScalarSummary, v: f64) -> Result<f64> {
    s.ensure_d_positive()?;
    ensure_interior(v, 1.0 / s.c)?;
    Ok(s.ec_minus_fb() / (2.0 * (s.d * (s.c * v - 1.0)).sqrt()) - 1.0)
}

/// Second variance derivative in the risky setting:
/// -(EC-FB) C / (4 sqrt(D) (Cv-1)^(3/2)); its sign is opposite EC - FB.
pub fn d2_edm_d_variance2_risky(s: &ScalarSummary, v: f64) -> Result<f64> {
    s.ensure_d_positive()?;
    ensure_interior(v, 1.0 / s.c)?;
    let cv1 = s.c * v - 1.0;
    Ok(-s.ec_minus_fb() * s.c / (4.0 * s.d.sqrt() * cv1.powf(1.5)))
}

/// d EDM / dv in the risk-free setting: -1 + (E - F mu_f)/(2 S sqrt(v)).
/// Undefined at v = 0.
pub fn d_edm_d_variance_riskfree(s: &ScalarSummary, sh: &SharpeScalar, v: f64) -> Result<f64> {
    ensure_tangent_defined(s, sh.mu_f())?;
    ensure_interior(v, 0.0)?;
    let q = s.e - s.f * sh.mu_f();
    Ok(-1.0 + q / (2.0 * sh.s() * v.sqrt()))
}

/// Second variance derivative in the risk-free setting:
/// -(E - F mu_f)/(4 S v^(3/2)); its sign is opposite E - F mu_f.
pub fn d2_edm_d_variance2_riskfree(
    s: &ScalarSummary,
    sh: &SharpeScalar,
    v: f64,
) -> Result<f64> {
    ensure_tangent_defined(s, sh.mu_f())?;
    ensure_interior(v, 0.0)?;
    let q = s.e - s.f * sh.mu_f();
    Ok(-q / (4.0 * sh.s() * v.powf(1.5)))
}

// ---------------------------------------------------------------------------
// Curve families and sampling
// ---------------------------------------------------------------------------

/// One of the four closed-form curves, bundling the scalars it needs.
#[derive(Clone, Copy)]
pub enum CurveFamily<'a> {
    TauRisky(&'a ScalarSummary),
    TauRiskFree(&'a ScalarSummary, &'a SharpeScalar),
    VarianceRisky(&'a ScalarSummary),
    VarianceRiskFree(&'a ScalarSummary, &'a SharpeScalar),
}

impl CurveFamily<'_> {
    pub fn plane(&self) -> Plane {
        match self {
            CurveFamily::TauRisky(_) | CurveFamily::TauRiskFree(..) => Plane::TauPlane,
            _ => Plane::VariancePlane,
        }
    }

    pub fn setting(&self) -> Setting {
        match self {
            CurveFamily::TauRisky(_) | CurveFamily::VarianceRisky(_) => Setting::RiskyOnly,
            _ => Setting::WithRiskFree,
        }
    }

    /// Smallest admissible abscissa (0 everywhere except the risky variance
    /// plane, which starts at 1/C).
    pub fn domain_min(&self) -> f64 {
        match self {
            CurveFamily::VarianceRisky(s) => 1.0 / s.c,
            _ => 0.0,
        }
    }

    pub fn edm_at(&self, x: f64) -> Result<f64> {
        match self {
            CurveFamily::TauRisky(s) => {
                ensure_nonnegative_tau(x)?;
                Ok(edm_of_tau_risky(s, x))
            }
            CurveFamily::TauRiskFree(s, sh) => {
                ensure_nonnegative_tau(x)?;
                edm_of_tau_riskfree(s, sh, x)
            }
            CurveFamily::VarianceRisky(s) => edm_of_variance_risky(s, x),
            CurveFamily::VarianceRiskFree(s, sh) => edm_of_variance_riskfree(s, sh, x),
        }
    }

    /// Analytic first derivative of the curve at x.
    pub fn derivative_at(&self, x: f64) -> Result<f64> {
        match self {
            CurveFamily::TauRisky(s) => {
                ensure_nonnegative_tau(x)?;
                Ok(d_edm_d_tau_risky(s, x))
            }
            CurveFamily::TauRiskFree(s, sh) => {
                ensure_nonnegative_tau(x)?;
                d_edm_d_tau_riskfree(s, sh, x)
            }
            CurveFamily::VarianceRisky(s) => d_edm_d_variance_risky(s, x),
            CurveFamily::VarianceRiskFree(s, sh) => d_edm_d_variance_riskfree(s, sh, x),
        }
    }
}

fn ensure_nonnegative_tau(tau: f64) -> Result<()> {
    if !tau.is_finite() || tau < 0.0 {
        return Err(Error::InvalidInput(format!(
            "risk tolerance must be finite and >= 0, got {tau}"
        )));
    }
    Ok(())
}

/// Samples a curve on a uniform grid of `samples` points inclusive of both
/// endpoints, in ascending abscissa order.
pub fn sample_curve(
    family: CurveFamily<'_>,
    lo: f64,
    hi: f64,
    samples: usize,
) -> Result<Vec<CurveSample>> {
    if samples < 2 {
        return Err(Error::InvalidInput(format!(
            "curve sampling needs at least 2 points, got {samples}"
        )));
    }
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Error::InvalidInput(format!(
            "curve domain must satisfy lo < hi, got [{lo}, {hi}]"
        )));
    }
    let kind = family.plane();
    let step = (hi - lo) / (samples - 1) as f64;
    let mut out = Vec::with_capacity(samples);
    for i in 0..samples {
        let x = if i + 1 == samples {
            hi
        } else {
            lo + step * i as f64
        };
        out.push(CurveSample {
            abscissa: x,
            edm: family.edm_at(x)?,
            kind,
        });
    }
    Ok(out)
}

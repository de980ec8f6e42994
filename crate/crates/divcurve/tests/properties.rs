//! Seeded randomized suites pinning the cross-cutting identities: solver
//! residuals, scalar identities, budget/variance closed forms, optimality,
//! plane-consistency chains, regime monotonicity, and convexity.

use approx::{assert_abs_diff_eq, assert_relative_eq};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use divcurve::analysis::{
    classify_risky, classify_riskfree, d2_edm_d_variance2_risky, edm_of_tau_risky,
    edm_of_tau_riskfree, edm_of_variance_risky, edm_of_variance_riskfree, variance_from_tau,
    RegimeLabel,
};
use divcurve::linalg::{norm2, solve_spd, Matrix};
use divcurve::market::AssetUniverse;
use divcurve::portfolio::{
    composite_portfolio, edm, edm_decomposition, optimal_weights, portfolio_variance,
    risk_free_weight, tangent_weights, PortfolioWeights, RiskTolerance,
};
use divcurve::verify::{
    finite_difference_check, perturbation_optimality_check, random_universe, OracleConfig,
};

fn universes(count: usize, seed: u64) -> Vec<AssetUniverse> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|i| random_universe(2 + i % 7, &mut rng)).collect()
}

/// A risk-free rate that keeps the tangent portfolio defined for any
/// universe: B - C*mu_f = 1 exactly.
fn safe_mu_f(s: &divcurve::market::ScalarSummary) -> f64 {
    (s.b - 1.0) / s.c
}

#[test]
fn solver_residual_on_500_random_spd_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..500 {
        let n = 2 + i % 7;
        let m: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let mut trace = 0.0;
        let mut sigma = Matrix::identity(n).scaled(0.0);
        for r in 0..n {
            for c in 0..n {
                let mut dot = 0.0;
                for k in 0..n {
                    dot += m[k * n + r] * m[k * n + c];
                }
                sigma.set(r, c, dot);
                if r == c {
                    trace += dot;
                }
            }
        }
        for d in 0..n {
            sigma.set(d, d, sigma.get(d, d) + 1e-6 * trace);
        }
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let x = solve_spd(&sigma, &b).unwrap();
        let ax = sigma.matvec(&x);
        let residual: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        assert!(
            norm2(&residual) <= 1e-10 * norm2(&b),
            "matrix {i}: relative residual {} too large",
            norm2(&residual) / norm2(&b)
        );
    }
}

#[test]
fn scalar_identities_hold_on_random_universes() {
    for u in universes(200, 12) {
        let s = u.scalars().unwrap();
        assert!(s.c > 0.0);
        assert!(s.a >= 0.0);
        assert_relative_eq!(s.d, s.a * s.c - s.b * s.b, max_relative = 1e-12);
        assert!(s.d >= -1e-12 * s.a * s.c);
    }
}

#[test]
fn sharpe_radicand_is_positive_whenever_d_is() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for u in universes(50, 14) {
        let s = u.scalars().unwrap();
        s.ensure_d_positive().unwrap();
        for _ in 0..100 {
            let mu_f = rng.gen_range(-0.5..=0.5);
            assert!(s.sharpe(mu_f).is_ok(), "radicand closed at mu_f = {mu_f}");
        }
    }
}

#[test]
fn scalars_obey_scale_equivariance() {
    for u in universes(50, 15) {
        let s = u.scalars().unwrap();
        for k in [0.5, 2.0, 10.0] {
            let scaled = AssetUniverse::new(
                u.labels().to_vec(),
                u.mu().to_vec(),
                u.sigma().scaled(k),
                u.risk_free(),
            )
            .unwrap()
            .validated()
            .unwrap();
            let sk = scaled.scalars().unwrap();
            assert_relative_eq!(sk.a, s.a / k, max_relative = 1e-10);
            assert_relative_eq!(sk.b, s.b / k, max_relative = 1e-10);
            assert_relative_eq!(sk.c, s.c / k, max_relative = 1e-10);
            assert_relative_eq!(sk.e, s.e, max_relative = 1e-10);
            assert_relative_eq!(sk.f, s.f, max_relative = 1e-10);
        }
    }
}

#[test]
fn budget_identity_holds_for_all_tau() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for u in universes(200, 17) {
        let s = u.scalars().unwrap();
        for _ in 0..20 {
            let tau = RiskTolerance::new(rng.gen_range(0.0..=50.0)).unwrap();
            let w = optimal_weights(&s, &u, tau).unwrap();
            let total: f64 = w.weights().iter().sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
        }
    }
}

#[test]
fn closed_form_variance_matches_the_quadratic_form() {
    for u in universes(200, 18) {
        let s = u.scalars().unwrap();
        for tau in [0.0, 0.3, 1.0, 7.0, 30.0] {
            let w = optimal_weights(&s, &u, RiskTolerance::new(tau).unwrap()).unwrap();
            let direct = portfolio_variance(&u, &w).unwrap();
            let closed = variance_from_tau(&s, tau);
            assert_relative_eq!(direct, closed, max_relative = 1e-9);
        }
    }
}

#[test]
fn no_perturbation_beats_the_closed_form_optimum() {
    let cfg = OracleConfig::default();
    for (i, u) in universes(200, 19).iter().enumerate() {
        for tau in [0.1, 1.0, 10.0] {
            let report =
                perturbation_optimality_check(u, RiskTolerance::new(tau).unwrap(), &cfg).unwrap();
            assert!(
                report.pass,
                "universe {i}, tau {tau}: improvement {}",
                report.best_improvement
            );
        }
    }
}

#[test]
fn decomposition_always_sums_to_edm() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for u in universes(200, 21) {
        let n = u.dim();
        let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=2.0)).collect();
        let total: f64 = raw.iter().sum();
        if total.abs() < 0.1 {
            continue;
        }
        let w = PortfolioWeights::risky(raw.iter().map(|x| x / total).collect()).unwrap();
        let terms = edm_decomposition(&u, &w).unwrap();
        assert_abs_diff_eq!(
            terms.iter().sum::<f64>(),
            edm(&u, &w).unwrap(),
            epsilon = 1e-10
        );
    }
}

#[test]
fn composite_edm_matches_the_expanded_form() {
    for u in universes(200, 22) {
        let s = u.scalars().unwrap();
        let mu_f = safe_mu_f(&s);
        let tangent = tangent_weights(&s, &u, mu_f).unwrap();
        let sigma2 = u.asset_variances();
        let tangent_var = portfolio_variance(&u, &tangent).unwrap();
        for tau in [0.2, 1.0, 4.0] {
            let t = RiskTolerance::new(tau).unwrap();
            let w = composite_portfolio(&s, &u, mu_f, t).unwrap();
            let w_f = risk_free_weight(&s, mu_f, t);
            let risky_frac = 1.0 - w_f;
            let expanded = risky_frac
                * tangent
                    .weights()
                    .iter()
                    .zip(&sigma2)
                    .map(|(wi, v)| wi * v)
                    .sum::<f64>()
                - risky_frac * risky_frac * tangent_var;
            assert_relative_eq!(
                edm(&u, &w).unwrap(),
                expanded,
                max_relative = 1e-9,
                epsilon = 1e-12
            );
        }
    }
}

#[test]
fn edm_is_midpoint_concave_in_tau() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for u in universes(100, 24) {
        let s = u.scalars().unwrap();
        let sh = s.sharpe(safe_mu_f(&s)).unwrap();
        for _ in 0..5 {
            let t1 = rng.gen_range(0.0..=50.0);
            let t2 = rng.gen_range(0.0..=50.0);
            let lambda = rng.gen_range(0.001..=0.999);
            let mid = lambda * t1 + (1.0 - lambda) * t2;

            let chord =
                lambda * edm_of_tau_risky(&s, t1) + (1.0 - lambda) * edm_of_tau_risky(&s, t2);
            assert!(edm_of_tau_risky(&s, mid) >= chord - 1e-10);

            let chord_rf = lambda * edm_of_tau_riskfree(&s, &sh, t1).unwrap()
                + (1.0 - lambda) * edm_of_tau_riskfree(&s, &sh, t2).unwrap();
            assert!(edm_of_tau_riskfree(&s, &sh, mid).unwrap() >= chord_rf - 1e-10);
        }
    }
}

#[test]
fn regime_label_matches_grid_monotonicity() {
    for u in universes(200, 25) {
        let s = u.scalars().unwrap();
        let regime = classify_risky(&s).unwrap();
        let tau_star = regime.tau_star.unwrap_or(f64::INFINITY);
        let grid: Vec<f64> = (0..100).map(|i| 50.0 * i as f64 / 99.0).collect();
        for pair in grid.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let (fa, fb) = (edm_of_tau_risky(&s, a), edm_of_tau_risky(&s, b));
            match regime.label {
                RegimeLabel::DecreasingConcaveInTau => {
                    assert!(fa > fb, "expected strict decrease at [{a}, {b}]");
                }
                RegimeLabel::InvertedUInTau => {
                    if b <= tau_star - 1e-6 {
                        assert!(fa < fb, "expected strict increase at [{a}, {b}]");
                    } else if a >= tau_star + 1e-6 {
                        assert!(fa > fb, "expected strict decrease at [{a}, {b}]");
                    }
                }
            }
        }
    }
}

#[test]
fn riskfree_regime_label_matches_grid_monotonicity() {
    for u in universes(100, 26) {
        let s = u.scalars().unwrap();
        let sh = s.sharpe(safe_mu_f(&s)).unwrap();
        let regime = classify_riskfree(&s, &sh);
        let tau_star = regime.tau_star.unwrap_or(f64::INFINITY);
        let grid: Vec<f64> = (0..100).map(|i| 50.0 * i as f64 / 99.0).collect();
        for pair in grid.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let fa = edm_of_tau_riskfree(&s, &sh, a).unwrap();
            let fb = edm_of_tau_riskfree(&s, &sh, b).unwrap();
            match regime.label {
                RegimeLabel::DecreasingConcaveInTau => {
                    // the rf curve is flat at tau = 0 when E - F mu_f = 0
                    assert!(fa >= fb, "expected decrease at [{a}, {b}]");
                }
                RegimeLabel::InvertedUInTau => {
                    if b <= tau_star - 1e-6 {
                        assert!(fa < fb, "expected strict increase at [{a}, {b}]");
                    } else if a >= tau_star + 1e-6 {
                        assert!(fa > fb, "expected strict decrease at [{a}, {b}]");
                    }
                }
            }
        }
    }
}

#[test]
fn vertex_identities_hold_in_both_settings() {
    for u in universes(200, 27) {
        let s = u.scalars().unwrap();
        let regime = classify_risky(&s).unwrap();
        if let Some(tau_star) = regime.tau_star {
            let q = s.ec_minus_fb();
            assert_relative_eq!(
                edm_of_tau_risky(&s, tau_star),
                q * q / (4.0 * s.d * s.c) + (s.f - 1.0) / s.c,
                max_relative = 1e-10
            );
            assert_relative_eq!(
                variance_from_tau(&s, tau_star),
                regime.variance_star.unwrap(),
                max_relative = 1e-10
            );
        }
        let sh = s.sharpe(safe_mu_f(&s)).unwrap();
        let rf = classify_riskfree(&s, &sh);
        if let Some(tau_star) = rf.tau_star {
            let q = s.e - s.f * sh.mu_f();
            assert_relative_eq!(
                edm_of_tau_riskfree(&s, &sh, tau_star).unwrap(),
                q * q / (4.0 * sh.s_squared()),
                max_relative = 1e-10
            );
        }
    }
}

#[test]
fn tau_and_variance_planes_describe_the_same_curve() {
    for u in universes(200, 28) {
        let s = u.scalars().unwrap();
        let sh = s.sharpe(safe_mu_f(&s)).unwrap();
        for i in 0..=20 {
            let tau = 100.0 * i as f64 / 20.0;
            let v = variance_from_tau(&s, tau);
            assert_relative_eq!(
                edm_of_variance_risky(&s, v).unwrap(),
                edm_of_tau_risky(&s, tau),
                max_relative = 1e-9,
                epsilon = 1e-9
            );
            let v_rf = tau * tau * sh.s_squared();
            assert_relative_eq!(
                edm_of_variance_riskfree(&s, &sh, v_rf).unwrap(),
                edm_of_tau_riskfree(&s, &sh, tau).unwrap(),
                max_relative = 1e-9,
                epsilon = 1e-9
            );
        }
    }
}

#[test]
fn curve_formulas_match_portfolio_level_edm() {
    for u in universes(200, 29) {
        let s = u.scalars().unwrap();
        let mu_f = safe_mu_f(&s);
        let sh = s.sharpe(mu_f).unwrap();
        for tau in [0.0, 0.5, 2.0, 10.0] {
            let t = RiskTolerance::new(tau).unwrap();
            let w = optimal_weights(&s, &u, t).unwrap();
            assert_relative_eq!(
                edm_of_tau_risky(&s, tau),
                edm(&u, &w).unwrap(),
                max_relative = 1e-9,
                epsilon = 1e-9
            );
            let cw = composite_portfolio(&s, &u, mu_f, t).unwrap();
            assert_relative_eq!(
                edm_of_tau_riskfree(&s, &sh, tau).unwrap(),
                edm(&u, &cw).unwrap(),
                max_relative = 1e-9,
                epsilon = 1e-9
            );
        }
    }
}

#[test]
fn decreasing_regime_is_convex_in_variance() {
    let mut decreasing_seen = 0;
    for u in universes(200, 30) {
        let s = u.scalars().unwrap();
        let regime = classify_risky(&s).unwrap();
        if regime.label != RegimeLabel::DecreasingConcaveInTau {
            continue;
        }
        decreasing_seen += 1;
        for j in 1..=10 {
            let v = (1.0 + 0.9 * j as f64) / s.c;
            assert!(
                d2_edm_d_variance2_risky(&s, v).unwrap() >= 0.0,
                "second derivative negative at v = {v}"
            );
        }
    }
    assert!(decreasing_seen > 0, "no decreasing-regime universe sampled");
}

#[test]
fn analytic_derivatives_match_finite_differences() {
    let cfg = OracleConfig::default();
    for u in universes(100, 31) {
        let s = u.scalars().unwrap();
        let sh = s.sharpe(safe_mu_f(&s)).unwrap();
        use divcurve::analysis::CurveFamily::*;
        for tau in [0.5, 2.0, 5.0] {
            let report = finite_difference_check(TauRisky(&s), tau, &cfg).unwrap();
            assert!(report.pass, "tau risky diff {}", report.abs_diff);
            let report = finite_difference_check(TauRiskFree(&s, &sh), tau, &cfg).unwrap();
            assert!(report.pass, "tau rf diff {}", report.abs_diff);
        }
        for mult in [2.0, 5.0] {
            let report =
                finite_difference_check(VarianceRisky(&s), mult / s.c, &cfg).unwrap();
            assert!(report.pass, "variance risky diff {}", report.abs_diff);
            let report =
                finite_difference_check(VarianceRiskFree(&s, &sh), mult / s.c, &cfg).unwrap();
            assert!(report.pass, "variance rf diff {}", report.abs_diff);
        }
    }
}

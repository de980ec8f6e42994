//! `divcurve`: closed-form mean-variance portfolios and risk-diversification
//! curves from the command line.
//!
//! Exit codes: 0 success, 2 bad input (parse/validation/domain), 3
//! mathematical degeneracy (collapsed efficient set, undefined tangent,
//! singular boundary), 4 I/O failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use divcurve::analysis::{
    classify_risky, classify_riskfree, sample_curve, CurveFamily, CurveSample, Regime, Setting,
};
use divcurve::error::{Error, Result};
use divcurve::market::{AssetUniverse, ReturnsSample, ScalarSummary};
use divcurve::portfolio::{
    composite_portfolio, edm, optimal_weights, portfolio_variance, PortfolioWeights,
    RiskTolerance,
};

use divcurve_cli::report::{AnalysisReport, PortfolioBlock};

const PAPER4_HI: &str = include_str!("../../../fixtures/paper4.json");
const PAPER4_LO: &str = include_str!("../../../fixtures/paper4_lo.json");

/// Grid resolution of every bundled figure dataset.
const FIGURE_SAMPLES: usize = 401;

/// Risk-free rates paired with the bundled fixture's figure set.
const FIGURE_RATES: [f64; 2] = [6.0, 13.0];

#[derive(Parser)]
#[command(
    name = "divcurve",
    version,
    about = "Closed-form mean-variance portfolios and risk-diversification curves"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the scalar summary A..F (and S when the file sets risk_free)
    Scalars {
        /// Universe JSON file
        universe: PathBuf,
        /// Emit a JSON report instead of text
        #[arg(long)]
        json: bool,
    },
    /// Classify the risk-diversification regime
    Classify {
        /// Universe JSON file
        universe: PathBuf,
        /// Risk-free rate; switches to the with-risk-free setting
        #[arg(long)]
        rf: Option<f64>,
        /// Emit a JSON report instead of text
        #[arg(long)]
        json: bool,
    },
    /// Print the optimal portfolio at a risk tolerance
    Weights {
        /// Universe JSON file
        universe: PathBuf,
        /// Risk tolerance tau = 1/gamma, >= 0
        #[arg(long)]
        tau: f64,
        /// Risk-free rate; switches to the composite tangent portfolio
        #[arg(long)]
        rf: Option<f64>,
        /// Emit a JSON report instead of text
        #[arg(long)]
        json: bool,
    },
    /// Sample a risk-diversification curve to CSV
    Curve {
        /// Universe JSON file
        universe: PathBuf,
        /// Risky-only or with the risk-free asset
        #[arg(long, value_enum)]
        setting: SettingArg,
        /// Abscissa: risk tolerance or portfolio variance
        #[arg(long, value_enum)]
        plane: PlaneArg,
        /// Lower end of the abscissa domain
        #[arg(long)]
        lo: f64,
        /// Upper end of the abscissa domain
        #[arg(long)]
        hi: f64,
        /// Number of uniform samples, endpoints included (>= 2)
        #[arg(long)]
        samples: usize,
        /// Risk-free rate (required for --setting rf)
        #[arg(long)]
        rf: Option<f64>,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the bundled figure datasets and their plot constants
    Figures {
        /// Bundled fixture name (available: paper4)
        #[arg(long)]
        fixture: String,
        /// Output directory (created if missing)
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate a universe from a historical returns CSV
    Estimate {
        /// Returns CSV: header row of labels, one row per period
        returns: PathBuf,
        /// Risk-free rate to store in the universe
        #[arg(long)]
        rf: Option<f64>,
        /// Output universe JSON path
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SettingArg {
    Risky,
    Rf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlaneArg {
    Tau,
    Variance,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 4,
        Error::DegenerateD { .. }
        | Error::DegenerateSharpe { .. }
        | Error::TangentUndefined { .. }
        | Error::DegenerateSample
        | Error::BoundarySingularity { .. } => 3,
        _ => 2,
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Scalars { universe, json } => cmd_scalars(&universe, json),
        Command::Classify { universe, rf, json } => cmd_classify(&universe, rf, json),
        Command::Weights {
            universe,
            tau,
            rf,
            json,
        } => cmd_weights(&universe, tau, rf, json),
        Command::Curve {
            universe,
            setting,
            plane,
            lo,
            hi,
            samples,
            rf,
            out,
        } => cmd_curve(&universe, setting, plane, lo, hi, samples, rf, &out),
        Command::Figures { fixture, out } => cmd_figures(&fixture, &out),
        Command::Estimate { returns, rf, out } => cmd_estimate(&returns, rf, &out),
    }
}

fn cmd_scalars(path: &Path, json: bool) -> Result<()> {
    let u = AssetUniverse::load(path)?;
    let s = u.scalars()?;
    let mut report = AnalysisReport::new(s);
    if let Some(rate) = u.risk_free() {
        report.mu_f = Some(rate);
        report.sharpe_s = Some(s.sharpe(rate)?.s());
    }
    if json {
        print!("{}", report.to_json());
        return Ok(());
    }
    println!("A = {}", s.a);
    println!("B = {}", s.b);
    println!("C = {}", s.c);
    println!("D = {}", s.d);
    println!("E = {}", s.e);
    println!("F = {}", s.f);
    if let (Some(rate), Some(sharpe)) = (report.mu_f, report.sharpe_s) {
        println!("S (mu_f = {rate}) = {sharpe}");
    }
    Ok(())
}

fn cmd_classify(path: &Path, rf: Option<f64>, json: bool) -> Result<()> {
    let u = AssetUniverse::load(path)?;
    let s = u.scalars()?;
    let mut report = AnalysisReport::new(s);
    let regime = match rf {
        None => classify_risky(&s)?,
        Some(rate) => {
            let sh = s.sharpe(rate)?;
            report.mu_f = Some(rate);
            report.sharpe_s = Some(sh.s());
            classify_riskfree(&s, &sh)
        }
    };
    report.regime = Some(regime);
    if json {
        print!("{}", report.to_json());
        return Ok(());
    }
    print_regime(&regime, rf);
    Ok(())
}

fn print_regime(regime: &Regime, rf: Option<f64>) {
    match regime.setting {
        Setting::RiskyOnly => {
            println!("setting: risky-only");
            println!("sign quantity EC - FB = {}", regime.sign_quantity);
        }
        Setting::WithRiskFree => {
            println!(
                "setting: with risk-free asset (mu_f = {})",
                rf.unwrap_or(f64::NAN)
            );
            println!("sign quantity E - F*mu_f = {}", regime.sign_quantity);
        }
    }
    println!("regime: {}", regime.label);
    if let (Some(tau_star), Some(variance_star), Some(edm_max)) =
        (regime.tau_star, regime.variance_star, regime.edm_max)
    {
        println!("tau* = {tau_star}");
        println!("variance* = {variance_star}");
        println!("EDM_max = {edm_max}");
    }
}

fn cmd_weights(path: &Path, tau_value: f64, rf: Option<f64>, json: bool) -> Result<()> {
    let u = AssetUniverse::load(path)?;
    let s = u.scalars()?;
    let tau = RiskTolerance::new(tau_value)?;
    let w: PortfolioWeights = match rf {
        None => optimal_weights(&s, &u, tau)?,
        Some(rate) => composite_portfolio(&s, &u, rate, tau)?,
    };
    let variance = portfolio_variance(&u, &w)?;
    let edm_value = edm(&u, &w)?;
    let sum = w.risk_free_weight() + w.weights().iter().sum::<f64>();
    let block = PortfolioBlock {
        tau: tau_value,
        labels: u.labels().to_vec(),
        weights: w.weights().to_vec(),
        risk_free_weight: rf.map(|_| w.risk_free_weight()),
        sum,
        variance,
        edm: edm_value,
    };
    let mut report = AnalysisReport::new(s);
    report.mu_f = rf;
    report.portfolio = Some(block);
    if json {
        print!("{}", report.to_json());
        return Ok(());
    }
    println!("tau = {tau_value}");
    for (label, weight) in u.labels().iter().zip(w.weights()) {
        println!("{label}: {weight}");
    }
    if rf.is_some() {
        println!("risk-free: {}", w.risk_free_weight());
    }
    println!("sum = {sum}");
    println!("variance = {variance}");
    println!("EDM = {edm_value}");
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_curve(
    path: &Path,
    setting: SettingArg,
    plane: PlaneArg,
    lo: f64,
    hi: f64,
    samples: usize,
    rf: Option<f64>,
    out: &Path,
) -> Result<()> {
    let u = AssetUniverse::load(path)?;
    let s = u.scalars()?;
    let curve = match setting {
        SettingArg::Risky => {
            if rf.is_some() {
                return Err(Error::InvalidInput(
                    "--rf applies only to --setting rf".into(),
                ));
            }
            match plane {
                PlaneArg::Tau => sample_curve(CurveFamily::TauRisky(&s), lo, hi, samples)?,
                PlaneArg::Variance => {
                    sample_curve(CurveFamily::VarianceRisky(&s), lo, hi, samples)?
                }
            }
        }
        SettingArg::Rf => {
            let rate = rf.ok_or_else(|| {
                Error::InvalidInput("--setting rf requires --rf <rate>".into())
            })?;
            let sh = s.sharpe(rate)?;
            match plane {
                PlaneArg::Tau => sample_curve(CurveFamily::TauRiskFree(&s, &sh), lo, hi, samples)?,
                PlaneArg::Variance => {
                    sample_curve(CurveFamily::VarianceRiskFree(&s, &sh), lo, hi, samples)?
                }
            }
        }
    };
    write_curve(out, &curve)?;
    println!("wrote {} samples to {}", curve.len(), out.display());
    Ok(())
}

fn write_curve(path: &Path, samples: &[CurveSample]) -> Result<()> {
    let mut text = String::from("abscissa,edm\n");
    for sample in samples {
        text.push_str(&format!("{},{}\n", sample.abscissa, sample.edm));
    }
    fs::write(path, text)?;
    Ok(())
}

fn load_embedded(text: &str) -> Result<AssetUniverse> {
    let u: AssetUniverse = serde_json::from_str(text)
        .map_err(|e| Error::InvalidInput(format!("bundled fixture: {e}")))?;
    u.validated()
}

fn cmd_figures(fixture: &str, out: &Path) -> Result<()> {
    if fixture != "paper4" {
        return Err(Error::InvalidInput(format!(
            "unknown fixture {fixture:?} (available: paper4)"
        )));
    }
    let hi = load_embedded(PAPER4_HI)?;
    let lo = load_embedded(PAPER4_LO)?;
    let s_hi = hi.scalars()?;
    let s_lo = lo.scalars()?;
    let [rate_low, rate_high] = FIGURE_RATES;
    let sh_low = s_hi.sharpe(rate_low)?;
    let sh_high = s_hi.sharpe(rate_high)?;
    fs::create_dir_all(out)?;

    let n = FIGURE_SAMPLES;
    let curves: [(&str, Vec<CurveSample>); 8] = [
        ("fig1_left.csv", sample_curve(CurveFamily::TauRisky(&s_hi), 0.0, 40.0, n)?),
        ("fig1_right.csv", sample_curve(CurveFamily::TauRisky(&s_lo), 0.0, 40.0, n)?),
        ("fig2_left.csv", sample_curve(CurveFamily::TauRiskFree(&s_hi, &sh_low), 0.0, 40.0, n)?),
        ("fig2_right.csv", sample_curve(CurveFamily::TauRiskFree(&s_hi, &sh_high), 0.0, 10.0, n)?),
        ("fig3_left.csv", sample_curve(CurveFamily::VarianceRisky(&s_hi), 1.0 / s_hi.c, 200.0, n)?),
        ("fig3_right.csv", sample_curve(CurveFamily::VarianceRisky(&s_lo), 1.0 / s_lo.c, 50.0, n)?),
        ("fig4_left.csv", sample_curve(CurveFamily::VarianceRiskFree(&s_hi, &sh_low), 0.0, 300.0, n)?),
        ("fig4_right.csv", sample_curve(CurveFamily::VarianceRiskFree(&s_hi, &sh_high), 0.0, 10.0, n)?),
    ];
    for (name, curve) in &curves {
        write_curve(&out.join(name), curve)?;
    }
    fs::write(out.join("constants.txt"), figure_constants(&s_hi, &s_lo))?;
    println!("wrote 8 curve files and constants.txt to {}", out.display());
    Ok(())
}

fn figure_constants(s_hi: &ScalarSummary, s_lo: &ScalarSummary) -> String {
    let mut text = String::new();
    let mut push = |name: &str, value: f64| text.push_str(&format!("{name} = {value}\n"));
    push("C", s_hi.c);
    push("F", s_hi.f);
    push("D", s_hi.d);
    push("(EC-FB)/C", s_hi.ec_minus_fb() / s_hi.c);
    push("D/C", s_hi.d / s_hi.c);
    push("(F-1)/C", (s_hi.f - 1.0) / s_hi.c);
    push("D, MU_LO", s_lo.d);
    push("(EC-FB)/C, MU_LO", s_lo.ec_minus_fb() / s_lo.c);
    for rate in FIGURE_RATES {
        let s_value = (s_hi.c * rate * rate - 2.0 * s_hi.b * rate + s_hi.a).sqrt();
        let excess = s_hi.e - s_hi.f * rate;
        push(&format!("S, mu_f={rate}"), s_value);
        push(&format!("E-F*mu_f, mu_f={rate}"), excess);
        push(&format!("(E-F*mu_f)/S, mu_f={rate}"), excess / s_value);
    }
    text
}

fn cmd_estimate(returns: &Path, rf: Option<f64>, out: &Path) -> Result<()> {
    let sample = ReturnsSample::from_csv_path(returns)?;
    let u = sample.estimate_universe(rf)?;
    u.save(out)?;
    println!(
        "wrote universe of {} assets ({} observations) to {}",
        u.dim(),
        sample.n_observations(),
        out.display()
    );
    Ok(())
}

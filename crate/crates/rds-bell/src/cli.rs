//! Command-line front end: thresholds, figure-reproduction CSVs, the
//! Monte Carlo simulator, and a self-verification suite.
//!
//! Every output is paired with a run manifest (flat key=value text with a
//! sha256 of the output bytes); re-running the same invocation reproduces
//! the output byte for byte. Exit codes: 0 success, 1 verification
//! failure, 2 usage error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::inequalities::{chsh_form, ch_form, i3322_form, lhv_max, AssignmentConvention};
use crate::montecarlo::{run_trials, TrialConfig};
use crate::oracle::exhaustive_expected_value;
use crate::quantum::{ch_optimal_settings, i3322_optimal_settings, SettingsPair};
use crate::source::{DetectorModel, SourceParams};
use crate::thresholds::{
    bisect, ch_violation_lhs, components_for, crossover_p, eta_crit_asymmetric,
    eta_crit_symmetric, expected_value, frontier_eta_b, i3322_eta_b_crit, i3322_violation_lhs,
    optimize_settings, region, singlet_ch_components, I3322Variant,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Tolerance for closed-form vs bisection agreement.
const THRESHOLD_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "rds-bell", version, about = "Bell tests with random destination sources")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Critical detection efficiency for a given splitting probability.
    Thresholds {
        /// Splitting probability p in (0, 1].
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum)]
        mode: ThresholdMode,
        /// Write the machine-readable record here (and a .manifest next to it).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CSV data reproducing the threshold figures.
    Curves {
        /// 3 = symmetric/asymmetric vs p, 4 = (eta_A, eta_B) frontier,
        /// 5 = CH vs I3322 asymmetric thresholds with regions.
        #[arg(long)]
        figure: u8,
        #[arg(long, default_value_t = 0.01)]
        grid_step: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the Monte Carlo trial engine and compare with the analytic value.
    Simulate {
        /// key=value file mirroring the flag names; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        eta_a: Option<f64>,
        #[arg(long)]
        eta_b: Option<f64>,
        #[arg(long, value_enum)]
        convention: Option<ConventionArg>,
        #[arg(long)]
        trials: Option<u64>,
        /// Explicit seed; wall-clock seeding is deliberately unsupported.
        #[arg(long)]
        seed: Option<u64>,
        /// Defaults to RDS_BELL_STREAMS, then 1.
        #[arg(long)]
        streams: Option<u32>,
        /// Comma-separated analyzer angles in radians (defaults to the
        /// optimal settings for the convention's inequality).
        #[arg(long)]
        angles_a: Option<String>,
        #[arg(long)]
        angles_b: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the internal consistency checks and report pass/fail.
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ThresholdMode {
    Symmetric,
    Asymmetric,
    I3322Plus,
    I3322Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConventionArg {
    ChFull,
    ChshFull,
    I3322Plus,
    I3322Minus,
    Postselect,
    FairSampling,
}

impl From<ConventionArg> for AssignmentConvention {
    fn from(value: ConventionArg) -> Self {
        match value {
            ConventionArg::ChFull => Self::ChFull,
            ConventionArg::ChshFull => Self::ChshFull,
            ConventionArg::I3322Plus => Self::I3322Plus,
            ConventionArg::I3322Minus => Self::I3322Minus,
            ConventionArg::Postselect => Self::Postselect,
            ConventionArg::FairSampling => Self::FairSampling,
        }
    }
}

/// Flat key=value description of one run, written next to every output.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub subcommand: String,
    pub params: BTreeMap<String, String>,
    pub version: String,
    pub sha256: String,
}

impl RunManifest {
    fn new(subcommand: &str, params: BTreeMap<String, String>, payload: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(payload.as_bytes());
        Self {
            subcommand: subcommand.to_string(),
            params,
            version: env!("CARGO_PKG_VERSION").to_string(),
            sha256: format!("{:x}", hasher.finalize()),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "subcommand={}", self.subcommand);
        for (k, v) in &self.params {
            let _ = writeln!(s, "{k}={v}");
        }
        let _ = writeln!(s, "version={}", self.version);
        let _ = writeln!(s, "sha256={}", self.sha256);
        s
    }
}

/// Writes the payload to --out (with its manifest next to it) or to
/// stdout (manifest to stderr).
fn emit(out: Option<&Path>, payload: &str, manifest: &RunManifest) -> std::io::Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, payload)?;
            let mut manifest_path = path.as_os_str().to_owned();
            manifest_path.push(".manifest");
            std::fs::write(manifest_path, manifest.to_text())?;
        }
        None => {
            print!("{payload}");
            eprint!("{}", manifest.to_text());
        }
    }
    Ok(())
}

fn usage_error(message: &str) -> i32 {
    eprintln!("error: {message}");
    EXIT_USAGE
}

/// Parses argv and runs one subcommand, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version through the error path with code 0
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Thresholds { p, mode, out } => cmd_thresholds(p, mode, out.as_deref()),
        Command::Curves { figure, grid_step, out } => cmd_curves(figure, grid_step, out.as_deref()),
        Command::Simulate {
            config,
            p,
            eta_a,
            eta_b,
            convention,
            trials,
            seed,
            streams,
            angles_a,
            angles_b,
            out,
        } => {
            let flags = SimulateFlags {
                p,
                eta_a,
                eta_b,
                convention,
                trials,
                seed,
                streams,
                angles_a,
                angles_b,
            };
            cmd_simulate(config.as_deref(), flags, out.as_deref())
        }
        Command::Verify => cmd_verify(),
    }
}

#[derive(Debug, Clone, Serialize)]
struct ThresholdRecord {
    subcommand: &'static str,
    p: f64,
    mode: String,
    closed_form: Option<f64>,
    bisection: Option<f64>,
    agreement_tol: f64,
    agrees: bool,
}

fn cmd_thresholds(p: f64, mode: ThresholdMode, out: Option<&Path>) -> i32 {
    if !(p > 0.0 && p <= 1.0) {
        return usage_error(&format!("--p must be in (0, 1], got {p}"));
    }
    let (mode_name, closed, lhs): (_, Option<f64>, Box<dyn Fn(f64) -> f64>) = match mode {
        ThresholdMode::Symmetric => (
            "symmetric",
            eta_crit_symmetric(p),
            Box::new(move |eta| ch_violation_lhs(p, eta, eta)),
        ),
        ThresholdMode::Asymmetric => (
            "asymmetric",
            eta_crit_asymmetric(p),
            Box::new(move |eta| ch_violation_lhs(p, 1.0, eta)),
        ),
        ThresholdMode::I3322Plus => (
            "i3322-plus",
            i3322_eta_b_crit(p, I3322Variant::Plus),
            Box::new(move |eta| i3322_violation_lhs(p, 1.0, eta, I3322Variant::Plus)),
        ),
        ThresholdMode::I3322Minus => (
            "i3322-minus",
            i3322_eta_b_crit(p, I3322Variant::Minus),
            Box::new(move |eta| i3322_violation_lhs(p, 1.0, eta, I3322Variant::Minus)),
        ),
    };
    let bisection = bisect(&*lhs, 1e-6, 1.0 + 1e-9, 1e-12).ok();
    let agrees = match (closed, bisection) {
        (Some(c), Some(b)) => (c - b).abs() <= THRESHOLD_TOL,
        (None, None) => true,
        _ => false,
    };
    let record = ThresholdRecord {
        subcommand: "thresholds",
        p,
        mode: mode_name.to_string(),
        closed_form: closed,
        bisection,
        agreement_tol: THRESHOLD_TOL,
        agrees,
    };
    let payload = format!("{}\n", serde_json::to_string(&record).expect("serializable"));
    let params = BTreeMap::from([
        ("p".to_string(), format!("{p}")),
        ("mode".to_string(), mode_name.to_string()),
    ]);
    let manifest = RunManifest::new("thresholds", params, &payload);
    match closed {
        Some(c) => println!(
            "eta_crit({mode_name}, p={p}) = {c} (bisection {})",
            bisection.map_or("n/a".into(), |b| format!("{b}"))
        ),
        None => println!("eta_crit({mode_name}, p={p}): unattainable"),
    }
    if emit(out, &payload, &manifest).is_err() {
        return usage_error("could not write output");
    }
    if agrees {
        EXIT_OK
    } else {
        eprintln!("error: closed form and bisection disagree beyond {THRESHOLD_TOL}");
        EXIT_VERIFY_FAILED
    }
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn cmd_curves(figure: u8, grid_step: f64, out: Option<&Path>) -> i32 {
    if !(grid_step > 0.0 && grid_step <= 0.5) {
        return usage_error(&format!("--grid-step must be in (0, 0.5], got {grid_step}"));
    }
    let steps = (1.0 / grid_step).round() as usize;
    let grid = |k: usize| k as f64 * grid_step;
    let mut csv = String::new();
    match figure {
        3 => {
            csv.push_str("p,eta_sym,eta_asym\n");
            for k in 1..=steps {
                let p = grid(k);
                let sym = eta_crit_symmetric(p).expect("p > 0");
                let asym = eta_crit_asymmetric(p).expect("p > 0");
                let _ = writeln!(csv, "{},{},{}", fmt(p), fmt(sym), fmt(asym));
            }
        }
        4 => {
            csv.push_str("p,eta_a,eta_b_frontier\n");
            let components = singlet_ch_components(&ch_optimal_settings()).expect("fixed settings");
            for p in [1.0, 0.75, 0.5, 0.25] {
                for k in 0..=steps {
                    let eta_a = grid(k);
                    if let Some(frontier) = frontier_eta_b(p, eta_a, &components) {
                        let _ = writeln!(csv, "{},{},{}", fmt(p), fmt(eta_a), fmt(frontier));
                    }
                }
            }
        }
        5 => {
            csv.push_str("p,ch_asym,i3322_eta_a1,i3322_eta_b1,region\n");
            for k in 1..=steps {
                let p = grid(k);
                let ch = eta_crit_asymmetric(p).expect("p > 0");
                let plus = i3322_eta_b_crit(p, I3322Variant::Plus)
                    .map_or(String::new(), |v| fmt(v));
                let minus = i3322_eta_b_crit(p, I3322Variant::Minus)
                    .map_or(String::new(), |v| fmt(v));
                let label = region(p).expect("crossover brackets hold");
                let _ = writeln!(csv, "{},{},{plus},{minus},{label}", fmt(p), fmt(ch));
            }
        }
        other => return usage_error(&format!("--figure must be 3, 4, or 5, got {other}")),
    }
    let params = BTreeMap::from([
        ("figure".to_string(), figure.to_string()),
        ("grid_step".to_string(), fmt(grid_step)),
    ]);
    let manifest = RunManifest::new("curves", params, &csv);
    if emit(out, &csv, &manifest).is_err() {
        return usage_error("could not write output");
    }
    EXIT_OK
}

#[derive(Debug, Default)]
struct SimulateFlags {
    p: Option<f64>,
    eta_a: Option<f64>,
    eta_b: Option<f64>,
    convention: Option<ConventionArg>,
    trials: Option<u64>,
    seed: Option<u64>,
    streams: Option<u32>,
    angles_a: Option<String>,
    angles_b: Option<String>,
}

fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(format!("line {} is not key=value", lineno + 1))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parse_angles(text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("bad angle {s:?}")))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
struct SimulateRecord {
    subcommand: &'static str,
    p: f64,
    eta_a: f64,
    eta_b: f64,
    convention: String,
    angles_a: Vec<f64>,
    angles_b: Vec<f64>,
    trials: u64,
    seed: u64,
    streams: u32,
    estimate: Option<f64>,
    std_error: Option<f64>,
    analytic: f64,
    z_score: Option<f64>,
    kept_trials: u64,
    discarded_trials: u64,
    pattern_counts: Vec<Vec<Vec<u64>>>,
    pair_estimates: Vec<Vec<f64>>,
}

fn convention_name(c: AssignmentConvention) -> &'static str {
    match c {
        AssignmentConvention::ChFull => "ch-full",
        AssignmentConvention::ChshFull => "chsh-full",
        AssignmentConvention::I3322Plus => "i3322-plus",
        AssignmentConvention::I3322Minus => "i3322-minus",
        AssignmentConvention::Postselect => "postselect",
        AssignmentConvention::FairSampling => "fair-sampling",
    }
}

fn cmd_simulate(config_path: Option<&Path>, flags: SimulateFlags, out: Option<&Path>) -> i32 {
    let file = match config_path.map(parse_config_file).transpose() {
        Ok(map) => map.unwrap_or_default(),
        Err(e) => return usage_error(&e.to_string()),
    };
    macro_rules! resolve {
        ($flag:expr, $key:literal, $default:expr) => {
            match $flag {
                Some(v) => v,
                None => match file.get($key) {
                    Some(raw) => match raw.parse() {
                        Ok(v) => v,
                        Err(_) => return usage_error(&format!("bad {} in config: {raw:?}", $key)),
                    },
                    None => $default,
                },
            }
        };
    }

    let p = resolve!(flags.p, "p", 0.5);
    let eta_a = resolve!(flags.eta_a, "eta-a", 1.0);
    let eta_b = resolve!(flags.eta_b, "eta-b", 1.0);
    let trials = resolve!(flags.trials, "trials", 1_000_000u64);
    let env_streams = std::env::var("RDS_BELL_STREAMS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let streams = resolve!(flags.streams, "streams", env_streams);
    let seed = match flags.seed.or_else(|| file.get("seed").and_then(|s| s.parse().ok())) {
        Some(seed) => seed,
        None => return usage_error("--seed is required (wall-clock seeding is not supported)"),
    };
    let convention: AssignmentConvention = match flags.convention {
        Some(c) => c.into(),
        None => match file.get("convention").map(String::as_str) {
            None => AssignmentConvention::Postselect,
            Some(name) => match ConventionArg::from_str(name, true) {
                Ok(c) => c.into(),
                Err(_) => return usage_error(&format!("unknown convention {name:?}")),
            },
        },
    };

    let default_settings = if convention.n_settings() == 3 {
        i3322_optimal_settings()
    } else {
        ch_optimal_settings()
    };
    let angles_a = flags.angles_a.or_else(|| file.get("angles-a").cloned());
    let angles_b = flags.angles_b.or_else(|| file.get("angles-b").cloned());
    let settings = match (angles_a, angles_b) {
        (None, None) => default_settings,
        (Some(a), Some(b)) => {
            match parse_angles(&a).and_then(|a| {
                let b = parse_angles(&b)?;
                SettingsPair::from_angles(&a, &b)
            }) {
                Ok(s) => s,
                Err(e) => return usage_error(&e.to_string()),
            }
        }
        _ => return usage_error("--angles-a and --angles-b must be given together"),
    };

    let trial_config = match SourceParams::new(p).and_then(|source| {
        Ok(TrialConfig {
            source,
            detectors: DetectorModel::new(eta_a, eta_b)?,
            settings,
            convention,
            n_trials: trials,
            seed,
            n_streams: streams,
        })
    }) {
        Ok(c) => c,
        Err(e) => return usage_error(&e.to_string()),
    };
    if let Err(e) = trial_config.validate() {
        return usage_error(&e.to_string());
    }

    // analytic prediction: the branch average for full counting, the
    // conditional quantum CHSH value for postselecting pipelines
    let analytic = if convention.is_full_counting() {
        let c = components_for(convention, &trial_config.settings).expect("full counting");
        expected_value(&c, p, eta_a, eta_b)
    } else {
        let singlet = crate::quantum::make_singlet();
        let correlators: Vec<Vec<f64>> = trial_config
            .settings
            .alice()
            .iter()
            .map(|&a| {
                trial_config
                    .settings
                    .bob()
                    .iter()
                    .map(|&b| crate::quantum::correlator(&singlet, a, b))
                    .collect()
            })
            .collect();
        chsh_form().evaluate_correlators(&correlators)
    };

    let report = match run_trials(&trial_config) {
        Ok(r) => r,
        Err(e) => return usage_error(&e.to_string()),
    };
    let z_score = match (report.value, report.std_error) {
        (Some(v), Some(se)) if se > 0.0 => Some((v - analytic) / se),
        _ => None,
    };

    let record = SimulateRecord {
        subcommand: "simulate",
        p,
        eta_a,
        eta_b,
        convention: convention_name(convention).to_string(),
        angles_a: trial_config.settings.alice().iter().map(|a| a.angle()).collect(),
        angles_b: trial_config.settings.bob().iter().map(|a| a.angle()).collect(),
        trials,
        seed,
        streams,
        estimate: report.value,
        std_error: report.std_error,
        analytic,
        z_score,
        kept_trials: report.kept_trials,
        discarded_trials: report.discarded_trials,
        pattern_counts: report.pattern_counts.clone(),
        pair_estimates: report.pair_estimates.clone(),
    };

    let mut human = String::new();
    match (report.value, report.std_error) {
        (Some(v), Some(se)) => {
            let _ = writeln!(human, "I_hat = {v} +- {se}");
            let _ = writeln!(human, "analytic = {analytic}");
            let _ = writeln!(human, "z = {}", z_score.map_or("n/a".into(), fmt));
        }
        _ => {
            let _ = writeln!(human, "I_hat: no kept trials for at least one setting pair");
            let _ = writeln!(human, "analytic = {analytic}");
        }
    }
    let _ = writeln!(
        human,
        "kept = {} discarded = {}",
        report.kept_trials, report.discarded_trials
    );
    let _ = writeln!(human, "event tallies (class x detected_A x detected_B):");
    for (class, label) in ["I", "II", "III"].iter().enumerate() {
        for n_a in 0..3 {
            for n_b in 0..3 {
                let count = report.pattern_counts[class][n_a][n_b];
                if count > 0 {
                    let _ = writeln!(human, "  {label:<3} ({n_a} {n_b}): {count}");
                }
            }
        }
    }

    let payload = format!("{}\n", serde_json::to_string(&record).expect("serializable"));
    let mut params = BTreeMap::from([
        ("p".to_string(), fmt(p)),
        ("eta-a".to_string(), fmt(eta_a)),
        ("eta-b".to_string(), fmt(eta_b)),
        ("convention".to_string(), convention_name(convention).to_string()),
        ("trials".to_string(), trials.to_string()),
        ("seed".to_string(), seed.to_string()),
        ("streams".to_string(), streams.to_string()),
    ]);
    params.insert(
        "angles-a".to_string(),
        record.angles_a.iter().map(|a| fmt(*a)).collect::<Vec<_>>().join(","),
    );
    params.insert(
        "angles-b".to_string(),
        record.angles_b.iter().map(|a| fmt(*a)).collect::<Vec<_>>().join(","),
    );
    let manifest = RunManifest::new("simulate", params, &payload);
    print!("{human}");
    if emit(out, &payload, &manifest).is_err() {
        return usage_error("could not write output");
    }
    EXIT_OK
}

/// One named pass/fail result from the verification suite.
pub struct Check {
    name: &'static str,
    tolerance: String,
    passed: bool,
    detail: String,
}

fn check(name: &'static str, tolerance: impl std::fmt::Display, passed: bool, detail: String) -> Check {
    Check {
        name,
        tolerance: tolerance.to_string(),
        passed,
        detail,
    }
}

/// Runs the self-verification suite. Public so the acceptance tests can
/// reuse it.
pub fn verification_checks() -> Vec<Check> {
    let mut checks = Vec::new();

    for (name, form, n_strategies) in [
        ("lhv_max(ch) == 0", ch_form(), 16usize),
        ("lhv_max(chsh) == 0", chsh_form(), 16),
        ("lhv_max(i3322) == 0", i3322_form(), 64),
    ] {
        let result = lhv_max(&form);
        let total = (1usize << form.n_settings_a()) * (1usize << form.n_settings_b());
        checks.push(check(
            name,
            "exact",
            result.value == 0.0 && total == n_strategies && !result.maximizers.is_empty(),
            format!("max = {} over {total} strategies", result.value),
        ));
    }

    // CH component fixture at the frozen optimal settings
    let c = singlet_ch_components(&ch_optimal_settings()).expect("fixed settings");
    let q_target = std::f64::consts::FRAC_1_SQRT_2 - 0.5;
    let fixture_ok = (c.q - q_target).abs() < 1e-9
        && (c.m_a + 0.5).abs() < 1e-9
        && (c.m_b + 0.5).abs() < 1e-9
        && (c.t_a + 0.5).abs() < 1e-9
        && (c.t_b + 0.5).abs() < 1e-9
        && c.d_a.abs() < 1e-9
        && c.d_b.abs() < 1e-9
        && c.x.abs() < 1e-9;
    checks.push(check(
        "CH components (Q, M, T, D, X) fixture",
        1e-9,
        fixture_ok,
        format!("Q = {}", c.q),
    ));

    // component decomposition vs exhaustive enumeration on random tuples
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(0xa11ce);
    let mut worst: f64 = 0.0;
    for k in 0..300 {
        let convention = match k % 3 {
            0 => AssignmentConvention::ChFull,
            1 => AssignmentConvention::ChshFull,
            _ => AssignmentConvention::I3322Plus,
        };
        let n = convention.n_settings();
        let angles: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(0.0..std::f64::consts::PI)).collect();
        let settings = SettingsPair::from_angles(&angles[..n], &angles[n..]).expect("valid");
        let (p, ea, eb) = (rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>());
        let components = components_for(convention, &settings).expect("full counting");
        let direct = expected_value(&components, p, ea, eb);
        let enumerated =
            exhaustive_expected_value(convention, &settings, p, ea, eb).expect("full counting");
        worst = worst.max((direct - enumerated).abs());
    }
    checks.push(check(
        "branch average vs exhaustive enumeration (300 random tuples)",
        1e-9,
        worst < 1e-9,
        format!("max |diff| = {worst:.3e}"),
    ));

    // closed forms vs bisection
    let mut worst: f64 = 0.0;
    for k in 1..=50 {
        let p = k as f64 / 50.0;
        let pairs: [(Option<f64>, Box<dyn Fn(f64) -> f64>); 4] = [
            (eta_crit_symmetric(p), Box::new(move |e| ch_violation_lhs(p, e, e))),
            (eta_crit_asymmetric(p), Box::new(move |e| ch_violation_lhs(p, 1.0, e))),
            (
                i3322_eta_b_crit(p, I3322Variant::Plus),
                Box::new(move |e| i3322_violation_lhs(p, 1.0, e, I3322Variant::Plus)),
            ),
            (
                i3322_eta_b_crit(p, I3322Variant::Minus),
                Box::new(move |e| i3322_violation_lhs(p, 1.0, e, I3322Variant::Minus)),
            ),
        ];
        for (closed, lhs) in pairs {
            let closed = closed.expect("p > 0");
            let root = bisect(&*lhs, 1e-6, 1.0 + 1e-9, 1e-12).expect("bracketed");
            worst = worst.max((closed - root).abs());
        }
    }
    checks.push(check(
        "closed-form thresholds vs bisection (50 p values)",
        1e-9,
        worst < 1e-9,
        format!("max |diff| = {worst:.3e}"),
    ));

    // crossovers
    let plus = crossover_p(I3322Variant::Plus).expect("bracketed");
    let minus = crossover_p(I3322Variant::Minus).expect("bracketed");
    checks.push(check(
        "I3322/CH crossovers at p = 0.863 and 0.099",
        2e-3,
        (plus - 0.863).abs() < 2e-3 && (minus - 0.099).abs() < 2e-3,
        format!("plus = {plus:.4}, minus = {minus:.4}"),
    ));

    // optimizer fixtures
    let ch = optimize_settings(AssignmentConvention::ChFull, 1.0, 1.0, 1.0).expect("runs");
    checks.push(check(
        "optimized CH value = 1/sqrt(2) - 1/2",
        1e-6,
        (ch.value - q_target).abs() < 1e-6,
        format!("value = {}", ch.value),
    ));
    let chsh = optimize_settings(AssignmentConvention::ChshFull, 1.0, 1.0, 1.0).expect("runs");
    checks.push(check(
        "optimized CHSH correlator sum = 2 sqrt(2)",
        1e-6,
        (chsh.value + 2.0 - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-6,
        format!("sum = {}", chsh.value + 2.0),
    ));
    let i3322 = optimize_settings(AssignmentConvention::I3322Plus, 1.0, 1.0, 1.0).expect("runs");
    checks.push(check(
        "optimized I3322 value = 1/4",
        1e-4,
        (i3322.value - 0.25).abs() < 1e-4,
        format!("value = {}", i3322.value),
    ));

    checks
}

fn cmd_verify() -> i32 {
    let checks = verification_checks();
    let mut all_passed = true;
    for c in &checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!("{status} {} (tolerance {}) — {}", c.name, c.tolerance, c.detail);
        all_passed &= c.passed;
    }
    if all_passed {
        println!("all {} checks passed", checks.len());
        EXIT_OK
    } else {
        println!("verification failed");
        EXIT_VERIFY_FAILED
    }
}

impl Check {
    pub fn passed(&self) -> bool {
        self.passed
    }

    pub fn name(&self) -> &str {
        self.name
    }
}

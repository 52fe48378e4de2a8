//! Seeded trial engine: generates events, applies a convention pipeline,
//! and estimates inequality values with standard errors.
//!
//! Trials are partitioned over independent ChaCha streams (same key,
//! distinct stream ids), so a run is reproducible for a fixed seed and
//! stream count, and streams can execute in parallel. All accumulators are
//! integer counts; the merge is a plain sum, so the result does not depend
//! on merge order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inequalities::{assign, AssignmentConvention, Behavior, FormKind, TrialAssignment};
use crate::quantum::SettingsPair;
use crate::source::{sample_event_class, simulate_detection, DetectorModel, SourceParams};

/// Everything one simulation run needs.
#[derive(Debug, Clone)]
pub struct TrialConfig {
    pub source: SourceParams,
    pub detectors: DetectorModel,
    pub settings: SettingsPair,
    pub convention: AssignmentConvention,
    pub n_trials: u64,
    pub seed: u64,
    pub n_streams: u32,
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::InvalidConfig("n_trials must be at least 1".into()));
        }
        if self.n_streams == 0 {
            return Err(Error::InvalidConfig("n_streams must be at least 1".into()));
        }
        if self.settings.n_settings() != self.convention.n_settings() {
            return Err(Error::InvalidConfig(format!(
                "convention needs {} settings per side, got {}",
                self.convention.n_settings(),
                self.settings.n_settings()
            )));
        }
        Ok(())
    }
}

/// Reproducible independent random streams: one ChaCha key from the seed,
/// one stream id per worker.
pub fn split_streams(seed: u64, n_streams: u32) -> Vec<ChaCha12Rng> {
    (0..n_streams)
        .map(|s| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(u64::from(s) + 1);
            rng
        })
        .collect()
}

const MAX_SETTINGS: usize = 3;

/// Integer accumulators for one stream. Indexed [i][j] by the chosen
/// setting pair.
#[derive(Debug, Clone, Default)]
struct Tally {
    trials: [[u64; MAX_SETTINGS]; MAX_SETTINGS],
    kept: [[u64; MAX_SETTINGS]; MAX_SETTINGS],
    both_plus: [[u64; MAX_SETTINGS]; MAX_SETTINGS],
    a_plus: [[u64; MAX_SETTINGS]; MAX_SETTINGS],
    b_plus: [[u64; MAX_SETTINGS]; MAX_SETTINGS],
    product_sum: [[i64; MAX_SETTINGS]; MAX_SETTINGS],
    /// counts per (event class, n_A, n_B)
    patterns: [[[u64; 3]; 3]; 3],
    discarded: u64,
}

impl Tally {
    fn merge(&mut self, other: &Tally) {
        for i in 0..MAX_SETTINGS {
            for j in 0..MAX_SETTINGS {
                self.trials[i][j] += other.trials[i][j];
                self.kept[i][j] += other.kept[i][j];
                self.both_plus[i][j] += other.both_plus[i][j];
                self.a_plus[i][j] += other.a_plus[i][j];
                self.b_plus[i][j] += other.b_plus[i][j];
                self.product_sum[i][j] += other.product_sum[i][j];
            }
        }
        for c in 0..3 {
            for a in 0..3 {
                for b in 0..3 {
                    self.patterns[c][a][b] += other.patterns[c][a][b];
                }
            }
        }
        self.discarded += other.discarded;
    }
}

fn run_stream(config: &TrialConfig, rng: &mut ChaCha12Rng, n_trials: u64) -> Tally {
    let n = config.settings.n_settings();
    let mut tally = Tally::default();
    for _ in 0..n_trials {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        let class = sample_event_class(rng, config.source);
        let record = simulate_detection(class, &config.settings, (i, j), config.detectors, rng);
        tally.trials[i][j] += 1;
        tally.patterns[class.index()][record.n_a as usize][record.n_b as usize] += 1;
        match assign(&record, config.convention) {
            TrialAssignment::Kept { a, b } => {
                tally.kept[i][j] += 1;
                if a == 1 {
                    tally.a_plus[i][j] += 1;
                }
                if b == 1 {
                    tally.b_plus[i][j] += 1;
                }
                if a == 1 && b == 1 {
                    tally.both_plus[i][j] += 1;
                }
                tally.product_sum[i][j] += i64::from(a) * i64::from(b);
            }
            TrialAssignment::Discarded => tally.discarded += 1,
        }
    }
    tally
}

/// Estimated inequality value with its uncertainty and the full trial
/// bookkeeping.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub n_trials: u64,
    pub n_streams: u32,
    pub seed: u64,
    /// Estimated value of the inequality functional; None when a
    /// postselecting run kept no trials for some setting pair.
    pub value: Option<f64>,
    pub std_error: Option<f64>,
    /// Per-pair estimates: joint +1 probabilities or correlators,
    /// depending on the form.
    pub pair_estimates: Vec<Vec<f64>>,
    pub marginal_a: Vec<f64>,
    pub marginal_b: Vec<f64>,
    /// counts per (event class I/II/III, detected at A, detected at B)
    pub pattern_counts: Vec<Vec<Vec<u64>>>,
    pub kept_trials: u64,
    pub discarded_trials: u64,
}

fn binomial_se(successes: u64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = successes as f64 / n as f64;
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Runs the full pipeline: sample class, choose settings uniformly,
/// simulate detection, apply the convention, estimate the inequality.
pub fn run_trials(config: &TrialConfig) -> Result<EstimateReport> {
    config.validate()?;
    let streams = split_streams(config.seed, config.n_streams);
    let per_stream = config.n_trials / u64::from(config.n_streams);
    let remainder = config.n_trials % u64::from(config.n_streams);

    let tallies: Vec<Tally> = streams
        .into_par_iter()
        .enumerate()
        .map(|(s, mut rng)| {
            let extra = u64::from((s as u64) < remainder);
            run_stream(config, &mut rng, per_stream + extra)
        })
        .collect();
    let mut tally = Tally::default();
    for t in &tallies {
        tally.merge(t);
    }

    let n = config.settings.n_settings();
    let form = config.convention.form();
    let full_count = config.convention.is_full_counting();

    // denominators: all trials at the pair for full counting, kept trials
    // for postselecting conventions
    let denom =
        |i: usize, j: usize| if full_count { tally.trials[i][j] } else { tally.kept[i][j] };

    let mut pair_estimates = vec![vec![0.0; n]; n];
    let mut value = Some(0.0);
    let mut variance = 0.0;
    match form.kind {
        FormKind::Probability => {
            let mut behavior = Behavior {
                joint: vec![vec![0.0; n]; n],
                marg_a: vec![0.0; n],
                marg_b: vec![0.0; n],
            };
            for i in 0..n {
                for j in 0..n {
                    let d = denom(i, j);
                    if d == 0 {
                        value = None;
                    } else {
                        behavior.joint[i][j] = tally.both_plus[i][j] as f64 / d as f64;
                        variance +=
                            (form.joint[i][j] * binomial_se(tally.both_plus[i][j], d)).powi(2);
                    }
                    pair_estimates[i][j] = behavior.joint[i][j];
                }
            }
            for i in 0..n {
                let trials: u64 = (0..n).map(|j| denom(i, j)).sum();
                let plus: u64 = (0..n).map(|j| tally.a_plus[i][j]).sum();
                if trials == 0 {
                    value = None;
                } else {
                    behavior.marg_a[i] = plus as f64 / trials as f64;
                    variance += (form.marg_a[i] * binomial_se(plus, trials)).powi(2);
                }
            }
            for j in 0..n {
                let trials: u64 = (0..n).map(|i| denom(i, j)).sum();
                let plus: u64 = (0..n).map(|i| tally.b_plus[i][j]).sum();
                if trials == 0 {
                    value = None;
                } else {
                    behavior.marg_b[j] = plus as f64 / trials as f64;
                    variance += (form.marg_b[j] * binomial_se(plus, trials)).powi(2);
                }
            }
            if value.is_some() {
                value = Some(form.evaluate(&behavior));
            }
            let report_marginals = (behavior.marg_a.clone(), behavior.marg_b.clone());
            return finish(config, tally, value, variance.sqrt(), pair_estimates, report_marginals);
        }
        FormKind::Correlator => {
            let mut correlators = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    let d = denom(i, j);
                    if d == 0 {
                        value = None;
                    } else {
                        let e = tally.product_sum[i][j] as f64 / d as f64;
                        correlators[i][j] = e;
                        variance +=
                            form.joint[i][j].powi(2) * (1.0 - e * e).max(0.0) / d as f64;
                    }
                    pair_estimates[i][j] = correlators[i][j];
                }
            }
            if value.is_some() {
                value = Some(form.evaluate_correlators(&correlators));
            }
            let marg_a = (0..n)
                .map(|i| {
                    let trials: u64 = (0..n).map(|j| denom(i, j)).sum();
                    let plus: u64 = (0..n).map(|j| tally.a_plus[i][j]).sum();
                    if trials == 0 { f64::NAN } else { plus as f64 / trials as f64 }
                })
                .collect();
            let marg_b = (0..n)
                .map(|j| {
                    let trials: u64 = (0..n).map(|i| denom(i, j)).sum();
                    let plus: u64 = (0..n).map(|i| tally.b_plus[i][j]).sum();
                    if trials == 0 { f64::NAN } else { plus as f64 / trials as f64 }
                })
                .collect();
            finish(config, tally, value, variance.sqrt(), pair_estimates, (marg_a, marg_b))
        }
    }
}

fn finish(
    config: &TrialConfig,
    tally: Tally,
    value: Option<f64>,
    std_error: f64,
    pair_estimates: Vec<Vec<f64>>,
    marginals: (Vec<f64>, Vec<f64>),
) -> Result<EstimateReport> {
    let kept: u64 = tally.kept.iter().flatten().sum();
    let pattern_counts = tally
        .patterns
        .iter()
        .map(|c| c.iter().map(|row| row.to_vec()).collect())
        .collect();
    Ok(EstimateReport {
        n_trials: config.n_trials,
        n_streams: config.n_streams,
        seed: config.seed,
        value,
        std_error: value.map(|_| std_error),
        pair_estimates,
        marginal_a: marginals.0,
        marginal_b: marginals.1,
        pattern_counts,
        kept_trials: kept,
        discarded_trials: tally.discarded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::ch_optimal_settings;
    use crate::thresholds::{components_for, expected_value};

    fn config(
        p: f64,
        eta_a: f64,
        eta_b: f64,
        convention: AssignmentConvention,
        n_trials: u64,
        seed: u64,
    ) -> TrialConfig {
        let settings = if convention.n_settings() == 3 {
            crate::quantum::i3322_optimal_settings()
        } else {
            ch_optimal_settings()
        };
        TrialConfig {
            source: SourceParams::new(p).unwrap(),
            detectors: DetectorModel::new(eta_a, eta_b).unwrap(),
            settings,
            convention,
            n_trials,
            seed,
            n_streams: 4,
        }
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let mut c = config(0.5, 1.0, 1.0, AssignmentConvention::ChFull, 10, 1);
        c.n_trials = 0;
        assert!(c.validate().is_err());
        let mut c = config(0.5, 1.0, 1.0, AssignmentConvention::I3322Plus, 10, 1);
        c.settings = ch_optimal_settings();
        assert!(c.validate().is_err());
    }

    #[test]
    fn postselected_chsh_hits_quantum_value() {
        let c = config(1.0, 1.0, 1.0, AssignmentConvention::Postselect, 1_000_000, 1);
        let r = run_trials(&c).unwrap();
        let value = r.value.unwrap();
        let se = r.std_error.unwrap();
        let target = 2.0 * std::f64::consts::SQRT_2 - 2.0;
        assert!((value - target).abs() < 5.0 * se, "{value} vs {target} (se {se})");
    }

    #[test]
    fn postselect_kept_fraction_is_p_at_unit_efficiency() {
        let c = config(0.5, 1.0, 1.0, AssignmentConvention::Postselect, 1_000_000, 2);
        let r = run_trials(&c).unwrap();
        let kept = r.kept_trials as f64;
        let n = c.n_trials as f64;
        let se = (0.5 * 0.5 / n).sqrt();
        assert!((kept / n - 0.5).abs() < 5.0 * se);
        // with perfect detectors no class II/III trial can be kept:
        // those events never produce one detection on each side
        for class in [1, 2] {
            for a in 0..3 {
                for b in 0..3 {
                    if a == 1 && b == 1 {
                        assert_eq!(r.pattern_counts[class][a][b], 0);
                    }
                }
            }
        }
    }

    #[test]
    fn full_count_matches_analytic_value() {
        for (p, ea, eb, conv) in [
            (0.5, 0.95, 0.95, AssignmentConvention::ChFull),
            (1.0, 0.9, 0.9, AssignmentConvention::ChshFull),
            (0.9, 1.0, 0.8, AssignmentConvention::I3322Plus),
        ] {
            let c = config(p, ea, eb, conv, 1_000_000, 3);
            let r = run_trials(&c).unwrap();
            let analytic = expected_value(&components_for(conv, &c.settings).unwrap(), p, ea, eb);
            let value = r.value.unwrap();
            let se = r.std_error.unwrap();
            assert!(
                (value - analytic).abs() < 5.0 * se,
                "{conv:?}: {value} vs {analytic} (se {se})"
            );
        }
    }

    #[test]
    fn identical_configs_identical_reports() {
        let c = config(0.6, 0.8, 0.9, AssignmentConvention::ChFull, 50_000, 42);
        let r1 = run_trials(&c).unwrap();
        let r2 = run_trials(&c).unwrap();
        assert_eq!(
            serde_json::to_string(&r1).unwrap(),
            serde_json::to_string(&r2).unwrap()
        );
    }

    #[test]
    fn stream_count_changes_only_statistics() {
        let mut c = config(0.7, 0.9, 0.85, AssignmentConvention::ChshFull, 400_000, 42);
        let r4 = run_trials(&c).unwrap();
        c.n_streams = 8;
        let r8 = run_trials(&c).unwrap();
        let (v4, v8) = (r4.value.unwrap(), r8.value.unwrap());
        let se = r4.std_error.unwrap().hypot(r8.std_error.unwrap());
        assert!((v4 - v8).abs() < 5.0 * se);
        assert_ne!(v4, v8, "different partitions should not be bit-identical");
    }

    #[test]
    fn pattern_counts_sum_to_n_trials() {
        let c = config(0.4, 0.6, 0.7, AssignmentConvention::ChFull, 100_000, 5);
        let r = run_trials(&c).unwrap();
        let total: u64 = r.pattern_counts.iter().flatten().flatten().sum();
        assert_eq!(total, c.n_trials);
        assert_eq!(r.kept_trials + r.discarded_trials, c.n_trials);
    }

    #[test]
    fn fair_sampling_insensitive_to_efficiency() {
        let target = 2.0 * std::f64::consts::SQRT_2 - 2.0;
        for (p, eta) in [(1.0, 1.0), (0.5, 0.5)] {
            let c = config(p, eta, eta, AssignmentConvention::FairSampling, 1_000_000, 6);
            let r = run_trials(&c).unwrap();
            let value = r.value.unwrap();
            let se = r.std_error.unwrap();
            assert!((value - target).abs() < 5.0 * se, "{value} at (p={p}, eta={eta})");
        }
    }

    #[test]
    fn zero_kept_is_flagged_not_divided() {
        // eta = 0 keeps nothing under postselection
        let c = config(0.5, 0.0, 0.0, AssignmentConvention::Postselect, 1000, 7);
        let r = run_trials(&c).unwrap();
        assert_eq!(r.value, None);
        assert_eq!(r.kept_trials, 0);
    }

    #[test]
    fn locality_audit_swapping_bob_settings() {
        // permuting Bob's setting list must leave Alice's assignment
        // stream bit-identical
        let base = config(0.6, 0.8, 0.9, AssignmentConvention::ChFull, 2000, 11);
        let swapped = {
            let mut c = base.clone();
            let b = c.settings.bob();
            c.settings = SettingsPair::new(c.settings.alice().to_vec(), vec![b[1], b[0]]).unwrap();
            c
        };
        let a_stream = |c: &TrialConfig| -> Vec<i8> {
            let mut rng = split_streams(c.seed, 1).remove(0);
            let n = c.settings.n_settings();
            (0..c.n_trials)
                .map(|_| {
                    let i = rng.gen_range(0..n);
                    let j = rng.gen_range(0..n);
                    let class = sample_event_class(&mut rng, c.source);
                    let record = simulate_detection(class, &c.settings, (i, j), c.detectors, &mut rng);
                    match assign(&record, c.convention) {
                        TrialAssignment::Kept { a, .. } => a,
                        TrialAssignment::Discarded => 0,
                    }
                })
                .collect()
        };
        assert_eq!(a_stream(&base), a_stream(&swapped));
    }

    #[test]
    fn split_streams_are_reproducible_and_distinct() {
        let mut s1 = split_streams(9, 3);
        let mut s2 = split_streams(9, 3);
        for (a, b) in s1.iter_mut().zip(s2.iter_mut()) {
            assert_eq!(a.gen::<u64>(), b.gen::<u64>());
        }
        let mut s = split_streams(9, 2);
        let (x, y) = (s[0].gen::<u64>(), s[1].gen::<u64>());
        assert_ne!(x, y);
    }

    #[test]
    fn standard_error_positive_and_shrinking() {
        let small = run_trials(&config(0.8, 0.9, 0.9, AssignmentConvention::ChFull, 10_000, 1)).unwrap();
        let large = run_trials(&config(0.8, 0.9, 0.9, AssignmentConvention::ChFull, 640_000, 1)).unwrap();
        assert!(small.std_error.unwrap() > 0.0);
        assert!(large.std_error.unwrap() < small.std_error.unwrap());
    }
}

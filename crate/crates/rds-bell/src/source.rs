//! Random destination source and detector model.
//!
//! Each trial the source emits a photon pair: with probability p one photon
//! goes to each observer (carrying the singlet), with probability (1-p)/2
//! both go to Alice, and with probability (1-p)/2 both go to Bob. A
//! same-side pair is an H,V pair with orthogonal polarizations and no
//! entanglement between the two photons. Detectors are photon-number
//! resolving on both analyzer ports; each photon on side X is registered
//! independently with probability eta_X, independent of the setting.

use rand::Rng;

use crate::error::{Error, Result};
use crate::quantum::{joint_outcome_probs, make_singlet, AnalyzerSetting, SettingsPair};

/// Splitting probability of the random destination source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceParams {
    p: f64,
}

impl SourceParams {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::OutOfRange { name: "p", value: p });
        }
        Ok(Self { p })
    }

    /// Source behind a beam splitter of transmittance t: p = 2t(1-t).
    pub fn from_transmittance(t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) || !t.is_finite() {
            return Err(Error::OutOfRange { name: "T", value: t });
        }
        Self::new(2.0 * t * (1.0 - t))
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

/// Where the two photons went.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventClass {
    /// One photon to each side, carrying the singlet.
    Split,
    /// Both photons to Alice, orthogonally polarized H and V.
    BothAlice,
    /// Both photons to Bob, orthogonally polarized H and V.
    BothBob,
}

impl EventClass {
    pub const ALL: [EventClass; 3] = [Self::Split, Self::BothAlice, Self::BothBob];

    /// Table index 0/1/2 for events I/II/III.
    pub fn index(&self) -> usize {
        match self {
            Self::Split => 0,
            Self::BothAlice => 1,
            Self::BothBob => 2,
        }
    }
}

/// Per-side detection efficiencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    pub eta_a: f64,
    pub eta_b: f64,
}

impl DetectorModel {
    pub fn new(eta_a: f64, eta_b: f64) -> Result<Self> {
        for (name, value) in [("eta_A", eta_a), ("eta_B", eta_b)] {
            if !(0.0..=1.0).contains(&value) || !value.is_finite() {
                return Err(Error::OutOfRange { name, value });
            }
        }
        Ok(Self { eta_a, eta_b })
    }
}

/// What one trial produced at the detectors.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRecord {
    pub event_class: EventClass,
    /// Indices (i, j) of the settings each side chose this trial.
    pub settings_used: (usize, usize),
    pub n_a: u8,
    pub n_b: u8,
    pub outcomes_a: Vec<i8>,
    pub outcomes_b: Vec<i8>,
}

/// Draws the event class with probabilities (p, (1-p)/2, (1-p)/2).
pub fn sample_event_class<R: Rng + ?Sized>(rng: &mut R, params: SourceParams) -> EventClass {
    let u: f64 = rng.gen();
    if u < params.p() {
        EventClass::Split
    } else if u < params.p() + (1.0 - params.p()) / 2.0 {
        EventClass::BothAlice
    } else {
        EventClass::BothBob
    }
}

fn draw_sign<R: Rng + ?Sized>(rng: &mut R, p_plus: f64) -> i8 {
    if rng.gen::<f64>() < p_plus {
        1
    } else {
        -1
    }
}

/// Outcome of measuring one photon of an H,V pair at analyzer angle theta:
/// an H photon gives +1 with cos^2(theta), a V photon with sin^2(theta).
fn same_side_outcome<R: Rng + ?Sized>(rng: &mut R, is_h: bool, theta: AnalyzerSetting) -> i8 {
    let c2 = theta.angle().cos().powi(2);
    draw_sign(rng, if is_h { c2 } else { 1.0 - c2 })
}

/// Runs the detector model on one emitted event.
pub fn simulate_detection<R: Rng + ?Sized>(
    event: EventClass,
    settings: &SettingsPair,
    chosen: (usize, usize),
    detectors: DetectorModel,
    rng: &mut R,
) -> DetectionRecord {
    let (i, j) = chosen;
    let theta_a = settings.alice()[i];
    let theta_b = settings.bob()[j];
    let mut record = DetectionRecord {
        event_class: event,
        settings_used: chosen,
        n_a: 0,
        n_b: 0,
        outcomes_a: Vec::new(),
        outcomes_b: Vec::new(),
    };

    match event {
        EventClass::Split => {
            let det_a = rng.gen::<f64>() < detectors.eta_a;
            let det_b = rng.gen::<f64>() < detectors.eta_b;
            match (det_a, det_b) {
                (true, true) => {
                    // Alice draws from her marginal first, Bob conditionally:
                    // her random-stream consumption never depends on Bob's
                    // setting, which keeps the assignment audit exact.
                    let p = joint_outcome_probs(&make_singlet(), theta_a, theta_b);
                    let a = draw_sign(rng, p.pp + p.pm);
                    let b_plus_given_a = if a == 1 {
                        p.pp / (p.pp + p.pm)
                    } else {
                        p.mp / (p.mp + p.mm)
                    };
                    let b = draw_sign(rng, b_plus_given_a);
                    record.n_a = 1;
                    record.n_b = 1;
                    record.outcomes_a.push(a);
                    record.outcomes_b.push(b);
                }
                (true, false) => {
                    // singlet marginal is 1/2 for every setting
                    record.n_a = 1;
                    record.outcomes_a.push(draw_sign(rng, 0.5));
                }
                (false, true) => {
                    record.n_b = 1;
                    record.outcomes_b.push(draw_sign(rng, 0.5));
                }
                (false, false) => {}
            }
        }
        EventClass::BothAlice | EventClass::BothBob => {
            let (eta, theta) = if event == EventClass::BothAlice {
                (detectors.eta_a, theta_a)
            } else {
                (detectors.eta_b, theta_b)
            };
            let det_h = rng.gen::<f64>() < eta;
            let det_v = rng.gen::<f64>() < eta;
            let mut outcomes = Vec::new();
            match (det_h, det_v) {
                (true, true) => {
                    outcomes.push(same_side_outcome(rng, true, theta));
                    outcomes.push(same_side_outcome(rng, false, theta));
                }
                (true, false) | (false, true) => {
                    // which photon survived is uniform: H or V without replacement
                    outcomes.push(same_side_outcome(rng, det_h, theta));
                }
                (false, false) => {}
            }
            if event == EventClass::BothAlice {
                record.n_a = outcomes.len() as u8;
                record.outcomes_a = outcomes;
            } else {
                record.n_b = outcomes.len() as u8;
                record.outcomes_b = outcomes;
            }
        }
    }
    record
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn settings() -> SettingsPair {
        crate::quantum::ch_optimal_settings()
    }

    /// |observed - expected| must stay within 5 binomial sigma.
    fn assert_within_5_sigma(count: u64, n: u64, p: f64) {
        let mean = n as f64 * p;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt().max(1e-9);
        assert!(
            (count as f64 - mean).abs() < 5.0 * sigma,
            "count {count} vs mean {mean} (sigma {sigma})"
        );
    }

    #[test]
    fn from_transmittance_values() {
        assert_abs_diff_eq!(SourceParams::from_transmittance(0.5).unwrap().p(), 0.5);
        assert_abs_diff_eq!(SourceParams::from_transmittance(0.0).unwrap().p(), 0.0);
        assert_abs_diff_eq!(SourceParams::from_transmittance(1.0).unwrap().p(), 0.0);
        assert_abs_diff_eq!(SourceParams::from_transmittance(0.25).unwrap().p(), 0.375);
        assert!(SourceParams::from_transmittance(1.5).is_err());
        assert!(SourceParams::from_transmittance(-0.1).is_err());
    }

    #[test]
    fn event_class_extremes() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let all_split = SourceParams::new(1.0).unwrap();
        let never_split = SourceParams::new(0.0).unwrap();
        for _ in 0..1000 {
            assert_eq!(sample_event_class(&mut rng, all_split), EventClass::Split);
            assert_ne!(sample_event_class(&mut rng, never_split), EventClass::Split);
        }
    }

    #[test]
    fn event_class_frequencies() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let n = 1_000_000u64;
        for p in [0.0, 0.5, 0.8] {
            let params = SourceParams::new(p).unwrap();
            let mut counts = [0u64; 3];
            for _ in 0..n {
                counts[sample_event_class(&mut rng, params).index()] += 1;
            }
            assert_within_5_sigma(counts[0], n, p);
            assert_within_5_sigma(counts[1], n, (1.0 - p) / 2.0);
            assert_within_5_sigma(counts[2], n, (1.0 - p) / 2.0);
        }
    }

    #[test]
    fn perfect_detection_counts() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let det = DetectorModel::new(1.0, 1.0).unwrap();
        let s = settings();
        for _ in 0..200 {
            let r = simulate_detection(EventClass::Split, &s, (0, 1), det, &mut rng);
            assert_eq!((r.n_a, r.n_b), (1, 1));
            assert_eq!(r.outcomes_a.len(), 1);
            assert_eq!(r.outcomes_b.len(), 1);
            let r = simulate_detection(EventClass::BothAlice, &s, (1, 0), det, &mut rng);
            assert_eq!((r.n_a, r.n_b), (2, 0));
            let r = simulate_detection(EventClass::BothBob, &s, (0, 0), det, &mut rng);
            assert_eq!((r.n_a, r.n_b), (0, 2));
        }
    }

    #[test]
    fn class_two_single_detection_branch_weight() {
        // frequency of n_A = 1 must be 2 eta (1 - eta)
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let eta = 0.7;
        let det = DetectorModel::new(eta, 1.0).unwrap();
        let s = settings();
        let n = 1_000_000u64;
        let mut counts = [0u64; 3];
        for _ in 0..n {
            let r = simulate_detection(EventClass::BothAlice, &s, (0, 0), det, &mut rng);
            counts[r.n_a as usize] += 1;
            assert_eq!(r.n_b, 0);
        }
        assert_within_5_sigma(counts[0], n, (1.0 - eta) * (1.0 - eta));
        assert_within_5_sigma(counts[1], n, 2.0 * eta * (1.0 - eta));
        assert_within_5_sigma(counts[2], n, eta * eta);
    }

    #[test]
    fn split_detection_pattern_weights() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let (eta_a, eta_b) = (0.8, 0.6);
        let det = DetectorModel::new(eta_a, eta_b).unwrap();
        let s = settings();
        let n = 1_000_000u64;
        let mut counts = [[0u64; 2]; 2];
        for _ in 0..n {
            let r = simulate_detection(EventClass::Split, &s, (0, 0), det, &mut rng);
            counts[r.n_a as usize][r.n_b as usize] += 1;
        }
        assert_within_5_sigma(counts[1][1], n, eta_a * eta_b);
        assert_within_5_sigma(counts[1][0], n, eta_a * (1.0 - eta_b));
        assert_within_5_sigma(counts[0][1], n, (1.0 - eta_a) * eta_b);
        assert_within_5_sigma(counts[0][0], n, (1.0 - eta_a) * (1.0 - eta_b));
    }

    #[test]
    fn same_side_single_detection_is_unbiased() {
        // conditional on one detection, P(+1) = 1/2 for every setting
        let det = DetectorModel::new(0.5, 0.5).unwrap();
        for (seed, angle) in [(17u64, 0.0), (18, 0.3), (19, 1.2)] {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let s = SettingsPair::from_angles(&[angle, 0.5], &[0.1, 0.9]).unwrap();
            let mut plus = 0u64;
            let mut singles = 0u64;
            for _ in 0..1_000_000 {
                let r = simulate_detection(EventClass::BothAlice, &s, (0, 0), det, &mut rng);
                if r.n_a == 1 {
                    singles += 1;
                    if r.outcomes_a[0] == 1 {
                        plus += 1;
                    }
                }
            }
            assert_within_5_sigma(plus, singles, 0.5);
        }
    }

    #[test]
    fn identical_seeds_identical_streams() {
        let det = DetectorModel::new(0.7, 0.9).unwrap();
        let params = SourceParams::new(0.6).unwrap();
        let s = settings();
        let run = || {
            let mut rng = ChaCha12Rng::seed_from_u64(99);
            (0..500)
                .map(|_| {
                    let class = sample_event_class(&mut rng, params);
                    simulate_detection(class, &s, (1, 0), det, &mut rng)
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn record_invariants_hold() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let det = DetectorModel::new(0.5, 0.8).unwrap();
        let params = SourceParams::new(0.4).unwrap();
        let s = settings();
        for _ in 0..10_000 {
            let class = sample_event_class(&mut rng, params);
            let r = simulate_detection(class, &s, (0, 1), det, &mut rng);
            assert_eq!(r.outcomes_a.len(), r.n_a as usize);
            assert_eq!(r.outcomes_b.len(), r.n_b as usize);
            assert!(r.n_a + r.n_b <= 2);
            match class {
                EventClass::Split => assert!(r.n_a <= 1 && r.n_b <= 1),
                EventClass::BothAlice => assert_eq!(r.n_b, 0),
                EventClass::BothBob => assert_eq!(r.n_a, 0),
            }
        }
    }
}

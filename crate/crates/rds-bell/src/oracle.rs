//! Exhaustive branch-tree evaluation of a full-counting Bell experiment.
//!
//! Enumerates every (event class, detection pattern, outcome) leaf with its
//! exact probability, pushes each leaf through the record-level assignment,
//! and evaluates the inequality on the resulting behavior. This is an
//! independent route to the same number as the component decomposition and
//! is used to cross-check it.

use crate::error::{Error, Result};
use crate::inequalities::{assign, AssignmentConvention, Behavior, FormKind, TrialAssignment};
use crate::quantum::{joint_outcome_probs, make_singlet, SettingsPair};
use crate::source::{DetectionRecord, EventClass};

fn record(
    class: EventClass,
    chosen: (usize, usize),
    outcomes_a: Vec<i8>,
    outcomes_b: Vec<i8>,
) -> DetectionRecord {
    DetectionRecord {
        event_class: class,
        settings_used: chosen,
        n_a: outcomes_a.len() as u8,
        n_b: outcomes_b.len() as u8,
        outcomes_a,
        outcomes_b,
    }
}

/// All leaves for one setting pair, as (probability, record).
fn leaves(
    settings: &SettingsPair,
    chosen: (usize, usize),
    p: f64,
    eta_a: f64,
    eta_b: f64,
) -> Vec<(f64, DetectionRecord)> {
    let (i, j) = chosen;
    let theta_a = settings.alice()[i];
    let theta_b = settings.bob()[j];
    let mut out = Vec::new();

    // class I: split pair carrying the singlet
    let joint = joint_outcome_probs(&make_singlet(), theta_a, theta_b);
    let both = p * eta_a * eta_b;
    for (pr, a, b) in [
        (joint.pp, 1, 1),
        (joint.pm, 1, -1),
        (joint.mp, -1, 1),
        (joint.mm, -1, -1),
    ] {
        out.push((both * pr, record(EventClass::Split, chosen, vec![a], vec![b])));
    }
    for s in [1i8, -1] {
        out.push((
            p * eta_a * (1.0 - eta_b) * 0.5,
            record(EventClass::Split, chosen, vec![s], vec![]),
        ));
        out.push((
            p * (1.0 - eta_a) * eta_b * 0.5,
            record(EventClass::Split, chosen, vec![], vec![s]),
        ));
    }
    out.push((
        p * (1.0 - eta_a) * (1.0 - eta_b),
        record(EventClass::Split, chosen, vec![], vec![]),
    ));

    // classes II and III: an H,V pair on one side
    for (class, eta, theta) in [
        (EventClass::BothAlice, eta_a, theta_a),
        (EventClass::BothBob, eta_b, theta_b),
    ] {
        let w = (1.0 - p) / 2.0;
        let c2 = theta.angle().cos().powi(2);
        let make = |outcomes: Vec<i8>| match class {
            EventClass::BothAlice => record(class, chosen, outcomes, vec![]),
            _ => record(class, chosen, vec![], outcomes),
        };
        // both photons detected: H gives +1 with cos^2, V with sin^2
        for (ph, h) in [(c2, 1i8), (1.0 - c2, -1)] {
            for (pv, v) in [(1.0 - c2, 1i8), (c2, -1)] {
                out.push((w * eta * eta * ph * pv, make(vec![h, v])));
            }
        }
        // one photon detected: the survivor is H or V, each path eta(1-eta)
        for (pp, s) in [(c2, 1i8), (1.0 - c2, -1)] {
            out.push((w * eta * (1.0 - eta) * pp, make(vec![s])));
        }
        for (pp, s) in [(1.0 - c2, 1i8), (c2, -1)] {
            out.push((w * eta * (1.0 - eta) * pp, make(vec![s])));
        }
        out.push((w * (1.0 - eta) * (1.0 - eta), make(vec![])));
    }
    out
}

fn plus_probs(
    convention: AssignmentConvention,
    settings: &SettingsPair,
    chosen: (usize, usize),
    p: f64,
    eta_a: f64,
    eta_b: f64,
) -> (f64, f64, f64, f64) {
    let mut joint_pp = 0.0;
    let mut marg_a = 0.0;
    let mut marg_b = 0.0;
    let mut correlator = 0.0;
    for (prob, rec) in leaves(settings, chosen, p, eta_a, eta_b) {
        if let TrialAssignment::Kept { a, b } = assign(&rec, convention) {
            if a == 1 && b == 1 {
                joint_pp += prob;
            }
            if a == 1 {
                marg_a += prob;
            }
            if b == 1 {
                marg_b += prob;
            }
            correlator += prob * f64::from(a) * f64::from(b);
        }
    }
    (joint_pp, marg_a, marg_b, correlator)
}

/// Average inequality value computed by full enumeration. Full-counting
/// conventions only.
pub fn exhaustive_expected_value(
    convention: AssignmentConvention,
    settings: &SettingsPair,
    p: f64,
    eta_a: f64,
    eta_b: f64,
) -> Result<f64> {
    if !convention.is_full_counting() {
        return Err(Error::InvalidConfig(
            "exhaustive average is defined for full-counting conventions".into(),
        ));
    }
    if settings.n_settings() != convention.n_settings() {
        return Err(Error::InvalidSettings(
            "settings length does not match the convention".into(),
        ));
    }
    let n = settings.n_settings();
    let form = convention.form();
    match form.kind {
        FormKind::Probability => {
            let mut behavior = Behavior {
                joint: vec![vec![0.0; n]; n],
                marg_a: vec![0.0; n],
                marg_b: vec![0.0; n],
            };
            for i in 0..n {
                for j in 0..n {
                    let (pp, ma, mb, _) = plus_probs(convention, settings, (i, j), p, eta_a, eta_b);
                    behavior.joint[i][j] = pp;
                    // local assignments: marginals are j- (resp. i-) independent
                    if j == 0 {
                        behavior.marg_a[i] = ma;
                    }
                    if i == 0 {
                        behavior.marg_b[j] = mb;
                    }
                }
            }
            Ok(form.evaluate(&behavior))
        }
        FormKind::Correlator => {
            let mut e = vec![vec![0.0; n]; n];
            for (i, row) in e.iter_mut().enumerate() {
                for (j, entry) in row.iter_mut().enumerate() {
                    let (_, _, _, corr) = plus_probs(convention, settings, (i, j), p, eta_a, eta_b);
                    *entry = corr;
                }
            }
            Ok(form.evaluate_correlators(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::ch_optimal_settings;
    use crate::thresholds::{components_for, expected_value};
    use approx::assert_abs_diff_eq;

    #[test]
    fn leaf_probabilities_sum_to_one() {
        let s = ch_optimal_settings();
        for (p, ea, eb) in [(0.3, 0.6, 0.9), (1.0, 1.0, 1.0), (0.0, 0.2, 0.4)] {
            let total: f64 = leaves(&s, (1, 0), p, ea, eb).iter().map(|(w, _)| w).sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn matches_component_decomposition_at_fixed_points() {
        let s = ch_optimal_settings();
        for convention in [AssignmentConvention::ChFull, AssignmentConvention::ChshFull] {
            let c = components_for(convention, &s).unwrap();
            for (p, ea, eb) in [(1.0, 1.0, 1.0), (0.5, 0.9, 0.95), (0.2, 0.4, 0.7)] {
                assert_abs_diff_eq!(
                    exhaustive_expected_value(convention, &s, p, ea, eb).unwrap(),
                    expected_value(&c, p, ea, eb),
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn i3322_route_agrees_too() {
        let s = crate::quantum::i3322_optimal_settings();
        for variant in [AssignmentConvention::I3322Plus, AssignmentConvention::I3322Minus] {
            let c = components_for(variant, &s).unwrap();
            for (p, ea, eb) in [(1.0, 1.0, 1.0), (0.9, 1.0, 0.7), (0.3, 0.8, 0.6)] {
                assert_abs_diff_eq!(
                    exhaustive_expected_value(variant, &s, p, ea, eb).unwrap(),
                    expected_value(&c, p, ea, eb),
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn rejects_postselecting_conventions() {
        let s = ch_optimal_settings();
        assert!(
            exhaustive_expected_value(AssignmentConvention::Postselect, &s, 0.5, 1.0, 1.0).is_err()
        );
    }
}

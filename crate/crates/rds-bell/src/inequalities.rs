//! Bell functionals (CH, CHSH, I3322), the outcome-assignment conventions
//! for full-counting analysis, and a brute-force deterministic-strategy
//! oracle for the classical bounds.

use crate::error::{Error, Result};
use crate::quantum::{joint_outcome_probs, marginal_plus_prob, Side, SettingsPair, TwoQubitState};
use crate::source::DetectionRecord;

/// Whether a functional is written over +1 probabilities or correlators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormKind {
    Probability,
    Correlator,
}

/// Coefficients of a Bell functional plus its local bound.
///
/// Probability form: sum_ij joint[i][j] p(a_i, b_j) + sum_i marg_a[i] p(a_i)
/// + sum_j marg_b[j] p(b_j) + offset. Correlator form: sum_ij joint[i][j]
/// <a_i b_j> + offset.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityForm {
    pub kind: FormKind,
    pub joint: Vec<Vec<f64>>,
    pub marg_a: Vec<f64>,
    pub marg_b: Vec<f64>,
    pub offset: f64,
    pub local_bound: f64,
}

impl InequalityForm {
    pub fn n_settings_a(&self) -> usize {
        self.joint.len()
    }

    pub fn n_settings_b(&self) -> usize {
        self.joint[0].len()
    }

    /// Evaluates a probability-form functional on a behavior.
    pub fn evaluate(&self, behavior: &Behavior) -> f64 {
        debug_assert_eq!(self.kind, FormKind::Probability);
        let mut value = self.offset;
        for i in 0..self.n_settings_a() {
            value += self.marg_a[i] * behavior.marg_a[i];
            for j in 0..self.n_settings_b() {
                value += self.joint[i][j] * behavior.joint[i][j];
            }
        }
        for j in 0..self.n_settings_b() {
            value += self.marg_b[j] * behavior.marg_b[j];
        }
        value
    }

    /// Evaluates a correlator-form functional on a correlator table.
    pub fn evaluate_correlators(&self, correlators: &[Vec<f64>]) -> f64 {
        debug_assert_eq!(self.kind, FormKind::Correlator);
        let mut value = self.offset;
        for i in 0..self.n_settings_a() {
            for j in 0..self.n_settings_b() {
                value += self.joint[i][j] * correlators[i][j];
            }
        }
        value
    }

    /// Value of the functional on one deterministic local strategy
    /// (each side assigns a fixed +-1 to each of its settings).
    pub fn evaluate_deterministic(&self, a: &[i8], b: &[i8]) -> f64 {
        match self.kind {
            FormKind::Probability => {
                let mut value = self.offset;
                for i in 0..self.n_settings_a() {
                    let pa = if a[i] == 1 { 1.0 } else { 0.0 };
                    value += self.marg_a[i] * pa;
                    for j in 0..self.n_settings_b() {
                        let pb = if b[j] == 1 { 1.0 } else { 0.0 };
                        value += self.joint[i][j] * pa * pb;
                    }
                }
                for j in 0..self.n_settings_b() {
                    value += self.marg_b[j] * if b[j] == 1 { 1.0 } else { 0.0 };
                }
                value
            }
            FormKind::Correlator => {
                let mut value = self.offset;
                for i in 0..self.n_settings_a() {
                    for j in 0..self.n_settings_b() {
                        value += self.joint[i][j] * f64::from(a[i]) * f64::from(b[j]);
                    }
                }
                value
            }
        }
    }
}

/// Joint and marginal +1 probabilities for every setting combination.
#[derive(Debug, Clone, PartialEq)]
pub struct Behavior {
    pub joint: Vec<Vec<f64>>,
    pub marg_a: Vec<f64>,
    pub marg_b: Vec<f64>,
}

impl Behavior {
    pub fn validate(&self) -> Result<()> {
        for (i, row) in self.joint.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::OutOfRange { name: "joint", value: p });
                }
                if p > self.marg_a[i] + 1e-12 || p > self.marg_b[j] + 1e-12 {
                    return Err(Error::InvalidConfig(format!(
                        "joint ({i},{j}) exceeds a marginal"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Quantum behavior of a state at the given settings.
pub fn quantum_behavior(state: &TwoQubitState, settings: &SettingsPair) -> Behavior {
    let joint = settings
        .alice()
        .iter()
        .map(|&a| {
            settings
                .bob()
                .iter()
                .map(|&b| joint_outcome_probs(state, a, b).pp)
                .collect()
        })
        .collect();
    Behavior {
        joint,
        marg_a: settings
            .alice()
            .iter()
            .map(|&a| marginal_plus_prob(state, Side::Alice, a))
            .collect(),
        marg_b: settings
            .bob()
            .iter()
            .map(|&b| marginal_plus_prob(state, Side::Bob, b))
            .collect(),
    }
}

/// Clauser-Horne functional: p(a1,b1) + p(a2,b1) + p(a1,b2) - p(a2,b2)
/// - p(a1) - p(b1), local bound 0.
pub fn ch_form() -> InequalityForm {
    InequalityForm {
        kind: FormKind::Probability,
        joint: vec![vec![1.0, 1.0], vec![1.0, -1.0]],
        marg_a: vec![-1.0, 0.0],
        marg_b: vec![-1.0, 0.0],
        offset: 0.0,
        local_bound: 0.0,
    }
}

/// CHSH functional <a1b1> + <a2b1> + <a1b2> - <a2b2> - 2, local bound 0.
pub fn chsh_form() -> InequalityForm {
    InequalityForm {
        kind: FormKind::Correlator,
        joint: vec![vec![1.0, 1.0], vec![1.0, -1.0]],
        marg_a: vec![0.0, 0.0],
        marg_b: vec![0.0, 0.0],
        offset: -2.0,
        local_bound: 0.0,
    }
}

/// Collins-Gisin I3322 functional, local bound 0.
pub fn i3322_form() -> InequalityForm {
    InequalityForm {
        kind: FormKind::Probability,
        joint: vec![
            vec![1.0, 1.0, 1.0],
            vec![1.0, 1.0, -1.0],
            vec![1.0, -1.0, 0.0],
        ],
        marg_a: vec![-2.0, -1.0, 0.0],
        marg_b: vec![-1.0, 0.0, 0.0],
        offset: 0.0,
        local_bound: 0.0,
    }
}

/// Result of the exhaustive local-hidden-variable search.
#[derive(Debug, Clone, PartialEq)]
pub struct LhvMax {
    pub value: f64,
    /// Every deterministic strategy attaining the maximum.
    pub maximizers: Vec<(Vec<i8>, Vec<i8>)>,
}

/// Exact maximum of a functional over all deterministic local strategies
/// (2^n_A x 2^n_B assignments of +-1).
pub fn lhv_max(form: &InequalityForm) -> LhvMax {
    let na = form.n_settings_a();
    let nb = form.n_settings_b();
    let signs = |bits: usize, n: usize| -> Vec<i8> {
        (0..n).map(|k| if bits >> k & 1 == 1 { 1 } else { -1 }).collect()
    };
    let mut best = f64::NEG_INFINITY;
    let mut maximizers = Vec::new();
    for abits in 0..1usize << na {
        let a = signs(abits, na);
        for bbits in 0..1usize << nb {
            let b = signs(bbits, nb);
            let value = form.evaluate_deterministic(&a, &b);
            if value > best + 1e-12 {
                best = value;
                maximizers.clear();
                maximizers.push((a.clone(), b));
            } else if (value - best).abs() <= 1e-12 {
                maximizers.push((a.clone(), b));
            }
        }
    }
    LhvMax { value: best, maximizers }
}

/// How detection records are turned into inequality contributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssignmentConvention {
    /// CH full counting: +1 iff exactly one photon detected with outcome +1.
    ChFull,
    /// CHSH full counting: zero or two detections count as +1.
    ChshFull,
    /// I3322 full counting, zero-or-two mapped to +1.
    I3322Plus,
    /// I3322 full counting, zero-or-two mapped to -1.
    I3322Minus,
    /// Keep only trials where each side detected exactly one photon.
    Postselect,
    /// Keep coincidences and normalize over the kept sample.
    FairSampling,
}

impl AssignmentConvention {
    pub const ALL: [AssignmentConvention; 6] = [
        Self::ChFull,
        Self::ChshFull,
        Self::I3322Plus,
        Self::I3322Minus,
        Self::Postselect,
        Self::FairSampling,
    ];

    /// Settings per side required by the convention's inequality.
    pub fn n_settings(&self) -> usize {
        match self {
            Self::I3322Plus | Self::I3322Minus => 3,
            _ => 2,
        }
    }

    pub fn form(&self) -> InequalityForm {
        match self {
            Self::ChFull => ch_form(),
            Self::I3322Plus | Self::I3322Minus => i3322_form(),
            Self::ChshFull | Self::Postselect | Self::FairSampling => chsh_form(),
        }
    }

    /// True for conventions that keep every trial.
    pub fn is_full_counting(&self) -> bool {
        !matches!(self, Self::Postselect | Self::FairSampling)
    }

    /// Maps one side's detection count and (single-detection) outcome to
    /// a +-1 value, or None to discard the trial.
    fn assign_side(&self, n: u8, single_outcome: Option<i8>) -> Option<i8> {
        match self {
            Self::ChFull => Some(if n == 1 && single_outcome == Some(1) { 1 } else { -1 }),
            Self::ChshFull | Self::I3322Plus => Some(match n {
                1 => single_outcome.expect("one detection carries an outcome"),
                _ => 1,
            }),
            Self::I3322Minus => Some(match n {
                1 => single_outcome.expect("one detection carries an outcome"),
                _ => -1,
            }),
            Self::Postselect | Self::FairSampling => {
                if n == 1 {
                    Some(single_outcome.expect("one detection carries an outcome"))
                } else {
                    None
                }
            }
        }
    }
}

/// Per-trial result of applying a convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialAssignment {
    Kept { a: i8, b: i8 },
    Discarded,
}

/// Applies a convention to one record. The A-side value depends only on
/// Alice's local data (count, outcome, chosen setting), never on Bob's.
pub fn assign(record: &DetectionRecord, convention: AssignmentConvention) -> TrialAssignment {
    let single = |outcomes: &[i8]| outcomes.first().copied();
    let a = convention.assign_side(record.n_a, single(&record.outcomes_a));
    let b = convention.assign_side(record.n_b, single(&record.outcomes_b));
    match (a, b) {
        (Some(a), Some(b)) => TrialAssignment::Kept { a, b },
        _ => TrialAssignment::Discarded,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{ch_optimal_settings, make_singlet};
    use crate::source::EventClass;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn zero_behavior(n: usize) -> Behavior {
        Behavior {
            joint: vec![vec![0.0; n]; n],
            marg_a: vec![0.0; n],
            marg_b: vec![0.0; n],
        }
    }

    #[test]
    fn ch_on_zero_behavior_is_zero() {
        assert_abs_diff_eq!(ch_form().evaluate(&zero_behavior(2)), 0.0);
        assert_abs_diff_eq!(i3322_form().evaluate(&zero_behavior(3)), 0.0);
    }

    #[test]
    fn ch_singlet_optimal_value() {
        let behavior = quantum_behavior(&make_singlet(), &ch_optimal_settings());
        let value = ch_form().evaluate(&behavior);
        assert_abs_diff_eq!(value, std::f64::consts::FRAC_1_SQRT_2 - 0.5, epsilon = 1e-12);
    }

    #[test]
    fn ch_all_plus_strategy_is_zero() {
        let v = ch_form().evaluate_deterministic(&[1, 1], &[1, 1]);
        assert_abs_diff_eq!(v, 0.0);
    }

    #[test]
    fn chsh_extremes() {
        let form = chsh_form();
        assert_abs_diff_eq!(form.evaluate_correlators(&vec![vec![1.0, 1.0], vec![1.0, 1.0]]), 0.0);
        assert_abs_diff_eq!(form.evaluate_correlators(&vec![vec![0.0; 2]; 2]), -2.0);
    }

    #[test]
    fn chsh_singlet_optimal_value() {
        let settings = ch_optimal_settings();
        let singlet = make_singlet();
        let correlators: Vec<Vec<f64>> = settings
            .alice()
            .iter()
            .map(|&a| {
                settings
                    .bob()
                    .iter()
                    .map(|&b| crate::quantum::correlator(&singlet, a, b))
                    .collect()
            })
            .collect();
        let value = chsh_form().evaluate_correlators(&correlators);
        assert_abs_diff_eq!(value, 2.0 * std::f64::consts::SQRT_2 - 2.0, epsilon = 1e-12);
    }

    #[test]
    fn lhv_max_is_zero_for_all_three_forms() {
        let ch = lhv_max(&ch_form());
        assert_abs_diff_eq!(ch.value, 0.0);
        assert!(!ch.maximizers.is_empty());

        let chsh = lhv_max(&chsh_form());
        assert_abs_diff_eq!(chsh.value, 0.0);

        let i3322 = lhv_max(&i3322_form());
        assert_abs_diff_eq!(i3322.value, 0.0);
    }

    fn record(n_a: u8, outcomes_a: Vec<i8>, n_b: u8, outcomes_b: Vec<i8>) -> DetectionRecord {
        DetectionRecord {
            event_class: EventClass::Split,
            settings_used: (0, 0),
            n_a,
            n_b,
            outcomes_a,
            outcomes_b,
        }
    }

    #[test]
    fn chsh_double_detection_maps_to_plus_plus() {
        let r = record(2, vec![1, -1], 0, vec![]);
        assert_eq!(
            assign(&r, AssignmentConvention::ChshFull),
            TrialAssignment::Kept { a: 1, b: 1 }
        );
    }

    #[test]
    fn ch_single_plus_contributes_to_marginal_only() {
        let r = record(1, vec![1], 0, vec![]);
        assert_eq!(
            assign(&r, AssignmentConvention::ChFull),
            TrialAssignment::Kept { a: 1, b: -1 }
        );
        let r = record(1, vec![-1], 0, vec![]);
        assert_eq!(
            assign(&r, AssignmentConvention::ChFull),
            TrialAssignment::Kept { a: -1, b: -1 }
        );
    }

    #[test]
    fn ch_no_detection_contributes_nothing() {
        let r = record(0, vec![], 0, vec![]);
        assert_eq!(
            assign(&r, AssignmentConvention::ChFull),
            TrialAssignment::Kept { a: -1, b: -1 }
        );
    }

    #[test]
    fn i3322_minus_flips_the_no_detection_value() {
        let r = record(0, vec![], 2, vec![1, 1]);
        assert_eq!(
            assign(&r, AssignmentConvention::I3322Plus),
            TrialAssignment::Kept { a: 1, b: 1 }
        );
        assert_eq!(
            assign(&r, AssignmentConvention::I3322Minus),
            TrialAssignment::Kept { a: -1, b: -1 }
        );
    }

    #[test]
    fn postselect_keeps_only_one_one() {
        let kept = record(1, vec![1], 1, vec![-1]);
        assert_eq!(
            assign(&kept, AssignmentConvention::Postselect),
            TrialAssignment::Kept { a: 1, b: -1 }
        );
        for r in [
            record(0, vec![], 1, vec![1]),
            record(2, vec![1, -1], 0, vec![]),
            record(0, vec![], 0, vec![]),
        ] {
            assert_eq!(assign(&r, AssignmentConvention::Postselect), TrialAssignment::Discarded);
        }
    }

    #[test]
    fn quantum_ch_never_exceeds_tsirelson_gap() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(1);
        let singlet = make_singlet();
        let form = ch_form();
        let max = std::f64::consts::FRAC_1_SQRT_2 - 0.5;
        for _ in 0..10_000 {
            let settings = SettingsPair::from_angles(
                &[rng.gen_range(0.0..std::f64::consts::PI), rng.gen_range(0.0..std::f64::consts::PI)],
                &[rng.gen_range(0.0..std::f64::consts::PI), rng.gen_range(0.0..std::f64::consts::PI)],
            )
            .unwrap();
            let value = form.evaluate(&quantum_behavior(&singlet, &settings));
            assert!(value <= max + 1e-9, "CH value {value} exceeds {max}");
        }
    }

    proptest! {
        #[test]
        fn assignment_is_local(
            n_a in 0u8..3,
            a_out in -1i8..=1,
            n_b in 0u8..3,
            b_out1 in -1i8..=1,
            b_out2 in -1i8..=1,
        ) {
            // A-side output must not change when B-side fields change
            let outcomes = |n: u8, o1: i8, o2: i8| -> Vec<i8> {
                let s = |x: i8| if x >= 0 { 1 } else { -1 };
                match n { 0 => vec![], 1 => vec![s(o1)], _ => vec![s(o1), s(o2)] }
            };
            for convention in AssignmentConvention::ALL {
                let r1 = record(n_a, outcomes(n_a, a_out, 1), n_b, outcomes(n_b, b_out1, b_out1));
                let r2 = record(n_a, outcomes(n_a, a_out, 1), n_b, outcomes(n_b, b_out2, b_out2));
                let side_a = |t: TrialAssignment| match t {
                    TrialAssignment::Kept { a, .. } => Some(a),
                    TrialAssignment::Discarded => None,
                };
                // compare only when both trials survive (discard status on B's
                // side is also local to B, so A's value is defined identically)
                let v1 = convention.assign_side(r1.n_a, r1.outcomes_a.first().copied());
                let v2 = convention.assign_side(r2.n_a, r2.outcomes_a.first().copied());
                prop_assert_eq!(v1, v2);
                if let (Some(a1), Some(a2)) = (side_a(assign(&r1, convention)), side_a(assign(&r2, convention))) {
                    prop_assert_eq!(a1, a2);
                }
            }
        }

        #[test]
        fn behavior_validation_bounds(p in 0.0f64..1.0) {
            let b = Behavior {
                joint: vec![vec![p * 0.5; 2]; 2],
                marg_a: vec![p; 2],
                marg_b: vec![p; 2],
            };
            prop_assert!(b.validate().is_ok());
        }
    }
}

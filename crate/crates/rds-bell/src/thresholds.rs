//! Analytic engine: the component decomposition of a full-counting Bell
//! functional, violation-region predicates, closed-form and numeric
//! critical efficiencies, crossovers, and the measurement-settings
//! optimizer.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use crate::error::{Error, Result};
use crate::inequalities::{quantum_behavior, AssignmentConvention, FormKind};
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::quantum::{correlator, make_singlet, SettingsPair};

/// Conditional values of a Bell functional given which photons were
/// detected: both split photons (Q), one split photon (M), one of a
/// same-side pair (T), both same-side photons (D), none (X).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentValues {
    pub q: f64,
    pub m_a: f64,
    pub m_b: f64,
    pub t_a: f64,
    pub t_b: f64,
    pub d_a: f64,
    pub d_b: f64,
    pub x: f64,
}

/// Average of the functional over all detection branches:
///
/// <I> = eta_A^2 (1-p)/2 (D_A - 2 T_A + X) + eta_A [p M_A + (1-p) T_A - X]
///     + eta_B^2 (1-p)/2 (D_B - 2 T_B + X) + eta_B [p M_B + (1-p) T_B - X]
///     + eta_A eta_B p (Q - M_A - M_B + X) + X
pub fn expected_value(c: &ComponentValues, p: f64, eta_a: f64, eta_b: f64) -> f64 {
    let half_same = (1.0 - p) / 2.0;
    eta_a * eta_a * half_same * (c.d_a - 2.0 * c.t_a + c.x)
        + eta_a * (p * c.m_a + (1.0 - p) * c.t_a - c.x)
        + eta_b * eta_b * half_same * (c.d_b - 2.0 * c.t_b + c.x)
        + eta_b * (p * c.m_b + (1.0 - p) * c.t_b - c.x)
        + eta_a * eta_b * p * (c.q - c.m_a - c.m_b + c.x)
        + c.x
}

/// What one side looks like, probabilistically, under a given detection
/// pattern and convention: its +1 probability, with outcomes independent
/// across sides except in the both-split-photons case.
fn side_plus_prob(convention: AssignmentConvention, n_detected: u8) -> f64 {
    use AssignmentConvention::*;
    match n_detected {
        // a single detected photon carries a +-1 outcome that is +1 with
        // probability 1/2 for every convention and setting: the singlet
        // marginal is 1/2, and an H-or-V photon averages cos^2 and sin^2
        1 => 0.5,
        _ => match convention {
            ChFull | I3322Minus => 0.0,
            ChshFull | I3322Plus => 1.0,
            Postselect | FairSampling => {
                unreachable!("postselecting conventions have no full-count components")
            }
        },
    }
}

/// Functional value of a detection pattern where the two sides are
/// independent, from per-side detection counts.
fn independent_pattern_value(
    convention: AssignmentConvention,
    settings: &SettingsPair,
    n_a: u8,
    n_b: u8,
) -> f64 {
    let form = convention.form();
    let n = settings.n_settings();
    let pa = side_plus_prob(convention, n_a);
    let pb = side_plus_prob(convention, n_b);
    match form.kind {
        FormKind::Probability => {
            let behavior = crate::inequalities::Behavior {
                joint: vec![vec![pa * pb; n]; n],
                marg_a: vec![pa; n],
                marg_b: vec![pb; n],
            };
            form.evaluate(&behavior)
        }
        FormKind::Correlator => {
            let e = (2.0 * pa - 1.0) * (2.0 * pb - 1.0);
            form.evaluate_correlators(&vec![vec![e; n]; n])
        }
    }
}

/// Components of the convention's functional for the singlet source at
/// the given settings.
pub fn components_for(
    convention: AssignmentConvention,
    settings: &SettingsPair,
) -> Result<ComponentValues> {
    if !convention.is_full_counting() {
        return Err(Error::InvalidConfig(
            "component decomposition applies to full-counting conventions only".into(),
        ));
    }
    if settings.n_settings() != convention.n_settings() {
        return Err(Error::InvalidSettings(format!(
            "convention needs {} settings per side, got {}",
            convention.n_settings(),
            settings.n_settings()
        )));
    }
    let form = convention.form();
    let singlet = make_singlet();
    let q = match form.kind {
        FormKind::Probability => form.evaluate(&quantum_behavior(&singlet, settings)),
        FormKind::Correlator => {
            let e: Vec<Vec<f64>> = settings
                .alice()
                .iter()
                .map(|&a| settings.bob().iter().map(|&b| correlator(&singlet, a, b)).collect())
                .collect();
            form.evaluate_correlators(&e)
        }
    };
    let value = |n_a, n_b| independent_pattern_value(convention, settings, n_a, n_b);
    Ok(ComponentValues {
        q,
        m_a: value(1, 0),
        m_b: value(0, 1),
        t_a: value(1, 0),
        t_b: value(0, 1),
        d_a: value(2, 0),
        d_b: value(0, 2),
        x: value(0, 0),
    })
}

/// CH components of the singlet source; at the optimal settings these are
/// Q = 1/sqrt(2) - 1/2, M = T = -1/2, D = X = 0.
pub fn singlet_ch_components(settings: &SettingsPair) -> Result<ComponentValues> {
    components_for(AssignmentConvention::ChFull, settings)
}

/// Left-hand side of the CH violation condition,
/// (1-p)/2 (eta_A^2 + eta_B^2) + p eta_A eta_B (1/2 + 1/sqrt(2))
/// - (eta_A + eta_B)/2.
pub fn ch_violation_lhs(p: f64, eta_a: f64, eta_b: f64) -> f64 {
    (1.0 - p) / 2.0 * (eta_a * eta_a + eta_b * eta_b)
        + p * eta_a * eta_b * (0.5 + FRAC_1_SQRT_2)
        - 0.5 * (eta_a + eta_b)
}

/// True iff the full-counting CH functional exceeds its local bound.
pub fn ch_violation(p: f64, eta_a: f64, eta_b: f64) -> bool {
    ch_violation_lhs(p, eta_a, eta_b) > 0.0
}

/// Critical efficiency in the symmetric case eta_A = eta_B:
/// eta_crit = 2 / (2 + p (sqrt(2) - 1)). None when no violation is
/// possible (p = 0).
pub fn eta_crit_symmetric(p: f64) -> Option<f64> {
    if p <= 0.0 {
        return None;
    }
    Some(2.0 / (2.0 + p * (SQRT_2 - 1.0)))
}

/// Critical eta_B in the fully asymmetric case eta_A = 1. Written as the
/// rationalized root of (1-p) eta^2 + [p(1+sqrt(2)) - 1] eta - p = 0,
/// which is regular at p = 1 where it gives 1/sqrt(2).
pub fn eta_crit_asymmetric(p: f64) -> Option<f64> {
    if p <= 0.0 {
        return None;
    }
    let b = p * (1.0 + SQRT_2) - 1.0;
    let disc = (b * b + 4.0 * p * (1.0 - p)).sqrt();
    // both forms are the same root; pick the one that avoids cancellation
    // (b < 0 implies p < 1/(1+sqrt(2)), so 1 - p stays away from zero)
    if b >= 0.0 {
        Some(2.0 * p / (b + disc))
    } else {
        Some((disc - b) / (2.0 * (1.0 - p)))
    }
}

/// Which zero-or-two-detections sign the I3322 analysis uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum I3322Variant {
    Plus,
    Minus,
}

/// Left-hand side of the I3322 violation condition. PLUS:
/// (1-p)/2 (eta_A^2 + 3 eta_B^2) + (9/4) p eta_A eta_B
/// - (eta_A + 3 eta_B)/2; MINUS swaps eta_A and eta_B.
pub fn i3322_violation_lhs(p: f64, eta_a: f64, eta_b: f64, variant: I3322Variant) -> f64 {
    let (ea, eb) = match variant {
        I3322Variant::Plus => (eta_a, eta_b),
        I3322Variant::Minus => (eta_b, eta_a),
    };
    (1.0 - p) / 2.0 * (ea * ea + 3.0 * eb * eb) + 2.25 * p * ea * eb
        - 0.5 * (ea + 3.0 * eb)
}

pub fn i3322_violation(p: f64, eta_a: f64, eta_b: f64, variant: I3322Variant) -> bool {
    i3322_violation_lhs(p, eta_a, eta_b, variant) > 0.0
}

/// Critical eta_B for I3322 with eta_A = 1. PLUS variant:
/// 4p / (9p - 6 + sqrt(36 - 60p + 33p^2)); the MINUS variant solves the
/// swapped condition, 12p / (9p - 2 + sqrt(33p^2 + 12p + 4)).
pub fn i3322_eta_b_crit(p: f64, variant: I3322Variant) -> Option<f64> {
    if p <= 0.0 {
        return None;
    }
    let eta = match variant {
        I3322Variant::Plus => {
            4.0 * p / (9.0 * p - 6.0 + (36.0 - 60.0 * p + 33.0 * p * p).sqrt())
        }
        I3322Variant::Minus => {
            12.0 * p / (9.0 * p - 2.0 + (33.0 * p * p + 12.0 * p + 4.0).sqrt())
        }
    };
    (eta <= 1.0).then_some(eta)
}

/// Bisection for the root of f on [lo, hi] to absolute tolerance tol,
/// given f(lo) <= 0 < f(hi) (or the reverse).
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoBracket(format!(
            "f({lo}) = {flo} and f({hi}) = {fhi} have the same sign"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid == 0.0 {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

const FRONTIER_TOL: f64 = 1e-9;
const FRONTIER_SCAN: usize = 1024;

/// Minimal eta_B with <I> > 0 at fixed p and eta_A, or None when the
/// functional stays non-positive up to eta_B = 1. Scans for the first
/// sign change, then bisects, so monotonicity is not assumed.
pub fn frontier_eta_b(p: f64, eta_a: f64, c: &ComponentValues) -> Option<f64> {
    let g = |eta_b: f64| expected_value(c, p, eta_a, eta_b);
    let mut prev = 0.0;
    for k in 0..=FRONTIER_SCAN {
        let eta_b = k as f64 / FRONTIER_SCAN as f64;
        if g(eta_b) > 0.0 {
            if k == 0 {
                return Some(0.0);
            }
            return bisect(g, prev, eta_b, FRONTIER_TOL).ok();
        }
        prev = eta_b;
    }
    None
}

/// Fig. 5 regions: which inequality gives the lowest eta_B threshold at
/// eta_A = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// Low p: I3322 with the minus assignment wins.
    A,
    /// Central region: CH wins.
    B,
    /// High p: I3322 with the plus assignment wins.
    C,
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Region::A => write!(f, "a"),
            Region::B => write!(f, "b"),
            Region::C => write!(f, "c"),
        }
    }
}

/// The p where the I3322 threshold (eta_A = 1) crosses the CH asymmetric
/// threshold: ~0.863 for PLUS, ~0.099 for MINUS.
pub fn crossover_p(variant: I3322Variant) -> Result<f64> {
    let diff = |p: f64| {
        i3322_eta_b_crit(p, variant).unwrap_or(f64::INFINITY)
            - eta_crit_asymmetric(p).unwrap_or(f64::INFINITY)
    };
    let (lo, hi) = match variant {
        I3322Variant::Plus => (0.5, 1.0),
        I3322Variant::Minus => (0.01, 0.5),
    };
    bisect(diff, lo, hi, 1e-10)
}

/// Classifies p into the Fig. 5 regions.
pub fn region(p: f64) -> Result<Region> {
    let p_minus = crossover_p(I3322Variant::Minus)?;
    let p_plus = crossover_p(I3322Variant::Plus)?;
    Ok(if p < p_minus {
        Region::A
    } else if p > p_plus {
        Region::C
    } else {
        Region::B
    })
}

/// Outcome of the measurement-settings search.
#[derive(Debug, Clone)]
pub struct OptimizedSettings {
    pub settings: SettingsPair,
    pub value: f64,
    pub converged: bool,
}

/// Maximizes the full-counting expected value over analyzer angles with a
/// multi-start derivative-free search. Deterministic given the seed; ties
/// within 1e-9 are broken by the lexicographically smallest angle vector.
pub fn optimize_settings(
    convention: AssignmentConvention,
    p: f64,
    eta_a: f64,
    eta_b: f64,
) -> Result<OptimizedSettings> {
    use rand::{Rng, SeedableRng};
    let n = convention.n_settings();
    let objective = |angles: &[f64]| -> f64 {
        let settings = SettingsPair::from_angles(&angles[..n], &angles[n..])
            .expect("lengths fixed by construction");
        let c = components_for(convention, &settings).expect("full-counting convention");
        // minimized
        -expected_value(&c, p, eta_a, eta_b)
    };

    let opts = NelderMeadOptions {
        initial_step: 0.4,
        tol: 1e-9,
        max_iter: 4000,
    };
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(0x5eed_ba11);
    let starts: Vec<Vec<f64>> = (0..40)
        .map(|_| (0..2 * n).map(|_| rng.gen_range(0.0..std::f64::consts::PI)).collect())
        .collect();

    let mut results: Vec<(Vec<f64>, f64, bool)> = starts
        .iter()
        .map(|x0| {
            let r = nelder_mead(&objective, x0, &opts);
            let normalized: Vec<f64> = r
                .x
                .iter()
                .map(|&a| a.rem_euclid(std::f64::consts::PI))
                .collect();
            (normalized, -r.fx, r.converged)
        })
        .collect();
    let best = results
        .iter()
        .map(|r| r.1)
        .fold(f64::NEG_INFINITY, f64::max);
    results.retain(|r| r.1 >= best - 1e-9);
    results.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let (angles, value, converged) = results.swap_remove(0);
    Ok(OptimizedSettings {
        settings: SettingsPair::from_angles(&angles[..n], &angles[n..])?,
        value,
        converged,
    })
}

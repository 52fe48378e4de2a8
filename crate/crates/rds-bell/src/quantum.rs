//! Two-qubit polarization states and projective polarization measurements.
//!
//! States are 4x4 density operators in the ordered basis {HH, HV, VH, VV};
//! the first tensor factor is Alice's photon. Measurements are linear
//! analyzers at angle theta, with the +1 port projecting onto
//! cos(theta)|H> + sin(theta)|V>.

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};

use crate::error::{Error, Result};

const HERMITICITY_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const EIGENVALUE_TOL: f64 = 1e-10;

/// A validated two-qubit polarization density operator.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    rho: Matrix4<Complex64>,
}

impl TwoQubitState {
    /// Builds a state from a raw matrix, checking hermiticity, unit trace,
    /// and positivity.
    pub fn new(rho: Matrix4<Complex64>) -> Result<Self> {
        let adjoint = rho.adjoint();
        for i in 0..4 {
            for j in 0..4 {
                if (rho[(i, j)] - adjoint[(i, j)]).norm() > HERMITICITY_TOL {
                    return Err(Error::InvalidState(format!(
                        "not Hermitian at ({i}, {j})"
                    )));
                }
            }
        }
        let trace = rho.trace();
        if (trace - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace = {trace}, expected 1")));
        }
        let eigenvalues = nalgebra::linalg::SymmetricEigen::new(rho).eigenvalues;
        if let Some(lambda) = eigenvalues.iter().find(|&&l| l < -EIGENVALUE_TOL) {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {lambda}"
            )));
        }
        Ok(Self { rho })
    }

    /// Pure state |psi><psi| from an (automatically normalized) ket.
    pub fn from_ket(ket: Vector4<Complex64>) -> Result<Self> {
        let norm = ket.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero ket".into()));
        }
        let ket = ket / Complex64::new(norm, 0.0);
        Self::new(ket * ket.adjoint())
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.rho
    }
}

/// The singlet (|HV> - |VH>)/sqrt(2) as a density operator.
pub fn make_singlet() -> TwoQubitState {
    static SINGLET: std::sync::OnceLock<TwoQubitState> = std::sync::OnceLock::new();
    SINGLET
        .get_or_init(|| {
            let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
            let ket = Vector4::new(
                Complex64::new(0.0, 0.0),
                Complex64::new(inv_sqrt2, 0.0),
                Complex64::new(-inv_sqrt2, 0.0),
                Complex64::new(0.0, 0.0),
            );
            TwoQubitState::from_ket(ket).expect("singlet ket is a valid state")
        })
        .clone()
}

/// A linear polarization analyzer. The +1 port projects onto
/// cos(theta)|H> + sin(theta)|V>; the -1 port onto the orthogonal state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyzerSetting {
    theta: f64,
}

impl AnalyzerSetting {
    /// Angle is reduced mod pi: an analyzer at theta + pi is the same device.
    pub fn new(theta: f64) -> Self {
        Self {
            theta: theta.rem_euclid(PI),
        }
    }

    pub fn angle(&self) -> f64 {
        self.theta
    }

    /// Projector onto the +1 outcome.
    pub fn projector_plus(&self) -> Matrix2<Complex64> {
        let (s, c) = self.theta.sin_cos();
        let re = |x: f64| Complex64::new(x, 0.0);
        Matrix2::new(re(c * c), re(c * s), re(c * s), re(s * s))
    }

    /// Projector onto the -1 outcome (orthogonal complement).
    pub fn projector_minus(&self) -> Matrix2<Complex64> {
        Matrix2::identity() - self.projector_plus()
    }
}

/// Which observer's photon a single-sided operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Alice,
    Bob,
}

/// Measurement settings for both observers (two per side for CH/CHSH,
/// three for I3322).
#[derive(Debug, Clone, PartialEq)]
pub struct SettingsPair {
    alice: Vec<AnalyzerSetting>,
    bob: Vec<AnalyzerSetting>,
}

impl SettingsPair {
    pub fn new(alice: Vec<AnalyzerSetting>, bob: Vec<AnalyzerSetting>) -> Result<Self> {
        if alice.len() != bob.len() {
            return Err(Error::InvalidSettings(format!(
                "side lengths differ: {} vs {}",
                alice.len(),
                bob.len()
            )));
        }
        if !matches!(alice.len(), 2 | 3) {
            return Err(Error::InvalidSettings(format!(
                "need 2 or 3 settings per side, got {}",
                alice.len()
            )));
        }
        Ok(Self { alice, bob })
    }

    pub fn from_angles(alice: &[f64], bob: &[f64]) -> Result<Self> {
        Self::new(
            alice.iter().copied().map(AnalyzerSetting::new).collect(),
            bob.iter().copied().map(AnalyzerSetting::new).collect(),
        )
    }

    pub fn n_settings(&self) -> usize {
        self.alice.len()
    }

    pub fn alice(&self) -> &[AnalyzerSetting] {
        &self.alice
    }

    pub fn bob(&self) -> &[AnalyzerSetting] {
        &self.bob
    }
}

/// The four joint outcome probabilities P(+-, +-) for one setting pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointProbs {
    pub pp: f64,
    pub pm: f64,
    pub mp: f64,
    pub mm: f64,
}

impl JointProbs {
    pub fn sum(&self) -> f64 {
        self.pp + self.pm + self.mp + self.mm
    }
}

fn trace_with(rho: &Matrix4<Complex64>, op: &Matrix4<Complex64>) -> f64 {
    (rho * op).trace().re
}

/// P(a = s, b = t) = Tr[rho (Pi_s tensor Pi_t)] for all four sign pairs.
pub fn joint_outcome_probs(
    state: &TwoQubitState,
    theta_a: AnalyzerSetting,
    theta_b: AnalyzerSetting,
) -> JointProbs {
    let ap = theta_a.projector_plus();
    let am = theta_a.projector_minus();
    let bp = theta_b.projector_plus();
    let bm = theta_b.projector_minus();
    let rho = state.matrix();
    JointProbs {
        pp: trace_with(rho, &ap.kronecker(&bp)),
        pm: trace_with(rho, &ap.kronecker(&bm)),
        mp: trace_with(rho, &am.kronecker(&bp)),
        mm: trace_with(rho, &am.kronecker(&bm)),
    }
}

/// Correlator E = P(++) + P(--) - P(+-) - P(-+); for the singlet this is
/// -cos 2(theta_a - theta_b).
pub fn correlator(state: &TwoQubitState, theta_a: AnalyzerSetting, theta_b: AnalyzerSetting) -> f64 {
    let p = joint_outcome_probs(state, theta_a, theta_b);
    p.pp + p.mm - p.pm - p.mp
}

/// P(+1) on one side alone, the other analyzer traced out.
pub fn marginal_plus_prob(state: &TwoQubitState, side: Side, theta: AnalyzerSetting) -> f64 {
    let pi = theta.projector_plus();
    let id = Matrix2::identity();
    let op = match side {
        Side::Alice => pi.kronecker(&id),
        Side::Bob => id.kronecker(&pi),
    };
    trace_with(state.matrix(), &op)
}

/// Settings maximizing the CH (and CHSH) violation on the singlet:
/// a = (0, pi/4), b = (5pi/8, 3pi/8). The CH value there is
/// 1/sqrt(2) - 1/2 and the CHSH correlator sum is 2 sqrt(2).
pub fn ch_optimal_settings() -> SettingsPair {
    SettingsPair::from_angles(&[0.0, FRAC_PI_4], &[5.0 * PI / 8.0, 3.0 * PI / 8.0])
        .expect("fixed angles are valid")
}

/// Settings maximizing I3322 on the singlet: a = (pi/6, pi/3, 0) and
/// b = a + pi/2 elementwise, where the value is 1/4.
pub fn i3322_optimal_settings() -> SettingsPair {
    SettingsPair::from_angles(
        &[FRAC_PI_6, FRAC_PI_3, 0.0],
        &[FRAC_PI_6 + FRAC_PI_2, FRAC_PI_3 + FRAC_PI_2, FRAC_PI_2],
    )
    .expect("fixed angles are valid")
}

//! Singlet measurement statistics: P(+,+) = sin^2(theta_A - theta_B) / 2
//! and E = -cos 2(theta_A - theta_B), shown on a sweep of the relative
//! analyzer angle.

use std::f64::consts::PI;

use rds_bell::quantum::{
    correlator, joint_outcome_probs, make_singlet, marginal_plus_prob, AnalyzerSetting, Side,
};

fn main() {
    let singlet = make_singlet();
    let alice = AnalyzerSetting::new(0.0);

    println!("{:>8} {:>10} {:>10} {:>10} {:>10} {:>10}", "delta", "P(+,+)", "P(+,-)", "P(-,+)", "P(-,-)", "E");
    for k in 0..=16 {
        let delta = k as f64 * PI / 16.0;
        let bob = AnalyzerSetting::new(delta);
        let jp = joint_outcome_probs(&singlet, alice, bob);
        let e = correlator(&singlet, alice, bob);
        println!(
            "{:8.4} {:10.6} {:10.6} {:10.6} {:10.6} {:10.6}",
            delta, jp.pp, jp.pm, jp.mp, jp.mm, e
        );
        assert!((jp.pp - 0.5 * delta.sin().powi(2)).abs() < 1e-12);
        assert!((e + (2.0 * delta).cos()).abs() < 1e-12);
    }

    // local marginals are uniform regardless of the analyzer angle
    for theta in [0.0, 0.3, 1.1, 2.9] {
        let m = marginal_plus_prob(&singlet, Side::Alice, AnalyzerSetting::new(theta));
        assert!((m - 0.5).abs() < 1e-12);
    }
    println!("\nmarginals are 1/2 at every analyzer angle");
}

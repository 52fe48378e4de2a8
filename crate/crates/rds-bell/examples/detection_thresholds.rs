//! Critical detection efficiencies as a function of the splitting
//! probability p, comparing the closed forms with a direct bisection on
//! the violation condition.

use rds_bell::thresholds::{
    bisect, ch_violation_lhs, eta_crit_asymmetric, eta_crit_symmetric, i3322_eta_b_crit,
    i3322_violation_lhs, I3322Variant,
};

fn main() {
    println!(
        "{:>6} {:>12} {:>12} {:>12} {:>12}",
        "p", "sym", "asym", "i3322+", "i3322-"
    );
    for k in 1..=10 {
        let p = k as f64 / 10.0;
        let sym = eta_crit_symmetric(p).unwrap();
        let asym = eta_crit_asymmetric(p).unwrap();
        let plus = i3322_eta_b_crit(p, I3322Variant::Plus).unwrap();
        let minus = i3322_eta_b_crit(p, I3322Variant::Minus).unwrap();
        println!("{p:6.2} {sym:12.8} {asym:12.8} {plus:12.8} {minus:12.8}");

        // every closed form is the root of its own violation condition
        let sym_root = bisect(|e| ch_violation_lhs(p, e, e), 1e-6, 1.0 + 1e-9, 1e-12).unwrap();
        let plus_root = bisect(
            |e| i3322_violation_lhs(p, 1.0, e, I3322Variant::Plus),
            1e-6,
            1.0 + 1e-9,
            1e-12,
        )
        .unwrap();
        assert!((sym - sym_root).abs() < 1e-9);
        assert!((plus - plus_root).abs() < 1e-9);
    }

    println!();
    println!("p = 1 landmarks: sym = 2/(1+sqrt 2) = {:.6},", eta_crit_symmetric(1.0).unwrap());
    println!(
        "                 asym = 1/sqrt 2 = {:.6}, i3322+ = 2/3 = {:.6}",
        eta_crit_asymmetric(1.0).unwrap(),
        i3322_eta_b_crit(1.0, I3322Variant::Plus).unwrap()
    );
}

//! The (eta_A, eta_B) frontier: for a fixed splitting probability, the
//! minimum eta_B that still violates CH at each eta_A. Rows where no
//! eta_B <= 1 works are reported as unattainable.

use rds_bell::quantum::ch_optimal_settings;
use rds_bell::thresholds::{frontier_eta_b, singlet_ch_components};

fn main() -> rds_bell::Result<()> {
    let components = singlet_ch_components(&ch_optimal_settings())?;

    for p in [1.0, 0.5, 0.25] {
        println!("p = {p}");
        for k in 0..=10 {
            let eta_a = 0.5 + 0.05 * k as f64;
            match frontier_eta_b(p, eta_a, &components) {
                Some(eta_b) => println!("  eta_A = {eta_a:5.2}  eta_B >= {eta_b:.8}"),
                None => println!("  eta_A = {eta_a:5.2}  unattainable"),
            }
        }
    }

    // the symmetric corner of the p = 1 curve is 1/sqrt(2)
    let corner = frontier_eta_b(1.0, 1.0, &components).unwrap();
    println!("\nfrontier at p = 1, eta_A = 1: {corner:.9} (= 1/sqrt 2)");
    Ok(())
}

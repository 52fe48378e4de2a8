//! Where I3322 beats CH in the completely asymmetric case. Region a:
//! the minus-signed I3322 convention wins (small p). Region b: CH wins.
//! Region c: the plus-signed convention wins (large p).

use rds_bell::thresholds::{
    crossover_p, eta_crit_asymmetric, i3322_eta_b_crit, region, I3322Variant,
};

fn main() -> rds_bell::Result<()> {
    let plus = crossover_p(I3322Variant::Plus)?;
    let minus = crossover_p(I3322Variant::Minus)?;
    println!("crossovers: minus at p = {minus:.4}, plus at p = {plus:.4}\n");

    println!("{:>6} {:>12} {:>12} {:>12} {:>7}", "p", "ch", "i3322+", "i3322-", "region");
    for p in [0.05, 0.099, 0.2, 0.5, 0.8, 0.863, 0.95, 1.0] {
        let ch = eta_crit_asymmetric(p).unwrap();
        let ip = i3322_eta_b_crit(p, I3322Variant::Plus).unwrap();
        let im = i3322_eta_b_crit(p, I3322Variant::Minus).unwrap();
        println!("{p:6.3} {ch:12.8} {ip:12.8} {im:12.8} {:>7}", region(p)?.to_string());
    }
    Ok(())
}

//! Multi-start Nelder-Mead search over analyzer angles for each
//! full-counting convention, at perfect efficiency and at a lossy
//! operating point.

use rds_bell::inequalities::AssignmentConvention;
use rds_bell::thresholds::optimize_settings;

fn main() -> rds_bell::Result<()> {
    for convention in [
        AssignmentConvention::ChFull,
        AssignmentConvention::ChshFull,
        AssignmentConvention::I3322Plus,
    ] {
        let perfect = optimize_settings(convention, 1.0, 1.0, 1.0)?;
        let lossy = optimize_settings(convention, 0.5, 1.0, 0.9)?;
        println!("{convention:?}");
        println!(
            "  p=1.0 eta=(1.00, 1.00): value = {:+.9} (converged: {})",
            perfect.value, perfect.converged
        );
        let a: Vec<String> = perfect.settings.alice().iter().map(|s| format!("{:.6}", s.angle())).collect();
        let b: Vec<String> = perfect.settings.bob().iter().map(|s| format!("{:.6}", s.angle())).collect();
        println!("    angles A = [{}]  B = [{}]", a.join(", "), b.join(", "));
        println!(
            "  p=0.5 eta=(1.00, 0.90): value = {:+.9}",
            lossy.value
        );
    }
    Ok(())
}

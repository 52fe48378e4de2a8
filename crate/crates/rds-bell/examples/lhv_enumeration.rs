//! Brute-force local-hidden-variable bounds: enumerate every
//! deterministic +-1 strategy and confirm the local bound 0 for all
//! three functionals, then show the quantum violation at the optimal
//! settings.

use rds_bell::inequalities::{
    ch_form, chsh_form, i3322_form, lhv_max, quantum_behavior,
};
use rds_bell::quantum::{ch_optimal_settings, i3322_optimal_settings, make_singlet};

fn main() {
    let singlet = make_singlet();
    for (name, form, settings) in [
        ("CH", ch_form(), ch_optimal_settings()),
        ("CHSH", chsh_form(), ch_optimal_settings()),
        ("I3322", i3322_form(), i3322_optimal_settings()),
    ] {
        let result = lhv_max(&form);
        let strategies =
            (1usize << form.n_settings_a()) * (1usize << form.n_settings_b());
        let behavior = quantum_behavior(&singlet, &settings);
        let quantum = match form.kind {
            rds_bell::inequalities::FormKind::Probability => form.evaluate(&behavior),
            rds_bell::inequalities::FormKind::Correlator => {
                let correlators: Vec<Vec<f64>> = settings
                    .alice()
                    .iter()
                    .map(|&a| {
                        settings
                            .bob()
                            .iter()
                            .map(|&b| rds_bell::quantum::correlator(&singlet, a, b))
                            .collect()
                    })
                    .collect();
                form.evaluate_correlators(&correlators)
            }
        };
        println!(
            "{name:<6} lhv max = {} over {strategies} strategies ({} maximizers); singlet value = {quantum:.9}",
            result.value,
            result.maximizers.len()
        );
        assert_eq!(result.value, 0.0);
        assert!(quantum > 0.0);
    }
}

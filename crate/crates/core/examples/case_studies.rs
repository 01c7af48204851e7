//! Prints the FNN/SNN comparison for the bundled case studies.

use snn_energy::presets::CASES;
use snn_energy::report::format_compare;
use snn_energy::{compare_modes, Activity, EstimateOptions, TechProfile};

fn main() -> snn_energy::Result<()> {
    let profile = TechProfile::default();
    for case in CASES {
        let spec = case.spec()?;
        let c = compare_modes(
            &spec,
            &Activity::rate(case.spike_rate)?,
            &profile,
            EstimateOptions::default(),
        )?;
        println!("{}", format_compare(&c));
        println!(
            "params {}  published ratio {}  ops ratio {:.1}\n",
            spec.total_params(),
            case.reference_ratio,
            c.fnn.total.ops / c.snn.total.ops
        );
    }
    Ok(())
}

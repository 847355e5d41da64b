//! Runs the simulator-vs-analytic checks on a short grid, then shows the
//! invariant checks catching a corrupted borrowing threshold.

use cellborrow::scenario::{validate, validate_with_fault, ScenarioConfig};
use cellborrow::sim::Fault;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = ScenarioConfig::default();
    config.traffic.load_grid.start_fraction = 0.5;
    config.traffic.load_grid.points = 5;
    config.simulation.horizon_arrivals = 500_000;

    let report = validate(&config)?;
    print!("{}", report.summary());

    let fault = Fault::LowerThreshold {
        after_arrivals: 5_000,
        n_th: 10,
    };
    let broken = validate_with_fault(&config, Some(fault))?;
    println!("\nwith the floor lowered to 10 mid-run:");
    print!("{}", broken.summary());
    Ok(())
}

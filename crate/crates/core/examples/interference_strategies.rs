//! SINR, capacity and outage for a user on a borrowed channel under each
//! mitigation strategy.

use cellborrow::interference::Strategy;
use cellborrow::scenario::{rf_occupancy, rf_sweep, ScenarioConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = ScenarioConfig::default();
    let occ = rf_occupancy(&config)?;
    println!("user served by a channel lent from cell {}", config.geometry.serving_donor.unwrap_or(1));
    println!("azimuth {} deg, contested occupancy {occ:.3?}", config.azimuth_deg());

    let distances = [0.2, 0.4, 0.5, 0.6, 0.8, 1.0];
    for strategy in Strategy::ALL {
        println!("\n{strategy}");
        println!("{:>6} {:>9} {:>9} {:>8}", "km", "sinr dB", "bps/Hz", "outage");
        for p in rf_sweep(&config, strategy, &distances)? {
            println!(
                "{:>6.2} {:>9.2} {:>9.3} {:>8.4}",
                p.distance_km, p.sinr_db, p.capacity_bps_hz, p.outage
            );
        }
    }

    let mut light = config.clone();
    light.geometry.occupancy = Some([0.0, 0.3, 0.3, 0.3, 0.3, 0.3, 0.3].to_vec());
    println!("\nat 30% contested occupancy, 1 km:");
    for strategy in Strategy::ALL {
        let p = rf_sweep(&light, strategy, &[1.0])?[0];
        println!("  {:<22} sinr {:>6.2} dB outage {:.4}", strategy.name(), p.sinr_db, p.outage);
    }
    Ok(())
}

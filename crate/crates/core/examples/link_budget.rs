//! Path loss, received power and noise-limited SNR against distance.

use cellborrow::rf::{
    antenna_correction, linear_to_db, path_loss, received_power, thermal_noise_dbm, RfEnvironment,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let env = RfEnvironment::default();
    println!(
        "{} MHz, base {} m, mobile {} m, {:.1} dBm transmit",
        env.carrier_mhz, env.bs_height_m, env.ms_height_m, env.tx_power_dbm
    );
    println!("mobile antenna correction {:.3} dB", antenna_correction(env.carrier_mhz, env.ms_height_m));
    println!("slope {:.2} dB/decade", env.distance_slope_db());
    println!("noise in 200 kHz at -174 dBm/Hz: {:.1} dBm", thermal_noise_dbm(-174.0, 200e3));

    let noise = env.noise_floor_dbm.unwrap_or(f64::NEG_INFINITY);
    println!("\n{:>6} {:>10} {:>10} {:>10} {:>10}", "km", "loss dB", "rx dBm", "snr dB", "bps/Hz");
    for d in [0.1, 0.25, 0.5, 0.75, 1.0, 2.0, 5.0] {
        let loss = path_loss(&env, d)?;
        let rx = received_power(env.tx_power_dbm, loss);
        let snr = rx - noise;
        let cap = (1.0 + 10f64.powf(snr / 10.0)).log2();
        println!("{d:>6.2} {loss:>10.2} {rx:>10.2} {snr:>10.2} {cap:>10.3}");
    }
    println!("\n1 W is {:.1} dBm; 3 dB is x{:.3}", cellborrow::rf::watts_to_dbm(1.0), 10f64.powf(0.3));
    println!("x2 in dB: {:.4}", linear_to_db(2.0));
    Ok(())
}

//! Erlang-B blocking for a few trunk sizes, and the offered load each size
//! supports at 1% and 2% grade of service.

use cellborrow::queuing::{blocking, occupancy_exceeds, TrafficProfile};

fn b(erlangs: f64, channels: u32) -> f64 {
    blocking(&TrafficProfile::new(erlangs, 1.0, channels).unwrap()).unwrap()
}

/// Largest load with blocking at or below `gos`, by bisection.
fn capacity_at(gos: f64, channels: u32) -> f64 {
    let (mut lo, mut hi) = (0.0, 2.0 * channels as f64 + 10.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if b(mid, channels) <= gos {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn main() {
    let sizes = [10, 30, 70, 100, 130, 160];
    println!("{:>8} {:>10} {:>10} {:>10} {:>10}", "load", "N=10", "N=30", "N=70", "N=100");
    for load in [5.0, 20.0, 50.0, 80.0, 100.0, 120.0] {
        print!("{load:>8.1}");
        for &n in &sizes[..4] {
            print!(" {:>10.6}", b(load, n));
        }
        println!();
    }

    println!("\n{:>8} {:>12} {:>12}", "N", "load @1%", "load @2%");
    for &n in &sizes {
        println!("{n:>8} {:>12.3} {:>12.3}", capacity_at(0.01, n), capacity_at(0.02, n));
    }

    // a donor with 100 channels and a floor of 70 at various loads
    println!("\nP(more than 70 busy of 100):");
    for load in [40.0, 60.0, 70.0, 80.0] {
        let p = occupancy_exceeds(&TrafficProfile::new(load, 1.0, 100).unwrap(), 70).unwrap();
        println!("  {load:>5.1} Erl: {p:.4}");
    }
}

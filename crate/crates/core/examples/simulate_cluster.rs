//! Seeded simulation of the cluster at one load, with and without
//! borrowing, checked against per-cell Erlang-B.

use cellborrow::scenario::ScenarioConfig;
use cellborrow::sim::{compare, run, Horizon};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = ScenarioConfig::default();
    let rate = 1.2 * config.total_channels() as f64 * config.mu();
    println!("total arrival rate {rate:.3}/s ({:.0} Erl)", rate / config.mu());

    let mut plain = config.sim_config(rate, false, 42);
    plain.horizon = Horizon::Arrivals(1_000_000);
    let stats = run(&plain)?;
    let analytic = config.cluster_traffic(rate).blockings()?;
    let report = compare(&analytic, &stats)?;
    println!("\nwithout borrowing ({} events):", stats.events);
    println!("{:>5} {:>10} {:>10} {:>9} {:>7}", "cell", "erlang-b", "sim", "stderr", "z");
    for c in &report.cells {
        println!(
            "{:>5} {:>10.5} {:>10.5} {:>9.2e} {:>7.2}",
            c.cell,
            c.score.analytic,
            c.score.empirical,
            c.score.stderr,
            c.score.z.unwrap_or(f64::NAN)
        );
    }

    let mut borrowing = plain.clone();
    borrowing.borrowing = true;
    let with = run(&borrowing)?;
    println!("\n{:>22} {:>12} {:>12}", "", "conventional", "borrowing");
    println!(
        "{:>22} {:>12.5} {:>12.5}",
        "reference blocking",
        stats.reference().blocking,
        with.reference().blocking
    );
    println!(
        "{:>22} {:>12.5} {:>12.5}",
        "overall blocking", stats.overall_blocking, with.overall_blocking
    );
    println!("{:>22} {:>12.4} {:>12.4}", "utilization", stats.utilization, with.utilization);
    println!(
        "{} loans, {} invariant checks, no violations",
        with.borrow_events, with.invariant_checks
    );
    Ok(())
}

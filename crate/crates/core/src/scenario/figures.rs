//! Load sweeps (blocking, utilization) and distance sweeps (SINR, capacity,
//! outage) behind the figure tables.

use rayon::prelude::*;
use serde::Serialize;

use crate::borrow::{execute_plan, plan_borrow, BorrowPlan};
use crate::cluster::{CellId, Cluster, CELLS};
use crate::interference::{distance_sweep, SceneSpec, Strategy, SweepPoint};
use crate::queuing::{
    blocking, bandwidth_utilization, occupancy_exceeds, overall_blocking_capacity,
    overall_blocking_weighted, ClusterTraffic, TrafficProfile,
};
use crate::sim::{run_many, Estimate, SimStats};

use super::output::{num, Table};
use super::{ScenarioConfig, ScenarioError};

/// Analytic results for one channel assignment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadMetrics {
    /// Channels per cell (N'_m).
    pub channels: [u32; CELLS],
    pub blocking: [f64; CELLS],
    /// Arrival-weighted mean of the per-cell blocking.
    pub overall_blocking: f64,
    /// One minus carried traffic over total channels.
    pub overall_blocking_capacity: f64,
    pub utilization: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadPoint {
    pub total_arrival_rate: f64,
    pub offered_erlangs: f64,
    pub conventional: LoadMetrics,
    pub borrowing: LoadMetrics,
    pub plan: BorrowPlan,
}

fn with_capacities(traffic: &ClusterTraffic, channels: [u32; CELLS]) -> ClusterTraffic {
    let mut t = traffic.clone();
    for (p, k) in t.profiles.iter_mut().zip(channels) {
        p.capacity = k;
    }
    t
}

fn metrics(traffic: &ClusterTraffic) -> Result<LoadMetrics, ScenarioError> {
    let overall = overall_blocking_weighted(traffic)?;
    let mut channels = [0; CELLS];
    for (c, p) in channels.iter_mut().zip(&traffic.profiles) {
        *c = p.capacity;
    }
    Ok(LoadMetrics {
        channels,
        blocking: traffic.blockings()?,
        overall_blocking: overall,
        overall_blocking_capacity: overall_blocking_capacity(traffic)?,
        utilization: bandwidth_utilization(traffic, overall)?,
    })
}

/// Channel assignment after borrowing in the steady-state picture.
///
/// Each donor holds as many busy channels as its mean carried traffic
/// (rounded up); the reference cell asks for enough channels to cover its
/// mean offered traffic. The request then goes through the usual plan and
/// execute steps.
pub fn analytic_borrowing(
    config: &ScenarioConfig,
    traffic: &ClusterTraffic,
) -> Result<(Cluster, BorrowPlan), ScenarioError> {
    let n = config.cluster.n;
    let mut cluster = Cluster::new(n, config.cluster.n_th)?;
    for id in CellId::all().filter(|c| !c.is_reference()) {
        let p = &traffic.profiles[id.index()];
        let carried = p.offered() * (1.0 - blocking(p)?);
        let busy = (carried.ceil() as u32).min(n);
        let cell = cluster.cell_mut(id);
        for _ in 0..busy {
            cell.occupy();
        }
    }
    let a1 = traffic.profiles[CellId::REFERENCE.index()].offered();
    let request = (a1.ceil() - n as f64).max(0.0).min(u32::MAX as f64) as u32;
    let plan = plan_borrow(&cluster, request);
    execute_plan(&mut cluster, &plan)?;
    Ok((cluster, plan))
}

/// Analytic blocking and utilization at one total arrival rate, with and
/// without borrowing.
pub fn analytic_point(config: &ScenarioConfig, total_rate: f64) -> Result<LoadPoint, ScenarioError> {
    let traffic = config.cluster_traffic(total_rate);
    traffic.validate()?;
    let conventional = metrics(&traffic)?;
    let (cluster, plan) = analytic_borrowing(config, &traffic)?;
    let mut channels = [0; CELLS];
    for (c, cell) in channels.iter_mut().zip(cluster.cells()) {
        *c = cell.channel_count();
    }
    let borrowing = metrics(&with_capacities(&traffic, channels))?;
    Ok(LoadPoint {
        total_arrival_rate: total_rate,
        offered_erlangs: total_rate / config.mu(),
        conventional,
        borrowing,
        plan,
    })
}

/// Replication statistics at one load point, one column per quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulatedPoint {
    pub total_arrival_rate: f64,
    pub borrowing: bool,
    pub overall_blocking: Estimate,
    pub reference_blocking: Estimate,
    pub utilization: Estimate,
    pub invariant_checks: u64,
}

/// Runs every seed at one load point.
pub fn simulate_point(
    config: &ScenarioConfig,
    total_rate: f64,
    borrowing: bool,
    seeds: &[u64],
) -> Result<SimulatedPoint, ScenarioError> {
    let configs: Vec<_> = seeds
        .iter()
        .map(|&s| config.sim_config(total_rate, borrowing, s))
        .collect();
    let runs = run_many(&configs)
        .into_iter()
        .collect::<Result<Vec<SimStats>, _>>()?;
    let pick = |f: fn(&SimStats) -> f64| Estimate::from_samples(&runs.iter().map(f).collect::<Vec<_>>());
    Ok(SimulatedPoint {
        total_arrival_rate: total_rate,
        borrowing,
        overall_blocking: pick(|s| s.overall_blocking),
        reference_blocking: pick(|s| s.reference().blocking),
        utilization: pick(|s| s.utilization),
        invariant_checks: runs.iter().map(|s| s.invariant_checks).sum(),
    })
}

/// Contested-channel busy probability for each cell, used as the activity of
/// co-channel interferers in the RF figures.
///
/// Unless given explicitly, it comes from the analytic picture at the
/// configured load: a cell whose group mates lent `g` channels carries a call
/// on the matching top `g` slots when more than `N - g` of its channels are
/// busy.
pub fn rf_occupancy(config: &ScenarioConfig) -> Result<[f64; CELLS], ScenarioError> {
    if let Some(occ) = &config.geometry.occupancy {
        let mut out = [0.0; CELLS];
        out.copy_from_slice(occ);
        return Ok(out);
    }
    let n = config.cluster.n;
    let total = config.geometry.occupancy_load_fraction * config.total_channels() as f64 * config.mu();
    let traffic = config.cluster_traffic(total);
    let (_, plan) = analytic_borrowing(config, &traffic)?;
    let mut lent = [0u32; CELLS];
    for g in &plan.grants {
        lent[g.donor.index()] += g.count;
    }
    // the evaluated user holds at least one channel from its donor
    if let Some(donor) = config.serving().donor() {
        lent[donor.index()] = lent[donor.index()].max(1);
    }
    let mut out = [0.0; CELLS];
    for id in CellId::all().filter(|c| !c.is_reference()) {
        let width: u32 = id
            .group()
            .members()
            .iter()
            .filter(|&&m| m != id)
            .map(|m| lent[m.index()])
            .sum();
        if width == 0 {
            continue;
        }
        let profile = TrafficProfile {
            capacity: n,
            ..traffic.profiles[id.index()]
        };
        out[id.index()] = occupancy_exceeds(&profile, n.saturating_sub(width))?;
    }
    Ok(out)
}

/// SINR, capacity and outage along the configured bearing under `strategy`.
pub fn rf_sweep(
    config: &ScenarioConfig,
    strategy: Strategy,
    distances: &[f64],
) -> Result<Vec<SweepPoint>, ScenarioError> {
    let spec = SceneSpec {
        distance_km: distances.first().copied().unwrap_or(0.0),
        azimuth_deg: config.azimuth_deg(),
        serving: config.serving(),
        strategy,
        inner_radius_km: config.geometry.inner_radius_km,
        occupancy: rf_occupancy(config)?,
        donor_inner_reuse: config.geometry.donor_inner_reuse,
    };
    Ok(distance_sweep(
        &config.hex_geometry(),
        &config.rf_environment(),
        &spec,
        distances,
        config.rf.outage_threshold_db,
    )?)
}

fn load_points(config: &ScenarioConfig) -> Result<Vec<LoadPoint>, ScenarioError> {
    config
        .arrival_rates()
        .par_iter()
        .map(|&r| analytic_point(config, r))
        .collect()
}

/// Both borrowing modes at every grid point, in grid order.
fn simulated_points(
    config: &ScenarioConfig,
) -> Result<Vec<(SimulatedPoint, SimulatedPoint)>, ScenarioError> {
    let seeds = config.simulation.seeds();
    config
        .arrival_rates()
        .iter()
        .map(|&r| {
            Ok((
                simulate_point(config, r, true, &seeds)?,
                simulate_point(config, r, false, &seeds)?,
            ))
        })
        .collect()
}

/// Builds the table for one figure.
///
/// Figures 9-11 run over the load grid, comparing borrowing ("proposed")
/// with a fixed assignment ("conventional"). Figures 12-14 run over the
/// distance sweep, comparing the configured strategy with no mitigation.
pub fn run_figure(config: &ScenarioConfig, figure: u32) -> Result<Table, ScenarioError> {
    match figure {
        9..=11 => load_figure(config, figure),
        12..=14 => rf_figure(config, figure),
        other => Err(ScenarioError::UnknownFigure(other)),
    }
}

fn load_figure(config: &ScenarioConfig, figure: u32) -> Result<Table, ScenarioError> {
    let value = |m: &LoadMetrics| match figure {
        9 => m.overall_blocking,
        10 => m.blocking[CellId::REFERENCE.index()],
        _ => m.utilization,
    };
    let sim_value = |p: &SimulatedPoint| match figure {
        9 => p.overall_blocking,
        10 => p.reference_blocking,
        _ => p.utilization,
    };
    let points = load_points(config)?;
    let mut columns = vec!["total_arrival_rate", "proposed_value", "conventional_value"];
    if !config.simulation.enabled {
        let mut table = Table::new(&columns);
        for p in &points {
            table.push_numbers(&[p.total_arrival_rate, value(&p.borrowing), value(&p.conventional)]);
        }
        return Ok(table);
    }
    columns.extend([
        "proposed_sim",
        "proposed_sim_stderr",
        "conventional_sim",
        "conventional_sim_stderr",
    ]);
    let mut table = Table::new(&columns);
    for (p, (with, without)) in points.iter().zip(simulated_points(config)?) {
        let (w, wo) = (sim_value(&with), sim_value(&without));
        table.push_numbers(&[
            p.total_arrival_rate,
            value(&p.borrowing),
            value(&p.conventional),
            w.mean,
            w.se,
            wo.mean,
            wo.se,
        ]);
    }
    Ok(table)
}

fn rf_figure(config: &ScenarioConfig, figure: u32) -> Result<Table, ScenarioError> {
    let distances = config.geometry.sweep.distances();
    let proposed = rf_sweep(config, config.strategy, &distances)?;
    let conventional = rf_sweep(config, Strategy::None, &distances)?;
    let value = |p: &SweepPoint| match figure {
        12 => p.sinr_db,
        13 => p.capacity_bps_hz,
        _ => p.outage,
    };
    let mut table = Table::new(&["distance_km", "proposed_value", "conventional_value"]);
    for (p, c) in proposed.iter().zip(&conventional) {
        table.push_numbers(&[p.distance_km, value(p), value(c)]);
    }
    Ok(table)
}

/// Full analytic load sweep, one row per grid point.
pub fn analysis_table(config: &ScenarioConfig) -> Result<Table, ScenarioError> {
    let mut columns: Vec<String> = [
        "total_arrival_rate",
        "offered_erlangs",
        "overall_blocking_conventional",
        "overall_blocking_borrowing",
        "capacity_blocking_conventional",
        "capacity_blocking_borrowing",
        "reference_blocking_conventional",
        "reference_blocking_borrowing",
        "utilization_conventional",
        "utilization_borrowing",
        "borrowed_channels",
        "shortfall",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for i in 1..=CELLS {
        columns.push(format!("cell{i}_channels"));
    }
    for i in 1..=CELLS {
        columns.push(format!("cell{i}_blocking_borrowing"));
    }
    let mut table = Table {
        columns,
        rows: Vec::new(),
    };
    for p in load_points(config)? {
        let (c, b) = (&p.conventional, &p.borrowing);
        let r = CellId::REFERENCE.index();
        let mut row: Vec<String> = [
            p.total_arrival_rate,
            p.offered_erlangs,
            c.overall_blocking,
            b.overall_blocking,
            c.overall_blocking_capacity,
            b.overall_blocking_capacity,
            c.blocking[r],
            b.blocking[r],
            c.utilization,
            b.utilization,
        ]
        .iter()
        .map(|&x| num(x))
        .collect();
        row.push(p.plan.granted().to_string());
        row.push(p.plan.shortfall.to_string());
        row.extend(b.channels.iter().map(|k| k.to_string()));
        row.extend(b.blocking.iter().map(|&x| num(x)));
        table.push(row);
    }
    Ok(table)
}

/// Simulated load sweep for the given seeds, both borrowing modes.
pub fn simulation_table(config: &ScenarioConfig, seeds: &[u64]) -> Result<Table, ScenarioError> {
    let mut table = Table::new(&[
        "total_arrival_rate",
        "borrowing",
        "replications",
        "overall_blocking",
        "overall_blocking_stderr",
        "reference_blocking",
        "reference_blocking_stderr",
        "utilization",
        "utilization_stderr",
        "invariant_checks",
    ]);
    for rate in config.arrival_rates() {
        for borrowing in [false, true] {
            let p = simulate_point(config, rate, borrowing, seeds)?;
            table.push(vec![
                num(rate),
                (borrowing as u8).to_string(),
                seeds.len().to_string(),
                num(p.overall_blocking.mean),
                num(p.overall_blocking.se),
                num(p.reference_blocking.mean),
                num(p.reference_blocking.se),
                num(p.utilization.mean),
                num(p.utilization.se),
                p.invariant_checks.to_string(),
            ]);
        }
    }
    Ok(table)
}

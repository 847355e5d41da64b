//! Seeded discrete-event simulation of the cluster.
//!
//! Calls arrive to each cell as a Poisson stream and hold a channel for an
//! exponential time. An arrival that finds the reference cell full borrows a
//! single channel through [`crate::borrow`]; the channel goes back to its
//! donor when that call ends. Blocked calls are lost.
//!
//! Each cell draws its inter-arrival and holding times from its own ChaCha
//! stream, so the same seed replays the same offered traffic whether or not
//! borrowing is enabled.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::borrow::{execute_plan, finish_borrowed_call, plan_borrow};
use crate::cluster::{
    CellId, ChannelRef, ChannelState, Cluster, ClusterError, InvariantViolation, CELLS,
};
use crate::queuing::ClusterTraffic;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("invariant violated after {arrivals} arrivals (t = {time:.3} s): {violation}")]
    Invariant {
        arrivals: u64,
        time: f64,
        violation: InvariantViolation,
    },
    #[error(transparent)]
    Cluster(#[from] ClusterError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Horizon {
    /// Stop after this many generated arrivals (all cells together).
    Arrivals(u64),
    /// Stop at this simulated time, seconds.
    Seconds(f64),
}

/// Deliberate corruption used to exercise the invariant checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Fault {
    /// Lowers the cluster's lending floor once `after_arrivals` calls have arrived.
    LowerThreshold { after_arrivals: u64, n_th: u32 },
    /// Makes one channel vanish once `after_arrivals` calls have arrived.
    LeakChannel { after_arrivals: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Arrival and service rates per cell; capacities come from `n_per_cell`.
    pub traffic: ClusterTraffic,
    pub n_per_cell: u32,
    pub n_th: u32,
    pub borrowing: bool,
    pub seed: u64,
    pub horizon: Horizon,
    /// Leading share of the horizon excluded from statistics.
    pub warmup_fraction: f64,
    /// Number of batches for batch-means standard errors.
    pub batches: u32,
    pub fault: Option<Fault>,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        self.traffic
            .validate()
            .map_err(|e| SimError::InvalidConfig(e.to_string()))?;
        if self.n_th > self.n_per_cell {
            return Err(SimError::InvalidConfig(format!(
                "n_th {} exceeds n_per_cell {}",
                self.n_th, self.n_per_cell
            )));
        }
        match self.horizon {
            Horizon::Arrivals(0) => {
                return Err(SimError::InvalidConfig("horizon must be positive".into()))
            }
            Horizon::Seconds(t) if !(t > 0.0 && t.is_finite()) => {
                return Err(SimError::InvalidConfig("horizon must be positive".into()))
            }
            _ => {}
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return Err(SimError::InvalidConfig(format!(
                "warm-up fraction {} outside [0, 1)",
                self.warmup_fraction
            )));
        }
        if self.batches < 2 {
            return Err(SimError::InvalidConfig("need at least two batches".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellStats {
    pub offered: u64,
    pub blocked: u64,
    pub carried: u64,
    pub blocking: f64,
    /// Batch-means standard error of `blocking`; zero when no variation was seen.
    pub blocking_se: f64,
    /// Time-averaged calls in progress.
    pub mean_busy: f64,
    /// Time-averaged channel count N'_m.
    pub mean_channels: f64,
    /// Share of the time some co-channel frequencies were on loan from a
    /// group mate during which this cell kept that many channels idle.
    /// `None` if nothing was ever borrowed from the cell's group mates.
    pub contested_idle_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimStats {
    pub cells: Vec<CellStats>,
    pub offered: u64,
    pub blocked: u64,
    pub carried: u64,
    pub overall_blocking: f64,
    pub overall_blocking_se: f64,
    /// Time-averaged share of the cluster's channels carrying calls.
    pub utilization: f64,
    pub generated_arrivals: u64,
    pub warmup_arrivals: u64,
    pub events: u64,
    pub invariant_checks: u64,
    pub borrow_events: u64,
    /// Observation window after warm-up, seconds.
    pub observed_seconds: f64,
}

impl SimStats {
    pub fn reference(&self) -> &CellStats {
        &self.cells[CellId::REFERENCE.index()]
    }

    pub fn blockings(&self) -> [f64; CELLS] {
        let mut out = [0.0; CELLS];
        for (o, c) in out.iter_mut().zip(&self.cells) {
            *o = c.blocking;
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct Departure {
    time: f64,
    seq: u64,
    cell: CellId,
    channel: ChannelRef,
}

impl PartialEq for Departure {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Departure {}

impl PartialOrd for Departure {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Departure {
    // reversed: BinaryHeap pops the earliest departure
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn exponential(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    if rate <= 0.0 {
        return f64::INFINITY;
    }
    let u: f64 = rng.random();
    -(1.0 - u).ln() / rate
}

#[derive(Default, Clone)]
struct BatchTally {
    offered: [u64; CELLS],
    blocked: [u64; CELLS],
}

/// Ratio-estimator batch-means standard error of `sum(blocked) / sum(offered)`.
fn ratio_se(batches: &[(u64, u64)]) -> f64 {
    let used: Vec<_> = batches.iter().filter(|(o, _)| *o > 0).collect();
    let b = used.len();
    if b < 2 {
        return 0.0;
    }
    let offered: u64 = used.iter().map(|(o, _)| o).sum();
    let blocked: u64 = used.iter().map(|(_, x)| x).sum();
    let p = blocked as f64 / offered as f64;
    let mean_offered = offered as f64 / b as f64;
    let ss: f64 = used
        .iter()
        .map(|(o, x)| {
            let r = (*x as f64 - p * *o as f64) / mean_offered;
            r * r
        })
        .sum();
    (ss / (b as f64 * (b as f64 - 1.0))).sqrt()
}

/// Time integrals of the per-cell state, flushed lazily: a cell's integrals
/// are brought up to date only just before an event changes what they measure.
struct Integrals {
    observing: bool,
    last: [f64; CELLS],
    busy: [f64; CELLS],
    channels: [f64; CELLS],
    contested: [f64; CELLS],
    contested_idle: [f64; CELLS],
}

impl Integrals {
    fn new() -> Self {
        Integrals {
            observing: false,
            last: [0.0; CELLS],
            busy: [0.0; CELLS],
            channels: [0.0; CELLS],
            contested: [0.0; CELLS],
            contested_idle: [0.0; CELLS],
        }
    }

    fn start(&mut self, t: f64) {
        self.observing = true;
        self.last = [t; CELLS];
    }

    fn flush(&mut self, cluster: &Cluster, cell: CellId, t: f64) {
        let i = cell.index();
        if self.observing {
            let dt = t - self.last[i];
            let c = cluster.cell(cell);
            self.busy[i] += dt * c.busy() as f64;
            self.channels[i] += dt * c.channel_count() as f64;
            if !cell.is_reference() {
                let width = contested_width(cluster, cell);
                if width > 0 {
                    self.contested[i] += dt;
                    if c.available() >= width {
                        self.contested_idle[i] += dt;
                    }
                }
            }
        }
        self.last[i] = t;
    }

    /// Flushes every cell whose state or contested width changes when
    /// `donor` lends or takes back a channel.
    fn flush_loan(&mut self, cluster: &Cluster, donor: CellId, t: f64) {
        self.flush(cluster, CellId::REFERENCE, t);
        for &m in donor.group().members() {
            self.flush(cluster, m, t);
        }
    }

    fn flush_all(&mut self, cluster: &Cluster, t: f64) {
        for cell in CellId::all() {
            self.flush(cluster, cell, t);
        }
    }
}

/// Channels of `cell`'s band currently on loan from its group mates.
fn contested_width(cluster: &Cluster, cell: CellId) -> u32 {
    cell.group()
        .members()
        .iter()
        .filter(|&&m| m != cell)
        .map(|&m| cluster.on_loan(m))
        .sum()
}

/// Runs one replication. Identical configs give identical statistics.
pub fn run(config: &SimConfig) -> Result<SimStats, SimError> {
    config.validate()?;
    let mut cluster = Cluster::new(config.n_per_cell, config.n_th)?;
    let lambdas: Vec<f64> = config.traffic.profiles.iter().map(|p| p.lambda).collect();
    let mus: Vec<f64> = config.traffic.profiles.iter().map(|p| p.mu).collect();

    let mut rngs: Vec<ChaCha8Rng> = (0..CELLS)
        .map(|i| {
            let mut r = ChaCha8Rng::seed_from_u64(config.seed);
            r.set_stream(i as u64 + 1);
            r
        })
        .collect();
    let mut next_arrival = [f64::INFINITY; CELLS];
    for (t, (rng, &lambda)) in next_arrival.iter_mut().zip(rngs.iter_mut().zip(&lambdas)) {
        *t = exponential(rng, lambda);
    }
    if next_arrival.iter().all(|t| t.is_infinite()) {
        return Ok(empty_stats());
    }

    let (warmup_arrivals, warmup_time, end_time) = match config.horizon {
        Horizon::Arrivals(n) => ((n as f64 * config.warmup_fraction) as u64, None, f64::INFINITY),
        Horizon::Seconds(t) => (0, Some(t * config.warmup_fraction), t),
    };
    let post_arrivals = match config.horizon {
        Horizon::Arrivals(n) => n - warmup_arrivals,
        Horizon::Seconds(_) => 0,
    };
    let batches = config.batches as usize;
    let mut tally = vec![BatchTally::default(); batches];

    let mut departures: BinaryHeap<Departure> = BinaryHeap::new();
    let mut seq = 0u64;
    let mut now = 0.0f64;
    let mut observe_from: Option<f64> = None;
    let mut integrals = Integrals::new();
    if warmup_arrivals == 0 && warmup_time.is_none_or(|w| w == 0.0) {
        observe_from = Some(0.0);
        integrals.start(0.0);
    }
    let mut stats_offered = [0u64; CELLS];
    let mut stats_blocked = [0u64; CELLS];
    let mut generated = 0u64;
    let mut events = 0u64;
    let mut checks = 0u64;
    let mut borrow_events = 0u64;

    loop {
        let mut arrival_cell = 0;
        for i in 1..CELLS {
            if next_arrival[i] < next_arrival[arrival_cell] {
                arrival_cell = i;
            }
        }
        let arrival_time = next_arrival[arrival_cell];
        let departure_time = departures.peek().map_or(f64::INFINITY, |d| d.time);
        let t = arrival_time.min(departure_time);
        if t > end_time {
            break;
        }
        if observe_from.is_none() {
            if let Some(w) = warmup_time {
                if t >= w {
                    observe_from = Some(w);
                    integrals.start(w);
                }
            }
        }
        now = t;
        events += 1;

        if departure_time <= arrival_time {
            let d = departures.pop().expect("peeked");
            integrals.flush(&cluster, d.cell, t);
            match d.channel {
                ChannelRef::Borrowed { donor, slot } => {
                    integrals.flush_loan(&cluster, donor, t);
                    finish_borrowed_call(&mut cluster, donor, slot)?;
                }
                own => cluster.cell_mut(d.cell).transition(own, ChannelState::Free)?,
            }
        } else {
            let i = arrival_cell;
            let cell = CellId::from_index(i);
            let holding = exponential(&mut rngs[i], mus[i]);
            next_arrival[i] = t + exponential(&mut rngs[i], lambdas[i]);
            generated += 1;

            if observe_from.is_none() && warmup_time.is_none() && generated > warmup_arrivals {
                observe_from = Some(t);
                integrals.start(t);
            }
            let counted = match config.horizon {
                Horizon::Arrivals(_) => generated > warmup_arrivals,
                Horizon::Seconds(_) => observe_from.is_some(),
            };

            integrals.flush(&cluster, cell, t);
            let mut channel = cluster.cell_mut(cell).occupy();
            if channel.is_none() && config.borrowing && cell.is_reference() {
                let plan = plan_borrow(&cluster, 1);
                if plan.granted() > 0 {
                    for g in &plan.grants {
                        integrals.flush_loan(&cluster, g.donor, t);
                    }
                    execute_plan(&mut cluster, &plan)?;
                    borrow_events += 1;
                    channel = cluster.cell_mut(cell).occupy();
                }
            }
            if let Some(channel) = channel {
                seq += 1;
                departures.push(Departure {
                    time: t + holding,
                    seq,
                    cell,
                    channel,
                });
            }
            if counted {
                stats_offered[i] += 1;
                let blocked = channel.is_none();
                if blocked {
                    stats_blocked[i] += 1;
                }
                let b = match config.horizon {
                    Horizon::Arrivals(_) => {
                        let j = generated - warmup_arrivals - 1;
                        (j * batches as u64 / post_arrivals) as usize
                    }
                    Horizon::Seconds(total) => {
                        let start = warmup_time.unwrap_or(0.0);
                        (((t - start) / (total - start)) * batches as f64) as usize
                    }
                }
                .min(batches - 1);
                tally[b].offered[i] += 1;
                if blocked {
                    tally[b].blocked[i] += 1;
                }
            }

            match config.fault {
                Some(Fault::LowerThreshold { after_arrivals, n_th }) if generated == after_arrivals => {
                    cluster.corrupt_threshold(n_th);
                }
                Some(Fault::LeakChannel { after_arrivals }) if generated == after_arrivals => {
                    integrals.flush_all(&cluster, t);
                    if !cluster.leak_borrowed_channel() {
                        let victim = CellId::from_index(1);
                        if let Some(ChannelRef::Own(slot)) = cluster.cell(victim).first_free() {
                            cluster
                                .cell_mut(victim)
                                .transition(ChannelRef::Own(slot), ChannelState::Lent)?;
                        }
                    }
                }
                _ => {}
            }
        }

        cluster
            .check_invariants_with_floor(config.n_th)
            .map_err(|violation| SimError::Invariant {
                arrivals: generated,
                time: now,
                violation,
            })?;
        checks += 1;

        if let Horizon::Arrivals(n) = config.horizon {
            if generated >= n {
                break;
            }
        }
    }

    if let Horizon::Seconds(total) = config.horizon {
        now = total;
    }
    integrals.flush_all(&cluster, now);

    let observed = observe_from.map_or(0.0, |s| now - s);
    let mut cells = Vec::with_capacity(CELLS);
    for i in 0..CELLS {
        let offered = stats_offered[i];
        let blocked = stats_blocked[i];
        let per_batch: Vec<(u64, u64)> = tally.iter().map(|b| (b.offered[i], b.blocked[i])).collect();
        cells.push(CellStats {
            offered,
            blocked,
            carried: offered - blocked,
            blocking: ratio(blocked, offered),
            blocking_se: ratio_se(&per_batch),
            mean_busy: time_average(integrals.busy[i], observed),
            mean_channels: time_average(integrals.channels[i], observed),
            contested_idle_fraction: (integrals.contested[i] > 0.0)
                .then(|| integrals.contested_idle[i] / integrals.contested[i]),
        });
    }
    let offered: u64 = stats_offered.iter().sum();
    let blocked: u64 = stats_blocked.iter().sum();
    let overall_batches: Vec<(u64, u64)> = tally
        .iter()
        .map(|b| (b.offered.iter().sum(), b.blocked.iter().sum()))
        .collect();
    let total_channels = (CELLS as u64 * config.n_per_cell as u64) as f64;
    let utilization = if total_channels > 0.0 {
        cells.iter().map(|c| c.mean_busy).sum::<f64>() / total_channels
    } else {
        0.0
    };
    Ok(SimStats {
        cells,
        offered,
        blocked,
        carried: offered - blocked,
        overall_blocking: ratio(blocked, offered),
        overall_blocking_se: ratio_se(&overall_batches),
        utilization,
        generated_arrivals: generated,
        warmup_arrivals: generated - offered,
        events,
        invariant_checks: checks,
        borrow_events,
        observed_seconds: observed,
    })
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn time_average(integral: f64, span: f64) -> f64 {
    if span > 0.0 {
        integral / span
    } else {
        0.0
    }
}

fn empty_stats() -> SimStats {
    let cell = CellStats {
        offered: 0,
        blocked: 0,
        carried: 0,
        blocking: 0.0,
        blocking_se: 0.0,
        mean_busy: 0.0,
        mean_channels: 0.0,
        contested_idle_fraction: None,
    };
    SimStats {
        cells: vec![cell; CELLS],
        offered: 0,
        blocked: 0,
        carried: 0,
        overall_blocking: 0.0,
        overall_blocking_se: 0.0,
        utilization: 0.0,
        generated_arrivals: 0,
        warmup_arrivals: 0,
        events: 0,
        invariant_checks: 0,
        borrow_events: 0,
        observed_seconds: 0.0,
    }
}

/// Runs several independent configs in parallel; results keep input order.
pub fn run_many(configs: &[SimConfig]) -> Vec<Result<SimStats, SimError>> {
    configs.par_iter().map(run).collect()
}

/// Mean and standard error across replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl Estimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Estimate {
                mean: 0.0,
                se: 0.0,
                n,
            };
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let se = if n > 1 {
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Estimate { mean, se, n }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Flagged,
    /// No sampling variation to scale the difference by.
    Incomparable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZScore {
    pub analytic: f64,
    pub empirical: f64,
    pub stderr: f64,
    pub z: Option<f64>,
    pub verdict: Verdict,
}

/// Flags a difference larger than this many standard errors.
pub const Z_LIMIT: f64 = 3.0;

pub fn z_score(analytic: f64, empirical: f64, stderr: f64) -> ZScore {
    if !(stderr > 0.0) {
        return ZScore {
            analytic,
            empirical,
            stderr,
            z: None,
            verdict: Verdict::Incomparable,
        };
    }
    let z = (empirical - analytic) / stderr;
    ZScore {
        analytic,
        empirical,
        stderr,
        z: Some(z),
        verdict: if z.abs() > Z_LIMIT {
            Verdict::Flagged
        } else {
            Verdict::Pass
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellComparison {
    pub cell: u8,
    pub offered: u64,
    pub blocked: u64,
    pub score: ZScore,
    /// Too few blocking events (observed and expected) for a normal approximation.
    pub low_confidence: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub cells: Vec<CellComparison>,
    pub overall: ZScore,
}

impl ComparisonReport {
    pub fn flagged(&self) -> impl Iterator<Item = &CellComparison> {
        self.cells
            .iter()
            .filter(|c| c.score.verdict == Verdict::Flagged && !c.low_confidence)
    }
}

/// Blocking events needed, observed or expected, before a z-score is trusted.
pub const MIN_BLOCKING_EVENTS: f64 = 30.0;

/// Compares per-cell analytic blocking with a simulation run.
pub fn compare(analytic: &[f64], empirical: &SimStats) -> Result<ComparisonReport, SimError> {
    if analytic.len() != empirical.cells.len() {
        return Err(SimError::InvalidConfig(format!(
            "{} analytic values for {} simulated cells",
            analytic.len(),
            empirical.cells.len()
        )));
    }
    let cells = analytic
        .iter()
        .zip(&empirical.cells)
        .enumerate()
        .map(|(i, (&a, c))| {
            let expected = a * c.offered as f64;
            CellComparison {
                cell: i as u8 + 1,
                offered: c.offered,
                blocked: c.blocked,
                score: z_score(a, c.blocking, c.blocking_se),
                low_confidence: (c.blocked as f64) < MIN_BLOCKING_EVENTS
                    && expected < MIN_BLOCKING_EVENTS,
            }
        })
        .collect();
    let overall_analytic = crate::queuing::weighted_mean(
        empirical.cells.iter().map(|c| c.offered as f64),
        analytic.iter().copied(),
    );
    Ok(ComparisonReport {
        cells,
        overall: z_score(
            overall_analytic,
            empirical.overall_blocking,
            empirical.overall_blocking_se,
        ),
    })
}

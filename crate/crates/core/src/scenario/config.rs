//! JSON scenario configuration. Every field is optional; omitted fields take
//! the reference deployment's values.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cluster::{CellId, FrequencyBand, CELLS};
use crate::interference::{HexGeometry, ServingChannel, Strategy, DEFAULT_BAND_MAP, SITES};
use crate::queuing::{ClusterTraffic, TrafficProfile};
use crate::rf::{self, RfEnvironment};
use crate::sim::{Horizon, SimConfig};

use super::ScenarioError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub cluster: ClusterConfig,
    pub traffic: TrafficConfig,
    pub rf: RfConfig,
    pub geometry: GeometryConfig,
    /// Mitigation strategy reported as the "proposed" column of the RF figures.
    pub strategy: Strategy,
    pub simulation: SimulationConfig,
    pub outputs: OutputConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            cluster: ClusterConfig::default(),
            traffic: TrafficConfig::default(),
            rf: RfConfig::default(),
            geometry: GeometryConfig::default(),
            strategy: Strategy::AdjacentBifurcation,
            simulation: SimulationConfig::default(),
            outputs: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterConfig {
    /// Channels per cell.
    pub n: u32,
    /// Channels a donor always keeps.
    pub n_th: u32,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig { n: 100, n_th: 70 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficConfig {
    /// Relative call arrival rate of cells 1..=7.
    pub ratio: Vec<f64>,
    /// Mean call holding time, seconds.
    pub holding_time_s: f64,
    /// Explicit grid of total arrival rates, calls per second. Overrides `load_grid`.
    pub arrival_rates: Option<Vec<f64>>,
    pub load_grid: LoadGrid,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        TrafficConfig {
            ratio: vec![7.0, 1.0, 2.0, 4.0, 5.0, 5.0, 6.0],
            holding_time_s: 90.0,
            arrival_rates: None,
            load_grid: LoadGrid::default(),
        }
    }
}

/// Evenly spaced total offered loads, as fractions of the cluster's channel count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoadGrid {
    pub start_fraction: f64,
    pub stop_fraction: f64,
    pub points: u32,
}

impl Default for LoadGrid {
    fn default() -> Self {
        LoadGrid {
            start_fraction: 0.1,
            stop_fraction: 1.5,
            points: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfConfig {
    pub carrier_mhz: f64,
    pub bs_height_m: f64,
    pub ms_height_m: f64,
    pub penetration_loss_db: f64,
    pub tx_power_w: f64,
    /// Receiver noise power; `null` evaluates pure SIR.
    pub noise_floor_dbm: Option<f64>,
    /// SINR below which a user is in outage.
    pub outage_threshold_db: f64,
}

impl Default for RfConfig {
    fn default() -> Self {
        let env = RfEnvironment::default();
        RfConfig {
            carrier_mhz: env.carrier_mhz,
            bs_height_m: env.bs_height_m,
            ms_height_m: env.ms_height_m,
            penetration_loss_db: env.penetration_loss_db,
            tx_power_w: 1500.0,
            noise_floor_dbm: env.noise_floor_dbm,
            outage_threshold_db: 9.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub cell_radius_km: f64,
    pub inner_radius_km: f64,
    /// User bearing from the reference site; `null` picks the worst case.
    pub azimuth_deg: Option<f64>,
    /// Bands of the 18 surrounding sites: six tier-1 sites (cells 2..=7),
    /// then twelve tier-2 sites counter-clockwise from 0 degrees.
    pub band_map: Option<Vec<FrequencyBand>>,
    /// Cell that lent the evaluated user's channel; `null` serves the user on
    /// an original channel.
    pub serving_donor: Option<u8>,
    /// The donor keeps using the lent frequencies for its own inner users.
    pub donor_inner_reuse: bool,
    /// Busy probability of each cell's contested channels. `null` derives it
    /// from the analytic model at `occupancy_load_fraction`.
    pub occupancy: Option<Vec<f64>>,
    /// Total offered load, as a fraction of the cluster's channels, used to
    /// derive occupancy.
    pub occupancy_load_fraction: f64,
    pub sweep: DistanceSweep,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            cell_radius_km: 1.0,
            inner_radius_km: 0.5,
            azimuth_deg: None,
            band_map: Some(DEFAULT_BAND_MAP.to_vec()),
            serving_donor: Some(2),
            donor_inner_reuse: false,
            occupancy: None,
            occupancy_load_fraction: 1.0,
            sweep: DistanceSweep::default(),
        }
    }
}

/// Inclusive distance range for the RF figures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistanceSweep {
    pub start_km: f64,
    pub stop_km: f64,
    pub step_km: f64,
}

impl Default for DistanceSweep {
    fn default() -> Self {
        DistanceSweep {
            start_km: 0.05,
            stop_km: 1.0,
            step_km: 0.05,
        }
    }
}

impl DistanceSweep {
    /// Parses `start:stop:step`.
    pub fn parse(spec: &str) -> Result<Self, ScenarioError> {
        let parts: Vec<&str> = spec.split(':').collect();
        let bad = || ScenarioError::Usage(format!("sweep {spec:?} is not start:stop:step in km"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let mut v = [0.0; 3];
        for (slot, p) in v.iter_mut().zip(&parts) {
            *slot = p.trim().parse().map_err(|_| bad())?;
        }
        let sweep = DistanceSweep {
            start_km: v[0],
            stop_km: v[1],
            step_km: v[2],
        };
        sweep.validate("sweep")?;
        Ok(sweep)
    }

    fn validate(&self, field: &str) -> Result<(), ScenarioError> {
        if !(self.start_km > 0.0 && self.step_km > 0.0 && self.stop_km >= self.start_km) {
            return Err(ScenarioError::invalid(
                field,
                "0 < start_km <= stop_km and step_km > 0",
            ));
        }
        if self.len() > 1_000_000 {
            return Err(ScenarioError::invalid(field, "at most 1e6 distances"));
        }
        Ok(())
    }

    fn len(&self) -> usize {
        ((self.stop_km - self.start_km) / self.step_km + 1e-9).floor() as usize + 1
    }

    /// Distances `start + i * step` up to `stop`, endpoints included.
    pub fn distances(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.start_km + i as f64 * self.step_km)
            // drop accumulated binary noise such as 0.15000000000000002
            .map(|d| ((d * 1e12).round() / 1e12).min(self.stop_km))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    /// Adds simulated columns to the load figures.
    pub enabled: bool,
    pub borrowing: bool,
    /// Replication `i` uses seed `seed + i`.
    pub seed: u64,
    pub replications: u32,
    /// Arrivals generated per replication, all cells together.
    pub horizon_arrivals: u64,
    pub warmup_fraction: f64,
    pub batches: u32,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            enabled: false,
            borrowing: true,
            seed: 1,
            replications: 10,
            horizon_arrivals: 300_000,
            warmup_fraction: 0.1,
            batches: 32,
        }
    }
}

impl SimulationConfig {
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.replications as u64)
            .map(|i| self.seed.wrapping_add(i))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: String,
    pub figures: Vec<u32>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: "out".into(),
            figures: vec![9, 10, 11, 12, 13, 14],
        }
    }
}

pub const FIGURES: [u32; 6] = [9, 10, 11, 12, 13, 14];

fn finite(field: &str, value: f64) -> Result<(), ScenarioError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(ScenarioError::invalid(field, "must be finite"))
    }
}

fn positive(field: &str, value: f64) -> Result<(), ScenarioError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ScenarioError::invalid(field, "must be positive"))
    }
}

impl ScenarioConfig {
    /// Parses JSON text; shape errors carry the offending field path.
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: ScenarioConfig =
            serde_path_to_error::deserialize(de).map_err(|e| ScenarioError::Schema {
                path: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&canonical)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let c = &self.cluster;
        if c.n == 0 {
            return Err(ScenarioError::invalid("cluster.n", "must be at least 1"));
        }
        if c.n_th > c.n {
            return Err(ScenarioError::invalid("cluster.n_th", "n_th <= n"));
        }

        let t = &self.traffic;
        if t.ratio.len() != CELLS {
            return Err(ScenarioError::invalid("traffic.ratio", "exactly 7 entries"));
        }
        if t.ratio.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(ScenarioError::invalid("traffic.ratio", "entries nonnegative"));
        }
        if t.ratio.iter().all(|&r| r == 0.0) {
            return Err(ScenarioError::invalid("traffic.ratio", "not all zero"));
        }
        positive("traffic.holding_time_s", t.holding_time_s)?;
        match &t.arrival_rates {
            Some(rates) => {
                if rates.is_empty() {
                    return Err(ScenarioError::invalid("traffic.arrival_rates", "nonempty"));
                }
                if rates.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
                    return Err(ScenarioError::invalid(
                        "traffic.arrival_rates",
                        "entries nonnegative",
                    ));
                }
                if rates.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(ScenarioError::invalid(
                        "traffic.arrival_rates",
                        "strictly increasing",
                    ));
                }
            }
            None => {
                let g = &t.load_grid;
                if g.points == 0 {
                    return Err(ScenarioError::invalid("traffic.load_grid.points", "nonempty"));
                }
                finite("traffic.load_grid.start_fraction", g.start_fraction)?;
                finite("traffic.load_grid.stop_fraction", g.stop_fraction)?;
                if g.start_fraction < 0.0 {
                    return Err(ScenarioError::invalid(
                        "traffic.load_grid.start_fraction",
                        "nonnegative",
                    ));
                }
                if g.points > 1 && g.stop_fraction <= g.start_fraction {
                    return Err(ScenarioError::invalid(
                        "traffic.load_grid",
                        "strictly increasing",
                    ));
                }
            }
        }

        let r = &self.rf;
        if !(150.0..=2000.0).contains(&r.carrier_mhz) {
            return Err(ScenarioError::invalid("rf.carrier_mhz", "150 <= carrier_mhz <= 2000"));
        }
        positive("rf.bs_height_m", r.bs_height_m)?;
        positive("rf.ms_height_m", r.ms_height_m)?;
        finite("rf.penetration_loss_db", r.penetration_loss_db)?;
        positive("rf.tx_power_w", r.tx_power_w)?;
        if let Some(n) = r.noise_floor_dbm {
            finite("rf.noise_floor_dbm", n)?;
        }
        finite("rf.outage_threshold_db", r.outage_threshold_db)?;

        let g = &self.geometry;
        positive("geometry.cell_radius_km", g.cell_radius_km)?;
        if !(g.inner_radius_km > 0.0 && g.inner_radius_km <= g.cell_radius_km) {
            return Err(ScenarioError::invalid(
                "geometry.inner_radius_km",
                "0 < inner_radius_km <= cell_radius_km",
            ));
        }
        if let Some(az) = g.azimuth_deg {
            finite("geometry.azimuth_deg", az)?;
        }
        if let Some(map) = &g.band_map {
            if map.len() != SITES {
                return Err(ScenarioError::invalid("geometry.band_map", "exactly 18 entries"));
            }
        }
        if let Some(d) = g.serving_donor {
            if !(2..=7).contains(&d) {
                return Err(ScenarioError::invalid("geometry.serving_donor", "a cell id in 2..=7"));
            }
        }
        if let Some(occ) = &g.occupancy {
            if occ.len() != CELLS {
                return Err(ScenarioError::invalid("geometry.occupancy", "exactly 7 entries"));
            }
            if occ.iter().any(|f| !(0.0..=1.0).contains(f)) {
                return Err(ScenarioError::invalid("geometry.occupancy", "entries in [0, 1]"));
            }
        }
        if !(g.occupancy_load_fraction.is_finite() && g.occupancy_load_fraction >= 0.0) {
            return Err(ScenarioError::invalid(
                "geometry.occupancy_load_fraction",
                "nonnegative",
            ));
        }
        g.sweep.validate("geometry.sweep")?;
        if g.sweep.stop_km > g.cell_radius_km {
            return Err(ScenarioError::invalid(
                "geometry.sweep.stop_km",
                "stop_km <= cell_radius_km",
            ));
        }

        let s = &self.simulation;
        if s.replications == 0 {
            return Err(ScenarioError::invalid("simulation.replications", "at least 1"));
        }
        if s.horizon_arrivals == 0 {
            return Err(ScenarioError::invalid("simulation.horizon_arrivals", "at least 1"));
        }
        if !(0.0..1.0).contains(&s.warmup_fraction) {
            return Err(ScenarioError::invalid(
                "simulation.warmup_fraction",
                "0 <= warmup_fraction < 1",
            ));
        }
        if s.batches < 2 {
            return Err(ScenarioError::invalid("simulation.batches", "at least 2"));
        }

        for f in &self.outputs.figures {
            if !FIGURES.contains(f) {
                return Err(ScenarioError::UnknownFigure(*f));
            }
        }
        Ok(())
    }

    pub fn mu(&self) -> f64 {
        1.0 / self.traffic.holding_time_s
    }

    /// Total channels in the cluster before borrowing.
    pub fn total_channels(&self) -> u32 {
        CELLS as u32 * self.cluster.n
    }

    /// Total arrival rates (calls/s) of the load grid.
    pub fn arrival_rates(&self) -> Vec<f64> {
        if let Some(rates) = &self.traffic.arrival_rates {
            return rates.clone();
        }
        let g = &self.traffic.load_grid;
        let erlangs_per_fraction = self.total_channels() as f64;
        let points = g.points as usize;
        (0..points)
            .map(|i| {
                let frac = if points == 1 {
                    g.start_fraction
                } else {
                    g.start_fraction
                        + (g.stop_fraction - g.start_fraction) * i as f64 / (points - 1) as f64
                };
                frac * erlangs_per_fraction * self.mu()
            })
            .collect()
    }

    /// Splits a total arrival rate over the cells in proportion to the ratio.
    pub fn per_cell_rates(&self, total: f64) -> [f64; CELLS] {
        let sum: f64 = self.traffic.ratio.iter().sum();
        let mut out = [0.0; CELLS];
        for (o, r) in out.iter_mut().zip(&self.traffic.ratio) {
            *o = total * r / sum;
        }
        out
    }

    /// Cluster traffic at a total arrival rate, every cell with `n` channels.
    pub fn cluster_traffic(&self, total: f64) -> ClusterTraffic {
        let mu = self.mu();
        let rates = self.per_cell_rates(total);
        let mut profiles = [TrafficProfile {
            lambda: 0.0,
            mu,
            capacity: self.cluster.n,
        }; CELLS];
        for (p, lambda) in profiles.iter_mut().zip(rates) {
            p.lambda = lambda;
        }
        ClusterTraffic {
            profiles,
            mu_total: mu,
        }
    }

    pub fn rf_environment(&self) -> RfEnvironment {
        RfEnvironment {
            carrier_mhz: self.rf.carrier_mhz,
            bs_height_m: self.rf.bs_height_m,
            ms_height_m: self.rf.ms_height_m,
            penetration_loss_db: self.rf.penetration_loss_db,
            tx_power_dbm: rf::watts_to_dbm(self.rf.tx_power_w),
            cell_radius_km: self.geometry.cell_radius_km,
            noise_floor_dbm: self.rf.noise_floor_dbm,
        }
    }

    pub fn hex_geometry(&self) -> HexGeometry {
        let mut bands = DEFAULT_BAND_MAP;
        if let Some(map) = &self.geometry.band_map {
            bands.copy_from_slice(map);
        }
        HexGeometry::with_bands(self.geometry.cell_radius_km, bands)
    }

    pub fn serving(&self) -> ServingChannel {
        match self.geometry.serving_donor {
            Some(d) => ServingChannel::Borrowed {
                donor: CellId::new(d).expect("validated donor id"),
            },
            None => ServingChannel::Original,
        }
    }

    pub fn azimuth_deg(&self) -> f64 {
        self.geometry
            .azimuth_deg
            .unwrap_or_else(|| self.hex_geometry().worst_case_azimuth(self.serving()))
    }

    /// Simulation config for one replication at a total arrival rate.
    pub fn sim_config(&self, total: f64, borrowing: bool, seed: u64) -> SimConfig {
        SimConfig {
            traffic: self.cluster_traffic(total),
            n_per_cell: self.cluster.n,
            n_th: self.cluster.n_th,
            borrowing,
            seed,
            horizon: Horizon::Arrivals(self.simulation.horizon_arrivals),
            warmup_fraction: self.simulation.warmup_fraction,
            batches: self.simulation.batches,
            fault: None,
        }
    }
}

/// Reads and validates a config file.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig, ScenarioError> {
    let text = fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    ScenarioConfig::from_json(&text)
}

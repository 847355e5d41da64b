//! Co-channel interference seen by a user of the reference cell.
//!
//! The reference site sits at the origin of a hexagonal lattice with
//! inter-site distance `sqrt(3) R`. Two rings of interferers are modeled:
//! the six neighbours of the own cluster (cells 2 to 7, tier 1) and the
//! twelve sites of the next ring (tier 2). Which of them actually interfere
//! depends on the band the user is served on and on the active mitigation
//! strategy.
//!
//! The outage probability assumes Rayleigh fading on the wanted signal with
//! fixed interferer powers: `P(S < gamma * I)` for exponential `S` with mean
//! `S_o` is `1 - exp(-gamma * I / S_o)`, and an interferer that is active
//! with probability `f` contributes the factor `1 - f + f exp(...)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::{
    CellId, ChannelRef, ChannelState, Cluster, ClusterError, FrequencyBand, Group,
};
use crate::rf::{self, RfEnvironment, RfError};

pub const TIER1_SITES: usize = 6;
pub const TIER2_SITES: usize = 12;
pub const SITES: usize = TIER1_SITES + TIER2_SITES;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InterferenceError {
    #[error("unknown mitigation strategy {0:?}")]
    UnknownStrategy(String),
    #[error("user distance {distance} km outside the cell radius {radius} km")]
    UserOutsideCell { distance: f64, radius: f64 },
    #[error("user on a borrowed band at {distance} km lies outside the inner zone ({inner} km)")]
    OutsideInnerZone { distance: f64, inner: f64 },
    #[error("inner radius {inner} km must lie in (0, {radius}] km")]
    BadInnerRadius { inner: f64, radius: f64 },
    #[error("occupied fraction {0} outside [0, 1]")]
    BadFraction(f64),
    #[error("serving donor {0} must be a non-reference cell")]
    BadDonor(CellId),
    #[error("received signal power is zero")]
    ZeroSignal,
    #[error(transparent)]
    Rf(#[from] RfError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Borrowed channels are used everywhere; nothing is coordinated.
    None,
    /// Borrowed channels serve only the inner part of the reference cell.
    ReferenceBifurcation,
    /// Idle co-channel slots in the other group members are switched off.
    BlockInterfering,
    /// Busy co-channel slots in the other group members serve only their
    /// inner users, at reduced power.
    AdjacentBifurcation,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::None,
        Strategy::ReferenceBifurcation,
        Strategy::BlockInterfering,
        Strategy::AdjacentBifurcation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::None => "none",
            Strategy::ReferenceBifurcation => "reference_bifurcation",
            Strategy::BlockInterfering => "block_interfering",
            Strategy::AdjacentBifurcation => "adjacent_bifurcation",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = InterferenceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == norm)
            .ok_or_else(|| InterferenceError::UnknownStrategy(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Site {
    pub index: usize,
    pub tier: u8,
    /// Own-cluster cell for tier-1 sites.
    pub cell: Option<CellId>,
    pub x_km: f64,
    pub y_km: f64,
    pub band: FrequencyBand,
}

impl Site {
    pub fn distance_to(&self, x: f64, y: f64) -> f64 {
        (self.x_km - x).hypot(self.y_km - y)
    }

    pub fn azimuth_deg(&self) -> f64 {
        self.y_km.atan2(self.x_km).to_degrees().rem_euclid(360.0)
    }
}

/// Band of every interfering site obtained by tiling the plane with the
/// seven-cell pattern: tier 1 alternates Y/Z starting with cell 2, the six
/// tier-2 sites at `3R` reuse X, and each tier-2 site at `2 sqrt(3) R`
/// carries the band the tier-1 site in front of it does not.
pub const DEFAULT_BAND_MAP: [FrequencyBand; SITES] = {
    use FrequencyBand::{X, Y, Z};
    [
        Y, Z, Y, Z, Y, Z, // tier 1, cells 2..=7
        X, X, X, X, X, X, // tier 2 at 3R
        Z, Y, Z, Y, Z, Y, // tier 2 at 2 sqrt(3) R
    ]
};

/// Reference site plus two rings of interferers.
///
/// Site order: tier-1 sites for cells 2 to 7 at azimuths 30, 90, ..., 330
/// degrees; tier-2 sites at distance `3R` and azimuths 0, 60, ..., 300; then
/// tier-2 sites at `2 sqrt(3) R` and azimuths 30, 90, ..., 330.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HexGeometry {
    cell_radius_km: f64,
    sites: Vec<Site>,
}

impl HexGeometry {
    pub fn new(cell_radius_km: f64) -> Self {
        Self::with_bands(cell_radius_km, DEFAULT_BAND_MAP)
    }

    pub fn with_bands(cell_radius_km: f64, bands: [FrequencyBand; SITES]) -> Self {
        let r = cell_radius_km;
        let d = 3f64.sqrt() * r;
        let mut sites = Vec::with_capacity(SITES);
        let mut push = |tier: u8, cell: Option<CellId>, dist: f64, az_deg: f64| {
            let index = sites.len();
            let az = az_deg * PI / 180.0;
            sites.push(Site {
                index,
                tier,
                cell,
                x_km: dist * az.cos(),
                y_km: dist * az.sin(),
                band: bands[index],
            });
        };
        for k in 0..6 {
            push(1, Some(CellId::from_index(k + 1)), d, 30.0 + 60.0 * k as f64);
        }
        for k in 0..6 {
            push(2, None, 3.0 * r, 60.0 * k as f64);
        }
        for k in 0..6 {
            push(2, None, 2.0 * d, 30.0 + 60.0 * k as f64);
        }
        HexGeometry {
            cell_radius_km,
            sites,
        }
    }

    pub fn cell_radius_km(&self) -> f64 {
        self.cell_radius_km
    }

    pub fn intersite_distance_km(&self) -> f64 {
        3f64.sqrt() * self.cell_radius_km
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn tier(&self, tier: u8) -> impl Iterator<Item = &Site> {
        self.sites.iter().filter(move |s| s.tier == tier)
    }

    pub fn site_of(&self, cell: CellId) -> Option<&Site> {
        self.sites.iter().find(|s| s.cell == Some(cell))
    }

    /// Distance from a user at (`d_km`, `azimuth_deg`) around the reference
    /// site to each of the 18 interfering sites.
    pub fn interferer_distances(&self, d_km: f64, azimuth_deg: f64) -> Vec<(usize, f64)> {
        let (x, y) = polar(d_km, azimuth_deg);
        self.sites
            .iter()
            .map(|s| (s.index, s.distance_to(x, y)))
            .collect()
    }

    /// Azimuth toward the nearest tier-1 site sharing the serving band,
    /// excluding the donor. Falls back to 0 degrees when there is none.
    pub fn worst_case_azimuth(&self, serving: ServingChannel) -> f64 {
        let band = serving.band();
        self.tier(1)
            .find(|s| s.band == band && s.cell != serving.donor())
            .map_or(0.0, |s| s.azimuth_deg())
    }
}

fn polar(d: f64, az_deg: f64) -> (f64, f64) {
    let az = az_deg * PI / 180.0;
    (d * az.cos(), d * az.sin())
}

/// The channel the evaluated user is served on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServingChannel {
    /// One of the reference cell's own X channels.
    Original,
    /// A channel lent by `donor`.
    Borrowed { donor: CellId },
}

impl ServingChannel {
    pub fn band(self) -> FrequencyBand {
        match self {
            ServingChannel::Original => FrequencyBand::X,
            ServingChannel::Borrowed { donor } => donor.band(),
        }
    }

    pub fn donor(self) -> Option<CellId> {
        match self {
            ServingChannel::Original => None,
            ServingChannel::Borrowed { donor } => Some(donor),
        }
    }

    pub fn is_borrowed(self) -> bool {
        matches!(self, ServingChannel::Borrowed { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InterfererRole {
    /// Same-group neighbour that owns the frequencies the user borrowed.
    Contested,
    /// The cell that lent the user's channel.
    Donor,
    /// Any other site; not subject to mitigation.
    Background,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterfererRecord {
    pub site: usize,
    pub distance_km: f64,
    pub band: FrequencyBand,
    pub role: InterfererRole,
    /// Probability that the contested sub-range of this site carries a call.
    pub occupied_fraction: f64,
    /// Transmits at inner-zone power.
    pub inner_restricted: bool,
}

/// Everything needed to evaluate one user position.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterferenceScene {
    pub user_distance_km: f64,
    pub user_azimuth_deg: f64,
    pub serving: ServingChannel,
    pub interferers: Vec<InterfererRecord>,
    pub strategy: Strategy,
    pub inner_radius_km: f64,
    pub cell_radius_km: f64,
    /// The donor re-serves the lent frequencies to its own inner users.
    pub donor_inner_reuse: bool,
}

/// Inputs for [`InterferenceScene::build`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneSpec {
    pub distance_km: f64,
    pub azimuth_deg: f64,
    pub serving: ServingChannel,
    pub strategy: Strategy,
    pub inner_radius_km: f64,
    /// Contested-range occupancy per cell, indexed by cell id - 1. Only the
    /// entries of contested cells are read.
    pub occupancy: [f64; 7],
    pub donor_inner_reuse: bool,
}

impl InterferenceScene {
    /// Places the user and classifies every site. Under reference-cell
    /// bifurcation a user on a borrowed band is an inner user, so its
    /// distance is capped at the inner radius.
    pub fn build(geometry: &HexGeometry, spec: &SceneSpec) -> Result<Self, InterferenceError> {
        let radius = geometry.cell_radius_km();
        if !(spec.distance_km >= 0.0 && spec.distance_km <= radius * (1.0 + 1e-12)) {
            return Err(InterferenceError::UserOutsideCell {
                distance: spec.distance_km,
                radius,
            });
        }
        if let ServingChannel::Borrowed { donor } = spec.serving {
            if donor.is_reference() {
                return Err(InterferenceError::BadDonor(donor));
            }
        }
        let distance = if spec.strategy == Strategy::ReferenceBifurcation && spec.serving.is_borrowed()
        {
            spec.distance_km.min(spec.inner_radius_km)
        } else {
            spec.distance_km
        };
        let band = spec.serving.band();
        let (x, y) = polar(distance, spec.azimuth_deg);
        let interferers = geometry
            .sites()
            .iter()
            .map(|s| {
                let role = match (s.cell, spec.serving) {
                    (Some(c), ServingChannel::Borrowed { donor }) if c == donor => {
                        InterfererRole::Donor
                    }
                    (Some(c), ServingChannel::Borrowed { donor })
                        if c.group() == donor.group() && s.band == band =>
                    {
                        InterfererRole::Contested
                    }
                    _ => InterfererRole::Background,
                };
                let occupied_fraction = match (role, s.cell) {
                    (InterfererRole::Contested, Some(c)) => spec.occupancy[c.index()],
                    _ => 1.0,
                };
                InterfererRecord {
                    site: s.index,
                    distance_km: s.distance_to(x, y),
                    band: s.band,
                    role,
                    occupied_fraction,
                    inner_restricted: role == InterfererRole::Donor && spec.donor_inner_reuse,
                }
            })
            .collect();
        let scene = InterferenceScene {
            user_distance_km: distance,
            user_azimuth_deg: spec.azimuth_deg,
            serving: spec.serving,
            interferers,
            strategy: spec.strategy,
            inner_radius_km: spec.inner_radius_km,
            cell_radius_km: radius,
            donor_inner_reuse: spec.donor_inner_reuse,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<(), InterferenceError> {
        let radius = self.cell_radius_km;
        if !(self.inner_radius_km > 0.0 && self.inner_radius_km <= radius) {
            return Err(InterferenceError::BadInnerRadius {
                inner: self.inner_radius_km,
                radius,
            });
        }
        if !(self.user_distance_km >= 0.0 && self.user_distance_km <= radius * (1.0 + 1e-12)) {
            return Err(InterferenceError::UserOutsideCell {
                distance: self.user_distance_km,
                radius,
            });
        }
        if self.strategy == Strategy::ReferenceBifurcation
            && self.serving.is_borrowed()
            && self.user_distance_km > self.inner_radius_km
        {
            return Err(InterferenceError::OutsideInnerZone {
                distance: self.user_distance_km,
                inner: self.inner_radius_km,
            });
        }
        for r in &self.interferers {
            if !(0.0..=1.0).contains(&r.occupied_fraction) {
                return Err(InterferenceError::BadFraction(r.occupied_fraction));
            }
        }
        Ok(())
    }
}

/// 1 when `record` transmits on the user's frequency toward the user, else 0.
pub fn z_indicator(scene: &InterferenceScene, record: &InterfererRecord) -> u8 {
    if record.band != scene.serving.band() {
        return 0;
    }
    let on = match record.role {
        InterfererRole::Background => true,
        InterfererRole::Donor => scene.donor_inner_reuse,
        InterfererRole::Contested => match scene.strategy {
            Strategy::None | Strategy::ReferenceBifurcation => true,
            Strategy::BlockInterfering | Strategy::AdjacentBifurcation => {
                record.occupied_fraction > 0.0
            }
        },
    };
    on as u8
}

/// A site that reaches the user, with its transmit power and the
/// probability that it is transmitting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveInterferer {
    pub site: usize,
    pub distance_km: f64,
    pub tx_power_dbm: f64,
    pub activity: f64,
}

/// Power back-off of an inner-zone transmission: the loss difference between
/// the cell edge and the inner radius, so inner-edge users receive what a
/// cell-edge user would at full power.
pub fn inner_power_reduction_db(
    env: &RfEnvironment,
    cell_radius_km: f64,
    inner_radius_km: f64,
) -> Result<f64, RfError> {
    if inner_radius_km >= cell_radius_km {
        return Ok(0.0);
    }
    Ok(rf::path_loss(env, cell_radius_km)? - rf::path_loss(env, inner_radius_km)?)
}

/// Interferers left after the scene's strategy is applied.
pub fn apply_strategy(
    scene: &InterferenceScene,
    env: &RfEnvironment,
) -> Result<Vec<EffectiveInterferer>, InterferenceError> {
    scene.validate()?;
    let backoff = inner_power_reduction_db(env, scene.cell_radius_km, scene.inner_radius_km)?;
    let mut out = Vec::new();
    for r in &scene.interferers {
        if z_indicator(scene, r) == 0 {
            continue;
        }
        let (restricted, activity) = match (r.role, scene.strategy) {
            (InterfererRole::Contested, Strategy::BlockInterfering) => (false, r.occupied_fraction),
            (InterfererRole::Contested, Strategy::AdjacentBifurcation) => (true, r.occupied_fraction),
            _ => (r.inner_restricted, 1.0),
        };
        out.push(EffectiveInterferer {
            site: r.site,
            distance_km: r.distance_km,
            tx_power_dbm: env.tx_power_dbm - if restricted { backoff } else { 0.0 },
            activity,
        });
    }
    Ok(out)
}

/// Wanted signal, mean interference and noise in mW.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBudget {
    pub signal_mw: f64,
    pub interferers_mw: f64,
    pub noise_mw: f64,
}

pub fn power_budget(
    scene: &InterferenceScene,
    env: &RfEnvironment,
) -> Result<PowerBudget, InterferenceError> {
    let d = scene.user_distance_km;
    if !(d > 0.0) {
        return Err(RfError::BadDistance(d).into());
    }
    let signal_dbm = rf::received_power(env.tx_power_dbm, rf::path_loss(env, d)?);
    let mut interferers_mw = 0.0;
    for i in apply_strategy(scene, env)? {
        let p = rf::received_power(i.tx_power_dbm, rf::path_loss(env, i.distance_km)?);
        interferers_mw += i.activity * rf::db_to_linear(p);
    }
    Ok(PowerBudget {
        signal_mw: rf::db_to_linear(signal_dbm),
        interferers_mw,
        noise_mw: env.noise_floor_dbm.map_or(0.0, rf::db_to_linear),
    })
}

/// Signal to interference-plus-noise ratio as a plain ratio.
pub fn sinr_linear(scene: &InterferenceScene, env: &RfEnvironment) -> Result<f64, InterferenceError> {
    let b = power_budget(scene, env)?;
    Ok(b.signal_mw / (b.interferers_mw + b.noise_mw))
}

/// SINR in dB; `+inf` with no interference and no noise.
pub fn sinr(scene: &InterferenceScene, env: &RfEnvironment) -> Result<f64, InterferenceError> {
    Ok(rf::linear_to_db(sinr_linear(scene, env)?))
}

/// Shannon spectral efficiency, bit/s/Hz.
pub fn capacity(sinr_linear: f64) -> f64 {
    (1.0 + sinr_linear).log2()
}

/// Outage probability for an exponentially faded wanted signal:
/// `1 - prod(1 - f_i + f_i exp(-gamma I_i / S_o))` over effective interferers.
/// Receiver noise is not part of the outage event.
pub fn outage(
    scene: &InterferenceScene,
    env: &RfEnvironment,
    gamma_db: f64,
) -> Result<f64, InterferenceError> {
    let d = scene.user_distance_km;
    if !(d > 0.0) {
        return Err(RfError::BadDistance(d).into());
    }
    let signal = rf::db_to_linear(rf::received_power(env.tx_power_dbm, rf::path_loss(env, d)?));
    let terms = apply_strategy(scene, env)?
        .into_iter()
        .map(|i| {
            let p = rf::received_power(i.tx_power_dbm, rf::path_loss(env, i.distance_km)?);
            Ok(OutageTerm {
                interference_mw: rf::db_to_linear(p),
                activity: i.activity,
            })
        })
        .collect::<Result<Vec<_>, RfError>>()?;
    outage_from_powers(signal, &terms, rf::db_to_linear(gamma_db))
}

/// One interferer's mean received power and activity probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageTerm {
    pub interference_mw: f64,
    pub activity: f64,
}

/// Closed-form outage from linear powers.
pub fn outage_from_powers(
    signal_mw: f64,
    terms: &[OutageTerm],
    gamma_linear: f64,
) -> Result<f64, InterferenceError> {
    if !(signal_mw > 0.0) {
        return Err(InterferenceError::ZeroSignal);
    }
    let survive: f64 = terms
        .iter()
        .map(|t| 1.0 - t.activity + t.activity * (-gamma_linear * t.interference_mw / signal_mw).exp())
        .product();
    Ok((1.0 - survive).clamp(0.0, 1.0))
}

/// One row of a distance sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub distance_km: f64,
    pub sinr_db: f64,
    pub capacity_bps_hz: f64,
    pub outage: f64,
}

/// Evaluates `spec` at each distance, keeping everything else fixed.
pub fn distance_sweep(
    geometry: &HexGeometry,
    env: &RfEnvironment,
    spec: &SceneSpec,
    distances: &[f64],
    gamma_db: f64,
) -> Result<Vec<SweepPoint>, InterferenceError> {
    distances
        .iter()
        .map(|&d| {
            let scene = InterferenceScene::build(geometry, &SceneSpec { distance_km: d, ..*spec })?;
            let ratio = sinr_linear(&scene, env)?;
            Ok(SweepPoint {
                distance_km: d,
                sinr_db: rf::linear_to_db(ratio),
                capacity_bps_hz: capacity(ratio),
                outage: outage(&scene, env, gamma_db)?,
            })
        })
        .collect()
}

/// Slots of `cell` that share a frequency with a channel lent to the
/// reference cell by another member of the same group.
pub fn contested_slots(cluster: &Cluster, cell: CellId) -> Vec<u32> {
    if cell.is_reference() {
        return Vec::new();
    }
    let mut slots: Vec<u32> = cluster
        .cell(CellId::REFERENCE)
        .borrowed()
        .iter()
        .filter(|b| b.donor != cell && b.donor.group() == cell.group())
        .map(|b| b.slot)
        .filter(|&s| s < cluster.cell(cell).n_original())
        .collect();
    slots.sort_unstable();
    slots.dedup();
    slots
}

/// Fraction of each cell's contested slots that carry a call right now.
/// Cells with nothing contested report 0.
pub fn contested_occupancy(cluster: &Cluster) -> [f64; 7] {
    let mut out = [0.0; 7];
    for id in CellId::all() {
        let slots = contested_slots(cluster, id);
        if slots.is_empty() {
            continue;
        }
        let cell = cluster.cell(id);
        let busy = slots
            .iter()
            .filter(|&&s| {
                matches!(
                    cell.state(s),
                    Some(ChannelState::Busy | ChannelState::InnerOnly)
                )
            })
            .count();
        out[id.index()] = busy as f64 / slots.len() as f64;
    }
    out
}

/// Channel-state side of a mitigation strategy applied to a live cluster.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MitigationState {
    /// Slots switched off by [`Strategy::BlockInterfering`].
    pub inactivated: Vec<(CellId, u32)>,
}

impl MitigationState {
    /// Switches off every idle contested slot when blocking interfering
    /// channels; a no-op for the other strategies.
    pub fn apply(cluster: &mut Cluster, strategy: Strategy) -> Result<Self, ClusterError> {
        let mut state = MitigationState::default();
        if strategy != Strategy::BlockInterfering {
            return Ok(state);
        }
        for group in [Group::A, Group::B] {
            for &cell in group.members() {
                for slot in contested_slots(cluster, cell) {
                    if cluster.cell(cell).state(slot) == Some(ChannelState::Free) {
                        cluster
                            .cell_mut(cell)
                            .transition(ChannelRef::Own(slot), ChannelState::Inactivated)?;
                        state.inactivated.push((cell, slot));
                    }
                }
            }
        }
        Ok(state)
    }

    /// Turns every slot switched off by [`MitigationState::apply`] back on.
    pub fn lift(self, cluster: &mut Cluster) -> Result<(), ClusterError> {
        for (cell, slot) in self.inactivated {
            cluster
                .cell_mut(cell)
                .transition(ChannelRef::Own(slot), ChannelState::Free)?;
        }
        Ok(())
    }
}

/// Admits a call under `strategy`, honouring the inner/outer split.
///
/// With either bifurcation strategy, borrowed channels in the reference
/// cell and (for adjacent bifurcation) contested slots in the other group
/// members are handed only to inner users, as `InnerOnly`. Outer users get
/// the remaining free channels.
pub fn admit_call(
    cluster: &mut Cluster,
    cell: CellId,
    strategy: Strategy,
    inner_user: bool,
) -> Option<ChannelRef> {
    let restricted: Vec<ChannelRef> = match strategy {
        Strategy::ReferenceBifurcation | Strategy::AdjacentBifurcation if cell.is_reference() => {
            cluster
                .cell(cell)
                .borrowed()
                .iter()
                .map(|b| ChannelRef::Borrowed {
                    donor: b.donor,
                    slot: b.slot,
                })
                .collect()
        }
        Strategy::AdjacentBifurcation => contested_slots(cluster, cell)
            .into_iter()
            .map(ChannelRef::Own)
            .collect(),
        _ => Vec::new(),
    };
    let c = cluster.cell(cell);
    let is_free = |r: &ChannelRef| match *r {
        ChannelRef::Own(s) => c.state(s) == Some(ChannelState::Free),
        ChannelRef::Borrowed { donor, slot } => c
            .borrowed()
            .iter()
            .any(|b| b.donor == donor && b.slot == slot && b.state == ChannelState::Free),
    };
    if inner_user {
        if let Some(r) = restricted.iter().copied().find(is_free) {
            cluster
                .cell_mut(cell)
                .transition(r, ChannelState::InnerOnly)
                .ok()?;
            return Some(r);
        }
    }
    let unrestricted = (0..c.n_original())
        .map(ChannelRef::Own)
        .chain(c.borrowed().iter().map(|b| ChannelRef::Borrowed {
            donor: b.donor,
            slot: b.slot,
        }))
        .filter(|r| !restricted.contains(r))
        .find(is_free)?;
    cluster
        .cell_mut(cell)
        .transition(unrestricted, ChannelState::Busy)
        .ok()?;
    Some(unrestricted)
}

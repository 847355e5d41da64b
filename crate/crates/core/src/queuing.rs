//! Closed-form M/M/K/K loss-system analytics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::CELLS;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QueuingError {
    #[error("arrival rate must be finite and non-negative, got {0}")]
    BadArrivalRate(f64),
    #[error("service rate must be finite and positive, got {0}")]
    BadServiceRate(f64),
    #[error("total capacity of the cluster is zero")]
    EmptyCluster,
    #[error("blocking probability {0} outside [0, 1]")]
    BadProbability(f64),
}

/// Arrival rate (calls/s), service rate (1/s) and channel capacity of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficProfile {
    pub lambda: f64,
    pub mu: f64,
    pub capacity: u32,
}

impl TrafficProfile {
    pub fn new(lambda: f64, mu: f64, capacity: u32) -> Result<Self, QueuingError> {
        let p = TrafficProfile {
            lambda,
            mu,
            capacity,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), QueuingError> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(QueuingError::BadArrivalRate(self.lambda));
        }
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(QueuingError::BadServiceRate(self.mu));
        }
        Ok(())
    }

    /// Offered load in Erlangs.
    pub fn offered(&self) -> f64 {
        self.lambda / self.mu
    }
}

/// Per-cell profiles (ordered by cell id) and the system channel release rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTraffic {
    pub profiles: [TrafficProfile; CELLS],
    pub mu_total: f64,
}

impl ClusterTraffic {
    pub fn validate(&self) -> Result<(), QueuingError> {
        for p in &self.profiles {
            p.validate()?;
        }
        if !(self.mu_total.is_finite() && self.mu_total > 0.0) {
            return Err(QueuingError::BadServiceRate(self.mu_total));
        }
        Ok(())
    }

    pub fn total_lambda(&self) -> f64 {
        self.profiles.iter().map(|p| p.lambda).sum()
    }

    pub fn total_capacity(&self) -> u64 {
        self.profiles.iter().map(|p| p.capacity as u64).sum()
    }

    pub fn blockings(&self) -> Result<[f64; CELLS], QueuingError> {
        let mut out = [0.0; CELLS];
        for (o, p) in out.iter_mut().zip(&self.profiles) {
            *o = blocking(p)?;
        }
        Ok(out)
    }
}

/// Rescale threshold for the running term product; far below f64::MAX so a
/// few more multiplications by a/i cannot overflow before the next check.
const RESCALE_ABOVE: f64 = 1e280;

/// Stationary occupancy distribution P(0..=K) of an M/M/K/K system.
///
/// Terms are built as `t_i = t_{i-1} * a / i` and rescaled whenever they grow
/// large, so capacities in the tens of thousands stay finite.
pub fn steady_state(profile: &TrafficProfile) -> Result<Vec<f64>, QueuingError> {
    profile.validate()?;
    let a = profile.offered();
    let k = profile.capacity as usize;
    let mut terms = Vec::with_capacity(k + 1);
    terms.push(1.0f64);
    let mut t = 1.0f64;
    for i in 1..=k {
        t *= a / i as f64;
        if t > RESCALE_ABOVE {
            let scale = 1.0 / t;
            for v in terms.iter_mut() {
                *v *= scale;
            }
            t = 1.0;
        }
        terms.push(t);
    }
    let total: f64 = terms.iter().sum();
    for v in terms.iter_mut() {
        *v /= total;
    }
    Ok(terms)
}

/// Erlang-B loss probability: the last entry of [`steady_state`].
pub fn blocking(profile: &TrafficProfile) -> Result<f64, QueuingError> {
    Ok(*steady_state(profile)?
        .last()
        .expect("distribution has at least one state"))
}

/// Overall blocking evaluated literally from the per-cell formula with
/// loads in Erlangs: `1 - sum(a_m (1 - P_Bm)) / sum(N'_m)`, clamped to [0, 1].
///
/// This is carried load over capacity, so it tends to 1 as traffic vanishes.
/// [`overall_blocking_weighted`] is the quantity usually wanted.
pub fn overall_blocking_capacity(traffic: &ClusterTraffic) -> Result<f64, QueuingError> {
    traffic.validate()?;
    let capacity = traffic.total_capacity();
    if capacity == 0 {
        return Err(QueuingError::EmptyCluster);
    }
    let blockings = traffic.blockings()?;
    let carried: f64 = traffic
        .profiles
        .iter()
        .zip(blockings)
        .map(|(p, b)| p.offered() * (1.0 - b))
        .sum();
    Ok((1.0 - carried / capacity as f64).clamp(0.0, 1.0))
}

/// Traffic-weighted blocking `sum(lambda_m P_Bm) / sum(lambda_m)`; zero without traffic.
pub fn overall_blocking_weighted(traffic: &ClusterTraffic) -> Result<f64, QueuingError> {
    traffic.validate()?;
    let blockings = traffic.blockings()?;
    Ok(weighted_mean(
        traffic.profiles.iter().map(|p| p.lambda),
        blockings.iter().copied(),
    ))
}

pub(crate) fn weighted_mean(
    weights: impl IntoIterator<Item = f64>,
    values: impl IntoIterator<Item = f64>,
) -> f64 {
    let (num, den) = weights
        .into_iter()
        .zip(values)
        .fold((0.0, 0.0), |(n, d), (w, v)| (n + w * v, d + w));
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Bandwidth utilization `(1 - p_bt) * sum(lambda) / (mu_T * sum(N'))`, clamped to [0, 1].
pub fn bandwidth_utilization(traffic: &ClusterTraffic, p_bt: f64) -> Result<f64, QueuingError> {
    traffic.validate()?;
    if !(0.0..=1.0).contains(&p_bt) {
        return Err(QueuingError::BadProbability(p_bt));
    }
    let capacity = traffic.total_capacity();
    if capacity == 0 {
        return Err(QueuingError::EmptyCluster);
    }
    let value = (1.0 - p_bt) * traffic.total_lambda() / (traffic.mu_total * capacity as f64);
    Ok(value.clamp(0.0, 1.0))
}

/// Probability that an M/M/K/K cell with `profile` has more than `threshold`
/// calls in progress.
pub fn occupancy_exceeds(profile: &TrafficProfile, threshold: u32) -> Result<f64, QueuingError> {
    let p = steady_state(profile)?;
    Ok(p.iter().skip(threshold as usize + 1).sum::<f64>().min(1.0))
}

//! Sim-vs-analytic agreement and invariant checks across the load grid.

use serde::Serialize;

use crate::sim::{compare, run, ComparisonReport, Fault, SimError, Verdict};

use super::output::{num, Table};
use super::{ScenarioConfig, ScenarioError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointValidation {
    pub total_arrival_rate: f64,
    pub comparison: ComparisonReport,
}

/// Borrowing-enabled runs watched by the conservation and floor checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantSuite {
    pub runs: usize,
    pub checks: u64,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub points: Vec<PointValidation>,
    pub invariants: InvariantSuite,
}

impl ValidationReport {
    pub fn flagged(&self) -> usize {
        self.points
            .iter()
            .map(|p| p.comparison.flagged().count())
            .sum()
    }

    pub fn low_confidence(&self) -> usize {
        self.points
            .iter()
            .flat_map(|p| &p.comparison.cells)
            .filter(|c| c.low_confidence)
            .count()
    }

    pub fn passed(&self) -> bool {
        self.flagged() == 0 && self.invariants.violations.is_empty()
    }

    /// One row per load point and cell.
    pub fn z_table(&self) -> Table {
        let mut t = Table::new(&[
            "total_arrival_rate",
            "cell",
            "offered",
            "blocked",
            "analytic",
            "empirical",
            "stderr",
            "z",
            "verdict",
            "low_confidence",
        ]);
        for p in &self.points {
            for c in &p.comparison.cells {
                let s = &c.score;
                t.push(vec![
                    num(p.total_arrival_rate),
                    c.cell.to_string(),
                    c.offered.to_string(),
                    c.blocked.to_string(),
                    num(s.analytic),
                    num(s.empirical),
                    num(s.stderr),
                    s.z.map(num).unwrap_or_default(),
                    match s.verdict {
                        Verdict::Pass => "pass",
                        Verdict::Flagged => "flagged",
                        Verdict::Incomparable => "incomparable",
                    }
                    .to_string(),
                    (c.low_confidence as u8).to_string(),
                ]);
            }
        }
        t
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{} analytic agreement: {} load points, {} flagged cells, {} low-confidence cells\n",
            if self.flagged() == 0 { "PASS" } else { "FAIL" },
            self.points.len(),
            self.flagged(),
            self.low_confidence(),
        ));
        for p in &self.points {
            for c in p.comparison.flagged() {
                out.push_str(&format!(
                    "  rate {:.4}/s cell {}: analytic {:.6} empirical {:.6} z {:.2}\n",
                    p.total_arrival_rate,
                    c.cell,
                    c.score.analytic,
                    c.score.empirical,
                    c.score.z.unwrap_or(f64::NAN),
                ));
            }
        }
        out.push_str(&format!(
            "{} invariants: {} runs, {} checks, {} violations\n",
            if self.invariants.violations.is_empty() { "PASS" } else { "FAIL" },
            self.invariants.runs,
            self.invariants.checks,
            self.invariants.violations.len(),
        ));
        for v in &self.invariants.violations {
            out.push_str(&format!("  {v}\n"));
        }
        out
    }
}

/// Checks the simulator against per-cell Erlang-B with borrowing disabled,
/// then runs the grid with borrowing enabled under the invariant checks.
pub fn validate(config: &ScenarioConfig) -> Result<ValidationReport, ScenarioError> {
    validate_with_fault(config, None)
}

/// [`validate`] with a fault injected into every borrowing-enabled run.
pub fn validate_with_fault(
    config: &ScenarioConfig,
    fault: Option<Fault>,
) -> Result<ValidationReport, ScenarioError> {
    let seed = config.simulation.seed;
    let mut points = Vec::new();
    let mut invariants = InvariantSuite {
        runs: 0,
        checks: 0,
        violations: Vec::new(),
    };
    for rate in config.arrival_rates() {
        let stats = run(&config.sim_config(rate, false, seed))?;
        let analytic = config.cluster_traffic(rate).blockings()?;
        points.push(PointValidation {
            total_arrival_rate: rate,
            comparison: compare(&analytic, &stats)?,
        });

        let mut sim = config.sim_config(rate, true, seed);
        sim.fault = fault;
        invariants.runs += 1;
        match run(&sim) {
            Ok(s) => invariants.checks += s.invariant_checks,
            Err(e @ SimError::Invariant { .. }) => {
                invariants.violations.push(format!("rate {}/s: {e}", num(rate)))
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(ValidationReport { points, invariants })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ScenarioConfig {
        let mut c = ScenarioConfig::default();
        c.traffic.load_grid.points = 4;
        c.traffic.load_grid.start_fraction = 0.8;
        c.simulation.horizon_arrivals = 400_000;
        c
    }

    #[test]
    fn agrees_with_erlang_b() {
        let r = validate(&small()).unwrap();
        assert_eq!(r.flagged(), 0, "{}", r.summary());
        assert!(r.passed());
        assert_eq!(r.invariants.runs, 4);
        assert!(r.invariants.checks > 0);
        assert_eq!(r.z_table().rows.len(), 28);
    }

    #[test]
    fn tiny_horizon_marks_low_confidence() {
        let mut c = small();
        c.simulation.horizon_arrivals = 100;
        let r = validate(&c).unwrap();
        assert!(r.low_confidence() > 0);
        let t = r.z_table();
        assert!(t.column("low_confidence").unwrap().contains(&1.0));
    }

    #[test]
    fn corrupted_threshold_is_reported() {
        let mut c = small();
        c.simulation.horizon_arrivals = 100_000;
        let fault = Fault::LowerThreshold {
            after_arrivals: 1_000,
            n_th: 0,
        };
        let r = validate_with_fault(&c, Some(fault)).unwrap();
        assert!(!r.invariants.violations.is_empty());
        assert!(!r.passed());
        assert!(r.summary().contains("FAIL invariants"));
    }
}

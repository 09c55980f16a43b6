//! Report types shared by the condition checkers, the envelope
//! verifiers and the CLI. All serialize deterministically (ordered maps).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// A worst-ratio location observed during a check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Witness {
    /// Lattice coordinates (t, |x|, direction components: check-specific).
    pub location: Vec<f64>,
    pub value: f64,
    pub note: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeMeta {
    pub description: String,
    pub points: usize,
    /// Floor/ceiling thresholds the verdict is relative to.
    pub floor: f64,
    pub ceiling: f64,
}

/// Outcome of one condition check. Verdicts are lattice-relative:
/// "pass" means the observed constants stayed within the documented
/// thresholds on the documented lattice, not a proof.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionReport {
    pub id: String,
    pub verdict: Verdict,
    pub constants: BTreeMap<String, f64>,
    pub witnesses: Vec<Witness>,
    pub lattice: LatticeMeta,
}

impl ConditionReport {
    pub fn constant(&self, key: &str) -> Option<f64> {
        self.constants.get(key).copied()
    }
}

/// Joint outcome of the small-time and large-time equivalence audits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditReport {
    pub schema: u32,
    pub triplet: String,
    pub small_time: Vec<ConditionReport>,
    pub large_time: Vec<ConditionReport>,
    pub small_time_verdict: Verdict,
    pub large_time_verdict: Verdict,
    /// True when each family agreed internally (the equivalence property).
    pub consistent: bool,
    pub notes: Vec<String>,
}

/// Observed ratio statistics between a density functional and its
/// h-envelope across a time grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvelopeCertificate {
    pub schema: u32,
    pub kind: String,
    pub t_grid: Vec<f64>,
    pub ratios: Vec<f64>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub verdict: Verdict,
    pub witnesses: Vec<Witness>,
    pub notes: Vec<String>,
}

impl EnvelopeCertificate {
    pub fn from_series(kind: &str, series: &[(f64, f64)], band: f64) -> Self {
        let t_grid: Vec<f64> = series.iter().map(|p| p.0).collect();
        let ratios: Vec<f64> = series.iter().map(|p| p.1).collect();
        let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let max_ratio = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let verdict = if min_ratio > 0.0 && max_ratio / min_ratio <= band {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        let witnesses = vec![
            Witness {
                location: vec![series
                    .iter()
                    .find(|p| p.1 == max_ratio)
                    .map(|p| p.0)
                    .unwrap_or(f64::NAN)],
                value: max_ratio,
                note: "max ratio".into(),
            },
            Witness {
                location: vec![series
                    .iter()
                    .find(|p| p.1 == min_ratio)
                    .map(|p| p.0)
                    .unwrap_or(f64::NAN)],
                value: min_ratio,
                note: "min ratio".into(),
            },
        ];
        EnvelopeCertificate {
            schema: 1,
            kind: kind.to_string(),
            t_grid,
            ratios,
            min_ratio,
            max_ratio,
            verdict,
            witnesses,
            notes: Vec::new(),
        }
    }
}

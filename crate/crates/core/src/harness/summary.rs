use serde::{Deserialize, Serialize};

use super::run::TrialReport;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub algo: String,
    pub rows: usize,
    pub failure_fraction: f64,
    /// Factor statistics over rows with `opt > 0`; absent when there are none.
    pub factor_mean: Option<f64>,
    pub factor_median: Option<f64>,
    pub factor_p95: Option<f64>,
    pub mean_oracle_queries: f64,
    pub mean_wall_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_expected_tv: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub algorithms: Vec<AlgorithmSummary>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Nearest-rank percentile of sorted data.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let rank = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

fn median(sorted: &[f64]) -> f64 {
    let m = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[m]
    } else {
        0.5 * (sorted[m - 1] + sorted[m])
    }
}

/// Per-algorithm statistics, algorithms in order of first appearance.
pub fn summarize(report: &TrialReport) -> Result<Summary> {
    if report.rows.is_empty() {
        return Err(Error::param("report", "no rows to summarize"));
    }
    let mut names: Vec<&str> = Vec::new();
    for row in &report.rows {
        if !names.contains(&row.algo.as_str()) {
            names.push(&row.algo);
        }
    }
    let algorithms = names
        .into_iter()
        .map(|name| {
            let rows: Vec<_> = report.rows.iter().filter(|r| r.algo == name).collect();
            let failures = rows.iter().filter(|r| r.satisfied_3opt_eps == 0).count();
            let mut factors: Vec<f64> = rows.iter().filter(|r| r.opt > 0.0).map(|r| r.factor).collect();
            factors.sort_by(f64::total_cmp);
            let has = !factors.is_empty();
            let expected: Vec<f64> = rows.iter().filter_map(|r| r.expected_tv).collect();
            AlgorithmSummary {
                algo: name.to_string(),
                rows: rows.len(),
                failure_fraction: failures as f64 / rows.len() as f64,
                factor_mean: has.then(|| mean(&factors)),
                factor_median: has.then(|| median(&factors)),
                factor_p95: has.then(|| percentile(&factors, 0.95)),
                mean_oracle_queries: mean(&rows.iter().map(|r| r.oracle_queries as f64).collect::<Vec<_>>()),
                mean_wall_ms: mean(&rows.iter().map(|r| r.wall_ms).collect::<Vec<_>>()),
                mean_expected_tv: (!expected.is_empty()).then(|| mean(&expected)),
            }
        })
        .collect();
    Ok(Summary { algorithms })
}

/// Growth per doubling of `n` between consecutive `(n, value)` points:
/// `(v2 / v1)^(1 / log2(n2 / n1))`.
pub fn per_doubling_factors(points: &[(usize, f64)]) -> Vec<f64> {
    points
        .windows(2)
        .map(|w| {
            let (n1, v1) = w[0];
            let (n2, v2) = w[1];
            (v2 / v1).powf(1.0 / (n2 as f64 / n1 as f64).log2())
        })
        .collect()
}

//! Per-(solver, N, config) summaries of result records.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SsrError};

use super::records::ResultRecord;
use super::stats::{mean, median, quantile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub solver: String,
    #[serde(rename = "N")]
    pub plies: usize,
    pub config_hash: String,
    pub records: usize,
    pub failures: usize,
    pub distance_median: Option<f64>,
    pub distance_q1: Option<f64>,
    pub distance_q3: Option<f64>,
    pub lambda_b_median: Option<f64>,
    pub runtime_mean_s: Option<f64>,
    pub validity_rate: f64,
}

pub fn summarize(records: &[ResultRecord]) -> Result<Vec<SummaryRow>> {
    if records.is_empty() {
        return Err(SsrError::InvalidConfig("report needs at least one record".into()));
    }
    let mut groups: BTreeMap<(String, usize, String), Vec<&ResultRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.solver.clone(), r.plies, r.config_hash.clone())).or_default().push(r);
    }
    Ok(groups
        .into_iter()
        .map(|((solver, plies, config_hash), rs)| {
            let ok: Vec<&&ResultRecord> = rs.iter().filter(|r| r.error.is_none()).collect();
            let dist: Vec<f64> = ok.iter().filter_map(|r| r.distance).collect();
            let lb: Vec<f64> = ok.iter().filter_map(|r| r.lambda_b).collect();
            let rt: Vec<f64> = ok.iter().map(|r| r.runtime_s).collect();
            let valid = ok.iter().filter(|r| r.validity.valid).count();
            SummaryRow {
                solver,
                plies,
                config_hash,
                records: rs.len(),
                failures: rs.len() - ok.len(),
                distance_median: median(&dist),
                distance_q1: quantile(&dist, 0.25),
                distance_q3: quantile(&dist, 0.75),
                lambda_b_median: median(&lb),
                runtime_mean_s: mean(&rt),
                validity_rate: if rs.is_empty() { 0.0 } else { valid as f64 / rs.len() as f64 },
            }
        })
        .collect())
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into())
}

pub fn render_table(rows: &[SummaryRow]) -> String {
    let mut out = format!(
        "{:<18} {:>5} {:<16} {:>5} {:>8} {:>8} {:>8} {:>10} {:>10} {:>6}\n",
        "solver", "N", "config", "runs", "median", "q1", "q3", "runtime_s", "lambda_b", "valid"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<18} {:>5} {:<16} {:>5} {:>8} {:>8} {:>8} {:>10} {:>10} {:>6.3}\n",
            r.solver,
            r.plies,
            r.config_hash,
            r.records,
            cell(r.distance_median),
            cell(r.distance_q1),
            cell(r.distance_q3),
            cell(r.runtime_mean_s),
            cell(r.lambda_b_median),
            r.validity_rate
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::records::tests::record;

    #[test]
    fn single_record_and_fixture() {
        let one = record("a", vec![0, 1, 2, 3], &[0, 0, 2, 3], 1.0);
        let rows = summarize(std::slice::from_ref(&one)).unwrap();
        assert_eq!(rows[0].distance_median, one.distance);
        assert!(summarize(&[]).is_err());

        let stacks: [[usize; 4]; 10] = [
            [0, 1, 2, 3], [1, 1, 2, 3], [0, 0, 0, 0], [3, 2, 1, 0], [0, 1, 1, 3],
            [2, 2, 2, 2], [0, 3, 2, 1], [1, 2, 3, 0], [0, 1, 2, 2], [3, 3, 3, 3],
        ];
        let recs: Vec<_> = stacks
            .iter()
            .enumerate()
            .map(|(k, s)| record(&format!("r{k}"), s.to_vec(), &[0, 1, 2, 3], k as f64))
            .collect();
        let rows = summarize(&recs).unwrap();
        assert_eq!(rows.len(), 1);
        let mut d: Vec<f64> = recs.iter().map(|r| r.distance.unwrap()).collect();
        d.sort_by(f64::total_cmp);
        // Independent recomputation: mean of the 5th and 6th order statistics.
        assert!((rows[0].distance_median.unwrap() - (d[4] + d[5]) / 2.0).abs() < 1e-15);
        assert!((rows[0].distance_q1.unwrap() - (d[2] + 0.25 * (d[3] - d[2]))).abs() < 1e-15);
        assert_eq!(rows[0].runtime_mean_s, Some(4.5));
        let valid = recs.iter().filter(|r| r.validity.valid).count() as f64 / 10.0;
        assert_eq!(rows[0].validity_rate, valid);
        assert!(render_table(&rows).lines().count() == 2);
    }

    #[test]
    fn all_valid_rate_is_one() {
        let set = crate::laminate::PlyAngleSet::conventional();
        let ts = crate::harness::generate_targets(10, 3, &set, true, 1).unwrap();
        let recs: Vec<_> = ts.iter().map(|t| record(&t.id, t.generator_stack.indices().to_vec(), &[0; 10], 0.1)).collect();
        assert!(recs.iter().all(|r| r.validity.valid));
        assert_eq!(summarize(&recs).unwrap()[0].validity_rate, 1.0);
    }
}

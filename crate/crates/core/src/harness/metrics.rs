use std::collections::BTreeSet;

use crate::error::{Result, RsncError};
use crate::model::{fits, Request, Scenario, TransmissionLog};

/// Missed requests over all requests; 0 when there are none.
pub fn deadline_miss_ratio(log: &TransmissionLog, scenario: &Scenario) -> Result<f64> {
    let expected: BTreeSet<Request> = scenario.requests().collect();
    let covered: BTreeSet<Request> = log.outcomes.iter().map(|o| o.request()).collect();
    if covered != expected || log.outcomes.len() != expected.len() {
        return Err(RsncError::LogMismatch(format!(
            "{} outcome(s) for {} request(s)",
            log.outcomes.len(),
            expected.len()
        )));
    }
    let mut misses = 0;
    for o in &log.outcomes {
        let deadline = scenario.deadline(o.request()).expect("request set matched");
        let late = o.delivered_at.is_none_or(|t| !fits(t, deadline));
        if late != o.missed {
            return Err(RsncError::LogMismatch(format!("inconsistent miss flag for {}", o.request())));
        }
        misses += usize::from(o.missed);
    }
    if expected.is_empty() {
        return Ok(0.0);
    }
    Ok(misses as f64 / expected.len() as f64)
}

/// Mean and sample standard deviation, accumulated in input order.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Average ranks (1-based), ties sharing the mean of their positions.
fn ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start;
        while end + 1 < idx.len() && values[idx[end + 1]] == values[idx[start]] {
            end += 1;
        }
        let rank = (start + end) as f64 / 2.0 + 1.0;
        for &i in &idx[start..=end] {
            out[i] = rank;
        }
        start = end + 1;
    }
    out
}

/// Spearman rank correlation (Pearson on average ranks). NaN if either side
/// is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let (rx, ry) = (ranks(xs), ranks(ys));
    let (mx, _) = mean_std(&rx);
    let (my, _) = mean_std(&ry);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

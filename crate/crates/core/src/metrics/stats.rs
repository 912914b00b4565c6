//! Agreement and correlation statistics.

use super::MetricError;

/// Cohen's kappa over two aligned label sequences:
/// `k = (p_o - p_e) / (1 - p_e)` with marginal-product expected agreement.
/// Returns 1 when both raters agree perfectly with degenerate marginals.
pub fn cohens_kappa<T: Eq + std::hash::Hash>(
    labels_a: &[T],
    labels_b: &[T],
) -> Result<f64, MetricError> {
    if labels_a.len() != labels_b.len() {
        return Err(MetricError::LengthMismatch {
            left: labels_a.len(),
            right: labels_b.len(),
        });
    }
    if labels_a.is_empty() {
        return Err(MetricError::DegenerateInput("empty label sequences".to_string()));
    }

    let n = labels_a.len() as f64;
    let observed = labels_a
        .iter()
        .zip(labels_b)
        .filter(|(a, b)| a == b)
        .count() as f64
        / n;

    let mut marginals_a: std::collections::HashMap<&T, f64> = std::collections::HashMap::new();
    let mut marginals_b: std::collections::HashMap<&T, f64> = std::collections::HashMap::new();
    for label in labels_a {
        *marginals_a.entry(label).or_default() += 1.0 / n;
    }
    for label in labels_b {
        *marginals_b.entry(label).or_default() += 1.0 / n;
    }
    let expected: f64 = marginals_a
        .iter()
        .map(|(label, pa)| pa * marginals_b.get(label).copied().unwrap_or(0.0))
        .sum();

    if (1.0 - expected).abs() < f64::EPSILON {
        // Both raters constant on the same label: perfect agreement.
        return Ok(1.0);
    }
    Ok((observed - expected) / (1.0 - expected))
}

/// Fractional ranks with average ranks for ties (1-based).
fn fractional_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));

    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Positions i..=j share the same value; average their ranks.
        let average = (i + j) as f64 / 2.0 + 1.0;
        for &index in &order[i..=j] {
            ranks[index] = average;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (a, b) in x.iter().zip(y) {
        cov += (a - mean_x) * (b - mean_y);
        var_x += (a - mean_x).powi(2);
        var_y += (b - mean_y).powi(2);
    }
    if var_x == 0.0 || var_y == 0.0 {
        return None;
    }
    Some(cov / (var_x * var_y).sqrt())
}

/// Spearman rank correlation: Pearson correlation of fractional ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, MetricError> {
    if x.len() != y.len() {
        return Err(MetricError::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 2 {
        return Err(MetricError::DegenerateInput(
            "need at least two observations".to_string(),
        ));
    }
    let ranks_x = fractional_ranks(x);
    let ranks_y = fractional_ranks(y);
    pearson(&ranks_x, &ranks_y).ok_or_else(|| {
        MetricError::DegenerateInput("constant input has no rank correlation".to_string())
    })
}

/// Coefficient of determination of the least-squares line of `y` on `x`.
/// Constant `y` with zero residuals yields 1; constant `x` is degenerate.
pub fn r_squared(x: &[f64], y: &[f64]) -> Result<f64, MetricError> {
    if x.len() != y.len() {
        return Err(MetricError::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 2 {
        return Err(MetricError::DegenerateInput(
            "need at least two observations".to_string(),
        ));
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    for (a, b) in x.iter().zip(y) {
        cov += (a - mean_x) * (b - mean_y);
        var_x += (a - mean_x).powi(2);
    }
    if var_x == 0.0 {
        return Err(MetricError::DegenerateInput(
            "constant x admits no linear fit".to_string(),
        ));
    }
    let slope = cov / var_x;
    let intercept = mean_y - slope * mean_x;

    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (a, b) in x.iter().zip(y) {
        ss_res += (b - (slope * a + intercept)).powi(2);
        ss_tot += (b - mean_y).powi(2);
    }
    if ss_tot == 0.0 {
        // Constant y is fit exactly by the horizontal line.
        return Ok(1.0);
    }
    Ok(1.0 - ss_res / ss_tot)
}

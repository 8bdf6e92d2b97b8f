/// Empirical quantile of ascending `sorted` values by linear interpolation of
/// order statistics (`h = (n-1)q`, 0-based; "type 7").
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Quantiles of an unsorted sample; missing (`NaN`) values are ignored.
/// Returns `None` when no values remain.
pub fn quantiles(values: &[f64], levels: &[f64]) -> Option<Vec<f64>> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    Some(levels.iter().map(|&q| quantile_sorted(&v, q)).collect())
}

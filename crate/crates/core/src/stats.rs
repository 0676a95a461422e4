//! Small statistical helpers shared by the simulation and analysis layers.

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// Wilson score interval for a binomial proportion at 95% confidence.
///
/// Preferred over the normal approximation because the simulator routinely
/// estimates probabilities near 0 and 1, where Wald intervals collapse.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    assert!(trials > 0, "wilson interval needs at least one trial");
    assert!(successes <= trials);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Arithmetic mean; 0 for an empty slice.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Ordinary least-squares slope of y against x (with intercept).
/// Returns `None` with fewer than two points or degenerate x.
pub fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) {
        assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }

    #[test]
    fn wilson_matches_reference_values() {
        // Reference values computed independently from the closed form.
        let cases = [
            (50u64, 100u64, 0.4038315303659956, 0.5961684696340044),
            (0, 100, 0.0, 0.03699349820698568),
            (100, 100, 0.9630065017930143, 1.0),
            (3, 20000, 5.101481799495055e-05, 0.0004409636272928435),
            (19, 100000, 0.00012164518206696231, 0.0002967533335332958),
            (1, 10, 0.017876213095072896, 0.4041500267952385),
        ];
        for (s, n, lo, hi) in cases {
            let (got_lo, got_hi) = wilson_interval(s, n);
            close(got_lo, lo);
            close(got_hi, hi);
        }
    }

    #[test]
    fn wilson_bounds_bracket_the_estimate() {
        for (s, n) in [(0u64, 7u64), (1, 7), (3, 7), (7, 7), (250, 1000)] {
            let (lo, hi) = wilson_interval(s, n);
            let p = s as f64 / n as f64;
            assert!((0.0..=1.0).contains(&lo));
            assert!((0.0..=1.0).contains(&hi));
            assert!(lo <= p + 1e-15 && p <= hi + 1e-15);
        }
    }

    #[test]
    fn mean_basics() {
        assert_eq!(mean(&[]), 0.0);
        close(mean(&[1.0, 2.0, 3.0]), 2.0);
    }

    #[test]
    fn slope_recovers_exact_line() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 3.0 + 0.25 * i as f64)).collect();
        close(least_squares_slope(&pts).unwrap(), 0.25);
    }

    #[test]
    fn slope_degenerate_cases() {
        assert!(least_squares_slope(&[]).is_none());
        assert!(least_squares_slope(&[(1.0, 2.0)]).is_none());
        assert!(least_squares_slope(&[(1.0, 2.0), (1.0, 3.0)]).is_none());
    }
}

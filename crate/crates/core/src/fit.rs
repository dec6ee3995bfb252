//! Small regression helpers shared by the dimension estimators.

/// Ordinary least-squares slope of `ys` against `xs`.
///
/// Returns `None` when fewer than two points are given or all abscissae
/// coincide.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let mean_x = xs.iter().sum::<f64>() / n as f64;
    let mean_y = ys.iter().sum::<f64>() / n as f64;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        sxx += dx * dx;
        sxy += dx * (y - mean_y);
    }
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Slopes between consecutive points.
pub fn consecutive_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        assert_eq!(least_squares_slope(&xs, &ys), Some(2.0));
        assert_eq!(consecutive_slopes(&xs, &ys), vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn degenerate() {
        assert_eq!(least_squares_slope(&[1.0], &[2.0]), None);
        assert_eq!(least_squares_slope(&[1.0, 1.0], &[2.0, 3.0]), None);
    }

    #[test]
    fn slope_is_between_consecutive_extremes() {
        let xs = [2.0, 3.0, 5.0, 6.0, 9.0];
        let ys = [0.1, 0.9, 1.5, 3.5, 3.6];
        let fit = least_squares_slope(&xs, &ys).unwrap();
        let s = consecutive_slopes(&xs, &ys);
        let lo = s.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(lo <= fit && fit <= hi);
    }
}

//! Small statistics used by the game and the experiment reports.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Wilson score interval for a binomial proportion.
pub fn wilson(successes: u64, trials: u64, confidence: f64) -> (f64, f64) {
    assert!(trials > 0, "no trials");
    let z = Normal::new(0.0, 1.0).unwrap().inverse_cdf(0.5 + confidence / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Two-sample chi-square homogeneity test on histograms over the same bins.
/// Bins empty in both samples are dropped.
pub fn chi_square_homogeneity(a: &[u64], b: &[u64]) -> ChiSquare {
    assert_eq!(a.len(), b.len(), "histograms over different bins");
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    let total = (na + nb) as f64;
    let mut stat = 0.0;
    let mut bins = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        let col = (x + y) as f64;
        if col == 0.0 {
            continue;
        }
        bins += 1;
        for (obs, row) in [(x, na), (y, nb)] {
            let exp = row as f64 * col / total;
            if exp > 0.0 {
                stat += (obs as f64 - exp).powi(2) / exp;
            }
        }
    }
    let dof = bins.saturating_sub(1);
    let p_value = if dof == 0 { 1.0 } else { 1.0 - ChiSquared::new(dof as f64).unwrap().cdf(stat) };
    ChiSquare { statistic: stat, dof, p_value }
}

/// Least-squares slope of `y` on `x`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    slope(&lx, &ly)
}

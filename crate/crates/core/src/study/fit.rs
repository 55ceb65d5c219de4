use crate::error::{Error, Result};

/// Least-squares power law fitted in log₂-log₂ space.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Smallest and largest `s` that entered the fit.
    pub fit_range: (usize, usize),
    pub used: Vec<usize>,
}

/// Fits `log₂ error = intercept + slope · log₂ s`.
///
/// Points with non-positive error or error below `floor` are dropped
/// first. Then, if the sequence ends in a run where the error stops
/// decreasing (saturation), that run is dropped together with the point
/// where it starts.
pub fn fit_rate(points: &[(usize, f64)], floor: f64) -> Result<RateFit> {
    let mut kept: Vec<(usize, f64)> = points
        .iter()
        .copied()
        .filter(|&(s, e)| s > 0 && e > 0.0 && e.is_finite() && e >= floor)
        .collect();
    let mut end = kept.len();
    while end >= 2 && kept[end - 1].1 >= kept[end - 2].1 {
        end -= 1;
    }
    if end < kept.len() {
        // `end - 1` is where the plateau starts
        end = end.saturating_sub(1);
    }
    kept.truncate(end);
    if kept.len() < 3 {
        return Err(Error::TooFewPoints(kept.len()));
    }

    let xs: Vec<f64> = kept.iter().map(|&(s, _)| (s as f64).log2()).collect();
    let ys: Vec<f64> = kept.iter().map(|&(_, e)| e.log2()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::TooFewPoints(1));
    }
    let slope = sxy / sxx;
    Ok(RateFit {
        slope,
        intercept: my - slope * mx,
        fit_range: (kept[0].0, kept[kept.len() - 1].0),
        used: kept.iter().map(|p| p.0).collect(),
    })
}

use std::str::FromStr;

use crate::error::{Error, Result};

/// Coordinate-wise map applied to shifted lattice points before they are
/// turned into parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PointTransform {
    /// Use `frac(i·z/n + δ)` as is.
    None,
    /// Baker's (tent) map `t ↦ 1 - |2t - 1|`.
    ///
    /// It preserves the uniform distribution, so the randomly shifted rule
    /// stays unbiased, and it makes every one-dimensional projection of the
    /// node set symmetric about 1/2. The generating vector criterion used
    /// by the CBC construction is also the right one for tent-transformed
    /// rules in the half-period cosine space.
    #[default]
    Tent,
}

impl PointTransform {
    pub fn as_str(&self) -> &'static str {
        match self {
            PointTransform::None => "none",
            PointTransform::Tent => "tent",
        }
    }

    pub fn apply(&self, t: &mut [f64]) {
        if let PointTransform::Tent = self {
            for v in t.iter_mut() {
                *v = 1.0 - (2.0 * *v - 1.0).abs();
            }
        }
    }
}

impl FromStr for PointTransform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(PointTransform::None),
            "tent" => Ok(PointTransform::Tent),
            other => Err(Error::UnknownStrategy {
                kind: "point transform",
                name: other.to_string(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tent_values() {
        let mut t = [0.0, 0.25, 0.5, 0.75, 0.9];
        PointTransform::Tent.apply(&mut t);
        assert_eq!(t, [0.0, 0.5, 1.0, 0.5, 1.0 - 0.8f64.abs()]);
        let mut u = [0.3];
        PointTransform::None.apply(&mut u);
        assert_eq!(u, [0.3]);
    }

    #[test]
    fn tent_projection_is_symmetric() {
        // shifted equispaced grid: image multiset is closed under t -> 1 - t
        let n = 64;
        let delta = 0.123_456_789;
        let mut pts: Vec<f64> = (0..n).map(|i| (i as f64 / n as f64 + delta).fract()).collect();
        PointTransform::Tent.apply(&mut pts);
        let mut a: Vec<f64> = pts.clone();
        let mut b: Vec<f64> = pts.iter().map(|t| 1.0 - t).collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn parse() {
        assert_eq!("tent".parse::<PointTransform>().unwrap(), PointTransform::Tent);
        assert!("baker".parse::<PointTransform>().is_err());
    }
}

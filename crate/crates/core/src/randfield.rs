//! Affine and lognormal diffusion coefficients built on the basis
//! `ψ_j(x) = j^{-θ} sin(jπx₁) sin(jπx₂)`, with dimension truncation
//! `y ↦ (y_{≤s}, 0)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Coefficients at or below this value count as a loss of ellipticity.
pub const MIN_COEFFICIENT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    /// `a = a0 + Σ y_j ψ_j` with `y_j ∈ [-1, 1]`.
    Affine,
    /// `a = a0 · exp(Σ y_j ψ_j)` with `y_j ∈ ℝ`.
    Lognormal,
}

impl FieldKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FieldKind::Affine => "affine",
            FieldKind::Lognormal => "lognormal",
        }
    }
}

impl std::str::FromStr for FieldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "affine" => Ok(FieldKind::Affine),
            "lognormal" => Ok(FieldKind::Lognormal),
            other => Err(Error::Config(format!("unknown field kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSpec {
    pub kind: FieldKind,
    pub a0: f64,
    pub theta: f64,
    pub max_dim: usize,
}

impl FieldSpec {
    pub fn new(kind: FieldKind, a0: f64, theta: f64, max_dim: usize) -> Result<Self> {
        if !(theta > 1.0) || !theta.is_finite() {
            return Err(Error::InvalidParameter(format!("theta must exceed 1, got {theta}")));
        }
        if max_dim == 0 {
            return Err(Error::InvalidParameter("max_dim must be >= 1".into()));
        }
        if !(a0 > 0.0) || !a0.is_finite() {
            return Err(Error::InvalidParameter(format!("a0 must be positive, got {a0}")));
        }
        Ok(Self {
            kind,
            a0,
            theta,
            max_dim,
        })
    }

    /// `a = exp(Σ y_j ψ_j)` (mean-field factor 1).
    pub fn lognormal(theta: f64, max_dim: usize) -> Result<Self> {
        Self::new(FieldKind::Lognormal, 1.0, theta, max_dim)
    }

    /// `a = 3/2 + Σ y_j ψ_j`.
    pub fn affine(theta: f64, max_dim: usize) -> Result<Self> {
        Self::new(FieldKind::Affine, 1.5, theta, max_dim)
    }

    pub fn basis_eval(&self, j: usize, x: [f64; 2]) -> f64 {
        let jf = j as f64;
        jf.powf(-self.theta) * (jf * PI * x[0]).sin() * (jf * PI * x[1]).sin()
    }

    /// `b_j = ‖ψ_j‖_∞ = j^{-θ}` for `j = 1..=count`.
    pub fn decay_norms(&self, count: usize) -> Vec<f64> {
        (1..=count).map(|j| (j as f64).powf(-self.theta)).collect()
    }

    /// Maps the truncated expansion `Σ_{j≤s} y_j ψ_j(x)` to the coefficient.
    pub fn coefficient_from_sum(&self, sum: f64, x: [f64; 2]) -> Result<f64> {
        match self.kind {
            FieldKind::Lognormal => Ok(self.a0 * sum.exp()),
            FieldKind::Affine => {
                let value = self.a0 + sum;
                if value <= MIN_COEFFICIENT {
                    Err(Error::NonPositiveCoefficient {
                        value,
                        x1: x[0],
                        x2: x[1],
                    })
                } else {
                    Ok(value)
                }
            }
        }
    }

    pub fn coeff_eval(&self, p: &ParamVector, x: [f64; 2]) -> Result<f64> {
        let sum: f64 = p
            .active_coords()
            .iter()
            .enumerate()
            .map(|(j, &yj)| yj * self.basis_eval(j + 1, x))
            .sum();
        self.coefficient_from_sum(sum, x)
    }
}

/// Parameter vector of length `max_dim`; coordinates past `active` are zero
/// as far as the coefficient is concerned.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    y: Vec<f64>,
    active: usize,
}

impl ParamVector {
    pub fn new(spec: &FieldSpec, y: Vec<f64>) -> Result<Self> {
        if y.len() != spec.max_dim {
            return Err(Error::InvalidParameter(format!(
                "parameter vector has length {}, field expects {}",
                y.len(),
                spec.max_dim
            )));
        }
        if spec.kind == FieldKind::Affine {
            if let Some(&bad) = y.iter().find(|v| !(v.abs() <= 1.0)) {
                return Err(Error::Domain {
                    value: bad,
                    domain: "[-1, 1]",
                });
            }
        } else if let Some(&bad) = y.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain {
                value: bad,
                domain: "finite reals",
            });
        }
        let active = y.len();
        Ok(Self { y, active })
    }

    pub fn active(&self) -> usize {
        self.active
    }

    pub fn coords(&self) -> &[f64] {
        &self.y
    }

    pub fn active_coords(&self) -> &[f64] {
        &self.y[..self.active]
    }

    pub fn truncate(&self, s: usize) -> Result<Self> {
        if s > self.y.len() {
            return Err(Error::InvalidParameter(format!(
                "truncation dimension {s} exceeds {}",
                self.y.len()
            )));
        }
        Ok(Self {
            y: self.y.clone(),
            active: s,
        })
    }
}

/// `ψ_j` tabulated at a fixed set of points, `j = 1..=max_dim`, so the
/// truncated expansions at many dimensions cost one pass per parameter.
#[derive(Debug, Clone)]
pub struct BasisTable {
    spec: FieldSpec,
    points: Vec<[f64; 2]>,
    // point-major: values[e * max_dim + (j - 1)]
    values: Vec<f64>,
}

impl BasisTable {
    pub fn new(spec: FieldSpec, points: &[[f64; 2]]) -> Self {
        let dim = spec.max_dim;
        let decay = spec.decay_norms(dim);
        let mut values = Vec::with_capacity(points.len() * dim);
        for x in points {
            for (j, &b) in decay.iter().enumerate() {
                let jf = (j + 1) as f64;
                values.push(b * (jf * PI * x[0]).sin() * (jf * PI * x[1]).sin());
            }
        }
        Self {
            spec,
            points: points.to_vec(),
            values,
        }
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    /// Coefficient values at every tabulated point for each truncation
    /// dimension in `dims` (ascending, each ≤ `max_dim`, at most `y.len()`):
    /// `out[k][e] = a(x_e, (y_{≤dims[k]}, 0))`.
    pub fn truncated_coefficients(&self, y: &[f64], dims: &[usize]) -> Result<Vec<Vec<f64>>> {
        let dim = self.spec.max_dim;
        let top = dims.iter().copied().max().unwrap_or(0);
        if top > dim || top > y.len() || dims.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter(format!(
                "truncation dimensions {dims:?} must be ascending and at most {}",
                dim.min(y.len())
            )));
        }
        let mut out = vec![Vec::with_capacity(self.points.len()); dims.len()];
        for (e, x) in self.points.iter().enumerate() {
            let row = &self.values[e * dim..e * dim + top];
            let mut sum = 0.0;
            let mut j = 0;
            for (k, &s) in dims.iter().enumerate() {
                while j < s {
                    sum += y[j] * row[j];
                    j += 1;
                }
                out[k].push(self.spec.coefficient_from_sum(sum, *x)?);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn basis_examples() {
        let spec = FieldSpec::lognormal(2.0, 4).unwrap();
        assert_relative_eq!(spec.basis_eval(1, [0.5, 0.5]), 1.0, epsilon = 1e-15);
        assert_relative_eq!(spec.basis_eval(2, [0.25, 0.25]), 0.25, epsilon = 1e-15);
        for j in 1..10 {
            assert!(spec.basis_eval(j, [0.0, 0.3]).abs() < 1e-15);
            assert!(spec.basis_eval(j, [0.7, 1.0]).abs() < 1e-14);
        }
    }

    #[test]
    fn coefficient_examples() {
        let logn = FieldSpec::lognormal(2.0, 3).unwrap();
        let zero = ParamVector::new(&logn, vec![0.0; 3]).unwrap();
        assert_eq!(logn.coeff_eval(&zero, [0.3, 0.8]).unwrap(), 1.0);

        let aff = FieldSpec::affine(1.5, 3).unwrap();
        let p = ParamVector::new(&aff, vec![1.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(aff.coeff_eval(&p, [0.5, 0.5]).unwrap(), 2.5, epsilon = 1e-15);

        let logn2 = FieldSpec::lognormal(2.0, 2).unwrap();
        let p = ParamVector::new(&logn2, vec![1.0, 1.0]).unwrap();
        assert_relative_eq!(
            logn2.coeff_eval(&p, [0.5, 0.5]).unwrap(),
            std::f64::consts::E,
            epsilon = 1e-14
        );
    }

    #[test]
    fn truncation_to_zero_gives_mean_field() {
        let logn = FieldSpec::lognormal(2.0, 3).unwrap();
        let p = ParamVector::new(&logn, vec![0.7, -1.2, 2.0]).unwrap();
        assert_eq!(logn.coeff_eval(&p.truncate(0).unwrap(), [0.4, 0.6]).unwrap(), 1.0);
        let aff = FieldSpec::affine(2.0, 3).unwrap();
        let p = ParamVector::new(&aff, vec![0.7, -1.0, 0.2]).unwrap();
        assert_eq!(aff.coeff_eval(&p.truncate(0).unwrap(), [0.4, 0.6]).unwrap(), 1.5);
        assert_eq!(
            aff.coeff_eval(&p.truncate(3).unwrap(), [0.4, 0.6]).unwrap(),
            aff.coeff_eval(&p, [0.4, 0.6]).unwrap()
        );
        assert!(p.truncate(4).is_err());
    }

    #[test]
    fn decay_norms_examples() {
        let spec = FieldSpec::lognormal(2.0, 3).unwrap();
        let b = spec.decay_norms(3);
        assert_relative_eq!(b[0], 1.0);
        assert_relative_eq!(b[1], 0.25);
        assert_relative_eq!(b[2], 1.0 / 9.0, epsilon = 1e-16);
        assert_eq!(FieldSpec::lognormal(1.5, 1).unwrap().decay_norms(1), vec![1.0]);
    }

    #[test]
    fn affine_loss_of_ellipticity_is_reported() {
        let spec = FieldSpec::new(FieldKind::Affine, 0.5, 2.0, 1).unwrap();
        let p = ParamVector::new(&spec, vec![-1.0]).unwrap();
        assert!(matches!(
            spec.coeff_eval(&p, [0.5, 0.5]),
            Err(Error::NonPositiveCoefficient { .. })
        ));
    }

    #[test]
    fn spec_validation() {
        assert!(FieldSpec::lognormal(1.0, 3).is_err());
        assert!(FieldSpec::lognormal(2.0, 0).is_err());
        let aff = FieldSpec::affine(2.0, 2).unwrap();
        assert!(ParamVector::new(&aff, vec![1.5, 0.0]).is_err());
        assert!(ParamVector::new(&aff, vec![0.5]).is_err());
    }

    #[test]
    fn table_agrees_with_pointwise_evaluation() {
        let spec = FieldSpec::lognormal(1.5, 16).unwrap();
        let pts = [[0.1, 0.2], [0.33, 0.9], [0.5, 0.5]];
        let table = BasisTable::new(spec, &pts);
        let y: Vec<f64> = (0..16).map(|j| ((j * 7 % 5) as f64 - 2.0) * 0.6).collect();
        let p = ParamVector::new(&spec, y.clone()).unwrap();
        let dims = [0, 1, 4, 16];
        let coeffs = table.truncated_coefficients(&y, &dims).unwrap();
        for (k, &s) in dims.iter().enumerate() {
            let ps = p.truncate(s).unwrap();
            for (e, x) in pts.iter().enumerate() {
                assert_relative_eq!(coeffs[k][e], spec.coeff_eval(&ps, *x).unwrap(), max_relative = 1e-14);
            }
        }
        assert!(table.truncated_coefficients(&y, &[4, 2]).is_err());
        assert!(table.truncated_coefficients(&y, &[17]).is_err());
    }
}

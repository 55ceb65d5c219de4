//! Randomly shifted rank-1 lattice rules with power-of-two node counts.
//!
//! Node `i` of the rule with generating vector `z` and shift `δ` is
//! `frac(i·z/n + δ)`. Generation is stateless, so any index range can be
//! produced independently.

mod cbc;
mod construction;
mod shift;
mod transform;

pub use cbc::{cbc_vector, cbc_with_error, korobov_vector, worst_case_error_sq, ProductWeights};
pub use construction::{
    generator_registry, CbcConstruction, GeneratorConstruction, GeneratorRequest,
    KorobovConstruction, CBC_MAX_DIM, CBC_MAX_NODES,
};
pub use shift::{random_shift, Shift};
pub use transform::PointTransform;

use crate::error::{Error, Result};

pub(crate) fn check_power_of_two(n: u64) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "node count must be a power of two >= 2, got {n}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeRule {
    n: u64,
    z: Vec<u64>,
}

impl LatticeRule {
    pub fn new(n: u64, z: Vec<u64>) -> Result<Self> {
        check_power_of_two(n)?;
        if z.is_empty() {
            return Err(Error::InvalidParameter("generating vector is empty".into()));
        }
        if let Some(bad) = z.iter().find(|&&zj| zj % 2 == 0 || zj >= n) {
            return Err(Error::InvalidParameter(format!(
                "generating component {bad} must be odd and below {n}"
            )));
        }
        Ok(Self { n, z })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn generating_vector(&self) -> &[u64] {
        &self.z
    }

    /// Writes node `i` into `out` (length `dim()`).
    pub fn point_into(&self, i: u64, shift: &Shift, out: &mut [f64]) {
        let mask = self.n - 1;
        let inv_n = 1.0 / self.n as f64;
        for ((o, &zj), &dj) in out.iter_mut().zip(&self.z).zip(shift.components()) {
            let mut t = (i.wrapping_mul(zj) & mask) as f64 * inv_n + dj;
            if t >= 1.0 {
                t -= 1.0;
            }
            *o = t;
        }
    }

    /// All `n` shifted nodes in index order.
    pub fn points<'a>(&'a self, shift: &'a Shift) -> Result<impl Iterator<Item = Vec<f64>> + 'a> {
        if shift.dim() < self.dim() {
            return Err(Error::InvalidParameter(format!(
                "shift has dimension {} but the rule needs {}",
                shift.dim(),
                self.dim()
            )));
        }
        Ok((0..self.n).map(move |i| {
            let mut p = vec![0.0; self.dim()];
            self.point_into(i, shift, &mut p);
            p
        }))
    }
}

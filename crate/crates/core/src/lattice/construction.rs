use super::cbc::{cbc_vector, korobov_vector, ProductWeights};
use super::LatticeRule;
use crate::error::{Error, Result};
use crate::registry::{Named, Registry};

/// Largest node count the naive CBC search accepts.
pub const CBC_MAX_NODES: u64 = 1 << 14;
/// Largest dimension the naive CBC search accepts.
pub const CBC_MAX_DIM: usize = 1 << 9;

/// What a generating-vector construction is asked to produce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorRequest {
    pub n: u64,
    pub s: usize,
    /// Decay exponent of the field; CBC uses weights `j^{-2θ}`.
    pub theta: f64,
    /// Korobov multiplier; `None` picks the default.
    pub korobov_multiplier: Option<u64>,
}

pub trait GeneratorConstruction: Named + Send + Sync {
    fn generating_vector(&self, req: &GeneratorRequest) -> Result<Vec<u64>>;

    fn build(&self, req: &GeneratorRequest) -> Result<LatticeRule> {
        LatticeRule::new(req.n, self.generating_vector(req)?)
    }
}

pub struct CbcConstruction;

impl Named for CbcConstruction {
    fn name(&self) -> &str {
        "cbc"
    }
}

impl GeneratorConstruction for CbcConstruction {
    fn generating_vector(&self, req: &GeneratorRequest) -> Result<Vec<u64>> {
        if req.n > CBC_MAX_NODES || req.s > CBC_MAX_DIM {
            return Err(Error::InvalidParameter(format!(
                "CBC is limited to n <= {CBC_MAX_NODES} and s <= {CBC_MAX_DIM} \
                 (got n = {}, s = {}); use the korobov generator",
                req.n, req.s
            )));
        }
        let weights = ProductWeights::power_law(req.s, req.theta)?;
        cbc_vector(req.n, req.s, &weights)
    }
}

pub struct KorobovConstruction;

impl KorobovConstruction {
    /// Odd integer nearest to `n·(√5 − 1)/2`.
    pub fn default_multiplier(n: u64) -> u64 {
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        let a = (n as f64 * golden).round() as u64;
        let a = if a % 2 == 0 { a + 1 } else { a };
        a.min(n - 1).max(1)
    }
}

impl Named for KorobovConstruction {
    fn name(&self) -> &str {
        "korobov"
    }
}

impl GeneratorConstruction for KorobovConstruction {
    fn generating_vector(&self, req: &GeneratorRequest) -> Result<Vec<u64>> {
        let a = req
            .korobov_multiplier
            .unwrap_or_else(|| Self::default_multiplier(req.n));
        korobov_vector(req.n, a, req.s)
    }
}

/// Registry with the built-in constructions (`cbc`, `korobov`).
pub fn generator_registry() -> Registry<dyn GeneratorConstruction> {
    let mut reg: Registry<dyn GeneratorConstruction> = Registry::new("generator construction");
    reg.register(Box::new(CbcConstruction))
        .register(Box::new(KorobovConstruction));
    reg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_dispatch() {
        let reg = generator_registry();
        let req = GeneratorRequest {
            n: 16,
            s: 4,
            theta: 2.0,
            korobov_multiplier: Some(5),
        };
        assert_eq!(reg.get("korobov").unwrap().generating_vector(&req).unwrap(), [1, 5, 9, 13]);
        let cbc = reg.get("cbc").unwrap().build(&req).unwrap();
        assert_eq!(cbc.generating_vector()[0], 1);
        assert!(reg.get("sobol").is_err());
    }

    #[test]
    fn cbc_refuses_oversized_requests() {
        let req = GeneratorRequest {
            n: 1 << 20,
            s: 2048,
            theta: 2.0,
            korobov_multiplier: None,
        };
        assert!(CbcConstruction.generating_vector(&req).is_err());
        let z = KorobovConstruction.generating_vector(&req).unwrap();
        assert_eq!(z.len(), 2048);
        assert!(z.iter().all(|c| c % 2 == 1));
    }
}

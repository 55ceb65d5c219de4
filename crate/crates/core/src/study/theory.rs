//! Executable checks of the supporting inequalities: the predicted decay
//! rate, Stechkin's tail bound and the discrete coefficient-perturbation
//! (second Strang) bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ParamMap, StudyConfig};
use crate::betagauss::{BetaGaussian, WeightedMomentSpec};
use crate::error::{Error, Result};
use crate::fem::FemSpace;
use crate::randfield::BasisTable;

/// Limiting truncation rate `1 - 2θ` for basis decay `j^{-θ}`.
pub fn theoretical_rate(theta: f64) -> Result<f64> {
    if !(theta > 1.0) || !theta.is_finite() {
        return Err(Error::InvalidParameter(format!("theta must exceed 1, got {theta}")));
    }
    Ok(1.0 - 2.0 * theta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StechkinReport {
    /// `(Σ_{k>N} a_k^q)^{1/q}`
    pub lhs: f64,
    /// `N^{-1/p+1/q} (Σ_k a_k^p)^{1/p}`
    pub rhs: f64,
    pub holds: bool,
}

// Terms below this are treated as zero.
const NEGLIGIBLE_TERM: f64 = 1e-300;

/// Evaluates both sides of Stechkin's inequality for the finite sequence
/// `a` (implicitly zero beyond its end).
pub fn stechkin_check(a: &[f64], p: f64, q: f64, n: usize) -> Result<StechkinReport> {
    if !(p > 0.0 && p <= q && q.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < p <= q < inf, got p = {p}, q = {q}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("N must be >= 1".into()));
    }
    if let Some(k) = a.iter().position(|v| !(*v >= 0.0)) {
        return Err(Error::Unordered(k));
    }
    if let Some(k) = a.windows(2).position(|w| w[1] > w[0]) {
        return Err(Error::Unordered(k + 1));
    }
    let power_sum = |terms: &[f64], r: f64| -> f64 {
        terms
            .iter()
            .take_while(|&&v| v >= NEGLIGIBLE_TERM)
            .map(|v| v.powf(r))
            .sum()
    };
    let tail = a.get(n..).unwrap_or(&[]);
    let lhs = power_sum(tail, q).powf(1.0 / q);
    let rhs = (n as f64).powf(-1.0 / p + 1.0 / q) * power_sum(a, p).powf(1.0 / p);
    Ok(StechkinReport {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-12,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrangDraw {
    /// `|u_h - u_{s,h}|_{H¹}`
    pub lhs: f64,
    /// `max|a - a_s| · |u_h|_{H¹} / min a_s`, both extrema over element centroids
    pub rhs: f64,
}

impl StrangDraw {
    pub fn ratio(&self) -> f64 {
        if self.lhs == 0.0 {
            0.0
        } else {
            self.lhs / self.rhs
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrangReport {
    pub s: usize,
    pub draws: Vec<StrangDraw>,
    pub max_ratio: f64,
}

/// Draws random parameters (seeded from `cfg.seed`) and compares both
/// sides of the discrete perturbation bound between the full-dimensional
/// solution and its truncation to `s` parameters.
///
/// With the coefficient constant on each element the bound holds exactly
/// in the conforming subspace, up to the linear-solver tolerance.
pub fn strang_bound_check(cfg: &StudyConfig, draws: usize, s: usize) -> Result<StrangReport> {
    cfg.validate()?;
    let full = cfg.s_ref;
    if s > full {
        return Err(Error::InvalidParameter(format!(
            "truncation dimension {s} exceeds the reference dimension {full}"
        )));
    }
    let space = FemSpace::new(cfg.fem_level)?;
    let table = BasisTable::new(cfg.field, &space.mesh().centroids());
    let load = space.restrict(&space.assemble_load(super::source_term));
    let map = ParamMap::for_config(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut t = vec![0.0; full];
    let mut y = vec![0.0; full];
    let mut stiffness = space.stiffness_from_element_coeffs(&vec![1.0; space.mesh().num_elements()]);

    let mut out = Vec::with_capacity(draws);
    for _ in 0..draws {
        for tj in t.iter_mut() {
            // open interval (0, 1)
            *tj = loop {
                let u: f64 = rng.gen();
                if u > 0.0 {
                    break u;
                }
            };
        }
        map.apply(&t, &mut y)?;
        let coeffs = table.truncated_coefficients(&y, &[s, full])?;
        let (a_s, a) = (&coeffs[0], &coeffs[1]);

        let mut solve = |c: &[f64]| -> Result<crate::fem::FemFunction> {
            space.fill_stiffness(c, &mut stiffness);
            let (x, _) = crate::fem::pcg(&stiffness, &load, &cfg.solver)?;
            Ok(space.extend(&x))
        };
        let u = solve(a)?;
        let u_s = solve(a_s)?;

        let lhs = space.h1_seminorm(&u.sub(&u_s));
        let sup_diff = a.iter().zip(a_s).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        let min_as = a_s.iter().copied().fold(f64::INFINITY, f64::min);
        let rhs = sup_diff * space.h1_seminorm(&u) / min_as;
        out.push(StrangDraw { lhs, rhs });
    }
    let max_ratio = out.iter().map(StrangDraw::ratio).fold(0.0, f64::max);
    Ok(StrangReport {
        s,
        draws: out,
        max_ratio,
    })
}

/// A randomly drawn input for [`stechkin_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct StechkinCase {
    pub family: &'static str,
    pub a: Vec<f64>,
    pub p: f64,
    pub q: f64,
    pub n: usize,
}

/// `count` nonincreasing sequences, alternating power-law (`c·k^{-r}`) and
/// exponential (`c·ρ^k`) tails, each with random `p ≤ q` and cut-off `N`.
pub fn random_stechkin_cases(seed: u64, count: usize) -> Vec<StechkinCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let len = rng.gen_range(10..=5000usize);
            let c = rng.gen_range(0.1..10.0);
            let (family, a): (&'static str, Vec<f64>) = if i % 2 == 0 {
                let r = rng.gen_range(0.3..4.0);
                ("power-law", (1..=len).map(|k| c * (k as f64).powf(-r)).collect())
            } else {
                let rho: f64 = rng.gen_range(0.3..0.999);
                ("exponential", (1..=len).map(|k| c * rho.powi(k as i32)).collect())
            };
            let p = rng.gen_range(0.1..3.0);
            let q = p + rng.gen_range(0.0..4.0);
            let n = rng.gen_range(1..=len);
            StechkinCase { family, a, p, q, n }
        })
        .collect()
}

/// One point of the β-uniformity grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentGridPoint {
    pub beta: f64,
    pub alpha: f64,
    pub nu: u32,
    /// `C_{α,β,ν}`
    pub value: f64,
    /// `C_{α,1,ν}`, the Laplace case that bounds all others.
    pub laplace: f64,
}

impl MomentGridPoint {
    pub fn holds(&self, slack: f64) -> bool {
        self.value <= self.laplace + slack
    }
}

pub const GRID_BETAS: [f64; 5] = [1.0, 1.25, 2.0, 4.0, 8.0];
pub const GRID_ALPHAS: [f64; 4] = [0.0, 0.25, 0.5, 0.9];
pub const GRID_NUS: std::ops::RangeInclusive<u32> = 0..=4;

/// Evaluates `C_{α,β,ν}` over the fixed grid alongside the `β = 1` value.
pub fn beta_uniform_grid() -> Result<Vec<MomentGridPoint>> {
    let laplace = BetaGaussian::new(1.0)?;
    let mut out = Vec::new();
    for &alpha in &GRID_ALPHAS {
        for nu in GRID_NUS {
            let spec = WeightedMomentSpec::new(alpha, nu)?;
            let bound = laplace.exp_weighted_moment(spec)?;
            for &beta in &GRID_BETAS {
                out.push(MomentGridPoint {
                    beta,
                    alpha,
                    nu,
                    value: BetaGaussian::new(beta)?.exp_weighted_moment(spec)?,
                    laplace: bound,
                });
            }
        }
    }
    Ok(out)
}

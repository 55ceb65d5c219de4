use rayon::prelude::*;

use super::check_power_of_two;
use crate::error::{Error, Result};

/// Product weights `γ_1 ≥ γ_2 ≥ … > 0` of the unanchored Sobolev space.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductWeights {
    gamma: Vec<f64>,
}

impl ProductWeights {
    pub fn new(gamma: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = gamma.iter().find(|g| !(**g > 0.0) || !g.is_finite()) {
            return Err(Error::InvalidParameter(format!("weight {bad} is not positive")));
        }
        if let Some(i) = gamma.windows(2).position(|w| w[1] > w[0]) {
            return Err(Error::Unordered(i + 1));
        }
        Ok(Self { gamma })
    }

    /// `γ_j = j^{-2θ}` for `j = 1..=s`.
    pub fn power_law(s: usize, theta: f64) -> Result<Self> {
        Self::new((1..=s).map(|j| (j as f64).powf(-2.0 * theta)).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.gamma
    }
}

fn bernoulli2(x: f64) -> f64 {
    x * x - x + 1.0 / 6.0
}

fn bernoulli2_table(n: u64) -> Vec<f64> {
    (0..n).map(|k| bernoulli2(k as f64 / n as f64)).collect()
}

/// Squared shift-averaged worst-case error
/// `e²(z) = -1 + (1/n) Σ_i Π_j (1 + γ_j B₂(frac(i z_j / n)))`,
/// evaluated directly in `O(n·s)`.
pub fn worst_case_error_sq(n: u64, z: &[u64], weights: &ProductWeights) -> f64 {
    let table = bernoulli2_table(n);
    let mask = n - 1;
    let mut sum = 0.0;
    for i in 0..n {
        let mut prod = 1.0;
        for (&zj, &g) in z.iter().zip(weights.as_slice()) {
            prod *= 1.0 + g * table[(i.wrapping_mul(zj) & mask) as usize];
        }
        sum += prod;
    }
    sum / n as f64 - 1.0
}

/// Korobov vector `z_j = a^{j-1} mod n`.
pub fn korobov_vector(n: u64, a: u64, s: usize) -> Result<Vec<u64>> {
    check_power_of_two(n)?;
    if a % 2 == 0 || a == 0 || a >= n {
        return Err(Error::InvalidParameter(format!(
            "Korobov multiplier must be odd and in [1, {n}), got {a}"
        )));
    }
    let mut z = Vec::with_capacity(s);
    let mut cur = 1u64;
    for _ in 0..s {
        z.push(cur);
        cur = ((cur as u128 * a as u128) % n as u128) as u64;
    }
    Ok(z)
}

// Gap, relative to the size of the running-product sum, below which two
// candidate scores count as tied.
const TIE_TOLERANCE: f64 = 1e-12;

/// Greedy component-by-component construction over odd candidates.
///
/// Naive `O(s·n²)`: for every coordinate each odd candidate is scored by
/// one pass over the running products. Ties go to the smallest candidate,
/// so components never exceed `n/2`.
pub fn cbc_vector(n: u64, s: usize, weights: &ProductWeights) -> Result<Vec<u64>> {
    cbc_with_error(n, s, weights).map(|(z, _)| z)
}

/// As [`cbc_vector`], also returning `e²(z)` from the running products.
pub fn cbc_with_error(n: u64, s: usize, weights: &ProductWeights) -> Result<(Vec<u64>, f64)> {
    check_power_of_two(n)?;
    if s == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    if weights.as_slice().len() < s {
        return Err(Error::InvalidParameter(format!(
            "{} weights supplied for dimension {s}",
            weights.as_slice().len()
        )));
    }
    let table = bernoulli2_table(n);
    let mask = n - 1;
    let half = (n / 2) as usize;
    let mut prods = vec![1.0; n as usize];
    let mut z = Vec::with_capacity(s);
    // B₂(frac(-x)) = B₂(frac(x)) makes the running products symmetric,
    // p[i] = p[n-i], and gives candidates c and n-c the same score.
    let candidates: Vec<u64> = (1..=n / 2).step_by(2).collect();

    for &g in &weights.as_slice()[..s] {
        // e² for candidate c is (base + g·score(c))/n - 1 with base and g
        // shared by all candidates, so only the score is compared. Adding
        // the base first would drown the score once g falls below the
        // unit roundoff, and every later component would tie.
        let scale: f64 = prods.iter().sum();
        let scores: Vec<f64> = candidates
            .par_iter()
            .map(|&c| {
                let mut inner = 0.0;
                for (i, &p) in prods.iter().enumerate().take(half).skip(1) {
                    inner += p * table[((i as u64).wrapping_mul(c) & mask) as usize];
                }
                let ends = prods[0] * table[0]
                    + prods[half] * table[((half as u64).wrapping_mul(c) & mask) as usize];
                2.0 * inner + ends
            })
            .collect();
        let mut best = 0;
        for k in 1..scores.len() {
            if scores[k] < scores[best] - TIE_TOLERANCE * scale {
                best = k;
            }
        }
        let zj = candidates[best];
        for (i, p) in prods.iter_mut().enumerate() {
            *p *= 1.0 + g * table[((i as u64).wrapping_mul(zj) & mask) as usize];
        }
        z.push(zj);
    }
    let e2 = prods.iter().sum::<f64>() / n as f64 - 1.0;
    Ok((z, e2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn korobov_examples() {
        assert_eq!(korobov_vector(8, 1, 3).unwrap(), vec![1, 1, 1]);
        assert_eq!(korobov_vector(8, 3, 3).unwrap(), vec![1, 3, 1]);
        assert_eq!(korobov_vector(16, 5, 4).unwrap(), vec![1, 5, 9, 13]);
        assert!(korobov_vector(16, 4, 4).is_err());
        assert!(korobov_vector(12, 5, 4).is_err());
    }

    #[test]
    fn cbc_trivial_modulus() {
        let w = ProductWeights::power_law(1, 1.0).unwrap();
        assert_eq!(cbc_vector(2, 1, &w).unwrap(), vec![1]);
    }

    #[test]
    fn one_dimensional_error_by_hand() {
        // B2(0)=1/6, B2(1/4)=B2(3/4)=-1/48, B2(1/2)=-1/12
        let hand = -1.0 + 0.25 * (4.0 + 1.0 / 6.0 - 1.0 / 48.0 - 1.0 / 12.0 - 1.0 / 48.0);
        let w = ProductWeights::new(vec![1.0]).unwrap();
        assert_relative_eq!(worst_case_error_sq(4, &[1], &w), hand, epsilon = 1e-15);
        assert_relative_eq!(hand, 1.0 / 96.0, epsilon = 1e-15);
    }

    #[test]
    fn cbc_matches_exhaustive_search_in_two_dimensions() {
        let w = ProductWeights::new(vec![1.0, 0.125]).unwrap();
        let cbc = cbc_vector(8, 2, &w).unwrap();
        let mut best = (f64::INFINITY, vec![]);
        for z1 in (1..8).step_by(2) {
            for z2 in (1..8).step_by(2) {
                let e = worst_case_error_sq(8, &[z1, z2], &w);
                if e < best.0 - 1e-14 {
                    best = (e, vec![z1, z2]);
                }
            }
        }
        assert_relative_eq!(worst_case_error_sq(8, &cbc, &w), best.0, epsilon = 1e-14);
        assert_eq!(cbc[0], 1);
    }

    #[test]
    fn last_component_is_locally_optimal() {
        let w = ProductWeights::power_law(5, 1.0).unwrap();
        let n = 64;
        let z = cbc_vector(n, 5, &w).unwrap();
        let e = worst_case_error_sq(n, &z, &w);
        for c in (1..n).step_by(2) {
            let mut alt = z.clone();
            alt[4] = c;
            assert!(e <= worst_case_error_sq(n, &alt, &w) + 1e-15);
        }
    }

    #[test]
    fn running_criterion_matches_direct_evaluation() {
        for &n in &[4u64, 8, 16, 32, 64] {
            let w = ProductWeights::power_law(6, 1.5).unwrap();
            let (z, e2) = cbc_with_error(n, 6, &w).unwrap();
            assert_relative_eq!(e2, worst_case_error_sq(n, &z, &w), epsilon = 1e-12);
        }
    }

    #[test]
    fn tiny_weights_still_discriminate() {
        // γ_40 = 40^-12 is far below the unit roundoff relative to e²
        let (n, s) = (256u64, 40);
        let w = ProductWeights::power_law(s, 6.0).unwrap();
        let z = cbc_vector(n, s, &w).unwrap();

        // oracle: products of the first s-1 factors, then a full scan of
        // the last component's weighted-free increment
        let g = w.as_slice();
        let prods: Vec<f64> = (0..n)
            .map(|i| {
                z[..s - 1]
                    .iter()
                    .zip(g)
                    .map(|(&zj, &gj)| 1.0 + gj * bernoulli2(((i * zj) % n) as f64 / n as f64))
                    .product()
            })
            .collect();
        let score = |c: u64| -> f64 {
            (0..n)
                .map(|i| prods[i as usize] * bernoulli2(((i * c) % n) as f64 / n as f64))
                .sum()
        };
        let best = (1..n).step_by(2).map(score).fold(f64::INFINITY, f64::min);
        assert!(score(z[s - 1]) <= best + 1e-12);
        assert!(score(1) > best + 1e-6, "oracle cannot tell candidates apart");
    }

    #[test]
    fn weights_must_be_nonincreasing_and_positive() {
        assert!(ProductWeights::new(vec![1.0, 2.0]).is_err());
        assert!(ProductWeights::new(vec![1.0, 0.0]).is_err());
    }
}

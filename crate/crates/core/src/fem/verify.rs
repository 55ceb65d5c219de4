//! Manufactured-solution convergence check: `u* = sin(πx₁) sin(πx₂)`,
//! `a ≡ 1`, `f = 2π² u*`.

use std::f64::consts::PI;

use super::{FemSpace, SolverOptions};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedError {
    pub level: u32,
    pub h: f64,
    /// `|u* - u_h|_{H¹}`.
    pub h1_error: f64,
}

/// Degree-5 seven-point rule on the reference triangle, as barycentric
/// coordinates and weights summing to one.
fn dunavant7() -> [([f64; 3], f64); 7] {
    let r15 = 15f64.sqrt();
    let a = (6.0 - r15) / 21.0;
    let b = (6.0 + r15) / 21.0;
    let wa = (155.0 - r15) / 1200.0;
    let wb = (155.0 + r15) / 1200.0;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 9.0 / 40.0),
        ([a, a, 1.0 - 2.0 * a], wa),
        ([a, 1.0 - 2.0 * a, a], wa),
        ([1.0 - 2.0 * a, a, a], wa),
        ([b, b, 1.0 - 2.0 * b], wb),
        ([b, 1.0 - 2.0 * b, b], wb),
        ([1.0 - 2.0 * b, b, b], wb),
    ]
}

fn exact_gradient(x: [f64; 2]) -> [f64; 2] {
    [
        PI * (PI * x[0]).cos() * (PI * x[1]).sin(),
        PI * (PI * x[0]).sin() * (PI * x[1]).cos(),
    ]
}

/// Solves the manufactured problem on each level and measures the true
/// H¹-seminorm error element by element with a degree-5 rule.
pub fn manufactured_h1_errors(levels: impl IntoIterator<Item = u32>, opts: &SolverOptions) -> Result<Vec<ManufacturedError>> {
    let rule = dunavant7();
    levels
        .into_iter()
        .map(|level| {
            let space = FemSpace::new(level)?;
            let f = |x: [f64; 2]| 2.0 * PI * PI * (PI * x[0]).sin() * (PI * x[1]).sin();
            let system = space.system(|_| Ok(1.0), f)?;
            let u = space.solve(&system, opts)?;
            let mesh = space.mesh();
            let mut sq = 0.0;
            for (e, tri) in mesh.elements().iter().enumerate() {
                let grads = mesh.gradients(e);
                let mut gh = [0.0; 2];
                for a in 0..3 {
                    gh[0] += u.values[tri[a]] * grads[a][0];
                    gh[1] += u.values[tri[a]] * grads[a][1];
                }
                let verts = mesh.vertices(e);
                let mut local = 0.0;
                for (bary, w) in rule.iter() {
                    let x = [
                        bary[0] * verts[0][0] + bary[1] * verts[1][0] + bary[2] * verts[2][0],
                        bary[0] * verts[0][1] + bary[1] * verts[1][1] + bary[2] * verts[2][1],
                    ];
                    let g = exact_gradient(x);
                    local += w * ((g[0] - gh[0]).powi(2) + (g[1] - gh[1]).powi(2));
                }
                sq += mesh.area(e) * local;
            }
            Ok(ManufacturedError {
                level,
                h: mesh.h(),
                h1_error: sq.sqrt(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rule_integrates_quintics() {
        // ∫_T λ0^2 λ1^2 λ2 = 2|T| · 2!2!1!/7! on the reference triangle
        let rule = dunavant7();
        let q: f64 = rule.iter().map(|(l, w)| w * l[0] * l[0] * l[1] * l[1] * l[2]).sum();
        assert_relative_eq!(q, 2.0 * 4.0 / 5040.0, epsilon = 1e-15);
        assert_relative_eq!(rule.iter().map(|r| r.1).sum::<f64>(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn error_is_first_order() {
        let errs = manufactured_h1_errors(2..=5, &SolverOptions::default()).unwrap();
        for w in errs.windows(2) {
            let ratio = w[0].h1_error / w[1].h1_error;
            assert!((1.9..=2.1).contains(&ratio), "ratio {ratio}");
        }
    }
}

//! The shared cubature loop: every lattice node is mapped to a parameter
//! vector, the reference solution is computed once, each truncated
//! solution is computed against it, and the per-node contributions are
//! averaged in node order.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rayon::prelude::*;

use super::{source_term, ParamMap, QoiKind, StudyConfig};
use crate::error::{Error, Result};
use crate::fem::{pcg, FemSpace};
use crate::lattice::{generator_registry, random_shift, GeneratorRequest};
use crate::randfield::BasisTable;

/// Nodes per accumulation block. Fixed so that the summation order, and
/// hence every output bit, does not depend on the thread count.
pub(crate) const BLOCK: usize = 64;

pub(crate) struct EngineOutput {
    /// One mean per `s_list` entry (reference minus truncated), then the
    /// mean of the reference quantity itself.
    pub means: Vec<Vec<f64>>,
    pub wall_ms: Vec<f64>,
    pub solves: usize,
    pub space: FemSpace,
}

fn add_into(acc: &mut [Vec<f64>], other: &[Vec<f64>]) {
    for (a, b) in acc.iter_mut().zip(other) {
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
        }
    }
}

/// Pairwise (tree) reduction of ordered partial sums.
fn pairwise(mut parts: Vec<Vec<Vec<f64>>>) -> Vec<Vec<f64>> {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(mut left) = it.next() {
            if let Some(right) = it.next() {
                add_into(&mut left, &right);
            }
            next.push(left);
        }
        parts = next;
    }
    parts.pop().unwrap_or_default()
}

/// Mean over `n` nodes of `contribution(i)`: sequential sums inside
/// blocks of [`BLOCK`] consecutive nodes, pairwise across blocks.
pub(crate) fn node_ordered_mean<F>(n: usize, contribution: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(usize) -> Result<Vec<Vec<f64>>> + Sync,
{
    let blocks = n.div_ceil(BLOCK);
    let partial: Vec<Vec<Vec<f64>>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc: Option<Vec<Vec<f64>>> = None;
            for i in b * BLOCK..((b + 1) * BLOCK).min(n) {
                let c = contribution(i).map_err(|e| Error::at_node(i, e))?;
                match acc.as_mut() {
                    None => acc = Some(c),
                    Some(a) => add_into(a, &c),
                }
            }
            Ok(acc.expect("blocks are non-empty"))
        })
        .collect::<Result<_>>()?;

    let mut mean = pairwise(partial);
    let inv = 1.0 / n as f64;
    for v in &mut mean {
        for x in v.iter_mut() {
            *x *= inv;
        }
    }
    Ok(mean)
}

pub(crate) fn run(cfg: &StudyConfig, qoi: QoiKind) -> Result<EngineOutput> {
    cfg.validate()?;
    let s_ref = cfg.s_ref;
    let space = FemSpace::new(cfg.fem_level)?;
    let table = BasisTable::new(cfg.field, &space.mesh().centroids());
    let load = space.restrict(&space.assemble_load(source_term));
    let map = ParamMap::for_config(cfg)?;
    let shift = random_shift(cfg.seed, s_ref);
    let rule = if cfg.n_nodes == 1 {
        None
    } else {
        let req = GeneratorRequest {
            n: cfg.n_nodes,
            s: s_ref,
            theta: cfg.field.theta,
            korobov_multiplier: cfg.korobov_multiplier,
        };
        Some(generator_registry().get(&cfg.generator)?.build(&req)?)
    };

    let mut dims = cfg.s_list.clone();
    dims.push(s_ref);
    let k_trunc = cfg.s_list.len();
    let solves = AtomicUsize::new(0);
    let template = space.stiffness_from_element_coeffs(&vec![1.0; space.mesh().num_elements()]);

    let n = cfg.n_nodes as usize;
    let mut means = node_ordered_mean(n, |i| {
        let mut t = vec![0.0; s_ref];
        match &rule {
            Some(rule) => rule.point_into(i as u64, &shift, &mut t),
            None => t.copy_from_slice(shift.components()),
        }
        cfg.transform.apply(&mut t);
        let mut y = vec![0.0; s_ref];
        map.apply(&t, &mut y)?;
        let coeffs = table.truncated_coefficients(&y, &dims)?;

        let mut stiffness = template.clone();
        let mut solutions = Vec::with_capacity(dims.len());
        let mut elapsed = Vec::with_capacity(dims.len());
        for c in &coeffs {
            let start = Instant::now();
            space.fill_stiffness(c, &mut stiffness);
            let (x, _) = pcg(&stiffness, &load, &cfg.solver)?;
            solves.fetch_add(1, Ordering::Relaxed);
            solutions.push(x);
            elapsed.push(start.elapsed().as_secs_f64() * 1e3);
        }
        let reference = solutions.pop().expect("reference solve");
        let ref_ms = elapsed.pop().expect("reference solve");
        let mut out = Vec::with_capacity(k_trunc + 2);
        match qoi {
            QoiKind::H1MeanField => {
                for x in &solutions {
                    out.push(reference.iter().zip(x).map(|(r, v)| r - v).collect());
                }
                out.push(reference);
            }
            QoiKind::NonlinearGnl => {
                let g_ref = space.qoi_nl(&space.extend(&reference));
                for x in &solutions {
                    out.push(vec![g_ref - space.qoi_nl(&space.extend(x))]);
                }
                out.push(vec![g_ref]);
            }
        }
        // timings ride along as one more accumulated vector
        out.push(elapsed.iter().map(|ms| ms + ref_ms).collect());
        Ok(out)
    })?;
    let mut wall_ms = means.pop().unwrap_or_default();
    for v in &mut wall_ms {
        *v *= n as f64;
    }
    Ok(EngineOutput {
        means,
        wall_ms,
        solves: solves.load(Ordering::Relaxed),
        space,
    })
}

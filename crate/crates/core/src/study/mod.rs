//! Dimension-truncation studies.
//!
//! A study integrates the difference between the reference solution (all
//! `s_ref` parameters active) and each truncated solution over a randomly
//! shifted lattice rule, then fits a power law to the decay in `s`.

mod engine;
mod fit;
mod plot;
mod theory;

use std::fmt::Write as _;
use std::str::FromStr;

pub use fit::{fit_rate, RateFit};
pub use plot::plot_script;
pub use theory::{
    beta_uniform_grid, random_stechkin_cases, stechkin_check, strang_bound_check,
    theoretical_rate, MomentGridPoint, StechkinCase, StechkinReport, StrangDraw, StrangReport,
    GRID_ALPHAS, GRID_BETAS, GRID_NUS,
};

use crate::betagauss::BetaGaussian;
use crate::error::{Error, Result};
use crate::fem::{SolverOptions, MAX_LEVEL, MIN_LEVEL};
use crate::lattice::{check_power_of_two, PointTransform};
use crate::randfield::{FieldKind, FieldSpec};
use crate::registry::{Named, Registry};

/// Errors below this are reported as being at machine precision.
pub const MACHINE_PRECISION_FLOOR: f64 = 1e-15;

/// Version string written into every result.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// The source term `f(x) = x₂`.
pub(crate) fn source_term(x: [f64; 2]) -> f64 {
    x[1]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QoiKind {
    /// `|E[u_{s'} - u_s]|_{H¹}`
    H1MeanField,
    /// `|E[G(u_{s'}) - G(u_s)]|` with `G(v) = ∫ v²`
    NonlinearGnl,
}

impl QoiKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            QoiKind::H1MeanField => "h1-mean-field",
            QoiKind::NonlinearGnl => "nonlinear-gnl",
        }
    }
}

impl FromStr for QoiKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "h1-mean-field" => Ok(QoiKind::H1MeanField),
            "nonlinear-gnl" => Ok(QoiKind::NonlinearGnl),
            other => Err(Error::Config(format!("unknown qoi '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    /// `field.max_dim` must be at least `s_ref`.
    pub field: FieldSpec,
    pub fem_level: u32,
    pub s_list: Vec<usize>,
    pub s_ref: usize,
    pub n_nodes: u64,
    pub seed: u64,
    /// Shape of the β-Gaussian parameter law; ignored by affine studies.
    pub beta: f64,
    pub qoi: QoiKind,
    /// Name in [`crate::lattice::generator_registry`].
    pub generator: String,
    pub korobov_multiplier: Option<u64>,
    pub transform: PointTransform,
    pub solver: SolverOptions,
    /// Measure per-dimension solve time. Off by default so that outputs
    /// are reproducible byte for byte.
    pub record_timings: bool,
}

pub const DEFAULT_FEM_LEVEL: u32 = 4;
pub const DEFAULT_S_REF: usize = 1 << 9;
pub const DEFAULT_NODES: u64 = 1 << 13;
pub const DEFAULT_SEED: u64 = 1;

fn default_s_list() -> Vec<usize> {
    (1..=8).map(|k| 1usize << k).collect()
}

impl StudyConfig {
    /// The lognormal experiment at desk scale.
    pub fn lognormal(theta: f64) -> Result<Self> {
        Ok(Self {
            field: FieldSpec::lognormal(theta, DEFAULT_S_REF)?,
            fem_level: DEFAULT_FEM_LEVEL,
            s_list: default_s_list(),
            s_ref: DEFAULT_S_REF,
            n_nodes: DEFAULT_NODES,
            seed: DEFAULT_SEED,
            beta: 2.0,
            qoi: QoiKind::H1MeanField,
            generator: "cbc".into(),
            korobov_multiplier: None,
            transform: PointTransform::default(),
            solver: SolverOptions::default(),
            record_timings: false,
        })
    }

    /// The affine experiment with the nonlinear functional at desk scale.
    pub fn affine(theta: f64) -> Result<Self> {
        Ok(Self {
            field: FieldSpec::affine(theta, DEFAULT_S_REF)?,
            qoi: QoiKind::NonlinearGnl,
            ..Self::lognormal(theta)?
        })
    }

    /// Sets the reference dimension and grows the field to match.
    pub fn set_s_ref(&mut self, s_ref: usize) {
        self.s_ref = s_ref;
        self.field.max_dim = s_ref;
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        FieldSpec::new(self.field.kind, self.field.a0, self.field.theta, self.field.max_dim)?;
        if self.s_list.is_empty() {
            return bad("s_list must not be empty".into());
        }
        if self.s_list[0] == 0 {
            return bad("s_list entries must be >= 1".into());
        }
        if let Some(i) = self.s_list.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Unordered(i + 1));
        }
        let s_max = *self.s_list.last().expect("non-empty");
        if self.s_ref < s_max {
            return bad(format!("s_ref = {} is below max(s_list) = {s_max}", self.s_ref));
        }
        if self.field.max_dim < self.s_ref {
            return bad(format!(
                "field has {} terms but s_ref = {}",
                self.field.max_dim, self.s_ref
            ));
        }
        if !(MIN_LEVEL..=MAX_LEVEL).contains(&self.fem_level) {
            return bad(format!(
                "fem level {} outside {MIN_LEVEL}..={MAX_LEVEL}",
                self.fem_level
            ));
        }
        // a single node is the bare shift
        if self.n_nodes != 1 {
            check_power_of_two(self.n_nodes)?;
        }
        if self.field.kind == FieldKind::Lognormal && !(self.beta >= 1.0 && self.beta.is_finite()) {
            return bad(format!("beta must be >= 1, got {}", self.beta));
        }
        match (self.qoi, self.field.kind) {
            (QoiKind::H1MeanField, FieldKind::Lognormal) | (QoiKind::NonlinearGnl, FieldKind::Affine) => {}
            (q, k) => {
                return bad(format!(
                    "qoi {} does not go with a {} field",
                    q.as_str(),
                    k.as_str()
                ))
            }
        }
        if !(self.solver.tol > 0.0) {
            return bad(format!("solver tolerance must be positive, got {}", self.solver.tol));
        }
        Ok(())
    }
}

/// Maps lattice points in `[0,1)^s` to parameters.
#[derive(Debug, Clone)]
pub(crate) enum ParamMap {
    /// `y_j = Φ_β^{-1}(t_j)`
    Quantile(BetaGaussian),
    /// `y_j = 2 t_j - 1`
    Affine,
}

impl ParamMap {
    pub(crate) fn for_config(cfg: &StudyConfig) -> Result<Self> {
        Ok(match cfg.field.kind {
            FieldKind::Lognormal => ParamMap::Quantile(BetaGaussian::new(cfg.beta)?),
            FieldKind::Affine => ParamMap::Affine,
        })
    }

    pub(crate) fn apply(&self, t: &[f64], y: &mut [f64]) -> Result<()> {
        match self {
            ParamMap::Quantile(dist) => {
                for (yj, &tj) in y.iter_mut().zip(t) {
                    *yj = dist.inv_cdf(tj)?;
                }
            }
            ParamMap::Affine => {
                for (yj, &tj) in y.iter_mut().zip(t) {
                    *yj = 2.0 * tj - 1.0;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyEntry {
    pub s: usize,
    pub error: f64,
    pub n_nodes: u64,
    /// Solve time for this dimension plus the shared reference solve,
    /// summed over nodes; zero unless timings were requested.
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    pub study: String,
    pub config: StudyConfig,
    pub entries: Vec<StudyEntry>,
    pub fit: Option<RateFit>,
    /// Why no fit was produced, if it was not.
    pub fit_error: Option<String>,
    /// Dimensions whose error fell below [`MACHINE_PRECISION_FLOOR`].
    pub below_precision: Vec<usize>,
    /// Size of the integrated reference quantity, used to place the
    /// solver-accuracy floor of the fit.
    pub reference_scale: f64,
    pub solves: usize,
    pub version: String,
}

/// Formats with 17 significant digits, which round-trips every `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..16).contains(&exp) {
        let decimals = (16 - exp) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.16e}")
    }
}

impl StudyResult {
    pub fn points(&self) -> Vec<(usize, f64)> {
        self.entries.iter().map(|e| (e.s, e.error)).collect()
    }

    pub fn slope(&self) -> Option<f64> {
        self.fit.as_ref().map(|f| f.slope)
    }

    pub const CSV_HEADER: &'static str = "s,error,n_nodes,s_ref,fem_level,theta,beta,seed,wall_ms";

    /// One row per dimension, then `#`-prefixed footer rows.
    pub fn to_csv(&self) -> String {
        let c = &self.config;
        let beta = match c.field.kind {
            FieldKind::Lognormal => fmt_f64(c.beta),
            // uniform parameters are the β → ∞ limit
            FieldKind::Affine => "inf".into(),
        };
        let mut out = String::new();
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                e.s,
                fmt_f64(e.error),
                e.n_nodes,
                c.s_ref,
                c.fem_level,
                fmt_f64(c.field.theta),
                beta,
                c.seed,
                fmt_f64(e.wall_ms)
            );
        }
        match &self.fit {
            Some(f) => {
                let _ = writeln!(
                    out,
                    "#fitted_slope,{},fit_range,{},{}",
                    fmt_f64(f.slope),
                    f.fit_range.0,
                    f.fit_range.1
                );
            }
            None => {
                let why = self.fit_error.as_deref().unwrap_or("no fit");
                let _ = writeln!(out, "#fitted_slope,nan,fit_range,,,{why}");
            }
        }
        if !self.below_precision.is_empty() {
            let list: Vec<String> = self.below_precision.iter().map(|s| s.to_string()).collect();
            let _ = writeln!(out, "#below_machine_precision,{}", list.join(";"));
        }
        let _ = writeln!(
            out,
            "#study,{},qoi,{},generator,{},transform,{},version,{}",
            self.study,
            c.qoi.as_str(),
            c.generator,
            c.transform.as_str(),
            self.version
        );
        out
    }
}

/// A truncation experiment selectable by name.
pub trait TruncationStudy: Named + Send + Sync {
    fn default_config(&self, theta: f64) -> Result<StudyConfig>;
    fn run(&self, cfg: &StudyConfig) -> Result<StudyResult>;
}

fn finish(study: &str, cfg: &StudyConfig, out: engine::EngineOutput) -> StudyResult {
    let (mut means, wall_ms, solves, space) = (out.means, out.wall_ms, out.solves, out.space);
    let reference = means.pop().expect("reference mean");
    let (errors, reference_scale): (Vec<f64>, f64) = match cfg.qoi {
        QoiKind::H1MeanField => (
            means.iter().map(|d| space.h1_seminorm(&space.extend(d))).collect(),
            space.h1_seminorm(&space.extend(&reference)),
        ),
        QoiKind::NonlinearGnl => (means.iter().map(|d| d[0].abs()).collect(), reference[0].abs()),
    };
    let entries: Vec<StudyEntry> = cfg
        .s_list
        .iter()
        .zip(&errors)
        .zip(&wall_ms)
        .map(|((&s, &error), &ms)| StudyEntry {
            s,
            error,
            n_nodes: cfg.n_nodes,
            wall_ms: if cfg.record_timings { ms } else { 0.0 },
        })
        .collect();

    let below_precision: Vec<usize> = match cfg.qoi {
        QoiKind::NonlinearGnl => entries
            .iter()
            .filter(|e| e.error < MACHINE_PRECISION_FLOOR)
            .map(|e| e.s)
            .collect(),
        QoiKind::H1MeanField => Vec::new(),
    };
    // errors within reach of the linear-solver tolerance carry no signal
    let mut floor = 100.0 * cfg.solver.tol * reference_scale;
    if cfg.qoi == QoiKind::NonlinearGnl {
        floor = floor.max(MACHINE_PRECISION_FLOOR);
    }
    let (fit, fit_error) = match fit_rate(&errors_for_fit(&entries), floor) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    StudyResult {
        study: study.into(),
        config: cfg.clone(),
        entries,
        fit,
        fit_error,
        below_precision,
        reference_scale,
        solves,
        version: VERSION.into(),
    }
}

fn errors_for_fit(entries: &[StudyEntry]) -> Vec<(usize, f64)> {
    entries.iter().map(|e| (e.s, e.error)).collect()
}

/// `‖E[u_{s'} - u_s]‖_{H¹₀}` for a lognormal coefficient.
pub struct LognormalStudy;

impl Named for LognormalStudy {
    fn name(&self) -> &str {
        "lognormal"
    }
}

impl TruncationStudy for LognormalStudy {
    fn default_config(&self, theta: f64) -> Result<StudyConfig> {
        StudyConfig::lognormal(theta)
    }

    fn run(&self, cfg: &StudyConfig) -> Result<StudyResult> {
        if cfg.qoi != QoiKind::H1MeanField || cfg.field.kind != FieldKind::Lognormal {
            return Err(Error::InvalidParameter(
                "the lognormal study needs a lognormal field and the H1 mean-field error".into(),
            ));
        }
        let out = engine::run(cfg, QoiKind::H1MeanField)?;
        Ok(finish(self.name(), cfg, out))
    }
}

/// `|E[G(u_{s'}) - G(u_s)]|` for an affine coefficient with uniform parameters.
pub struct AffineQoiStudy;

impl Named for AffineQoiStudy {
    fn name(&self) -> &str {
        "affine-qoi"
    }
}

impl TruncationStudy for AffineQoiStudy {
    fn default_config(&self, theta: f64) -> Result<StudyConfig> {
        StudyConfig::affine(theta)
    }

    fn run(&self, cfg: &StudyConfig) -> Result<StudyResult> {
        if cfg.qoi != QoiKind::NonlinearGnl || cfg.field.kind != FieldKind::Affine {
            return Err(Error::InvalidParameter(
                "the affine study needs an affine field and the nonlinear functional".into(),
            ));
        }
        let out = engine::run(cfg, QoiKind::NonlinearGnl)?;
        Ok(finish(self.name(), cfg, out))
    }
}

pub fn study_registry() -> Registry<dyn TruncationStudy> {
    let mut r: Registry<dyn TruncationStudy> = Registry::new("study");
    r.register(Box::new(LognormalStudy)).register(Box::new(AffineQoiStudy));
    r
}

pub fn run_lognormal_study(cfg: &StudyConfig) -> Result<StudyResult> {
    LognormalStudy.run(cfg)
}

pub fn run_affine_qoi_study(cfg: &StudyConfig) -> Result<StudyResult> {
    AffineQoiStudy.run(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{pcg, FemSpace};
    use crate::lattice::random_shift;
    use crate::randfield::BasisTable;

    fn small(kind: FieldKind) -> StudyConfig {
        let mut cfg = match kind {
            FieldKind::Lognormal => StudyConfig::lognormal(2.0).unwrap(),
            FieldKind::Affine => StudyConfig::affine(2.0).unwrap(),
        };
        cfg.fem_level = 3;
        cfg.s_list = vec![1, 2, 4, 8, 16];
        cfg.set_s_ref(16);
        cfg.n_nodes = 32;
        cfg
    }

    #[test]
    fn full_dimension_has_zero_error() {
        for kind in [FieldKind::Lognormal, FieldKind::Affine] {
            let cfg = small(kind);
            let res = study_registry()
                .get(match kind {
                    FieldKind::Lognormal => "lognormal",
                    FieldKind::Affine => "affine-qoi",
                })
                .unwrap()
                .run(&cfg)
                .unwrap();
            assert_eq!(res.entries.last().unwrap().error, 0.0);
            assert!(res.entries.iter().all(|e| e.error >= 0.0));
        }
    }

    #[test]
    fn solve_counter() {
        let cfg = small(FieldKind::Lognormal);
        let res = run_lognormal_study(&cfg).unwrap();
        assert_eq!(res.solves, 32 * (cfg.s_list.len() + 1));
    }

    // direct recomputation for one node, sharing nothing with the engine
    // beyond the basic FEM and field building blocks
    fn single_node_truth(cfg: &StudyConfig, s: usize) -> f64 {
        let space = FemSpace::new(cfg.fem_level).unwrap();
        let mut t = random_shift(cfg.seed, cfg.s_ref).components().to_vec();
        cfg.transform.apply(&mut t);
        let y: Vec<f64> = match cfg.field.kind {
            FieldKind::Lognormal => {
                let d = BetaGaussian::new(cfg.beta).unwrap();
                t.iter().map(|&t| d.inv_cdf(t).unwrap()).collect()
            }
            FieldKind::Affine => t.iter().map(|&t| 2.0 * t - 1.0).collect(),
        };
        let table = BasisTable::new(cfg.field, &space.mesh().centroids());
        let c = table.truncated_coefficients(&y, &[s, cfg.s_ref]).unwrap();
        let load = space.restrict(&space.assemble_load(|x| x[1]));
        let solve = |coef: &[f64]| {
            let a = space.stiffness_from_element_coeffs(coef);
            space.extend(&pcg(&a, &load, &cfg.solver).unwrap().0)
        };
        let (u_s, u) = (solve(&c[0]), solve(&c[1]));
        match cfg.qoi {
            QoiKind::H1MeanField => space.h1_seminorm(&u.sub(&u_s)),
            QoiKind::NonlinearGnl => (space.qoi_nl(&u) - space.qoi_nl(&u_s)).abs(),
        }
    }

    #[test]
    fn one_node_study_equals_single_difference() {
        for kind in [FieldKind::Lognormal, FieldKind::Affine] {
            let mut cfg = small(kind);
            cfg.n_nodes = 1;
            let res = if kind == FieldKind::Lognormal {
                run_lognormal_study(&cfg).unwrap()
            } else {
                run_affine_qoi_study(&cfg).unwrap()
            };
            for e in &res.entries {
                let truth = single_node_truth(&cfg, e.s);
                assert!(
                    (e.error - truth).abs() <= 1e-12 * truth.max(1e-300),
                    "s = {}: {} vs {}",
                    e.s,
                    e.error,
                    truth
                );
            }
        }
    }

    #[test]
    fn norm_of_mean_is_below_mean_of_norms() {
        // difference fields alternating in sign across nodes
        let space = FemSpace::new(3).unwrap();
        let n = space.num_unknowns();
        let v: Vec<f64> = (0..n).map(|i| ((i * 7 % 11) as f64 - 5.0) * 0.1).collect();
        let w: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).cos() * 1e-3).collect();
        let node = |i: usize| -> Vec<f64> {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            v.iter().zip(&w).map(|(a, b)| sign * a + b).collect()
        };
        let mean = engine::node_ordered_mean(200, |i| Ok(vec![node(i)])).unwrap();
        let norm_of_mean = space.h1_seminorm(&space.extend(&mean[0]));
        let mean_of_norms: f64 =
            (0..200).map(|i| space.h1_seminorm(&space.extend(&node(i)))).sum::<f64>() / 200.0;
        let expected = space.h1_seminorm(&space.extend(&w));
        assert!(norm_of_mean < 0.01 * mean_of_norms);
        assert!((norm_of_mean - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn origin_gives_zero_functional_difference() {
        // t = 1/2 maps to y = 0 under t -> 2t - 1
        let cfg = small(FieldKind::Affine);
        let map = ParamMap::for_config(&cfg).unwrap();
        let mut y = vec![1.0; 16];
        map.apply(&[0.5; 16], &mut y).unwrap();
        assert!(y.iter().all(|&v| v == 0.0));
        let space = FemSpace::new(3).unwrap();
        let table = BasisTable::new(cfg.field, &space.mesh().centroids());
        let c = table.truncated_coefficients(&y, &cfg.s_list).unwrap();
        assert!(c.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let cfg = small(FieldKind::Lognormal);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_lognormal_study(&cfg).unwrap().to_csv())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn csv_layout() {
        let cfg = small(FieldKind::Affine);
        let csv = run_affine_qoi_study(&cfg).unwrap().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(StudyResult::CSV_HEADER));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 9);
        assert_eq!(row[0], "1");
        assert_eq!(row[6], "inf");
        assert!(csv.contains("#fitted_slope,"));
    }

    #[test]
    fn fmt_round_trips() {
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt() * 1e-17, 12345.678, 0.0, -7.5e-3, 9.999999999999999e15] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert!(fmt_f64((2.0 / std::f64::consts::PI).sqrt()).starts_with("0.7978845608"));
    }

    #[test]
    fn validation() {
        let mut cfg = small(FieldKind::Lognormal);
        cfg.s_list = vec![2, 2];
        assert!(cfg.validate().is_err());
        let mut cfg = small(FieldKind::Lognormal);
        cfg.n_nodes = 12;
        assert!(cfg.validate().is_err());
        let mut cfg = small(FieldKind::Lognormal);
        cfg.qoi = QoiKind::NonlinearGnl;
        assert!(cfg.validate().is_err());
        let mut cfg = small(FieldKind::Lognormal);
        cfg.s_ref = 8;
        assert!(cfg.validate().is_err());
        assert!(study_registry().get("nope").is_err());
    }
}

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use dimtrunc::betagauss::{BetaGaussian, WeightedMomentSpec};
use dimtrunc::config::{apply_study_key, parse_list, study_entries, KeyValues};
use dimtrunc::fem::{manufactured_h1_errors, SolverOptions};
use dimtrunc::lattice::{generator_registry, random_shift, GeneratorRequest, PointTransform};
use dimtrunc::special::gamma;
use dimtrunc::study::{
    beta_uniform_grid, fmt_f64, plot_script, random_stechkin_cases, stechkin_check,
    strang_bound_check, study_registry, StudyConfig,
};

use crate::args::{CheckArgs, CommonArgs, FemVerifyArgs, LatticeArgs, MomentsArgs, StudyArgs};
use crate::error::CliError;
use crate::manifest::{load_config, RunManifest};

type CliResult<T> = Result<T, CliError>;

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("{key}: cannot parse '{value}'")))
}

fn prepare_out(common: &CommonArgs) -> CliResult<PathBuf> {
    fs::create_dir_all(&common.out).map_err(|e| CliError::io(&common.out, e))?;
    Ok(common.out.clone())
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Rejects config keys a subcommand does not understand.
fn check_keys(kv: &KeyValues, allowed: &[&str]) -> CliResult<()> {
    match kv.iter().find(|(k, _)| !allowed.contains(k)) {
        Some((k, _)) => Err(CliError::Usage(format!("unknown config key '{k}' for this subcommand"))),
        None => Ok(()),
    }
}

pub fn run_study(subcommand: &str, study_name: &str, args: &StudyArgs) -> CliResult<()> {
    let mut manifest = RunManifest::start(subcommand);
    let registry = study_registry();
    let study = registry.get(study_name)?;
    let mut file = load_config(args.common.config.as_deref())?;

    let file_thetas = file.remove("field.theta");
    let thetas: Vec<f64> = if !args.theta.is_empty() {
        args.theta.clone()
    } else if let Some(list) = file_thetas {
        parse_list("field.theta", &list)?
    } else {
        vec![1.5, 2.0, 3.0]
    };
    if thetas.is_empty() {
        return Err(CliError::Usage("no theta given".into()));
    }

    let mut cfg = study.default_config(thetas[0])?;
    for (k, v) in file.iter() {
        apply_study_key(&mut cfg, k, v)?;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(beta) = args.beta {
        cfg.beta = beta;
    }
    if let Some(level) = args.fem_level {
        cfg.fem_level = level;
    }
    if let Some(s_ref) = args.s_ref {
        cfg.set_s_ref(s_ref);
    }
    if !args.s_list.is_empty() {
        cfg.s_list = args.s_list.clone();
    }
    if let Some(n) = args.nodes {
        cfg.n_nodes = n;
    }
    if let Some(a) = args.korobov {
        cfg.korobov_multiplier = Some(a);
        cfg.generator = "korobov".into();
    }
    if let Some(g) = &args.generator {
        cfg.generator = g.clone();
    }
    if let Some(t) = &args.transform {
        cfg.transform = t.parse()?;
    }
    if args.timings {
        cfg.record_timings = true;
    }
    // resolve the generator name before any work is done
    generator_registry().get(&cfg.generator)?;

    let out = prepare_out(&args.common)?;
    let mut results = Vec::new();
    let mut csv_names = Vec::new();
    for &theta in &thetas {
        let mut c = cfg.clone();
        c.field.theta = theta;
        c.validate()?;
        let res = study.run(&c)?;
        let name = format!("{subcommand}-{theta}.csv");
        let path = out.join(&name);
        write_file(&path, &res.to_csv())?;
        manifest.add_output(&path);
        match (&res.fit, &res.fit_error) {
            (Some(f), _) => println!(
                "theta {theta}: fitted slope {} over s = {}..{} -> {}",
                fmt_f64(f.slope),
                f.fit_range.0,
                f.fit_range.1,
                path.display()
            ),
            (None, why) => println!(
                "theta {theta}: no fit ({}) -> {}",
                why.as_deref().unwrap_or("unknown"),
                path.display()
            ),
        }
        if !res.below_precision.is_empty() {
            println!("theta {theta}: below machine precision at s = {:?}", res.below_precision);
        }
        results.push(res);
        csv_names.push(name);
    }
    if args.emit_plot {
        let path = out.join("plot.gp");
        write_file(&path, &plot_script(&results, &csv_names))?;
        manifest.add_output(&path);
    }

    let mut resolved = study_entries(&cfg);
    let list: Vec<String> = thetas.iter().map(|t| t.to_string()).collect();
    resolved.set("field.theta", list.join(","));
    manifest.set_config(resolved);
    manifest.write(&out)?;
    Ok(())
}

pub fn run_fem_verify(args: &FemVerifyArgs) -> CliResult<()> {
    let mut manifest = RunManifest::start("fem-verify");
    let file = load_config(args.common.config.as_deref())?;
    check_keys(&file, &["verify.levels", "fem.cg_tol", "fem.cg_max_iters"])?;
    let mut levels: Vec<u32> = vec![2, 3, 4, 5, 6];
    let mut opts = SolverOptions::default();
    if let Some(v) = file.get("verify.levels") {
        levels = parse_list("verify.levels", v)?;
    }
    if let Some(v) = file.get("fem.cg_tol") {
        opts.tol = parse("fem.cg_tol", v)?;
    }
    if let Some(v) = file.get("fem.cg_max_iters") {
        opts.max_iters = if v == "auto" { None } else { Some(parse("fem.cg_max_iters", v)?) };
    }
    if !args.levels.is_empty() {
        levels = args.levels.clone();
    }

    let out = prepare_out(&args.common)?;
    let errors = manufactured_h1_errors(levels.iter().copied(), &opts)?;
    let mut csv = String::from("level,h,h1_error,ratio\n");
    println!("{:>5} {:>12} {:>24} {:>8}", "level", "h", "h1_error", "ratio");
    for (i, e) in errors.iter().enumerate() {
        let ratio = (i > 0).then(|| errors[i - 1].h1_error / e.h1_error);
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            e.level,
            fmt_f64(e.h),
            fmt_f64(e.h1_error),
            ratio.map(fmt_f64).unwrap_or_default()
        );
        println!(
            "{:>5} {:>12} {:>24} {:>8}",
            e.level,
            e.h,
            fmt_f64(e.h1_error),
            ratio.map(|r| format!("{r:.4}")).unwrap_or_default()
        );
    }
    let path = out.join("fem-verify.csv");
    write_file(&path, &csv)?;
    manifest.add_output(&path);

    let mut resolved = KeyValues::new();
    let list: Vec<String> = levels.iter().map(|l| l.to_string()).collect();
    resolved.set("verify.levels", list.join(","));
    resolved.set("fem.cg_tol", opts.tol.to_string());
    resolved.set("fem.cg_max_iters", opts.max_iters.map_or("auto".into(), |m| m.to_string()));
    manifest.set_config(resolved);
    manifest.write(&out)?;
    Ok(())
}

/// `C(α, β, ν)` in closed form where one is known: `α = 0` for any β,
/// and the Laplace case `β = 1`.
fn closed_form_moment(beta: f64, alpha: f64, nu: u32) -> CliResult<Option<f64>> {
    if alpha == 0.0 {
        return Ok(Some(BetaGaussian::new(beta)?.abs_moment(nu)));
    }
    if beta == 1.0 {
        return Ok(Some(gamma(nu as f64 + 1.0) / (1.0 - alpha).powi(nu as i32 + 1)));
    }
    Ok(None)
}

pub fn run_moments(args: &MomentsArgs) -> CliResult<()> {
    let mut manifest = RunManifest::start("moments");
    let file = load_config(args.common.config.as_deref())?;
    check_keys(&file, &["moments.beta", "moments.alpha", "moments.nu"])?;
    let mut beta = 2.0;
    let mut alpha = 0.0;
    let mut nu = 1u32;
    if let Some(v) = file.get("moments.beta") {
        beta = parse("moments.beta", v)?;
    }
    if let Some(v) = file.get("moments.alpha") {
        alpha = parse("moments.alpha", v)?;
    }
    if let Some(v) = file.get("moments.nu") {
        nu = parse("moments.nu", v)?;
    }
    beta = args.beta.unwrap_or(beta);
    alpha = args.alpha.unwrap_or(alpha);
    nu = args.nu.unwrap_or(nu);

    let out = prepare_out(&args.common)?;
    let dist = BetaGaussian::new(beta)?;
    let quadrature = dist.exp_weighted_moment(WeightedMomentSpec::new(alpha, nu)?)?;
    let closed = closed_form_moment(beta, alpha, nu)?;
    println!("beta = {beta}, alpha = {alpha}, nu = {nu}");
    match closed {
        Some(c) => {
            println!("closed_form = {}", fmt_f64(c));
            println!("quadrature  = {}", fmt_f64(quadrature));
            println!("difference  = {}", fmt_f64(quadrature - c));
        }
        None => {
            println!("closed_form = n/a");
            println!("quadrature  = {}", fmt_f64(quadrature));
        }
    }

    let mut resolved = KeyValues::new();
    resolved.set("moments.beta", beta.to_string());
    resolved.set("moments.alpha", alpha.to_string());
    resolved.set("moments.nu", nu.to_string());
    manifest.set_config(resolved);
    manifest.write(&out)?;
    Ok(())
}

pub fn run_lattice_gen(args: &LatticeArgs) -> CliResult<()> {
    let mut manifest = RunManifest::start("lattice-gen");
    let file = load_config(args.common.config.as_deref())?;
    check_keys(
        &file,
        &[
            "lattice.n",
            "lattice.s",
            "field.theta",
            "lattice.generator",
            "lattice.korobov",
            "lattice.emit_points",
            "lattice.transform",
            "study.seed",
        ],
    )?;
    let mut n: u64 = 1 << 13;
    let mut s: usize = 512;
    let mut theta = 2.0;
    let mut generator = "cbc".to_string();
    let mut korobov: Option<u64> = None;
    let mut emit_points = false;
    let mut transform = PointTransform::None;
    let mut seed = dimtrunc::study::DEFAULT_SEED;
    for (k, v) in file.iter() {
        match k {
            "lattice.n" => n = parse(k, v)?,
            "lattice.s" => s = parse(k, v)?,
            "field.theta" => theta = parse(k, v)?,
            "lattice.generator" => generator = v.to_string(),
            "lattice.korobov" => korobov = if v == "auto" { None } else { Some(parse(k, v)?) },
            "lattice.emit_points" => emit_points = parse(k, v)?,
            "lattice.transform" => transform = v.parse()?,
            "study.seed" => seed = parse(k, v)?,
            _ => unreachable!("keys were checked"),
        }
    }
    n = args.n.unwrap_or(n);
    s = args.s.unwrap_or(s);
    theta = args.theta.unwrap_or(theta);
    if let Some(a) = args.korobov {
        korobov = Some(a);
        generator = "korobov".into();
    }
    emit_points |= args.emit_points;
    if let Some(t) = &args.transform {
        transform = t.parse()?;
    }
    seed = args.seed.unwrap_or(seed);

    let out = prepare_out(&args.common)?;
    let req = GeneratorRequest {
        n,
        s,
        theta,
        korobov_multiplier: korobov,
    };
    let rule = generator_registry().get(&generator)?.build(&req)?;
    let mut text = String::new();
    for z in rule.generating_vector() {
        let _ = writeln!(text, "{z}");
    }
    let path = out.join(format!("lattice-gen-{theta}.txt"));
    write_file(&path, &text)?;
    manifest.add_output(&path);

    let stdout = io::stdout();
    let mut w = BufWriter::new(stdout.lock());
    let io_err = |e: io::Error| CliError::Io(format!("stdout: {e}"));
    if emit_points {
        let shift = random_shift(seed, s);
        let mut t = vec![0.0; s];
        for i in 0..n {
            rule.point_into(i, &shift, &mut t);
            transform.apply(&mut t);
            let row: Vec<String> = t.iter().map(|&v| fmt_f64(v)).collect();
            writeln!(w, "{}", row.join(",")).map_err(io_err)?;
        }
    } else {
        w.write_all(text.as_bytes()).map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;

    let mut resolved = KeyValues::new();
    resolved.set("lattice.n", n.to_string());
    resolved.set("lattice.s", s.to_string());
    resolved.set("field.theta", theta.to_string());
    resolved.set("lattice.generator", generator);
    resolved.set("lattice.korobov", korobov.map_or("auto".into(), |a| a.to_string()));
    resolved.set("lattice.emit_points", emit_points.to_string());
    resolved.set("lattice.transform", transform.as_str());
    resolved.set("study.seed", seed.to_string());
    manifest.set_config(resolved);
    manifest.write(&out)?;
    Ok(())
}

// Slack allowed on the perturbation bound for the linear-solver tolerance.
const STRANG_SLACK: f64 = 1e-9;
// Slack allowed on the β-uniform moment bound for quadrature error.
const MOMENT_SLACK: f64 = 1e-8;

pub fn run_check_theory(args: &CheckArgs) -> CliResult<()> {
    let mut manifest = RunManifest::start("check-theory");
    let file = load_config(args.common.config.as_deref())?;
    check_keys(
        &file,
        &[
            "check.seed",
            "check.stechkin_cases",
            "check.strang_draws",
            "check.strang_s",
            "field.theta",
            "fem.level",
        ],
    )?;
    let mut seed = dimtrunc::study::DEFAULT_SEED;
    let mut cases = 200usize;
    let mut draws = 50usize;
    let mut strang_s: Vec<usize> = vec![1, 2, 4, 8];
    let mut theta = 2.0;
    let mut level = 4u32;
    for (k, v) in file.iter() {
        match k {
            "check.seed" => seed = parse(k, v)?,
            "check.stechkin_cases" => cases = parse(k, v)?,
            "check.strang_draws" => draws = parse(k, v)?,
            "check.strang_s" => strang_s = parse_list(k, v)?,
            "field.theta" => theta = parse(k, v)?,
            "fem.level" => level = parse(k, v)?,
            _ => unreachable!("keys were checked"),
        }
    }
    seed = args.seed.unwrap_or(seed);
    cases = args.cases.unwrap_or(cases);
    draws = args.draws.unwrap_or(draws);
    theta = args.theta.unwrap_or(theta);
    level = args.fem_level.unwrap_or(level);

    let out = prepare_out(&args.common)?;
    let mut report = String::from("check,case,lhs,rhs,holds\n");
    let mut failures = Vec::new();

    let mut stechkin_bad = 0;
    for (i, c) in random_stechkin_cases(seed, cases).iter().enumerate() {
        let r = stechkin_check(&c.a, c.p, c.q, c.n)?;
        if !r.holds {
            stechkin_bad += 1;
        }
        let _ = writeln!(
            report,
            "stechkin,{i}:{}:p={}:q={}:N={},{},{},{}",
            c.family,
            c.p,
            c.q,
            c.n,
            fmt_f64(r.lhs),
            fmt_f64(r.rhs),
            r.holds
        );
    }
    println!("stechkin: {cases} cases, {stechkin_bad} violations");
    if stechkin_bad > 0 {
        failures.push(format!("{stechkin_bad} Stechkin violations"));
    }

    let mut cfg = StudyConfig::lognormal(theta)?;
    cfg.fem_level = level;
    cfg.seed = seed;
    for &s in &strang_s {
        let r = strang_bound_check(&cfg, draws, s)?;
        let bad = r.draws.iter().filter(|d| d.ratio() > 1.0 + STRANG_SLACK).count();
        for (i, d) in r.draws.iter().enumerate() {
            let _ = writeln!(
                report,
                "strang,s={s}:draw={i},{},{},{}",
                fmt_f64(d.lhs),
                fmt_f64(d.rhs),
                d.ratio() <= 1.0 + STRANG_SLACK
            );
        }
        println!("strang s = {s}: {draws} draws, max ratio {}, {bad} violations", fmt_f64(r.max_ratio));
        if bad > 0 {
            failures.push(format!("{bad} perturbation-bound violations at s = {s}"));
        }
    }

    let grid = beta_uniform_grid()?;
    let mut grid_bad = 0;
    for p in &grid {
        let holds = p.holds(MOMENT_SLACK);
        if !holds {
            grid_bad += 1;
        }
        let _ = writeln!(
            report,
            "beta-uniform,beta={}:alpha={}:nu={},{},{},{}",
            p.beta,
            p.alpha,
            p.nu,
            fmt_f64(p.value),
            fmt_f64(p.laplace),
            holds
        );
    }
    println!("beta-uniform: {} grid points, {grid_bad} violations", grid.len());
    if grid_bad > 0 {
        failures.push(format!("{grid_bad} beta-uniform violations"));
    }

    let path = out.join("check-theory.csv");
    write_file(&path, &report)?;
    manifest.add_output(&path);
    let mut resolved = KeyValues::new();
    resolved.set("check.seed", seed.to_string());
    resolved.set("check.stechkin_cases", cases.to_string());
    resolved.set("check.strang_draws", draws.to_string());
    let list: Vec<String> = strang_s.iter().map(|s| s.to_string()).collect();
    resolved.set("check.strang_s", list.join(","));
    resolved.set("field.theta", theta.to_string());
    resolved.set("fem.level", level.to_string());
    manifest.set_config(resolved);
    manifest.write(&out)?;

    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::CheckFailed(failures.join("; ")))
    }
}

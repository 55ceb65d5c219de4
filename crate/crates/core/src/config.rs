//! Flat `key = value` configuration text.
//!
//! Keys are namespaced (`fem.level`, `field.theta`, ...). Blank lines and
//! lines starting with `#` are ignored. Later occurrences of a key win.
//! Floats are written in the shortest form that parses back exactly.

use crate::error::{Error, Result};
use crate::fem::SolverOptions;
use crate::randfield::FieldKind;
use crate::study::StudyConfig;

/// Parsed entries in file order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: Vec<(String, String)>,
}

impl KeyValues {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = Self::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected key = value, got '{line}'",
                    lineno + 1
                )));
            };
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
            }
            kv.set(key, value.trim());
        }
        Ok(kv)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        let i = self.entries.iter().position(|(k, _)| k == key)?;
        Some(self.entries.remove(i).1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{value}'")))
}

/// Comma-separated list.
pub fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| parse_value(key, v))
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, got '{value}'"))),
    }
}

fn optional<T: std::str::FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    if value == "auto" {
        Ok(None)
    } else {
        parse_value(key, value).map(Some)
    }
}

/// Keys understood by [`apply_study_key`].
pub const STUDY_KEYS: &[&str] = &[
    "field.kind",
    "field.a0",
    "field.theta",
    "field.max_dim",
    "fem.level",
    "fem.cg_tol",
    "fem.cg_max_iters",
    "study.s_list",
    "study.s_ref",
    "study.nodes",
    "study.seed",
    "study.beta",
    "study.qoi",
    "study.timings",
    "lattice.generator",
    "lattice.korobov",
    "lattice.transform",
];

/// Applies one entry. `study.s_ref` also resizes the field; an explicit
/// `field.max_dim` must therefore come after it.
pub fn apply_study_key(cfg: &mut StudyConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "field.kind" => {
            let kind: FieldKind = value.parse()?;
            if kind != cfg.field.kind {
                return Err(Error::Config(format!(
                    "field.kind = {value} does not match this study ({})",
                    cfg.field.kind.as_str()
                )));
            }
        }
        "field.a0" => cfg.field.a0 = parse_value(key, value)?,
        "field.theta" => cfg.field.theta = parse_value(key, value)?,
        "field.max_dim" => cfg.field.max_dim = parse_value(key, value)?,
        "fem.level" => cfg.fem_level = parse_value(key, value)?,
        "fem.cg_tol" => cfg.solver.tol = parse_value(key, value)?,
        "fem.cg_max_iters" => cfg.solver.max_iters = optional(key, value)?,
        "study.s_list" => cfg.s_list = parse_list(key, value)?,
        "study.s_ref" => cfg.set_s_ref(parse_value(key, value)?),
        "study.nodes" => cfg.n_nodes = parse_value(key, value)?,
        "study.seed" => cfg.seed = parse_value(key, value)?,
        "study.beta" => cfg.beta = parse_value(key, value)?,
        "study.qoi" => cfg.qoi = value.parse()?,
        "study.timings" => cfg.record_timings = parse_bool(key, value)?,
        "lattice.generator" => cfg.generator = value.to_string(),
        "lattice.korobov" => cfg.korobov_multiplier = optional(key, value)?,
        "lattice.transform" => cfg.transform = value.parse()?,
        other => return Err(Error::Config(format!("unknown key '{other}'"))),
    }
    Ok(())
}

/// Every study key with its current value, in an order that
/// [`apply_study_key`] can replay.
pub fn study_entries(cfg: &StudyConfig) -> KeyValues {
    let SolverOptions { tol, max_iters } = cfg.solver;
    let list: Vec<String> = cfg.s_list.iter().map(|s| s.to_string()).collect();
    let mut kv = KeyValues::new();
    kv.set("field.kind", cfg.field.kind.as_str());
    kv.set("field.a0", cfg.field.a0.to_string());
    kv.set("field.theta", cfg.field.theta.to_string());
    kv.set("study.s_ref", cfg.s_ref.to_string());
    kv.set("field.max_dim", cfg.field.max_dim.to_string());
    kv.set("fem.level", cfg.fem_level.to_string());
    kv.set("fem.cg_tol", tol.to_string());
    kv.set("fem.cg_max_iters", max_iters.map_or("auto".into(), |m| m.to_string()));
    kv.set("study.s_list", list.join(","));
    kv.set("study.nodes", cfg.n_nodes.to_string());
    kv.set("study.seed", cfg.seed.to_string());
    kv.set("study.beta", cfg.beta.to_string());
    kv.set("study.qoi", cfg.qoi.as_str());
    kv.set("study.timings", cfg.record_timings.to_string());
    kv.set("lattice.generator", cfg.generator.clone());
    kv.set("lattice.korobov", cfg.korobov_multiplier.map_or("auto".into(), |a| a.to_string()));
    kv.set("lattice.transform", cfg.transform.as_str());
    kv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::PointTransform;

    #[test]
    fn parse_and_render() {
        let kv = KeyValues::parse("# comment\n\nfem.level = 5\nstudy.seed=9\nfem.level = 3\n").unwrap();
        assert_eq!(kv.get("fem.level"), Some("3"));
        assert_eq!(kv.get("study.seed"), Some("9"));
        assert_eq!(kv.render(), "fem.level = 3\nstudy.seed = 9\n");
        assert!(KeyValues::parse("just words").is_err());
        assert!(KeyValues::parse(" = 3").is_err());
    }

    #[test]
    fn round_trip_through_entries() {
        let mut cfg = StudyConfig::lognormal(1.5).unwrap();
        cfg.s_list = vec![1, 3, 9];
        cfg.set_s_ref(20);
        cfg.seed = 77;
        cfg.beta = 1.25;
        cfg.solver.max_iters = Some(500);
        cfg.korobov_multiplier = Some(5);
        cfg.transform = PointTransform::None;
        let text = study_entries(&cfg).render();

        let mut back = StudyConfig::lognormal(2.0).unwrap();
        for (k, v) in KeyValues::parse(&text).unwrap().iter() {
            apply_study_key(&mut back, k, v).unwrap();
        }
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_unknown_and_mismatched_keys() {
        let mut cfg = StudyConfig::affine(2.0).unwrap();
        assert!(apply_study_key(&mut cfg, "fem.lvl", "3").is_err());
        assert!(apply_study_key(&mut cfg, "field.kind", "lognormal").is_err());
        assert!(apply_study_key(&mut cfg, "study.nodes", "many").is_err());
        assert!(apply_study_key(&mut cfg, "study.timings", "maybe").is_err());
        for key in STUDY_KEYS {
            let value = study_entries(&cfg).get(key).unwrap().to_string();
            apply_study_key(&mut cfg, key, &value).unwrap();
        }
    }
}

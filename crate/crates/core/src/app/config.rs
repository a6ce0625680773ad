//! `key = value` run configuration. Blank lines and `#` comments are ignored.

use crate::assembly::AssemblyConfig;
use crate::error::{Error, Result};
use crate::estimate::EstimatorConfig;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunConfig {
    pub assembly: AssemblyConfig,
    pub estimator: EstimatorConfig,
}

pub const KEYS: [&str; 9] =
    ["bem_points", "bem_enriched", "bem_min_piece", "cg_tolerance", "cg_max_iter_factor", "m_ref", "singular_levels", "volume_order", "edge_order"];

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("invalid value '{v}' for '{key}'")))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "bem_points" => c.assembly.bem.outer_points = parse(k, v)?,
                "bem_enriched" => c.assembly.enriched = Some(parse(k, v)?),
                "bem_min_piece" => c.assembly.bem.min_piece = parse(k, v)?,
                "cg_tolerance" => c.assembly.cg.tolerance = parse(k, v)?,
                "cg_max_iter_factor" => c.assembly.cg.max_iter_factor = parse(k, v)?,
                "m_ref" => c.estimator.m_ref = parse(k, v)?,
                "singular_levels" => c.estimator.singular_levels = parse(k, v)?,
                "volume_order" => c.assembly.volume_order = Some(parse(k, v)?),
                "edge_order" => c.assembly.edge_order = Some(parse(k, v)?),
                _ => return Err(Error::Config(format!("line {}: unknown key '{k}' (known: {})", n + 1, KEYS.join(", ")))),
            }
        }
        if c.assembly.bem.outer_points == 0 || c.estimator.m_ref == 0 {
            return Err(Error::Config("bem_points and m_ref must be positive".into()));
        }
        if !(c.assembly.cg.tolerance > 0.0) {
            return Err(Error::Config("cg_tolerance must be positive".into()));
        }
        Ok(c)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

//! Experiment config files. Every key is optional; command-line flags win.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use subcircuit::cost::{Decomposition, ErrorModel};
use subcircuit::encoding::{Encoding, FermiHubbardSpec};

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SpecConfig {
    #[serde(rename = "L")]
    pub l: Option<usize>,
    pub u: Option<f64>,
    pub t_hop: Option<f64>,
    pub r: Option<f64>,
    pub fermion_count: Option<usize>,
}

/// `p = 2` or `p = "auto"`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum OrderSetting {
    Fixed(usize),
    Named(AutoOrder),
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoOrder {
    Auto,
}

impl OrderSetting {
    pub fn fixed(self) -> Option<usize> {
        match self {
            OrderSetting::Fixed(p) => Some(p),
            OrderSetting::Named(_) => None,
        }
    }
}

impl std::str::FromStr for OrderSetting {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(OrderSetting::Named(AutoOrder::Auto));
        }
        s.parse().map(OrderSetting::Fixed).map_err(|_| format!("expected an order or 'auto', got {s:?}"))
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub spec: SpecConfig,
    pub encoding: Option<Encoding>,
    pub strategy: Option<Decomposition>,
    pub error_model: Option<ErrorModel>,
    pub p: Option<OrderSetting>,
    pub eps_target: Option<f64>,
    #[serde(rename = "T")]
    pub t: Option<f64>,
    #[serde(rename = "T_sweep")]
    pub t_sweep: Option<Vec<f64>>,
    pub lambda: Option<f64>,
    pub delta: Option<Vec<f64>>,
    pub q: Option<Vec<f64>>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub output: Option<String>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Lattice flags shared by several subcommands.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct SpecArgs {
    /// Lattice side length
    #[arg(long = "L")]
    pub l: Option<usize>,
    /// On-site interaction strength
    #[arg(long)]
    pub u: Option<f64>,
    /// Hopping strength
    #[arg(long)]
    pub t_hop: Option<f64>,
    /// Largest single-pulse coefficient scale
    #[arg(long)]
    pub r: Option<f64>,
    /// Fermions per spin species
    #[arg(long)]
    pub fermion_count: Option<usize>,
}

impl SpecArgs {
    /// Flags, then file, then the `L = 3`, `n = 4` unit lattice.
    pub fn resolve(&self, file: &SpecConfig) -> Result<FermiHubbardSpec> {
        let l = self.l.or(file.l).unwrap_or(3);
        let spec = FermiHubbardSpec::new(
            l,
            self.u.or(file.u).unwrap_or(1.0),
            self.t_hop.or(file.t_hop).unwrap_or(1.0),
            self.r.or(file.r).unwrap_or(1.0),
            self.fermion_count.or(file.fermion_count).unwrap_or(l + 1),
        )?;
        Ok(spec)
    }
}

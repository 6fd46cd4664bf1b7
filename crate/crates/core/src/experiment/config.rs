use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{
    db_to_linear, dbm_to_watts, free_space_intercept, thermal_noise_watts, ContentCatalog, NetworkConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    LambdaRn,
    LambdaBs,
    SinrThresholdDb,
    Beta,
    CacheSize,
    Delta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    CpPoa,
    CpCo,
    Mpc,
    Uc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvaluationMode {
    Analytic,
    NoiseLimited,
    MonteCarlo,
}

macro_rules! names {
    ($ty:ty, $what:literal, $($variant:path => $name:literal),+ $(,)?) => {
        impl $ty {
            pub fn name(&self) -> &'static str {
                match self { $($variant => $name),+ }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.trim() {
                    $($name => Ok($variant),)+
                    other => Err(Error::validation($what, format!("unknown value `{other}`"))),
                }
            }
        }
    };
}

names!(SweepVariable, "sweep_variable",
    SweepVariable::LambdaRn => "lambda_rn",
    SweepVariable::LambdaBs => "lambda_bs",
    SweepVariable::SinrThresholdDb => "sinr_threshold_db",
    SweepVariable::Beta => "beta",
    SweepVariable::CacheSize => "cache_size",
    SweepVariable::Delta => "delta",
);
names!(PolicyKind, "policies",
    PolicyKind::CpPoa => "cp_poa",
    PolicyKind::CpCo => "cp_co",
    PolicyKind::Mpc => "mpc",
    PolicyKind::Uc => "uc",
);
names!(EvaluationMode, "modes",
    EvaluationMode::Analytic => "analytic",
    EvaluationMode::NoiseLimited => "noise_limited",
    EvaluationMode::MonteCarlo => "monte_carlo",
);

/// Full experiment description; the TOML form uses these field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub lambda_bs: f64,
    pub lambda_rn: f64,
    pub lambda_ue: f64,
    pub p_bs_dbm: f64,
    pub p_rn_dbm: f64,
    pub b_bs: f64,
    pub b_rn: f64,
    pub bandwidth_hz: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    pub theta_deg: f64,
    pub gain_main_db: f64,
    pub gain_side_db: f64,
    pub beta: f64,
    pub n_los: u32,
    pub n_nlos: u32,
    pub carrier_hz: f64,
    pub noise_figure_db: f64,
    pub area_side_m: f64,
    pub f_count: usize,
    pub delta: f64,
    pub cache_size: f64,
    pub tau_min_bps: f64,
    pub tau_max_bps: f64,
    /// Common SINR threshold overriding the per-file rate targets.
    pub sinr_threshold_db: Option<f64>,
    pub quadrature_order: usize,
    pub poa_epsilon: f64,
    pub co_tolerance: f64,
    pub sweep_variable: Option<SweepVariable>,
    pub sweep_values: Vec<f64>,
    pub policies: Vec<PolicyKind>,
    pub modes: Vec<EvaluationMode>,
    pub n_deployments: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            lambda_bs: 1e-5,
            lambda_rn: 1e-5,
            lambda_ue: 1e-4,
            p_bs_dbm: 30.0,
            p_rn_dbm: 30.0,
            b_bs: 1.0,
            b_rn: 1.0,
            bandwidth_hz: 100e6,
            alpha_los: 2.5,
            alpha_nlos: 4.0,
            theta_deg: 30.0,
            gain_main_db: 10.0,
            gain_side_db: -10.0,
            beta: 4e-4,
            n_los: 3,
            n_nlos: 2,
            carrier_hz: 28e9,
            noise_figure_db: 10.0,
            area_side_m: 800.0,
            f_count: 20,
            delta: 0.8,
            cache_size: 10.0,
            tau_min_bps: 0.04e9,
            tau_max_bps: 1e9,
            sinr_threshold_db: None,
            quadrature_order: 30,
            poa_epsilon: 0.01,
            co_tolerance: 1e-6,
            sweep_variable: None,
            sweep_values: Vec::new(),
            policies: vec![PolicyKind::CpCo, PolicyKind::Mpc, PolicyKind::Uc],
            modes: vec![EvaluationMode::Analytic],
            n_deployments: 2000,
            seed: 1,
            output: None,
        }
    }
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: ExperimentSpec =
            toml::from_str(text).map_err(|e| Error::validation("config", e.message().to_string()))?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::validation("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::validation("config", e.to_string()))
    }

    /// Network parameters in linear units.
    pub fn network(&self) -> Result<NetworkConfig> {
        let cfg = NetworkConfig {
            lambda_bs: self.lambda_bs,
            lambda_rn: self.lambda_rn,
            lambda_ue: self.lambda_ue,
            p_bs: dbm_to_watts(self.p_bs_dbm),
            p_rn: dbm_to_watts(self.p_rn_dbm),
            b_bs: self.b_bs,
            b_rn: self.b_rn,
            bandwidth: self.bandwidth_hz,
            alpha_los: self.alpha_los,
            alpha_nlos: self.alpha_nlos,
            beta: self.beta,
            theta: self.theta_deg.to_radians(),
            gain_main: db_to_linear(self.gain_main_db),
            gain_side: db_to_linear(self.gain_side_db),
            n_los: self.n_los,
            n_nlos: self.n_nlos,
            gamma_intercept: free_space_intercept(self.carrier_hz),
            noise_power: thermal_noise_watts(self.bandwidth_hz, self.noise_figure_db),
            area_side: self.area_side_m,
        };
        if !(self.carrier_hz > 0.0) {
            return Err(Error::validation("carrier_hz", "must be positive"));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn catalog(&self) -> Result<ContentCatalog> {
        if self.f_count == 0 {
            return Err(Error::validation("f_count", "must be at least 1"));
        }
        let cat = ContentCatalog::new(
            self.f_count,
            self.delta,
            self.cache_size,
            self.tau_min_bps,
            self.tau_max_bps,
            self.bandwidth_hz,
        )?;
        match self.sinr_threshold_db {
            Some(db) => cat.with_thresholds(vec![db_to_linear(db); self.f_count]),
            None => Ok(cat),
        }
    }

    /// Copy with `var` set to `value`.
    pub fn with_value(&self, var: SweepVariable, value: f64) -> Self {
        let mut s = self.clone();
        match var {
            SweepVariable::LambdaRn => s.lambda_rn = value,
            SweepVariable::LambdaBs => s.lambda_bs = value,
            SweepVariable::SinrThresholdDb => s.sinr_threshold_db = Some(value),
            SweepVariable::Beta => s.beta = value,
            SweepVariable::CacheSize => s.cache_size = value,
            SweepVariable::Delta => s.delta = value,
        }
        s
    }

    /// Checks plan-level fields and the resolved model at every sweep point.
    pub fn validate(&self) -> Result<()> {
        if self.policies.is_empty() {
            return Err(Error::validation("policies", "at least one policy is required"));
        }
        if self.modes.is_empty() {
            return Err(Error::validation("modes", "at least one mode is required"));
        }
        match (self.sweep_variable, self.sweep_values.is_empty()) {
            (Some(_), true) => return Err(Error::validation("sweep_values", "must be nonempty")),
            (None, false) => return Err(Error::validation("sweep_variable", "values given without a variable")),
            _ => {}
        }
        if self.modes.contains(&EvaluationMode::MonteCarlo) && self.n_deployments == 0 {
            return Err(Error::validation("n_deployments", "must be at least 1"));
        }
        if self.quadrature_order < 2 {
            return Err(Error::validation("quadrature_order", "must be at least 2"));
        }
        if !(self.poa_epsilon > 0.0) {
            return Err(Error::validation("poa_epsilon", "must be positive"));
        }
        if !(self.co_tolerance > 0.0) {
            return Err(Error::validation("co_tolerance", "must be positive"));
        }
        for point in self.points() {
            point.network()?;
            point.catalog()?;
        }
        Ok(())
    }

    /// Resolved specs, one per sweep value (or the base spec alone).
    pub fn points(&self) -> Vec<ExperimentSpec> {
        match self.sweep_variable {
            Some(var) => self.sweep_values.iter().map(|&v| self.with_value(var, v)).collect(),
            None => vec![self.clone()],
        }
    }

    /// Hex SHA-256 prefix of the canonical TOML form of the model parameters.
    pub fn config_hash(&self) -> String {
        let mut model = self.clone();
        model.sweep_variable = None;
        model.sweep_values.clear();
        model.policies.clear();
        model.modes.clear();
        model.output = None;
        let text = model.to_toml().unwrap_or_default();
        Sha256::digest(text.as_bytes())
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Parses a comma-separated list.
pub fn parse_list<T: FromStr<Err = Error>>(text: &str) -> Result<Vec<T>> {
    text.split(',').filter(|s| !s.trim().is_empty()).map(T::from_str).collect()
}

/// Parses `var=v1,v2,...`.
pub fn parse_sweep(text: &str) -> Result<(SweepVariable, Vec<f64>)> {
    let (var, values) = text
        .split_once('=')
        .ok_or_else(|| Error::validation("sweep", "expected <var>=<v1,v2,...>"))?;
    let var = var.parse()?;
    let values = values
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::validation("sweep_values", format!("`{v}` is not a number")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((var, values))
}

//! Flat-key TOML experiment configuration.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use spinchain_core::model::mixture_to_density;
use spinchain_core::{ClassicalConfig, ClassicalMixture, DensityMatrix, PulseProfile, SpinChainModel};

use crate::error::{ExperimentError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    PulseDynamics,
    ScalingFull,
    ScalingMid,
    ScalingReduced,
    MultiPulsePopulations,
    MultiPulseDensity,
    MultiPulseCoherence,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::PulseDynamics,
        Scenario::ScalingFull,
        Scenario::ScalingMid,
        Scenario::ScalingReduced,
        Scenario::MultiPulsePopulations,
        Scenario::MultiPulseDensity,
        Scenario::MultiPulseCoherence,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::PulseDynamics => "pulse_dynamics",
            Scenario::ScalingFull => "scaling_full",
            Scenario::ScalingMid => "scaling_mid",
            Scenario::ScalingReduced => "scaling_reduced",
            Scenario::MultiPulsePopulations => "multi_pulse_populations",
            Scenario::MultiPulseDensity => "multi_pulse_density",
            Scenario::MultiPulseCoherence => "multi_pulse_coherence",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| ExperimentError::Config(format!("unknown scenario '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PulseShape {
    #[default]
    SineSquared,
    Triangular,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MapChoice {
    #[default]
    Exponential,
    Linear,
}

fn default_alpha() -> f64 {
    3.0
}

fn default_gamma() -> f64 {
    1.0
}

fn default_area() -> f64 {
    2.0 * PI
}

/// One experiment. Durations in `t_values` are in the same time unit as
/// `1/gamma`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_sites: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_sites_list: Option<Vec<usize>>,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub v0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0_values: Option<Vec<f64>>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub pulse_shape: PulseShape,
    #[serde(default = "default_area")]
    pub pulse_area: f64,
    #[serde(default)]
    pub t_values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_pulses: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_grid: Option<Vec<f64>>,
    /// `"0010"` or a mixture such as `"00:0.25,11:0.75"`; all-down if unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
    #[serde(default)]
    pub map: MapChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| ExperimentError::Parse { path: origin.into(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io { path: path.into(), source })?;
        Self::from_toml_str(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Chain lengths to sweep.
    pub fn sites(&self) -> Vec<usize> {
        match (&self.n_sites_list, self.n_sites) {
            (Some(list), _) => list.clone(),
            (None, Some(n)) => vec![n],
            (None, None) => Vec::new(),
        }
    }

    pub fn v0_sweep(&self) -> Vec<f64> {
        self.v0_values.clone().unwrap_or_else(|| vec![self.v0])
    }

    pub fn worker_count(&self) -> usize {
        self.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }

    pub fn model(&self, n_sites: usize, v0: f64) -> Result<SpinChainModel> {
        Ok(SpinChainModel::new(n_sites, self.delta, v0, self.alpha, self.gamma)?)
    }

    pub fn pulse(&self, duration: f64) -> Result<PulseProfile> {
        Ok(match self.pulse_shape {
            PulseShape::SineSquared => PulseProfile::sine_squared(self.pulse_area, duration)?,
            PulseShape::Triangular => PulseProfile::triangular(2.0 * self.pulse_area, duration)?,
        })
    }

    pub fn initial_state(&self, n_sites: usize) -> Result<DensityMatrix> {
        let mixture = match &self.initial {
            None => ClassicalMixture::pure(ClassicalConfig::from_index(n_sites, 0)?),
            Some(text) => parse_mixture(text)?,
        };
        if mixture.n_sites() != n_sites {
            return Err(ExperimentError::Config(format!(
                "initial state has {} sites but the chain has {n_sites}",
                mixture.n_sites()
            )));
        }
        Ok(mixture_to_density(&mixture))
    }

    fn require<T>(&self, value: Option<T>, key: &str) -> Result<T> {
        value.ok_or_else(|| ExperimentError::Config(format!("scenario {} requires '{key}'", self.scenario)))
    }

    pub fn validate(&self) -> Result<()> {
        let sites = self.sites();
        if sites.is_empty() {
            return Err(ExperimentError::Config("set 'n_sites' or 'n_sites_list'".into()));
        }
        if self.n_sites.is_some() && self.n_sites_list.is_some() {
            return Err(ExperimentError::Config("'n_sites' and 'n_sites_list' are mutually exclusive".into()));
        }
        if self.t_values.is_empty() {
            return Err(ExperimentError::Config("'t_values' must not be empty".into()));
        }
        if self.t_values.iter().any(|t| *t <= 0.0 || !t.is_finite()) {
            return Err(ExperimentError::Config("'t_values' must be positive".into()));
        }
        if self.t_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ExperimentError::Config("'t_values' must be strictly increasing".into()));
        }
        if self.workers == Some(0) {
            return Err(ExperimentError::Config("'workers' must be at least 1".into()));
        }
        match self.scenario {
            Scenario::PulseDynamics => {
                let grid = self.require(self.s_grid.as_ref(), "s_grid")?;
                if grid.is_empty()
                    || grid.iter().any(|s| !(0.0..=1.0).contains(s))
                    || grid.windows(2).any(|w| w[1] <= w[0])
                {
                    return Err(ExperimentError::Config("'s_grid' must be strictly increasing within [0, 1]".into()));
                }
            }
            Scenario::ScalingFull | Scenario::ScalingMid | Scenario::ScalingReduced => {}
            Scenario::MultiPulsePopulations | Scenario::MultiPulseDensity | Scenario::MultiPulseCoherence => {
                self.require(self.n_pulses, "n_pulses")?;
            }
        }
        for &n in &sites {
            self.model(n, self.v0)?;
            self.initial_state(n)?;
        }
        for v0 in self.v0_sweep() {
            self.model(sites[0], v0)?;
        }
        self.pulse(self.t_values[0])?;
        Ok(())
    }
}

/// Parses `"0101"` or `"00:0.3,11:0.7"`.
pub fn parse_mixture(text: &str) -> Result<ClassicalMixture> {
    let bad = |e: spinchain_core::Error| ExperimentError::Config(format!("initial state '{text}': {e}"));
    let mut entries = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (bits, weight) = match part.split_once(':') {
            Some((b, w)) => {
                let w: f64 = w
                    .trim()
                    .parse()
                    .map_err(|_| ExperimentError::Config(format!("bad weight '{w}' in initial state")))?;
                (b.trim(), w)
            }
            None => (part, 1.0),
        };
        entries.push((bits.parse::<ClassicalConfig>().map_err(bad)?, weight));
    }
    if entries.is_empty() {
        return Err(ExperimentError::Config("empty initial state".into()));
    }
    ClassicalMixture::new(entries).map_err(bad)
}

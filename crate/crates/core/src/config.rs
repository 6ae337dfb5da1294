//! Run configuration for the batch checker: a strict JSON document where
//! every section and every tolerance has a default.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environment variable naming a default configuration file.
pub const CONFIG_ENV: &str = "WDVV_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid configuration: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteName {
    Prepotential,
    Lg,
    N2,
    EulerTop,
    Painleve,
    Schlesinger,
    All,
}

impl SuiteName {
    pub const CONCRETE: [SuiteName; 6] = [
        SuiteName::Prepotential,
        SuiteName::Lg,
        SuiteName::N2,
        SuiteName::EulerTop,
        SuiteName::Painleve,
        SuiteName::Schlesinger,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::Prepotential => "prepotential",
            SuiteName::Lg => "lg",
            SuiteName::N2 => "n2",
            SuiteName::EulerTop => "euler-top",
            SuiteName::Painleve => "painleve",
            SuiteName::Schlesinger => "schlesinger",
            SuiteName::All => "all",
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SuiteName {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SuiteName::CONCRETE
            .into_iter()
            .chain([SuiteName::All])
            .find(|n| n.as_str() == s)
            .ok_or_else(|| ConfigError::Invalid(format!("unknown suite `{s}`")))
    }
}

/// Axis-aligned sampling box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxConfig {
    fn new(lo: &[f64], hi: &[f64]) -> Self {
        BoxConfig {
            lo: lo.to_vec(),
            hi: hi.to_vec(),
        }
    }

    fn validate(&self, what: &str, dim: usize) -> Result<(), ConfigError> {
        if self.lo.len() != dim || self.hi.len() != dim {
            return Err(ConfigError::Invalid(format!("{what}: box must have {dim} coordinates")));
        }
        if self.lo.iter().zip(&self.hi).any(|(a, b)| !a.is_finite() || !b.is_finite() || a >= b) {
            return Err(ConfigError::Invalid(format!("{what}: box needs lo < hi in every coordinate")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrepotentialConfig {
    pub sample_box: BoxConfig,
    pub samples: usize,
}

impl Default for PrepotentialConfig {
    fn default() -> Self {
        PrepotentialConfig {
            sample_box: BoxConfig::new(&[0.5; 3], &[2.0; 3]),
            samples: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LgConfig {
    /// Point for the listed-values comparison.
    pub reference_point: Vec<f64>,
    /// Box for chart-based checks; keeps `q = x₂/x₃³` away from `4/27`.
    pub sample_box: BoxConfig,
    pub chart_points: usize,
    pub metric_points: usize,
    /// Relative finite-difference step in canonical coordinates.
    pub fd_step: f64,
}

impl Default for LgConfig {
    fn default() -> Self {
        LgConfig {
            reference_point: vec![1.0, 2.0, 3.0],
            sample_box: BoxConfig::new(&[0.5, 1.0, 0.5], &[2.0, 2.0, 1.0]),
            chart_points: 5,
            metric_points: 10,
            fd_step: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct N2SuiteConfig {
    pub r_values: Vec<f64>,
    /// Positive sample `(x¹, |x²|)`; the sign of `x²` follows `R`.
    pub point: [f64; 2],
    /// Canonical coordinates for the tau identity.
    pub u: [f64; 2],
}

impl Default for N2SuiteConfig {
    fn default() -> Self {
        N2SuiteConfig {
            r_values: vec![0.0, 0.3, 1.0, -0.7, 0.5, -0.5, -1.5],
            point: [1.1, 1.3],
            u: [2.0, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EulerTopConfig {
    pub s_start: f64,
    pub s_end: f64,
    /// Starting guess for the branch parameter at `s_start`.
    pub omega_guess: f64,
    pub rtol: f64,
    /// Imaginary parts of `ω` for the Lamé-chain samples.
    pub lame_samples: Vec<f64>,
}

impl Default for EulerTopConfig {
    fn default() -> Self {
        EulerTopConfig {
            s_start: 2.0,
            s_end: 5.0,
            omega_guess: -15.0,
            rtol: 1e-10,
            lame_samples: vec![0.3, 0.8, 1.2, 2.5, 4.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PainleveConfig {
    /// Range of `Im ω` swept along the imaginary axis.
    pub omega_im_min: f64,
    pub omega_im_max: f64,
    pub samples: usize,
    /// Radius excluded around the poles of the branch on the sweep.
    pub pole_margin: f64,
    /// `x₃` used for the tau-function comparisons.
    pub x3: f64,
    /// Box in `(x₂, x₃)` for the tau jet identities.
    pub tau_box: BoxConfig,
}

impl Default for PainleveConfig {
    fn default() -> Self {
        PainleveConfig {
            omega_im_min: 0.2,
            omega_im_max: 5.0,
            samples: 20,
            pole_margin: 0.05,
            x3: 0.8,
            tau_box: BoxConfig::new(&[1.0, 0.5], &[2.0, 1.0]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchlesingerConfig {
    pub r: f64,
    pub alpha: f64,
    pub alpha_alt: f64,
    pub u: [f64; 2],
    pub fd_step: f64,
    pub n3_point: [f64; 3],
    /// Offsets in flat coordinates for the constancy check.
    pub n3_offsets: Vec<[f64; 3]>,
}

impl Default for SchlesingerConfig {
    fn default() -> Self {
        SchlesingerConfig {
            r: 1.0,
            alpha: 0.0,
            alpha_alt: 0.7,
            u: [2.0, 1.0],
            fd_step: 1e-3,
            n3_point: [0.4, 1.3, 0.8],
            n3_offsets: vec![
                [0.0, 0.0, 0.0],
                [0.05, 0.0, 0.0],
                [0.0, 0.04, 0.0],
                [0.0, 0.0, 0.03],
                [0.02, -0.03, 0.02],
            ],
        }
    }
}

/// Every pass/fail threshold used by the suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub wdvv: f64,
    pub symmetry: f64,
    pub residue_tensor: f64,
    pub metric: f64,
    pub darboux_egoroff: f64,
    pub chart_fd: f64,
    pub idempotent: f64,
    pub n2_third_derivatives: f64,
    pub n2_wdvv: f64,
    pub n2_tau: f64,
    pub casimir_drift: f64,
    pub branch: f64,
    pub casimir_value: f64,
    pub painleve: f64,
    pub relations: f64,
    pub lame: f64,
    pub tau_jet: f64,
    pub tau_chart: f64,
    pub ltresom: f64,
    pub schlesinger: f64,
    pub s_infinity: f64,
    pub iso_tau_n2: f64,
    pub iso_tau_n3: f64,
    pub alpha_independence: f64,
    pub path_independence: f64,
    pub lame_fd: f64,
    pub frame_tensor: f64,
    pub vector_field: f64,
    pub euler_field: f64,
    pub tau_identity: f64,
    pub xi_recursion: f64,
    pub fd_slope: f64,
    pub schlesinger_n3: f64,
    /// Lowest acceptable observed convergence order of the extrapolated
    /// finite differences.
    pub convergence_order: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            wdvv: 1e-10,
            symmetry: 1e-12,
            residue_tensor: 1e-10,
            metric: 1e-9,
            darboux_egoroff: 1e-5,
            chart_fd: 1e-5,
            idempotent: 1e-9,
            n2_third_derivatives: 1e-9,
            n2_wdvv: 1e-9,
            n2_tau: 1e-10,
            casimir_drift: 1e-9,
            branch: 1e-6,
            casimir_value: 1e-12,
            painleve: 1e-8,
            relations: 1e-8,
            lame: 1e-8,
            tau_jet: 1e-10,
            tau_chart: 1e-5,
            ltresom: 1e-8,
            schlesinger: 1e-7,
            s_infinity: 1e-5,
            iso_tau_n2: 1e-10,
            iso_tau_n3: 1e-5,
            alpha_independence: 1e-10,
            path_independence: 1e-6,
            lame_fd: 1e-6,
            frame_tensor: 1e-8,
            vector_field: 1e-6,
            euler_field: 1e-5,
            tau_identity: 1e-6,
            xi_recursion: 1e-10,
            fd_slope: 1e-6,
            schlesinger_n3: 1e-5,
            convergence_order: 3.0,
        }
    }
}

impl Tolerances {
    fn validate(&self) -> Result<(), ConfigError> {
        let v = serde_json::to_value(self)?;
        for (k, x) in v.as_object().expect("struct serializes to an object") {
            let x = x.as_f64().unwrap_or(f64::NAN);
            if !(x > 0.0 && x.is_finite()) {
                return Err(ConfigError::Invalid(format!("tolerance `{k}` must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub suites: Vec<SuiteName>,
    pub seed: u64,
    /// Run suites on separate threads. The report order is unchanged.
    pub parallel: bool,
    pub prepotential: PrepotentialConfig,
    pub lg: LgConfig,
    pub n2: N2SuiteConfig,
    pub euler_top: EulerTopConfig,
    pub painleve: PainleveConfig,
    pub schlesinger: SchlesingerConfig,
    pub tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            suites: vec![SuiteName::All],
            seed: 20_011_203,
            parallel: false,
            prepotential: PrepotentialConfig::default(),
            lg: LgConfig::default(),
            n2: N2SuiteConfig::default(),
            euler_top: EulerTopConfig::default(),
            painleve: PainleveConfig::default(),
            schlesinger: SchlesingerConfig::default(),
            tolerances: Tolerances::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Replace the suite list, as the command line does.
    pub fn with_suites(mut self, suites: Vec<SuiteName>) -> Result<Self, ConfigError> {
        self.suites = suites;
        self.validate()?;
        Ok(self)
    }

    /// The concrete suites to run, in canonical order without repeats.
    pub fn selected(&self) -> Vec<SuiteName> {
        if self.suites.contains(&SuiteName::All) {
            return SuiteName::CONCRETE.to_vec();
        }
        SuiteName::CONCRETE.into_iter().filter(|s| self.suites.contains(s)).collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.suites.is_empty() {
            return Err(ConfigError::Invalid("at least one suite is required".into()));
        }
        self.tolerances.validate()?;
        self.prepotential.sample_box.validate("prepotential.sample_box", 3)?;
        self.lg.sample_box.validate("lg.sample_box", 3)?;
        self.painleve.tau_box.validate("painleve.tau_box", 2)?;
        if self.prepotential.samples == 0 || self.lg.chart_points == 0 || self.painleve.samples == 0 {
            return Err(ConfigError::Invalid("sample counts must be positive".into()));
        }
        if self.lg.metric_points < 2 {
            return Err(ConfigError::Invalid("lg.metric_points must be at least 2".into()));
        }
        if self.lg.reference_point.len() != 3 {
            return Err(ConfigError::Invalid("lg.reference_point must have 3 coordinates".into()));
        }
        if self.n2.r_values.is_empty() {
            return Err(ConfigError::Invalid("n2.r_values must not be empty".into()));
        }
        if !(self.painleve.omega_im_min > 0.0 && self.painleve.omega_im_min < self.painleve.omega_im_max) {
            return Err(ConfigError::Invalid("painleve: need 0 < omega_im_min < omega_im_max".into()));
        }
        for (name, v) in [
            ("lg.fd_step", self.lg.fd_step),
            ("euler_top.rtol", self.euler_top.rtol),
            ("schlesinger.fd_step", self.schlesinger.fd_step),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::Invalid(format!("{name} must be positive")));
            }
        }
        if self.schlesinger.n3_offsets.len() < 2 {
            return Err(ConfigError::Invalid("schlesinger.n3_offsets needs at least 2 entries".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
        assert_eq!(RunConfig::default().selected().len(), 6);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_json(r#"{"suites": ["n2"], "tolerances": {"wdv": 1e-3}}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("wdv") && msg.contains("line 1"), "{msg}");
    }

    #[test]
    fn empty_suites_rejected() {
        assert!(RunConfig::from_json(r#"{"suites": []}"#).is_err());
        assert!(RunConfig::from_json(r#"{"suites": ["n2"], "tolerances": {"wdvv": -1}}"#).is_err());
    }

    #[test]
    fn partial_config_keeps_defaults() {
        let cfg = RunConfig::from_json(r#"{"suites": ["n2", "lg", "n2"], "n2": {"r_values": [0.3]}}"#).unwrap();
        assert_eq!(cfg.selected(), vec![SuiteName::Lg, SuiteName::N2]);
        assert_eq!(cfg.n2.r_values, vec![0.3]);
        assert_eq!(cfg.n2.u, [2.0, 1.0]);
        assert_eq!("euler-top".parse::<SuiteName>().unwrap(), SuiteName::EulerTop);
    }
}

//! Run configuration: TOML sections with every field optional. Missing values
//! fall back to the Table 1 parameter set; command-line flags win over both.

use std::path::Path;

use adoheston::fit::PowerLawFit;
use adoheston::{Error, ModelParams, QuadratureConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub quadrature: QuadSection,
    #[serde(default)]
    pub forward: ForwardSection,
    #[serde(default)]
    pub drift: DriftSection,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub pricing: PricingSection,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub hurst: Option<Vec<f64>>,
    pub kappa: Option<f64>,
    pub xi: Option<f64>,
    pub rho: Option<f64>,
    pub zeta: Option<f64>,
    pub implied_vol: Option<f64>,
    pub eps: Option<f64>,
    pub v0: Option<f64>,
    pub vv0: Option<f64>,
    pub f0: Option<f64>,
    pub r: Option<f64>,
    pub delta: Option<f64>,
    pub skew_variance: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadSection {
    pub u_max: Option<f64>,
    pub rel_tol: Option<f64>,
    pub max_subdivisions: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForwardSection {
    pub s: Option<f64>,
    pub tbar_min: Option<f64>,
    pub tbar_max: Option<f64>,
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftSection {
    pub alpha: Option<f64>,
    pub t0: Option<f64>,
    pub t_end: Option<f64>,
    pub n_steps: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub n_paths: Option<usize>,
    pub n_steps: Option<usize>,
    pub maturity: Option<f64>,
    pub eps: Option<f64>,
    /// Switches ζ to the linear mode ζ(h) = α·h.
    pub alpha: Option<f64>,
    pub record_stride: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PricingModel {
    #[default]
    Bs,
    Ado,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PricingSection {
    pub model: Option<PricingModel>,
    pub s: Option<f64>,
    pub maturity: Option<f64>,
    pub strikes: Option<Vec<f64>>,
    pub k_min: Option<f64>,
    pub k_max: Option<f64>,
    pub n_strikes: Option<usize>,
    pub fft_n: Option<usize>,
    pub eta: Option<f64>,
    pub alpha: Option<f64>,
    pub n_paths: Option<usize>,
    pub n_steps: Option<usize>,
}

pub const TABLE2_HURST: [f64; 6] = [0.1, 0.2, 0.3, 0.4, 0.47, 0.5];

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Input(format!("invalid config {}: {e}", path.display())))
    }

    pub fn hurst_values(&self) -> Vec<f64> {
        self.model.hurst.clone().unwrap_or_else(|| TABLE2_HURST.to_vec())
    }

    /// Model parameters at one Hurst exponent.
    pub fn model_params(&self, h: f64) -> Result<ModelParams, Error> {
        let m = &self.model;
        let iv = m.implied_vol.unwrap_or(0.5);
        let mut mp = ModelParams::new(
            h,
            m.kappa.unwrap_or(1.0),
            m.xi.unwrap_or(0.01),
            m.rho.unwrap_or(0.7),
            m.zeta.unwrap_or(100.0),
            iv,
        )?;
        mp.eps = m.eps.unwrap_or(0.0);
        mp.v0 = m.v0.unwrap_or(iv * iv);
        mp.vv0 = m.vv0.unwrap_or(0.0);
        mp.f0 = m.f0.unwrap_or(1.0);
        mp.r = m.r.unwrap_or(0.0);
        mp.delta = m.delta.unwrap_or(0.0);
        mp.skew_variance = m.skew_variance;
        mp.validate()?;
        Ok(mp)
    }

    pub fn quadrature(&self) -> Result<QuadratureConfig, Error> {
        let d = QuadratureConfig::default();
        let q = QuadratureConfig {
            u_max: self.quadrature.u_max.or(d.u_max),
            rel_tol: self.quadrature.rel_tol.unwrap_or(d.rel_tol),
            max_subdivisions: self.quadrature.max_subdivisions.unwrap_or(d.max_subdivisions),
        };
        q.validate()?;
        Ok(q)
    }
}

/// JSON layout of the `fit` command.
#[derive(Debug, Serialize)]
pub struct FitReport {
    #[serde(rename = "per_H")]
    pub per_h: Vec<FitRow>,
    pub pooled_b: f64,
    #[serde(rename = "aH_fit")]
    pub ah_fit: ExpRow,
}

#[derive(Debug, Serialize)]
pub struct FitRow {
    #[serde(rename = "H")]
    pub h: f64,
    pub a: f64,
    pub b_scaled: Option<f64>,
    pub rss: f64,
}

impl From<&PowerLawFit> for FitRow {
    fn from(f: &PowerLawFit) -> Self {
        Self {
            h: f.h,
            a: f.a,
            b_scaled: f.b_scaled,
            rss: f.rss,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ExpRow {
    pub c0: f64,
    pub c1: f64,
}

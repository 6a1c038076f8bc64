//! JSON run configuration, schema version 1.
//!
//! All quantities are dimensionless with `ν = 1` unless a `physical` block
//! is present. In that case `g` lists per-site multiples of the bridged
//! coupling `η/2` and `gamma`, when omitted, becomes `1/Q`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use vetra::chain::{ChainConfig, ChainParams};
use vetra::density::InitialState;
use vetra::experiments::{unit_bridge, BetaGrid, DisorderSpec, DisorderTarget, PhysicalParams};
use vetra::ode::Tolerances;
use vetra::reduced::IntegrationOptions;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("schema error in `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error(transparent)]
    Model(#[from] vetra::Error),
}

fn schema(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Schema {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub chain: ChainSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physical: Option<PhysicalSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integration: Option<IntegrationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disorder: Option<DisorderSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full_model: Option<FullModelSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coherence: Option<CoherenceSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_sites: Option<usize>,
    pub omega: Vec<f64>,
    pub g: Vec<f64>,
    pub lambda: f64,
    pub kappa: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub nbar: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalSection {
    pub eta: f64,
    pub mass: f64,
    pub length: f64,
    pub width: f64,
    pub depth: f64,
    pub nu: f64,
    pub quality: f64,
    pub site_energy_ev: f64,
    pub lambda_over_omega: f64,
}

impl From<PhysicalSection> for PhysicalParams {
    fn from(p: PhysicalSection) -> Self {
        PhysicalParams {
            eta: p.eta,
            mass: p.mass,
            length: p.length,
            width: p.width,
            depth: p.depth,
            nu: p.nu,
            quality: p.quality,
            site_energy_ev: p.site_energy_ev,
            lambda_over_omega: p.lambda_over_omega,
        }
    }
}

impl From<PhysicalParams> for PhysicalSection {
    fn from(p: PhysicalParams) -> Self {
        PhysicalSection {
            eta: p.eta,
            mass: p.mass,
            length: p.length,
            width: p.width,
            depth: p.depth,
            nu: p.nu,
            quality: p.quality,
            site_energy_ev: p.site_energy_ev,
            lambda_over_omega: p.lambda_over_omega,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialSection {
    /// Excitation on one site (1-based).
    Site(usize),
    DonorSuperposition,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSection {
    Frequencies,
    Couplings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderSection {
    pub target: TargetSection,
    /// Defaults to the chain's own `omega` or `g`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub means: Option<Vec<f64>>,
    pub std: f64,
    pub n_realizations: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FullModelSection {
    pub n_fock: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoherenceSection {
    /// Couplings of the comparison run; all zero when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_g: Option<Vec<f64>>,
}

/// A parsed and validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub file: ConfigFile,
    pub chain: ChainConfig<f64>,
    pub init: InitialState<f64>,
    pub integration: IntegrationOptions<f64>,
    pub grid: Option<BetaGrid<f64>>,
    pub disorder: Option<DisorderSpec<f64>>,
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let file: ConfigFile = serde_json::from_str(text)?;
    file.resolve()
}

impl ConfigFile {
    pub fn resolve(self) -> Result<RunConfig, ConfigError> {
        if self.schema != SCHEMA_VERSION {
            return Err(schema(
                "schema",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema),
            ));
        }
        let chain = self.build_chain()?;
        let n = chain.n_sites();
        let init = match self.initial.unwrap_or(InitialSection::Site(1)) {
            InitialSection::Site(j) => InitialState::SingleExcitation(j),
            InitialSection::DonorSuperposition => InitialState::DonorSuperposition,
        };
        init.density(n)?;

        let mut integration = IntegrationOptions::default();
        if let Some(s) = self.integration {
            if let Some(h) = s.horizon {
                integration.horizon = h;
            }
            if let Some(k) = s.samples {
                integration.samples = k;
            }
            let rel = s.rel_tol.unwrap_or(integration.tol.rel);
            let abs = s.abs_tol.unwrap_or(integration.tol.abs);
            integration.tol = Tolerances::new(rel, abs)?;
        }
        integration.validate()?;

        let grid = match self.sweep {
            Some(g) => Some(BetaGrid::new(g.min, g.max, g.steps)?),
            None => None,
        };

        let disorder = match &self.disorder {
            Some(d) => {
                let target = match d.target {
                    TargetSection::Frequencies => DisorderTarget::Frequencies,
                    TargetSection::Couplings => DisorderTarget::Couplings,
                };
                let means = d.means.clone().unwrap_or_else(|| match target {
                    DisorderTarget::Frequencies => chain.omega().to_vec(),
                    DisorderTarget::Couplings => chain.g().to_vec(),
                });
                let spec = DisorderSpec {
                    target,
                    means,
                    std: d.std,
                    n_realizations: d.n_realizations,
                    master_seed: d.master_seed,
                };
                spec.validate(n)?;
                Some(spec)
            }
            None => None,
        };

        if let Some(c) = &self.coherence {
            if let Some(g) = &c.reference_g {
                if g.len() != n {
                    return Err(schema(
                        "coherence.reference_g",
                        format!("expected {n} entries, found {}", g.len()),
                    ));
                }
            }
        }

        Ok(RunConfig {
            file: self,
            chain,
            init,
            integration,
            grid,
            disorder,
        })
    }

    fn build_chain(&self) -> Result<ChainConfig<f64>, ConfigError> {
        let c = &self.chain;
        if let Some(n) = c.n_sites {
            if c.omega.len() != n {
                return Err(schema("omega", format!("expected {n} entries, found {}", c.omega.len())));
            }
            if c.g.len() != n {
                return Err(schema("g", format!("expected {n} entries, found {}", c.g.len())));
            }
        } else if c.g.len() != c.omega.len() {
            return Err(schema(
                "g",
                format!("expected {} entries to match omega, found {}", c.omega.len(), c.g.len()),
            ));
        }

        let (g, gamma) = match self.physical {
            Some(p) => {
                let bridge = unit_bridge(&p.into())?;
                let g = c.g.iter().map(|m| m * bridge.g_model).collect();
                (g, c.gamma.unwrap_or(bridge.gamma_model))
            }
            None => {
                let gamma = c.gamma.ok_or_else(|| schema("gamma", "required without a physical block"))?;
                (c.g.clone(), gamma)
            }
        };

        let mut p = ChainParams::new(c.omega.clone(), g, c.lambda, c.kappa, gamma, c.nbar);
        if let Some(nu) = c.nu {
            p.nu = nu;
        }
        if let Some(q0) = c.q0 {
            p.q0 = q0;
        }
        if let Some(b) = c.beta0 {
            p.beta0 = b;
        }
        Ok(p.validate()?)
    }
}

impl RunConfig {
    /// Configuration of the comparison run in the coherence experiment.
    pub fn coherence_reference(&self) -> Result<ChainConfig<f64>, ConfigError> {
        let g = self
            .file
            .coherence
            .as_ref()
            .and_then(|c| c.reference_g.clone())
            .unwrap_or_else(|| vec![0.0; self.chain.n_sites()]);
        Ok(self.chain.with_g(g)?)
    }

    /// Truncation of the resonator space for the full model.
    pub fn n_fock(&self) -> usize {
        self.file
            .full_model
            .map(|f| f.n_fock)
            .unwrap_or_else(|| vetra::full::min_fock_for(self.chain.nbar()).max(20))
    }

    /// The file with run-time overrides folded back in, for the manifest.
    pub fn effective_file(&self) -> ConfigFile {
        let mut f = self.file.clone();
        f.integration = Some(IntegrationSection {
            horizon: Some(self.integration.horizon),
            samples: Some(self.integration.samples),
            rel_tol: Some(self.integration.tol.rel),
            abs_tol: Some(self.integration.tol.abs),
        });
        if let Some(g) = self.grid {
            f.sweep = Some(GridSection {
                min: g.min,
                max: g.max,
                steps: g.steps,
            });
        }
        if let (Some(d), Some(spec)) = (f.disorder.as_mut(), &self.disorder) {
            d.n_realizations = spec.n_realizations;
            d.master_seed = spec.master_seed;
            d.std = spec.std;
            d.means = Some(spec.means.clone());
        }
        f
    }
}

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use ruelle_core::decay::RegimeKind;
use ruelle_core::orbits::{DeltaSchedule, GWeight};
use ruelle_core::sft::validate_subshift;
use ruelle_core::{Potential, Roof, SubshiftSpec, SymbolicMetric};

use crate::error::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    /// Output directory, relative to the working directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    pub subshift: SubshiftBlock,
    #[serde(default)]
    pub potentials: PotentialsBlock,
    #[serde(default)]
    pub params: Params,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubshiftBlock {
    pub k: usize,
    /// Row-major 0/1 transition matrix.
    pub a: Vec<Vec<i64>>,
}

/// One potential. Words are written with 1-based symbols, e.g. `"12"`,
/// or dot-separated (`"1.10"`) when `k > 9`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Constant(f64),
    Symbolwise(Vec<f64>),
    Indicator(String),
    Table { depth: usize, values: BTreeMap<String, f64> },
}

impl PotentialSpec {
    fn build(&self, spec: &SubshiftSpec) -> ruelle_core::Result<Potential> {
        match self {
            PotentialSpec::Constant(c) => Ok(Potential::constant(spec, *c)),
            PotentialSpec::Symbolwise(v) => Potential::symbolwise(spec, v),
            PotentialSpec::Indicator(w) => {
                let word = ruelle_core::Word::parse(spec, w)?;
                Ok(Potential::indicator(spec, word.symbols()))
            }
            PotentialSpec::Table { depth, values } => {
                let pairs: Vec<(String, f64)> = values.iter().map(|(k, v)| (k.clone(), *v)).collect();
                Potential::from_pairs(spec, *depth, &pairs)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialsBlock {
    #[serde(default = "zero_spec")]
    pub f: PotentialSpec,
    #[serde(default = "one_spec")]
    pub tau: PotentialSpec,
    #[serde(default = "zero_spec")]
    pub g: PotentialSpec,
    /// Expansion potential; the normalization of `f − P_f τ` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_u: Option<PotentialSpec>,
}

fn zero_spec() -> PotentialSpec {
    PotentialSpec::Constant(0.0)
}

fn one_spec() -> PotentialSpec {
    PotentialSpec::Constant(1.0)
}

impl Default for PotentialsBlock {
    fn default() -> Self {
        PotentialsBlock { f: zero_spec(), tau: one_spec(), g: zero_spec(), f_u: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub depth: usize,
    pub theta: f64,
    pub n_max: usize,
    /// `[re, im]`.
    pub s: [f64; 2],
    pub z: [f64; 2],
    /// Grids; `s = P_f + a + ib`, `z = c + iw`.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub w: Vec<f64>,
    pub zeta: ZetaParams,
    pub residue: ResidueParams,
    pub bound: BoundParams,
    pub orbits: OrbitParams,
    pub decay: DecayParams,
    pub ly: LyParams,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            depth: 1,
            theta: 0.5,
            n_max: 12,
            s: [0.0, 0.0],
            z: [0.0, 0.0],
            a: vec![0.0],
            b: vec![0.0],
            c: vec![0.0],
            w: vec![0.0],
            zeta: ZetaParams::default(),
            residue: ResidueParams::default(),
            bound: BoundParams::default(),
            orbits: OrbitParams::default(),
            decay: DecayParams::default(),
            ly: LyParams::default(),
        }
    }
}

impl Params {
    pub fn s(&self) -> Complex64 {
        Complex64::new(self.s[0], self.s[1])
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.z[0], self.z[1])
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZetaParams {
    pub n_terms: usize,
    /// Step of the downward pole scan; no scan when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pole_step: Option<f64>,
    pub pole_start: f64,
    /// Cauchy circle for `η_g`.
    pub delta: f64,
    pub nodes: usize,
    /// Series length for `η_g`; the determinant when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series_terms: Option<usize>,
}

impl Default for ZetaParams {
    fn default() -> Self {
        ZetaParams { n_terms: 40, pole_step: None, pole_start: 2.0, delta: 0.05, nodes: 128, series_terms: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResidueParams {
    pub radius: f64,
    pub s_nodes: usize,
    pub delta: f64,
    pub xi_nodes: usize,
}

impl Default for ResidueParams {
    fn default() -> Self {
        ResidueParams { radius: 0.25, s_nodes: 64, delta: 0.05, xi_nodes: 128 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundParams {
    pub eps: f64,
    pub nu: f64,
    pub depth: usize,
    pub bank_size: usize,
}

impl Default for BoundParams {
    fn default() -> Self {
        BoundParams { eps: 0.05, nu: 1.0, depth: 4, bank_size: 16 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrbitParams {
    pub horizon: f64,
    /// Evaluation times for `pi-f` and `hannay-ozorio`.
    pub t: Vec<f64>,
    pub window: DeltaSchedule,
    pub weight: GWeight,
    pub budget: u64,
}

impl Default for OrbitParams {
    fn default() -> Self {
        OrbitParams {
            horizon: 20.0,
            t: vec![10.0, 15.0, 20.0],
            window: DeltaSchedule::InverseSqrt { c: 4.0 },
            weight: GWeight::Birkhoff,
            budget: 1 << 28,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayParams {
    pub regime: RegimeKind,
    pub big_b: f64,
    pub nu: f64,
    pub threshold: f64,
    pub m_max: usize,
    pub bank_size: usize,
    /// Ratio target for the w-leading regime.
    pub mu_hat: f64,
}

impl Default for DecayParams {
    fn default() -> Self {
        DecayParams { regime: RegimeKind::BLeading, big_b: 1.0, nu: 1.0, threshold: 1.0, m_max: 40, bank_size: 12, mu_hat: 0.5 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LyParams {
    pub t: f64,
    pub m_max: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_hat: Option<f64>,
    pub amplitude: f64,
    pub h_depth: usize,
}

impl Default for LyParams {
    fn default() -> Self {
        LyParams { t: 1.0, m_max: 6, gamma_hat: None, amplitude: 0.5, h_depth: 4 }
    }
}

/// Parses TOML, reporting the dotted path of the first offending field.
pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    let de = toml::Deserializer::new(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        CliError::Config { path, message: inner.message().trim().to_string() }
    })
}

/// Everything a subcommand needs, validated.
pub struct Model {
    pub f: Potential,
    pub tau: Roof,
    pub g: Potential,
    pub f_u: Option<Potential>,
    pub metric: SymbolicMetric,
}

impl RunConfig {
    pub fn model(&self) -> Result<Model, CliError> {
        let spec = validate_subshift(self.subshift.k, &self.subshift.a)?;
        let p = &self.potentials;
        let f = p.f.build(&spec)?;
        let tau = Roof::new(p.tau.build(&spec)?)?;
        let g = p.g.build(&spec)?;
        let f_u = p.f_u.as_ref().map(|s| s.build(&spec)).transpose()?;
        let metric = SymbolicMetric::new(self.params.theta)?;
        Ok(Model { f, tau, g, f_u, metric })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

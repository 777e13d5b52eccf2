//! Run configuration: one JSON document with sections `model`, `field`,
//! `space`, `time`, `qmc`, `estimator` and `output`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::fem::{InitialData, Source};
use crate::field::{BasisFunction, ExampleScaling, MeanField, RandomField};
use crate::tfrac::SolverOptions;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub field: FieldSpec,
    pub space: SpaceConfig,
    pub time: TimeConfig,
    pub qmc: QmcConfig,
    pub estimator: EstimatorConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelConfig::default(),
            field: FieldSpec::PaperExample { q: 22, scaling: ExampleScaling::Normalized },
            space: SpaceConfig::default(),
            time: TimeConfig::default(),
            qmc: QmcConfig::default(),
            estimator: EstimatorConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialSpec {
    /// 144 x₁²(1−x₁) x₂²(1−x₂)
    #[default]
    Bump,
    Zero,
}

/// L(v) = ∫_Ω v is the only functional exposed to configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionalSpec {
    #[default]
    Mean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub alpha: f64,
    pub t_final: f64,
    /// Constant source f.
    pub source: f64,
    pub initial: InitialSpec,
    pub functional: FunctionalSpec,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { alpha: 0.5, t_final: 1.0, source: 1.0, initial: InitialSpec::Bump, functional: FunctionalSpec::Mean }
    }
}

impl ModelConfig {
    pub fn source_term(&self) -> Source {
        if self.source == 0.0 {
            Source::Zero
        } else {
            Source::Constant(self.source)
        }
    }

    pub fn initial_data(&self) -> InitialData {
        match self.initial {
            InitialSpec::Bump => InitialData::Bump,
            InitialSpec::Zero => InitialData::Zero,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSpec {
    PaperExample {
        q: usize,
        #[serde(default)]
        scaling: ExampleScaling,
    },
    /// κ₀ = c₀ + c₁x₁ + c₂x₂ + c₃x₁x₂, ψ_j = amp_j sin(k_j π x₁) sin(l_j π x₂).
    SineTable {
        kappa0: [f64; 4],
        coeffs: Vec<(u32, u32, f64)>,
        #[serde(default = "default_p")]
        p: f64,
    },
}

fn default_p() -> f64 {
    0.55
}

impl FieldSpec {
    pub fn build(&self) -> Result<RandomField> {
        match self {
            FieldSpec::PaperExample { q, scaling } => RandomField::example(*q, *scaling),
            FieldSpec::SineTable { kappa0, coeffs, p } => {
                let basis: Vec<BasisFunction> = coeffs.iter().map(|&(k, l, amplitude)| BasisFunction::SineProduct { k, l, amplitude }).collect();
                if coeffs.iter().any(|c| c.0 == 0 || c.1 == 0) {
                    return Err(Error::Config("sine-table frequencies must be positive".into()));
                }
                let norms = coeffs.iter().map(|c| c.2.abs()).collect();
                RandomField::with_sup_norms(MeanField::Bilinear(*kappa0), basis, norms, *p)
            }
        }
    }

    /// Number of modes without building the field.
    pub fn len(&self) -> usize {
        match self {
            FieldSpec::PaperExample { q, .. } => q * (q + 1) / 2,
            FieldSpec::SineTable { coeffs, .. } => coeffs.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpaceConfig {
    pub n_div: usize,
    /// Imported mesh; overrides `n_div`.
    pub mesh: Option<PathBuf>,
}

impl Default for SpaceConfig {
    fn default() -> Self {
        Self { n_div: 53, mesh: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub steps: usize,
    /// Defaults to 2/α.
    pub gamma: Option<f64>,
    pub solver: SolverOptions,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self { steps: 150, gamma: None, solver: SolverOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QmcConfig {
    pub b: u32,
    pub m: usize,
    pub beta: usize,
    /// Truncation dimension; defaults to all modes.
    pub z: Option<usize>,
    /// Generating-vector file; CBC construction when absent.
    pub genvec: Option<PathBuf>,
}

impl Default for QmcConfig {
    fn default() -> Self {
        Self { b: 2, m: 9, beta: 3, z: None, genvec: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorConfig {
    /// Worker threads; `None` lets the front end decide.
    pub threads: Option<usize>,
    /// QMC sizes for the convergence table.
    pub n_list: Vec<usize>,
    pub n_ref: usize,
    pub z_list: Vec<usize>,
    /// Levels compared in the space-time refinement study.
    pub refine_levels: usize,
    /// Keep full solution vectors (only meaningful for `solve`).
    pub dump_fields: bool,
    /// Seed of the randomized bounds self-check.
    pub seed: u64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            threads: None,
            n_list: vec![16, 32, 64, 128],
            n_ref: 512,
            z_list: vec![1, 3, 6, 10, 15, 21, 28, 36, 45],
            refine_levels: 3,
            dump_fields: false,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub gnuplot: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), gnuplot: true }
    }
}

impl RunConfig {
    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| parse_error(origin, &e))?;
        Self::from_value(value, origin)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path)
    }

    fn from_value(value: Value, origin: &Path) -> Result<Self> {
        let c: Self = serde_json::from_value(value).map_err(|e| Error::Parse { path: origin.to_path_buf(), line: 0, message: e.to_string() })?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    /// Applies `section.key=value` (nested with further dots). Values are
    /// read as JSON, falling back to a plain string.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self> {
        let mut v = serde_json::to_value(self).expect("config serializes");
        for o in overrides {
            let o = o.as_ref();
            let (key, raw) = o.split_once('=').ok_or_else(|| Error::Config(format!("override `{o}` is not of the form key=value")))?;
            let parsed = serde_json::from_str::<Value>(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
            let mut slot = &mut v;
            let parts: Vec<&str> = key.split('.').collect();
            for (i, p) in parts.iter().enumerate() {
                let obj = slot.as_object_mut().ok_or_else(|| Error::Config(format!("override `{key}`: `{p}` is not inside an object")))?;
                if i + 1 == parts.len() {
                    if !obj.contains_key(*p) {
                        return Err(Error::Config(format!("unknown configuration key `{key}`")));
                    }
                    obj.insert((*p).to_string(), parsed.clone());
                    break;
                }
                slot = obj.get_mut(*p).ok_or_else(|| Error::Config(format!("unknown configuration key `{key}`")))?;
            }
        }
        Self::from_value(v, Path::new("<overrides>"))
    }

    pub fn gamma(&self) -> f64 {
        self.time.gamma.unwrap_or(2.0 / self.model.alpha)
    }

    /// Truncation dimension in use.
    pub fn z(&self) -> usize {
        self.qmc.z.unwrap_or_else(|| self.field.len())
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        if !(m.alpha > 0.0 && m.alpha < 1.0) {
            return Err(Error::invalid("model.alpha", format!("{} is outside (0, 1)", m.alpha)));
        }
        if !(m.t_final > 0.0 && m.t_final.is_finite()) {
            return Err(Error::invalid("model.t_final", "must be positive"));
        }
        if self.space.mesh.is_none() && self.space.n_div < 2 {
            return Err(Error::invalid("space.n_div", "must be at least 2"));
        }
        if self.time.steps == 0 {
            return Err(Error::invalid("time.steps", "must be at least 1"));
        }
        if self.gamma() < 1.0 {
            return Err(Error::invalid("time.gamma", "must be at least 1"));
        }
        let z = self.z();
        if z > self.field.len() {
            return Err(Error::Config(format!("qmc.z = {z} exceeds the {} field modes", self.field.len())));
        }
        if self.qmc.beta == 0 || self.qmc.m == 0 {
            return Err(Error::invalid("qmc", "m and beta must be at least 1"));
        }
        if self.estimator.threads == Some(0) {
            return Err(Error::invalid("estimator.threads", "must be at least 1"));
        }
        Ok(())
    }
}

fn parse_error(origin: &Path, e: &serde_json::Error) -> Error {
    Error::Parse { path: origin.to_path_buf(), line: e.line(), message: e.to_string() }
}

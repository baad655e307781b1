use std::path::PathBuf;

use serde::Deserialize;
use serde_json::Value;

use super::{usage, CliError, Profile, RunContext};
use crate::cine::EstimationConfig;
use crate::classify::SweepConfig;
use crate::data::{self, CsvSpec, Dataset, Group, LoadReport, QuadSamples, QuadSpec, ScalerParams};
use crate::error::TriadError;
use crate::gaussian::IsoGaussianQuad;
use crate::linalg::Matrix;
use crate::presets;
use crate::rng::derive_seed;

/// A generator given by preset name or inline.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SpecRef {
    Preset(String),
    Inline(QuadSpec),
}

impl SpecRef {
    pub fn resolve(&self) -> Result<QuadSpec, CliError> {
        match self {
            SpecRef::Preset(name) => presets::quad(name).map_err(|e| usage(e.to_string())),
            SpecRef::Inline(q) => Ok(q.clone()),
        }
    }

    pub fn resolve_iso(&self) -> Result<IsoGaussianQuad, CliError> {
        match self.resolve()? {
            QuadSpec::Iso(q) => Ok(q),
            QuadSpec::Mixture(_) => Err(usage("closed forms need an isotropic Gaussian quad, not a mixture")),
        }
    }
}

/// Noise levels: an explicit list or `points` evenly spaced values from
/// `start` to `stop` inclusive.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Eta2Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, points: usize },
}

impl Eta2Grid {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        let v = match self {
            Eta2Grid::List(v) => v.clone(),
            Eta2Grid::Range { start, stop, points } => match *points {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect(),
            },
        };
        if v.is_empty() {
            return Err(usage("eta2 grid is empty"));
        }
        if let Some(bad) = v.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(usage(format!("eta2 value {bad} must be finite and non-negative")));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Generator(GeneratorSource),
    Dataset(DatasetSource),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSource {
    pub spec: SpecRef,
    #[serde(default = "default_n")]
    pub n_per_cell: usize,
    /// Size of the independent test draw for curves; defaults to `n_per_cell`.
    #[serde(default)]
    pub test_n_per_cell: Option<usize>,
}

fn default_n() -> usize {
    10_000
}

/// A CSV file plus how to read it. `preset` supplies the row rule, PCA size
/// and swept group; `csv` and `pca` override it.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSource {
    pub path: PathBuf,
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub csv: Option<CsvSpec>,
    #[serde(default)]
    pub pca: Option<usize>,
    #[serde(default = "yes")]
    pub standardize: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticConfig {
    pub quad: SpecRef,
    #[serde(default)]
    pub eta2: Option<Eta2Grid>,
}

impl AnalyticConfig {
    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        self.eta2.clone().unwrap_or(Eta2Grid::Range { start: 0.0, stop: 5.0, points: 201 }).values()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    pub source: Source,
    #[serde(default)]
    pub eta2: Option<Eta2Grid>,
    /// Partial overrides on top of the profile's estimator settings.
    #[serde(default)]
    pub estimator: Option<Value>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    pub source: Source,
    #[serde(default)]
    pub eta2: Option<Eta2Grid>,
    #[serde(default)]
    pub sweep: SweepConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrivacyConfig {
    pub epsilon: Vec<f64>,
    pub delta: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReproduceConfig {
    pub figure: String,
    /// Samples per cell for generator-driven panels.
    #[serde(default)]
    pub n_per_cell: Option<usize>,
    #[serde(default)]
    pub estimator: Option<Value>,
    /// Optional CSV sources for the real-data panels of fig3.
    #[serde(default)]
    pub datasets: Vec<DatasetSource>,
}

pub(crate) fn eta2_or_zero(g: &Option<Eta2Grid>) -> Result<Vec<f64>, CliError> {
    g.clone().unwrap_or(Eta2Grid::List(vec![0.0])).values()
}

/// The profile's estimator settings with the config's overrides merged in.
pub(crate) fn estimator_config(profile: Profile, overrides: Option<&Value>) -> Result<EstimationConfig, CliError> {
    let base = match profile {
        Profile::Fast => EstimationConfig::fast(),
        Profile::Paper => EstimationConfig::paper(),
    };
    let Some(o) = overrides else { return Ok(base) };
    let mut v = serde_json::to_value(&base).map_err(TriadError::from)?;
    merge(&mut v, o);
    let cfg: EstimationConfig = serde_json::from_value(v).map_err(|e| usage(format!("bad estimator: {e}")))?;
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

fn merge(base: &mut Value, over: &Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, o) => *b = o.clone(),
    }
}

/// Cell samples ready for a command.
pub(crate) struct Loaded {
    pub train: QuadSamples,
    pub test: Option<QuadSamples>,
    pub spec: Option<QuadSpec>,
    pub swept_group: Option<Group>,
    pub report: Option<LoadReport>,
}

/// Draws or reads the samples. With `test_fraction`, datasets are split
/// before PCA and scaling are fit (on the train part only) and generators get
/// an independent test draw.
pub(crate) fn load_source(src: &Source, ctx: &RunContext, test_fraction: Option<f64>) -> Result<Loaded, CliError> {
    match src {
        Source::Generator(g) => {
            let spec = g.spec.resolve()?;
            let train = data::sample_quad(&spec, g.n_per_cell, ctx.seed).map_err(|e| usage(e.to_string()))?;
            let test = match test_fraction {
                Some(_) => {
                    let n = g.test_n_per_cell.unwrap_or(g.n_per_cell);
                    Some(data::sample_quad(&spec, n, derive_seed(ctx.seed, 0x74657374)).map_err(|e| usage(e.to_string()))?)
                }
                None => None,
            };
            Ok(Loaded { train, test, spec: Some(spec), swept_group: None, report: None })
        }
        Source::Dataset(d) => load_dataset(d, ctx, test_fraction),
    }
}

pub(crate) fn load_dataset(d: &DatasetSource, ctx: &RunContext, test_fraction: Option<f64>) -> Result<Loaded, CliError> {
    let path = ctx.resolve(&d.path);
    if !path.is_file() {
        return Err(usage(format!("dataset not found: {}", path.display())));
    }
    let preset = match &d.preset {
        Some(name) => Some(presets::dataset(name).map_err(|e| usage(e.to_string()))?),
        None => None,
    };
    let csv = d
        .csv
        .clone()
        .or_else(|| preset.as_ref().map(|p| p.csv.clone()))
        .ok_or_else(|| usage("dataset source needs `preset` or `csv`"))?;
    let pca = d.pca.or(preset.as_ref().and_then(|p| p.pca));
    let (ds, report) = data::load_csv(&path, &csv)?;
    let (train, test) = match test_fraction {
        Some(f) => {
            let (a, b) = ds.train_test_split(f, derive_seed(ctx.seed, 0))?;
            (a, Some(b))
        }
        None => (ds, None),
    };
    // PCA, then the scaler, both fit on the train rows only.
    let pca = match pca {
        Some(k) => Some(data::pca_project(&train.features, k)?.1),
        None => None,
    };
    let project = |m: &Matrix| -> Result<Matrix, TriadError> {
        match &pca {
            Some(p) => p.transform(m),
            None => Ok(m.clone()),
        }
    };
    let scaler = if d.standardize {
        let names: Vec<String> = match &pca {
            Some(p) => (1..=p.components.rows()).map(|i| format!("pc{i}")).collect(),
            None => train.columns.clone(),
        };
        Some(ScalerParams::fit(&project(&train.features)?, &names)?)
    } else {
        None
    };
    let to_quad = |ds: &Dataset| -> Result<QuadSamples, TriadError> {
        let mut out = ds.clone();
        out.features = project(&ds.features)?;
        if let Some(s) = &scaler {
            out.features = s.transform(&out.features)?;
        }
        data::split_groups(&out)
    };
    Ok(Loaded {
        train: to_quad(&train)?,
        test: test.as_ref().map(to_quad).transpose()?,
        spec: None,
        swept_group: preset.and_then(|p| p.swept_group),
        report: Some(report),
    })
}

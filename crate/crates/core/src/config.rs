//! Run configuration: one TOML file whose dotted keys can be overridden from
//! the command line with `key=value` pairs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::datagen::{GenSpec, InputLayout, WarpSpec};
use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, KernelSpec, DEFAULT_JITTER};
use crate::levy::{normalize_scale, Interval, LevyFamily, LevyMeasureSpec, DEFAULT_N_TERMS};
use crate::sampler::SamplerConfig;

pub const SEED_ENV: &str = "NGP_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSection {
    pub family: KernelFamily,
    pub length_scale: f64,
    pub signal_variance: f64,
    pub jitter: f64,
}

impl Default for KernelSection {
    fn default() -> Self {
        KernelSection {
            family: KernelFamily::SquaredExponential,
            length_scale: 0.1,
            signal_variance: 1.0,
            jitter: DEFAULT_JITTER,
        }
    }
}

impl KernelSection {
    pub fn spec(&self) -> Result<KernelSpec> {
        KernelSpec::new(self.family, self.length_scale, self.signal_variance)?.with_jitter(self.jitter)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevyChoice {
    TemperedStable,
    Gamma,
    Stable,
    /// No warp; only meaningful for data generation.
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LevySection {
    pub family: LevyChoice,
    pub alpha: f64,
    pub beta: f64,
    /// Normalized so that `E[W(x)] = x` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    pub n_terms: usize,
}

impl Default for LevySection {
    fn default() -> Self {
        LevySection {
            family: LevyChoice::TemperedStable,
            alpha: 0.8,
            beta: 5.0,
            scale: None,
            n_terms: DEFAULT_N_TERMS,
        }
    }
}

impl LevySection {
    /// `None` for the identity warp.
    pub fn spec(&self) -> Result<Option<LevyMeasureSpec>> {
        let family = match self.family {
            LevyChoice::TemperedStable => LevyFamily::TemperedStable,
            LevyChoice::Gamma => LevyFamily::Gamma,
            LevyChoice::Stable => LevyFamily::Stable,
            LevyChoice::Identity => return Ok(None),
        };
        let scale = match self.scale {
            Some(c) => c,
            None => normalize_scale(self.alpha, self.beta, family)
                .map_err(|e| Error::Config(format!("levy.scale must be given for this family ({e})")))?,
        };
        let spec = LevyMeasureSpec {
            family,
            scale,
            alpha: self.alpha,
            beta: self.beta,
            n_terms: self.n_terms,
        };
        Ok(Some(spec.validated()?))
    }

    pub fn required_spec(&self) -> Result<LevyMeasureSpec> {
        self.spec()?
            .ok_or_else(|| Error::Config("levy.family = \"identity\" cannot be fitted".into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenSection {
    pub n_points: usize,
    pub n_observed: usize,
    pub noise_std: f64,
    pub layout: InputLayout,
}

impl Default for GenSection {
    fn default() -> Self {
        GenSection {
            n_points: 100,
            n_observed: 100,
            noise_std: 0.1,
            layout: InputLayout::Grid,
        }
    }
}

/// Length-scale grid for the optimized GP baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineSection {
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_points: usize,
}

impl Default for BaselineSection {
    fn default() -> Self {
        BaselineSection {
            grid_min: 0.01,
            grid_max: 1.0,
            grid_points: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub chains: usize,
    pub noise_variance: f64,
    /// `[lb, ub]` per input dimension.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<Vec<[f64; 2]>>,
    pub kernel: KernelSection,
    pub levy: LevySection,
    pub sampler: SamplerConfig,
    #[serde(rename = "gen")]
    pub generate: GenSection,
    pub baseline: BaselineSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            chains: 1,
            noise_variance: 0.01,
            domain: None,
            kernel: KernelSection::default(),
            levy: LevySection::default(),
            sampler: SamplerConfig::default(),
            generate: GenSection::default(),
            baseline: BaselineSection::default(),
        }
    }
}

/// Parse a right-hand side as a TOML value, falling back to a bare string.
fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Apply `a.b.c=value` to a TOML table, creating intermediate tables.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {assignment:?} is not of the form key=value")))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("bad override key {key:?}")));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("{key}: {p} is not a table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), parse_value(raw.trim()));
    Ok(())
}

impl RunConfig {
    /// Load `path` (or defaults), apply overrides, then validate.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                toml::from_str::<toml::Table>(&text).map_err(|e| Error::format(p, e))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Seed precedence: explicit flag, then the config, then `NGP_SEED`.
    pub fn resolve_seed(&mut self, flag: Option<u64>, config_has_seed: bool) -> Result<()> {
        if let Some(s) = flag {
            self.seed = s;
        } else if !config_has_seed {
            if let Ok(v) = std::env::var(SEED_ENV) {
                self.seed = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("{SEED_ENV}={v:?} is not an unsigned integer")))?;
            }
        }
        self.sampler.seed = self.seed;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.chains == 0 {
            return Err(Error::Config("chains must be at least 1".into()));
        }
        if !(self.noise_variance > 0.0 && self.noise_variance.is_finite()) {
            return Err(Error::Config(format!(
                "noise_variance must be positive, got {}",
                self.noise_variance
            )));
        }
        if let Some(d) = &self.domain {
            self.intervals_from(d)?;
        }
        self.kernel.spec()?;
        self.levy.spec()?;
        self.sampler.validate()?;
        Ok(())
    }

    fn intervals_from(&self, d: &[[f64; 2]]) -> Result<Vec<Interval>> {
        if d.is_empty() {
            return Err(Error::Config("domain needs at least one dimension".into()));
        }
        d.iter().map(|[a, b]| Interval::new(*a, *b)).collect()
    }

    /// Configured domain, or `(0, 0.5)` in one dimension.
    pub fn domains_or_default(&self) -> Result<Vec<Interval>> {
        match &self.domain {
            Some(d) => self.intervals_from(d),
            None => Ok(vec![Interval::new(0.0, 0.5)?]),
        }
    }

    pub fn domains(&self) -> Result<Option<Vec<Interval>>> {
        self.domain.as_deref().map(|d| self.intervals_from(d)).transpose()
    }

    pub fn gen_spec(&self) -> Result<GenSpec> {
        let warp = match self.levy.spec()? {
            Some(l) => WarpSpec::Levy(l),
            None => WarpSpec::Identity,
        };
        let spec = GenSpec {
            domains: self.domains_or_default()?,
            n_points: self.generate.n_points,
            n_observed: self.generate.n_observed,
            kernel: self.kernel.spec()?,
            warp,
            noise_std: self.generate.noise_std,
            layout: self.generate.layout,
            seed: self.seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?).map_err(|e| Error::io(path, e))
    }
}

/// Whether the config file or overrides set `seed` explicitly.
pub fn sets_seed(path: Option<&Path>, overrides: &[String]) -> Result<bool> {
    if overrides.iter().any(|o| o.split_once('=').is_some_and(|(k, _)| k.trim() == "seed")) {
        return Ok(true);
    }
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            let t = toml::from_str::<toml::Table>(&text).map_err(|e| Error::format(p, e))?;
            Ok(t.contains_key("seed"))
        }
        None => Ok(false),
    }
}

/// Bundle layout written by `fit` and read by `predict`.
pub struct BundlePaths {
    pub dir: PathBuf,
}

impl BundlePaths {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        BundlePaths { dir: dir.into() }
    }

    pub fn config(&self) -> PathBuf {
        self.dir.join("config.toml")
    }
    pub fn train(&self) -> PathBuf {
        self.dir.join("train.csv")
    }
    pub fn posterior(&self) -> PathBuf {
        self.dir.join("posterior.csv")
    }
    pub fn baseline_fixed(&self) -> PathBuf {
        self.dir.join("baseline_fixed.csv")
    }
    pub fn baseline_opt(&self) -> PathBuf {
        self.dir.join("baseline_opt.csv")
    }
    pub fn samples(&self) -> PathBuf {
        self.dir.join("samples.csv")
    }
    pub fn trace(&self) -> PathBuf {
        self.dir.join("trace.csv")
    }
    pub fn summary(&self) -> PathBuf {
        self.dir.join("summary.json")
    }
}

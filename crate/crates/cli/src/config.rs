//! Run configuration: a TOML file whose values can be overridden by flags.
//! Relative paths in the file are resolved against the file's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use citeprop::engine::{Convergence, EngineConfig, DEFAULT_MAX_ITERATIONS, DEFAULT_PER_PAPER_THRESHOLD};
use citeprop::Variant;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdMode {
    Absolute,
    PerPaper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineSection {
    pub threshold_mode: ThresholdMode,
    /// Absolute total, or per eligible paper, depending on the mode.
    pub threshold: Option<f64>,
    pub max_iterations: usize,
    pub include_ineligible_citers: bool,
    pub unlimited_passes: usize,
}

impl Default for EngineSection {
    fn default() -> Self {
        EngineSection {
            threshold_mode: ThresholdMode::PerPaper,
            threshold: None,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            include_ineligible_citers: true,
            unlimited_passes: 1,
        }
    }
}

impl EngineSection {
    pub fn engine_config(&self, fractional: bool) -> EngineConfig {
        let convergence = match self.threshold_mode {
            ThresholdMode::Absolute => {
                Convergence::Absolute(self.threshold.unwrap_or(citeprop::engine::PAPER_SCALE_THRESHOLD))
            }
            ThresholdMode::PerPaper => Convergence::PerPaper(self.threshold.unwrap_or(DEFAULT_PER_PAPER_THRESHOLD)),
        };
        EngineConfig {
            fractional,
            convergence,
            max_iterations: self.max_iterations,
            include_ineligible_citers: self.include_ineligible_citers,
            unlimited_passes: self.unlimited_passes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Scheme table; the bundled reference scheme when absent.
    pub scheme: Option<PathBuf>,
    pub journals: Option<PathBuf>,
    pub papers: Option<PathBuf>,
    pub references: Option<PathBuf>,
    /// Optional `reference_id, indexed, year` table for filtered ACVs.
    pub reference_attributes: Option<PathBuf>,
    /// Publication year of the corpus, used for the year-window ACVs.
    pub citing_year: Option<i32>,
    pub out: Option<PathBuf>,
    pub variants: Vec<String>,
    pub min_refs: usize,
    pub threads: Option<usize>,
    /// External classifications to compare with, by label.
    pub compare: BTreeMap<String, PathBuf>,
    /// Label of the comparison baseline (one of `compare`).
    pub reference: Option<String>,
    /// `[origin, result]` labels for the area flow table.
    pub flow: Option<[String; 2]>,
    pub engine: EngineSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scheme: None,
            journals: None,
            papers: None,
            references: None,
            reference_attributes: None,
            citing_year: None,
            out: None,
            variants: Variant::standard().iter().map(Variant::to_string).collect(),
            min_refs: citeprop::corpus::DEFAULT_MIN_REFS,
            threads: None,
            compare: BTreeMap::new(),
            reference: None,
            flow: None,
            engine: EngineSection::default(),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut config: RunConfig = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(x) = p {
                if x.is_relative() {
                    *x = base.join(&*x);
                }
            }
        };
        fix(&mut config.scheme);
        fix(&mut config.journals);
        fix(&mut config.papers);
        fix(&mut config.references);
        fix(&mut config.reference_attributes);
        fix(&mut config.out);
        for p in config.compare.values_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    pub fn parsed_variants(&self) -> Result<Vec<Variant>> {
        if self.variants.is_empty() {
            bail!("at least one variant is required");
        }
        let mut out: Vec<Variant> = Vec::new();
        for v in &self.variants {
            let parsed: Variant = v.parse().map_err(anyhow::Error::msg)?;
            if out.iter().any(|o| o.to_string() == parsed.to_string()) {
                bail!("variant {parsed} listed twice");
            }
            out.push(parsed);
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        self.parsed_variants()?;
        for (name, p) in [("journals", &self.journals), ("papers", &self.papers), ("references", &self.references)] {
            if p.is_none() {
                bail!("missing input path `{name}`");
            }
        }
        if self.out.is_none() {
            bail!("missing output directory `out`");
        }
        if self.threads == Some(0) {
            bail!("threads must be at least 1");
        }
        if let Some(r) = &self.reference {
            if !self.compare.contains_key(r) {
                bail!("reference `{r}` is not one of the compare classifications");
            }
        }
        self.engine.engine_config(false).validate()?;
        Ok(())
    }
}

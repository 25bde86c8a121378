use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use citeprop::synth::SynthParams;

use crate::commands::{self, MetricsJob};
use crate::config::{RunConfig, ThresholdMode};

#[derive(Debug, Parser)]
#[command(name = "citeprop", version, about = "Paper-level classification by citation label propagation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a corpus and write tables, run log and metrics report.
    Run(RunArgs),
    /// Generate a synthetic corpus with planted categories.
    Synth(SynthArgs),
    /// Compare the engine with the dense reference solver.
    Oracle(OracleArgs),
    /// Compute the metrics report for existing classification files.
    Metrics(MetricsArgs),
}

#[derive(Debug, Args, Default)]
pub struct InputArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub scheme: Option<PathBuf>,
    #[arg(long)]
    pub journals: Option<PathBuf>,
    #[arg(long)]
    pub papers: Option<PathBuf>,
    #[arg(long)]
    pub references: Option<PathBuf>,
    #[arg(long)]
    pub min_refs: Option<usize>,
    #[arg(long, value_enum)]
    pub threshold_mode: Option<ThresholdMode>,
    /// Convergence threshold: a total, or per eligible paper.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

impl InputArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        let set = |slot: &mut Option<PathBuf>, v: &Option<PathBuf>| {
            if v.is_some() {
                slot.clone_from(v);
            }
        };
        set(&mut c.scheme, &self.scheme);
        set(&mut c.journals, &self.journals);
        set(&mut c.papers, &self.papers);
        set(&mut c.references, &self.references);
        if let Some(m) = self.min_refs {
            c.min_refs = m;
        }
        if let Some(m) = self.threshold_mode {
            if m != c.engine.threshold_mode && self.threshold.is_none() {
                c.engine.threshold = None;
            }
            c.engine.threshold_mode = m;
        }
        if self.threshold.is_some() {
            c.engine.threshold = self.threshold;
        }
        if let Some(m) = self.max_iterations {
            c.engine.max_iterations = m;
        }
        if self.threads.is_some() {
            c.threads = self.threads;
        }
        Ok(c)
    }
}

fn named_path(s: &str) -> Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => Ok((name.to_string(), PathBuf::from(path))),
        _ => Err(format!("expected NAME=PATH, got `{s}`")),
    }
}

fn flow_pair(s: &str) -> Result<[String; 2], String> {
    match s.split_once(',') {
        Some((a, b)) => Ok([a.trim().to_string(), b.trim().to_string()]),
        None => Err(format!("expected ORIGIN,RESULT, got `{s}`")),
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Comma-separated variant labels, e.g. `JL-NF,U1-F-0.8`.
    #[arg(long, value_delimiter = ',')]
    pub variants: Option<Vec<String>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// External classification to compare, as NAME=PATH.
    #[arg(long, value_parser = named_path)]
    pub compare: Vec<(String, PathBuf)>,
    /// Which compare classification is the baseline.
    #[arg(long)]
    pub reference: Option<String>,
    /// `reference_id, indexed, year` table for the filtered ACV columns.
    #[arg(long)]
    pub reference_attributes: Option<PathBuf>,
    #[arg(long)]
    pub citing_year: Option<i32>,
    /// Area flow pair as ORIGIN,RESULT labels.
    #[arg(long, value_parser = flow_pair)]
    pub flow: Option<[String; 2]>,
}

impl RunArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = self.input.resolve()?;
        if let Some(v) = &self.variants {
            c.variants = v.iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
        }
        if self.out.is_some() {
            c.out.clone_from(&self.out);
        }
        for (name, path) in &self.compare {
            c.compare.insert(name.clone(), path.clone());
        }
        if self.reference.is_some() {
            c.reference.clone_from(&self.reference);
        }
        if self.reference_attributes.is_some() {
            c.reference_attributes.clone_from(&self.reference_attributes);
        }
        if self.citing_year.is_some() {
            c.citing_year = self.citing_year;
        }
        if self.flow.is_some() {
            c.flow.clone_from(&self.flow);
        }
        Ok(c)
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// TOML file with generator parameters (top level or a `[synth]` table).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Required here or in the config file.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub papers: Option<usize>,
    #[arg(long)]
    pub areas: Option<usize>,
    #[arg(long)]
    pub categories_per_area: Option<usize>,
    #[arg(long)]
    pub refs_min: Option<usize>,
    #[arg(long)]
    pub refs_max: Option<usize>,
    #[arg(long)]
    pub cross_citation: Option<f64>,
    #[arg(long)]
    pub citations_per_reference: Option<f64>,
    #[arg(long)]
    pub journals_per_category: Option<usize>,
    #[arg(long)]
    pub dual_fraction: Option<f64>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub misc_fraction: Option<f64>,
    #[arg(long)]
    pub multidisciplinary_fraction: Option<f64>,
    #[arg(long)]
    pub low_ref_fraction: Option<f64>,
}

impl SynthArgs {
    pub fn resolve(&self) -> Result<SynthParams> {
        let mut seed = self.seed;
        let mut p = SynthParams::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let mut table: toml::Table = toml::from_str(&text)?;
            if let Some(toml::Value::Table(t)) = table.remove("synth") {
                table = t;
            }
            if seed.is_none() {
                seed = table.get("seed").and_then(toml::Value::as_integer).map(|s| s as u64);
            }
            p = toml::Value::Table(table).try_into().context("invalid synth parameters")?;
        }
        p.seed = seed.ok_or_else(|| anyhow!("a seed is required (--seed or `seed` in the config)"))?;
        macro_rules! over {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { p.$f = v; } )* };
        }
        over!(
            papers,
            areas,
            categories_per_area,
            refs_min,
            refs_max,
            cross_citation,
            citations_per_reference,
            journals_per_category,
            dual_fraction,
            noise,
            misc_fraction,
            multidisciplinary_fraction,
            low_ref_fraction
        );
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Also write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub scheme: Option<PathBuf>,
    /// Classification table as NAME=PATH; repeatable.
    #[arg(long = "classification", value_parser = named_path, required = true)]
    pub classifications: Vec<(String, PathBuf)>,
    /// Baseline classification as NAME=PATH.
    #[arg(long, value_parser = named_path)]
    pub reference: Option<(String, PathBuf)>,
    #[arg(long)]
    pub journals: Option<PathBuf>,
    #[arg(long)]
    pub papers: Option<PathBuf>,
    #[arg(long)]
    pub references: Option<PathBuf>,
    #[arg(long)]
    pub min_refs: Option<usize>,
    #[arg(long)]
    pub reference_attributes: Option<PathBuf>,
    #[arg(long)]
    pub citing_year: Option<i32>,
    #[arg(long, value_parser = flow_pair)]
    pub flow: Option<[String; 2]>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub threads: Option<usize>,
}

impl MetricsArgs {
    pub fn resolve(&self) -> Result<MetricsJob> {
        let corpus = match (&self.papers, &self.journals, &self.references) {
            (None, None, None) => None,
            (Some(_), Some(_), Some(_)) => Some(RunConfig {
                papers: self.papers.clone(),
                journals: self.journals.clone(),
                references: self.references.clone(),
                reference_attributes: self.reference_attributes.clone(),
                citing_year: self.citing_year,
                min_refs: self.min_refs.unwrap_or(citeprop::corpus::DEFAULT_MIN_REFS),
                ..RunConfig::default()
            }),
            _ => bail!("--papers, --journals and --references must be given together"),
        };
        Ok(MetricsJob {
            scheme: self.scheme.clone(),
            classifications: self.classifications.clone(),
            reference: self.reference.clone(),
            corpus,
            flow: self.flow.clone(),
            out: self.out.clone(),
            threads: self.threads,
        })
    }
}

/// Dispatches a parsed command line.
pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run(a) => {
            let summary = commands::cmd_run(&a.resolve()?)?;
            println!(
                "wrote {} classifications to {}",
                summary.classifications.len(),
                summary.out.display()
            );
            if !summary.converged {
                eprintln!("warning: propagation did not converge");
            }
        }
        Command::Synth(a) => {
            let c = commands::cmd_synth(&a.resolve()?, &a.out)?;
            println!("wrote {} papers to {}", c.papers.len(), a.out.display());
        }
        Command::Oracle(a) => {
            let report = commands::cmd_oracle(&a.input.resolve()?, a.out.as_deref())?;
            if !report.pass {
                bail!(
                    "engine differs from the dense solver by {:e} (tolerance {:e})",
                    report.max_diff,
                    report.tolerance
                );
            }
        }
        Command::Metrics(a) => {
            let job = a.resolve()?;
            commands::cmd_metrics(&job)?;
            println!("wrote metrics report to {}", job.out.display());
        }
    }
    Ok(())
}

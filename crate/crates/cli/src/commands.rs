//! The four subcommands. Each takes fully resolved settings and returns a
//! summary; argument parsing lives in `args`.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use citeprop::assign::{prune_classification, PruneConfig};
use citeprop::engine::{self, EngineConfig};
use citeprop::metrics::{RefFilter, ReferenceAttributes};
use citeprop::report::{MetricsReport, ReportInput};
use citeprop::synth::{self, SynthParams, RNG_ALGORITHM};
use citeprop::{CategoryScheme, Classification, Corpus, Method, Variant};
use log::{info, warn};
use serde_json::json;

use crate::config::RunConfig;
use crate::oracle_check::{self, OracleReport};

/// Label of the journal-inherited classification in reports.
pub const INITIAL_LABEL: &str = "ASJC";

pub fn load_scheme(path: Option<&Path>) -> Result<CategoryScheme> {
    match path {
        Some(p) => CategoryScheme::load(p).with_context(|| format!("loading scheme {}", p.display())),
        None => Ok(CategoryScheme::reference()),
    }
}

pub fn load_corpus(config: &RunConfig, scheme: &CategoryScheme) -> Result<Corpus> {
    let (Some(p), Some(j), Some(r)) = (&config.papers, &config.journals, &config.references) else {
        bail!("papers, journals and references tables are all required");
    };
    let corpus = Corpus::load(p, j, r, scheme)?.with_min_refs(config.min_refs);
    info!(
        "corpus: {} papers ({} eligible), {} references, {} slots",
        corpus.len(),
        corpus.eligible_count(),
        corpus.reference_count(),
        corpus.slot_count()
    );
    Ok(corpus)
}

/// Runs `f` on a dedicated pool when a worker count is given.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
            Ok(pool.install(f))
        }
    }
}

fn file_name(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || "-._".contains(c) { c } else { '_' }).collect()
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// ACV columns: all references, plus indexed-only and year-window variants
/// when reference attributes are available. A window of N years covers
/// `[year - N, year - 1]`.
pub fn acv_filters<'a>(
    attributes: Option<&'a ReferenceAttributes>,
    citing_year: Option<i32>,
) -> Vec<(String, RefFilter<'a>)> {
    let mut out = Vec::new();
    let window = |attributes, indexed_only, n: i32| RefFilter::Matching {
        attributes,
        indexed_only,
        min_year: citing_year.map(|y| y - n),
        max_year: citing_year.map(|y| y - 1),
    };
    if let Some(a) = attributes {
        out.push(("ACV S".to_string(), RefFilter::Matching { attributes: a, indexed_only: true, min_year: None, max_year: None }));
        if citing_year.is_some() {
            out.push(("ACV S3".to_string(), window(a, true, 3)));
            out.push(("ACV S2".to_string(), window(a, true, 2)));
        }
    }
    out.push(("ACV".to_string(), RefFilter::All));
    if let (Some(a), Some(_)) = (attributes, citing_year) {
        out.push(("ACV 3".to_string(), window(a, false, 3)));
        out.push(("ACV 2".to_string(), window(a, false, 2)));
    }
    out
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out: PathBuf,
    pub classifications: Vec<PathBuf>,
    pub converged: bool,
}

/// ingest → engine → prune → write tables → metrics.
pub fn cmd_run(config: &RunConfig) -> Result<RunSummary> {
    config.validate()?;
    let variants = config.parsed_variants()?;
    let out = config.out.clone().expect("validated");
    with_threads(config.threads, || run_inner(config, &variants, &out))?
}

fn run_inner(config: &RunConfig, variants: &[Variant], out: &Path) -> Result<RunSummary> {
    let started = Instant::now();
    let scheme = load_scheme(config.scheme.as_deref())?;
    let corpus = load_corpus(config, &scheme)?;
    let compare: BTreeMap<String, Classification> = config
        .compare
        .iter()
        .map(|(name, path)| {
            Classification::load(path, &scheme, name).with_context(|| format!("loading {}", path.display()))
                .map(|c| (name.clone(), c))
        })
        .collect::<Result<_>>()?;

    let class_dir = out.join("classifications");
    fs::create_dir_all(&class_dir).with_context(|| format!("creating {}", class_dir.display()))?;

    let mut engine_runs: BTreeMap<bool, engine::EngineOutput> = BTreeMap::new();
    for fractional in [false, true] {
        if !variants.iter().any(|v| v.fractional == fractional) {
            continue;
        }
        let cfg: EngineConfig = config.engine.engine_config(fractional);
        let t = Instant::now();
        let result = engine::run(&corpus, cfg)?;
        let info = result.jl.run.as_ref().expect("engine output carries run info");
        info!(
            "engine {}: {} iterations, residuals {:?}, {:.2?}",
            if fractional { "F" } else { "NF" },
            info.iterations,
            info.residual_trace,
            t.elapsed()
        );
        if !result.converged {
            warn!(
                "{} weighting did not converge within {} iterations",
                if fractional { "fractional" } else { "non-fractional" },
                cfg.max_iterations
            );
        }
        engine_runs.insert(fractional, result);
    }

    let mut produced: Vec<Classification> = Vec::new();
    let mut files = Vec::new();
    for v in variants {
        let run = &engine_runs[&v.fractional];
        let raw = match v.method {
            Method::JournalLimited => &run.jl,
            Method::Unlimited => &run.u1,
        };
        let c = match v.threshold {
            None => raw.clone(),
            Some(t) => prune_classification(raw, &PruneConfig::new(t)?)?,
        };
        debug_assert_eq!(c.label, v.to_string());
        let path = class_dir.join(format!("{}.tsv", file_name(&c.label)));
        c.save(&scheme, &path)?;
        c.save_metadata(&class_dir.join(format!("{}.meta.json", file_name(&c.label))))?;
        files.push(path);
        produced.push(c);
    }

    let mut unre = String::from("paper_id\tref_count\n");
    for p in corpus.papers() {
        if p.ref_count() < corpus.min_refs() {
            unre.push_str(&format!("{}\t{}\n", p.id, p.ref_count()));
        }
    }
    fs::write(out.join("unreclassified.tsv"), unre)?;

    let converged = engine_runs.values().all(|r| r.converged);
    let runs: serde_json::Map<String, serde_json::Value> = engine_runs
        .iter()
        .map(|(f, r)| (if *f { "F" } else { "NF" }.to_string(), json!(r.jl.run)))
        .collect();
    write_json(
        &out.join("run_log.json"),
        &json!({
            "papers": corpus.len(),
            "eligible": corpus.eligible_count(),
            "references": corpus.reference_count(),
            "slots": corpus.slot_count(),
            "categories": corpus.category_count(),
            "min_refs": corpus.min_refs(),
            "unreclassified_percent": corpus.unreclassified_percentage(),
            "engine": config.engine,
            "variants": variants.iter().map(Variant::to_string).collect::<Vec<_>>(),
            "runs": runs,
            "converged": converged,
        }),
    )?;

    let attributes = config
        .reference_attributes
        .as_deref()
        .map(ReferenceAttributes::load)
        .transpose()?;
    let initial = Classification::initial(&corpus, INITIAL_LABEL);
    let reference = config.reference.as_ref().map(|r| &compare[r]);
    let mut listed: Vec<&Classification> = vec![&initial];
    listed.extend(compare.values().filter(|c| Some(&c.label) != config.reference.as_ref()));
    listed.extend(produced.iter());
    let flow = resolve_flow(config.flow.as_ref(), &listed)?;
    let report = MetricsReport::compute(&ReportInput {
        scheme: &scheme,
        classifications: listed,
        reference,
        corpus: Some(&corpus),
        acv_filters: acv_filters(attributes.as_ref(), config.citing_year),
        flow,
    })?;
    report.write(&out.join("report"))?;
    info!("run finished in {:.2?}", started.elapsed());
    Ok(RunSummary {
        out: out.to_path_buf(),
        classifications: files,
        converged,
    })
}

fn resolve_flow<'a>(
    flow: Option<&[String; 2]>,
    listed: &[&'a Classification],
) -> Result<Option<(&'a Classification, &'a Classification)>> {
    let find = |label: &str| listed.iter().copied().find(|c| c.label == label);
    match flow {
        Some([o, r]) => match (find(o), find(r)) {
            (Some(o), Some(r)) => Ok(Some((o, r))),
            _ => bail!("flow labels {o} and {r} must both name reported classifications"),
        },
        None => Ok(find(INITIAL_LABEL).zip(find("U1-F-0.8"))),
    }
}

/// Generates a synthetic corpus into `out`.
pub fn cmd_synth(params: &SynthParams, out: &Path) -> Result<synth::SyntheticCorpus> {
    let t = Instant::now();
    let corpus = synth::generate(params)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    corpus.write(out)?;
    info!(
        "generated {} papers, {} slots with {} in {:.2?}",
        corpus.papers.len(),
        corpus.references.len(),
        RNG_ALGORITHM,
        t.elapsed()
    );
    Ok(corpus)
}

pub fn cmd_oracle(config: &RunConfig, report_path: Option<&Path>) -> Result<OracleReport> {
    let scheme = load_scheme(config.scheme.as_deref())?;
    let corpus = load_corpus(config, &scheme)?;
    let base = config.engine.engine_config(false);
    let report = with_threads(config.threads, || oracle_check::check(&corpus, &base))??;
    let value = serde_json::to_value(&report)?;
    if let Some(p) = report_path {
        write_json(p, &value)?;
    }
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{}", serde_json::to_string_pretty(&value)?)?;
    Ok(report)
}

/// Metrics-only settings.
#[derive(Debug, Clone, Default)]
pub struct MetricsJob {
    pub scheme: Option<PathBuf>,
    pub classifications: Vec<(String, PathBuf)>,
    pub reference: Option<(String, PathBuf)>,
    /// papers, journals, references; needed for ACV and relocation tables.
    pub corpus: Option<RunConfig>,
    pub flow: Option<[String; 2]>,
    pub out: PathBuf,
    pub threads: Option<usize>,
}

pub fn cmd_metrics(job: &MetricsJob) -> Result<MetricsReport> {
    if job.classifications.is_empty() {
        bail!("at least one classification is required");
    }
    with_threads(job.threads, || metrics_inner(job))?
}

fn metrics_inner(job: &MetricsJob) -> Result<MetricsReport> {
    let scheme = load_scheme(job.scheme.as_deref())?;
    let load = |(name, path): &(String, PathBuf)| {
        Classification::load(path, &scheme, name).with_context(|| format!("loading {}", path.display()))
    };
    let list: Vec<Classification> = job.classifications.iter().map(load).collect::<Result<_>>()?;
    let reference = job.reference.as_ref().map(load).transpose()?;
    let corpus = job.corpus.as_ref().map(|c| load_corpus(c, &scheme)).transpose()?;
    let attributes = job
        .corpus
        .as_ref()
        .and_then(|c| c.reference_attributes.as_deref())
        .map(ReferenceAttributes::load)
        .transpose()?;
    let initial = corpus.as_ref().map(|c| Classification::initial(c, INITIAL_LABEL));
    let mut listed: Vec<&Classification> = initial.iter().collect();
    listed.extend(list.iter());
    let flow = resolve_flow(job.flow.as_ref(), &listed)?;
    let report = MetricsReport::compute(&ReportInput {
        scheme: &scheme,
        classifications: listed,
        reference: reference.as_ref(),
        corpus: corpus.as_ref(),
        acv_filters: if corpus.is_some() {
            acv_filters(attributes.as_ref(), job.corpus.as_ref().and_then(|c| c.citing_year))
        } else {
            Vec::new()
        },
        flow,
    })?;
    report.write(&job.out)?;
    Ok(report)
}

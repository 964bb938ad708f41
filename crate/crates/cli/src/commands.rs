use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use simthresh::eval::{self, paired_ttest, Evaluation, Qrels, Run, DEFAULT_CUTOFF};
use simthresh::neighbor::{aggregate_curves, fit_terms, AggregateMixture, SimilarityGrid, DEFAULT_CONFIDENCE};
use simthresh::report::{self, write_csv};
use simthresh::retrieval::{
    build_index, build_translation_table, lm_score, read_topics, tlm_score, write_run, ExpansionPolicy, Index,
    JsonlDocuments, LmConfig, TrecDocuments, MAX_RUN_DEPTH,
};
use simthresh::textproc::Pipeline;
use simthresh::threshold::{solve_threshold, solve_threshold_refined, synonym_statistics, SynonymTarget, SynsetFile};
use simthresh::uncertainty::{similarity_histogram, uncertainty_curve, HistogramConfig};
use simthresh::{EmbeddingModel, ModelEnsemble, VectorFormat};

use crate::settings::{open_input, open_output, read_terms, Settings};
use crate::{
    BinArgs, CompareArgs, EvalArgs, EvaluateArgs, HistogramArgs, IndexArgs, NeighborsArgs, SearchArgs,
    SynonymStatsArgs, ThresholdArgs, UncertaintyArgs,
};

fn vector_format(s: &Settings, flag: Option<String>) -> Result<VectorFormat> {
    let name = s.or_default(flag, "format", "text".to_owned())?;
    Ok(name.parse()?)
}

fn load_model(path: &Path, format: VectorFormat) -> Result<EmbeddingModel> {
    EmbeddingModel::load(path, format).with_context(|| format!("loading model {}", path.display()))
}

fn histogram_config(s: &Settings, a: BinArgs) -> Result<HistogramConfig> {
    let d = HistogramConfig::default();
    let config = HistogramConfig::new(
        s.or_default(a.domain_low, "domain_low", d.domain_low)?,
        s.or_default(a.domain_high, "domain_high", d.domain_high)?,
        s.or_default(a.bins, "bins", d.bin_count)?,
    )?;
    Ok(config)
}

fn finish(mut w: Box<dyn Write>) -> Result<()> {
    w.flush().context("writing output")
}

const BIN_KEYS: [&str; 3] = ["domain_low", "domain_high", "bins"];

pub fn uncertainty(s: &Settings, a: UncertaintyArgs) -> Result<()> {
    s.warn_unused(
        &[
            &BIN_KEYS[..],
            &["reference", "other", "format", "probes", "out", "histogram_out"],
        ]
        .concat(),
    );
    let format = vector_format(s, a.format)?;
    let reference = load_model(&s.required::<PathBuf>(a.reference, "reference")?, format)?;
    let other = load_model(&s.required::<PathBuf>(a.other, "other")?, format)?;
    let probes = read_terms(&s.required::<PathBuf>(a.probes, "probes")?)?;
    let config = histogram_config(s, a.bins)?;
    let histogram_out = s.optional(a.histogram_out, "histogram_out")?;
    let out = s.optional(a.out, "out")?;

    let curve = uncertainty_curve(&reference, &other, &probes, &config)?;
    if curve.out_of_domain > 0 {
        log::info!(
            "{} of {} pairs fall outside the histogram domain",
            curve.out_of_domain,
            curve.total_pairs()
        );
    }
    let w = open_output(out.as_deref())?;
    write_csv(w, &report::uncertainty_rows(&curve))?;
    if let Some(path) = histogram_out {
        let h = similarity_histogram(&reference, &probes, &config)?;
        let w = open_output(Some(&path))?;
        write_csv(w, &report::histogram_rows(&h))?;
    }
    Ok(())
}

pub fn histogram(s: &Settings, a: HistogramArgs) -> Result<()> {
    s.warn_unused(&[&BIN_KEYS[..], &["model", "format", "probes", "out"]].concat());
    let format = vector_format(s, a.format)?;
    let model = load_model(&s.required::<PathBuf>(a.model, "model")?, format)?;
    let probes = read_terms(&s.required::<PathBuf>(a.probes, "probes")?)?;
    let config = histogram_config(s, a.bins)?;
    let out = s.optional(a.out, "out")?;
    let h = similarity_histogram(&model, &probes, &config)?;
    if h.out_of_domain > 0 {
        log::info!("{} similarities fall outside the histogram domain", h.out_of_domain);
    }
    write_csv(open_output(out.as_deref())?, &report::histogram_rows(&h))?;
    Ok(())
}

pub fn neighbors(s: &Settings, a: NeighborsArgs) -> Result<()> {
    s.warn_unused(&["model", "format", "probes", "threshold", "k", "out"]);
    let format = vector_format(s, a.format)?;
    let model = load_model(&s.required::<PathBuf>(a.model, "model")?, format)?;
    let mut terms = a.terms;
    if let Some(path) = s.optional(a.probes, "probes")? {
        terms.extend(read_terms(&path)?);
    }
    if terms.is_empty() {
        bail!("no query terms: pass --term or --probes");
    }
    let threshold = s.optional(a.threshold, "threshold")?;
    let k = s.optional(a.k, "k")?;
    let mut rows = Vec::new();
    for t in &terms {
        let found = match (threshold, k) {
            (Some(theta), None) => model.neighbors_above(t, theta)?,
            (None, Some(k)) => model.knn(t, k)?,
            _ => bail!("give exactly one of --threshold and --k"),
        };
        rows.extend(report::neighbor_rows(t, &found));
    }
    write_csv(open_output(s.optional(a.out, "out")?.as_deref())?, &rows)?;
    Ok(())
}

fn file_safe(term: &str) -> String {
    term.chars()
        .map(|c| if c.is_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

pub fn threshold(s: &Settings, a: ThresholdArgs) -> Result<()> {
    s.warn_unused(&[
        "replicas",
        "format",
        "probes",
        "synsets",
        "target",
        "confidence",
        "grid_low",
        "grid_high",
        "grid_points",
        "dimensionality",
        "grid_only",
        "out",
        "curve_out",
        "curves_dir",
        "pairs_out",
    ]);
    let format = vector_format(s, a.format)?;
    let paths = s.list(a.replicas, "replicas")?;
    if paths.len() < 2 {
        bail!("threshold needs at least two --replica models, got {}", paths.len());
    }
    let replicas = paths
        .iter()
        .map(|p| load_model(p, format))
        .collect::<Result<Vec<_>>>()?;
    let ensemble = ModelEnsemble::new(replicas)?;
    let probes = read_terms(&s.required::<PathBuf>(a.probes, "probes")?)?;

    let mut missing = Vec::new();
    for t in &probes {
        if let Some(m) = ensemble.replicas().iter().find(|m| !m.contains(t)) {
            missing.push(format!("{t:?} (not in {})", m.model_id()));
        }
    }
    if !missing.is_empty() {
        bail!("probe terms missing from the replicas: {}", missing.join(", "));
    }

    let target = match s.optional::<PathBuf>(a.synsets, "synsets")? {
        Some(path) => {
            let synsets = SynsetFile::load(&path).with_context(|| format!("reading synsets {}", path.display()))?;
            let t = synonym_statistics(&synsets)?;
            t.validate()?;
            t
        }
        None => {
            let mean = s.optional(a.target, "target")?;
            match mean {
                Some(m) => SynonymTarget::from_mean(m)?,
                None => SynonymTarget::wordnet_reference(),
            }
        }
    };
    let confidence = s.or_default(a.confidence, "confidence", DEFAULT_CONFIDENCE)?;
    let d = SimilarityGrid::default();
    let grid = SimilarityGrid::uniform(
        s.or_default(a.grid_low, "grid_low", d.points()[0])?,
        s.or_default(a.grid_high, "grid_high", d.points()[d.len() - 1])?,
        s.or_default(a.grid_points, "grid_points", d.len())?,
    )?;
    let dimensionality = s.or_default(a.dimensionality, "dimensionality", ensemble.dimensionality())?;
    let grid_only = s.switch(a.grid_only, "grid_only")?;

    let mixtures = fit_terms(&ensemble, &probes)?;
    if let Some(path) = s.optional::<PathBuf>(a.pairs_out, "pairs_out")? {
        let pairs: Vec<_> = mixtures.iter().flat_map(|m| m.pair_distributions(&ensemble)).collect();
        write_csv(open_output(Some(&path))?, &report::pair_rows(&pairs))?;
    }
    let curves: Vec<_> = mixtures.iter().map(|m| m.curve(&grid)).collect();
    if let Some(dir) = s.optional::<PathBuf>(a.curves_dir, "curves_dir")? {
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        for (m, c) in mixtures.iter().zip(&curves) {
            let path = dir.join(format!("term_{}.csv", file_safe(m.term())));
            write_csv(open_output(Some(&path))?, &report::curve_rows(c))?;
        }
    }
    let aggregate = aggregate_curves(&curves, confidence)?;
    if let Some(path) = s.optional::<PathBuf>(a.curve_out, "curve_out")? {
        write_csv(open_output(Some(&path))?, &report::curve_rows(&aggregate))?;
    }
    let result = if grid_only {
        solve_threshold(&aggregate, &target)?
    } else {
        let mixture = AggregateMixture::new(mixtures, confidence)?;
        solve_threshold_refined(&aggregate, &mixture, &target)?
    };
    let result = result.with_dimensionality(dimensionality);
    log::info!(
        "target {} from {}: threshold {:.4} ({:.4}, {:.4})",
        target.mean_synonyms,
        target.source_label,
        result.main,
        result.lower,
        result.upper
    );
    write_csv(
        open_output(s.optional(a.out, "out")?.as_deref())?,
        &[report::threshold_row(&result)],
    )?;
    Ok(())
}

pub fn synonym_stats(s: &Settings, a: SynonymStatsArgs) -> Result<()> {
    s.warn_unused(&["synsets", "out"]);
    let path = s.required::<PathBuf>(a.synsets, "synsets")?;
    let synsets = SynsetFile::load(&path).with_context(|| format!("reading synsets {}", path.display()))?;
    let stats = synonym_statistics(&synsets)?;
    write_csv(
        open_output(s.optional(a.out, "out")?.as_deref())?,
        &[report::synonym_stats_row(&stats)],
    )?;
    Ok(())
}

pub fn index(s: &Settings, a: IndexArgs) -> Result<()> {
    s.warn_unused(&["corpus", "corpus_format", "stopwords", "no_stem", "out"]);
    let corpus = s.required::<PathBuf>(a.corpus, "corpus")?;
    let corpus_format = s.or_default(a.corpus_format, "corpus_format", "jsonl".to_owned())?;
    let stem = !s.switch(a.no_stem, "no_stem")?;
    let pipeline = match s.optional::<PathBuf>(a.stopwords, "stopwords")? {
        Some(p) => {
            Pipeline::from_stopword_file(&p, stem).with_context(|| format!("reading stopwords {}", p.display()))?
        }
        None => Pipeline::new(simthresh::textproc::default_stopwords(), stem),
    };
    let reader = open_input(&corpus)?;
    let built = match corpus_format.as_str() {
        "jsonl" => build_index(JsonlDocuments::new(reader), &pipeline),
        "trec" => build_index(TrecDocuments::new(reader), &pipeline),
        other => bail!("unknown corpus format {other:?} (expected jsonl or trec)"),
    };
    let index = built.with_context(|| format!("indexing {}", corpus.display()))?;
    log::info!(
        "indexed {} documents, {} terms, {} tokens",
        index.doc_count(),
        index.vocabulary_size(),
        index.total_tokens()
    );
    let mut w = open_output(s.optional(a.out, "out")?.as_deref())?;
    index.write_json(&mut w)?;
    finish(w)
}

pub fn search(s: &Settings, a: SearchArgs) -> Result<()> {
    s.warn_unused(&[
        "index",
        "topics",
        "policy",
        "embedding",
        "format",
        "mu",
        "depth",
        "run_tag",
        "out",
    ]);
    let index_path = s.required::<PathBuf>(a.index, "index")?;
    let index = Index::load(&index_path).with_context(|| format!("loading index {}", index_path.display()))?;
    let topics_path = s.required::<PathBuf>(a.topics, "topics")?;
    let topics =
        read_topics(open_input(&topics_path)?).with_context(|| format!("reading {}", topics_path.display()))?;
    let policy: ExpansionPolicy = s.or_default(a.policy, "policy", "none".to_owned())?.parse()?;
    let config = LmConfig::new(s.or_default(a.mu, "mu", LmConfig::default().mu)?)?;
    let depth = s.or_default(a.depth, "depth", MAX_RUN_DEPTH)?;
    let run_tag = s.or_default(a.run_tag, "run_tag", policy.to_string().replace(':', "-"))?;
    let embedding = match policy {
        ExpansionPolicy::None => None,
        _ => {
            let format = vector_format(s, a.format)?;
            let path = s.optional::<PathBuf>(a.embedding, "embedding")?;
            let path = path.with_context(|| format!("policy {policy} needs --embedding"))?;
            Some(load_model(&path, format)?)
        }
    };
    let mut w = open_output(s.optional(a.out, "out")?.as_deref())?;
    for topic in &topics {
        let terms = index.pipeline().process(&topic.text);
        let ranked = match &embedding {
            None => lm_score(&index, &config, &terms),
            Some(e) => {
                let table = build_translation_table(&terms, &policy, e)?;
                tlm_score(&index, &config, &table, &terms)
            }
        };
        match ranked {
            Ok(ranked) => write_run(&mut w, &topic.id, &ranked, &run_tag, depth)?,
            Err(simthresh::Error::EmptyQuery) => {
                log::warn!("topic {}: no query terms occur in the collection; skipped", topic.id)
            }
            Err(e) => return Err(e).with_context(|| format!("topic {}", topic.id)),
        }
    }
    finish(w)
}

fn load_run(path: &Path) -> Result<Run> {
    Run::parse(open_input(path)?).with_context(|| format!("reading run {}", path.display()))
}

fn run_evaluation(s: &Settings, a: EvalArgs, runs: &[&Run]) -> Result<Vec<Evaluation>> {
    let qrels_path = s.required::<PathBuf>(a.qrels, "qrels")?;
    let qrels =
        Qrels::parse(open_input(&qrels_path)?).with_context(|| format!("reading qrels {}", qrels_path.display()))?;
    let condensed = !s.switch(a.no_condense, "no_condense")?;
    let cutoff = s.or_default(a.cutoff, "cutoff", DEFAULT_CUTOFF)?;
    runs.iter()
        .map(|r| Ok(eval::evaluate(r, &qrels, condensed, cutoff)?))
        .collect()
}

const EVAL_KEYS: [&str; 3] = ["qrels", "no_condense", "cutoff"];

pub fn evaluate(s: &Settings, a: EvaluateArgs) -> Result<()> {
    s.warn_unused(&[&EVAL_KEYS[..], &["run", "out"]].concat());
    let run = load_run(&s.required::<PathBuf>(a.run, "run")?)?;
    let out = s.optional(a.out, "out")?;
    let e = run_evaluation(s, a.eval, &[&run])?.remove(0);
    write_csv(open_output(out.as_deref())?, &report::metric_rows(&e))?;
    Ok(())
}

pub fn compare(s: &Settings, a: CompareArgs) -> Result<()> {
    s.warn_unused(&[&EVAL_KEYS[..], &["run_a", "run_b", "out"]].concat());
    let run_a = load_run(&s.required::<PathBuf>(a.run_a, "run_a")?)?;
    let run_b = load_run(&s.required::<PathBuf>(a.run_b, "run_b")?)?;
    let out = s.optional(a.out, "out")?;
    let evals = run_evaluation(s, a.eval, &[&run_a, &run_b])?;
    let (ea, eb) = (&evals[0], &evals[1]);
    let metrics = BTreeMap::from([("ap", (&ea.ap, &eb.ap)), ("ndcg", (&ea.ndcg, &eb.ndcg))]);
    let mut rows = Vec::new();
    for (name, (x, y)) in metrics {
        let sig = paired_ttest(x, y).with_context(|| format!("comparing {name}"))?;
        rows.push(report::comparison_row(name, x.mean(), y.mean(), &sig));
    }
    write_csv(open_output(out.as_deref())?, &rows)?;
    Ok(())
}

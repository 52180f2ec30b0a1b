use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use quantir::datagen::{
    self, ConceptExpander, PromptExpander, RecordedCompletions, StaticExpansions, Strategies,
    FINANCE_PROMPT, MEDICAL_PROMPT,
};
use quantir::eval::{self, evaluate, mask_corpus, permutation_test, LatencyStats, Metric, Qrels};
use quantir::rankers::{rank, rerank_external, to_run_lines};
use quantir::trec::{read_qrels, read_run, write_run_line, Run};
use quantir::{
    Collection, CorpusRecord, Extractor, IndexConfig, QuantityQuery, RankerConfig, ScoredResult,
    SearchIndex, Sentence,
};
use serde::Deserialize;

use crate::config::Config;
use crate::{
    BatchSearchArgs, BuildArgs, Cli, Command, DatagenArgs, EvalArgs, MaskArgs, OutputFormat,
    RankerArgs, RerankArgs, SearchArgs, SignificanceArgs, UsageError,
};

const INDEX_FILE: &str = "index.json";
const SENTENCES_FILE: &str = "sentences.jsonl";

pub fn run(cli: Cli) -> Result<()> {
    let mut config = Config::load(cli.config.as_deref())?;
    if cli.catalog.is_some() {
        config.catalog = cli.catalog;
    }
    if cli.conditions.is_some() {
        config.conditions = cli.conditions;
    }
    if let Some(seed) = cli.seed {
        config.datagen.seed = seed;
    }
    match cli.command {
        Command::Build(a) => build(&config, a),
        Command::Search(a) => search(config, a),
        Command::BatchSearch(a) => batch_search(config, a),
        Command::Rerank(a) => rerank(config, a),
        Command::Datagen(a) => datagen(config, a),
        Command::Eval(a) => eval_run(a),
        Command::Significance(a) => significance(&config, cli.seed.unwrap_or(0), a),
        Command::Mask(a) => mask(&config, a),
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn read_collection(path: &Path, extractor: &Extractor) -> Result<Collection> {
    let records = quantir::corpus::read_corpus(open(path)?)
        .with_context(|| format!("reading {}", path.display()))?;
    Ok(Collection::ingest(records, extractor)?)
}

fn write_jsonl<T: serde::Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = create(path)?;
    for item in items {
        serde_json::to_writer(&mut w, &item)?;
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

fn build(config: &Config, a: BuildArgs) -> Result<()> {
    let extractor = config.extractor()?;
    let collection = read_collection(&a.corpus, &extractor)?;
    let index_config = IndexConfig {
        bm25: config.bm25,
        units: extractor
            .catalog()
            .units()
            .iter()
            .map(|u| u.canonical_name.clone())
            .collect(),
    };
    let index =
        SearchIndex::build(&collection, index_config).map_err(|e| UsageError(e.to_string()))?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    index.save(a.out.join(INDEX_FILE))?;
    write_jsonl(&a.out.join(SENTENCES_FILE), collection.sentences())?;

    let docs: std::collections::BTreeSet<&str> = collection
        .sentences()
        .iter()
        .map(|s| s.doc_id.as_str())
        .collect();
    let quantities: usize = collection
        .sentences()
        .iter()
        .map(|s| s.quantities.len())
        .sum();
    println!("documents: {}", docs.len());
    println!("sentences: {}", collection.len());
    println!("quantities: {quantities}");
    println!("units: {}", index.quantities.units().count());
    Ok(())
}

fn load_index(dir: &Path) -> Result<SearchIndex> {
    let path = dir.join(INDEX_FILE);
    SearchIndex::load(&path).with_context(|| format!("loading {}", path.display()))
}

fn load_sentences(dir: &Path) -> Result<Collection> {
    let path = dir.join(SENTENCES_FILE);
    let mut sentences = Vec::new();
    for (i, line) in open(&path)?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let s: Sentence =
            serde_json::from_str(&line).with_context(|| format!("{}:{}", path.display(), i + 1))?;
        sentences.push(s);
    }
    Ok(Collection::new(sentences)?)
}

#[derive(Deserialize)]
struct QueryLine {
    qid: String,
    text: String,
}

/// JSON lines carrying `qid` and `text`, or `qid<TAB>text` lines.
fn read_queries(path: &Path) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = || format!("{}:{}", path.display(), i + 1);
        if line.starts_with('{') {
            let q: QueryLine = serde_json::from_str(line).with_context(at)?;
            out.push((q.qid, q.text));
        } else {
            let Some((qid, text)) = line.split_once('\t') else {
                bail!("{}: expected `qid<TAB>text`", at());
            };
            out.push((qid.trim().to_string(), text.trim().to_string()));
        }
    }
    Ok(out)
}

fn ranker_config(
    config: &mut Config,
    extractor: &Extractor,
    alpha: Option<f64>,
    phi: Option<String>,
    depth: Option<usize>,
) -> Result<RankerConfig> {
    if let Some(a) = alpha {
        config.ranker.alpha = a;
    }
    if let Some(p) = phi {
        config.ranker.phi = p;
    }
    if let Some(d) = depth {
        config.ranker.depth = d;
    }
    config.ranker(extractor)
}

fn header(w: &mut impl Write, command: &str, config: &Config) -> Result<()> {
    writeln!(
        w,
        "# quantir {command} config={}",
        serde_json::to_string(config)?
    )?;
    Ok(())
}

fn describe(q: &QuantityQuery) -> String {
    let terms = q.terms.join(" ");
    match &q.constraint {
        Some(c) => format!(
            "({}, {}, {}) terms: {terms}",
            c.condition.as_str(),
            c.quantity.value,
            c.quantity.unit
        ),
        None => format!("(no quantity) terms: {terms}"),
    }
}

fn write_results(w: &mut impl Write, qid: &str, results: &[ScoredResult]) -> Result<()> {
    for line in to_run_lines(qid, results) {
        write_run_line(w, &line)?;
    }
    Ok(())
}

fn search(mut config: Config, a: SearchArgs) -> Result<()> {
    let extractor = config.extractor()?;
    let RankerArgs { ranker, alpha, phi } = a.ranker;
    let rc = ranker_config(&mut config, &extractor, alpha, phi, Some(a.k))?;
    let index = load_index(&a.index)?;
    let query = extractor.parse_query("q1", &a.query);
    let results = rank(ranker, &index, &query, &rc).expect("first-stage ranker");

    let stdout = io::stdout();
    let mut w = stdout.lock();
    writeln!(w, "# parsed: {}", describe(&query))?;
    match a.format {
        OutputFormat::Trec => {
            header(&mut w, ranker.as_str(), &config)?;
            write_results(&mut w, &query.qid, &results)?;
        }
        OutputFormat::Text => {
            let collection = load_sentences(&a.index)?;
            for (i, r) in results.iter().enumerate() {
                let s = collection.get(&r.sent_id);
                writeln!(
                    w,
                    "{:>3}. {}  score {:.4} = term {:.4} + qs {:.4}",
                    i + 1,
                    r.sent_id,
                    r.score,
                    r.term_score,
                    r.quantity_score
                )?;
                if let Some(s) = s {
                    writeln!(w, "     {}", s.text)?;
                    if let Some(c) = &query.constraint {
                        for q in s.quantities.iter().filter(|q| q.unit == c.quantity.unit) {
                            writeln!(
                                w,
                                "     matched: {} ({} {})",
                                q.span.slice(&s.text),
                                q.value,
                                q.unit
                            )?;
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn batch_search(mut config: Config, a: BatchSearchArgs) -> Result<()> {
    let extractor = config.extractor()?;
    let RankerArgs { ranker, alpha, phi } = a.ranker;
    let rc = ranker_config(&mut config, &extractor, alpha, phi, a.depth)?;
    let index = load_index(&a.index)?;
    let queries = read_queries(&a.queries)?;

    if let Some((qid, text)) = queries.first() {
        rank(ranker, &index, &extractor.parse_query(qid, text), &rc);
    }
    let mut w = create(&a.out)?;
    header(&mut w, ranker.as_str(), &config)?;
    let mut latencies = Vec::with_capacity(queries.len());
    for (qid, text) in &queries {
        let start = Instant::now();
        let query = extractor.parse_query(qid, text);
        let results = rank(ranker, &index, &query, &rc).expect("first-stage ranker");
        latencies.push((qid.as_str(), start.elapsed().as_secs_f64() * 1e3));
        write_results(&mut w, qid, &results)?;
    }
    w.flush()?;
    if let Some(path) = &a.latency {
        let mut lw = create(path)?;
        for (qid, ms) in &latencies {
            writeln!(lw, "{qid}\t{ms:.3}")?;
        }
        lw.flush()?;
    }
    let ms: Vec<f64> = latencies.iter().map(|(_, m)| *m).collect();
    if let Some(l) = LatencyStats::from_samples(&ms) {
        eprintln!(
            "{} queries, mean {:.3} ms, p95 {:.3} ms",
            l.queries, l.mean_ms, l.p95_ms
        );
    }
    Ok(())
}

fn rerank(mut config: Config, a: RerankArgs) -> Result<()> {
    let extractor = config.extractor()?;
    let rc = ranker_config(&mut config, &extractor, a.alpha, a.phi, a.depth)?;
    let index = load_index(&a.index)?;
    let run = read_run(open(&a.run)?).with_context(|| format!("reading {}", a.run.display()))?;
    let queries: BTreeMap<String, String> = read_queries(&a.queries)?.into_iter().collect();

    let mut w = create(&a.out)?;
    header(
        &mut w,
        &format!(
            "rerank-{}",
            serde_json::to_value(a.mode)?.as_str().unwrap_or("")
        ),
        &config,
    )?;
    for (qid, lines) in &run {
        let Some(text) = queries.get(qid) else {
            log::warn!("query {qid} is in the run but not in the queries file, skipped");
            continue;
        };
        let candidates: Vec<_> = lines
            .iter()
            .filter(|l| {
                let known = index.terms.position(&l.sent_id).is_some();
                if !known {
                    log::warn!(
                        "query {qid}: sentence {} not in the collection, dropped",
                        l.sent_id
                    );
                }
                known
            })
            .cloned()
            .collect();
        let query = extractor.parse_query(qid, text);
        write_results(
            &mut w,
            qid,
            &rerank_external(&index, &query, &candidates, a.mode, &rc),
        )?;
    }
    w.flush()?;
    Ok(())
}

fn parse_strategies(s: &str) -> Result<Strategies> {
    let mut out = Strategies {
        original: false,
        unit_permutation: false,
        value_permutation: false,
        concept_expansion: false,
    };
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part {
            "original" => out.original = true,
            "unit" => out.unit_permutation = true,
            "value" => out.value_permutation = true,
            "expansion" => out.concept_expansion = true,
            other => bail!(UsageError(format!("unknown strategy `{other}`"))),
        }
    }
    Ok(out)
}

fn datagen(mut config: Config, a: DatagenArgs) -> Result<()> {
    if let Some(s) = &a.strategies {
        config.datagen.strategies = parse_strategies(s)?;
    }
    if let Some(n) = a.sample_size {
        config.datagen.sample_size = n;
    }
    config
        .datagen
        .validate()
        .map_err(|e| UsageError(e.to_string()))?;
    let extractor = config.extractor()?;
    let collection = read_collection(&a.corpus, &extractor)?;

    let expander: Box<dyn ConceptExpander> = match (&a.expansions, &a.completions, &a.prompt) {
        (Some(p), _, _) => Box::new(StaticExpansions::from_path(p)?),
        (None, Some(c), Some(prompt)) => {
            let template = match prompt.as_str() {
                "finance" => FINANCE_PROMPT.to_string(),
                "medical" => MEDICAL_PROMPT.to_string(),
                path => fs::read_to_string(path).with_context(|| format!("reading {path}"))?,
            };
            let client = RecordedCompletions::from_path(c)?;
            Box::new(PromptExpander::new(template, client).map_err(|e| UsageError(e.to_string()))?)
        }
        _ => Box::new(StaticExpansions::starter()),
    };

    let out = datagen::generate(&collection, &extractor, expander.as_ref(), &config.datagen)?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut w = create(&a.out.join("queries.jsonl"))?;
    datagen::write_queries(&mut w, &out.queries)?;
    w.flush()?;
    let mut w = create(&a.out.join("triples.jsonl"))?;
    datagen::write_triples(&mut w, &out.triples)?;
    w.flush()?;

    let s = &out.stats;
    println!("seed: {}", config.datagen.seed);
    println!(
        "concept/unit pairs: {} ({} without concept)",
        s.pairs, s.pairs_without_concept
    );
    println!(
        "queries: {} ({} dropped, {} skipped)",
        out.queries.len(),
        s.dropped_queries,
        s.skipped_queries
    );
    for (p, n) in &s.pairing.triples {
        println!(
            "triples {}: {n}",
            serde_json::to_value(p)?.as_str().unwrap_or("")
        );
    }
    println!("dropped samples: {}", s.dropped_samples);
    println!("unpaired positives: {}", s.pairing.unpaired_positives);
    Ok(())
}

fn load_run(path: &Path) -> Result<Run> {
    read_run(open(path)?).with_context(|| format!("reading {}", path.display()))
}

fn load_qrels(path: &Path) -> Result<Qrels> {
    let lines = read_qrels(open(path)?).with_context(|| format!("reading {}", path.display()))?;
    Ok(Qrels::from_lines(&lines))
}

fn eval_run(a: EvalArgs) -> Result<()> {
    let run = load_run(&a.run)?;
    let qrels = load_qrels(&a.qrels)?;
    if let Some(dir) = &a.index {
        let index = load_index(dir)?;
        for (qid, sid) in qrels.unresolved(|s| index.terms.position(s).is_some()) {
            log::warn!("qrels for {qid}: sentence {sid} not in the collection");
        }
    }
    let mut metrics = evaluate(&run, &qrels);
    if let Some(path) = &a.latency {
        let l = eval::read_latencies(open(path)?)
            .with_context(|| format!("reading {}", path.display()))?;
        let ms: Vec<f64> = l.into_iter().map(|(_, ms)| ms).collect();
        metrics.latency = LatencyStats::from_samples(&ms);
    }

    let stdout = io::stdout();
    let mut w = stdout.lock();
    if a.json {
        serde_json::to_writer_pretty(&mut w, &metrics)?;
        writeln!(w)?;
        return Ok(());
    }
    let width = metrics
        .per_query
        .iter()
        .map(|q| q.qid.len())
        .max()
        .unwrap_or(0)
        .max(3);
    writeln!(
        w,
        "{:<width$}  {:>7}  {:>7}  {:>7}  {:>7}",
        "qid", "P@10", "MRR@10", "NDCG@10", "R@100"
    )?;
    for q in &metrics.per_query {
        let r = q.r100.map_or("-".to_string(), |r| format!("{r:.4}"));
        writeln!(
            w,
            "{:<width$}  {:>7.4}  {:>7.4}  {:>7.4}  {:>7}",
            q.qid, q.p10, q.mrr10, q.ndcg10, r
        )?;
    }
    writeln!(w)?;
    let name = a
        .run
        .file_name()
        .map_or("run".into(), |n| n.to_string_lossy());
    write!(w, "{}", eval::format_table(&[(name.as_ref(), &metrics)]))?;
    Ok(())
}

fn significance(config: &Config, seed: u64, a: SignificanceArgs) -> Result<()> {
    let metrics: Vec<Metric> = match &a.metric {
        Some(m) => vec![m.parse().map_err(UsageError)?],
        None => Metric::ALL.to_vec(),
    };
    let iterations = a.iterations.unwrap_or(config.eval.permutations);
    if iterations == 0 {
        bail!(UsageError("iterations must be positive".into()));
    }
    let qrels = load_qrels(&a.qrels)?;
    let ma = evaluate(&load_run(&a.run_a)?, &qrels);
    let mb = evaluate(&load_run(&a.run_b)?, &qrels);
    println!("{:<8}  {:>8}  {:>8}  {:>8}", "metric", "A", "B", "p");
    for m in metrics {
        let (va, vb) = (ma.values(m), mb.values(m));
        let mean = |v: &BTreeMap<String, f64>| {
            if v.is_empty() {
                0.0
            } else {
                v.values().sum::<f64>() / v.len() as f64
            }
        };
        let p = permutation_test(&va, &vb, iterations, seed)?;
        println!(
            "{:<8}  {:>8.4}  {:>8.4}  {:>8.4}",
            m.name(),
            mean(&va),
            mean(&vb),
            p
        );
    }
    println!(
        "queries: {}, iterations: {iterations}, seed: {seed}",
        qrels.len()
    );
    Ok(())
}

fn mask(config: &Config, a: MaskArgs) -> Result<()> {
    let extractor = config.extractor()?;
    let collection = read_collection(&a.corpus, &extractor)?;
    let masked = mask_corpus(collection.sentences(), a.mode, &extractor);
    write_jsonl(
        &a.out,
        masked.iter().map(|s| CorpusRecord::Sentence {
            sent_id: s.sent_id.clone(),
            text: s.text.clone(),
            doc_id: Some(s.doc_id.clone()),
        }),
    )?;
    println!("masked {} sentences", masked.len());
    Ok(())
}

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use serde_json::{json, Value};
use shaftlab_core::{
    analyze, verify_all, AnalysisOptions, Level, Reliability, Reports, ShaftSpec, SolverKind, VerificationConfig,
};
use shaftlab_data::factorium::{
    curriculum_stream, dataset_stats, generate_dataset, read_jsonl, read_shards, CurriculumSchedule, DatasetRecord,
    FactoriumError, GenerationConfig, Manifest, Rejection, REJECTIONS_FILE,
};
use shaftlab_data::harmony::{self, extract_quantities, format_quantity, Channel};
use shaftlab_data::numfmt::fmt6;
use shaftlab_data::tokenizer::{self, train_bpe, train_bpe_lenient};
use shaftlab_eval::grounding::check_grounding_text;
use shaftlab_eval::{
    evaluate, expected_harm, monotropy_index, ood_probe_set, param_breakdown, parse_outputs, AllocationProfile,
    ArchConfig, EvalOptions, HarmProfile,
};

use crate::{invalid, CmdResult, Failure, Global};

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| invalid(anyhow!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("{}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("{}", path.display()))?;
    Ok(())
}

/// Input problems exit with 1, everything else with 2.
fn factorium(path: &Path, e: FactoriumError) -> Failure {
    let err = anyhow!("{}: {e}", path.display());
    match e {
        FactoriumError::Config(_)
        | FactoriumError::Schedule(_)
        | FactoriumError::Format(_)
        | FactoriumError::PoolTooSmall { .. } => invalid(err),
        _ => Failure::from(err),
    }
}

/// Writes to stdout. A closed pipe (`shaftlab ... | head`) ends the process
/// quietly instead of panicking.
fn emit(s: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(s.as_bytes()).and_then(|()| out.flush()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: stdout: {e}");
        std::process::exit(2);
    }
}

macro_rules! out {
    ($($t:tt)*) => { emit(&format!($($t)*)) };
}

macro_rules! outln {
    ($($t:tt)*) => { emit(&(format!($($t)*) + "\n")) };
}

fn print_json(v: &Value) {
    outln!("{}", serde_json::to_string_pretty(v).expect("json value serializes"));
}

fn tolerances(g: &Global) -> VerificationConfig {
    g.tolerance_profile.map(|p| p.config()).unwrap_or_default()
}

pub fn solve(
    g: &Global,
    path: &Path,
    level: Level,
    reliability: Option<&str>,
    temperature: Option<f64>,
    grid: usize,
    oracle: bool,
) -> CmdResult {
    let spec = ShaftSpec::from_json(&read(path)?).map_err(|e| invalid(anyhow!("{}: {e}", path.display())))?;
    let mut options = AnalysisOptions::new(level);
    options.n_grid = grid;
    if let Some(r) = reliability {
        let r = Reliability::parse(r).ok_or_else(|| invalid(anyhow!("unknown reliability {r:?}")))?;
        options.reliability = Some(r);
    }
    options.temperature_c = temperature;
    if level == Level::Doctor {
        options.reliability.get_or_insert(Reliability::R50);
        options.temperature_c.get_or_insert(20.0);
    }
    let solver = if oracle { SolverKind::Oracle } else { SolverKind::ClosedForm };
    let analysis = analyze(&spec, &options, solver)
        .map_err(|e| invalid(anyhow!("{}: spec {}: {e}", path.display(), spec.id)))?;
    let quantities = analysis.quantities(&spec);
    if g.json {
        print_json(&json!({
            "spec_id": spec.id,
            "level": level,
            "solver": if oracle { "oracle" } else { "closed_form" },
            "quantities": quantities,
        }));
    } else {
        for q in &quantities {
            outln!("{}", format_quantity(q));
        }
    }
    Ok(())
}

pub fn generate(g: &Global, config_file: Option<&Path>) -> CmdResult {
    let path = config_file.or(g.config.as_deref());
    let mut config = match path {
        Some(p) => GenerationConfig::from_toml(&read(p)?).map_err(|e| factorium(p, e))?,
        None => GenerationConfig::default(),
    };
    if let Some(seed) = g.seed {
        config.seed = seed;
    }
    if let Some(locale) = g.locale {
        config.locale = locale;
    }
    if let Some(p) = g.tolerance_profile {
        config.tolerances = p.config();
    }
    let label = path.map_or_else(|| PathBuf::from("<default config>"), Path::to_path_buf);
    config.validate().map_err(|e| factorium(&label, e))?;
    let out = g.out.clone().unwrap_or_else(|| PathBuf::from("dataset"));
    let (manifest, generated) = generate_dataset(&config, &out, g.jobs).map_err(|e| factorium(&label, e))?;
    if g.json {
        print_json(&json!({
            "out": out.display().to_string(),
            "seed": manifest.seed,
            "config_hash": manifest.config_hash,
            "counts": manifest.counts,
            "tokens": manifest.tokens,
            "shards": manifest.shards.len(),
            "rejections": manifest.rejections,
            "vocabulary": manifest.vocabulary,
        }));
    } else {
        out!("{}", dataset_stats(&generated.records, &generated.rejections).table());
        outln!(
            "wrote {} records in {} shards to {}",
            generated.records.len(),
            manifest.shards.len(),
            out.display()
        );
    }
    Ok(())
}

/// Re-runs analysis, the six verification levels, the parser and the
/// grounding check on one stored record.
fn check_record(r: &DatasetRecord, tol: &VerificationConfig) -> Result<(), String> {
    let a = analyze(&r.spec, &r.options, SolverKind::ClosedForm).map_err(|e| format!("analysis: {e}"))?;
    let reports = Reports {
        stress: a.stress,
        fatigue: a.fatigue,
    };
    let report = verify_all(&r.spec, &a.fields, &reports, tol);
    if let Some(f) = report.first_failure() {
        return Err(format!("verification level {} failed: {}", f.level.as_str(), f.detail));
    }
    harmony::parse(&r.harmony_text).map_err(|e| format!("rendered text: {e}"))?;
    check_grounding_text(&r.harmony_text, shaftlab_eval::DEFAULT_REL_TOL, SolverKind::ClosedForm)
        .map_err(|e| format!("grounding: {e}"))
}

pub fn verify(g: &Global, shard: &Path) -> CmdResult {
    let records: Vec<DatasetRecord> = read_jsonl(shard).map_err(|e| factorium(shard, e))?;
    let tol = tolerances(g);
    let failures: Vec<(String, String)> = records
        .iter()
        .filter_map(|r| check_record(r, &tol).err().map(|e| (r.id.clone(), e)))
        .collect();
    if g.json {
        print_json(&json!({
            "file": shard.display().to_string(),
            "records": records.len(),
            "passed": records.len() - failures.len(),
            "failures": failures.iter().map(|(id, v)| json!({"id": id, "violation": v})).collect::<Vec<_>>(),
        }));
    } else {
        outln!(
            "{}: {}/{} records pass",
            shard.display(),
            records.len() - failures.len(),
            records.len()
        );
    }
    match failures.first() {
        Some((id, v)) => Err(invalid(anyhow!(
            "{}: record {id}: {v} ({} failing)",
            shard.display(),
            failures.len()
        ))),
        None => Ok(()),
    }
}

pub fn render(g: &Global, path: &Path) -> CmdResult {
    let record: DatasetRecord =
        serde_json::from_str(read(path)?.trim()).map_err(|e| invalid(anyhow!("{}: {e}", path.display())))?;
    let text = record
        .render(&tolerances(g))
        .map_err(|e| invalid(anyhow!("{}: record {}: {e}", path.display(), record.id)))?;
    match (&g.out, g.json) {
        (Some(out), _) => write(out, &text)?,
        (None, true) => print_json(&json!({"id": record.id, "text": text})),
        (None, false) => out!("{text}"),
    }
    Ok(())
}

pub fn parse(g: &Global, path: &Path) -> CmdResult {
    let text = read(path)?;
    let doc = harmony::parse(&text).map_err(|e| invalid(anyhow!("{}: {e}", path.display())))?;
    let quantities = extract_quantities(&doc).map_err(|e| invalid(anyhow!("{}: {e}", path.display())))?;
    if g.json {
        let channels: serde_json::Map<String, Value> = doc
            .channels
            .iter()
            .map(|(c, body)| (format!("{c:?}").to_lowercase(), Value::String(body.clone())))
            .collect();
        print_json(&json!({
            "prompt": doc.prompt,
            "channels": channels,
            "quantities": quantities,
        }));
    } else {
        outln!("{}: valid, {} channels", path.display(), Channel::ALL.len());
        for q in &quantities {
            if q.unit.is_empty() {
                outln!("{} = {}", q.label, fmt6(q.value));
            } else {
                outln!("{} = {} {}", q.label, fmt6(q.value), q.unit);
            }
        }
    }
    Ok(())
}

fn corpus_documents(paths: &[PathBuf]) -> Result<Vec<String>, Failure> {
    let mut docs = Vec::new();
    for p in paths {
        let text = read(p)?;
        if p.extension().is_some_and(|e| e == "jsonl") {
            for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
                let v: Value =
                    serde_json::from_str(line).map_err(|e| invalid(anyhow!("{}:{}: {e}", p.display(), i + 1)))?;
                let doc = v
                    .get("harmony_text")
                    .or_else(|| v.get("text"))
                    .and_then(Value::as_str)
                    .ok_or_else(|| invalid(anyhow!("{}:{}: no harmony_text or text field", p.display(), i + 1)))?;
                docs.push(doc.to_string());
            }
        } else {
            docs.push(text);
        }
    }
    Ok(docs)
}

pub fn tokenizer_train(g: &Global, corpus: &[PathBuf], size: usize, strict: bool) -> CmdResult {
    let docs = corpus_documents(corpus)?;
    let refs: Vec<&str> = docs.iter().map(String::as_str).collect();
    let vocab = if strict {
        train_bpe(refs, size)
    } else {
        train_bpe_lenient(refs, size)
    }
    .map_err(invalid)?;
    let out = g.out.clone().unwrap_or_else(|| PathBuf::from("vocab"));
    tokenizer::save(&vocab, &out)?;
    if g.json {
        print_json(&json!({
            "out": out.display().to_string(),
            "documents": docs.len(),
            "bpe_size": vocab.bpe_size(),
            "bpe_defined": vocab.bpe_len(),
            "vocabulary": vocab.len(),
            "complete": vocab.is_complete(),
        }));
    } else {
        outln!(
            "{} documents: {} of {} BPE tokens, {} ids in total; saved to {}",
            docs.len(),
            vocab.bpe_len(),
            vocab.bpe_size(),
            vocab.len(),
            out.display()
        );
    }
    Ok(())
}

fn load_vocab(dir: &Path) -> Result<tokenizer::Vocabulary, Failure> {
    tokenizer::load(dir).map_err(|e| invalid(anyhow!("{}: {e}", dir.display())))
}

pub fn tokenizer_encode(g: &Global, vocab: &Path, text: &Path) -> CmdResult {
    let v = load_vocab(vocab)?;
    let ids = v.encode(&read(text)?);
    if g.json {
        print_json(&json!({"count": ids.len(), "ids": ids}));
    } else {
        let line: Vec<String> = ids.iter().map(u32::to_string).collect();
        outln!("{}", line.join(" "));
    }
    Ok(())
}

pub fn tokenizer_decode(g: &Global, vocab: &Path, ids_path: &Path) -> CmdResult {
    let v = load_vocab(vocab)?;
    let raw = read(ids_path)?;
    let ids: Vec<u32> = if raw.trim_start().starts_with('[') {
        serde_json::from_str(&raw).map_err(|e| invalid(anyhow!("{}: {e}", ids_path.display())))?
    } else {
        raw.split_whitespace()
            .map(|t| t.parse().map_err(|_| invalid(anyhow!("{}: bad token id {t:?}", ids_path.display()))))
            .collect::<Result<_, _>>()?
    };
    let text = v
        .decode(&ids)
        .map_err(|e| invalid(anyhow!("{}: {e}", ids_path.display())))?;
    if g.json {
        print_json(&json!({"text": text}));
    } else {
        out!("{text}");
    }
    Ok(())
}

fn load_manifest(path: &Path) -> Result<Manifest, Failure> {
    Manifest::from_json(&read(path)?).map_err(|e| factorium(path, e))
}

pub fn curriculum(g: &Global, manifest_path: &Path, schedule: Option<&Path>) -> CmdResult {
    let manifest = load_manifest(manifest_path)?;
    let schedule = match schedule {
        Some(p) => CurriculumSchedule::from_json(&read(p)?).map_err(|e| factorium(p, e))?,
        None => CurriculumSchedule::default(),
    };
    let seed = g.seed.unwrap_or(manifest.seed);
    let stream = curriculum_stream(&manifest, &schedule, seed).map_err(|e| factorium(manifest_path, e))?;
    let jsonl: String = stream
        .iter()
        .map(|e| serde_json::to_string(e).expect("entry serializes") + "\n")
        .collect();
    if let Some(out) = &g.out {
        write(out, &jsonl)?;
    }
    let phases: Vec<Value> = schedule
        .phases
        .iter()
        .map(|p| {
            let of = |l: Level| stream.iter().filter(|e| e.phase == p.name && e.level == l).count();
            json!({
                "name": p.name,
                "total": p.total,
                "bachelor": of(Level::Bachelor),
                "master": of(Level::Master),
                "doctor": of(Level::Doctor),
            })
        })
        .collect();
    if g.json {
        print_json(&json!({"seed": seed, "phases": phases, "entries": stream}));
    } else if g.out.is_some() {
        outln!("{:<16}{:>8}{:>10}{:>8}{:>8}", "phase", "total", "bachelor", "master", "doctor");
        for p in &phases {
            outln!(
                "{:<16}{:>8}{:>10}{:>8}{:>8}",
                p["name"].as_str().unwrap_or_default(),
                p["total"],
                p["bachelor"],
                p["master"],
                p["doctor"]
            );
        }
    } else {
        out!("{jsonl}");
    }
    Ok(())
}

pub fn eval(g: &Global, outputs: &Path, vocab: Option<&Path>, rel_tol: f64) -> CmdResult {
    let records = parse_outputs(&read(outputs)?).map_err(|e| invalid(anyhow!("{}: {e}", outputs.display())))?;
    let vocab = vocab.map(load_vocab).transpose()?;
    let opts = EvalOptions {
        rel_tol,
        ..EvalOptions::default()
    };
    let report = evaluate(&records, &opts, vocab.as_ref());
    if let Some(dir) = &g.out {
        write(&dir.join("metrics.json"), &(report.to_json() + "\n"))?;
        write(&dir.join("diagnostics.jsonl"), &report.diagnostics_jsonl())?;
    }
    if g.json {
        outln!("{}", report.to_json());
    } else {
        out!("{}", report.table());
        if let Some(d) = report.diagnostics.first() {
            outln!(
                "{} diagnostics; first: {} {}: {}",
                report.diagnostics.len(),
                d.id,
                d.metric,
                d.message
            );
        }
    }
    Ok(())
}

pub fn harm(g: &Global, path: &Path) -> CmdResult {
    let profile = HarmProfile::from_json(&read(path)?).map_err(|e| invalid(anyhow!("{}: {e}", path.display())))?;
    let e = expected_harm(&profile);
    if g.json {
        print_json(&json!({"expected_harm": e, "domains": profile.domains.len()}));
    } else {
        outln!("E[H] = {e}");
    }
    Ok(())
}

pub fn monotropy(g: &Global, path: &Path, delta: f64, rho: f64) -> CmdResult {
    let alloc = AllocationProfile::from_json(&read(path)?).map_err(|e| invalid(anyhow!("{}: {e}", path.display())))?;
    let m = monotropy_index(&alloc, delta, rho).map_err(|e| invalid(anyhow!("{}: {e}", path.display())))?;
    if g.json {
        print_json(&serde_json::to_value(&m).expect("index serializes"));
    } else {
        outln!(
            "k_min = {} of {} domains (ratio {:.4}); {}",
            m.k_min,
            alloc.domains.len(),
            m.ratio,
            if m.is_monotropic { "monotropic" } else { "not monotropic" }
        );
    }
    Ok(())
}

pub fn params(g: &Global, path: Option<&Path>) -> CmdResult {
    let arch = match path {
        Some(p) => ArchConfig::from_json(&read(p)?).map_err(|e| invalid(anyhow!("{}: {e}", p.display())))?,
        None => ArchConfig::reference(),
    };
    let b = param_breakdown(&arch);
    if g.json {
        print_json(&json!({"arch": arch, "breakdown": b}));
    } else {
        for (name, v) in [
            ("token embedding", b.token_embedding),
            ("positions", b.positions),
            ("attention / layer", b.attention_per_layer),
            ("feed-forward / layer", b.feed_forward_per_layer),
            ("norms / layer", b.norms_per_layer),
            ("layers total", b.layers_total),
            ("final norm", b.final_norm),
            ("output head", b.output_head),
            ("total", b.total),
        ] {
            outln!("{name:<22}{v:>14}");
        }
    }
    Ok(())
}

pub fn stats(g: &Global, manifest_path: &Path) -> CmdResult {
    let manifest = load_manifest(manifest_path)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let records = read_shards(dir, &manifest).map_err(|e| factorium(manifest_path, e))?;
    let rejections_path = dir.join(REJECTIONS_FILE);
    let rejections: Vec<Rejection> = if rejections_path.exists() {
        read_jsonl(&rejections_path).map_err(|e| factorium(&rejections_path, e))?
    } else {
        Vec::new()
    };
    let s = dataset_stats(&records, &rejections);
    if g.json {
        print_json(&serde_json::to_value(&s).expect("stats serialize"));
    } else {
        out!("{}", s.table());
    }
    Ok(())
}

pub fn probes(g: &Global) -> CmdResult {
    let set = ood_probe_set(g.seed.unwrap_or(0));
    if g.json {
        print_json(&serde_json::to_value(&set).expect("probes serialize"));
    } else {
        for p in &set {
            outln!("{}\t{}", p.id, p.text);
        }
    }
    Ok(())
}

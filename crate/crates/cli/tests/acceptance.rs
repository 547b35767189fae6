//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.
//!
//! The desk dataset (200 records per level, seed 42) is produced by running
//! the `shaftlab generate` binary twice; the first run doubles as the corpus
//! for the data-side criteria.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use shaftlab_core::solver::ClosedForm;
use shaftlab_core::{
    analyze, numerical_oracle, solve, verify_all, Level, Material, PointLoad, Reports, ShaftSpec, SolverKind,
    SurfaceFinish, SPEC_SCHEMA_VERSION,
};
use shaftlab_data::factorium::rng::substream;
use shaftlab_data::factorium::{
    apportion, curriculum_stream, read_jsonl, read_shards, sample_parameters, CurriculumSchedule, DatasetRecord,
    GenerationConfig, Manifest, Rejection, MANIFEST_FILE, REJECTIONS_FILE, VOCAB_DIR,
};
use shaftlab_data::harmony::{compose, parse, render_doc, ComposeInput};
use shaftlab_data::tokenizer::{self, MAX_SEQUENCE_TOKENS};
use shaftlab_eval::corruption::corruption_suite;
use shaftlab_eval::{
    detect_degenerate, evaluate, expected_harm, monotropy_index, param_breakdown, perplexity, AllocationProfile,
    ArchConfig, EvalOptions, HarmDomain, HarmProfile, LogBase, ModelOutputRecord, TokenLogprob,
};

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

struct Desk {
    dir: PathBuf,
    manifest: Manifest,
    records: Vec<DatasetRecord>,
}

fn run_generate(config: &Path, out: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_shaftlab"))
        .arg("generate")
        .arg(config)
        .arg("--out")
        .arg(out)
        .arg("--json")
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(String::from_utf8_lossy(&status.stderr).into_owned());
    }
    Ok(())
}

fn dir_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let name = p.strip_prefix(dir).unwrap().display().to_string();
                out.insert(name, fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn steel() -> Material {
    Material {
        name: "steel".into(),
        youngs_modulus: 200e9,
        poisson_ratio: 0.3,
        yield_strength: 350e6,
        ultimate_strength: 600e6,
        surface_finish: SurfaceFinish::Machined,
    }
}

fn midspan(length: f64, diameter: f64, load: f64) -> ShaftSpec {
    ShaftSpec {
        schema_version: SPEC_SCHEMA_VERSION,
        id: "midspan".into(),
        length,
        diameter,
        loads: vec![PointLoad {
            position: length / 2.0,
            magnitude: load,
        }],
        torque: None,
        material: steel(),
    }
}

fn c1_solver_vs_oracle() -> Outcome {
    let cfg = GenerationConfig::default();
    let start = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let level = Level::ALL[(i % 3) as usize];
        let mut rng = substream(2024, &[i]);
        let (spec, _) = sample_parameters(level, &mut rng, &cfg, &format!("rand-{i}")).map_err(|e| e.to_string())?;
        let cf = solve(&spec, 2048).map_err(|e| e.to_string())?;
        let or = numerical_oracle(&spec, 2048).map_err(|e| e.to_string())?;
        let peak = cf.deflection.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        let gap = cf
            .deflection
            .iter()
            .zip(&or.deflection)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        worst = worst.max(gap / peak);
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst < 1e-3 && secs < 30.0,
        format!("max relative gap {worst:.3e} over 100 specs in {secs:.2} s"),
    )
}

fn c2_benchmark() -> Outcome {
    let (l, d, p) = (1.0, 0.05, 1000.0);
    let spec = midspan(l, d, p);
    let (e, nu) = (200e9, 0.3);
    let pi = std::f64::consts::PI;
    let i = pi * d.powi(4) / 64.0;
    let a = pi * d * d / 4.0;
    let kappa = 6.0 * (1.0 + nu) / (7.0 + 6.0 * nu);
    let g = e / (2.0 * (1.0 + nu));
    let bending = p * l.powi(3) / (48.0 * e * i);
    let shear = p * l / (4.0 * kappa * g * a);
    let want = bending + shear;
    let got = ClosedForm::new(&spec).map_err(|e| e.to_string())?.deflection(l / 2.0);
    let rel = (got - want).abs() / want;
    check(
        rel < 1e-6,
        format!("w_max {got:.6e} m vs {bending:.4e} + {shear:.3e} m (rel {rel:.1e})"),
    )
}

fn c3_conservation(desk: &Desk) -> Outcome {
    let mut worst_balance = 0.0f64;
    let mut worst_boundary = 0.0f64;
    for r in &desk.records {
        let f = solve(&r.spec, r.options.n_grid).map_err(|e| format!("{}: {e}", r.id))?;
        let total: f64 = r.spec.loads.iter().map(|l| l.magnitude).sum();
        let lever: f64 = r.spec.loads.iter().map(|l| l.magnitude * l.position).sum();
        let (r1, r2) = (r.reactions.left, r.reactions.right);
        worst_balance = worst_balance
            .max((r1 + r2 - total).abs() / total)
            .max((r2 * r.spec.length - lever).abs() / lever);
        let m_peak = f.moment.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let w_peak = f.deflection.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let n = f.len() - 1;
        worst_boundary = worst_boundary
            .max(f.moment[0].abs().max(f.moment[n].abs()) / m_peak)
            .max(f.deflection[0].abs().max(f.deflection[n].abs()) / w_peak);
    }
    check(
        worst_balance <= 1e-9 && worst_boundary <= 1e-9,
        format!(
            "{} records; worst balance {worst_balance:.1e}, worst boundary {worst_boundary:.1e}",
            desk.records.len()
        ),
    )
}

fn c4_slender_limit() -> Outcome {
    let mut fractions = Vec::new();
    let mut gap_at_001 = f64::NAN;
    for ratio in [0.1, 0.05, 0.02, 0.01] {
        let spec = midspan(1.0, ratio, 1000.0);
        let cf = ClosedForm::new(&spec).map_err(|e| e.to_string())?;
        let total = cf.deflection(0.5);
        let eb = cf.bending_deflection(0.5);
        fractions.push((total - eb) / total);
        if ratio == 0.01 {
            gap_at_001 = (total - eb).abs() / eb;
        }
    }
    let decreasing = fractions.windows(2).all(|w| w[1] < w[0]);
    check(
        gap_at_001 < 0.01 && decreasing,
        format!(
            "TB vs EB at d/L=0.01: {gap_at_001:.2e}; shear fractions {}",
            fractions.iter().map(|f| format!("{f:.3e}")).collect::<Vec<_>>().join(" > ")
        ),
    )
}

fn c5_table_analogue(desk: &Desk) -> Outcome {
    let outputs: Vec<ModelOutputRecord> = desk.records.iter().map(ModelOutputRecord::from_dataset).collect();
    let report = evaluate(&outputs, &EvalOptions::default(), None);
    let a = &report.all;
    let per_level = [&report.bachelor, &report.master, &report.doctor]
        .iter()
        .all(|c| c.records == 200);
    check(
        per_level && report.is_perfect() && report.options.rel_tol == 1e-4,
        format!(
            "{} records: validity {:?}, grounding {:?}, stop {:?}",
            a.records, a.structural_validity, a.numerical_grounding, a.correct_stop_token
        ),
    )
}

fn c6_round_trip_and_corruptions(desk: &Desk) -> Outcome {
    let tol = &desk.manifest.config.tolerances;
    for r in &desk.records {
        let analysis = analyze(&r.spec, &r.options, SolverKind::ClosedForm).map_err(|e| e.to_string())?;
        let reports = Reports {
            stress: analysis.stress,
            fatigue: analysis.fatigue,
        };
        let verification = verify_all(&r.spec, &analysis.fields, &reports, tol);
        let doc = compose(&ComposeInput {
            spec: &r.spec,
            analysis: &analysis,
            verification: &verification,
            locale: r.locale,
        })
        .map_err(|e| format!("{}: {e}", r.id))?;
        let text = render_doc(&doc).map_err(|e| format!("{}: {e}", r.id))?;
        if text != r.harmony_text {
            return Err(format!("{}: re-rendered text differs from the stored one", r.id));
        }
        if parse(&text).as_ref() != Ok(&doc) {
            return Err(format!("{}: parse(render(doc)) != doc", r.id));
        }
    }
    let sources: Vec<(&str, &str)> = desk
        .records
        .iter()
        .map(|r| (r.id.as_str(), r.harmony_text.as_str()))
        .collect();
    let outcomes = corruption_suite(&sources, desk.manifest.seed, 1e-4).map_err(|e| e.to_string())?;
    if let Some(bad) = outcomes.iter().find(|o| !(o.rejected && o.correct)) {
        return Err(format!(
            "{} on {}: expected {:?}, got {}",
            bad.class.as_str(),
            bad.source_id,
            bad.expected,
            bad.diagnosis
        ));
    }
    Ok(format!(
        "{} round trips; {} corruptions over 10 classes all rejected with the expected diagnostic",
        desk.records.len(),
        outcomes.len()
    ))
}

fn c7_tokenizer(desk: &Desk) -> Outcome {
    let vocab = tokenizer::load(&desk.dir.join(VOCAB_DIR)).map_err(|e| e.to_string())?;
    let mut longest = 0;
    for r in &desk.records {
        let ids = vocab.encode(&r.harmony_text);
        let back = vocab.decode(&ids).map_err(|e| format!("{}: {e}", r.id))?;
        if back != r.harmony_text {
            return Err(format!("{}: decode(encode(text)) differs", r.id));
        }
        if ids.len() != r.token_count {
            return Err(format!("{}: {} tokens, manifest says {}", r.id, ids.len(), r.token_count));
        }
        longest = longest.max(ids.len());
    }
    check(
        vocab.len() == 8012 && vocab.bpe_len() == 8000 && longest <= MAX_SEQUENCE_TOKENS,
        format!(
            "{} ids ({} BPE + 12 specials); longest record {longest} tokens",
            vocab.len(),
            vocab.bpe_len()
        ),
    )
}

fn c8_curriculum(desk: &Desk) -> Outcome {
    let schedule = CurriculumSchedule::default();
    let a = curriculum_stream(&desk.manifest, &schedule, 42).map_err(|e| e.to_string())?;
    let b = curriculum_stream(&desk.manifest, &schedule, 42).map_err(|e| e.to_string())?;
    let bytes = |s: &[_]| serde_json::to_vec(s).unwrap();
    let reproducible = bytes(&a) == bytes(&b);
    let mut all_present = true;
    let mut exact = true;
    let mut foundation = Vec::new();
    for phase in &schedule.phases {
        let counts: Vec<usize> = Level::ALL
            .iter()
            .map(|&l| a.iter().filter(|e| e.phase == phase.name && e.level == l).count())
            .collect();
        all_present &= counts.iter().all(|&c| c > 0);
        exact &= counts == apportion(phase.total, &Level::ALL.map(|l| phase.mix.get(l)));
        if phase.name == "foundation" {
            foundation = counts;
        }
    }
    let share: Vec<usize> = foundation.iter().map(|&c| 100 * c / foundation.iter().sum::<usize>()).collect();
    check(
        reproducible && all_present && exact && share == [70, 20, 10],
        format!("foundation {foundation:?} = {share:?}%; all levels in every phase: {all_present}; reproducible: {reproducible}"),
    )
}

fn rec(lps: &[f64]) -> ModelOutputRecord {
    ModelOutputRecord {
        id: "m".into(),
        prompt_text: String::new(),
        completion_text: String::new(),
        logprobs: Some(lps.iter().map(|&logprob| TokenLogprob { token_id: 0, logprob }).collect()),
        logprob_base: LogBase::E,
        level: None,
    }
}

fn c9_metric_units(desk: &Desk) -> Outcome {
    let p_det = perplexity(&[rec(&[0.0; 10])]).map_err(|e| e.to_string())?;
    let p_uni = perplexity(&[rec(&[-(8012f64).ln(); 10])]).map_err(|e| e.to_string())?;
    let p_mix = perplexity(&[rec(&[-(2f64).ln()]), rec(&[-(8f64).ln()])]).map_err(|e| e.to_string())?;
    let dom = |name: &str, p_q, epsilon, harm| HarmDomain {
        name: name.into(),
        p_q,
        epsilon,
        harm,
        refuses: false,
    };
    let harm = expected_harm(&HarmProfile {
        domains: vec![dom("a", 0.6, 0.01, 10.0), dom("b", 0.4, 0.2, 5.0)],
    });
    let alloc = |f: Vec<f64>| AllocationProfile {
        domains: (0..f.len()).map(|i| format!("d{i}")).collect(),
        total: f.iter().sum(),
        allocation: f,
    };
    let mut delta = vec![0.0; 100];
    delta[0] = 1.0;
    let m_delta = monotropy_index(&alloc(delta), 0.1, 0.05).map_err(|e| e.to_string())?;
    let m_uniform = monotropy_index(&alloc(vec![1.0; 100]), 0.1, 0.05).map_err(|e| e.to_string())?;
    let mut looped: Vec<u32> = (500..520).collect();
    for _ in 0..4 {
        looped.extend(1..=8);
    }
    let vocab = tokenizer::load(&desk.dir.join(VOCAB_DIR)).map_err(|e| e.to_string())?;
    let corpus_loops = desk
        .records
        .iter()
        .filter(|r| detect_degenerate(&vocab.encode(&r.harmony_text), 8, 4).is_some())
        .count();
    check(
        p_det == 1.0
            && (p_uni - 8012.0).abs() < 1e-6
            && (p_mix - 4.0).abs() < 1e-12
            && (harm - 0.46).abs() < 1e-12
            && m_delta.k_min == 1
            && m_delta.is_monotropic
            && m_uniform.k_min >= 90
            && !m_uniform.is_monotropic
            && detect_degenerate(&looped, 8, 4).is_some()
            && corpus_loops == 0,
        format!(
            "ppl {p_det}/{p_uni:.1}/{p_mix:.3}; E[H] {harm:.2}; k_min {}/{}; loops in corpus {corpus_loops}",
            m_delta.k_min, m_uniform.k_min
        ),
    )
}

fn c10_params() -> Outcome {
    let b = param_breakdown(&ArchConfig::reference());
    let golden_path = concat!(env!("CARGO_MANIFEST_DIR"), "/../eval/tests/golden/param_breakdown.json");
    let golden = fs::read_to_string(golden_path).map_err(|e| e.to_string())?;
    let matches = golden == serde_json::to_string_pretty(&b).unwrap() + "\n";
    let rel = (b.total as f64 - 37.5e6).abs() / 37.5e6;
    check(
        rel < 0.02 && matches,
        format!("{} parameters ({:+.2}% vs 37.5M); golden breakdown matches: {matches}", b.total, 100.0 * (b.total as f64 / 37.5e6 - 1.0)),
    )
}

fn c11_determinism(first: &Path, second: &Path) -> Outcome {
    let (a, b) = (dir_files(first), dir_files(second));
    let names: Vec<&String> = a.keys().collect();
    let has = |n: &str| a.contains_key(n);
    if !(has(MANIFEST_FILE) && has(REJECTIONS_FILE) && a.keys().any(|k| k.starts_with("shard-"))) {
        return Err(format!("unexpected layout {names:?}"));
    }
    match a.iter().find(|(k, v)| b.get(*k) != Some(v)) {
        Some((k, _)) => Err(format!("{k} differs between runs")),
        None => check(a.len() == b.len(), format!("{} files byte-identical across two runs", a.len())),
    }
}

fn load_desk(dir: &Path) -> Result<Desk, String> {
    let manifest = Manifest::from_json(&fs::read_to_string(dir.join(MANIFEST_FILE)).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let records = read_shards(dir, &manifest).map_err(|e| e.to_string())?;
    let _: Vec<Rejection> = read_jsonl(&dir.join(REJECTIONS_FILE)).map_err(|e| e.to_string())?;
    Ok(Desk {
        dir: dir.to_path_buf(),
        manifest,
        records,
    })
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("desk.toml");
    let mut cfg = GenerationConfig::default();
    cfg.seed = 42;
    for l in Level::ALL {
        cfg.counts.set(l, 200);
    }
    fs::write(&config, cfg.to_toml()).unwrap();
    let (run_a, run_b) = (tmp.path().join("run-a"), tmp.path().join("run-b"));
    let t = Instant::now();
    let generated = run_generate(&config, &run_a).and_then(|()| run_generate(&config, &run_b));
    println!("generated the desk dataset twice in {:.1} s", t.elapsed().as_secs_f64());
    let desk = generated.and_then(|()| load_desk(&run_a));

    let with_desk = |f: fn(&Desk) -> Outcome| -> Outcome {
        match &desk {
            Ok(d) => f(d),
            Err(e) => Err(format!("desk dataset unavailable: {e}")),
        }
    };
    let results: Vec<(&str, Outcome)> = vec![
        ("solver vs oracle", c1_solver_vs_oracle()),
        ("analytical benchmark", c2_benchmark()),
        ("conservation", with_desk(c3_conservation)),
        ("slender limit", c4_slender_limit()),
        ("generation-side metrics", with_desk(c5_table_analogue)),
        ("format round trip and corruptions", with_desk(c6_round_trip_and_corruptions)),
        ("tokenizer", with_desk(c7_tokenizer)),
        ("curriculum", with_desk(c8_curriculum)),
        ("metric unit cases", with_desk(c9_metric_units)),
        ("parameter count", c10_params()),
        ("determinism", with_desk(|_| Ok(String::new())).and_then(|_| c11_determinism(&run_a, &run_b))),
    ];

    let mut failed = 0;
    for (i, (name, outcome)) in results.iter().enumerate() {
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} acceptance criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

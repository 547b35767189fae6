use std::path::PathBuf;

use shaftlab_core::Level;
use shaftlab_data::factorium::rng::{substream, tag};
use shaftlab_data::factorium::{build_record, record_id, sample_parameters, DatasetRecord, GenerationConfig};
use shaftlab_data::harmony::{
    compose, extract_quantities, parse, read_code, render_doc, Channel, ComposeInput, Locale, ParseError,
};

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn draw(level: Level, slot: usize, locale: Locale) -> DatasetRecord {
    let cfg = GenerationConfig {
        locale,
        ..GenerationConfig::default()
    };
    let id = record_id(level, slot);
    let mut rng = substream(cfg.seed, &[tag::RECORD, level.index() as u64, slot as u64, 0]);
    let (spec, options) = sample_parameters(level, &mut rng, &cfg, &id).unwrap();
    match build_record(&id, &spec, &options, &cfg.tolerances, locale).unwrap() {
        shaftlab_data::factorium::record::Built::Accepted(r) => *r,
        other => panic!("{other:?}"),
    }
}

#[test]
fn golden_bachelor_sample_is_byte_stable() {
    let text = draw(Level::Bachelor, 0, Locale::PtBr).harmony_text;
    let path = golden_path("bachelor_seed42.txt");
    if std::env::var_os("SHAFTLAB_BLESS").is_some() {
        std::fs::write(&path, &text).unwrap();
    }
    let golden = std::fs::read_to_string(&path).expect("golden file present (SHAFTLAB_BLESS=1 to create)");
    assert_eq!(text, golden);
    assert!(parse(&golden).is_ok());
}

#[test]
fn round_trip_across_levels_and_locales() {
    for locale in Locale::ALL {
        for level in Level::ALL {
            for slot in 0..8 {
                let r = draw(level, slot, locale);
                let doc = parse(&r.harmony_text).unwrap();
                assert_eq!(render_doc(&doc).unwrap(), r.harmony_text);
                let (spec, options) = read_code(doc.channel(Channel::Code).unwrap()).unwrap();
                assert_eq!(spec, r.spec);
                assert_eq!(options, r.options);
                let q = extract_quantities(&doc).unwrap();
                let labels: Vec<&str> = q.iter().map(|q| q.label.as_str()).collect();
                let expected: Vec<&str> = r.fields_summary.iter().map(|q| q.label.as_str()).collect();
                assert_eq!(labels, expected);
                for (got, want) in q.iter().zip(&r.fields_summary) {
                    let rel = (got.value - want.value).abs() / want.value.abs().max(1e-300);
                    assert!(rel <= 5e-6, "{} {} vs {}", got.label, got.value, want.value);
                }
            }
        }
    }
}

#[test]
fn bachelor_result_has_deflection_and_no_torsion() {
    let r = draw(Level::Bachelor, 3, Locale::En);
    let q = extract_quantities(&parse(&r.harmony_text).unwrap()).unwrap();
    let w = q.iter().find(|q| q.label == "w_max").unwrap();
    assert_eq!(w.unit, "m");
    assert!(q.iter().all(|q| q.label != "torque_max" && q.label != "n_fatigue"));
}

#[test]
fn compose_matches_parse_of_render() {
    let cfg = GenerationConfig::default();
    let r = draw(Level::Doctor, 1, Locale::PtBr);
    let analysis = shaftlab_core::analyze(&r.spec, &r.options, shaftlab_core::SolverKind::ClosedForm).unwrap();
    let doc = compose(&ComposeInput {
        spec: &r.spec,
        analysis: &analysis,
        verification: &r.verification,
        locale: Locale::PtBr,
    })
    .unwrap();
    assert_eq!(parse(&r.harmony_text).unwrap(), doc);
    assert_eq!(r.render(&cfg.tolerances).unwrap(), r.harmony_text);
}

#[test]
fn unverified_records_are_refused() {
    let cfg = GenerationConfig::default();
    let mut r = draw(Level::Master, 0, Locale::PtBr);
    r.verification.level_results[3].passed = false;
    r.verification.overall = false;
    let err = r.render(&cfg.tolerances).unwrap_err();
    assert!(err.to_string().contains("cross_oracle"), "{err}");
}

#[test]
fn goodman_example_is_recovered_from_the_result_channel() {
    // sigma_a = 100 MPa, sigma_m = 50 MPa, Se = 200 MPa, Sut = 600 MPa:
    // 1/n = 1/2 + 1/12 = 7/12.
    let n = 12.0 / 7.0;
    let computed = shaftlab_core::goodman_safety(100e6, 50e6, 200e6, 600e6).unwrap();
    let line = format!("\nn_fatigue = {}\n", shaftlab_data::numfmt::fmt6(computed));
    assert_eq!(line, "\nn_fatigue = 1.71429\n");
    let doc = shaftlab_data::harmony::HarmonyDoc {
        prompt: "p".into(),
        channels: Channel::ALL.iter().map(|c| (*c, if *c == Channel::Result { line.clone() } else { "x".into() })).collect(),
        stopped: true,
    };
    let q = extract_quantities(&doc).unwrap();
    assert!((q[0].value - n).abs() / n < 5e-6);
    assert_eq!(q[0].unit, "");
}

#[test]
fn removing_the_verification_channel_names_it() {
    let r = draw(Level::Bachelor, 1, Locale::PtBr);
    let t = &r.harmony_text;
    let start = t.find("<|verification|>").unwrap();
    let end = start + t[start..].find("<|end|>").unwrap() + "<|end|>".len();
    let cut = format!("{}{}", &t[..start], &t[end..]);
    let err = parse(&cut).unwrap_err();
    assert!(matches!(err, ParseError::MissingChannel { channel: Channel::Verification, .. }));
    assert!(err.to_string().contains("CH_VERIFICATION"));
}

use std::fs;
use std::path::PathBuf;

use polyban_core::{emit_bundle, parse_bundle, verify_bundle, Bundle, Error};
use serde_json::Value;

fn corpus() -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus");
    let mut files: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap()))
        .collect()
}

#[test]
fn canonical_files_round_trip_byte_for_byte() {
    let files = corpus();
    assert!(files.len() >= 10);
    for (name, text) in &files {
        let b = parse_bundle(text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let out = emit_bundle(&b);
        if name.contains("noncanonical") {
            assert_ne!(&out, text, "{name}");
            assert_eq!(emit_bundle(&parse_bundle(&out).unwrap()), out, "{name}: emit is not idempotent");
        } else {
            assert_eq!(&out, text, "{name}: emit(parse(t)) differs from t");
        }
    }
}

#[test]
fn every_corpus_bundle_verifies_alone() {
    for (name, text) in corpus() {
        let b = parse_bundle(&text).unwrap();
        verify_bundle(&b).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn noncanonical_space_is_reduced() {
    let (_, text) = corpus().into_iter().find(|(n, _)| n == "space_noncanonical.json").unwrap();
    let Bundle::Space(ball) = parse_bundle(&text).unwrap() else { panic!() };
    // The interior point (1/2, 1/4) is dropped; ±e1, ±e2 remain.
    assert_eq!(ball.vertices().len(), 2);
    let out = emit_bundle(&Bundle::Space(ball));
    assert!(!out.contains("2/2") && !out.contains("4/4") && !out.contains("1/4"));
}

#[test]
fn tampered_witnesses_are_named() {
    for (name, key) in [("pushout.json", "jy_cert"), ("correction.json", "i0_cert")] {
        let (_, text) = corpus().into_iter().find(|(n, _)| n == name).unwrap();
        let mut doc: Value = serde_json::from_str(&text).unwrap();
        let coef = &mut doc["payload"][key]["upper"][0][0]["coef"];
        *coef = Value::String("1/7".into());
        let b = parse_bundle(&serde_json::to_string_pretty(&doc).unwrap()).unwrap();
        let err = verify_bundle(&b).unwrap_err();
        assert_eq!(err.name(), "CertificateFailure");
        assert!(err.to_string().contains(key), "{err}");
    }
}

#[test]
fn tampered_state_fails_condition_a() {
    let (_, text) = corpus().into_iter().find(|(n, _)| n == "state.json").unwrap();
    let mut doc: Value = serde_json::from_str(&text).unwrap();
    let tasks = doc["payload"]["tasks"].as_array_mut().unwrap();
    let t = tasks.iter_mut().find(|t| t["status"]["kind"] == "satisfied" && !t["f"].as_array().unwrap().is_empty() && !t["f"][0].as_array().unwrap().is_empty()).unwrap();
    t["f"][0][0] = Value::String("3".into());
    let b = parse_bundle(&serde_json::to_string(&doc).unwrap()).unwrap();
    let err = verify_bundle(&b).unwrap_err();
    assert!(err.to_string().contains("state"), "{err}");
}

#[test]
fn structural_errors() {
    let (_, text) = corpus().into_iter().find(|(n, _)| n == "map.json").unwrap();
    assert!(matches!(parse_bundle(&text[..text.len() - 20]), Err(Error::ParseError { .. })));
    let v9 = text.replace("\"format_version\": 1", "\"format_version\": 9");
    assert!(matches!(parse_bundle(&v9), Err(Error::VersionUnsupported(9))));
    let wrong_kind = text.replace("\"kind\": \"map\"", "\"kind\": \"atlas\"");
    assert!(matches!(parse_bundle(&wrong_kind), Err(Error::ParseError { .. })));
    let bad_shape = text.replacen("\"matrix\": [", "\"matrix\": [[\"1\"],", 1);
    assert!(matches!(parse_bundle(&bad_shape), Err(Error::ParseError { .. })));
    let zero_den = r#"{"format_version": 1, "kind": "space", "payload": {"dim": 1, "symmetric": true,
  "vertices": [["1/0"]]}}"#;
    match parse_bundle(zero_den) {
        Err(Error::ParseError { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
}

use std::collections::BTreeSet;
use std::path::Path;

use harchain::features::{extract_matrix, FeatureKind};
use harchain::pipeline::*;
use harchain::signal::{simulate_cohort, CoarseLabel, CohortSpec, FineLabel, Origin};
use harchain::Error;

use harchain::signal::simulate::PLANTED_COUNTS as COUNTS;

fn small_config(dir: &Path, participants: usize) -> PipelineConfig {
    let spec = CohortSpec::frequency_coded(participants, &COUNTS);
    let cohort = dir.join("cohort.json");
    std::fs::write(&cohort, serde_json::to_string(&spec).unwrap()).unwrap();
    let mut config = PipelineConfig::default();
    config.data.cohort = Some(cohort);
    config.seed = 17;
    config.synthesis.drift_correction = false;
    config
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((
                    p.strip_prefix(dir).unwrap().display().to_string(),
                    std::fs::read(&p).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn full_run_is_byte_identical_and_write_once() {
    let tmp = tempfile::tempdir().unwrap();
    let config = small_config(tmp.path(), 6);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let first = run_pipeline(&config, &a, false).unwrap();
    run_pipeline(&config, &b, false).unwrap();
    let (fa, fb) = (dir_bytes(&a), dir_bytes(&b));
    assert!(fa.len() > 10);
    assert_eq!(fa, fb);

    let names: BTreeSet<&str> = fa.iter().map(|(n, _)| n.as_str()).collect();
    for f in [
        RUN_MANIFEST,
        "fim_evaluation.json",
        "ccm_evaluation.json",
        "comparison.json",
        "ccm_split.json",
    ] {
        assert!(names.contains(f), "{f} missing");
    }
    assert_eq!(first.manifest.seed, 17);
    assert_eq!(first.manifest.config_sha256, config.sha256().unwrap());
    assert!(first.manifest.versions.values().all(|v| v == env!("CARGO_PKG_VERSION")));

    assert!(matches!(run_pipeline(&config, &a, false), Err(Error::Parameter(_))));
    run_pipeline(&config, &a, true).unwrap();
    assert_eq!(dir_bytes(&a), fa);

    let text = render_run_dir(&a).unwrap();
    assert!(text.contains("FIM") && text.contains("CCM") && text.contains("lie_down"));
}

#[test]
fn window_split_is_stratified_and_disjoint() {
    let tmp = tempfile::tempdir().unwrap();
    let config = small_config(tmp.path(), 8);
    let m = extract_matrix(&real_windows(&config).unwrap());
    let split = ccm_split(&m, &config.ccm, 3).unwrap();
    split.check(m.n_rows()).unwrap();
    for label in FineLabel::ALL {
        let n = m.labels.iter().filter(|&&l| l == label).count();
        let got = split.selection_rows.iter().filter(|&&r| m.labels[r] == label).count();
        let target = 0.25 * n as f64;
        assert!((got as f64 - target).abs() <= 2.0, "{label}: {got} vs {target}");
    }
    let sel: BTreeSet<usize> = split.selection_rows.iter().copied().collect();
    assert!(split.evaluation_rows.iter().all(|r| !sel.contains(r)));
    assert_eq!(sel.len() + split.evaluation_rows.len(), m.n_rows());
}

#[test]
fn participant_split_keeps_people_whole() {
    let tmp = tempfile::tempdir().unwrap();
    let mut config = small_config(tmp.path(), 8);
    config.ccm.split = SplitLevel::Participant;
    let m = extract_matrix(&real_windows(&config).unwrap());
    let split = ccm_split(&m, &config.ccm, 3).unwrap();
    split.check(m.n_rows()).unwrap();
    let people = |rows: &[usize]| rows.iter().map(|&r| m.participants[r].clone()).collect::<BTreeSet<_>>();
    let (s, e) = (people(&split.selection_rows), people(&split.evaluation_rows));
    assert_eq!(s.len(), 2);
    assert_eq!(e.len(), 6);
    assert!(s.is_disjoint(&e));
}

#[test]
fn split_check_catches_overlap() {
    let split = CcmSplit {
        level: SplitLevel::Window,
        selection_rows: vec![0, 2],
        evaluation_rows: vec![1, 2],
    };
    assert!(matches!(split.check(3), Err(Error::Leakage(_))));
}

#[test]
fn fim_refuses_real_rows_in_selection() {
    let tmp = tempfile::tempdir().unwrap();
    let config = small_config(tmp.path(), 4);
    let m = extract_matrix(&real_windows(&config).unwrap());
    assert!(m.origins.iter().all(|&o| o == Origin::Real));
    match run_fim(&m, &m, &config) {
        Err(Error::Leakage(msg)) => assert!(msg.contains("FIM selection matrix"), "{msg}"),
        other => panic!("expected leakage error, got {other:?}"),
    }
}

#[test]
fn config_defaults_validation_and_paths() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path().join("c.json");
    std::fs::write(&p, "{}").unwrap();
    let c = PipelineConfig::from_json_file(&p).unwrap();
    assert_eq!(c, PipelineConfig::default());
    assert_eq!(c.preprocess.sgolay_frame_s, 0.12);
    assert_eq!(c.model.k, 5);
    assert_eq!(c.selection.vote_threshold, 5);

    std::fs::write(&p, r#"{"data": {"cohort": "cohort.json"}}"#).unwrap();
    let c = PipelineConfig::from_json_file(&p).unwrap();
    assert_eq!(c.data.cohort.as_deref(), Some(tmp.path().join("cohort.json").as_path()));
    assert!(matches!(c.validate(), Err(Error::Parameter(_))));
    std::fs::write(tmp.path().join("cohort.json"), "{}").unwrap();
    c.validate().unwrap();

    let mut even = PipelineConfig::default();
    even.model.k = 4;
    assert!(even.validate().is_err());
    std::fs::write(&p, r#"{"seed": "x"}"#).unwrap();
    assert!(matches!(PipelineConfig::from_json_file(&p), Err(Error::Json(_))));

    let mut other = PipelineConfig::default();
    assert_eq!(other.sha256().unwrap(), PipelineConfig::default().sha256().unwrap());
    other.seed = 1;
    assert_ne!(other.sha256().unwrap(), PipelineConfig::default().sha256().unwrap());
}

#[test]
fn sessions_file_matches_in_memory_cohort() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = CohortSpec::frequency_coded(2, &COUNTS);
    let sessions = simulate_cohort::<f64>(&spec, 9).unwrap();
    let entries = write_sessions(tmp.path(), &sessions).unwrap();
    let index = tmp.path().join("sessions.json");
    std::fs::write(&index, serde_json::to_string(&entries).unwrap()).unwrap();
    let pre = PreprocessConfig::default();
    let loaded = prepare_windows(&load_sessions(&index).unwrap(), &pre).unwrap();
    let direct = prepare_windows(&sessions, &pre).unwrap();
    assert_eq!(loaded, direct);
    assert_eq!(label_counts(&loaded).values().sum::<usize>(), 2 * 24);
}

/// The planted cohort's construction: after preprocessing only the six
/// mean-crossing rates separate the coarse classes.
#[test]
fn frequency_coded_cohort_plants_only_crossing_rates() {
    let spec = CohortSpec::frequency_coded(6, &COUNTS);
    let sessions = simulate_cohort::<f64>(&spec, 2).unwrap();
    let m = extract_matrix(&prepare_windows(&sessions, &PreprocessConfig::default()).unwrap());
    let catalog = harchain::features::catalog();
    for (j, d) in catalog.descriptors().iter().enumerate() {
        let means: Vec<f64> = CoarseLabel::ALL
            .iter()
            .map(|&c| {
                let v: Vec<f64> = (0..m.n_rows())
                    .filter(|&i| m.labels[i].coarse() == c)
                    .map(|i| m.get(i, j))
                    .collect();
                v.iter().sum::<f64>() / v.len() as f64
            })
            .collect();
        let spread = means.iter().cloned().fold(f64::MIN, f64::max) - means.iter().cloned().fold(f64::MAX, f64::min);
        if d.kind == FeatureKind::MeanCrossingRate {
            assert!(spread > 5.0, "{}: {spread}", d.name);
        } else {
            assert!(spread < 0.1, "{}: {spread}", d.name);
        }
    }
}

use changescore::formats::{
    load_scenario_file, read_dataset_csv, scenario_to_json, write_dataset_csv,
};
use changescore::Error;
use changescore_core::{builtin, sample_dataset, ColumnKind, ScenarioId, SemError};

#[test]
fn builtin_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for id in ScenarioId::ALL {
        let spec = builtin(id);
        let file = dir.path().join("s.json");
        std::fs::write(&file, scenario_to_json(&spec)).unwrap();
        let back = load_scenario_file(&file).unwrap();
        assert_eq!(back.sem, spec.sem, "{id}");
        assert_eq!(back.bindings, spec.bindings);
        for s in changescore_core::Strategy::ALL {
            assert_eq!(back.oracle(s).unwrap(), spec.oracle(s).unwrap());
        }
    }
}

#[test]
fn dataset_csv_is_lossless() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("d.csv");
    let data = sample_dataset(&builtin(ScenarioId::S3BPlus).sem, 200, 17, "3B+");

    let mut bytes = Vec::new();
    write_dataset_csv(&data, true, &mut bytes).unwrap();
    std::fs::write(&file, &bytes).unwrap();
    let back = read_dataset_csv(&file).unwrap();
    assert_eq!(back.n_rows(), 200);
    for col in data.columns() {
        assert_eq!(
            back.column(&col.name).unwrap().values,
            col.values,
            "{}",
            col.name
        );
        assert_eq!(back.column(&col.name).unwrap().kind, ColumnKind::Observed);
    }

    let mut hidden = Vec::new();
    write_dataset_csv(&data, false, &mut hidden).unwrap();
    let header = String::from_utf8(hidden)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string();
    assert_eq!(header, "WC0,IC0,IC1");
}

#[test]
fn malformed_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    std::fs::write(&csv, "a,b\n1,2\n3,x\n").unwrap();
    let err = read_dataset_csv(&csv).unwrap_err();
    assert!(err.to_string().contains("`b`"), "{err}");

    let json = dir.path().join("bad.json");
    std::fs::write(
        &json,
        r#"{"nodes":[{"name":"A","kind":"observed"},{"name":"B","kind":"observed"},{"name":"C","kind":"observed"}],
            "edges":[{"from":"A","to":"C","beta":1.3}],
            "bindings":{"exposure":"A","baseline":"B","followup":"C"}}"#,
    )
    .unwrap();
    match load_scenario_file(&json) {
        Err(Error::Sem(SemError::NonPositiveResidual { node, .. })) => assert_eq!(node, "C"),
        other => panic!("unexpected {other:?}"),
    }

    let missing = dir.path().join("nope.json");
    let err = load_scenario_file(&missing).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

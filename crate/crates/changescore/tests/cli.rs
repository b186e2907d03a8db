use std::path::Path;
use std::process::{Command, Output};

use changescore::report::{cells_from_csv, Table1Report};

fn changescore(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_changescore"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    assert!(o.status.success(), "{}", stderr(o));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn list_scenarios() {
    let o = changescore(&["list-scenarios"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 8);
    assert!(text.contains("3A+"));
    assert!(text.contains("Mediator"));
}

#[test]
fn simulate_writes_observed_columns() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for f in [&a, &b] {
        let o = changescore(&[
            "simulate",
            "--scenario",
            "1A",
            "--seed",
            "5",
            "--out",
            path(f),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().next(), Some("WC0,IC0,IC1"));
    assert_eq!(text.lines().count(), 1001);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let hidden = stdout(&changescore(&["simulate", "--scenario", "1B", "--n", "3"]));
    assert_eq!(hidden.lines().next(), Some("WC0,IC0,IC1"));
    let shown = stdout(&changescore(&[
        "simulate",
        "--scenario",
        "1B",
        "--n",
        "3",
        "--include-latent",
    ]));
    assert_eq!(shown.lines().next(), Some("WC0,IC0,IC1,U"));
}

#[test]
fn analyze_large_sample_and_laird_identity() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("1a.csv");
    let o = changescore(&[
        "simulate",
        "--scenario",
        "1A",
        "--n",
        "1000000",
        "--seed",
        "3",
        "--out",
        path(&data),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));

    let fit = |strategy: &str| {
        json(&changescore(&[
            "analyze",
            "--data",
            path(&data),
            "--strategy",
            strategy,
        ]))
    };
    let cs = fit("change-score");
    assert!(
        (cs["coefficient"].as_f64().unwrap() - 0.200).abs() < 0.01,
        "{cs}"
    );
    assert_eq!(cs["n"], 1_000_000);
    assert_eq!(cs["bindings"]["baseline"], "IC0");
    assert_eq!(cs["strategy"], "change-score");

    let adj = fit("adjusted")["coefficient"].as_f64().unwrap();
    let laird = fit("change-score-adjusted");
    assert!((laird["coefficient"].as_f64().unwrap() - adj).abs() < 1e-10);
    assert!(laird["all_coefficients"]["IC0"].is_number());
}

#[test]
fn analyze_user_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    std::fs::write(&data, "x,b,f\n1,2,1\n2,4,3\n3,6,2\n4,8,5\n5,10,4\n").unwrap();

    let o = changescore(&["analyze", "--data", path(&data), "--strategy", "adjusted"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("WC0"), "{}", stderr(&o));

    let bound = ["--exposure", "x", "--baseline", "b", "--followup", "f"];
    let mut args = vec!["analyze", "--data", path(&data), "--strategy", "adjusted"];
    args.extend(bound);
    let o = changescore(&args);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("rank-deficient"), "{}", stderr(&o));

    let mut args = vec!["analyze", "--data", path(&data), "--strategy", "unadjusted"];
    args.extend(bound);
    let v = json(&changescore(&args));
    assert!((v["coefficient"].as_f64().unwrap() - 0.8).abs() < 1e-12);
}

#[test]
fn table1_csv_matches_json() {
    let common = ["table1", "--reps", "40", "--n", "60", "--seed", "9"];
    let as_json = stdout(&changescore(&[&common[..], &["--format", "json"]].concat()));
    let as_csv = stdout(&changescore(&[&common[..], &["--format", "csv"]].concat()));
    let report: Table1Report = serde_json::from_str(&as_json).unwrap();
    assert_eq!(report.cells.len(), 24);
    assert_eq!(cells_from_csv(&as_csv).unwrap(), report.cells);
    assert!(report.cells.iter().all(|c| c.oracle.is_finite()));

    let md = stdout(&changescore(&common));
    assert!(md.contains("| Method of analysis | 1A | 1B | 2A | 2B | 3A | 3B | 3A+ | 3B+ |"));
    assert!(md.contains("| change-score |"));
    assert!(!md.contains("Generated"));
    let stamped = stdout(&changescore(&[&common[..], &["--timestamp"]].concat()));
    assert!(stamped.contains("Generated"));
}

#[test]
fn replicate_with_tidy_estimates() {
    let dir = tempfile::tempdir().unwrap();
    let tidy = dir.path().join("est.csv");
    let o = changescore(&[
        "replicate",
        "--scenario",
        "3A",
        "--reps",
        "30",
        "--n",
        "50",
        "--format",
        "json",
        "--estimates-out",
        path(&tidy),
    ]);
    let cells = json(&o);
    assert_eq!(cells.as_array().unwrap().len(), 3);
    let text = std::fs::read_to_string(&tidy).unwrap();
    assert_eq!(
        text.lines().next(),
        Some("scenario,strategy,replicate,estimate")
    );
    assert_eq!(text.lines().count(), 91);

    let one = json(&changescore(&[
        "replicate",
        "--scenario",
        "3A",
        "--reps",
        "30",
        "--n",
        "50",
        "--format",
        "json",
        "--strategy",
        "adjusted",
    ]));
    assert_eq!(one[0], cells[1]);

    let o = changescore(&["replicate", "--scenario", "3A", "--reps", "0", "--n", "50"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_values() {
    let v = json(&changescore(&["oracle", "--scenario", "2A"]));
    assert!((v["change_score"].as_f64().unwrap() - 0.1190625).abs() < 1e-12);
    assert_eq!(v["adjusted"].as_f64().unwrap(), 0.2);
    let text = stdout(&changescore(&[
        "oracle",
        "--scenario",
        "3A",
        "--format",
        "text",
    ]));
    assert_eq!(
        text,
        "3A: change-score -0.031, adjusted 0.050, unadjusted 0.200\n"
    );
    let text = stdout(&changescore(&[
        "oracle",
        "--scenario",
        "1A",
        "--format",
        "text",
    ]));
    assert_eq!(
        text,
        "1A: change-score 0.200, adjusted 0.200, unadjusted 0.200\n"
    );
    let o = changescore(&["oracle", "--scenario", "4Z"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn graph_queries() {
    let classify = stdout(&changescore(&["classify", "--scenario", "2A"]));
    assert!(classify.starts_with("Confounder; recommended: follow-up adjusted for baseline\n"));

    let dsep = |extra: &[&str]| {
        stdout(&changescore(
            &[
                &["dsep", "--scenario", "3A+", "--x", "WC0", "--y", "U2"][..],
                extra,
            ]
            .concat(),
        ))
    };
    assert_eq!(dsep(&["--given", "IC0"]), "not d-separated\n");
    assert_eq!(dsep(&[]), "d-separated\n");

    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("g.dag");
    std::fs::write(
        &good,
        "dag { WC0 [exposure] IC1 [outcome] WC0 -> IC0 IC0 -> IC1 WC0 -> IC1 }",
    )
    .unwrap();
    let o = changescore(&["classify", "--dag", path(&good), "--estimand", "direct"]);
    assert!(stdout(&o).starts_with("Mediator; recommended: follow-up adjusted for baseline\n"));
    assert!(stdout(&o).contains("mediator-outcome confounding"));

    let bad = dir.path().join("bad.dag");
    std::fs::write(&bad, "dag { A -> B B -> A }").unwrap();
    for cmd in ["classify", "dsep"] {
        let o = changescore(&[cmd, "--dag", path(&bad), "--x", "A", "--y", "B"]);
        assert_eq!(o.status.code(), Some(2), "{cmd}");
    }
    let o = changescore(&["classify", "--dag", path(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cycle"), "{}", stderr(&o));
}

#[test]
fn oldham() {
    let a = changescore(&["oldham", "--n", "100000", "--seed", "4"]);
    let v = json(&a);
    assert!(
        (v["baseline_change"].as_f64().unwrap() + std::f64::consts::FRAC_1_SQRT_2).abs() < 0.01
    );
    assert!(
        (v["followup_change"].as_f64().unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.01
    );
    assert_eq!(
        a.stdout,
        changescore(&["oldham", "--n", "100000", "--seed", "4"]).stdout
    );
    assert_eq!(changescore(&["oldham", "--n", "9"]).status.code(), Some(2));
}

#[test]
fn scenario_files() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("2a.json");
    let o = changescore(&["export-scenario", "--scenario", "2A", "--out", path(&file)]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&changescore(&["oracle", "--scenario", path(&file)])),
        stdout(&changescore(&["oracle", "--scenario", "2A"]))
    );

    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    doc["bindings"].as_object_mut().unwrap().remove("followup");
    let missing = dir.path().join("missing.json");
    std::fs::write(&missing, doc.to_string()).unwrap();
    let o = changescore(&["oracle", "--scenario", path(&missing)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("followup"), "{}", stderr(&o));

    let strong = dir.path().join("strong.json");
    std::fs::write(
        &strong,
        r#"{"nodes":[{"name":"A","kind":"observed","mean":0,"sd":1},
                     {"name":"B","kind":"observed","mean":0,"sd":1},
                     {"name":"C","kind":"observed","mean":0,"sd":1}],
            "edges":[{"from":"A","to":"B","beta":1.3},{"from":"A","to":"C","beta":0.2}],
            "bindings":{"exposure":"A","baseline":"B","followup":"C"}}"#,
    )
    .unwrap();
    let o = changescore(&["simulate", "--scenario", path(&strong)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`B`"), "{}", stderr(&o));

    let o = changescore(&["dag", "--scenario", "3A+"]);
    assert!(stdout(&o).contains("U2 [latent]"));
}

use std::process::{Command, Output};

fn optimism(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optimism"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn list_is_alphabetical_and_complete() {
    let o = optimism(&["list"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("toy-segment-disk"));
    assert!(text.contains("ridge-ellipsoid-profile"));
    let names: Vec<&str> = text
        .lines()
        .map(|l| l.split_whitespace().next().unwrap())
        .collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
}

#[test]
fn describe_prints_constants() {
    let lasso = stdout(&optimism(&["describe", "example-4-lasso"]));
    assert!(lasso.contains("n=1001") && lasso.contains("p=3") && lasso.contains("R=5000"));
    assert!(stdout(&optimism(&["describe", "toy-segment-disk"])).contains("y2 = 2 constant"));
    assert!(stdout(&optimism(&["describe", "convexity-example"])).contains("σ = 0.1"));
}

#[test]
fn unknown_scenario_exits_2() {
    assert_eq!(optimism(&["run", "unknown-name"]).status.code(), Some(2));
    assert_eq!(
        optimism(&["describe", "unknown-name"]).status.code(),
        Some(2)
    );
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("out.csv");
    let o = optimism(&[
        "run",
        "toy-segment-disk",
        "--replicates",
        "100",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn grid_on_gridless_scenario_is_a_usage_error() {
    let o = optimism(&[
        "run",
        "toy-segment-disk",
        "--replicates",
        "100",
        "--grid",
        "1,2",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (path, threads) in [(&a, "1"), (&b, "4")] {
        let o = optimism(&[
            "run",
            "toy-segment-disk",
            "--seed",
            "1",
            "--replicates",
            "1000",
            "--threads",
            threads,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with(
        "scenario,param_name,param_value,estimator,kind,estimate,stderr,replicates,seed\n"
    ));
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().count(), 1 + 2 * 3);
}

#[test]
fn lasso_rows_cover_both_forms_and_estimators() {
    let o = optimism(&[
        "run",
        "example-4-lasso",
        "--replicates",
        "20",
        "--grid",
        "0.1,0.5",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    let df_rows = rows.iter().filter(|r| r[4] == "df").count();
    // 2 λ values plus the 21-point s grid, two estimators each.
    assert_eq!(df_rows, (2 + 21) * 2);
    assert!(rows.iter().any(|r| r[1] == "lambda" && r[3] == "stein_mc"));
    assert!(rows.iter().any(|r| r[1] == "s" && r[3] == "covariance_mc"));
}

#[test]
fn json_mirrors_csv() {
    let csv = stdout(&optimism(&[
        "run",
        "convexity-example",
        "--replicates",
        "100",
    ]));
    let json = stdout(&optimism(&[
        "run",
        "convexity-example",
        "--replicates",
        "100",
        "--format",
        "json",
    ]));
    assert_eq!(
        json.matches("\"scenario\"").count(),
        csv.lines().count() - 1
    );
}

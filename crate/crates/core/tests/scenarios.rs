use optimism_core::experiments::{
    default_rl_grid, run, run_lasso_counterexample, run_ridge_profile, Kind, LassoGrids,
    ProfileNoise, Row, RunOptions, ScenarioResult, SCENARIOS,
};
use optimism_core::McConfig;

fn find<'a>(r: &'a ScenarioResult, like: &Row, kind: Kind) -> &'a Row {
    r.get(&like.param_name, like.param_value, &like.estimator, kind)
        .expect("paired row")
}

#[test]
fn optimism_matches_error_gap() {
    let opts = RunOptions {
        replicates: Some(4000),
        ..RunOptions::default()
    };
    for name in [
        "toy-segment-disk",
        "convexity-example",
        "ridge-ellipsoid-profile",
    ] {
        let r = run(name, &opts).unwrap();
        for w in r.rows.iter().filter(|row| row.kind == Kind::Omega) {
            let (train, pred) = (find(&r, w, Kind::Train), find(&r, w, Kind::Pred));
            let se = (w.stderr.powi(2) + train.stderr.powi(2) + pred.stderr.powi(2)).sqrt();
            let gap = pred.estimate - train.estimate;
            assert!(
                (gap - w.estimate).abs() <= 3.0 * se,
                "{name} {}={}: ω = {}, pred − train = {gap}, se = {se}",
                w.param_name,
                w.param_value,
                w.estimate
            );
        }
    }
}

#[test]
fn row_counts_follow_grid_times_estimators_times_kinds() {
    let mc = McConfig::new(20, 3);
    let grids = LassoGrids {
        lambda: vec![0.1, 0.2, 0.5],
        s: vec![0.5, 1.0],
    };
    assert_eq!(
        run_lasso_counterexample(&mc, &grids, false)
            .unwrap()
            .rows
            .len(),
        5 * 2 * 4
    );
    let grid = default_rl_grid();
    let profile = run_ridge_profile(&mc, &grid, ProfileNoise::default()).unwrap();
    assert_eq!(profile.rows.len(), grid.len() * 3);
}

#[test]
fn sd_reading_of_lasso_noise_is_also_non_monotone() {
    let grids = LassoGrids {
        lambda: vec![0.1, 0.5],
        s: vec![1.0, 1.7325],
    };
    let r = run_lasso_counterexample(&McConfig::new(2000, 11), &grids, true).unwrap();
    let df = |p: &str, v: f64| r.get(p, v, "stein_mc", Kind::Df).unwrap();
    let z =
        |a: &Row, b: &Row| (a.estimate - b.estimate) / (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
    assert!(z(df("lambda", 0.5), df("lambda", 0.1)) > 3.0);
    assert!(z(df("s", 1.0), df("s", 1.7325)) > 3.0);
}

#[test]
fn rows_are_sorted_and_stderr_nonnegative() {
    let opts = RunOptions {
        replicates: Some(40),
        trials: Some(3),
        ..RunOptions::default()
    };
    for s in SCENARIOS {
        let r = run(s.name, &opts).unwrap();
        let keys: Vec<_> = r
            .rows
            .iter()
            .map(|row| {
                (
                    row.param_name.clone(),
                    row.param_value,
                    row.estimator.clone(),
                )
            })
            .collect();
        assert!(keys
            .windows(2)
            .all(|w| (&w[0].0, w[0].1, &w[0].2) <= (&w[1].0, w[1].1, &w[1].2)));
        assert!(r
            .rows
            .iter()
            .all(|row| row.stderr >= 0.0 && row.seed == opts.seed));
    }
}

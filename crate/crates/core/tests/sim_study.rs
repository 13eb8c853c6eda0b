use tailrisk::estimators::Method;
use tailrisk::sim::{run_study, summarize_to_table, SimConfig, SimFamily};

#[test]
fn known_truth_pareto_mle() {
    let cfg = SimConfig {
        family: SimFamily::Pareto { scale_a: 1.0 },
        nu_values: vec![2.0],
        effective_sizes: vec![1000],
        estimators: vec![Method::Mle, Method::Hill],
        ..SimConfig::default()
    };
    let s = run_study(&cfg).unwrap();
    let mle = s.row(Method::Mle, 1000, 2.0).unwrap();
    assert_eq!(mle.failures, 0);
    assert!((mle.mean.unwrap() / 2.0 - 1.0).abs() < 0.05, "{:?}", mle.mean);
}

#[test]
fn full_grid_cardinality_and_ordering() {
    let cfg = SimConfig { replications: 2, subsamples: 40, grid_points: 6, ..SimConfig::default() };
    let s = run_study(&cfg).unwrap();
    assert_eq!(s.rows.len(), 60);
    for w in s.rows.windows(2) {
        let key = |r: &tailrisk::sim::SimRow| (r.nu, r.effective_size, r.method);
        assert!(key(&w[0]) < key(&w[1]));
    }
    assert!(s.rows.iter().all(|r| r.mape.unwrap_or(0.0) >= 0.0 && r.sd.unwrap_or(0.0) >= 0.0));

    let dir = tempfile::tempdir().unwrap();
    let paths = summarize_to_table(&s, dir.path()).unwrap();
    let text = std::fs::read_to_string(&paths[0]).unwrap();
    assert_eq!(text.lines().count(), 61);
    assert_eq!(run_study(&cfg).unwrap(), s);
}

#[test]
fn pareto_errors_shrink_with_effective_size() {
    let cfg = SimConfig {
        family: SimFamily::Pareto { scale_a: 1.0 },
        nu_values: vec![2.0],
        effective_sizes: vec![100, 1000, 10_000],
        ..SimConfig::default()
    };
    let s = run_study(&cfg).unwrap();
    for m in Method::ALL {
        let e: Vec<f64> = cfg.effective_sizes.iter().map(|&n| s.row(m, n, 2.0).unwrap().median_ape.unwrap()).collect();
        assert!(e[0] > e[1] && e[1] > e[2], "{m}: {e:?}");
    }
    for r in &s.rows {
        let (lo, mean, hi) = (r.min.unwrap(), r.mean.unwrap(), r.max.unwrap());
        assert!(lo <= mean && mean <= hi);
    }
}

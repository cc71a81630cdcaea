use fdgroup_core::algorithms::RunOptions;
use fdgroup_core::experiments::*;
use fdgroup_core::system::SystemConfig;

fn small() -> SystemConfig {
    SystemConfig {
        k: 2,
        l: 2,
        g: 2,
        ntx: 2,
        nrx: 2,
        seed: 17,
        ..SystemConfig::default()
    }
}

fn run(s: &Scenario, cfg: &SystemConfig, threads: usize) -> ScenarioOutput {
    run_scenario(s, cfg, threads, &RunOptions::default(), false).unwrap()
}

#[test]
fn convergence_csv_is_reproducible() {
    let mut s = Scenario::new(ScenarioName::Convergence, 1);
    s.methods = vec![Method::Alg1];
    let a = run(&s, &small(), 1);
    let b = run(&s, &small(), 2);
    assert_eq!(a.csv, b.csv);
    let mut lines = a.csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scenario,method,trial,iteration,exact_bps,surrogate_bps,status,damped,max_residual,ipm_iters"
    );
    let rows: Vec<&str> = lines.collect();
    assert!(rows.len() >= 2);
    assert!(rows.iter().all(|r| r.split(',').count() == 10));
}

#[test]
fn more_trials_extend_earlier_rows() {
    let mut s = Scenario::new(ScenarioName::GroupingTable, 1);
    s.methods = vec![Method::Alg1];
    let one = run(&s, &small(), 1).csv;
    s.trials = 2;
    let two = run(&s, &small(), 1).csv;
    assert!(two.starts_with(&one), "{one}\n---\n{two}");
    assert!(two.len() > one.len());
}

#[test]
fn grouping_table_sums_are_consistent() {
    let cfg = small();
    let mut s = Scenario::new(ScenarioName::GroupingTable, 2);
    s.methods = vec![Method::Alg2];
    let out = run(&s, &cfg, 1);
    let mut users = 0.0;
    for line in out.csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let total: f64 = f.last().unwrap().parse().unwrap();
        if f[3] == "sum" {
            assert!((total - users).abs() <= 1e-6, "{total} vs {users}");
            users = 0.0;
        } else {
            let groups: f64 = f[5..5 + cfg.g].iter().map(|v| v.parse::<f64>().unwrap()).sum();
            assert!((groups - total).abs() <= 1e-6);
            assert!(total >= 1.0 - 1e-3, "user below threshold: {line}");
            users += total;
        }
    }
}

#[test]
fn sweep_rows_and_exclusions() {
    let cfg = SystemConfig {
        p_bs: fdgroup_core::system::dbm_to_watts(-40.0),
        ..small()
    };
    let mut s = Scenario::new(ScenarioName::SweepRbar, 1);
    s.grid = vec![0.0, 8.0];
    s.methods = vec![Method::FdG1];
    let out = run(&s, &cfg, 1);
    let rows: Vec<Vec<String>> = out
        .csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][2], "rbar_bps");
    // Zero thresholds are always feasible, 8 bps/Hz at −40 dBm is not.
    assert_eq!((rows[0][5].as_str(), rows[0][6].as_str()), ("1", "0"));
    assert_eq!((rows[1][5].as_str(), rows[1][6].as_str()), ("0", "1"));
    assert_eq!(out.exclusions, 1);
}

#[test]
fn scenario_validation() {
    assert!("sweep-rho".parse::<ScenarioName>().is_ok());
    assert!("nonsense".parse::<ScenarioName>().is_err());
    assert!("fd_g1".parse::<Method>().is_ok());
    let mut s = Scenario::new(ScenarioName::SweepRho, 0);
    assert!(s.validate().is_err());
    s.trials = 1;
    s.grid.clear();
    assert!(s.validate().is_err());
    assert!(apply_grid(ScenarioName::SweepUsers, &small(), 2.5).is_err());
    let c = apply_grid(ScenarioName::SweepUsers, &small(), 3.0).unwrap();
    assert_eq!((c.k, c.l), (3, 3));
    let c = apply_grid(ScenarioName::SweepRho, &small(), -70.0).unwrap();
    assert!((c.rho - 1e-7).abs() < 1e-20);
}

#[test]
fn mean_and_standard_error() {
    let s = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
    assert_eq!(s.n, 4);
    assert!((s.mean - 2.5).abs() < 1e-15);
    assert!((s.stderr - (5.0f64 / 12.0).sqrt()).abs() < 1e-12);
}

use fdgroup_core::algorithms::*;
use fdgroup_core::model::FixedAssignment;
use fdgroup_core::rates::{check_feasibility, weighted_sum_rate};
use fdgroup_core::system::config::default_eps_group;
use fdgroup_core::system::{dbm_to_watts, draw_instance, SystemConfig, C64};
use fdgroup_core::{CoreError, DesignPoint};

fn check_trace(t: &RunTrace, cfg: &SystemConfig, ch: &fdgroup_core::system::ChannelSet) {
    let seq = t.exact_sequence();
    for w in seq.windows(2) {
        assert!(w[1] >= w[0] - 1e-9, "{seq:?}");
    }
    for it in t.iterations.iter().filter(|it| !it.damped) {
        assert!(it.surrogate <= it.exact + 1e-6, "{} > {}", it.surrogate, it.exact);
    }
    assert!(!matches!(t.termination, Termination::SolverFailure(_)), "{:?}", t.termination);
    assert!(t.point.t.iter().sum::<f64>() <= 1.0 + 1e-9);
    let rep = check_feasibility(&t.point, ch, cfg, 1e-6);
    assert!(rep.feasible, "{rep:?}");
    let exact = weighted_sum_rate(&t.point, ch);
    assert!((exact - t.objective).abs() <= 1e-9 * exact);
}

#[test]
fn algorithm1_runs_are_monotone_and_feasible() {
    let cfg = SystemConfig::default();
    for seed in 0..3 {
        let (_, ch) = draw_instance(&cfg, seed).unwrap();
        let t = run_algorithm1(&ch, &cfg, None, &RunOptions::default()).unwrap();
        check_trace(&t, &cfg, &ch);
        assert!(t.converged);
        // Hardening a fixed-grouping solution changes nothing material.
        assert!((t.hardened.total - t.objective).abs() <= 0.01 * t.objective);
    }
}

#[test]
fn algorithm2_runs_are_monotone_and_feasible() {
    let cfg = SystemConfig::default();
    for seed in 0..2 {
        let (_, ch) = draw_instance(&cfg, seed).unwrap();
        let t = run_algorithm2(&ch, &cfg, None, &RunOptions::default()).unwrap();
        check_trace(&t, &cfg, &ch);
        assert!(t.iterations.len() <= cfg.max_iters);
    }
}

#[test]
fn zero_thresholds_skip_initialization() {
    let cfg = SystemConfig {
        rbar_dl: 0.0,
        rbar_ul: 0.0,
        ..SystemConfig::default()
    };
    let (_, ch) = draw_instance(&cfg, 3).unwrap();
    let t = run_algorithm1(&ch, &cfg, None, &RunOptions::default()).unwrap();
    assert_eq!(t.init_solves, 0);
    check_trace(&t, &cfg, &ch);
}

#[test]
fn starved_power_is_infeasible() {
    let cfg = SystemConfig {
        p_bs: dbm_to_watts(-60.0),
        ..SystemConfig::default()
    };
    let (_, ch) = draw_instance(&cfg, 0).unwrap();
    let r = run_algorithm1(&ch, &cfg, None, &RunOptions::default());
    assert!(matches!(r, Err(CoreError::InfeasibleScenario { .. })), "{r:?}");
}

#[test]
fn pinned_algorithm2_reduces_to_algorithm1() {
    // Low SNR keeps both loops converging within a few hundred steps.
    let p_bs = dbm_to_watts(-10.0);
    let cfg = SystemConfig {
        g: 1,
        omega: 0.0,
        p_bs,
        p_ul: dbm_to_watts(-20.0),
        rbar_dl: 0.0,
        rbar_ul: 0.0,
        eps_err: 1e-10,
        max_iters: 300,
        eps_group: default_eps_group(p_bs, 4),
        ..SystemConfig::default()
    };
    let fixed = FixedAssignment {
        alpha: vec![1.0; cfg.k],
        beta: vec![1.0; cfg.l],
        t: vec![1.0],
    };
    for seed in 0..3 {
        let (_, ch) = draw_instance(&cfg, seed).unwrap();
        let opts = RunOptions::default();
        let a = run_algorithm1(&ch, &cfg, Some(&fixed), &opts).unwrap();
        let b = run_algorithm2(&ch, &cfg, Some(&fixed), &opts).unwrap();
        let rel = (a.objective - b.objective).abs() / a.objective;
        assert!(rel <= 1e-4, "seed {seed}: {} vs {} ({rel:e})", a.objective, b.objective);
    }
}

#[test]
fn grouping_threshold_is_strict() {
    let mut pt = DesignPoint::zeros(2, 2, 2, 2);
    assert_eq!(extract_grouping(&pt, 0.1), (vec![0.0; 4], vec![0.0; 4]));
    pt.w[0][0] = C64::new(0.1, 0.0);
    pt.w[1][1] = C64::new(0.0, 0.2);
    pt.p[2] = 0.1;
    pt.p[3] = 0.1 + 1e-12;
    let (a, b) = extract_grouping(&pt, 0.1);
    assert_eq!(a, vec![0.0, 1.0, 0.0, 0.0]);
    assert_eq!(b, vec![0.0, 0.0, 0.0, 1.0]);
}

#[test]
fn half_duplex_baseline() {
    let cfg = SystemConfig::default();
    let (_, ch) = draw_instance(&cfg, 1).unwrap();
    let a = hd_baseline(&ch, &cfg, 1, &RunOptions::default()).unwrap();
    let b = hd_baseline(&ch, &cfg, 1, &RunOptions::default()).unwrap();
    assert_eq!(a.rate, b.rate);
    let (dl, ul) = (a.dl.unwrap().objective, a.ul.unwrap().objective);
    assert!((a.rate - 0.5 * (dl + ul)).abs() < 1e-12);
    assert!(dl > 0.0 && ul > 0.0);
}

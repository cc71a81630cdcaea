use fdgroup_conic::{
    solve, solve_warm, AffineExpr, ConicProgram, LinearConstraint, RotatedCone, SecondOrderCone,
    SolveStatus, SolverSettings, VarMap, VarRole,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod oracles;

fn program(n: usize) -> ConicProgram {
    let mut map = VarMap::new();
    map.register("x", VarRole::Decision, false, 1, n);
    ConicProgram::new(map)
}

fn settings() -> SolverSettings {
    SolverSettings::default()
}

#[test]
fn maximize_negative_x_above_one() {
    let mut p = program(1);
    p.objective[0] = -1.0;
    p.add_inequality(LinearConstraint::at_least(AffineExpr::var(0), 1.0));
    let r = solve(&p, &settings()).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    assert!((r.x[0] - 1.0).abs() < 1e-7, "{:?}", r.x);
    assert!((r.obj + 1.0).abs() < 1e-7);
}

#[test]
fn euclidean_norm_epigraph() {
    let mut p = program(1);
    p.objective[0] = -1.0;
    p.add_soc(SecondOrderCone {
        head: AffineExpr::var(0),
        body: vec![AffineExpr::constant(3.0), AffineExpr::constant(4.0)],
    });
    let r = solve(&p, &settings()).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    assert!((r.x[0] - 5.0).abs() < 1e-7, "{:?}", r.x);
}

#[test]
fn rotated_cone_gives_half_squared_norm() {
    // min u s.t. 2·u·1 ≥ ‖(1, 2)‖² → u = 2.5
    let mut p = program(1);
    p.objective[0] = -1.0;
    p.add_rotated(RotatedCone {
        u: AffineExpr::var(0),
        v: AffineExpr::constant(1.0),
        body: vec![AffineExpr::constant(1.0), AffineExpr::constant(2.0)],
    });
    let r = solve(&p, &settings()).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    assert!((r.x[0] - 2.5).abs() < 1e-7, "{:?}", r.x);
}

#[test]
fn detects_infeasible_and_unbounded() {
    let mut p = program(1);
    p.objective[0] = 1.0;
    p.add_inequality(LinearConstraint::at_least(AffineExpr::var(0), 1.0));
    p.add_inequality(LinearConstraint::at_most(AffineExpr::var(0), 0.0));
    assert_eq!(solve(&p, &settings()).unwrap().status, SolveStatus::Infeasible);

    let mut q = program(2);
    q.objective = vec![1.0, 1.0];
    q.add_inequality(LinearConstraint::at_least(AffineExpr::var(0), 0.0));
    q.add_inequality(LinearConstraint::at_most(AffineExpr::var(1), 3.0));
    q.add_inequality(LinearConstraint::at_least(AffineExpr::var(1), -3.0));
    assert_eq!(solve(&q, &settings()).unwrap().status, SolveStatus::Unbounded);

    let mut c = program(2);
    c.objective = vec![1.0, 0.0];
    c.add_soc(SecondOrderCone {
        head: AffineExpr::constant(1.0),
        body: vec![AffineExpr::var(0), AffineExpr::var(1)],
    });
    c.add_inequality(LinearConstraint::at_least(AffineExpr::var(0).with_term(1, 1.0), 2.0));
    assert_eq!(solve(&c, &settings()).unwrap().status, SolveStatus::Infeasible);
}

#[test]
fn rejects_structural_errors_before_iterating() {
    let mut p = program(2);
    p.add_soc(SecondOrderCone {
        head: AffineExpr::var(0),
        body: vec![],
    });
    assert!(solve(&p, &settings()).is_err());
    let mut q = program(2);
    q.add_inequality(LinearConstraint::at_least(
        AffineExpr::var(0).with_term(0, 1.0),
        0.0,
    ));
    assert!(solve(&q, &settings()).is_err());
}

#[test]
fn random_lps_match_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..200 {
        if let Err(e) = oracles::lp_case(&mut rng, 1e-6) {
            panic!("case {case}: {e}");
        }
    }
}

#[test]
fn projection_onto_second_order_cone_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..60 {
        if let Err(e) = oracles::projection_case(&mut rng, 1e-6) {
            panic!("case {case}: {e}");
        }
    }
}

#[test]
fn linear_objective_over_ball() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..60 {
        let d = rng.random_range(1..=6);
        let a: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let c: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let radius = rng.random_range(0.1..4.0);
        let mut p = program(d);
        p.objective = a.clone();
        p.add_soc(SecondOrderCone {
            head: AffineExpr::constant(radius),
            body: (0..d).map(|i| AffineExpr::var(i).with_constant(-c[i])).collect(),
        });
        let r = solve(&p, &settings()).unwrap();
        let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        let expect = a.iter().zip(&c).map(|(u, v)| u * v).sum::<f64>() + radius * na;
        assert_eq!(r.status, SolveStatus::Optimal, "case {case}");
        assert!((r.obj - expect).abs() < 1e-6 * (1.0 + expect.abs()), "case {case}");
    }
}

fn random_socp(rng: &mut ChaCha8Rng) -> ConicProgram {
    let n = rng.random_range(2..=8);
    let mut p = program(n);
    p.objective = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let x0: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
    // Bounding ball keeps the problem bounded; x0 is strictly inside.
    p.add_soc(SecondOrderCone {
        head: AffineExpr::constant(3.0),
        body: (0..n).map(AffineExpr::var).collect(),
    });
    for _ in 0..rng.random_range(0..4) {
        let body: Vec<AffineExpr> = (0..rng.random_range(1..4))
            .map(|_| {
                let mut e = AffineExpr::zero();
                for j in 0..n {
                    e.add_term(j, rng.random_range(-1.0..1.0));
                }
                e
            })
            .collect();
        let norm = body.iter().map(|e| e.eval(&x0).powi(2)).sum::<f64>().sqrt();
        p.add_soc(SecondOrderCone {
            head: AffineExpr::constant(norm + rng.random_range(0.1..1.0)),
            body,
        });
    }
    for _ in 0..rng.random_range(0..3) {
        let mut e = AffineExpr::zero();
        for j in 0..n {
            e.add_term(j, rng.random_range(-1.0..1.0));
        }
        let v = e.eval(&x0);
        p.add_inequality(LinearConstraint::at_most(e, v + 0.3));
    }
    p
}

#[test]
fn objective_scaling_preserves_status_and_argmax() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..30 {
        let p = random_socp(&mut rng);
        let mut q = p.clone();
        q.objective.iter_mut().for_each(|c| *c *= 1e3);
        let a = solve(&p, &settings()).unwrap();
        let b = solve(&q, &settings()).unwrap();
        assert_eq!(a.status, b.status, "case {case}");
        assert!(
            (b.obj - 1e3 * a.obj).abs() <= 1e-6 * (1.0 + b.obj.abs()),
            "case {case}: {} vs {}",
            b.obj,
            1e3 * a.obj
        );
    }
}

#[test]
fn weak_duality_along_iterates() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let s = SolverSettings {
        record_history: true,
        ..SolverSettings::default()
    };
    for case in 0..30 {
        let p = random_socp(&mut rng);
        let r = solve(&p, &s).unwrap();
        assert!(!r.history.is_empty());
        for (k, h) in r.history.iter().enumerate() {
            assert!(
                h.primal_obj <= h.dual_obj + h.residual_bound + 1e-9 * (1.0 + h.dual_obj.abs()),
                "case {case} iterate {k}: {h:?}"
            );
        }
    }
}

#[test]
fn warm_start_reaches_same_objective() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for case in 0..30 {
        let p = random_socp(&mut rng);
        let cold = solve(&p, &settings()).unwrap();
        let warm = solve_warm(&p, &settings(), Some(&cold.x)).unwrap();
        assert_eq!(warm.status, SolveStatus::Optimal, "case {case}");
        assert!(
            (warm.obj - cold.obj).abs() <= 1e-8 * (1.0 + cold.obj.abs()) * 2.0,
            "case {case}: {} vs {}",
            warm.obj,
            cold.obj
        );
    }
}

#[test]
fn deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let p = random_socp(&mut rng);
    let a = solve(&p, &settings()).unwrap();
    let b = solve(&p, &settings()).unwrap();
    assert_eq!(a, b);
}

use fdgroup_conic::{
    parse_program, write_program, AffineExpr, ConicProgram, LinearConstraint, RotatedCone,
    SecondOrderCone, VarMap, VarRole,
};
use proptest::prelude::*;

fn coef() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e6..1e6f64,
        Just(0.0),
        Just(1.0),
        (-1e-300..1e-300f64),
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
    ]
}

fn expr(n: usize) -> impl Strategy<Value = AffineExpr> {
    (
        prop::collection::btree_map(0..n, coef(), 0..4),
        coef(),
    )
        .prop_map(|(terms, constant)| {
            let mut e = AffineExpr::constant(constant);
            for (j, a) in terms {
                e.add_term(j, a);
            }
            e
        })
}

fn program() -> impl Strategy<Value = ConicProgram> {
    (1usize..4, 1usize..5).prop_flat_map(|(real, complex_pairs)| {
        let n = real + 2 * complex_pairs;
        (
            prop::collection::vec(coef(), n),
            coef(),
            prop::collection::vec((expr(n), coef()), 0..3),
            prop::collection::vec((expr(n), -1e3..0.0f64, prop::option::of(0.0..1e3f64)), 0..3),
            prop::collection::vec(prop::collection::vec(expr(n), 1..4), 0..3),
            prop::collection::vec(prop::collection::vec(expr(n), 1..3), 0..2),
        )
            .prop_map(move |(obj, oc, eqs, ineqs, socs, rots)| {
                let mut map = VarMap::new();
                map.register("r", VarRole::Epigraph, false, 1, real);
                map.register("w", VarRole::Decision, true, complex_pairs, 2);
                let mut p = ConicProgram::new(map);
                p.objective = obj;
                p.objective_constant = oc;
                for (e, v) in eqs {
                    p.add_equality(LinearConstraint::equal(e, v));
                }
                for (e, lo, hi) in ineqs {
                    p.add_inequality(LinearConstraint::between(e, lo, hi.unwrap_or(f64::INFINITY)));
                }
                // Heads are constants so they never collide with the body.
                for (k, body) in socs.into_iter().enumerate() {
                    p.add_soc(SecondOrderCone {
                        head: AffineExpr::constant(1.0 + k as f64),
                        body,
                    });
                }
                for body in rots {
                    p.add_rotated(RotatedCone {
                        u: AffineExpr::constant(0.5),
                        v: AffineExpr::constant(2.0),
                        body,
                    });
                }
                p.normalize();
                p
            })
    })
}

/// Writing folds expression constants of linear rows into the bounds.
fn fold_constants(mut p: ConicProgram) -> ConicProgram {
    for c in p.equalities.iter_mut().chain(p.inequalities.iter_mut()) {
        c.lower -= c.expr.constant;
        c.upper -= c.expr.constant;
        c.expr.constant = 0.0;
    }
    p
}

proptest! {
    #[test]
    fn dump_then_parse_is_identity(p in program()) {
        let text = write_program(&p);
        let q = parse_program(&text).unwrap();
        prop_assert_eq!(fold_constants(p), q.clone());
        prop_assert_eq!(write_program(&q), text);
    }

    #[test]
    fn parser_never_panics(s in "\\PC{0,200}") {
        let _ = parse_program(&s);
    }

    #[test]
    fn parser_never_panics_on_mutated_dumps(p in program(), cut in 0usize..400, junk in "[a-z0-9 .\\-\n]{0,12}") {
        let mut text = write_program(&p);
        let at = cut.min(text.len());
        let at = (0..=at).rev().find(|&i| text.is_char_boundary(i)).unwrap_or(0);
        text.insert_str(at, &junk);
        let _ = parse_program(&text);
    }
}

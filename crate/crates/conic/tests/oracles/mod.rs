//! Brute-force references for small LPs and projections onto the
//! second-order cone, shared with the workspace acceptance target.
#![allow(dead_code)]

use fdgroup_conic::{
    solve, AffineExpr, ConicProgram, LinearConstraint, SecondOrderCone, SolveStatus, SolverSettings,
    VarMap, VarRole,
};
use rand::Rng;

/// Solves a small dense linear system by Gaussian elimination with partial
/// pivoting; `None` when singular.
pub fn gauss(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-9 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (rhs[r] - s) / m[r][r];
    }
    Some(x)
}

pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Maximizes cᵀx over {Ex = f, Ax ≤ b} by enumerating vertices.
pub fn vertex_oracle(c: &[f64], eq: &[(Vec<f64>, f64)], ineq: &[(Vec<f64>, f64)]) -> Option<f64> {
    let n = c.len();
    let free = n - eq.len();
    let mut best: Option<f64> = None;
    for active in combinations(ineq.len(), free) {
        let mut rows: Vec<Vec<f64>> = eq.iter().map(|e| e.0.clone()).collect();
        let mut rhs: Vec<f64> = eq.iter().map(|e| e.1).collect();
        for &i in &active {
            rows.push(ineq[i].0.clone());
            rhs.push(ineq[i].1);
        }
        let Some(x) = gauss(rows, rhs) else { continue };
        let feasible = ineq.iter().all(|(a, b)| {
            a.iter().zip(&x).map(|(u, v)| u * v).sum::<f64>() <= b + 1e-9
        });
        if feasible {
            let v: f64 = c.iter().zip(&x).map(|(u, v)| u * v).sum();
            best = Some(best.map_or(v, |b: f64| b.max(v)));
        }
    }
    best
}

pub fn soc_projection(a: &[f64]) -> Vec<f64> {
    let t = a[0];
    let nb = a[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
    if nb <= t {
        a.to_vec()
    } else if nb <= -t {
        vec![0.0; a.len()]
    } else {
        let s = 0.5 * (t + nb);
        let mut out = vec![s];
        out.extend(a[1..].iter().map(|v| s * v / nb));
        out
    }
}

fn expr(a: &[f64]) -> AffineExpr {
    let mut e = AffineExpr::zero();
    for (j, &v) in a.iter().enumerate() {
        e.add_term(j, v);
    }
    e
}

/// A random bounded, feasible LP with at most six variables, solved and
/// compared with vertex enumeration.
pub fn lp_case(rng: &mut impl Rng, tol: f64) -> Result<(), String> {
    let n = rng.random_range(1..=6);
    let m = rng.random_range(0..=5);
    let n_eq = if n > 1 { rng.random_range(0..=1) } else { 0 };
    let c: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    let x_feas: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut ineq: Vec<(Vec<f64>, f64)> = Vec::new();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        ineq.push((e.clone(), 3.0));
        e[j] = -1.0;
        ineq.push((e, 3.0));
    }
    for _ in 0..m {
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ax: f64 = a.iter().zip(&x_feas).map(|(u, v)| u * v).sum();
        ineq.push((a, ax + rng.random_range(0.1..1.0)));
    }
    let eq: Vec<(Vec<f64>, f64)> = (0..n_eq)
        .map(|_| {
            let a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let ax = a.iter().zip(&x_feas).map(|(u, v)| u * v).sum();
            (a, ax)
        })
        .collect();

    let mut map = VarMap::new();
    map.register("x", VarRole::Decision, false, 1, n);
    let mut p = ConicProgram::new(map);
    p.objective = c.clone();
    for (a, b) in &ineq {
        p.add_inequality(LinearConstraint::at_most(expr(a), *b));
    }
    for (a, b) in &eq {
        p.add_equality(LinearConstraint::equal(expr(a), *b));
    }
    let oracle = vertex_oracle(&c, &eq, &ineq).ok_or("oracle found no vertex")?;
    let r = solve(&p, &SolverSettings::default()).map_err(|e| e.to_string())?;
    if r.status != SolveStatus::Optimal {
        return Err(format!("status {:?}", r.status));
    }
    if (r.obj - oracle).abs() > tol * (1.0 + oracle.abs()) {
        return Err(format!("solver {} oracle {oracle}", r.obj));
    }
    let v = p.max_violation(&r.x);
    if v > tol {
        return Err(format!("violation {v:e}"));
    }
    Ok(())
}

/// Euclidean projection of a random point onto the second-order cone,
/// posed as min t s.t. ‖x − a‖ ≤ t, x ∈ Q, against the closed form.
pub fn projection_case(rng: &mut impl Rng, tol: f64) -> Result<(), String> {
    let d = rng.random_range(2..=5);
    let a: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
    let mut map = VarMap::new();
    map.register("x", VarRole::Decision, false, 1, d);
    map.register("t", VarRole::Epigraph, false, 1, 1);
    let mut p = ConicProgram::new(map);
    p.objective[d] = -1.0;
    p.add_soc(SecondOrderCone {
        head: AffineExpr::var(d),
        body: (0..d).map(|i| AffineExpr::var(i).with_constant(-a[i])).collect(),
    });
    p.add_soc(SecondOrderCone {
        head: AffineExpr::var(0),
        body: (1..d).map(AffineExpr::var).collect(),
    });
    let r = solve(&p, &SolverSettings::default()).map_err(|e| e.to_string())?;
    if r.status != SolveStatus::Optimal {
        return Err(format!("status {:?}", r.status));
    }
    let proj = soc_projection(&a);
    let dist = proj.iter().zip(&a).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
    if (r.x[d] - dist).abs() > tol {
        return Err(format!("distance {} vs {dist}", r.x[d]));
    }
    // The argmin is only as accurate as the square root of the gap.
    let coord_tol = tol.sqrt().max(1e-4);
    for i in 0..d {
        if (r.x[i] - proj[i]).abs() > coord_tol {
            return Err(format!("coordinate {i}: {} vs {}", r.x[i], proj[i]));
        }
    }
    Ok(())
}

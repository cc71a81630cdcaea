//! Conversion of a [`ConicProgram`] to the solver's standard form, with
//! cone-preserving Ruiz equilibration.

use std::f64::consts::FRAC_1_SQRT_2;

use super::cones::ConeLayout;
use crate::program::{AffineExpr, ConicProgram};

pub type Row = Vec<(usize, f64)>;

#[derive(Debug, Clone)]
pub struct StandardForm {
    pub n: usize,
    pub c: Vec<f64>,
    pub a: Vec<Row>,
    pub b: Vec<f64>,
    pub g: Vec<Row>,
    pub h: Vec<f64>,
    pub layout: ConeLayout,
    /// A row with no variables whose bound cannot hold.
    pub trivially_infeasible: bool,
    /// `x_original = col_scale ∘ x`.
    pub col_scale: Vec<f64>,
    pub a_scale: Vec<f64>,
    pub g_scale: Vec<f64>,
    /// Norms of the unscaled data, for relative residuals.
    pub norm_b: f64,
    pub norm_c: f64,
    pub norm_h: f64,
}

const EMPTY_ROW_TOL: f64 = 1e-12;

impl StandardForm {
    pub fn new(p: &ConicProgram, equilibrate: bool) -> Self {
        let n = p.n_vars;
        let c: Vec<f64> = p.objective.iter().map(|v| -v).collect();
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut g_lp: Vec<Row> = Vec::new();
        let mut h_lp = Vec::new();
        let mut trivially_infeasible = false;

        let mut push_eq = |terms: &[(usize, f64)], rhs: f64, infeasible: &mut bool| {
            if terms.is_empty() {
                *infeasible |= rhs.abs() > EMPTY_ROW_TOL;
            } else {
                a.push(terms.to_vec());
                b.push(rhs);
            }
        };
        for e in &p.equalities {
            let mut expr = e.expr.clone();
            expr.normalize();
            push_eq(&expr.terms, e.lower - expr.constant, &mut trivially_infeasible);
        }
        for e in &p.inequalities {
            let mut expr = e.expr.clone();
            expr.normalize();
            let (lo, hi) = (e.lower - expr.constant, e.upper - expr.constant);
            if lo == hi {
                push_eq(&expr.terms, lo, &mut trivially_infeasible);
                continue;
            }
            if expr.terms.is_empty() {
                trivially_infeasible |= lo > EMPTY_ROW_TOL || hi < -EMPTY_ROW_TOL;
                continue;
            }
            if hi.is_finite() {
                g_lp.push(expr.terms.clone());
                h_lp.push(hi);
            }
            if lo.is_finite() {
                g_lp.push(expr.terms.iter().map(|&(j, v)| (j, -v)).collect());
                h_lp.push(-lo);
            }
        }

        let mut g = g_lp;
        let mut h = h_lp;
        let mut layout = ConeLayout {
            lp: g.len(),
            soc: Vec::new(),
        };
        let mut push_cone = |entries: Vec<AffineExpr>| {
            layout.soc.push(entries.len());
            for mut e in entries {
                e.normalize();
                // s = e(x) = h − Gx
                g.push(e.terms.iter().map(|&(j, v)| (j, -v)).collect());
                h.push(e.constant);
            }
        };
        for cone in &p.socs {
            let mut entries = Vec::with_capacity(cone.body.len() + 1);
            entries.push(cone.head.clone());
            entries.extend(cone.body.iter().cloned());
            push_cone(entries);
        }
        for cone in &p.rotated {
            let mut head = cone.u.scaled(FRAC_1_SQRT_2);
            head.add_scaled(&cone.v, FRAC_1_SQRT_2);
            let mut tail = cone.u.scaled(FRAC_1_SQRT_2);
            tail.add_scaled(&cone.v, -FRAC_1_SQRT_2);
            let mut entries = Vec::with_capacity(cone.body.len() + 2);
            entries.push(head);
            entries.extend(cone.body.iter().cloned());
            entries.push(tail);
            push_cone(entries);
        }

        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut sf = StandardForm {
            n,
            norm_b: norm(&b),
            norm_c: norm(&c),
            norm_h: norm(&h),
            c,
            a_scale: vec![1.0; a.len()],
            g_scale: vec![1.0; g.len()],
            a,
            b,
            g,
            h,
            layout,
            trivially_infeasible,
            col_scale: vec![1.0; n],
        };
        if equilibrate {
            sf.equilibrate(20);
        }
        sf
    }

    fn equilibrate(&mut self, passes: usize) {
        const MIN_SCALE: f64 = 1e-4;
        const MAX_SCALE: f64 = 1e4;
        let n = self.n;
        let mut d = vec![1.0; n];
        let mut ea = vec![1.0; self.a.len()];
        let mut eg = vec![1.0; self.g.len()];
        let soc_ranges: Vec<(usize, usize)> = self.layout.soc_ranges().collect();
        for _ in 0..passes {
            let mut col = vec![0.0f64; n];
            let mut row_a = vec![0.0f64; self.a.len()];
            let mut row_g = vec![0.0f64; self.g.len()];
            for (r, row) in self.a.iter().enumerate() {
                for &(j, v) in row {
                    let s = (v * ea[r] * d[j]).abs();
                    col[j] = col[j].max(s);
                    row_a[r] = row_a[r].max(s);
                }
            }
            for (r, row) in self.g.iter().enumerate() {
                for &(j, v) in row {
                    let s = (v * eg[r] * d[j]).abs();
                    col[j] = col[j].max(s);
                    row_g[r] = row_g[r].max(s);
                }
            }
            for &(o, len) in &soc_ranges {
                let m = row_g[o..o + len].iter().copied().fold(0.0, f64::max);
                row_g[o..o + len].fill(m);
            }
            let mut worst = 0.0f64;
            let mut update = |scale: &mut [f64], norms: &[f64]| {
                for (s, &nm) in scale.iter_mut().zip(norms) {
                    if nm > 0.0 {
                        worst = worst.max((1.0 - nm).abs());
                        *s = (*s / nm.sqrt()).clamp(MIN_SCALE, MAX_SCALE);
                    }
                }
            };
            update(&mut d, &col);
            update(&mut ea, &row_a);
            update(&mut eg, &row_g);
            if worst < 1e-3 {
                break;
            }
        }
        for (r, row) in self.a.iter_mut().enumerate() {
            for (j, v) in row.iter_mut() {
                *v *= ea[r] * d[*j];
            }
            self.b[r] *= ea[r];
        }
        for (r, row) in self.g.iter_mut().enumerate() {
            for (j, v) in row.iter_mut() {
                *v *= eg[r] * d[*j];
            }
            self.h[r] *= eg[r];
        }
        for (cj, dj) in self.c.iter_mut().zip(&d) {
            *cj *= dj;
        }
        self.col_scale = d;
        self.a_scale = ea;
        self.g_scale = eg;
    }

    pub fn unscale_x(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.col_scale).map(|(v, d)| v * d).collect()
    }

    /// `out = A x`.
    pub fn mul_a(&self, x: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(&self.a) {
            *o = row.iter().map(|&(j, v)| v * x[j]).sum();
        }
    }

    /// `out = G x`.
    pub fn mul_g(&self, x: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(&self.g) {
            *o = row.iter().map(|&(j, v)| v * x[j]).sum();
        }
    }

    /// `out += Aᵀ y`.
    pub fn add_at(&self, y: &[f64], out: &mut [f64]) {
        for (row, &yr) in self.a.iter().zip(y) {
            if yr != 0.0 {
                for &(j, v) in row {
                    out[j] += v * yr;
                }
            }
        }
    }

    /// `out += Gᵀ z`.
    pub fn add_gt(&self, z: &[f64], out: &mut [f64]) {
        for (row, &zr) in self.g.iter().zip(z) {
            if zr != 0.0 {
                for &(j, v) in row {
                    out[j] += v * zr;
                }
            }
        }
    }
}

use super::cones::{dot, ConeLayout, NtScaling};
use super::linsys::{DenseSym, Ldl};
use super::standard::StandardForm;
use super::{IterationLog, KktResiduals, SolveStatus, SolverSettings};

const STEP_FRACTION: f64 = 0.99;
const SIGMA_MIN: f64 = 1e-4;
const MIN_STEP: f64 = 1e-10;
const PIVOT_EPS: f64 = 1e-13;
const PIVOT_BUMP: f64 = 1e-7;
const REFINE_STEPS: usize = 8;

pub struct IpmOutput {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub kkt: KktResiduals,
    pub iters: usize,
    pub history: Vec<IterationLog>,
}

/// Reduced KKT system for one scaling.
struct Kkt<'a> {
    sf: &'a StandardForm,
    nt: &'a NtScaling,
    ldl: Ldl,
}

impl<'a> Kkt<'a> {
    fn factor(
        sf: &'a StandardForm,
        nt: &'a NtScaling,
        mat: &mut DenseSym,
        signs: &[f64],
        reg: f64,
    ) -> Option<Self> {
        let n = sf.n;
        let layout = &sf.layout;
        mat.clear();
        for j in 0..n {
            mat.add(j, j, reg);
        }
        for (r, row) in sf.a.iter().enumerate() {
            for &(j, v) in row {
                mat.add(n + r, j, v);
            }
            mat.add(n + r, n + r, -reg);
        }
        for (i, row) in sf.g[..layout.lp].iter().enumerate() {
            add_outer(mat, row, nt.lp_winv2(i));
        }
        let mut u = vec![0.0; n];
        let mut seen = vec![false; n];
        let mut touched: Vec<usize> = Vec::new();
        for (k, (o, d)) in layout.soc_ranges().enumerate() {
            let (scale, v) = nt.soc_winv2(k);
            add_outer(mat, &sf.g[o], -scale);
            for row in &sf.g[o + 1..o + d] {
                add_outer(mat, row, scale);
            }
            for (i, row) in sf.g[o..o + d].iter().enumerate() {
                for &(j, a) in row {
                    if !seen[j] {
                        seen[j] = true;
                        touched.push(j);
                    }
                    u[j] += v[i] * a;
                }
            }
            touched.sort_unstable();
            let urow: Vec<(usize, f64)> = touched.iter().map(|&j| (j, u[j])).collect();
            add_outer(mat, &urow, 2.0 * scale);
            for &j in &touched {
                u[j] = 0.0;
                seen[j] = false;
            }
            touched.clear();
        }
        let ldl = Ldl::factor(mat, signs, PIVOT_EPS, PIVOT_BUMP)?;
        Some(Self { sf, nt, ldl })
    }

    /// Solves `[[0, Aᵀ, Gᵀ], [A, 0, 0], [G, 0, −W²]] (dx, dy, dz) = (r1, r2, r3)`.
    fn solve(&self, r1: &[f64], r2: &[f64], r3: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let (mut dx, mut dy, mut dz) = self.solve_reduced(r1, r2, r3);
        let rhs_norm = inf_norm(r1).max(inf_norm(r2)).max(inf_norm(r3));
        let mut prev = f64::INFINITY;
        for _ in 0..REFINE_STEPS {
            let (e1, e2, e3) = self.residual(r1, r2, r3, &dx, &dy, &dz);
            let err = inf_norm(&e1).max(inf_norm(&e2)).max(inf_norm(&e3));
            if err <= 1e-14 * (1.0 + rhs_norm) || err >= 0.5 * prev {
                break;
            }
            prev = err;
            let (cx, cy, cz) = self.solve_reduced(&e1, &e2, &e3);
            axpy(1.0, &cx, &mut dx);
            axpy(1.0, &cy, &mut dy);
            axpy(1.0, &cz, &mut dz);
        }
        (dx, dy, dz)
    }

    fn solve_reduced(&self, r1: &[f64], r2: &[f64], r3: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let sf = self.sf;
        let n = sf.n;
        let layout = &sf.layout;
        let mut t = vec![0.0; r3.len()];
        self.nt.apply_winv2(layout, r3, &mut t);
        let mut rhs = Vec::with_capacity(n + r2.len());
        rhs.extend_from_slice(r1);
        sf.add_gt(&t, &mut rhs[..n]);
        rhs.extend_from_slice(r2);
        self.ldl.solve(&mut rhs);
        let dy = rhs[n..].to_vec();
        rhs.truncate(n);
        let dx = rhs;
        let mut gdx = vec![0.0; r3.len()];
        sf.mul_g(&dx, &mut gdx);
        for (g, r) in gdx.iter_mut().zip(r3) {
            *g -= r;
        }
        let mut dz = vec![0.0; r3.len()];
        self.nt.apply_winv2(layout, &gdx, &mut dz);
        (dx, dy, dz)
    }

    fn residual(
        &self,
        r1: &[f64],
        r2: &[f64],
        r3: &[f64],
        dx: &[f64],
        dy: &[f64],
        dz: &[f64],
    ) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let sf = self.sf;
        let mut k1 = vec![0.0; sf.n];
        sf.add_at(dy, &mut k1);
        sf.add_gt(dz, &mut k1);
        let e1: Vec<f64> = r1.iter().zip(&k1).map(|(r, k)| r - k).collect();
        let mut k2 = vec![0.0; r2.len()];
        sf.mul_a(dx, &mut k2);
        let e2: Vec<f64> = r2.iter().zip(&k2).map(|(r, k)| r - k).collect();
        let mut k3 = vec![0.0; r3.len()];
        sf.mul_g(dx, &mut k3);
        let mut w2dz = vec![0.0; r3.len()];
        self.nt.apply_w2(&sf.layout, dz, &mut w2dz);
        let e3: Vec<f64> = r3
            .iter()
            .zip(k3.iter().zip(&w2dz))
            .map(|(r, (g, w))| r - (g - w))
            .collect();
        (e1, e2, e3)
    }
}

fn add_outer(mat: &mut DenseSym, row: &[(usize, f64)], scale: f64) {
    let n = mat.n;
    for (p, &(i, vi)) in row.iter().enumerate() {
        let si = scale * vi;
        let base = i * n;
        for &(j, vj) in &row[..=p] {
            // rows are sorted, so i ≥ j
            mat.data[base + j] += si * vj;
        }
    }
}

struct Iterate {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    s: Vec<f64>,
    tau: f64,
    kappa: f64,
}

struct Residuals {
    rx: Vec<f64>,
    ry: Vec<f64>,
    rz: Vec<f64>,
    rt: f64,
    /// Aᵀy + Gᵀz and (Ax, Gx + s), used for certificates.
    aty_gtz: Vec<f64>,
    ax: Vec<f64>,
    gx_s: Vec<f64>,
}

impl Residuals {
    fn new(sf: &StandardForm, it: &Iterate) -> Self {
        let mut aty_gtz = vec![0.0; sf.n];
        sf.add_at(&it.y, &mut aty_gtz);
        sf.add_gt(&it.z, &mut aty_gtz);
        let rx: Vec<f64> = aty_gtz
            .iter()
            .zip(&sf.c)
            .map(|(v, c)| v + c * it.tau)
            .collect();
        let mut ax = vec![0.0; sf.b.len()];
        sf.mul_a(&it.x, &mut ax);
        let ry: Vec<f64> = ax.iter().zip(&sf.b).map(|(v, b)| v - b * it.tau).collect();
        let mut gx_s = vec![0.0; sf.h.len()];
        sf.mul_g(&it.x, &mut gx_s);
        axpy(1.0, &it.s, &mut gx_s);
        let rz: Vec<f64> = gx_s.iter().zip(&sf.h).map(|(v, h)| v - h * it.tau).collect();
        let rt = it.kappa + dot(&sf.c, &it.x) + dot(&sf.b, &it.y) + dot(&sf.h, &it.z);
        Self {
            rx,
            ry,
            rz,
            rt,
            aty_gtz,
            ax,
            gx_s,
        }
    }
}

/// Norms of residual-like vectors expressed in the original data units.
fn unscaled_norm(v: &[f64], inv_scale: &[f64]) -> f64 {
    v.iter()
        .zip(inv_scale)
        .map(|(x, s)| (x / s).powi(2))
        .sum::<f64>()
        .sqrt()
}

struct Metrics {
    pcost: f64,
    dcost: f64,
    pres: f64,
    dres: f64,
    gap: f64,
    relgap: f64,
    pinf: Option<f64>,
    dinf: Option<f64>,
    bound: f64,
}

fn metrics(sf: &StandardForm, it: &Iterate, r: &Residuals) -> Metrics {
    let tau = it.tau;
    let cx = dot(&sf.c, &it.x);
    let by_hz = dot(&sf.b, &it.y) + dot(&sf.h, &it.z);
    let pcost = cx / tau;
    let dcost = -by_hz / tau;
    // Scaled residuals are D·r for dual rows and E·r for primal rows.
    let d = &sf.col_scale;
    let pres = (unscaled_norm(&r.ry, &sf.a_scale) / tau / (1.0 + sf.norm_b))
        .max(unscaled_norm(&r.rz, &sf.g_scale) / tau / (1.0 + sf.norm_h));
    let dres = unscaled_norm(&r.rx, d) / tau / (1.0 + sf.norm_c);
    let gap = dot(&it.s, &it.z) / (tau * tau);
    let relgap = if pcost < 0.0 {
        gap / -pcost
    } else if dcost > 0.0 {
        gap / dcost
    } else {
        f64::INFINITY
    };
    let pinf = (by_hz < 0.0).then(|| unscaled_norm(&r.aty_gtz, d) / -by_hz);
    let dinf = (cx < 0.0).then(|| {
        (unscaled_norm(&r.ax, &sf.a_scale).max(unscaled_norm(&r.gx_s, &sf.g_scale))) / -cx
    });
    let bound = (dot(&it.x, &r.rx) - dot(&it.y, &r.ry) - dot(&it.z, &r.rz)).abs() / (tau * tau);
    Metrics {
        pcost,
        dcost,
        pres,
        dres,
        gap,
        relgap,
        pinf,
        dinf,
        bound,
    }
}

fn initial_point(sf: &StandardForm, settings: &SolverSettings, x0: Option<&[f64]>) -> Option<Iterate> {
    let n = sf.n;
    let p = sf.b.len();
    let m = sf.h.len();
    let layout = &sf.layout;
    let nt = NtScaling::identity(layout);
    let mut mat = DenseSym::zeros(n + p);
    let signs = pivot_signs(n, p);
    let kkt = Kkt::factor(sf, &nt, &mut mat, &signs, settings.static_regularization)?;

    let (x, _, zp) = kkt.solve(&vec![0.0; n], &sf.b, &sf.h);
    let mut x = x;
    let mut s: Vec<f64> = zp.iter().map(|v| -v).collect();
    if let Some(x0) = x0 {
        if x0.len() == n && x0.iter().all(|v| v.is_finite()) {
            x = x0.iter().zip(&sf.col_scale).map(|(v, d)| v / d).collect();
            let mut gx = vec![0.0; m];
            sf.mul_g(&x, &mut gx);
            s = sf.h.iter().zip(&gx).map(|(h, g)| h - g).collect();
        }
    }
    layout.shift_interior(&mut s);

    let neg_c: Vec<f64> = sf.c.iter().map(|v| -v).collect();
    let (_, y, mut z) = kkt.solve(&neg_c, &vec![0.0; p], &vec![0.0; m]);
    layout.shift_interior(&mut z);
    Some(Iterate {
        x,
        y,
        z,
        s,
        tau: 1.0,
        kappa: 1.0,
    })
}

fn pivot_signs(n: usize, p: usize) -> Vec<f64> {
    let mut signs = vec![1.0; n + p];
    signs[n..].fill(-1.0);
    signs
}

pub fn run(sf: &StandardForm, settings: &SolverSettings, x0: Option<&[f64]>) -> IpmOutput {
    let n = sf.n;
    let p = sf.b.len();
    let m = sf.h.len();
    let layout: &ConeLayout = &sf.layout;
    let degree = layout.degree() as f64;
    let mut history = Vec::new();

    let fail = |status, x: Vec<f64>| IpmOutput {
        status,
        x,
        kkt: KktResiduals {
            primal: f64::INFINITY,
            dual: f64::INFINITY,
            gap: f64::INFINITY,
        },
        iters: 0,
        history: Vec::new(),
    };
    if sf.trivially_infeasible {
        return fail(SolveStatus::Infeasible, vec![0.0; n]);
    }
    let Some(mut it) = initial_point(sf, settings, x0) else {
        return fail(SolveStatus::NumericalFailure, vec![0.0; n]);
    };

    let signs = pivot_signs(n, p);
    let mut mat = DenseSym::zeros(n + p);
    let mut best: Option<(f64, Vec<f64>, KktResiduals)> = None;
    let mut status;
    let mut kkt_out = KktResiduals::default();
    let mut last_step = 0.0;
    let mut iters = 0;

    loop {
        let r = Residuals::new(sf, &it);
        let mt = metrics(sf, &it, &r);
        let x_now: Vec<f64> = it.x.iter().map(|v| v / it.tau).collect();
        let kkt_now = KktResiduals {
            primal: mt.pres,
            dual: mt.dres,
            gap: mt.relgap.min(mt.gap),
        };
        if settings.record_history {
            history.push(IterationLog {
                primal_obj: -mt.pcost,
                dual_obj: -mt.dcost,
                residual_bound: mt.bound,
                primal_res: mt.pres,
                dual_res: mt.dres,
                step: last_step,
            });
        }
        if !(mt.pcost.is_finite() && mt.dcost.is_finite() && mt.pres.is_finite()) {
            status = SolveStatus::NumericalFailure;
            break;
        }
        let merit = mt.pres.max(mt.dres).max(mt.gap.min(mt.relgap));
        if best.as_ref().is_none_or(|b| merit < b.0) {
            best = Some((merit, x_now.clone(), kkt_now));
        }

        let gap_ok = mt.gap <= settings.abs_tol || mt.relgap <= settings.rel_tol;
        if mt.pres <= settings.feas_tol && mt.dres <= settings.feas_tol && gap_ok {
            status = SolveStatus::Optimal;
            kkt_out = kkt_now;
            best = Some((merit, x_now, kkt_now));
            break;
        }
        if let Some(pinf) = mt.pinf {
            if pinf <= settings.feas_tol && it.tau < it.kappa {
                status = SolveStatus::Infeasible;
                kkt_out = KktResiduals {
                    primal: pinf,
                    dual: 0.0,
                    gap: 0.0,
                };
                break;
            }
        }
        if let Some(dinf) = mt.dinf {
            if dinf <= settings.feas_tol && it.tau < it.kappa {
                status = SolveStatus::Unbounded;
                kkt_out = KktResiduals {
                    primal: 0.0,
                    dual: dinf,
                    gap: 0.0,
                };
                break;
            }
        }
        if iters >= settings.max_ipm_iters {
            status = SolveStatus::IterLimit;
            break;
        }

        let Some(nt) = NtScaling::new(layout, &it.s, &it.z) else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let Some(kkt) = Kkt::factor(sf, &nt, &mut mat, &signs, settings.static_regularization)
        else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let neg_c: Vec<f64> = sf.c.iter().map(|v| -v).collect();
        let (x1, y1, z1) = kkt.solve(&neg_c, &sf.b, &sf.h);
        let denom1 = dot(&sf.c, &x1) + dot(&sf.b, &y1) + dot(&sf.h, &z1) - it.kappa / it.tau;

        let mu = (dot(&it.s, &it.z) + it.tau * it.kappa) / (degree + 1.0);
        let lambda = &nt.lambda;
        let mut ll = vec![0.0; m];
        layout.jordan_product(lambda, lambda, &mut ll);

        let direction = |ds_rhs: &[f64], dk_rhs: f64, sigma: f64| -> Direction {
            let f = 1.0 - sigma;
            let mut q = vec![0.0; m];
            layout.jordan_divide(lambda, ds_rhs, &mut q);
            let mut wq = vec![0.0; m];
            nt.apply_w(layout, &q, &mut wq);
            let r1: Vec<f64> = r.rx.iter().map(|v| -f * v).collect();
            let r2: Vec<f64> = r.ry.iter().map(|v| -f * v).collect();
            let r3: Vec<f64> = r.rz.iter().zip(&wq).map(|(v, w)| -f * v - w).collect();
            let (x2, y2, z2) = kkt.solve(&r1, &r2, &r3);
            let num = -f * r.rt - dk_rhs / it.tau
                - (dot(&sf.c, &x2) + dot(&sf.b, &y2) + dot(&sf.h, &z2));
            let dtau = num / denom1;
            let mut dx = x2;
            axpy(dtau, &x1, &mut dx);
            let mut dy = y2;
            axpy(dtau, &y1, &mut dy);
            let mut dz = z2;
            axpy(dtau, &z1, &mut dz);
            // ds = W(q − W dz)
            let mut wdz = vec![0.0; m];
            nt.apply_w(layout, &dz, &mut wdz);
            let t: Vec<f64> = q.iter().zip(&wdz).map(|(a, b)| a - b).collect();
            let mut ds = vec![0.0; m];
            nt.apply_w(layout, &t, &mut ds);
            let dkappa = (dk_rhs - it.kappa * dtau) / it.tau;
            Direction {
                dx,
                dy,
                dz,
                ds,
                dtau,
                dkappa,
            }
        };

        // Predictor.
        let ds_aff: Vec<f64> = ll.iter().map(|v| -v).collect();
        let aff = direction(&ds_aff, -it.tau * it.kappa, 0.0);
        let alpha_aff = max_step(layout, &it, &aff).min(1.0);
        let sigma = (1.0 - alpha_aff).powi(3).clamp(SIGMA_MIN, 1.0);

        // Corrector.
        let mut ws = vec![0.0; m];
        nt.apply_winv(layout, &aff.ds, &mut ws);
        let mut wz = vec![0.0; m];
        nt.apply_w(layout, &aff.dz, &mut wz);
        let mut cross = vec![0.0; m];
        layout.jordan_product(&ws, &wz, &mut cross);
        let e = layout.identity();
        let ds_cc: Vec<f64> = (0..m)
            .map(|i| -ll[i] - cross[i] + sigma * mu * e[i])
            .collect();
        let dk_cc = -it.tau * it.kappa - aff.dtau * aff.dkappa + sigma * mu;
        let dir = direction(&ds_cc, dk_cc, sigma);
        if !dir.is_finite() {
            status = SolveStatus::NumericalFailure;
            break;
        }
        let alpha = (STEP_FRACTION * max_step(layout, &it, &dir)).min(1.0);
        if alpha < MIN_STEP {
            status = SolveStatus::NumericalFailure;
            break;
        }
        axpy(alpha, &dir.dx, &mut it.x);
        axpy(alpha, &dir.dy, &mut it.y);
        axpy(alpha, &dir.dz, &mut it.z);
        axpy(alpha, &dir.ds, &mut it.s);
        it.tau += alpha * dir.dtau;
        it.kappa += alpha * dir.dkappa;
        last_step = alpha;
        iters += 1;
    }

    let (x, kkt) = match status {
        SolveStatus::Optimal => (best.map(|b| b.1).unwrap_or_default(), kkt_out),
        SolveStatus::Infeasible | SolveStatus::Unbounded => {
            (it.x.iter().map(|v| v / it.tau).collect(), kkt_out)
        }
        _ => {
            let (merit, x, k) = best.unwrap_or((f64::INFINITY, vec![0.0; n], KktResiduals::default()));
            if merit <= settings.reduced_tol {
                status = SolveStatus::AlmostOptimal;
            }
            (x, k)
        }
    };
    IpmOutput {
        status,
        x,
        kkt,
        iters,
        history,
    }
}

struct Direction {
    dx: Vec<f64>,
    dy: Vec<f64>,
    dz: Vec<f64>,
    ds: Vec<f64>,
    dtau: f64,
    dkappa: f64,
}

impl Direction {
    fn is_finite(&self) -> bool {
        self.dtau.is_finite()
            && self.dkappa.is_finite()
            && self.dx.iter().chain(&self.dz).chain(&self.ds).chain(&self.dy).all(|v| v.is_finite())
    }
}

fn max_step(layout: &ConeLayout, it: &Iterate, d: &Direction) -> f64 {
    let mut a = layout.max_step(&it.s, &d.ds).min(layout.max_step(&it.z, &d.dz));
    if d.dtau < 0.0 {
        a = a.min(-it.tau / d.dtau);
    }
    if d.dkappa < 0.0 {
        a = a.min(-it.kappa / d.dkappa);
    }
    a
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

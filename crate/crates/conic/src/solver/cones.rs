//! Product cone `R₊^l × Q^{m₁} × … × Q^{m_q}` and its Nesterov–Todd scaling.

/// Layout of the slack vector: `lp` nonnegative scalars followed by the
/// second-order cones in order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConeLayout {
    pub lp: usize,
    pub soc: Vec<usize>,
}

impl ConeLayout {
    pub fn dim(&self) -> usize {
        self.lp + self.soc.iter().sum::<usize>()
    }

    /// Barrier degree: one per LP slot and per second-order cone.
    pub fn degree(&self) -> usize {
        self.lp + self.soc.len()
    }

    /// `(offset, dim)` of every second-order cone.
    pub fn soc_ranges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.soc.iter().scan(self.lp, |off, &d| {
            let start = *off;
            *off += d;
            Some((start, d))
        })
    }

    /// Identity element of the Jordan algebra.
    pub fn identity(&self) -> Vec<f64> {
        let mut e = vec![0.0; self.dim()];
        e[..self.lp].fill(1.0);
        for (o, _) in self.soc_ranges() {
            e[o] = 1.0;
        }
        e
    }

    /// Smallest spectral value over all blocks.
    pub fn min_eigenvalue(&self, u: &[f64]) -> f64 {
        let mut m = u[..self.lp].iter().copied().fold(f64::INFINITY, f64::min);
        for (o, d) in self.soc_ranges() {
            m = m.min(u[o] - norm(&u[o + 1..o + d]));
        }
        m
    }

    /// Adds `(1 + a)·e` when `u` is not strictly interior, where `a` is the
    /// distance needed to reach the boundary.
    pub fn shift_interior(&self, u: &mut [f64]) {
        let a = -self.min_eigenvalue(u);
        if a >= -1e-8 {
            let e = self.identity();
            for (ui, ei) in u.iter_mut().zip(e) {
                *ui += (1.0 + a) * ei;
            }
        }
    }

    /// Largest `α ∈ [0, ∞]` with `u + α·du` in the closed cone, assuming `u`
    /// is interior.
    pub fn max_step(&self, u: &[f64], du: &[f64]) -> f64 {
        let mut a = f64::INFINITY;
        for i in 0..self.lp {
            if du[i] < 0.0 {
                a = a.min(-u[i] / du[i]);
            }
        }
        for (o, d) in self.soc_ranges() {
            a = a.min(soc_max_step(&u[o..o + d], &du[o..o + d]));
        }
        a
    }

    /// Jordan product `u ∘ v`.
    pub fn jordan_product(&self, u: &[f64], v: &[f64], out: &mut [f64]) {
        for i in 0..self.lp {
            out[i] = u[i] * v[i];
        }
        for (o, d) in self.soc_ranges() {
            let (u, v) = (&u[o..o + d], &v[o..o + d]);
            out[o] = dot(u, v);
            for i in 1..d {
                out[o + i] = u[0] * v[i] + v[0] * u[i];
            }
        }
    }

    /// Solves `λ ∘ x = w` for `x` (`λ` interior).
    pub fn jordan_divide(&self, lambda: &[f64], w: &[f64], out: &mut [f64]) {
        for i in 0..self.lp {
            out[i] = w[i] / lambda[i];
        }
        for (o, d) in self.soc_ranges() {
            let (l, w) = (&lambda[o..o + d], &w[o..o + d]);
            let det = l[0] * l[0] - dot(&l[1..], &l[1..]);
            let x0 = (l[0] * w[0] - dot(&l[1..], &w[1..])) / det;
            out[o] = x0;
            for i in 1..d {
                out[o + i] = (w[i] - x0 * l[i]) / l[0];
            }
        }
    }
}

fn soc_max_step(u: &[f64], du: &[f64]) -> f64 {
    // (u0 + a du0)² − ‖u1 + a du1‖² = qa a² + qb a + qc, qc > 0.
    let qa = du[0] * du[0] - dot(&du[1..], &du[1..]);
    let qb = 2.0 * (u[0] * du[0] - dot(&u[1..], &du[1..]));
    let qc = (u[0] * u[0] - dot(&u[1..], &u[1..])).max(0.0);
    let mut best = f64::INFINITY;
    if du[0] < 0.0 {
        best = -u[0] / du[0];
    }
    if qa == 0.0 {
        if qb < 0.0 {
            best = best.min(-qc / qb);
        }
        return best;
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return best;
    }
    let q = -0.5 * (qb + qb.signum() * disc.sqrt());
    let roots = [q / qa, if q != 0.0 { qc / q } else { f64::INFINITY }];
    for r in roots {
        if r >= 0.0 && r.is_finite() {
            best = best.min(r);
        }
    }
    best
}

#[derive(Debug, Clone)]
struct SocScaling {
    eta: f64,
    /// Normalized scaling point with `w̄ᵀJw̄ = 1`.
    w: Vec<f64>,
}

/// Nesterov–Todd scaling `W` with `W z = W⁻¹ s = λ`.
#[derive(Debug, Clone)]
pub struct NtScaling {
    lp: Vec<f64>,
    soc: Vec<SocScaling>,
    pub lambda: Vec<f64>,
}

impl NtScaling {
    /// Identity scaling, used during initialization.
    pub fn identity(layout: &ConeLayout) -> Self {
        let soc = layout
            .soc
            .iter()
            .map(|&d| {
                let mut w = vec![0.0; d];
                w[0] = 1.0;
                SocScaling { eta: 1.0, w }
            })
            .collect();
        Self {
            lp: vec![1.0; layout.lp],
            soc,
            lambda: layout.identity(),
        }
    }

    /// Returns `None` if `s` or `z` has left the interior.
    pub fn new(layout: &ConeLayout, s: &[f64], z: &[f64]) -> Option<Self> {
        let mut lp = Vec::with_capacity(layout.lp);
        let mut lambda = vec![0.0; s.len()];
        for i in 0..layout.lp {
            if !(s[i] > 0.0 && z[i] > 0.0) {
                return None;
            }
            lp.push((s[i] / z[i]).sqrt());
            lambda[i] = (s[i] * z[i]).sqrt();
        }
        let mut soc = Vec::with_capacity(layout.soc.len());
        for (o, d) in layout.soc_ranges() {
            let (s, z) = (&s[o..o + d], &z[o..o + d]);
            let s_res = s[0] * s[0] - dot(&s[1..], &s[1..]);
            let z_res = z[0] * z[0] - dot(&z[1..], &z[1..]);
            if !(s_res > 0.0 && z_res > 0.0 && s[0] > 0.0 && z[0] > 0.0) {
                return None;
            }
            let (sn, zn) = (s_res.sqrt(), z_res.sqrt());
            let sz: f64 = s.iter().zip(z).map(|(a, b)| a * b).sum::<f64>() / (sn * zn);
            let gamma = ((1.0 + sz) / 2.0).sqrt();
            let mut w = vec![0.0; d];
            w[0] = (s[0] / sn + z[0] / zn) / (2.0 * gamma);
            for i in 1..d {
                w[i] = (s[i] / sn - z[i] / zn) / (2.0 * gamma);
            }
            let eta = (s_res / z_res).sqrt().sqrt();
            let sc = SocScaling { eta, w };
            sc.apply(z, &mut lambda[o..o + d], false);
            soc.push(sc);
        }
        Some(Self { lp, soc, lambda })
    }

    pub fn apply_w(&self, layout: &ConeLayout, v: &[f64], out: &mut [f64]) {
        for i in 0..layout.lp {
            out[i] = self.lp[i] * v[i];
        }
        for ((o, d), sc) in layout.soc_ranges().zip(&self.soc) {
            sc.apply(&v[o..o + d], &mut out[o..o + d], false);
        }
    }

    pub fn apply_winv(&self, layout: &ConeLayout, v: &[f64], out: &mut [f64]) {
        for i in 0..layout.lp {
            out[i] = v[i] / self.lp[i];
        }
        for ((o, d), sc) in layout.soc_ranges().zip(&self.soc) {
            sc.apply(&v[o..o + d], &mut out[o..o + d], true);
        }
    }

    /// `W² v`.
    pub fn apply_w2(&self, layout: &ConeLayout, v: &[f64], out: &mut [f64]) {
        let mut tmp = vec![0.0; v.len()];
        self.apply_w(layout, v, &mut tmp);
        self.apply_w(layout, &tmp, out);
    }

    /// `W⁻² v`.
    pub fn apply_winv2(&self, layout: &ConeLayout, v: &[f64], out: &mut [f64]) {
        let mut tmp = vec![0.0; v.len()];
        self.apply_winv(layout, v, &mut tmp);
        self.apply_winv(layout, &tmp, out);
    }

    /// Diagonal weight of LP slot `i` in `W⁻²`.
    pub fn lp_winv2(&self, i: usize) -> f64 {
        1.0 / (self.lp[i] * self.lp[i])
    }

    /// `(η⁻², v)` with `W⁻² = η⁻²(2vvᵀ − J)` for SOC number `k`.
    pub fn soc_winv2(&self, k: usize) -> (f64, Vec<f64>) {
        let sc = &self.soc[k];
        let mut v = sc.w.clone();
        for x in &mut v[1..] {
            *x = -*x;
        }
        (1.0 / (sc.eta * sc.eta), v)
    }
}

impl SocScaling {
    fn apply(&self, v: &[f64], out: &mut [f64], inverse: bool) {
        let w = &self.w;
        let sign = if inverse { -1.0 } else { 1.0 };
        let w1v1 = dot(&w[1..], &v[1..]);
        let scale = if inverse { 1.0 / self.eta } else { self.eta };
        out[0] = scale * (w[0] * v[0] + sign * w1v1);
        let c = sign * v[0] + w1v1 / (1.0 + w[0]);
        for i in 1..w.len() {
            out[i] = scale * (v[i] + c * w[i]);
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout() -> ConeLayout {
        ConeLayout {
            lp: 2,
            soc: vec![3, 4],
        }
    }

    #[test]
    fn nt_point_maps_z_and_s_to_lambda() {
        let l = layout();
        let s = [1.5, 0.2, 2.0, 0.5, -1.0, 3.0, 1.0, 0.5, -2.0];
        let z = [0.3, 4.0, 1.2, -0.9, 0.1, 1.1, -0.2, 0.3, 0.4];
        let nt = NtScaling::new(&l, &s, &z).unwrap();
        let mut wz = vec![0.0; 9];
        let mut winv_s = vec![0.0; 9];
        nt.apply_w(&l, &z, &mut wz);
        nt.apply_winv(&l, &s, &mut winv_s);
        for i in 0..9 {
            assert!((wz[i] - winv_s[i]).abs() < 1e-12, "{i}: {} {}", wz[i], winv_s[i]);
            assert!((wz[i] - nt.lambda[i]).abs() < 1e-12);
        }
        let mut back = vec![0.0; 9];
        nt.apply_winv(&l, &wz, &mut back);
        for i in 0..9 {
            assert!((back[i] - z[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn winv2_matches_factored_form() {
        let l = ConeLayout { lp: 0, soc: vec![3] };
        let s = [2.0, 0.5, -1.0];
        let z = [1.1, -0.2, 0.3];
        let nt = NtScaling::new(&l, &s, &z).unwrap();
        let (scale, v) = nt.soc_winv2(0);
        let x = [0.3, -0.7, 1.9];
        let mut direct = vec![0.0; 3];
        nt.apply_winv2(&l, &x, &mut direct);
        let vx = dot(&v, &x);
        let jx = [-x[0], x[1], x[2]];
        for i in 0..3 {
            let f = scale * (2.0 * v[i] * vx + jx[i]);
            assert!((f - direct[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn jordan_divide_inverts_product() {
        let l = layout();
        let lam = [1.0, 2.0, 2.0, 0.5, -1.0, 3.0, 1.0, 0.5, -2.0];
        let w = [0.4, -1.0, 0.3, 0.2, 0.1, -0.5, 0.6, 0.7, 0.8];
        let mut x = vec![0.0; 9];
        let mut back = vec![0.0; 9];
        l.jordan_divide(&lam, &w, &mut x);
        l.jordan_product(&lam, &x, &mut back);
        for i in 0..9 {
            assert!((back[i] - w[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn max_step_hits_boundary() {
        let l = ConeLayout { lp: 1, soc: vec![3] };
        let u = [1.0, 2.0, 0.0, 0.0];
        let du = [-0.5, -1.0, 1.0, 0.0];
        let a = l.max_step(&u, &du);
        // LP block alone gives 2; SOC: (2 − a)² = a² → a = 1.
        assert!((a - 1.0).abs() < 1e-12);
        let mut v = u.to_vec();
        for i in 0..4 {
            v[i] += a * du[i];
        }
        assert!(l.min_eigenvalue(&v).abs() < 1e-12);
    }
}

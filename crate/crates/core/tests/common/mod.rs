#![allow(dead_code)]

use fdgroup_core::system::{CMat, CVec, ChannelSet, C64};
use fdgroup_core::DesignPoint;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cn(r: &mut ChaCha8Rng) -> C64 {
    C64::new(r.random::<f64>() * 2.0 - 1.0, r.random::<f64>() * 2.0 - 1.0)
}

pub fn cvec(n: usize, scale: f64, r: &mut ChaCha8Rng) -> CVec {
    CVec::from_fn(n, |_, _| cn(r) * scale)
}

/// Channels with O(scale) entries and the given noise and SI levels.
pub fn channels(
    k: usize,
    l: usize,
    ntx: usize,
    nrx: usize,
    scale: f64,
    sigma: f64,
    rho: f64,
    r: &mut ChaCha8Rng,
) -> ChannelSet {
    ChannelSet {
        h: (0..k).map(|_| cvec(ntx, scale, r)).collect(),
        g: (0..l).map(|_| cvec(nrx, scale, r)).collect(),
        g_hat: CMat::from_fn(l, k, |_, _| cn(r) * scale * 0.3),
        g_i: CMat::from_fn(ntx, nrx, |_, _| cn(r)),
        pl_dl: vec![0.5; k],
        pl_ul: vec![0.5; l],
        pl_cross: DMatrix::from_element(l, k, 0.1),
        sigma_dl: sigma,
        sigma_ul: sigma,
        rho,
    }
}

pub fn point(k: usize, l: usize, g: usize, ntx: usize, r: &mut ChaCha8Rng) -> DesignPoint {
    let mut pt = DesignPoint::zeros(k, l, g, ntx);
    for w in &mut pt.w {
        *w = cvec(ntx, 0.5, r);
    }
    for p in &mut pt.p {
        *p = r.random::<f64>();
    }
    for a in pt.alpha.iter_mut().chain(pt.beta.iter_mut()) {
        *a = r.random::<f64>();
    }
    let raw: Vec<f64> = (0..g).map(|_| r.random::<f64>() + 0.1).collect();
    let s: f64 = raw.iter().sum();
    pt.t = raw.iter().map(|v| v / s).collect();
    pt
}

/// Complex Gauss-Jordan inverse with partial pivoting, kept independent of
/// the library's Cholesky path.
pub fn gauss_inverse(m: &CMat) -> CMat {
    let n = m.nrows();
    let mut a = m.clone();
    let mut inv = CMat::identity(n, n);
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[(i, c)].norm().total_cmp(&a[(j, c)].norm())).unwrap();
        a.swap_rows(c, piv);
        inv.swap_rows(c, piv);
        let d = a[(c, c)];
        for j in 0..n {
            a[(c, j)] /= d;
            inv[(c, j)] /= d;
        }
        for i in (0..n).filter(|&i| i != c) {
            let f = a[(i, c)];
            if f != C64::new(0.0, 0.0) {
                for j in 0..n {
                    let (ac, ic) = (a[(c, j)], inv[(c, j)]);
                    a[(i, j)] -= f * ac;
                    inv[(i, j)] -= f * ic;
                }
            }
        }
    }
    inv
}

/// ln det of a Hermitian positive definite matrix by Gaussian elimination.
pub fn ln_det(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut a = m.clone();
    let mut s = 0.0;
    for c in 0..n {
        let d = a[(c, c)];
        s += d.norm().ln();
        for i in c + 1..n {
            let f = a[(i, c)] / d;
            for j in c..n {
                let v = a[(c, j)];
                a[(i, j)] -= f * v;
            }
        }
    }
    s
}

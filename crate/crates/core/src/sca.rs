use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

use crate::error::{CoreError, Result};
use crate::point::DesignPoint;
use crate::rates::{inner, ul_covariance};
use crate::system::{ChannelSet, CMat, CVec, C64};

/// Coefficients of the DL rate minorant φc + χ·Re{hᴴw} − ϖ·θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DlMinorantCoeffs {
    pub varphi: f64,
    pub chi: f64,
    pub varpi: f64,
}

/// Coefficients of the UL rate minorant ϑ + ψ·p − λ(w, p).
#[derive(Debug, Clone, PartialEq)]
pub struct UlMinorantCoeffs {
    pub vartheta: f64,
    pub psi: f64,
    pub theta: CMat,
}

/// Coefficients from x = Re{hᴴw} and φ at the expansion point.
pub fn dl_coeffs_from(x: f64, phi: f64) -> DlMinorantCoeffs {
    let r = x * x / (phi * phi);
    DlMinorantCoeffs {
        varphi: r.ln_1p() - r,
        chi: 2.0 * x / (phi * phi),
        varpi: x * x / (phi * phi * (phi * phi + x * x)),
    }
}

pub fn dl_minorant_coeffs(
    expansion: &DesignPoint,
    ch: &ChannelSet,
    k: usize,
    g: usize,
) -> Result<DlMinorantCoeffs> {
    let phi = expansion.aux.phi[expansion.dl(k, g)];
    if !(phi > 0.0) || !phi.is_finite() {
        return Err(CoreError::ExpansionPoint {
            what: "phi",
            user: k,
            group: g,
        });
    }
    let x = inner(&ch.h[k], expansion.w(k, g)).re;
    let c = dl_coeffs_from(x, phi);
    if !(c.varphi.is_finite() && c.chi.is_finite() && c.varpi.is_finite()) {
        return Err(CoreError::NonFiniteCoefficient {
            what: "downlink minorant",
            user: k,
            group: g,
        });
    }
    Ok(c)
}

pub fn dl_minorant_eval(c: &DlMinorantCoeffs, h: &CVec, w_kg: &CVec, theta_kg: f64) -> f64 {
    c.varphi + c.chi * inner(h, w_kg).re - c.varpi * theta_kg
}

/// The minorant with the epigraph variable at its tight value φ² + Re².
pub fn dl_minorant_tight(c: &DlMinorantCoeffs, re_hw: f64, phi: f64) -> f64 {
    c.varphi + c.chi * re_hw - c.varpi * (phi * phi + re_hw * re_hw)
}

fn inverse(m: &CMat) -> CMat {
    let n = m.nrows();
    Cholesky::new(m.clone())
        .expect("covariance is positive definite")
        .solve(&CMat::identity(n, n))
}

pub fn ul_minorant_coeffs(
    expansion: &DesignPoint,
    ch: &ChannelSet,
    l: usize,
    g: usize,
) -> Result<UlMinorantCoeffs> {
    let p = expansion.p(l, g);
    let xi = ul_covariance(l + 1, g, expansion, ch);
    let xi_inv = inverse(&xi);
    let q = ch.g[l].dotc(&(&xi_inv * &ch.g[l])).re;
    let gamma = p * p * q;
    let xi_plus = ul_covariance(l, g, expansion, ch);
    let mut theta = xi_inv - inverse(&xi_plus);
    // Symmetrize away rounding.
    theta = (&theta + theta.adjoint()) * C64::from(0.5);
    let c = UlMinorantCoeffs {
        vartheta: gamma.ln_1p() - gamma,
        psi: 2.0 * p * q,
        theta,
    };
    if !(c.vartheta.is_finite() && c.psi.is_finite() && c.theta.iter().all(|z| z.is_finite())) {
        return Err(CoreError::NonFiniteCoefficient {
            what: "uplink minorant",
            user: l,
            group: g,
        });
    }
    Ok(c)
}

/// λ(w, p) evaluated term by term through the complex quadratic forms.
pub fn lambda_eval(c: &UlMinorantCoeffs, pt: &DesignPoint, ch: &ChannelSet, l: usize, g: usize) -> f64 {
    let form = |v: &CVec| v.dotc(&(&c.theta * v)).re;
    let mut s = ch.sigma_ul * c.theta.trace().re;
    for j in l..pt.l {
        s += pt.p(j, g).powi(2) * form(&ch.g[j]);
    }
    if ch.rho > 0.0 {
        for k in 0..pt.k {
            s += ch.rho * form(&(ch.g_i.adjoint() * pt.w(k, g)));
        }
    }
    s
}

pub fn ul_minorant_eval(c: &UlMinorantCoeffs, p_lg: f64, lambda: f64) -> f64 {
    c.vartheta + c.psi * p_lg - lambda
}

/// First-order minorant of x² at x_ref.
pub fn square_minorant(x: f64, x_ref: f64) -> f64 {
    x_ref * x_ref + 2.0 * x_ref * (x - x_ref)
}

/// Convex majorant of x·y, exact at (x_ref, y_ref).
pub fn bilinear_majorant(x: f64, y: f64, x_ref: f64, y_ref: f64) -> Result<f64> {
    if !(x_ref > 0.0 && y_ref > 0.0) {
        return Err(CoreError::DegenerateReference { x_ref, y_ref });
    }
    let r = x_ref / y_ref;
    Ok(0.5 * x * x / r + 0.5 * y * y * r)
}

/// Real embedding [[Re A, −Im A], [Im A, Re A]] of a Hermitian matrix, so
/// that xᴴAx = [Re x; Im x]ᵀ E [Re x; Im x].
pub fn real_embedding(a: &CMat) -> DMatrix<f64> {
    let n = a.nrows();
    let mut e = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = a[(i, j)];
            e[(i, j)] = z.re;
            e[(i, n + j)] = -z.im;
            e[(n + i, j)] = z.im;
            e[(n + i, n + j)] = z.re;
        }
    }
    e
}

pub fn stack(v: &CVec) -> Vec<f64> {
    v.iter().map(|z| z.re).chain(v.iter().map(|z| z.im)).collect()
}

/// Eigenvalues below this are treated as zero when factoring.
pub const EIGEN_CLIP: f64 = 1e-12;

/// R with RᵀR = E for the real embedding E of a PSD Hermitian matrix,
/// dropping eigenvalues below `EIGEN_CLIP`. Rows act on stacked vectors.
pub fn psd_factor(a: &CMat) -> DMatrix<f64> {
    let e = real_embedding(a);
    let eig = SymmetricEigen::new(e);
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > EIGEN_CLIP)
        .collect();
    let n = eig.eigenvalues.len();
    DMatrix::from_fn(keep.len(), n, |r, c| {
        let i = keep[r];
        eig.eigenvalues[i].sqrt() * eig.eigenvectors[(c, i)]
    })
}

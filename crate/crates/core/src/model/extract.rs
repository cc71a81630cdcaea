use fdgroup_conic::{ConicProgram, SolverResult, VarBlock};

use crate::error::{CoreError, Result};
use crate::point::DesignPoint;
use crate::system::C64;

fn read(b: Option<&VarBlock>, x: &[f64], out: &mut [f64]) {
    if let Some(b) = b {
        for (e, v) in out.iter_mut().enumerate().take(b.count) {
            *v = x[b.index(e, 0)];
        }
    }
}

fn write(b: Option<&VarBlock>, vals: &[f64], x: &mut [f64]) {
    if let Some(b) = b {
        for (e, &v) in vals.iter().enumerate().take(b.count) {
            x[b.index(e, 0)] = v;
        }
    }
}

/// Reads a solver result back into a design point. Quantities the program
/// does not carry (α, β, t in the fixed-grouping kinds, unused
/// auxiliaries) are copied from `expansion`.
pub fn extract_point(
    program: &ConicProgram,
    result: &SolverResult,
    expansion: &DesignPoint,
) -> Result<DesignPoint> {
    if !result.status.is_solved() {
        return Err(CoreError::Extraction(result.status));
    }
    Ok(decode(program, &result.x, expansion))
}

pub(crate) fn decode(program: &ConicProgram, x: &[f64], expansion: &DesignPoint) -> DesignPoint {
    let m = &program.var_map;
    let mut pt = expansion.clone();
    if let Some(w) = m.get("w") {
        let n = w.entry_len / 2;
        for (e, v) in pt.w.iter_mut().enumerate() {
            for i in 0..n {
                v[i] = C64::new(x[w.index(e, i)], x[w.index(e, n + i)]);
            }
        }
    }
    read(m.get("p"), x, &mut pt.p);
    read(m.get("alpha"), x, &mut pt.alpha);
    read(m.get("beta"), x, &mut pt.beta);
    read(m.get("t"), x, &mut pt.t);
    let a = &mut pt.aux;
    read(m.get("phi"), x, &mut a.phi);
    read(m.get("theta"), x, &mut a.theta);
    if m.get("phi").is_some() {
        for (e, s) in expansion.aux.phi.iter().enumerate() {
            a.phi[e] *= s;
            a.theta[e] *= s * s;
        }
    }
    read(m.get("theta_tilde"), x, &mut a.theta_tilde);
    read(m.get("tau"), x, &mut a.tau);
    read(m.get("tau_hat"), x, &mut a.tau_hat);
    read(m.get("tau_tilde"), x, &mut a.tau_tilde);
    read(m.get("kappa"), x, &mut a.kappa);
    read(m.get("kappa_hat"), x, &mut a.kappa_hat);
    read(m.get("kappa_tilde"), x, &mut a.kappa_tilde);
    read(m.get("omega"), x, &mut a.omega);
    read(m.get("p_hat"), x, &mut a.p_hat);
    pt
}

/// The solver vector corresponding to `pt` in a program built around
/// `expansion`; helper variables are zero.
pub fn encode_point(program: &ConicProgram, pt: &DesignPoint, expansion: &DesignPoint) -> Vec<f64> {
    let m = &program.var_map;
    let mut x = vec![0.0; program.n_vars];
    if let Some(w) = m.get("w") {
        let n = w.entry_len / 2;
        for (e, v) in pt.w.iter().enumerate().take(w.count) {
            for i in 0..n {
                x[w.index(e, i)] = v[i].re;
                x[w.index(e, n + i)] = v[i].im;
            }
        }
    }
    write(m.get("p"), &pt.p, &mut x);
    write(m.get("alpha"), &pt.alpha, &mut x);
    write(m.get("beta"), &pt.beta, &mut x);
    write(m.get("t"), &pt.t, &mut x);
    let a = &pt.aux;
    let s = &expansion.aux.phi;
    let phi: Vec<f64> = a.phi.iter().zip(s).map(|(v, s)| v / s).collect();
    let theta: Vec<f64> = a.theta.iter().zip(s).map(|(v, s)| v / (s * s)).collect();
    write(m.get("phi"), &phi, &mut x);
    write(m.get("theta"), &theta, &mut x);
    write(m.get("theta_tilde"), &a.theta_tilde, &mut x);
    write(m.get("tau"), &a.tau, &mut x);
    write(m.get("tau_hat"), &a.tau_hat, &mut x);
    write(m.get("tau_tilde"), &a.tau_tilde, &mut x);
    write(m.get("kappa"), &a.kappa, &mut x);
    write(m.get("kappa_hat"), &a.kappa_hat, &mut x);
    write(m.get("kappa_tilde"), &a.kappa_tilde, &mut x);
    write(m.get("omega"), &a.omega, &mut x);
    write(m.get("p_hat"), &a.p_hat, &mut x);
    x
}
